"""Hamiltonian assembly.

Three layers of the same physics:

* :func:`h_full` builds the driven model on the truncated
  (cavity, phonon, qubit) tensor-product space,
  H = (omega_q/2) sigma_z + omega_m b+b + g1 (a+b + a b+)
      + gamma g2 (b sigma+ + b+ sigma-).
* :func:`h_int3` is its restriction to the conserved single-excitation
  subspace spanned by |phi1> = |1,0,g>, |phi2> = |0,1,g>,
  |phi3> = |0,0,e>, dropping the free-energy diagonal
  (:func:`free_energy_diagonal` restores it).
* :func:`h_tqd_closed` is the closed-form counter-diabatic term
  i G (|phi1><phi3| - |phi3><phi1|) that suppresses transitions between
  the instantaneous eigenstates, and :func:`h_tqd_numeric` rebuilds the
  same term generically from gauge-fixed eigenvector derivatives, which
  serves as the independent cross-check of the closed form.
"""

from dataclasses import dataclass

import numpy as np
from numpy.linalg import eigh

from .errors import DegenerateSpectrumError, GaugeFixingError, IntegrationAccuracyError
from .hilbert import Operator, SpaceSignature, annihilation, embed, sigma_minus, sigma_z
from .pulse import PulseSchedule

MIN_EIGEN_GAP = 1e-8
GAUGE_ANCHOR_TOL = 1e-12
RICHARDSON_TOL = 1e-6


@dataclass(frozen=True)
class ModelParams:
    """Physical constants plus the coupling schedule and truncation."""

    omega_m: float
    omega_q: float
    schedule: PulseSchedule
    signature: SpaceSignature

    def __post_init__(self):
        if self.omega_m <= 0:
            raise ValueError(f"omega_m must be positive, got {self.omega_m}")


@dataclass(frozen=True)
class ThreeLevelBasis:
    """Index map of the single-excitation basis into a larger space."""

    signature: SpaceSignature
    indices: tuple

    @classmethod
    def in_space(cls, signature: SpaceSignature) -> "ThreeLevelBasis":
        """Locate |1,0,g>, |0,1,g>, |0,0,e> inside a (cavity, phonon, qubit) space."""
        if signature.n_subsystems != 3 or signature.dims[2] != 2:
            raise ValueError(f"expected a (cavity, phonon, qubit) space, got {signature.dims}")
        indices = (
            signature.flat_index((1, 0, 0)),
            signature.flat_index((0, 1, 0)),
            signature.flat_index((0, 0, 1)),
        )
        return cls(signature, indices)

    @classmethod
    def bare(cls) -> "ThreeLevelBasis":
        """The basis on its own 3-dimensional space (interaction-picture runs)."""
        return cls(SpaceSignature((3,)), (0, 1, 2))

    def projection(self) -> np.ndarray:
        """(total_dim x 3) matrix whose columns are the basis vectors."""
        cols = np.zeros((self.signature.total_dim, 3), dtype=complex)
        for k, idx in enumerate(self.indices):
            cols[idx, k] = 1.0
        return cols


def h_full(params: ModelParams, t: float) -> Operator:
    """Driven Hamiltonian on the full tensor-product space at time t."""
    sig = params.signature
    if sig.n_subsystems != 3 or sig.dims[2] != 2:
        raise ValueError(f"h_full needs a (cavity, phonon, qubit) space, got {sig.dims}")
    a = embed(annihilation(sig.dims[0]), 0, sig)
    b = embed(annihilation(sig.dims[1]), 1, sig)
    sm = embed(sigma_minus(), 2, sig)
    sp = sm.dag()
    sz = embed(sigma_z(), 2, sig)
    g1, g2 = params.schedule.couplings(t)
    gamma = params.schedule.gamma
    return (
        0.5 * params.omega_q * sz
        + params.omega_m * (b.dag() @ b)
        + g1 * (a.dag() @ b + a @ b.dag())
        + (gamma * g2) * (b @ sp + b.dag() @ sm)
    )


def h_int3(schedule: PulseSchedule, t: float) -> np.ndarray:
    """Interaction Hamiltonian in the single-excitation basis.

    [[0, g1, 0], [g1, 0, gamma g2], [0, gamma g2, 0]]; its spectrum is
    {0, +g0, -g0} with g0 = sqrt(g1^2 + gamma^2 g2^2) at all times.
    """
    g1, g2 = schedule.couplings(t)
    gg2 = schedule.gamma * g2
    return np.array(
        [[0.0, g1, 0.0], [g1, 0.0, gg2], [0.0, gg2, 0.0]], dtype=complex
    )


def free_energy_diagonal(omega_m: float, omega_q: float) -> np.ndarray:
    """diag(-omega_q/2, omega_m - omega_q/2, omega_q/2): the part of the
    full Hamiltonian that the interaction picture drops."""
    return np.diag(
        [-0.5 * omega_q, omega_m - 0.5 * omega_q, 0.5 * omega_q]
    ).astype(complex)


def dark_state(schedule: PulseSchedule, t: float) -> np.ndarray:
    """Zero-eigenvalue eigenvector (-gamma g2, 0, g1)/g0.

    Its phonon component is exactly zero at all times, which is what
    makes transfer along it leave the mechanical mode unperturbed.
    """
    g1, g2 = schedule.couplings(t)
    g0 = schedule.g0(t)
    return np.array([-schedule.gamma * g2 / g0, 0.0, g1 / g0], dtype=complex)


def h_tqd_closed(schedule: PulseSchedule, t: float) -> np.ndarray:
    """Closed-form counter-diabatic term i G (|phi1><phi3| - |phi3><phi1|)."""
    amp = 1j * schedule.cd_amplitude(t)
    out = np.zeros((3, 3), dtype=complex)
    out[0, 2] = amp
    out[2, 0] = -amp
    return out


def _fix_phases(vecs: np.ndarray, anchors=None):
    """Rotate each eigenvector so its anchor component is real positive.

    Anchors default to each column's largest-magnitude component; side
    evaluations reuse the center anchors so all three share one gauge.
    """
    vecs = vecs.copy()
    if anchors is None:
        anchors = tuple(int(np.argmax(np.abs(vecs[:, n]))) for n in range(vecs.shape[1]))
    for n, row in enumerate(anchors):
        c = vecs[row, n]
        if abs(c) < GAUGE_ANCHOR_TOL:
            raise GaugeFixingError(
                f"anchor component {row} of eigenvector {n} vanished; cannot fix phase"
            )
        vecs[:, n] *= c.conjugate() / abs(c)
    return vecs, anchors


def _match_columns(vecs_side: np.ndarray, vecs_ref: np.ndarray) -> np.ndarray:
    """Reorder side eigenvectors to pair each reference column with its
    maximal-overlap partner (one-to-one)."""
    overlaps = np.abs(vecs_ref.conj().T @ vecs_side)
    order = []
    used = set()
    for n in range(vecs_ref.shape[1]):
        for k in np.argsort(-overlaps[n]):
            k = int(k)
            if k not in used:
                used.add(k)
                order.append(k)
                break
    return vecs_side[:, order]


def _cd_from_differences(h_of_t, t, h_step):
    w_c, v_c = eigh(h_of_t(t))
    if len(w_c) > 1:
        gap = float(np.min(np.diff(np.sort(w_c))))
        if gap <= MIN_EIGEN_GAP:
            raise DegenerateSpectrumError(
                f"eigenvalue gap {gap:.3e} at t={t} is below {MIN_EIGEN_GAP:.0e}"
            )
    v_c, anchors = _fix_phases(v_c)
    sides = []
    for tt in (t + h_step, t - h_step):
        _, v_s = eigh(h_of_t(tt))
        v_s = _match_columns(v_s, v_c)
        v_s, _ = _fix_phases(v_s, anchors)
        sides.append(v_s)
    dv = (sides[0] - sides[1]) / (2.0 * h_step)
    out = np.zeros_like(v_c)
    for n in range(v_c.shape[1]):
        ket = v_c[:, n]
        dket = dv[:, n]
        out += 1j * (np.outer(dket, ket.conj()) - np.vdot(ket, dket) * np.outer(ket, ket.conj()))
    return out


def h_tqd_numeric(h_of_t, t: float, h_step: float = 1e-4, richardson: bool = True) -> np.ndarray:
    """Counter-diabatic term i sum_n (|dn/dt><n| - <n|dn/dt> |n><n|) by
    central differences of the gauge-fixed instantaneous eigenbasis.

    Parameters
    ----------
    h_of_t : callable
        t -> Hermitian ndarray with a non-degenerate spectrum near t.
    t : float
        Evaluation time.
    h_step : float
        Central-difference step; the default balances truncation against
        cancellation at double precision.
    richardson : bool
        When true (default), re-evaluate at h_step/2, require the two
        results to agree within 1e-6 entrywise, and return the finer one.

    Raises
    ------
    DegenerateSpectrumError
        If the eigenvalue gap at t is below 1e-8.
    GaugeFixingError
        If an eigenvector's anchor component vanishes.
    IntegrationAccuracyError
        If the step-halving check drifts by more than 1e-6.
    """
    if h_step <= 0:
        raise ValueError(f"h_step must be positive, got {h_step}")
    coarse = _cd_from_differences(h_of_t, t, h_step)
    if not richardson:
        return coarse
    fine = _cd_from_differences(h_of_t, t, 0.5 * h_step)
    drift = float(np.abs(fine - coarse).max())
    if drift > RICHARDSON_TOL:
        raise IntegrationAccuracyError(
            f"eigenvector-derivative drift {drift:.3e} under step halving at t={t}; "
            "reduce h_step or check smoothness of the Hamiltonian"
        )
    return fine
