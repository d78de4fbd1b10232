"""Fixed-step RK4 time evolution for pure states and density matrices.

A fixed step keeps trajectories bit-reproducible and makes dt-halving
convergence checks meaningful; the problems in scope are non-stiff at
the scenario parameters, so nothing fancier is warranted.  The pure
engine integrates i d/dt psi = H(t) psi and never renormalizes (norm
drift is a diagnostic); the mixed engine integrates the standard
dissipator form

    d/dt rho = -i [H, rho] + sum_k r_k (A_k rho A_k+ - {A_k+ A_k, rho}/2)

with rates (kappa, gamma_q, gamma_m (n_th + 1), gamma_m n_th) applied to
the (cavity, qubit-lowering, phonon-lowering, phonon-raising) collapse
operators, symmetrizing rho each step and logging the correction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, IntegrationAccuracyError, PositivityError
from .hilbert import Operator, QuantumState, SpaceSignature

STABILITY_LIMIT = 0.1
PURE_DRIFT_LIMIT = 1e-6
TRACE_DRIFT_LIMIT = 1e-6
HERMITIZATION_LIMIT = 1e-10
MIN_EIGENVALUE_LIMIT = -1e-6


@dataclass(frozen=True)
class DissipationParams:
    """Decay rates (rad/ns) and the thermal phonon occupancy of the bath."""

    kappa: float
    gamma_q: float
    gamma_m: float
    n_th: float

    def __post_init__(self):
        for name in ("kappa", "gamma_q", "gamma_m", "n_th"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def lossless(self) -> bool:
        return self.kappa == 0 and self.gamma_q == 0 and self.gamma_m == 0


@dataclass(frozen=True)
class Trajectory:
    """Stored time grid, states and conservation diagnostics of one run.

    ``states`` has shape (n_stored, dim) for pure runs and
    (n_stored, dim, dim) for mixed runs; ``norm_or_trace`` holds |psi|^2
    or Re tr(rho) per stored step.
    """

    signature: SpaceSignature
    kind: str
    times: np.ndarray
    states: np.ndarray
    norm_or_trace: np.ndarray
    min_eigenvalue: np.ndarray | None = None
    max_hermitization: float = 0.0

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _resolve_grid(t_span, dt):
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError(f"t_span must be increasing, got {t_span}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    n_steps = max(1, round((t1 - t0) / dt))
    return t0, t1, n_steps, (t1 - t0) / n_steps


def _spectral_scale(h_of_t, t0, t1):
    mid = 0.5 * (t0 + t1)
    return max(
        float(np.linalg.norm(np.asarray(h_of_t(t0)), 2)),
        float(np.linalg.norm(np.asarray(h_of_t(mid)), 2)),
    )


def _check_stability(dt_eff, scale):
    if dt_eff * scale >= STABILITY_LIMIT:
        raise ValueError(
            f"dt * max||generator|| = {dt_eff * scale:.3f} exceeds the stability "
            f"guard {STABILITY_LIMIT}; choose dt below {STABILITY_LIMIT / scale:.2e}"
        )


def evolve_schrodinger(h_of_t, psi0: QuantumState, t_span, dt: float,
                       stride: int = 10) -> Trajectory:
    """Integrate i d/dt psi = H(t) psi with classic RK4.

    Parameters
    ----------
    h_of_t : callable
        t -> Hermitian ndarray (any fixed dimension).
    psi0 : QuantumState
        Normalized pure initial state.
    t_span : (float, float)
        Integration window; the step is adjusted to cover it exactly.
    dt : float
        Requested step; dt * max||H|| must stay below 0.1 (checked at the
        start and midpoint of the window).
    stride : int
        Store every stride-th step; the first and last steps are always
        stored.

    Raises
    ------
    IntegrationAccuracyError
        If | |psi|^2 - 1 | exceeds 1e-6 at any step.
    DivergenceError
        If the state becomes non-finite.
    """
    if not psi0.is_pure:
        raise ValueError("evolve_schrodinger needs a pure initial state")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    t0, t1, n_steps, dt_eff = _resolve_grid(t_span, dt)
    _check_stability(dt_eff, _spectral_scale(h_of_t, t0, t1))

    y = psi0.vector.astype(complex).copy()
    times = [t0]
    states = [y.copy()]
    norms = [float(np.vdot(y, y).real)]
    for k in range(n_steps):
        t = t0 + k * dt_eff
        h_a = np.asarray(h_of_t(t))
        h_m = np.asarray(h_of_t(t + 0.5 * dt_eff))
        h_b = np.asarray(h_of_t(t + dt_eff))
        k1 = -1j * (h_a @ y)
        k2 = -1j * (h_m @ (y + (0.5 * dt_eff) * k1))
        k3 = -1j * (h_m @ (y + (0.5 * dt_eff) * k2))
        k4 = -1j * (h_b @ (y + dt_eff * k3))
        y = y + (dt_eff / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        norm_sq = float(np.vdot(y, y).real)
        if not np.isfinite(norm_sq):
            raise DivergenceError(f"state became non-finite at t={t + dt_eff}")
        if abs(norm_sq - 1.0) > PURE_DRIFT_LIMIT:
            raise IntegrationAccuracyError(
                f"norm drift {abs(norm_sq - 1.0):.3e} at t={t + dt_eff} exceeds "
                f"{PURE_DRIFT_LIMIT}; reduce dt"
            )
        if (k + 1) % stride == 0 or k + 1 == n_steps:
            times.append(t0 + (k + 1) * dt_eff)
            states.append(y.copy())
            norms.append(norm_sq)

    return Trajectory(
        signature=psi0.signature,
        kind="pure",
        times=np.array(times),
        states=np.array(states),
        norm_or_trace=np.array(norms),
    )


def _collapse_matrix(op) -> np.ndarray:
    return op.matrix if isinstance(op, Operator) else np.asarray(op, dtype=complex)


def evolve_lindblad(h_of_t, rho0: QuantumState, diss: DissipationParams,
                    collapse_ops, t_span, dt: float, stride: int = 10) -> Trajectory:
    """Integrate the master equation with thermal mechanical channels.

    ``collapse_ops`` is the 4-tuple of operators (cavity lowering a,
    qubit lowering sigma-, phonon lowering b, phonon raising b+) on the
    same space as rho0; their rates are kappa, gamma_q,
    gamma_m (n_th + 1) and gamma_m n_th.  Channels with zero rate are
    skipped.  Each step rho is re-symmetrized; the correction magnitude
    is logged on the trajectory and must stay below 1e-10.

    Raises
    ------
    IntegrationAccuracyError
        On trace drift above 1e-6 or symmetrization above 1e-10.
    PositivityError
        If a stored step has an eigenvalue below -1e-6.
    DivergenceError
        If rho becomes non-finite.
    """
    if rho0.is_pure:
        raise ValueError("evolve_lindblad needs a density matrix; call to_density() first")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    mats = [_collapse_matrix(op) for op in collapse_ops]
    if len(mats) != 4:
        raise ValueError(f"expected 4 collapse operators, got {len(mats)}")
    dim = rho0.signature.total_dim
    for m in mats:
        if m.shape != (dim, dim):
            raise ValueError(f"collapse operator shape {m.shape} does not match dim {dim}")
    rates = (
        diss.kappa,
        diss.gamma_q,
        diss.gamma_m * (diss.n_th + 1.0),
        diss.gamma_m * diss.n_th,
    )

    scaled = [np.sqrt(r) * m for r, m in zip(rates, mats) if r > 0]
    t0, t1, n_steps, dt_eff = _resolve_grid(t_span, dt)
    diss_scale = 0.0
    if scaled:
        jump = np.stack(scaled)
        jump_dag = jump.conj().transpose(0, 2, 1)
        anti = (jump_dag @ jump).sum(axis=0)  # sum of A+A, rate-weighted
        diss_scale = float(np.linalg.norm(anti, 2))
    _check_stability(dt_eff, _spectral_scale(h_of_t, t0, t1) + diss_scale)

    def rhs(t, rho):
        h = np.asarray(h_of_t(t))
        out = -1j * (h @ rho - rho @ h)
        if scaled:
            out += ((jump @ rho) @ jump_dag).sum(axis=0)
            out -= 0.5 * (anti @ rho + rho @ anti)
        return out

    rho = rho0.density.astype(complex).copy()
    times = [t0]
    states = [rho.copy()]
    traces = [float(np.trace(rho).real)]
    min_eigs = [float(np.linalg.eigvalsh(rho)[0])]
    max_herm = 0.0
    for k in range(n_steps):
        t = t0 + k * dt_eff
        k1 = rhs(t, rho)
        k2 = rhs(t + 0.5 * dt_eff, rho + (0.5 * dt_eff) * k1)
        k3 = rhs(t + 0.5 * dt_eff, rho + (0.5 * dt_eff) * k2)
        k4 = rhs(t + dt_eff, rho + dt_eff * k3)
        rho = rho + (dt_eff / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        herm = 0.5 * float(np.abs(rho - rho.conj().T).max())
        if herm > HERMITIZATION_LIMIT:
            raise IntegrationAccuracyError(
                f"Hermiticity correction {herm:.3e} at t={t + dt_eff} exceeds "
                f"{HERMITIZATION_LIMIT}; integrator is misbehaving"
            )
        max_herm = max(max_herm, herm)
        rho = 0.5 * (rho + rho.conj().T)

        trace = float(np.trace(rho).real)
        if not np.isfinite(trace):
            raise DivergenceError(f"density matrix became non-finite at t={t + dt_eff}")
        if abs(trace - 1.0) > TRACE_DRIFT_LIMIT:
            raise IntegrationAccuracyError(
                f"trace drift {abs(trace - 1.0):.3e} at t={t + dt_eff} exceeds "
                f"{TRACE_DRIFT_LIMIT}; reduce dt"
            )
        if (k + 1) % stride == 0 or k + 1 == n_steps:
            low = float(np.linalg.eigvalsh(rho)[0])
            if low < MIN_EIGENVALUE_LIMIT:
                raise PositivityError(
                    f"min eigenvalue {low:.3e} at t={t + dt_eff} below {MIN_EIGENVALUE_LIMIT}"
                )
            times.append(t0 + (k + 1) * dt_eff)
            states.append(rho.copy())
            traces.append(trace)
            min_eigs.append(low)

    return Trajectory(
        signature=rho0.signature,
        kind="mixed",
        times=np.array(times),
        states=np.array(states),
        norm_or_trace=np.array(traces),
        min_eigenvalue=np.array(min_eigs),
        max_hermitization=max_herm,
    )
