"""Populations and transfer fidelity extracted from trajectories.

Fidelity of the photon-to-qubit transfer is the overlap
F = <0_c, e| tr_phonon(rho) |0_c, e>: the phonon mode is traced out, so
F is insensitive to the mechanical state and measures only "no photon
left in the cavity, qubit excited".  It decays after the transfer
completes whenever the qubit decays, so the headline scalar of a run is
the peak over time; the final value is reported alongside it.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import SimulationError
from .dynamics import Trajectory
from .hilbert import partial_trace_matrix
from .model import ThreeLevelBasis

FIDELITY_IMAG_TOL = 1e-12


@dataclass(frozen=True)
class TransferRecord:
    """Per-step transfer observables of one run."""

    times: np.ndarray
    p_phi1: np.ndarray
    p_phi2: np.ndarray
    p_phi3: np.ndarray
    fidelity: np.ndarray | None = None
    peak_fidelity: float | None = None
    time_of_peak: float | None = None


def populations(traj: Trajectory, basis: ThreeLevelBasis) -> TransferRecord:
    """P(phi_k) per stored step, as |<phi_k|psi>|^2 or <phi_k|rho|phi_k>."""
    if basis.signature != traj.signature:
        raise ValueError(
            f"basis lives on {basis.signature.dims} but trajectory on {traj.signature.dims}"
        )
    idx = list(basis.indices)
    if traj.kind == "pure":
        probs = np.abs(traj.states[:, idx]) ** 2
    else:
        probs = traj.states[:, idx, idx].real
    return TransferRecord(
        times=traj.times,
        p_phi1=probs[:, 0],
        p_phi2=probs[:, 1],
        p_phi3=probs[:, 2],
    )


def fidelity(traj: Trajectory) -> np.ndarray:
    """Transfer fidelity per stored step of a density-matrix trajectory.

    Traces out the phonon slot and reads the |0_c, e> diagonal entry of
    the reduced matrix; raises if handed a pure-state trajectory
    (convert upstream) or if a value has a non-negligible imaginary part.
    """
    if traj.kind != "mixed":
        raise ValueError("fidelity needs a density-matrix trajectory")
    dims = traj.signature.dims
    if len(dims) != 3 or dims[2] != 2:
        raise ValueError(f"expected a (cavity, phonon, qubit) space, got {dims}")
    target = 1  # flat index of |0_c, e> in the reduced (cavity, qubit) space
    out = np.empty(len(traj.times))
    for i, rho in enumerate(traj.states):
        reduced = partial_trace_matrix(rho, dims, keep=(0, 2))
        value = reduced[target, target]
        if abs(value.imag) > FIDELITY_IMAG_TOL:
            raise SimulationError(
                f"fidelity developed imaginary part {value.imag:.3e} at step {i}"
            )
        out[i] = value.real
    return out


def with_fidelity(record: TransferRecord, traj: Trajectory) -> TransferRecord:
    """Attach the fidelity curve and its peak to a populations record."""
    fid = fidelity(traj)
    peak = int(np.argmax(fid))
    return replace(
        record,
        fidelity=fid,
        peak_fidelity=float(fid[peak]),
        time_of_peak=float(record.times[peak]),
    )
