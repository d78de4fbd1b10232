"""Simulator for phonon-mediated photon-to-qubit quantum state transfer
in a hybrid optomechanical system: adiabatic passage dynamics, the
transitionless (counter-diabatic) shortcut, and the dissipative master
equation treatment with a thermal mechanical bath."""

from .errors import (
    ConfigValidationError,
    DegenerateSpectrumError,
    DivergenceError,
    GaugeFixingError,
    IntegrationAccuracyError,
    PositivityError,
    SimulationError,
    TruncationOverflowError,
)
from .hilbert import (
    Operator,
    QuantumState,
    SpaceSignature,
    annihilation,
    basis_state,
    embed,
    identity,
    partial_trace,
    partial_trace_matrix,
    sigma_minus,
    sigma_plus,
    sigma_z,
)
from .pulse import PulseSchedule
from .model import (
    ModelParams,
    ThreeLevelBasis,
    dark_state,
    free_energy_diagonal,
    h_full,
    h_int3,
    h_tqd_closed,
    h_tqd_numeric,
)
from .dynamics import (
    DissipationParams,
    Trajectory,
    evolve_lindblad,
    evolve_schrodinger,
)
from .observables import TransferRecord, fidelity, populations, with_fidelity
from .scenarios import (
    RunResult,
    ScenarioConfig,
    config_from_file,
    convergence_report,
    run_scenario,
    run_single,
    sweep_fig6,
)

__version__ = "0.1.0"
