"""Exception types raised by the simulator.

ValueError is reserved for caller mistakes (bad dimensions, bad arguments);
everything that can go wrong *during* a run derives from SimulationError.
"""


class SimulationError(Exception):
    """Base class for runtime failures of a simulation."""


class DegenerateSpectrumError(SimulationError):
    """Eigenvalue gap too small to differentiate the eigenbasis."""


class GaugeFixingError(SimulationError):
    """Eigenvector phase could not be anchored (anchor component vanished)."""


class IntegrationAccuracyError(SimulationError):
    """An accuracy check failed; reduce the step size."""


class DivergenceError(SimulationError):
    """The evolved state became non-finite."""


class PositivityError(SimulationError):
    """Density matrix developed a significantly negative eigenvalue."""


class TruncationOverflowError(SimulationError):
    """Population reached the top level of a truncated ladder."""


class ConfigValidationError(SimulationError):
    """A scenario configuration violates one or more constraints."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
