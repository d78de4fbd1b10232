"""Logistic (Vitanov-style) coupling schedule and its exact derivatives.

Units: rates and couplings in rad/ns, time in ns.  The mixing angle
theta(t) = (pi/2) / (1 + exp(-v (t - 3/v))) sweeps from 0 to pi/2 with
midpoint pi/4 at t = 3/v; the rapidity v sets how fast the two coupling
envelopes g1 = g_max sin(theta) and g2 = g_max cos(theta) swap.  By
t = 12/v the logistic exponent is -9 and theta is within 2e-4 rad of
pi/2, so simulations default to that window.

The counter-diabatic amplitude G = gamma (g1' g2 - g1 g2') / g0^2 with
g0^2 = g1^2 + gamma^2 g2^2 collapses, for this pulse shape, to the
closed form gamma * theta'(t) * g_max^2 / g0^2, which is what
``cd_amplitude`` evaluates; theta' is always computed analytically so
the amplitude stays smooth for the integrator.
"""

import math
from dataclasses import dataclass


def _logistic(x: float) -> float:
    # tanh form cannot overflow for any finite x, unlike exp
    return 0.5 * (1.0 + math.tanh(0.5 * x))


@dataclass(frozen=True)
class PulseSchedule:
    """Coupling schedule with rapidity ``v``, coupling ratio ``gamma``
    and overall scale ``g_max`` (default 1 rad/ns)."""

    v: float
    gamma: float
    g_max: float = 1.0

    def __post_init__(self):
        if self.v <= 0:
            raise ValueError(f"rapidity v must be positive, got {self.v}")
        if self.gamma <= 0:
            raise ValueError(f"coupling ratio gamma must be positive, got {self.gamma}")
        if self.g_max <= 0:
            raise ValueError(f"coupling scale g_max must be positive, got {self.g_max}")

    def theta(self, t: float) -> float:
        """Mixing angle at time t, in (0, pi/2)."""
        return 0.5 * math.pi * _logistic(self.v * t - 3.0)

    def theta_dot(self, t: float) -> float:
        """Exact time derivative of the mixing angle."""
        x = self.v * t - 3.0
        s = _logistic(x)
        return 0.5 * math.pi * self.v * s * (1.0 - s)

    def couplings(self, t: float) -> tuple[float, float]:
        """(g1, g2) = g_max (sin theta, cos theta); g1^2 + g2^2 = g_max^2."""
        th = self.theta(t)
        return self.g_max * math.sin(th), self.g_max * math.cos(th)

    def g0(self, t: float) -> float:
        """Instantaneous eigenvalue scale sqrt(g1^2 + gamma^2 g2^2)."""
        g1, g2 = self.couplings(t)
        return math.sqrt(g1 * g1 + self.gamma * self.gamma * g2 * g2)

    def cd_amplitude(self, t: float) -> float:
        """Counter-diabatic drive amplitude G(t), vanishing as t -> +-inf."""
        g1, g2 = self.couplings(t)
        g0_sq = g1 * g1 + self.gamma * self.gamma * g2 * g2
        return self.gamma * self.theta_dot(t) * self.g_max * self.g_max / g0_sq
