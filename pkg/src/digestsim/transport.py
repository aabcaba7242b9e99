"""Bolus acceleration: pulsed peristaltic forcing, efficiency, friction.

The bolus is pushed by contraction pulses emitted at the duodenum every
``pulse_period`` seconds. A pulse emitted at time t reaches the bolus at
position x after a travel delay x/c, so the forcing felt at time t is the
pulse train evaluated at the retarded time t - x(t)/c. Each pulse is a
rectangle of width eps and height 1/eps (unit impulse), scaled by a
position- and volume-dependent efficiency, and opposed by a friction term
linear in velocity:

    dv/dt = pulse(t - x/c) * (1 - v/c) * (c0 + c1*V)/(a + b*x) - K*v  (M1-M3)
    dv/dt = tau * (1 - v/c) * (c0 + c1*V)/(a + b*x) - K*v             (M4)

The (1 - v/c) factor in the pulse-resolved form is the chain rule for
the retarded argument: the forcing is the time derivative of the
cumulative pulse function y evaluated at t - x(t)/c. It makes each
pulse deliver a velocity increment of exactly one efficiency unit
regardless of how long the bolus rides the stretched window (a bolus
moving with the wave sees slower pulses but also feels each one longer),
and its time average is tau*(1 - v/c), which is precisely the M4 form.
It also caps the velocity at the wave speed c. The friction coefficient
K is constant for M1/M2 and K_tilde/[water proportion] for M3/M4 (a
wetter bolus slides more easily).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, DegenerateStateError
from .state import BolusState, ModelVariant, ParameterSet, volume, water_proportion


@dataclass(frozen=True, slots=True)
class PulseTrain:
    """Periodic rectangular impulses approximating a Dirac comb.

    Each pulse has value ``amplitude`` on [k*period, k*period + width_eps)
    and 0 elsewhere; nothing fires for negative arguments. With the
    default amplitude 1/width_eps every pulse integrates to exactly 1.
    """

    period: float = 10.0
    width_eps: float = 0.5
    amplitude: float | None = None

    def __post_init__(self):
        if not 0.0 < self.width_eps < self.period:
            raise ConfigError("pulse.width_eps",
                              f"need 0 < width_eps < period, got "
                              f"width_eps={self.width_eps!r} period={self.period!r}")
        if self.amplitude is None:
            object.__setattr__(self, "amplitude", 1.0 / self.width_eps)
        elif abs(self.amplitude * self.width_eps - 1.0) > 1e-9:
            raise ConfigError("pulse.amplitude",
                              "amplitude * width_eps must equal 1 (unit impulse)")

    @classmethod
    def from_params(cls, p: ParameterSet) -> "PulseTrain":
        return cls(period=p.pulse_period, width_eps=p.pulse_width_eps)


def pulse_rate(train: PulseTrain, s: float) -> float:
    """Pulse train value at argument s (seconds); 0 for s < 0."""
    if s < 0.0:
        return 0.0
    if s % train.period < train.width_eps:
        return train.amplitude
    return 0.0


def pulse_efficiency(x: float, V: float, p: ParameterSet) -> float:
    """Velocity kick per unit impulse, (c0 + c1*V)/(a + b*x), in m/s.

    Grows with bolus volume and decays with distance from the pylorus.
    """
    denom = p.a + p.b * x
    if denom <= 0.0:
        raise ConfigError("params.a",
                          f"pulse efficiency denominator a + b*x = {denom!r} "
                          f"is not positive at x = {x!r}")
    return (p.c0 + p.c1 * V) / denom


def friction_coefficient(s: BolusState, variant: ModelVariant,
                         p: ParameterSet) -> float:
    """Velocity damping rate in 1/s.

    Constant for M1/M2; K_tilde/[W] for M3/M4 (lubrication: friction
    diverges as the bolus dries out).
    """
    if not variant.uses_lubrication:
        return p.K_const
    wp = water_proportion(s)
    if wp <= 0.0:
        raise DegenerateStateError(
            "dry bolus: lubrication friction K_tilde/[W] is undefined at [W] = 0")
    return p.K_tilde / wp


def acceleration(s: BolusState, variant: ModelVariant, p: ParameterSet,
                 train: PulseTrain) -> float:
    """Bolus acceleration dv/dt in m/s^2 for the given variant."""
    eff = pulse_efficiency(s.x, volume(s, p), p)
    fric = friction_coefficient(s, variant, p)
    if variant.is_homogenized:
        forcing = p.effective_tau() * (1.0 - s.v / p.c) * eff
    else:
        # (1 - v/c): chain factor of the retarded argument, see module
        # docstring.
        forcing = pulse_rate(train, s.t - s.x / p.c) * (1.0 - s.v / p.c) * eff
    return forcing - fric * s.v


def retarded_time(s: BolusState, p: ParameterSet) -> float:
    """Argument of the pulse train as felt by the bolus: t - x/c."""
    return s.t - s.x / p.c
