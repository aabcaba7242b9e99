"""Dynamical state, model parameters, and cylinder geometry.

The bolus is a homogeneous cylinder of fixed length and variable radius
moving along a one-dimensional intestine [0, L]. Its composition is
tracked as masses (grams):

    a_s    solubilized substrate (hydrolyzable)
    a_ns   non-solubilized substrate (needs water to solubilize)
    a_nd   non-degradable substrate (passes through unchanged)
    b_int  intermediate hydrolysis product (not yet absorbable)
    b_abs  absorbable product still in the bolus
    w      water
    e      free enzymes (gastric + pancreatic pool)

All quantities use grams / meters / seconds internally; unit-suffixed
config values are converted at parse time (see digestsim.config).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields

from .errors import ConfigError, DegenerateStateError


class ModelVariant(enum.Enum):
    """Selector for which transport and kinetics terms are active.

    M1  fully solubilized bolus, volumic hydrolysis only, linear absorption,
        constant friction.
    M2  adds surface hydrolysis, pancreatic secretions, and saturating
        (Michaelis-Menten) absorption; still constant friction.
    M3  adds water-driven solubilization, water dynamics, and lubrication
        friction proportional to 1/[water proportion].
    M4  same kinetics as M3 with the pulsed forcing replaced by its
        time-averaged effect (smooth transport).
    """

    M1 = "M1"
    M2 = "M2"
    M3 = "M3"
    M4 = "M4"

    @classmethod
    def parse(cls, value: "str | ModelVariant") -> "ModelVariant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ConfigError("variant", f"unknown model variant {value!r}; "
                              "expected one of M1, M2, M3, M4") from None

    @property
    def uses_lubrication(self) -> bool:
        """Friction is K_tilde/[W] instead of the constant K_const."""
        return self in (ModelVariant.M3, ModelVariant.M4)

    @property
    def is_homogenized(self) -> bool:
        """Transport uses the averaged pulse term instead of the pulse train."""
        return self is ModelVariant.M4

    @property
    def has_solubilization(self) -> bool:
        return self in (ModelVariant.M3, ModelVariant.M4)

    @property
    def has_secretions(self) -> bool:
        return self is not ModelVariant.M1


# Mass components, in trajectory column order.
MASS_FIELDS = ("a_s", "a_ns", "a_nd", "b_int", "b_abs", "w", "e")


@dataclass(frozen=True, slots=True)
class BolusState:
    """Full dynamical state of one bolus at time t.

    x, v are position (m) and velocity (m/s); masses are grams.
    absorbed_cum accumulates nutrient mass taken up by the intestinal
    wall and secreted_cum accumulates solid mass deposited by pancreatic
    secretions; both are bookkeeping integrals used for mass audits,
    not physical compartments of the bolus.
    """

    x: float = 0.0
    v: float = 0.0
    a_s: float = 0.0
    a_ns: float = 0.0
    a_nd: float = 0.0
    b_int: float = 0.0
    b_abs: float = 0.0
    w: float = 0.0
    e: float = 0.0
    absorbed_cum: float = 0.0
    secreted_cum: float = 0.0
    t: float = 0.0

    def masses(self) -> tuple[float, ...]:
        return (self.a_s, self.a_ns, self.a_nd, self.b_int, self.b_abs,
                self.w, self.e)


def total_mass(s: BolusState) -> float:
    """Total bolus mass in grams: substrate + products + water.

    The enzyme pool e is deliberately excluded; it is not counted as part
    of the bolus mass or volume.
    """
    return s.a_s + s.a_ns + s.a_nd + s.b_int + s.b_abs + s.w


def solids_mass(s: BolusState) -> float:
    """Dry-matter mass in grams (everything except water and enzymes)."""
    return s.a_s + s.a_ns + s.a_nd + s.b_int + s.b_abs


def volume(s: BolusState, p: "ParameterSet") -> float:
    """Bolus volume in m^3, total mass divided by the common density."""
    return total_mass(s) / p.rho


def lateral_surface(s: BolusState, p: "ParameterSet") -> float:
    """Lateral surface of the cylinder in m^2.

    With fixed length l and volume V = mass/rho, the radius is
    R = sqrt(mass/(rho*pi*l)) and the lateral surface 2*pi*R*l reduces to
    2*sqrt(pi*l/rho)*sqrt(mass).
    """
    return 2.0 * math.sqrt(math.pi * p.l / p.rho) * math.sqrt(total_mass(s))


def water_proportion(s: BolusState) -> float:
    """Water mass fraction of the bolus, in [0, 1].

    Raises DegenerateStateError for a zero-mass bolus (fully absorbed or
    never initialized); the fraction is undefined there.
    """
    m = total_mass(s)
    if m <= 0.0:
        raise DegenerateStateError(
            "water proportion undefined: total bolus mass is zero")
    return s.w / m


@dataclass(frozen=True, slots=True)
class ParameterSet:
    """All rate constants, geometry, and transport coefficients.

    Defaults are a documented reference calibration: geometry and wave
    timing come from pig physiology (intestine length 18 m, one effective
    contraction per 10 s, wave speed 7.2 m/h); rho and l are assumed
    values (water-like density, 4 cm bolus); the remaining coefficients
    are tuned so that the default scenario transits in a few hours.
    All values can be overridden per scenario.
    """

    L: float = 18.0               # intestine length, m
    l: float = 0.04               # bolus length, m (assumed, tunable)
    rho: float = 1.0e6            # density, g/m^3 (water-like, assumed)
    c: float = 7.2 / 3600.0       # peristaltic wave speed, m/s (7.2 m/h)
    pulse_period: float = 10.0    # s between effective contractions
    pulse_width_eps: float = 0.5  # s, width of each rectangular pulse
    tau: float | None = None      # averaged pulse rate, 1/s; None -> 1/period
    c0: float = 8.0e-5            # pulse efficiency offset, m/s
    c1: float = 0.4               # pulse efficiency per volume, m/s per m^3
    a: float = 1.0                # efficiency distance offset, dimensionless
    b: float = 0.05               # efficiency distance slope, 1/m
    K_const: float = 4.0e-3       # constant friction, 1/s (M1, M2)
    K_tilde: float = 2.4e-3       # lubrication friction, 1/s (M3, M4)
    C: float = 1.0e-4             # volumic degradation rate, 1/s per g enzyme
    C_abs: float = 4.0            # surface rate a_s -> b_abs, g m^-2 s^-1
    C_iabs: float = 10.0          # surface rate b_int -> b_abs, g m^-2 s^-1
    k_abs: float = 0.01           # max absorption rate at saturation, g/s
    k_mm: float = 1.0             # half-saturation mass, g
    k_e: float = 5.0e-5           # enzyme inactivation rate, 1/s
    k_s: float = 0.01             # solubilization relaxation rate, 1/s
    k_w: float = 0.01             # water relaxation rate, 1/s
    w0: float = 0.6               # target water proportion, dimensionless
    mu_slope: float = 1.0         # slope of the linear equilibrium map mu([W])
    secretion_start: float = 0.85  # m from the pylorus
    alpha: float = 0.9            # secretion window length, m
    beta: float = 25.0            # secretion mass, percent of bolus mass
    v0: float = 1.0e-3            # initial velocity from gastric emptying, m/s

    def effective_tau(self) -> float:
        """Averaged pulse rate; defaults to one unit impulse per period."""
        return self.tau if self.tau is not None else 1.0 / self.pulse_period

    def mu(self, wp: float) -> float:
        """Equilibrium ratio a_s/a_ns as a linear function of water proportion."""
        return self.mu_slope * wp


_POSITIVE_FIELDS = (
    "L", "l", "rho", "c", "pulse_period", "pulse_width_eps", "c0", "c1",
    "a", "b", "K_const", "K_tilde", "C", "C_abs", "C_iabs", "k_abs",
    "k_mm", "k_e", "k_s", "k_w", "mu_slope", "alpha",
)

_NONNEGATIVE_FIELDS = ("beta", "v0", "secretion_start")


def validate_parameters(p: ParameterSet, prefix: str = "params") -> None:
    """Check ParameterSet invariants, raising ConfigError with a field path."""
    for name in _POSITIVE_FIELDS:
        value = getattr(p, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value)
                and value > 0.0):
            raise ConfigError(f"{prefix}.{name}",
                              f"must be a finite positive number, got {value!r}")
    for name in _NONNEGATIVE_FIELDS:
        value = getattr(p, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value)
                and value >= 0.0):
            raise ConfigError(f"{prefix}.{name}",
                              f"must be a finite non-negative number, got {value!r}")
    if p.tau is not None and not (math.isfinite(p.tau) and p.tau > 0.0):
        raise ConfigError(f"{prefix}.tau",
                          f"must be a finite positive number or null, got {p.tau!r}")
    if not 0.0 < p.w0 < 1.0:
        raise ConfigError(f"{prefix}.w0",
                          f"target water proportion must lie in (0, 1), got {p.w0!r}")
    if p.pulse_width_eps >= p.pulse_period:
        raise ConfigError(f"{prefix}.pulse_width_eps",
                          "pulse width must be smaller than the pulse period")
    # a + b*x > 0 on [0, L]; with a, b > 0 only the endpoints need checking.
    if p.a + p.b * p.L <= 0.0 or p.a <= 0.0:
        raise ConfigError(f"{prefix}.a", "a + b*x must stay positive on [0, L]")


def validate_initial_state(s: BolusState, variant: ModelVariant,
                           p: ParameterSet, prefix: str = "initial") -> None:
    """Check that an initial state is admissible for the chosen variant."""
    for name in MASS_FIELDS:
        value = getattr(s, name)
        if not (math.isfinite(value) and value >= 0.0):
            raise ConfigError(f"{prefix}.{name}",
                              f"mass must be finite and non-negative, got {value!r}")
    if s.x != 0.0:
        raise ConfigError(f"{prefix}.x", "simulations start at the pylorus (x = 0)")
    # M1-M3 require v0 in [0, c) so the retarded pulse argument stays
    # monotone; M4 only requires v0 >= 0.
    if variant.is_homogenized:
        v_ok = s.v >= 0.0
    else:
        v_ok = 0.0 <= s.v < p.c
    if not v_ok:
        raise ConfigError(f"{prefix}.v",
                          f"initial velocity must be in [0, c) for pulse-resolved "
                          f"variants and >= 0 for M4, got {s.v!r}")
    if total_mass(s) <= 0.0:
        raise ConfigError(prefix, "initial bolus has zero total mass")
    if not variant.has_solubilization and (s.a_ns > 0.0 or s.a_nd > 0.0):
        raise ConfigError(f"{prefix}.a_ns",
                          f"{variant.value} assumes a fully solubilized bolus "
                          "(a_ns = a_nd = 0)")
    if variant.has_solubilization and s.w <= 0.0:
        # A dry bolus has no lubrication and cannot solubilize; [W] < 1 is
        # then automatic whenever any solid mass is present.
        raise ConfigError(f"{prefix}.w",
                          f"{variant.value} needs water in the bolus (w > 0)")


def state_field_names() -> tuple[str, ...]:
    return tuple(f.name for f in fields(BolusState))
