"""Mass balance right-hand sides: hydrolysis, secretion, absorption, water.

Degradation routes, by variant:

  M1: volumic hydrolysis only, whole bolus solubilized.
        a_s   -> b_abs   at rate C*k(x,e)      (law of mass action)
        b_abs -> absorbed at constant rate k_abs
  M2: volumic + surface hydrolysis, pancreatic secretions, saturating
      absorption.
        a_s   -> b_int   volumic, rate C*k(x,e)
        a_s   -> b_abs   on the lateral surface, coefficient C_abs
        b_int -> b_abs   on the lateral surface, coefficient C_iabs
        b_abs -> absorbed at rate k_abs*b_abs/(k_mm + b_abs)
  M3/M4: adds the solubilization equilibrium a_ns <-> a_s driven by the
      water proportion [W], water relaxation toward the target w0, and
      scales the surface rates by [W] (dilution exposes more substrate).

k(x, e) is the active enzyme mass: the pH profile of the intestine
composed with the enzyme's pH-activity curve, times the free enzyme
mass e. Enzymes inactivate at rate k_e everywhere.

Pancreatic secretions enter over a short window of positions and deposit
mass proportionally to each component, at a rate shaped so that a full
traversal of the window multiplies the component by (1 + beta/100).

Water bookkeeping: the model prescribes the dynamics of the water
*proportion* [W] = w/(total mass), but the state stores the water *mass*
w. Each evaluation solves the scalar relation

    d[W]/dt = (dw*S - w*dS) / M^2,   S = solids mass, M = total mass

for dw given the prescribed d[W]/dt and the simultaneously computed
solid-mass derivatives, keeping a single consistent mass ledger.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

from .errors import ConfigError, DegenerateStateError
from .state import (BolusState, ModelVariant, ParameterSet, solids_mass,
                    total_mass)


class PiecewiseLinear:
    """Piecewise-linear map defined by sorted (x, y) breakpoints.

    Evaluation clamps to the end values outside the breakpoint range.
    """

    def __init__(self, points, name: str = "piecewise-linear map"):
        pts = sorted((float(x), float(y)) for x, y in points)
        if len(pts) < 2:
            raise ConfigError(name, "needs at least two breakpoints")
        xs = [x for x, _ in pts]
        if any(x1 == x2 for x1, x2 in zip(xs, xs[1:])):
            raise ConfigError(name, "breakpoint positions must be distinct")
        self.xs = xs
        self.ys = [y for _, y in pts]
        self.name = name

    def __call__(self, x: float) -> float:
        xs, ys = self.xs, self.ys
        if x <= xs[0]:
            return ys[0]
        if x >= xs[-1]:
            return ys[-1]
        i = bisect.bisect_right(xs, x)
        frac = (x - xs[i - 1]) / (xs[i] - xs[i - 1])
        return ys[i - 1] + frac * (ys[i] - ys[i - 1])

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.xs, self.ys))


@dataclass(frozen=True)
class EnzymeActivityProfile:
    """Relative enzyme activity along the intestine.

    ph_of_x maps position (m) to luminal pH; activity_of_ph maps pH to a
    relative activity in [0, 1]. Their composition times the free enzyme
    mass gives the active enzyme mass at position x.
    """

    ph_of_x: PiecewiseLinear
    activity_of_ph: PiecewiseLinear

    def __post_init__(self):
        if any(not 0.0 <= y <= 1.0 for y in self.activity_of_ph.ys):
            raise ConfigError("enzyme.activity_of_ph",
                              "activity values must lie in [0, 1]")

    def active_fraction(self, x: float) -> float:
        return self.activity_of_ph(self.ph_of_x(x))


def default_amylase_profile(L: float = 18.0) -> EnzymeActivityProfile:
    """Reference profile: monotone pH ramp along the intestine and a
    triangular activity peak at neutral pH (pancreatic amylase)."""
    return EnzymeActivityProfile(
        ph_of_x=PiecewiseLinear([(0.0, 6.0), (L, 7.4)], "enzyme.ph_of_x"),
        activity_of_ph=PiecewiseLinear(
            [(0.0, 0.0), (5.5, 0.0), (7.0, 1.0), (8.5, 0.0), (14.0, 0.0)],
            "enzyme.activity_of_ph"),
    )


def enzyme_activity(x: float, e: float, profile: EnzymeActivityProfile) -> float:
    """Active enzyme mass (g) at position x given free enzyme mass e."""
    return profile.active_fraction(x) * e


_CHI_KINDS = ("uniform", "cosine")


@dataclass(frozen=True)
class SecretionWindow:
    """Localization of pancreatic secretions along the intestine.

    Secretions are deposited while the bolus travels [start, start+alpha]
    (meters), adding a total of beta percent of each component's mass.
    chi_kind selects the localization density on [0, 1] (unit integral):
    "uniform" (constant 1) or "cosine" (smooth raised-cosine bump).

    mode "sources" applies the deposit to solid components and water;
    "water-only" restricts it to the water proportion term (pure
    dilution). substrate_source can disable the deposit on a_s alone
    (e.g. when the secreted fluid contains none of the tracked
    substrate); adds_enzyme optionally routes a deposit to the enzyme
    pool as well.
    """

    start: float = 0.85
    alpha: float = 0.9
    beta: float = 25.0
    chi_kind: str = "uniform"
    mode: str = "sources"
    substrate_source: bool = True
    adds_enzyme: bool = False

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ConfigError("secretion.alpha", "window length must be positive")
        if self.beta < 0.0:
            raise ConfigError("secretion.beta", "beta must be non-negative")
        if self.chi_kind not in _CHI_KINDS:
            raise ConfigError("secretion.chi",
                              f"unknown localization {self.chi_kind!r}; "
                              f"expected one of {_CHI_KINDS}")
        if self.mode not in ("sources", "water-only"):
            raise ConfigError("secretion.mode",
                              "expected 'sources' or 'water-only'")

    @classmethod
    def from_params(cls, p: ParameterSet, **overrides) -> "SecretionWindow":
        return cls(start=p.secretion_start, alpha=p.alpha, beta=p.beta,
                   **overrides)

    def chi(self, u: float) -> float:
        """Localization density on [0, 1], zero outside, unit integral."""
        if u < 0.0 or u > 1.0:
            return 0.0
        if self.chi_kind == "uniform":
            return 1.0
        return 1.0 - math.cos(2.0 * math.pi * u)  # integrates to 1 on [0,1]

    @property
    def log_gain(self) -> float:
        """ln(1 + beta/100): total log-mass added over a full traversal."""
        return math.log1p(self.beta / 100.0)


def secretion_rate(x: float, v: float, mass_component: float,
                   win: SecretionWindow) -> float:
    """Deposit rate (g/s) onto one component of mass ``mass_component``.

    ln(1 + beta/100) * (1/alpha) * v * chi((x - start)/alpha) * mass.
    Integrated along a traversal of the window at constant component
    mass m this adds exactly m * ln(1 + beta/100) (so the component ends
    up multiplied by 1 + beta/100 when the deposit feeds back on itself).
    """
    if win.beta == 0.0 or mass_component == 0.0:
        return 0.0
    u = (x - win.start) / win.alpha
    chi = win.chi(u)
    if chi == 0.0:
        return 0.0
    return win.log_gain / win.alpha * v * chi * mass_component


def mm_absorption(b_abs: float, p: ParameterSet) -> float:
    """Saturating uptake rate (g/s) of absorbable nutrients by the wall.

    k_abs * b_abs / (k_mm + b_abs); approaches k_abs for b_abs >> k_mm.
    """
    return p.k_abs * b_abs / (p.k_mm + b_abs)


def surfacic_rate(component_mass: float, s: BolusState, coeff: float,
                  p: ParameterSet, water_factor: float = 1.0) -> float:
    """Surface hydrolysis rate (g/s) for one component.

    The component occupies a share component/total of the lateral surface
    2*sqrt(pi*l/rho)*sqrt(total), giving
    2*coeff*sqrt(pi*l/rho)*component/sqrt(total). water_factor is 1 for
    M2 and the water proportion [W] for M3/M4.
    """
    if component_mass == 0.0:
        return 0.0
    m = total_mass(s)
    if m <= 0.0:
        raise DegenerateStateError(
            "surface rate inconsistency: component mass present in a bolus "
            "with zero total mass")
    return (2.0 * coeff * math.sqrt(math.pi * p.l / p.rho)
            * component_mass / math.sqrt(m) * water_factor)


@dataclass(frozen=True, slots=True)
class MassRates:
    """Time derivatives (g/s) of the mass components of BolusState."""

    a_s: float = 0.0
    a_ns: float = 0.0
    a_nd: float = 0.0
    b_int: float = 0.0
    b_abs: float = 0.0
    w: float = 0.0
    e: float = 0.0
    absorbed_cum: float = 0.0
    secreted_cum: float = 0.0


def rhs_m1(s: BolusState, p: ParameterSet,
           prof: EnzymeActivityProfile) -> MassRates:
    """Variant M1: volumic hydrolysis and linear absorption.

    d(a_s + b_abs + absorbed_cum)/dt = 0 identically.
    """
    k = enzyme_activity(s.x, s.e, prof)
    hydrolysis = p.C * k * s.a_s
    absorbed = p.k_abs * s.b_abs
    return MassRates(
        a_s=-hydrolysis,
        b_abs=hydrolysis - absorbed,
        e=-p.k_e * s.e,
        absorbed_cum=absorbed,
    )


def _secretion_sources(s: BolusState, win: SecretionWindow):
    """Deposit rates (a_s, b_int, e) honoring the window's switches."""
    if win.mode == "water-only":
        return 0.0, 0.0, 0.0
    sec_a_s = secretion_rate(s.x, s.v, s.a_s, win) if win.substrate_source else 0.0
    sec_b_int = secretion_rate(s.x, s.v, s.b_int, win)
    sec_e = secretion_rate(s.x, s.v, s.e, win) if win.adds_enzyme else 0.0
    return sec_a_s, sec_b_int, sec_e


def rhs_m2(s: BolusState, p: ParameterSet, prof: EnzymeActivityProfile,
           win: SecretionWindow) -> MassRates:
    """Variant M2: volumic + surface hydrolysis, secretions, saturating
    absorption. The bolus is fully solubilized (a_ns = a_nd = 0).

    Outside the secretion window
    d(a_s + b_int + b_abs + absorbed_cum)/dt = 0 identically.
    """
    k = enzyme_activity(s.x, s.e, prof)
    volumic = p.C * k * s.a_s
    surf_a = surfacic_rate(s.a_s, s, p.C_abs, p)
    surf_i = surfacic_rate(s.b_int, s, p.C_iabs, p)
    absorbed = mm_absorption(s.b_abs, p)
    sec_a_s, sec_b_int, sec_e = _secretion_sources(s, win)
    return MassRates(
        a_s=-volumic - surf_a + sec_a_s,
        b_int=volumic + sec_b_int - surf_i,
        b_abs=surf_a + surf_i - absorbed,
        e=-p.k_e * s.e + sec_e,
        absorbed_cum=absorbed,
        secreted_cum=sec_a_s + sec_b_int,
    )


def rhs_m3(s: BolusState, p: ParameterSet, prof: EnzymeActivityProfile,
           win: SecretionWindow) -> MassRates:
    """Variants M3/M4: solubilization equilibrium, water dynamics,
    surface rates scaled by the water proportion.

    With beta = 0,
    d(a_s + a_ns + a_nd + b_int + b_abs + absorbed_cum)/dt = 0 identically
    (water exchanges with the intestinal wall and is not conserved).
    """
    m = total_mass(s)
    if m <= 0.0:
        raise DegenerateStateError(
            "water-coupled kinetics need a positive total mass")
    solids = solids_mass(s)
    if solids <= 0.0:
        # Pure-water bolus: no substrate chemistry left and the water
        # proportion is pinned at 1, so the contents transit inertly.
        return MassRates(e=-p.k_e * s.e)
    wp = s.w / m
    if not 0.0 < wp < 1.0:
        raise DegenerateStateError(
            f"water proportion {wp!r} outside (0, 1); the dilution model "
            "no longer applies")

    k = enzyme_activity(s.x, s.e, prof)
    exchange = p.k_s * (p.mu(wp) * s.a_ns - s.a_s)  # a_ns -> a_s when positive
    volumic = p.C * k * s.a_s
    surf_a = surfacic_rate(s.a_s, s, p.C_abs, p, water_factor=wp)
    surf_i = surfacic_rate(s.b_int, s, p.C_iabs, p, water_factor=wp)
    absorbed = mm_absorption(s.b_abs, p)
    sec_a_s, sec_b_int, sec_e = _secretion_sources(s, win)

    da_ns = -exchange
    da_s = exchange - volumic - surf_a + sec_a_s
    db_int = volumic + sec_b_int - surf_i
    db_abs = surf_a + surf_i - absorbed
    d_solids = da_ns + da_s + db_int + db_abs  # da_nd = 0

    # Prescribed water-proportion dynamics: relaxation toward w0 plus the
    # water fraction of the secretions.
    u = (s.x - win.start) / win.alpha
    sec_w = win.log_gain / win.alpha * s.v * win.chi(u) * wp if win.beta else 0.0
    d_wp = -p.k_w * (wp - p.w0) + sec_w
    # Solve d[W]/dt = (dw*solids - w*d_solids)/m^2 for dw.
    dw = (d_wp * m * m + s.w * d_solids) / solids

    return MassRates(
        a_s=da_s,
        a_ns=da_ns,
        a_nd=0.0,
        b_int=db_int,
        b_abs=db_abs,
        w=dw,
        e=-p.k_e * s.e + sec_e,
        absorbed_cum=absorbed,
        secreted_cum=sec_a_s + sec_b_int,
    )


def mass_rates(s: BolusState, variant: ModelVariant, p: ParameterSet,
               prof: EnzymeActivityProfile, win: SecretionWindow) -> MassRates:
    """Dispatch to the variant's kinetics (M4 shares the M3 equations)."""
    if variant is ModelVariant.M1:
        return rhs_m1(s, p, prof)
    if variant is ModelVariant.M2:
        return rhs_m2(s, p, prof, win)
    return rhs_m3(s, p, prof, win)
