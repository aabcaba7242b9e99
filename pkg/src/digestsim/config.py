"""Scenario configuration: YAML schema, unit conversion, defaults.

A scenario file is a nested key-value document. Quantities may be plain
numbers (interpreted in the base units grams / meters / seconds) or
strings with an explicit unit suffix ("7.2 m/h", "37.70 g", "10 min"),
normalized at parse time. Unknown keys, malformed quantities, and
violated invariants are rejected with the offending field path.

An empty document is a complete, runnable scenario: homogenized variant
M4, the reference parameter calibration, and the standard initial
composition (non-solubilized substrate at three times the solubilized
mass, diluted with water at twice the non-solubilized volume).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .errors import ConfigError
from .integrator import IntegrationConfig, Trajectory, run
from .kinetics import (EnzymeActivityProfile, PiecewiseLinear,
                       SecretionWindow, default_amylase_profile)
from .state import (BolusState, ModelVariant, ParameterSet,
                    validate_initial_state, validate_parameters)
from .transport import PulseTrain

# Unit tables per quantity kind: suffix -> scale to base units.
_UNITS: dict[str, dict[str, float]] = {
    "mass": {"g": 1.0, "kg": 1e3, "mg": 1e-3},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3},
    "time": {"s": 1.0, "min": 60.0, "h": 3600.0, "ms": 1e-3},
    "velocity": {"m/s": 1.0, "m/min": 1.0 / 60.0, "m/h": 1.0 / 3600.0,
                 "cm/s": 1e-2, "mm/s": 1e-3},
    "rate": {"1/s": 1.0, "1/min": 1.0 / 60.0, "1/h": 1.0 / 3600.0},
    "mass_rate": {"g/s": 1.0, "g/min": 1.0 / 60.0, "g/h": 1.0 / 3600.0},
    "density": {"g/m3": 1.0, "g/m^3": 1.0, "kg/m3": 1e3, "kg/m^3": 1e3,
                "g/l": 1e3, "g/L": 1e3, "g/ml": 1e6, "g/mL": 1e6},
    "surface_flux": {"g/m2/s": 1.0, "g/m^2/s": 1.0},
    "per_length": {"1/m": 1.0, "1/cm": 1e2},
    "velocity_per_volume": {"m/s/m3": 1.0, "m/s/m^3": 1.0},
    "dimensionless": {},
}

_PARAM_KINDS = {
    "L": "length", "l": "length", "rho": "density", "c": "velocity",
    "pulse_period": "time", "pulse_width_eps": "time", "tau": "rate",
    "c0": "velocity", "c1": "velocity_per_volume", "a": "dimensionless",
    "b": "per_length", "K_const": "rate", "K_tilde": "rate", "C": "rate",
    "C_abs": "surface_flux", "C_iabs": "surface_flux",
    "k_abs": "mass_rate", "k_mm": "mass", "k_e": "rate", "k_s": "rate",
    "k_w": "rate", "w0": "dimensionless", "mu_slope": "dimensionless",
    "secretion_start": "length", "alpha": "length", "beta": "dimensionless",
    "v0": "velocity",
}

_INTEGRATION_KINDS = {
    "base_step": "time", "pulse_substep": "time", "max_time": "time",
    "output_stride": "time", "rel_tol": "dimensionless",
    "abs_tol": "dimensionless",
}

_INITIAL_FIELDS = ("a_s", "a_ns", "a_nd", "b_int", "b_abs", "w", "e")

_QUANTITY_RE = re.compile(r"^\s*([+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*(.*?)\s*$")


def parse_quantity(value, kind: str, path: str) -> float:
    """Normalize a config value to base units (g / m / s)."""
    if isinstance(value, bool):
        raise ConfigError(path, "expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _QUANTITY_RE.match(value)
        if not m:
            raise ConfigError(path, f"cannot parse quantity {value!r}")
        number, unit = float(m.group(1)), m.group(2)
        if not unit:
            return number
        table = _UNITS[kind]
        if unit not in table:
            accepted = ", ".join(sorted(table)) or "plain numbers only"
            raise ConfigError(path, f"unknown unit {unit!r} for this field "
                                    f"(accepted: {accepted})")
        return number * table[unit]
    raise ConfigError(path, f"expected a number or 'number unit' string, "
                            f"got {type(value).__name__}")


def _require_mapping(data, path: str) -> dict:
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected a mapping, got {type(data).__name__}")
    return data


def _reject_unknown(data: dict, allowed, path: str) -> None:
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else str(key),
                              f"unknown key (allowed: {', '.join(sorted(allowed))})")


# Paper-style one-at-a-time sensitivity targets: which parameters each
# output is screened against. "K" resolves to the active friction
# coefficient of the variant.
SENSITIVITY_TARGETS: dict[str, tuple[str, ...]] = {
    "a_s": ("C", "C_abs"),
    "b_abs": ("C_abs", "C_iabs", "k_abs"),
    "v": ("a", "b", "c0", "c1", "K"),
}

DEFAULT_SENSITIVITY_PARAMETERS = ("C", "C_abs", "C_iabs", "k_abs",
                                  "a", "b", "c0", "c1", "K")
DEFAULT_SENSITIVITY_FACTORS = (1.05, 1.5)
UNDERESTIMATE_FACTORS = (0.05, 0.5)


def figure2_initial(a_s: float = 10.0, e: float = 1.0,
                    v0: float = 1.0e-3) -> BolusState:
    """Standard initial composition: a_ns = 3*a_s, water at twice the
    a_ns volume (equal densities, so w = 2*a_ns by mass)."""
    a_ns = 3.0 * a_s
    return BolusState(a_s=a_s, a_ns=a_ns, w=2.0 * a_ns, e=e, v=v0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to run one simulation scenario."""

    variant: ModelVariant = ModelVariant.M4
    params: ParameterSet = field(default_factory=ParameterSet)
    initial: BolusState = field(default_factory=figure2_initial)
    integration: IntegrationConfig = field(default_factory=IntegrationConfig)
    profile: EnzymeActivityProfile = field(default_factory=default_amylase_profile)
    window: SecretionWindow = field(default_factory=SecretionWindow)
    sensitivity_parameters: tuple[str, ...] = DEFAULT_SENSITIVITY_PARAMETERS
    sensitivity_factors: tuple[float, ...] = DEFAULT_SENSITIVITY_FACTORS
    homog_eps_list: tuple[float, ...] = ()

    def validate(self) -> None:
        validate_parameters(self.params)
        self.integration.validate(self.params)
        validate_initial_state(self.initial, self.variant, self.params)

    def run(self) -> Trajectory:
        return run(self.initial, self.variant, self.params, self.integration,
                   profile=self.profile, window=self.window,
                   train=PulseTrain.from_params(self.params))

    def with_params(self, **changes) -> "ScenarioConfig":
        """New scenario with parameter overrides; the secretion window is
        rebuilt so its geometry follows the parameters."""
        params = replace(self.params, **changes)
        window = replace(self.window, start=params.secretion_start,
                         alpha=params.alpha, beta=params.beta)
        return replace(self, params=params, window=window)

    def with_integration(self, **changes) -> "ScenarioConfig":
        return replace(self, integration=replace(self.integration, **changes))

    def friction_field(self) -> str:
        """Name of the friction parameter active under this variant."""
        return "K_tilde" if self.variant.uses_lubrication else "K_const"


def _parse_params(data: dict) -> ParameterSet:
    data = _require_mapping(data, "params")
    _reject_unknown(data, _PARAM_KINDS, "params")
    kwargs = {}
    for key, raw in data.items():
        if key == "tau" and raw is None:
            kwargs[key] = None
            continue
        kwargs[key] = parse_quantity(raw, _PARAM_KINDS[key], f"params.{key}")
    return ParameterSet(**kwargs)


def _parse_initial(data: dict, params: ParameterSet) -> BolusState:
    data = _require_mapping(data, "initial")
    allowed = set(_INITIAL_FIELDS) | {"recipe"}
    _reject_unknown(data, allowed, "initial")
    recipe = data.get("recipe")
    if recipe is not None:
        if recipe != "figure2":
            raise ConfigError("initial.recipe",
                              f"unknown recipe {recipe!r}; expected 'figure2'")
        extra = set(data) - {"recipe", "a_s", "e"}
        if extra:
            raise ConfigError(f"initial.{sorted(extra)[0]}",
                              "the figure2 recipe derives a_ns and w; only "
                              "a_s and e may be given alongside it")
        a_s = parse_quantity(data.get("a_s", 10.0), "mass", "initial.a_s")
        e = parse_quantity(data.get("e", 1.0), "mass", "initial.e")
        return figure2_initial(a_s=a_s, e=e, v0=params.v0)
    masses = {}
    for key in _INITIAL_FIELDS:
        if key in data:
            value = parse_quantity(data[key], "mass", f"initial.{key}")
            if value < 0.0:
                raise ConfigError(f"initial.{key}",
                                  f"mass must be non-negative, got {value!r}")
            masses[key] = value
    if not masses:
        return figure2_initial(v0=params.v0)
    masses.setdefault("e", 1.0)
    return BolusState(v=params.v0, **masses)


def _parse_integration(data: dict) -> IntegrationConfig:
    data = _require_mapping(data, "integration")
    allowed = set(_INTEGRATION_KINDS) | {"method"}
    _reject_unknown(data, allowed, "integration")
    kwargs = {}
    if "method" in data:
        kwargs["method"] = str(data["method"])
    for key, kind in _INTEGRATION_KINDS.items():
        if key in data:
            kwargs[key] = parse_quantity(data[key], kind, f"integration.{key}")
    return IntegrationConfig(**kwargs)


def _parse_breakpoints(raw, path: str) -> list[tuple[float, float]]:
    if not isinstance(raw, list) or not all(
            isinstance(p, (list, tuple)) and len(p) == 2 for p in raw):
        raise ConfigError(path, "expected a list of [x, y] pairs")
    out = []
    for i, (x, y) in enumerate(raw):
        out.append((parse_quantity(x, "dimensionless", f"{path}[{i}][0]"),
                    parse_quantity(y, "dimensionless", f"{path}[{i}][1]")))
    return out


def _parse_profile(data: dict, params: ParameterSet) -> EnzymeActivityProfile:
    data = _require_mapping(data, "enzyme")
    _reject_unknown(data, ("ph_of_x", "activity_of_ph"), "enzyme")
    default = default_amylase_profile(params.L)
    ph = default.ph_of_x
    act = default.activity_of_ph
    if "ph_of_x" in data:
        ph = PiecewiseLinear(_parse_breakpoints(data["ph_of_x"], "enzyme.ph_of_x"),
                             "enzyme.ph_of_x")
    if "activity_of_ph" in data:
        act = PiecewiseLinear(
            _parse_breakpoints(data["activity_of_ph"], "enzyme.activity_of_ph"),
            "enzyme.activity_of_ph")
    return EnzymeActivityProfile(ph_of_x=ph, activity_of_ph=act)


def _parse_window(data: dict, params: ParameterSet) -> SecretionWindow:
    data = _require_mapping(data, "secretion")
    allowed = ("mode", "substrate_source", "adds_enzyme", "chi")
    _reject_unknown(data, allowed, "secretion")
    kwargs = {}
    if "mode" in data:
        kwargs["mode"] = str(data["mode"])
    if "chi" in data:
        kwargs["chi_kind"] = str(data["chi"])
    for key in ("substrate_source", "adds_enzyme"):
        if key in data:
            if not isinstance(data[key], bool):
                raise ConfigError(f"secretion.{key}", "expected true or false")
            kwargs[key] = data[key]
    return SecretionWindow.from_params(params, **kwargs)


def build_scenario(data: dict | None) -> ScenarioConfig:
    """Build and validate one scenario from a parsed YAML document."""
    data = _require_mapping(data, "")
    _reject_unknown(data, ("variant", "params", "initial", "integration",
                           "enzyme", "secretion", "sensitivity", "homog"), "")
    variant = ModelVariant.parse(data.get("variant", "M4"))
    params = _parse_params(data.get("params"))
    initial = _parse_initial(data.get("initial"), params)
    integration = _parse_integration(data.get("integration"))
    profile = _parse_profile(data.get("enzyme"), params)
    window = _parse_window(data.get("secretion"), params)

    sens = _require_mapping(data.get("sensitivity"), "sensitivity")
    _reject_unknown(sens, ("parameters", "factors", "underestimate"),
                    "sensitivity")
    parameters = tuple(sens.get("parameters", DEFAULT_SENSITIVITY_PARAMETERS))
    for name in parameters:
        if name != "K" and name not in _PARAM_KINDS:
            raise ConfigError("sensitivity.parameters",
                              f"unknown parameter {name!r}")
    underestimate = sens.get("underestimate", False)
    if not isinstance(underestimate, bool):
        raise ConfigError("sensitivity.underestimate", "expected true or false")
    if "factors" in sens:
        if underestimate:
            raise ConfigError("sensitivity.factors",
                              "give either explicit factors or "
                              "underestimate: true, not both")
        factors = tuple(parse_quantity(f, "dimensionless",
                                       f"sensitivity.factors[{i}]")
                        for i, f in enumerate(sens["factors"]))
    else:
        factors = (UNDERESTIMATE_FACTORS if underestimate
                   else DEFAULT_SENSITIVITY_FACTORS)
    for i, f in enumerate(factors):
        if not (math.isfinite(f) and f > 0.0):
            raise ConfigError(f"sensitivity.factors[{i}]",
                              f"must be a positive factor, got {f!r}")

    homog = _require_mapping(data.get("homog"), "homog")
    _reject_unknown(homog, ("eps_list",), "homog")
    eps_list = tuple(parse_quantity(v, "time", f"homog.eps_list[{i}]")
                     for i, v in enumerate(homog.get("eps_list", [])))

    scenario = ScenarioConfig(
        variant=variant, params=params, initial=initial,
        integration=integration, profile=profile, window=window,
        sensitivity_parameters=parameters, sensitivity_factors=factors,
        homog_eps_list=eps_list)
    scenario.validate()
    return scenario


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Parse and validate a scenario file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"invalid YAML: {exc}") from exc
    return build_scenario(data)
