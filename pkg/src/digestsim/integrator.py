"""Time integration of the coupled transport + kinetics system.

Explicit Runge-Kutta stepping (fixed-step classic RK4 or an adaptive
Cash-Karp 4(5) pair) with special handling of the narrow forcing pulses:
for the pulse-resolved variants (M1-M3) the stepper drops to a small
substep whenever the retarded pulse argument t - x/c is inside, or
within one base step of, a pulse window. Since the retarded argument
advances at rate 1 - v/c <= 1, stepping by at most the retarded distance
to the next window can never jump across one, so no pulse is skipped.

A run terminates when the bolus reaches x = L (exit time found by linear
interpolation across the final step), when the time budget expires, or
when the state degenerates (velocity reaching the wave speed under
M1-M3, water proportion leaving (0, 1), vanishing bolus). After every
run the conserved mass ledger

    a_s + a_ns + a_nd + b_int + b_abs + absorbed_cum - secreted_cum

is audited against its initial value; its drift is reported in the
trajectory diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ConfigError, DegenerateStateError, NumericalFailureError
from .kinetics import (EnzymeActivityProfile, SecretionWindow,
                       default_amylase_profile, mass_rates)
from .state import (BolusState, ModelVariant, ParameterSet, total_mass,
                    validate_initial_state, validate_parameters)
from .transport import PulseTrain, acceleration

# Derivative component order, matching the constructor calls below.
_DERIV_FIELDS = ("x", "v", "a_s", "a_ns", "a_nd", "b_int", "b_abs", "w",
                 "e", "absorbed_cum", "secreted_cum")
_CLAMP_FIELDS = ("a_s", "a_ns", "a_nd", "b_int", "b_abs", "w", "e",
                 "absorbed_cum", "secreted_cum")


@dataclass(frozen=True)
class IntegrationConfig:
    """Stepper settings. All times in seconds."""

    method: str = "rk4"          # "rk4" (fixed step) or "rk45" (adaptive)
    base_step: float = 1.0
    pulse_substep: float = 0.1   # used in and near pulse windows (M1-M3)
    rel_tol: float = 1.0e-6
    abs_tol: float = 1.0e-9      # also the mass-clamp tolerance, grams
    max_time: float = 43200.0
    output_stride: float = 60.0

    def validate(self, p: ParameterSet, prefix: str = "integration") -> None:
        if self.method not in ("rk4", "rk45"):
            raise ConfigError(f"{prefix}.method",
                              f"unknown method {self.method!r}; expected rk4 or rk45")
        for name in ("base_step", "pulse_substep", "rel_tol", "abs_tol",
                     "max_time", "output_stride"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)
                    and value > 0.0):
                raise ConfigError(f"{prefix}.{name}",
                                  f"must be a finite positive number, got {value!r}")
        if self.pulse_substep > p.pulse_width_eps / 4.0:
            raise ConfigError(f"{prefix}.pulse_substep",
                              f"must be <= pulse_width_eps/4 = "
                              f"{p.pulse_width_eps / 4.0} s so each pulse is "
                              "resolved by at least 4 steps")
        if self.output_stride < self.base_step:
            raise ConfigError(f"{prefix}.output_stride",
                              "must be >= base_step")


@dataclass
class Trajectory:
    """Time series of one run plus exit information and diagnostics."""

    times: list[float]
    states: list[BolusState]
    exit_time: float | None
    exit_flag: str               # "exited" | "time_budget" | "degenerate_state"
    diagnostics: dict

    @property
    def final_state(self) -> BolusState:
        return self.states[-1]

    def series(self, name: str) -> list[float]:
        return [getattr(s, name) for s in self.states]


def make_rhs(variant: ModelVariant, p: ParameterSet,
             profile: EnzymeActivityProfile, window: SecretionWindow,
             train: PulseTrain):
    """Build the combined derivative function state -> 11-tuple."""

    def rhs(s: BolusState) -> tuple:
        dv = acceleration(s, variant, p, train)
        mr = mass_rates(s, variant, p, profile, window)
        d = (s.v, dv, mr.a_s, mr.a_ns, mr.a_nd, mr.b_int, mr.b_abs, mr.w,
             mr.e, mr.absorbed_cum, mr.secreted_cum)
        for name, value in zip(_DERIV_FIELDS, d):
            if not math.isfinite(value):
                raise NumericalFailureError(
                    f"non-finite derivative d({name})/dt = {value!r} at "
                    f"t = {s.t!r}, x = {s.x!r}")
        return d

    return rhs


def _shifted(s: BolusState, dt: float, d: tuple,
             t_delta: float | None = None) -> BolusState:
    """State moved by dt*d; t advances by t_delta (default dt)."""
    return BolusState(
        x=s.x + dt * d[0], v=s.v + dt * d[1], a_s=s.a_s + dt * d[2],
        a_ns=s.a_ns + dt * d[3], a_nd=s.a_nd + dt * d[4],
        b_int=s.b_int + dt * d[5], b_abs=s.b_abs + dt * d[6],
        w=s.w + dt * d[7], e=s.e + dt * d[8],
        absorbed_cum=s.absorbed_cum + dt * d[9],
        secreted_cum=s.secreted_cum + dt * d[10],
        t=s.t + (dt if t_delta is None else t_delta))


def _clamped(s: BolusState, abs_tol: float) -> BolusState:
    """Clamp tiny negative masses to zero; abort on real undershoot."""
    updates = {}
    for name in _CLAMP_FIELDS:
        value = getattr(s, name)
        if value < 0.0:
            if value < -abs_tol:
                raise NumericalFailureError(
                    f"mass component {name} undershot to {value!r} g at "
                    f"t = {s.t!r} (beyond the clamp tolerance {abs_tol!r})")
            updates[name] = 0.0
    return replace(s, **updates) if updates else s


def _rk4_step(s: BolusState, dt: float, rhs, abs_tol: float) -> BolusState:
    k1 = rhs(s)
    k2 = rhs(_shifted(s, 0.5 * dt, k1))
    k3 = rhs(_shifted(s, 0.5 * dt, k2))
    k4 = rhs(_shifted(s, dt, k3))
    combo = tuple((k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0
                  for i in range(len(k1)))
    return _clamped(_shifted(s, dt, combo), abs_tol)


# Cash-Karp 4(5) embedded pair.
_CK_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (3 / 10, -9 / 10, 6 / 5),
    (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
    (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
)
_CK_T = (0.0, 1 / 5, 3 / 10, 3 / 5, 1.0, 7 / 8)
_CK_C5 = (37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771)
_CK_C4 = (2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4)


def _rk45_step(s: BolusState, dt: float, rhs, abs_tol: float):
    """One Cash-Karp step: returns (5th-order state, scaled error norm)."""
    ks = [rhs(s)]
    n = len(ks[0])
    for stage, row in enumerate(_CK_A[1:], start=1):
        d = tuple(sum(row[j] * ks[j][i] for j in range(len(row)))
                  for i in range(n))
        ks.append(rhs(_shifted(s, dt, d, t_delta=_CK_T[stage] * dt)))
    d5 = tuple(sum(_CK_C5[j] * ks[j][i] for j in range(6)) for i in range(n))
    new = _shifted(s, dt, d5)
    err = 0.0
    old_vals = (s.x, s.v, s.a_s, s.a_ns, s.a_nd, s.b_int, s.b_abs, s.w,
                s.e, s.absorbed_cum, s.secreted_cum)
    for i in range(n):
        e_i = dt * sum((_CK_C5[j] - _CK_C4[j]) * ks[j][i] for j in range(6))
        scale = abs_tol + max(abs(old_vals[i]), abs(old_vals[i] + dt * d5[i]))
        err = max(err, abs(e_i) / scale)
    return _clamped(new, abs_tol), err


def step(s: BolusState, dt: float, variant, params: ParameterSet,
         profile: EnzymeActivityProfile | None = None,
         window: SecretionWindow | None = None,
         train: PulseTrain | None = None,
         abs_tol: float = 1.0e-9) -> BolusState:
    """Advance one RK4 step of the full coupled system.

    Convenience wrapper for tests and callers outside run(); builds the
    derivative context on each call.
    """
    if dt <= 0.0:
        raise ConfigError("dt", f"step size must be positive, got {dt!r}")
    variant = ModelVariant.parse(variant)
    profile = profile or default_amylase_profile(params.L)
    window = window or SecretionWindow.from_params(params)
    train = train or PulseTrain.from_params(params)
    rhs = make_rhs(variant, params, profile, window, train)
    return _rk4_step(s, dt, rhs, abs_tol)


def detect_pulse_windows(t: float, x: float, v: float,
                         p: ParameterSet) -> float:
    """Next time the retarded argument t - x/c enters a pulse window.

    Returns t itself when already inside a window. The crossing estimate
    assumes the current velocity persists; it is exact for constant v
    (window spacing period/(1 - v/c)) and an upper bound while the bolus
    decelerates between pulses.
    """
    if v >= p.c:
        raise DegenerateStateError(
            f"retarded pulse argument not monotone: v = {v!r} >= c = {p.c!r}")
    s_ret = t - x / p.c
    period = p.pulse_period
    if s_ret >= 0.0 and s_ret % period < p.pulse_width_eps:
        return t
    gap = -s_ret if s_ret < 0.0 else period - s_ret % period
    return t + gap / (1.0 - v / p.c)


def _lerp_states(s0: BolusState, s1: BolusState, t: float) -> BolusState:
    """State interpolated linearly at time t in [s0.t, s1.t]."""
    if s1.t == s0.t:
        return s1
    f = (t - s0.t) / (s1.t - s0.t)
    return BolusState(*[a + f * (b - a) for a, b in
                        zip((s0.x, s0.v, s0.a_s, s0.a_ns, s0.a_nd, s0.b_int,
                             s0.b_abs, s0.w, s0.e, s0.absorbed_cum,
                             s0.secreted_cum, s0.t),
                            (s1.x, s1.v, s1.a_s, s1.a_ns, s1.a_nd, s1.b_int,
                             s1.b_abs, s1.w, s1.e, s1.absorbed_cum,
                             s1.secreted_cum, s1.t))])


def _ledger(s: BolusState) -> float:
    return (s.a_s + s.a_ns + s.a_nd + s.b_int + s.b_abs + s.absorbed_cum
            - s.secreted_cum)


def run(initial: BolusState, variant, params: ParameterSet,
        cfg: IntegrationConfig | None = None,
        profile: EnzymeActivityProfile | None = None,
        window: SecretionWindow | None = None,
        train: PulseTrain | None = None) -> Trajectory:
    """Integrate from the pylorus until exit, time budget, or degeneracy."""
    variant = ModelVariant.parse(variant)
    cfg = cfg or IntegrationConfig()
    validate_parameters(params)
    cfg.validate(params)
    validate_initial_state(initial, variant, params)
    profile = profile or default_amylase_profile(params.L)
    window = window or SecretionWindow.from_params(params)
    train = train or PulseTrain.from_params(params)
    rhs = make_rhs(variant, params, profile, window, train)

    resolve_pulses = not variant.is_homogenized
    period = params.pulse_period
    eps = params.pulse_width_eps

    s = initial
    times = [s.t]
    states = [s]
    next_sample = s.t + cfg.output_stride
    exit_time = None
    exit_flag = "time_budget"
    reason = ""
    steps = 0
    pulse_windows = 0
    last_window_idx = -1
    dt_next = cfg.base_step if cfg.method == "rk4" else cfg.base_step

    def window_bookkeeping(state: BolusState):
        nonlocal pulse_windows, last_window_idx
        s_ret = state.t - state.x / params.c
        if s_ret >= 0.0 and s_ret % period < eps:
            idx = int(s_ret // period)
            if idx != last_window_idx:
                pulse_windows += 1
                last_window_idx = idx

    if resolve_pulses:
        window_bookkeeping(s)

    while True:
        if s.t >= cfg.max_time - 1e-12:
            exit_flag = "time_budget"
            break

        # Proposed step size.
        dt = dt_next if cfg.method == "rk45" else cfg.base_step
        if resolve_pulses:
            # The retarded argument advances at most at rate 1, so a step
            # bounded by the retarded distance to the next window start
            # cannot skip the window.
            s_ret = s.t - s.x / params.c
            pos = s_ret % period if s_ret >= 0.0 else period + s_ret
            in_window = s_ret >= 0.0 and pos < eps
            dist = period - pos
            if in_window or dist <= cfg.pulse_substep:
                dt = min(dt, cfg.pulse_substep)
            elif dist < dt:
                dt = dist
        dt = min(dt, cfg.max_time - s.t)

        try:
            if cfg.method == "rk4":
                new = _rk4_step(s, dt, rhs, cfg.abs_tol)
            else:
                while True:
                    new, err = _rk45_step(s, dt, rhs, cfg.abs_tol)
                    err_norm = err / cfg.rel_tol
                    if err_norm <= 1.0 or dt <= 1e-9:
                        grow = 0.9 * err_norm ** -0.2 if err_norm > 0 else 5.0
                        dt_next = min(cfg.base_step,
                                      dt * min(5.0, max(0.2, grow)))
                        break
                    dt = max(1e-9,
                             dt * min(5.0, max(0.2, 0.9 * err_norm ** -0.25)))
        except DegenerateStateError as exc:
            exit_flag = "degenerate_state"
            reason = str(exc)
            break
        steps += 1

        # Exit detection with sub-step interpolation.
        seg_end = new
        exited = new.x >= params.L
        if exited and new.x > s.x:
            frac = (params.L - s.x) / (new.x - s.x)
            seg_end = replace(_lerp_states(s, new, s.t + frac * (new.t - s.t)),
                              x=params.L)

        if resolve_pulses:
            window_bookkeeping(seg_end)

        # Emit stride-aligned samples inside (s.t, seg_end.t].
        while next_sample <= seg_end.t + 1e-12:
            sample = _lerp_states(s, new, next_sample)
            if sample.t > times[-1] + 1e-12:
                times.append(sample.t)
                states.append(sample)
            next_sample += cfg.output_stride

        if exited:
            if seg_end.t > times[-1] + 1e-12:
                times.append(seg_end.t)
                states.append(seg_end)
            else:
                times[-1] = seg_end.t
                states[-1] = seg_end
            exit_time = seg_end.t
            exit_flag = "exited"
            s = seg_end
            break

        # Degeneracy checks on the accepted state.
        if resolve_pulses and new.v >= params.c:
            exit_flag = "degenerate_state"
            reason = (f"velocity {new.v!r} m/s reached the wave speed "
                      f"{params.c!r} m/s; retarded pulse argument no longer "
                      "monotone")
            s = new
            break
        if total_mass(new) <= 0.0:
            exit_flag = "degenerate_state"
            reason = "bolus mass vanished"
            s = new
            break
        s = new

    if exit_flag != "exited" and s.t > times[-1] + 1e-12:
        times.append(s.t)
        states.append(s)

    initial_mass = total_mass(initial)
    drift = abs(_ledger(states[-1]) - _ledger(initial))
    diagnostics = {
        "steps": steps,
        "pulse_windows": pulse_windows,
        "initial_mass_g": initial_mass,
        "ledger_drift_g": drift,
        "ledger_drift_rel": drift / initial_mass if initial_mass > 0 else 0.0,
    }
    if reason:
        diagnostics["degenerate_reason"] = reason
    return Trajectory(times=times, states=states, exit_time=exit_time,
                      exit_flag=exit_flag, diagnostics=diagnostics)
