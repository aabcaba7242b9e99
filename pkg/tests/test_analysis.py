import math

import numpy as np
import pytest

from digestsim import (BolusState, ModelVariant, ParameterSet,
                       build_scenario, compare_homogenization,
                       evaluate_starch, homogenization_period_study,
                       sensitivity_sweep)
from digestsim.config import ScenarioConfig, figure2_initial

TINY = 1e-30


def short_scenario(**integration):
    integration.setdefault("max_time", "20 min")
    return build_scenario({"integration": integration})


def test_unit_factor_gives_zero_relative_variation():
    report = sensitivity_sweep(short_scenario(), parameters=("C_abs",),
                               factors=(1.0,))
    cell = report.cell("C_abs", 1.0)
    assert cell.ok
    for output in ("a_s", "b_abs", "v"):
        curve = cell.relvar[output]
        defined = curve[~np.isnan(curve)]
        assert np.all(defined == 0.0)


def test_transport_constants_do_not_touch_frozen_kinetics():
    # With transport frozen (no forcing, zero initial velocity) the
    # kinetics are a closed subsystem: perturbing the efficiency
    # constants must change nothing at all.
    scenario = build_scenario({
        "params": {"c0": TINY, "c1": TINY, "v0": 0.0},
        "integration": {"max_time": "20 min"},
    })
    report = sensitivity_sweep(scenario, parameters=("a", "b"),
                               factors=(1.5,))
    for cell in report.cells:
        assert cell.ok
        assert cell.max_rv["a_s"] == 0.0
        assert cell.max_rv["b_abs"] == 0.0
        assert math.isnan(cell.max_rv["v"])  # baseline v stays at 0


def test_failed_cell_is_reported_and_sweep_continues():
    report = sensitivity_sweep(short_scenario(), parameters=("k_s",),
                               factors=(1e306, 1.0))
    bad = report.cell("k_s", 1e306)
    good = report.cell("k_s", 1.0)
    assert not bad.ok and bad.error
    assert good.ok


def test_sweep_parallel_matches_serial():
    scenario = short_scenario()
    serial = sensitivity_sweep(scenario, parameters=("C", "K"), jobs=1)
    parallel = sensitivity_sweep(scenario, parameters=("C", "K"), jobs=3)
    for c1, c2 in zip(serial.cells, parallel.cells):
        assert (c1.parameter, c1.factor) == (c2.parameter, c2.factor)
        assert c1.max_rv == c2.max_rv
        for output in c1.relvar:
            assert np.array_equal(c1.relvar[output], c2.relvar[output],
                                  equal_nan=True)


def test_friction_alias_resolution():
    report = sensitivity_sweep(short_scenario(), parameters=("K",),
                               factors=(1.5,))
    assert report.cell("K", 1.5).resolved == "K_tilde"


def test_self_comparison_has_zero_error():
    scenario = short_scenario(output_stride="2 s")
    entry, grid, v_a, v_b = compare_homogenization(
        scenario, variants=(ModelVariant.M4, ModelVariant.M4))
    assert entry.sup_position_error == 0.0
    assert entry.max_windowed_velocity_error == pytest.approx(0.0, abs=1e-15)
    assert np.array_equal(v_a, v_b)


def test_homogenization_errors_are_deterministic():
    scenario = short_scenario(output_stride="2 s")
    e1 = compare_homogenization(scenario)[0]
    e2 = compare_homogenization(scenario)[0]
    assert e1 == e2


def test_period_refinement_does_not_worsen_desk_scale():
    scenario = short_scenario(output_stride="2 s")
    coarse, fine = homogenization_period_study(scenario, scales=(1.0, 0.5))
    assert fine.sup_position_error <= coarse.sup_position_error + 1e-4
    assert (fine.max_windowed_velocity_error
            <= coarse.max_windowed_velocity_error + 1e-3)


def starch_scenario(**param_overrides):
    params = {
        "C": 2.63e-3, "C_abs": 3.5, "C_iabs": 10.0, "k_abs": 0.03,
        "k_mm": 0.5, "k_w": 5e-4, "w0": 0.99342, "beta": 0.0,
        "c0": 1.6e-4, "c1": 0.01, "K_tilde": 3e-3,
    }
    params.update(param_overrides)
    return build_scenario({
        "variant": "M4",
        "params": params,
        "initial": {"a_ns": 37.70, "w": 75.40, "e": 1.0},
        "integration": {"max_time": "12 h"},
    })


def test_pure_water_bolus_leaves_no_dry_matter():
    scenario = build_scenario({
        "variant": "M4",
        "params": {"k_w": 5e-4, "w0": 0.99342, "beta": 0.0,
                   "c0": 1.6e-4, "c1": 0.01, "K_tilde": 3e-3},
        "initial": {"w": 75.40, "e": 1.0},
    })
    result = evaluate_starch(scenario)
    assert result.dry_output_g == 0.0
    assert result.dry_ok


def test_doubling_absorption_rate_reduces_dry_output():
    base = evaluate_starch(starch_scenario())
    faster = evaluate_starch(starch_scenario(k_abs=0.06))
    assert faster.dry_output_g < base.dry_output_g


def test_starch_outputs_invariant_under_output_stride():
    r60 = evaluate_starch(starch_scenario())
    scenario300 = starch_scenario().with_integration(output_stride=300.0)
    r300 = evaluate_starch(scenario300)
    assert r60.dry_output_g == r300.dry_output_g
    assert r60.wet_output_pct == r300.wet_output_pct


def test_nonexit_is_an_evaluation_failure():
    from digestsim import DigestsimError
    scenario = starch_scenario().with_integration(max_time=60.0)
    with pytest.raises(DigestsimError, match="time"):
        evaluate_starch(scenario)
