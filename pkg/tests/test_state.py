import math

import pytest
from hypothesis import given, strategies as st

from digestsim import (BolusState, DegenerateStateError, ModelVariant,
                       ParameterSet, lateral_surface, total_mass, volume,
                       water_proportion)
from digestsim.state import validate_parameters

masses = st.floats(min_value=0.0, max_value=1e6, allow_nan=False)


def random_states():
    return st.builds(
        BolusState, a_s=masses, a_ns=masses, a_nd=masses, b_int=masses,
        b_abs=masses, w=masses, e=masses)


def test_total_mass_empty_bolus():
    assert total_mass(BolusState()) == 0.0


def test_total_mass_additivity():
    assert total_mass(BolusState(a_s=10.0, w=20.0)) == 30.0


def test_total_mass_excludes_enzymes():
    assert total_mass(BolusState(e=5.0)) == 0.0


@given(random_states())
def test_total_mass_is_component_sum(s):
    assert total_mass(s) == s.a_s + s.a_ns + s.a_nd + s.b_int + s.b_abs + s.w


def test_volume_zero_mass():
    assert volume(BolusState(), ParameterSet()) == 0.0


def test_volume_direct_ratio():
    p = ParameterSet(rho=1e6)
    assert volume(BolusState(a_s=100.0), p) == pytest.approx(1e-4)


@given(random_states())
def test_volume_times_density_is_mass(s):
    p = ParameterSet()
    assert volume(s, p) * p.rho == pytest.approx(total_mass(s), rel=1e-12)


def test_lateral_surface_zero_mass():
    assert lateral_surface(BolusState(), ParameterSet()) == 0.0


def test_lateral_surface_sqrt_scaling():
    p = ParameterSet()
    s1 = lateral_surface(BolusState(a_s=50.0), p)
    s2 = lateral_surface(BolusState(a_s=100.0), p)
    assert s2 == pytest.approx(math.sqrt(2.0) * s1, rel=1e-12)


@given(random_states())
def test_lateral_surface_matches_cylinder_geometry(s):
    # 2*pi*R*l with R from the cylinder volume V = pi*R^2*l = mass/rho.
    p = ParameterSet()
    m = total_mass(s)
    r = math.sqrt(m / (p.rho * math.pi * p.l))
    assert lateral_surface(s, p) == pytest.approx(2.0 * math.pi * r * p.l,
                                                  rel=1e-12, abs=1e-300)


@given(random_states())
def test_lateral_surface_squared_identity(s):
    p = ParameterSet()
    surf = lateral_surface(s, p)
    assert surf * surf == pytest.approx(
        4.0 * math.pi * p.l / p.rho * total_mass(s), rel=1e-12, abs=1e-300)


def test_water_proportion_pure_water():
    assert water_proportion(BolusState(w=42.0)) == 1.0


def test_water_proportion_quarter():
    assert water_proportion(BolusState(w=25.0, a_s=75.0)) == 0.25


def test_water_proportion_zero_mass_raises():
    with pytest.raises(DegenerateStateError):
        water_proportion(BolusState())


@given(random_states())
def test_water_proportion_in_unit_interval(s):
    if total_mass(s) > 0.0:
        assert 0.0 <= water_proportion(s) <= 1.0


@given(random_states(), st.floats(min_value=1e-6, max_value=1e6))
def test_water_proportion_scale_invariant(s, lam):
    if total_mass(s) <= 0.0 or s.w <= 0.0:
        return
    scaled = BolusState(a_s=s.a_s * lam, a_ns=s.a_ns * lam, a_nd=s.a_nd * lam,
                        b_int=s.b_int * lam, b_abs=s.b_abs * lam, w=s.w * lam)
    assert water_proportion(scaled) == pytest.approx(water_proportion(s),
                                                     rel=1e-9)


def test_model_variant_properties():
    assert not ModelVariant.M1.uses_lubrication
    assert not ModelVariant.M2.uses_lubrication
    assert ModelVariant.M3.uses_lubrication
    assert ModelVariant.M4.uses_lubrication
    assert ModelVariant.M4.is_homogenized
    assert not ModelVariant.M3.is_homogenized
    assert ModelVariant.parse("m2") is ModelVariant.M2


def test_default_parameters_validate():
    validate_parameters(ParameterSet())


def test_parameters_reject_nonpositive_rate():
    from digestsim import ConfigError
    with pytest.raises(ConfigError, match="K_tilde"):
        validate_parameters(ParameterSet(K_tilde=0.0))


def test_parameters_reject_bad_water_target():
    from digestsim import ConfigError
    with pytest.raises(ConfigError, match="w0"):
        validate_parameters(ParameterSet(w0=1.5))
