"""Coupled-ODE simulation of bolus transit and digestion in the small intestine."""

from .errors import (ConfigError, DegenerateStateError, DigestsimError,
                     NumericalFailureError)
from .state import (BolusState, ModelVariant, ParameterSet, lateral_surface,
                    solids_mass, total_mass, volume, water_proportion)
from .transport import (PulseTrain, acceleration, friction_coefficient,
                        pulse_efficiency, pulse_rate)
from .kinetics import (EnzymeActivityProfile, MassRates, PiecewiseLinear,
                       SecretionWindow, default_amylase_profile,
                       enzyme_activity, mass_rates, mm_absorption, rhs_m1,
                       rhs_m2, rhs_m3, secretion_rate, surfacic_rate)
from .integrator import (IntegrationConfig, Trajectory, detect_pulse_windows,
                         run, step)
from .config import (ScenarioConfig, build_scenario, figure2_initial,
                     load_scenario)
from .analysis import (EvaluationResult, HomogenizationEntry,
                       SensitivityReport, compare_homogenization,
                       evaluate_starch, homogenization_error,
                       homogenization_period_study, relative_variation,
                       sensitivity_sweep)

__version__ = "0.1.0"

__all__ = [
    "BolusState", "ConfigError", "DegenerateStateError", "DigestsimError",
    "EnzymeActivityProfile", "EvaluationResult", "HomogenizationEntry",
    "IntegrationConfig", "MassRates", "ModelVariant", "NumericalFailureError",
    "ParameterSet", "PiecewiseLinear", "PulseTrain", "ScenarioConfig",
    "SecretionWindow", "SensitivityReport", "Trajectory", "acceleration",
    "build_scenario", "compare_homogenization", "default_amylase_profile",
    "detect_pulse_windows", "enzyme_activity", "evaluate_starch",
    "figure2_initial", "friction_coefficient", "homogenization_error",
    "homogenization_period_study", "lateral_surface", "load_scenario",
    "mass_rates", "mm_absorption", "pulse_efficiency", "pulse_rate",
    "relative_variation", "rhs_m1", "rhs_m2", "rhs_m3", "run",
    "secretion_rate", "sensitivity_sweep", "solids_mass", "step",
    "surfacic_rate", "total_mass", "volume", "water_proportion",
]
