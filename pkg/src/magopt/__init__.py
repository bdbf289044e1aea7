"""Thresholds and dynamics of coupled magnetic / optomechanical
transverse patterns in a laser-pumped cold-atom cloud with a single
feedback mirror.

The package splits into closed-form linear stability analysis
(:mod:`magopt.lsa`), the nonlinear field dynamics on a periodic grid
(:mod:`magopt.optics`, :mod:`magopt.dynamics`), and reporting
(:mod:`magopt.reports`, :mod:`magopt.cli`).
"""

__version__ = "0.1.0"

from .dynamics import (
    AtomicState,
    Diagnostics,
    GrowthFit,
    GrowthFitError,
    IntegrationAbort,
    RunResult,
    SimConfig,
    ValidityWarning,
    default_timestep,
    measure_growth_rate,
    rhs,
    run,
    seed_perturbation,
    step,
    uniform_state,
)
from .lsa import (
    GrowthRate,
    NoCrossoverError,
    ThresholdResult,
    crossover_molasses,
    crossover_period,
    growth_rate_density,
    growth_rate_orientation,
    min_b0,
    optimal_sin_theta,
    threshold_density,
    threshold_orientation,
)
from .optics import (
    FieldPair,
    PumpRates,
    TransverseGrid,
    assemble_pump_rates,
    closed_loop_pump,
    feedback_propagate,
    imprint_phase,
    uniform_field,
)
from .params import SystemParams, ThinMediumWarning
from .physics import (
    A_PUMP,
    A_WEAK,
    MolassesDerived,
    TransitionCoefficients,
    ballistic_rate,
    intensity_to_sat,
    molasses_coefficients,
    optomech_sigma,
    phase_shifts,
    quarter_talbot_distance,
    rate_to_sat,
    sat_to_intensity,
    sat_to_rate,
    talbot_phase,
)
from .species import RB87, AtomSpecies

__all__ = [
    "A_PUMP",
    "A_WEAK",
    "AtomSpecies",
    "AtomicState",
    "Diagnostics",
    "FieldPair",
    "GrowthFit",
    "GrowthFitError",
    "GrowthRate",
    "IntegrationAbort",
    "MolassesDerived",
    "NoCrossoverError",
    "PumpRates",
    "RB87",
    "RunResult",
    "SimConfig",
    "SystemParams",
    "ThinMediumWarning",
    "ThresholdResult",
    "TransitionCoefficients",
    "TransverseGrid",
    "ValidityWarning",
    "assemble_pump_rates",
    "ballistic_rate",
    "closed_loop_pump",
    "crossover_molasses",
    "crossover_period",
    "default_timestep",
    "feedback_propagate",
    "growth_rate_density",
    "growth_rate_orientation",
    "imprint_phase",
    "intensity_to_sat",
    "measure_growth_rate",
    "min_b0",
    "molasses_coefficients",
    "optimal_sin_theta",
    "optomech_sigma",
    "phase_shifts",
    "quarter_talbot_distance",
    "rate_to_sat",
    "rhs",
    "run",
    "sat_to_intensity",
    "sat_to_rate",
    "seed_perturbation",
    "step",
    "talbot_phase",
    "threshold_density",
    "threshold_orientation",
    "uniform_field",
    "uniform_state",
    "__version__",
]
