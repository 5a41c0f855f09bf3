"""Propeller-slipstream-aware lifting-line analysis and wing optimization."""

from .errors import (
    CaseError,
    ConvergenceError,
    FitError,
    ParseError,
    PropwingError,
    SolverError,
    ValidationError,
)
from .llt import FlightCondition, LLTSettings, LLTSolution, solve, wing_polar_sweep
from .optimizer import (
    BandCl,
    BatterySpec,
    DeltaMetrics,
    Environment,
    FixedCl,
    OptimisationResult,
    OptimisationSpec,
    delta_metrics,
    endurance_range,
    optimize,
)
from .planform import WingPlanform, control_wing, eval_chord, eval_twist, wing_area
from .polar import AerofoilPolar, LinearLiftModel, cd_of_cl, cl_of_alpha, fit_blf, load_polar
from .slipstream import (
    BemSolution,
    PropellerGeometry,
    PropOperatingPoint,
    SlipstreamProfile,
    advance_ratio,
    load_slipstream,
    run_bem,
    sample_slipstream,
    slipstream_from_bem,
    thrust_coefficient,
)

__version__ = "0.1.0"
