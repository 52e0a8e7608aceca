"""Depth-first directional search (DFDS) for box-constrained black-box minimization.

Besides the solver this package holds the PRS and IHR baselines, the
spherical cap probability machinery behind the convergence bounds, the
bound calculators themselves and a benchmark harness.
"""

from .domain import BoxDomain, Chord, ConvexDomain
from .errors import (
    DegenerateVectorError,
    DomainViolationError,
    InvalidDimensionError,
    NonFiniteObjectiveError,
    QuadratureError,
)
from .geometry import (
    CapMethod,
    CapProbability,
    CapSpec,
    angle_between,
    alpha_for,
    cap_probability_closed_form,
    cap_probability_lower_bound,
    cap_probability_monte_carlo,
    cap_probability_quadrature,
    sample_unit_direction,
    sphere_surface_area,
)
from .objectives import BENCHMARKS, KnownOptimum, Objective, is_epsilon_optimal, make_benchmark
from .solvers import RunRecord, SolverConfig, Termination, dfds_run, ihr_run, prs_run, refine_local

__version__ = "0.1.0"

__all__ = [
    "BENCHMARKS", "BoxDomain", "CapMethod", "CapProbability", "CapSpec", "Chord", "ConvexDomain",
    "DegenerateVectorError", "DomainViolationError", "InvalidDimensionError", "KnownOptimum",
    "NonFiniteObjectiveError", "Objective", "QuadratureError", "RunRecord", "SolverConfig",
    "Termination", "alpha_for", "angle_between", "cap_probability_closed_form",
    "cap_probability_lower_bound", "cap_probability_monte_carlo", "cap_probability_quadrature",
    "dfds_run", "ihr_run", "is_epsilon_optimal", "make_benchmark", "prs_run", "refine_local",
    "sample_unit_direction", "sphere_surface_area",
]
