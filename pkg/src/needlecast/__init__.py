"""Crossing laws of a needle cluster thrown on a rectangle lattice."""

__version__ = "0.1.0"

from needlecast.conditional import (
    ClusterSpec,
    ConditionalPmf,
    conditional_moment,
    conditional_pmf,
    conditional_pmf_bruteforce,
)
from needlecast.convergence import (
    ConvergenceReport,
    atom_gap,
    convergence_report,
    moment_gap_table,
    step_sup_distance,
    sup_distance,
)
from needlecast.errors import CapacityError, ConvergenceError, DomainError, NeedlecastError
from needlecast.lattice import (
    ClusterCenter,
    CrossingProfile,
    LatticeParams,
    Region,
    classify_region,
    crossing_profile,
    needle_crossings,
)
from needlecast.limit import LimitLaw, limit_atom, limit_cdf, limit_moment
from needlecast.montecarlo import EmpiricalSummary, ThrowConfig, simulate, simulate_conditional
from needlecast.quadrature import QuadResult, RegionIntegrand, integrate_region
from needlecast.unconditional import FiniteCdf, IntersectionPmf, cdf, moment, moments, pmf

__all__ = [
    "CapacityError", "ClusterCenter", "ClusterSpec", "ConditionalPmf", "ConvergenceError",
    "ConvergenceReport", "CrossingProfile", "DomainError", "EmpiricalSummary", "FiniteCdf",
    "IntersectionPmf", "LatticeParams", "LimitLaw", "NeedlecastError", "QuadResult", "Region",
    "RegionIntegrand", "ThrowConfig", "atom_gap", "cdf", "classify_region",
    "conditional_moment", "conditional_pmf", "conditional_pmf_bruteforce",
    "convergence_report", "crossing_profile", "integrate_region", "limit_atom", "limit_cdf",
    "limit_moment", "moment", "moment_gap_table", "moments", "needle_crossings", "pmf",
    "simulate", "simulate_conditional", "step_sup_distance", "sup_distance",
]
