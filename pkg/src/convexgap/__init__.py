"""Interval-valued local nonconvexity indices for C^{1,1} functions.

The package estimates the generalized Hessian set of a function at a
point (a convex hull of limiting Hessians), evaluates the nuclear-norm
distance to the PSD cone over that hull, and reports the resulting index
interval together with normalized ratios and the weak-convexity modulus.
"""

from .errors import (EigenSolverError, IntegrationError, NumericalError,
                     SamplingError)
from .functions import (FunctionOracle, PiecewiseQuadratic1D,
                        check_convex_on_segment, compose_sum, embed_along,
                        make_builtin, oracle_from_config, rotate,
                        without_hessian)
from .hessian_set import (HessianVertexList, SamplingConfig,
                          hull_membership_distance, minkowski_sum,
                          sample_hessian_set)
from .hull_index import (ConvergenceWarning, NlocBounds, NonconvexityInterval,
                         SimplexWeights, compute_interval, interval_from_hull,
                         loc_lower, loc_upper, nloc_bounds, project_onto_hull,
                         rho_modulus)
from .smoothing import (MollificationReport, MollificationSample,
                        MollifierConfig, mollification_membership_check,
                        mollified_hessian)
from .spectral import (SpectralSplit, SymMatrix, dist_to_psd, eigendecompose,
                       eigenvalues, ell, ell_and_subgradient, nuclear_norm,
                       normalized_ratio)
from .verify import SuiteResult, run_suites

__version__ = "0.1.0"

__all__ = [
    "ConvergenceWarning",
    "EigenSolverError",
    "FunctionOracle",
    "HessianVertexList",
    "IntegrationError",
    "MollificationReport",
    "MollificationSample",
    "MollifierConfig",
    "NlocBounds",
    "NonconvexityInterval",
    "NumericalError",
    "PiecewiseQuadratic1D",
    "SamplingConfig",
    "SamplingError",
    "SimplexWeights",
    "SpectralSplit",
    "SuiteResult",
    "SymMatrix",
    "check_convex_on_segment",
    "compose_sum",
    "compute_interval",
    "dist_to_psd",
    "eigendecompose",
    "eigenvalues",
    "ell",
    "ell_and_subgradient",
    "embed_along",
    "hull_membership_distance",
    "interval_from_hull",
    "loc_lower",
    "loc_upper",
    "make_builtin",
    "minkowski_sum",
    "mollification_membership_check",
    "mollified_hessian",
    "nloc_bounds",
    "normalized_ratio",
    "nuclear_norm",
    "oracle_from_config",
    "project_onto_hull",
    "rho_modulus",
    "rotate",
    "run_suites",
    "sample_hessian_set",
    "without_hessian",
    "__version__",
]
