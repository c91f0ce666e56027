"""Simulator and verification harness for rank-based competing Brownian particles.

A system of ``m`` particles diffuses on the line; at each instant the lowest
particle (and only it) receives a positive drift.  The package integrates the
dynamics two ways (a gap/reflection scheme with exact one-step projection,
and a named-particle scheme with rank-assigned drifts), provides the
product-exponential stationary laws and their conditionings, closed-form
tail bounds with a truncation planner for semi-infinite configurations, and
the statistics used to verify distributional claims against simulation.

Hot kernels are compiled with numba when available; a pure-numpy fallback
produces bit-identical results (select with ``ATLAS_SIM_BACKEND``).
"""

from .backend import HAVE_NUMBA, selected_backend, thread_cap, use_numba
from .bounds import (
    HypothesisReport,
    TruncationPlan,
    bulk_inf_bound,
    gaussian_tail,
    hypothesis_report,
    kth_sup_bound,
    leftmost_sup_bound,
    lyapunov_tail,
    truncation_plan,
)
from .engine import (
    MAX_SWEEPS,
    PROJECTION_TOL,
    CoupledEnsembleResult,
    EnsembleResult,
    RunResult,
    run,
    run_coupled,
    run_coupled_replicas,
    run_replicas,
    step_named,
    step_spacing,
)
from .errors import (
    AtlasSimError,
    InvalidBoundError,
    InvalidInputError,
    InvalidModelError,
    InvalidStepError,
    NumericalFailureError,
    PlanInfeasibleError,
)
from .measures import (
    ProductExponentialMeasure,
    conditioned_above,
    conditioned_below,
    entropy_conditioned_above,
    entropy_conditioned_below,
    kl_product_exp,
    linear_rate_measure,
    log_density,
    sample,
    stationary_measure,
    stationary_rates,
)
from .model import (
    ModelSpec,
    make_atlas,
    positions_from_spacings,
    rank,
    spacings,
)
from .rng import PathBundle
from .stats import (
    ExponentFit,
    KsResult,
    alpha_identity_check,
    anchored_identity_check,
    domination_violation,
    ks_critical_value,
    ks_exponential,
    scaling_fit,
    stochastic_dominance,
)

__version__ = "0.1.0"

__all__ = [
    "AtlasSimError",
    "CoupledEnsembleResult",
    "EnsembleResult",
    "ExponentFit",
    "HAVE_NUMBA",
    "HypothesisReport",
    "InvalidBoundError",
    "InvalidInputError",
    "InvalidModelError",
    "InvalidStepError",
    "KsResult",
    "MAX_SWEEPS",
    "ModelSpec",
    "NumericalFailureError",
    "PathBundle",
    "PlanInfeasibleError",
    "PROJECTION_TOL",
    "ProductExponentialMeasure",
    "RunResult",
    "TruncationPlan",
    "alpha_identity_check",
    "anchored_identity_check",
    "bulk_inf_bound",
    "conditioned_above",
    "conditioned_below",
    "domination_violation",
    "entropy_conditioned_above",
    "entropy_conditioned_below",
    "gaussian_tail",
    "hypothesis_report",
    "kl_product_exp",
    "ks_critical_value",
    "ks_exponential",
    "kth_sup_bound",
    "leftmost_sup_bound",
    "linear_rate_measure",
    "log_density",
    "lyapunov_tail",
    "make_atlas",
    "positions_from_spacings",
    "rank",
    "run",
    "run_coupled",
    "run_coupled_replicas",
    "run_replicas",
    "sample",
    "scaling_fit",
    "selected_backend",
    "spacings",
    "stationary_measure",
    "stationary_rates",
    "step_named",
    "step_spacing",
    "stochastic_dominance",
    "thread_cap",
    "truncation_plan",
    "use_numba",
    "__version__",
]
