"""Derivative-free, projection-free submodular maximization.

Maximize a monotone continuous DR-submodular function over a box, budget
polytope, or partition-matroid polytope using only (possibly noisy) function
values, or a monotone submodular set function under a partition matroid using
only set evaluations.  The optimizers are conditional-gradient schemes fed by
two-point sphere-sampling gradient estimates with momentum averaging, plus
projected-ascent and first-order baselines for comparison.
"""

from .algorithms import AlgoParams, RunTrace, TraceRecord, bcg, dbg, ga, scg, zga
from .constraints import (
    BoxDomain,
    ConstraintSpec,
    DomainError,
    InfeasibleTransformError,
    TransformedConstraint,
    contains,
    independent,
    shrink_domain,
    transform_constraint,
)
from .estimators import (
    GradientSample,
    MomentumState,
    batch_grad,
    discrete_batch_grad,
    momentum_update,
    one_point_grad,
    rho_schedule,
    sample_ball,
    sample_sphere,
    two_point_grad,
)
from .objectives import (
    Graph,
    coverage_eval,
    coverage_gradient,
    coverage_set_oracle,
    coverage_value_oracle,
    influence_eval,
    influence_set_oracle,
    logdet_eval,
    logdet_set_oracle,
    nqp_eval,
    nqp_generate,
    nqp_oracle,
    rbf_covariance,
)
from .oracles import (
    NoisyOracle,
    SetOracle,
    ValueOracle,
    multilinear_exact,
    multilinear_sample,
    multilinear_value_oracle,
    noisy_wrap,
    sample_subset,
)
from .polytope import enumerate_vertices, lmo, project, swap_round

__version__ = "0.1.0"

__all__ = [
    "AlgoParams",
    "BoxDomain",
    "ConstraintSpec",
    "DomainError",
    "GradientSample",
    "Graph",
    "InfeasibleTransformError",
    "MomentumState",
    "NoisyOracle",
    "RunTrace",
    "SetOracle",
    "TraceRecord",
    "TransformedConstraint",
    "ValueOracle",
    "batch_grad",
    "bcg",
    "contains",
    "coverage_eval",
    "coverage_gradient",
    "coverage_set_oracle",
    "coverage_value_oracle",
    "dbg",
    "discrete_batch_grad",
    "enumerate_vertices",
    "ga",
    "independent",
    "influence_eval",
    "influence_set_oracle",
    "lmo",
    "logdet_eval",
    "logdet_set_oracle",
    "momentum_update",
    "multilinear_exact",
    "multilinear_sample",
    "multilinear_value_oracle",
    "noisy_wrap",
    "nqp_eval",
    "nqp_generate",
    "nqp_oracle",
    "one_point_grad",
    "project",
    "rbf_covariance",
    "rho_schedule",
    "sample_ball",
    "sample_sphere",
    "sample_subset",
    "scg",
    "shrink_domain",
    "swap_round",
    "transform_constraint",
    "two_point_grad",
    "zga",
]
