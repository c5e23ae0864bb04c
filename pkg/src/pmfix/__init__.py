"""Partial metric spaces, gauge-contractive self-maps and certified fixed points."""

from __future__ import annotations

from .contraction import (
    Affine,
    ContractionReport,
    Halving,
    Sampler,
    SelfMap,
    TableMap,
    comparison_identities,
    expr_map,
    fixed_point_identities,
    is_d_fixed,
    m_quantities,
    verify_contractive,
)
from .dynamics import (
    Certificate,
    OrbitTrace,
    diagnose_d_convergence,
    diagnose_e_cauchy,
    diagnose_e_convergence,
    diagnose_semi_cauchy,
    enumerate_fixed_structure,
    extract_violation_ranks,
    iterate,
    solve_theorem1,
    solve_theorem2,
)
from .errors import (
    BudgetExhausted,
    ConclusionViolated,
    ConfigError,
    EmptyPrefix,
    ExpressionDomainError,
    ExpressionSyntaxError,
    HypothesisFailed,
    HypothesisUnverified,
    InvalidMap,
    InvalidSpace,
    MalformedInput,
    MalformedTable,
    NegativeArgument,
    NonPositivePoint,
    NonPositiveRadius,
    NotDFixed,
    PmfixError,
    SamplerExhausted,
    UniquenessViolated,
    UnknownPoint,
)
from .expr import Expression, parse_expression
from .gauges import (
    Gauge,
    GridSpec,
    classify,
    compose_bound_check,
    expsat,
    limsup_right,
    limsup_seq,
    limsup_sym,
    liminf_seq,
    linear,
    parse_gauge,
    psi_inf_profile,
    rational,
)
from .search import SearchReport, TrialSpec, run_campaign, run_trial
from .spaces import (
    ContinuousSpace,
    FiniteSpace,
    Intervals,
    MaxOnRPlus,
    PartialMetricSpace,
    WeightedMetric,
    check_axioms,
    check_e_is_metric,
    derive,
    generate_random_space,
    sphere_contains,
)

__version__ = "0.1.0"
