"""Complex power series and unordered countable sums."""

from .core import CATALOG_NAMES, Convergence, Generator, NumericConfig, catalog_lookup
from .errors import (
    BudgetError,
    CatalogLookupError,
    ConfigError,
    ContinuationBlocked,
    DomainError,
    IdenticallyZeroError,
    NotAZeroError,
    NotNormalizedError,
    ParseError,
    PreconditionError,
    SeriesLabError,
    SingularError,
    UnsupportedError,
    ValidationError,
)
from .power_series import (
    ContinuationChain,
    Distinction,
    PowerSeries,
    RadiusEstimate,
    ZeroFactorization,
    add,
    binomial_series,
    compose,
    continue_along_segment,
    derivative_at,
    differentiate,
    distinguish,
    evaluate,
    integrate,
    multiply,
    order_of_zero,
    power,
    radius,
    recenter,
    reciprocal,
    reciprocal_by_composition,
    revert,
    scale,
)
from .real_series import PartsPair, RearrangementPrefix, classify, divergent_rearrangement, split_parts
from .unordered_sums import (
    Family,
    IndexKind,
    Partition,
    SumResult,
    Verdict,
    cauchy_coefficients,
    combine,
    double_sum,
    regrouped_sum,
    sup_finite_subsets,
    unordered_sum,
)

__version__ = "0.1.0"
