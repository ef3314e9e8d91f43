"""Real series: positive/negative parts, classification and divergent rearrangement."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Convergence, Generator, NumericConfig, is_catalog
from .errors import BudgetError, DomainError, PreconditionError, SeriesLabError, UnsupportedError

PROBE_CAP = 10**6


@dataclass(frozen=True)
class PartsPair:
    p: float
    q: float


def split_parts(x: float) -> PartsPair:
    """Positive and negative parts, ``p = (|x|+x)/2`` and ``q = (|x|-x)/2``."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"cannot split a non-finite value {x!r}")
    # case split equals the halving formula exactly and cannot overflow
    return PartsPair(x if x > 0 else 0.0, -x if x < 0 else 0.0)


def parts_profile(gen: Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Partial sums of the positive parts and of the negative parts of ``gen``."""
    t = np.asarray(gen.terms(count), dtype=float)
    a = np.abs(t)
    return np.cumsum((a + t) / 2), np.cumsum((a - t) / 2)


def classify(gen: Generator, cfg: NumericConfig | None = None) -> Convergence:
    """Return the declared convergence class of a catalog generator.

    Convergence cannot be decided from finitely many terms, so this only
    trusts catalog metadata.  A probe over the first ``term_budget`` terms
    checks that metadata is not contradicted: the absolute partial sums must
    be monotone and, for absolutely convergent series, the absolute terms
    must be non-increasing past the first few.
    """
    cfg = cfg or NumericConfig()
    if not is_catalog(gen):
        raise UnsupportedError(
            f"cannot classify non-catalog generator '{gen.name}': "
            "convergence is not decidable from finitely many terms"
        )
    if not gen.real:
        raise UnsupportedError("classify expects a real-valued generator")
    count = min(cfg.term_budget, PROBE_CAP)
    mags = np.abs(np.asarray(gen.terms(count), dtype=float))
    masses = np.cumsum(mags)
    if np.any(np.diff(masses) < 0):
        raise SeriesLabError(f"probe failed for '{gen.name}': absolute partial sums not monotone")
    if gen.convergence is Convergence.ABSOLUTE and np.any(np.diff(mags[2:]) > 0):
        raise SeriesLabError(f"probe failed for '{gen.name}': increments are not decreasing")
    return gen.convergence


@dataclass(frozen=True, eq=False)
class RearrangementPrefix:
    indices: np.ndarray
    partial_sums: np.ndarray
    crossings_achieved: int
    # prefix lengths at which a block (upward or downward) completed
    block_ends: tuple[int, ...] = ()

    def __len__(self):
        return len(self.indices)


def divergent_rearrangement(
    gen: Generator, target_crossings: int, budget: int | None = None
) -> RearrangementPrefix:
    """Greedy rearrangement that oscillates between above 1 and below 0.

    Unused non-negative terms are taken in index order until the running sum
    is strictly above 1, then unused negative terms until it is strictly
    below 0, and so on.  One (above 1, below 0) pair is a crossing.

    ``budget`` bounds the generator indices that may be inspected, so the
    prefix never uses more than ``budget`` terms.  If it runs out before the
    first crossing a ``BudgetError`` carries the partial prefix; after that
    the prefix is returned with fewer crossings than requested.
    """
    if target_crossings < 1:
        raise DomainError("target_crossings must be >= 1")
    if gen.convergence is not Convergence.CONDITIONAL:
        raise PreconditionError(
            f"'{gen.name}' is {gen.convergence}, a divergent rearrangement needs "
            "a conditionally convergent series"
        )
    budget = PROBE_CAP if budget is None else int(budget)
    if budget < 1:
        raise DomainError("budget must be >= 1")
    terms = np.asarray(gen.terms(budget), dtype=float)
    nonneg = np.flatnonzero(terms >= 0)
    neg = np.flatnonzero(terms < 0)
    if len(neg) == 0 or len(nonneg) == 0:
        raise PreconditionError(
            f"'{gen.name}' has no {'negative' if len(neg) == 0 else 'non-negative'} "
            f"terms among the first {budget}; it cannot be conditionally convergent"
        )
    tl = terms.tolist()
    pos_list, neg_list = nonneg.tolist(), neg.tolist()

    indices: list[int] = []
    sums: list[float] = []
    ends: list[int] = []
    s = 0.0
    i = j = 0
    crossings = 0
    rising = True
    while crossings < target_crossings:
        if rising:
            if i == len(pos_list):
                break
            k = pos_list[i]
            i += 1
        else:
            if j == len(neg_list):
                break
            k = neg_list[j]
            j += 1
        s += tl[k]
        indices.append(k)
        sums.append(s)
        if rising and s > 1:
            rising = False
            ends.append(len(indices))
        elif not rising and s < 0:
            rising = True
            crossings += 1
            ends.append(len(indices))

    prefix = RearrangementPrefix(
        indices=np.asarray(indices, dtype=np.int64),
        partial_sums=np.asarray(sums),
        crossings_achieved=crossings,
        block_ends=tuple(ends),
    )
    if crossings == 0:
        raise BudgetError(
            f"budget of {budget} indices exhausted before the first crossing", partial=prefix
        )
    return prefix
