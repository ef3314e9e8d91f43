"""Families of complex numbers and their unordered sums.

A ``Family`` couples a term rule with an enumeration of its index set.
Summation walks the enumeration and stops once ``STOP_RUN`` consecutive
absolute increments each fall below ``tol / STOP_RUN``.  Pair enumerations
come in groups (diagonals, square shells) and there an increment is the
mass of one whole group.  That is a
numerical verdict, not a proof of summability; a family that never settles
is reported as ``budget_exhausted``.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from itertools import count, islice
from typing import Callable, Hashable, Iterable, Iterator, Sequence

import numpy as np

from .core import Generator, NumericConfig, as_complex
from .errors import DomainError

STOP_RUN = 32
DEFAULT_PERM_WINDOW = 10_000


class IndexKind(str, enum.Enum):
    NATURALS = "naturals"
    PAIRS = "pairs"
    FINITE = "finite"


class Verdict(str, enum.Enum):
    CONVERGED = "converged"
    BUDGET_EXHAUSTED = "budget_exhausted"

    def __str__(self):
        return self.value


# -- enumerations ------------------------------------------------------------

def diagonal_pairs() -> Iterator[tuple[int, int]]:
    """Cantor order: (0,0), (0,1), (1,0), (0,2), (1,1), (2,0), ..."""
    for d in count():
        for n in range(d + 1):
            yield n, d - n


def shell_pairs(row_major: bool = True) -> Iterator[tuple[int, int]]:
    """Square shells max(n, m) = s in lexicographic order within each shell.

    Plain row-major order never leaves row 0 of an infinite grid, so the
    row/column orders walk growing squares instead.
    """
    for s in count():
        for a in range(s):
            yield (a, s) if row_major else (s, a)
        for b in range(s + 1):
            yield (s, b) if row_major else (b, s)


@dataclass(frozen=True)
class Enumeration:
    """A replayable enumeration of an index set.

    ``warmup`` is the number of leading positions during which the stopping
    rule stays disarmed (a shuffled head can hide large terms behind small ones).
    ``group`` maps an index to the group it belongs to; the stopping rule
    then looks at whole-group increments.  Without it every term counts.
    """

    name: str
    factory: Callable[[], Iterable] = field(compare=False)
    warmup: int = 0
    seed: int | None = None
    group: Callable[[Hashable], Hashable] | None = field(default=None, compare=False)

    def __iter__(self):
        return iter(self.factory())


NATURAL_ORDER = Enumeration("natural", lambda: count())


def _diagonal_of(j):
    return j[0] + j[1]


def _shell_of(j):
    return max(j)


DIAGONAL = Enumeration("diagonal", diagonal_pairs, group=_diagonal_of)
ROW_MAJOR = Enumeration("row_major", lambda: shell_pairs(True), group=_shell_of)
COL_MAJOR = Enumeration("col_major", lambda: shell_pairs(False), group=_shell_of)


def finite_order(size: int) -> Enumeration:
    return Enumeration(f"finite[{size}]", lambda: range(size))


def random_permutation(base: Enumeration, seed: int, window: int = DEFAULT_PERM_WINDOW) -> Enumeration:
    """Shuffle the first ``window`` positions of ``base``; keep the rest in order."""

    def factory():
        it = iter(base)
        head = list(islice(it, window))
        random.Random(seed).shuffle(head)
        yield from head
        yield from it

    return Enumeration(
        f"random_perm({seed})[{base.name}]", factory, warmup=window, seed=seed, group=base.group
    )


# -- families ----------------------------------------------------------------

@dataclass(frozen=True)
class Family:
    index_kind: IndexKind
    term: Callable[[Hashable], complex] = field(compare=False)
    order: Enumeration = NATURAL_ORDER
    size: int | None = None  # None for infinite index sets

    @classmethod
    def from_function(cls, fn: Callable[[int], complex]) -> "Family":
        return cls(IndexKind.NATURALS, fn, NATURAL_ORDER)

    @classmethod
    def from_generator(cls, gen: Generator) -> "Family":
        return cls(IndexKind.NATURALS, gen.term, NATURAL_ORDER)

    @classmethod
    def from_pairs(cls, fn: Callable[[int, int], complex], order: Enumeration = DIAGONAL) -> "Family":
        return cls(IndexKind.PAIRS, lambda j: fn(*j), order)

    @classmethod
    def product(cls, a: Generator, b: Generator, order: Enumeration = DIAGONAL) -> "Family":
        """Pair family ``(n, m) -> a(n) * b(m)``."""
        return cls.from_pairs(lambda n, m: a.term(n) * b.term(m), order)

    @classmethod
    def finite(cls, values: Sequence) -> "Family":
        vals = [as_complex(v, "family term") for v in values]
        return cls(IndexKind.FINITE, vals.__getitem__, finite_order(len(vals)), size=len(vals))

    def with_order(self, order: Enumeration) -> "Family":
        return Family(self.index_kind, self.term, order, self.size)

    def indices(self) -> Iterator:
        return iter(self.order)


@dataclass(frozen=True)
class SumResult:
    value: complex
    abs_mass: float
    terms_used: int
    verdict: Verdict
    seed: int | None = None
    blocks: tuple["SumResult", ...] = ()

    @property
    def converged(self) -> bool:
        return self.verdict is Verdict.CONVERGED


def _accumulate(
    values: Iterable[tuple[complex, float, Hashable]],
    cfg: NumericConfig,
    warmup: int,
    finite: bool,
) -> tuple[complex, float, int, Verdict]:
    """Sum ``(value, magnitude, group)`` triples under the stopping rule and budget.

    A group of ``None`` makes every term its own increment.
    """
    threshold = cfg.tol / STOP_RUN
    total = 0j
    mass = 0.0
    run = 0
    used = 0
    current = None
    group_mass = 0.0
    for z, mag, key in values:
        if used >= cfg.term_budget:
            return total, mass, used, Verdict.BUDGET_EXHAUSTED
        if key is not None and key != current:
            # the previous group is complete; it counts once past the warmup
            if current is not None and used > warmup:
                run = run + 1 if group_mass < threshold else 0
                if run >= STOP_RUN:
                    return total, mass, used, Verdict.CONVERGED
            current, group_mass = key, 0.0
        total += z
        mass += mag
        used += 1
        if key is None:
            if used > warmup:
                run = run + 1 if mag < threshold else 0
                if run >= STOP_RUN:
                    return total, mass, used, Verdict.CONVERGED
        else:
            group_mass += mag
    # the enumeration ran dry: complete for finite sets, truncated otherwise
    return total, mass, used, Verdict.CONVERGED if finite else Verdict.BUDGET_EXHAUSTED


def _terms(fam: Family) -> Iterator[tuple[complex, float, Hashable]]:
    term = fam.term
    group = fam.order.group
    for j in fam.indices():
        z = as_complex(term(j), "family term")
        yield z, abs(z), None if group is None else group(j)


def unordered_sum(fam: Family, cfg: NumericConfig | None = None) -> SumResult:
    """Sum ``fam`` along its enumeration, tracking the absolute mass."""
    cfg = cfg or NumericConfig()
    value, mass, used, verdict = _accumulate(
        _terms(fam), cfg, fam.order.warmup, fam.size is not None
    )
    return SumResult(value, mass, used, verdict, seed=fam.order.seed)


def sup_finite_subsets(
    fam: Family, samples: int, max_subset: int, seed: int = 0
) -> float:
    """Largest finite-subset sum seen for a family of non-negative reals.

    Tries every prefix of length <= ``max_subset`` plus ``samples`` random
    subsets of size <= ``max_subset`` drawn from the first ``2 * max_subset``
    enumerated indices.  This is a lower bound for the supremum.
    """
    if max_subset < 1:
        raise DomainError("max_subset must be >= 1")
    pool_size = 2 * max_subset if fam.size is None else min(fam.size, 2 * max_subset)
    pool = np.empty(pool_size)
    for k, j in enumerate(islice(fam.indices(), pool_size)):
        z = as_complex(fam.term(j), "family term")
        if z.imag != 0 or z.real < 0:
            raise DomainError(f"family term at index {j!r} is not a non-negative real: {z!r}")
        pool[k] = z.real
    if pool_size == 0:
        return 0.0
    best = float(np.max(np.cumsum(pool[:max_subset])))
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        size = int(rng.integers(1, min(max_subset, pool_size) + 1))
        picks = rng.choice(pool_size, size=size, replace=False)
        best = max(best, math.fsum(pool[picks]))
    return best


def combine(a: Family, b: Family, lam=1, cfg: NumericConfig | None = None) -> SumResult:
    """Unordered sum of the termwise family ``a_j + lam * b_j``."""
    lam = as_complex(lam, "lambda")
    if a.index_kind != b.index_kind or a.order != b.order or a.size != b.size:
        raise DomainError(
            f"cannot combine families over {a.index_kind.value}/{a.order.name} "
            f"and {b.index_kind.value}/{b.order.name}"
        )
    ta, tb = a.term, b.term
    fam = Family(a.index_kind, lambda j: ta(j) + lam * tb(j), a.order, a.size)
    return unordered_sum(fam, cfg)


# -- partitions --------------------------------------------------------------

def _mix64(x: int) -> int:
    # splitmix64 finaliser
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


def _index_key(j) -> int:
    if isinstance(j, tuple):
        n, m = j
        return (n + m) * (n + m + 1) // 2 + m
    return int(j)


@dataclass(frozen=True)
class Partition:
    """Disjoint, exhaustive blocks of an index set.

    ``label_of`` names the block of each index.  ``labels`` replays the block
    labels in order (possibly infinitely many).  ``block_order`` optionally
    gives a block's own enumeration; otherwise a block inherits the parent
    family's order restricted to its indices.
    """

    label_of: Callable[[Hashable], Hashable] = field(compare=False)
    labels: Callable[[], Iterable[Hashable]] = field(compare=False)
    finite: bool = True
    block_order: Callable[[Hashable], Enumeration] | None = field(default=None, compare=False)
    name: str = "partition"
    seed: int | None = None

    @classmethod
    def single(cls) -> "Partition":
        return cls(lambda j: 0, lambda: [0], name="single")

    @classmethod
    def by_residue(cls, modulus: int) -> "Partition":
        """Blocks ``{j : key(j) % modulus == l}``; evens/odds for ``modulus = 2``."""
        if modulus < 1:
            raise DomainError("modulus must be >= 1")
        return cls(lambda j: _index_key(j) % modulus, lambda: range(modulus), name=f"mod{modulus}")

    @classmethod
    def random(cls, blocks: int, seed: int) -> "Partition":
        """Each index lands in one of ``blocks`` labels by a seeded hash."""
        if blocks < 1:
            raise DomainError("blocks must be >= 1")
        salt = _mix64(seed & 0xFFFFFFFFFFFFFFFF)
        return cls(
            lambda j: _mix64(_index_key(j) ^ salt) % blocks,
            lambda: range(blocks),
            name=f"random{blocks}",
            seed=seed,
        )

    @classmethod
    def rows(cls) -> "Partition":
        """Rows ``{(n, m) : m >= 0}`` of a pair family, each walked in column order."""
        return cls(
            lambda j: j[0],
            lambda: count(),
            finite=False,
            block_order=lambda n: Enumeration(f"row{n}", lambda: ((n, m) for m in count())),
            name="rows",
        )

    def block(self, fam: Family, label) -> Family:
        if self.block_order is not None:
            return Family(fam.index_kind, fam.term, self.block_order(label), None)
        label_of = self.label_of
        parent = fam.order

        def factory():
            return (j for j in parent if label_of(j) == label)

        sub = Enumeration(f"{parent.name}|{self.name}={label}", factory, group=parent.group)
        if fam.size is not None:
            members = sum(1 for j in parent if label_of(j) == label)
            return Family(fam.index_kind, fam.term, sub, members)
        return Family(fam.index_kind, fam.term, sub, None)


def regrouped_sum(fam: Family, part: Partition, cfg: NumericConfig | None = None) -> SumResult:
    """Sum each block, then sum the block values in label order."""
    cfg = cfg or NumericConfig()
    blocks: list[SumResult] = []
    exhausted = False

    def block_values():
        nonlocal exhausted
        for label in part.labels():
            sub = part.block(fam, label)
            if sub.size is None and part.block_order is None:
                sub = _bounded(sub, cfg.term_budget)
            r = unordered_sum(sub, cfg)
            blocks.append(r)
            if not r.converged:
                exhausted = True
            yield r.value, r.abs_mass, None

    value, mass, _, verdict = _accumulate(block_values(), cfg, 0, part.finite)
    if exhausted:
        verdict = Verdict.BUDGET_EXHAUSTED
    used = sum(b.terms_used for b in blocks)
    return SumResult(value, mass, used, verdict, seed=part.seed, blocks=tuple(blocks))


def _bounded(sub: Family, limit: int) -> Family:
    """Cap how far a filtered block may scan its parent enumeration."""
    inner = sub.order
    order = Enumeration(
        inner.name, lambda: islice(iter(inner.factory()), limit), inner.warmup, group=inner.group
    )
    # scanning `limit` parent positions is the block's whole world
    return Family(sub.index_kind, sub.term, order, None)


# -- double sequences and Cauchy products -------------------------------------

PAIR_ORDERS = ("row_major", "col_major", "diagonal", "random_perm")


def pair_order(order: str, seed: int | None = None, window: int = DEFAULT_PERM_WINDOW) -> Enumeration:
    if order == "row_major":
        return ROW_MAJOR
    if order == "col_major":
        return COL_MAJOR
    if order == "diagonal":
        return DIAGONAL
    if order == "random_perm":
        if seed is None:
            raise DomainError("random_perm needs a seed")
        return random_permutation(DIAGONAL, seed, window)
    raise DomainError(f"unknown pair order '{order}'; expected one of {', '.join(PAIR_ORDERS)}")


def double_sum(
    fam: Family, order: str = "diagonal", cfg: NumericConfig | None = None, seed: int | None = None
) -> SumResult:
    if fam.index_kind is not IndexKind.PAIRS:
        raise DomainError("double_sum needs a family indexed by pairs")
    return unordered_sum(fam.with_order(pair_order(order, seed)), cfg)


def cauchy_coefficients(a: Generator, b: Generator, P: int) -> np.ndarray:
    """``c_p = sum_{n+m=p} a(n) b(m)`` for ``p = 0..P``."""
    if P < 0:
        raise DomainError("P must be >= 0")
    ta = np.asarray(a.terms(P + 1), dtype=np.complex128)
    tb = np.asarray(b.terms(P + 1), dtype=np.complex128)
    return np.convolve(ta, tb)[: P + 1]
