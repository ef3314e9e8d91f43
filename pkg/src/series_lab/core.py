"""Scalars, numeric configuration and the catalog of coefficient generators.

The scalar everywhere is Python's built-in ``complex`` (an IEEE double pair).
Non-finite values are refused at every public entry point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from .errors import CatalogLookupError, ConfigError, DomainError

DEFAULT_TOL = 1e-10
DEFAULT_TERM_BUDGET = 10**6
DEFAULT_TRUNC_ORDER = 64


@dataclass(frozen=True)
class NumericConfig:
    tol: float = DEFAULT_TOL
    term_budget: int = DEFAULT_TERM_BUDGET
    trunc_order: int = DEFAULT_TRUNC_ORDER

    def __post_init__(self):
        if not (isinstance(self.tol, (int, float)) and math.isfinite(self.tol) and self.tol > 0):
            raise ConfigError(f"tol must be a positive finite real, got {self.tol!r}")
        for name in ("term_budget", "trunc_order"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")

    def replace(self, **changes) -> "NumericConfig":
        values = {"tol": self.tol, "term_budget": self.term_budget, "trunc_order": self.trunc_order}
        values.update({k: v for k, v in changes.items() if v is not None})
        return NumericConfig(**values)


# -- scalars -----------------------------------------------------------------

def as_complex(x, what: str = "value") -> complex:
    """Coerce ``x`` to ``complex``, rejecting NaN and infinities."""
    try:
        z = complex(x)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{what} is not a number: {x!r}") from exc
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"{what} must be finite, got {z!r}")
    return z


def add(a, b) -> complex:
    return as_complex(a) + as_complex(b)


def sub(a, b) -> complex:
    return as_complex(a) - as_complex(b)


def mul(a, b) -> complex:
    return as_complex(a) * as_complex(b)


def div(a, b) -> complex:
    b = as_complex(b, "divisor")
    if b == 0:
        raise DomainError("division by zero")
    return as_complex(a) / b


def conj(a) -> complex:
    return as_complex(a).conjugate()


def cabs(a) -> float:
    z = as_complex(a)
    return math.hypot(z.real, z.imag)


def powi(a, k: int) -> complex:
    """Integer power by repeated squaring; negative ``k`` needs ``a != 0``."""
    z = as_complex(a)
    if k < 0:
        return div(1, powi(z, -k))
    result = 1 + 0j
    while k:
        if k & 1:
            result *= z
        z *= z
        k >>= 1
    return result


def finite_array(values, what: str = "coefficients") -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} must all be finite")
    return arr


# -- generators ----------------------------------------------------------------

class Convergence(str, enum.Enum):
    ABSOLUTE = "absolutely_convergent"
    CONDITIONAL = "conditionally_convergent"
    DIVERGENT = "divergent"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class Generator:
    """A named coefficient/term rule with declared convergence metadata.

    ``convergence`` classifies the numeric series ``sum term(n)``;
    ``radius`` is the radius of convergence of ``sum term(n) z**n``.
    """

    name: str
    params: Mapping[str, float]
    rule: Callable[[int], float]
    block: Callable[[int], np.ndarray]
    convergence: Convergence
    radius: float
    real: bool = True
    catalog: bool = field(default=False, repr=False)

    def term(self, n: int):
        if n < 0:
            raise DomainError(f"term index must be >= 0, got {n}")
        return self.rule(int(n))

    def terms(self, count: int) -> np.ndarray:
        """The first ``count`` terms as an array (vectorised where possible)."""
        if count <= 0:
            return np.zeros(0)
        return self.block(int(count))

    @property
    def meta(self):
        return {"convergence": self.convergence, "radius": self.radius}

    def spec(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}

    def __eq__(self, other):
        if not isinstance(other, Generator):
            return NotImplemented
        return self.name == other.name and dict(self.params) == dict(other.params)

    def __hash__(self):
        return hash((self.name, tuple(sorted(self.params.items()))))


def _real_param(params, key, default=None):
    if key not in params:
        if default is None:
            raise DomainError(f"missing parameter '{key}'")
        return default
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
        raise DomainError(f"parameter '{key}' must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"parameter '{key}' must be finite")
    return value


def _geometric(params):
    r = _real_param(params, "r")

    def rule(n):
        return r**n

    def block(count):
        out = np.empty(count)
        out[0] = 1.0
        if count > 1:
            out[1:] = r
            np.cumprod(out, out=out)
        return out

    conv = Convergence.ABSOLUTE if abs(r) < 1 else Convergence.DIVERGENT
    radius = math.inf if r == 0 else 1 / abs(r)
    return {"r": r}, rule, block, conv, radius


def _exponential(params):
    def rule(n):
        # 1/n! is below the smallest subnormal past n = 177
        return 0.0 if n > 200 else 1 / math.factorial(n)

    def block(count):
        out = np.empty(count)
        out[0] = 1.0
        if count > 1:
            out[1:] = 1.0 / np.arange(1, count)
            np.cumprod(out, out=out)
        return out

    return {}, rule, block, Convergence.ABSOLUTE, math.inf


def _alternating_harmonic(params):
    def rule(n):
        return (-1.0) ** n / (n + 1)

    def block(count):
        n = np.arange(count)
        return np.where(n % 2 == 0, 1.0, -1.0) / (n + 1)

    return {}, rule, block, Convergence.CONDITIONAL, 1.0


def _harmonic(params):
    def rule(n):
        return 1 / (n + 1)

    def block(count):
        return 1.0 / np.arange(1, count + 1)

    return {}, rule, block, Convergence.DIVERGENT, 1.0


def _p_series(params):
    s = _real_param(params, "s")

    def rule(n):
        return (n + 1) ** -s

    def block(count):
        return np.arange(1, count + 1, dtype=float) ** -s

    conv = Convergence.ABSOLUTE if s > 1 else Convergence.DIVERGENT
    return {"s": s}, rule, block, conv, 1.0


def binomial_coefficients(alpha: float, count: int) -> np.ndarray:
    """Generalised binomial coefficients C(alpha, n), n < count, by running product."""
    out = np.empty(count)
    c = 1.0
    for n in range(count):
        out[n] = c
        c = c * (alpha - n) / (n + 1)
    return out


def _binomial(params):
    p = params.get("p")
    if isinstance(p, float) and p.is_integer():
        p = int(p)
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)):
        raise DomainError(f"binomial needs a positive integer 'p', got {p!r}")
    if p < 1:
        raise DomainError(f"binomial needs p >= 1, got {p}")
    alpha = 1.0 / p

    def rule(n):
        c = 1.0
        for k in range(n):
            c = c * (alpha - k) / (k + 1)
        return c

    def block(count):
        return binomial_coefficients(alpha, count)

    radius = math.inf if p == 1 else 1.0
    return {"p": int(p)}, rule, block, Convergence.ABSOLUTE, radius


_CATALOG = {
    "geometric": _geometric,
    "exponential": _exponential,
    "alternating_harmonic": _alternating_harmonic,
    "harmonic": _harmonic,
    "p_series": _p_series,
    "binomial": _binomial,
}

CATALOG_NAMES = tuple(_CATALOG)


def catalog_lookup(name: str, params: Mapping[str, float] | None = None, **kwargs) -> Generator:
    """Build a catalog generator, e.g. ``catalog_lookup("geometric", r=0.5)``."""
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise CatalogLookupError(
            f"unknown generator '{name}'; known: {', '.join(CATALOG_NAMES)}"
        ) from None
    merged = dict(params or {})
    merged.update(kwargs)
    norm, rule, block, conv, radius = factory(merged)
    extra = set(merged) - set(norm)
    if extra:
        raise DomainError(f"unexpected parameters for '{name}': {sorted(extra)}")
    return Generator(
        name=name,
        params=MappingProxyType(norm),
        rule=rule,
        block=block,
        convergence=conv,
        radius=radius,
        catalog=True,
    )


def is_catalog(gen: Generator) -> bool:
    return gen.catalog and gen.name in _CATALOG
