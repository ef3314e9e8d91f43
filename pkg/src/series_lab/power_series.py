"""Truncated complex power series.

A ``PowerSeries`` holds the coefficients ``a_0..a_N`` of
``sum a_n (z - center)**n``.  Every operation returns a new series truncated
at the smaller input order; nothing is lazily extended.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .core import DEFAULT_TOL, DEFAULT_TRUNC_ORDER, Generator, as_complex, catalog_lookup, finite_array
from .errors import (
    ConfigError,
    ContinuationBlocked,
    DomainError,
    IdenticallyZeroError,
    NotAZeroError,
    NotNormalizedError,
    SingularError,
)

MAX_RECENTER_ORDER = 1029
MIN_TRAILING_NONZERO = 8
# log-log slope of |a_n|^(1/n) below which the root test is read as "entire"
ENTIRE_SLOPE = -0.5


@dataclass(frozen=True, eq=False)
class PowerSeries:
    coeffs: np.ndarray
    center: complex = 0j
    source: Generator | None = None
    # radius of the disk (about `center`) on which the expansion is known to be valid
    disk_radius: float | None = field(default=None, compare=False)

    def __post_init__(self):
        arr = finite_array(self.coeffs).ravel().copy()
        if arr.size == 0:
            raise DomainError("a power series needs at least one coefficient")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "center", as_complex(self.center, "center"))

    # construction -----------------------------------------------------------

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, center=0j) -> "PowerSeries":
        return cls(np.asarray(coeffs, dtype=np.complex128), center)

    @classmethod
    def from_generator(cls, gen: Generator, order: int = DEFAULT_TRUNC_ORDER, center=0j) -> "PowerSeries":
        return cls(np.asarray(gen.terms(order + 1), dtype=np.complex128), center, source=gen)

    @classmethod
    def zero(cls, order: int = DEFAULT_TRUNC_ORDER, center=0j) -> "PowerSeries":
        return cls(np.zeros(order + 1, dtype=np.complex128), center)

    @classmethod
    def one(cls, order: int = DEFAULT_TRUNC_ORDER, center=0j) -> "PowerSeries":
        return cls.monomial(0, order, center)

    @classmethod
    def identity(cls, order: int = DEFAULT_TRUNC_ORDER, center=0j) -> "PowerSeries":
        """The series of ``z`` itself about ``center``: ``center + (z - center)``."""
        c = np.zeros(order + 1, dtype=np.complex128)
        c[0] = center
        if order >= 1:
            c[1] = 1
        return cls(c, center)

    @classmethod
    def monomial(cls, k: int, order: int = DEFAULT_TRUNC_ORDER, center=0j, coeff=1) -> "PowerSeries":
        c = np.zeros(order + 1, dtype=np.complex128)
        if k <= order:
            c[k] = coeff
        return cls(c, center)

    # conveniences -------------------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, n):
        return self.coeffs[n]

    def __call__(self, z) -> complex:
        return evaluate(self, z)[0]

    def __add__(self, other):
        if isinstance(other, PowerSeries):
            return add(self, other)
        c = self.coeffs.copy()
        c[0] += as_complex(other)
        return PowerSeries(c, self.center)

    __radd__ = __add__

    def __neg__(self):
        return scale(-1, self)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            return multiply(self, other)
        return scale(other, self)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PowerSeries):
            return multiply(self, reciprocal(other))
        other = as_complex(other)
        if other == 0:
            raise DomainError("division by zero")
        return scale(1 / other, self)

    def __pow__(self, p: int):
        return power(self, p)

    def truncate(self, order: int) -> "PowerSeries":
        return PowerSeries(self.coeffs[: order + 1], self.center, self.source, self.disk_radius)

    def allclose(self, other: "PowerSeries", atol: float) -> bool:
        m = min(self.order, other.order) + 1
        return self.center == other.center and bool(
            np.all(np.abs(self.coeffs[:m] - other.coeffs[:m]) <= atol)
        )

    def __repr__(self):
        head = ", ".join(f"{c:.6g}" for c in self.coeffs[:6])
        more = ", ..." if self.order >= 6 else ""
        return f"PowerSeries(center={self.center!r}, order={self.order}, coeffs=[{head}{more}])"


def _same_center(f: PowerSeries, g: PowerSeries, what: str):
    if f.center != g.center:
        raise DomainError(
            f"{what}: centers differ ({f.center!r} vs {g.center!r}); recenter first"
        )


# -- evaluation and radius ------------------------------------------------------

def evaluate(f: PowerSeries, z) -> tuple[complex, float]:
    """Horner evaluation plus a crude tail proxy ``|a_N| |z - c|^N N``.

    The proxy is a heuristic, not a certified bound.
    """
    w = as_complex(z, "z") - f.center
    value = 0j
    for c in f.coeffs[::-1].tolist():
        value = value * w + c
    N = f.order
    tail = abs(f.coeffs[-1]) * abs(w) ** N * N if N else 0.0
    return value, float(tail)


@dataclass(frozen=True)
class RadiusEstimate:
    rho: float  # math.inf for "entire as far as the coefficients can tell"
    window: tuple[float, float]
    method: str = "root_test"

    @property
    def infinite(self) -> bool:
        return math.isinf(self.rho)


def radius(f: PowerSeries, tol: float = DEFAULT_TOL) -> RadiusEstimate:
    """Root-test estimate of the radius of convergence.

    ``rho = 1 / max |a_n|^(1/n)`` over the last quartile of indices; the window
    spans the same quantity over the last half.  The estimate is reported as
    infinite when every root in the window is below ``tol`` or when the roots
    fall off like a power of ``n`` (log-log slope below ``ENTIRE_SLOPE``), as
    they do for entire functions.
    """
    N = f.order
    mags = np.abs(f.coeffs)
    if N < 1 or not np.any(mags[1:]):
        return RadiusEstimate(math.inf, (math.inf, math.inf))
    n = np.arange(N + 1)
    with np.errstate(divide="ignore"):
        roots = np.where(mags > 0, np.exp(np.log(np.where(mags > 0, mags, 1.0)) / np.maximum(n, 1)), 0.0)
    half = n >= max(1, math.ceil(N / 2))
    quarter = n >= max(1, math.ceil(3 * N / 4))
    top_half = roots[half].max()
    if top_half < tol:
        return RadiusEstimate(math.inf, (float(1 / top_half) if top_half > 0 else math.inf, math.inf))
    live = half & (roots > 0)
    lo = 1 / top_half
    if live.sum() >= 3:
        slope = np.polyfit(np.log(n[live]), np.log(roots[live]), 1)[0]
        if slope < ENTIRE_SLOPE:
            return RadiusEstimate(math.inf, (float(lo), math.inf))
    top_quarter = roots[quarter].max()
    rho = 1 / top_quarter if top_quarter > 0 else lo
    hi = 1 / roots[live].min()
    if live.sum() < MIN_TRAILING_NONZERO:
        lo, hi = lo / 2, hi * 2
    return RadiusEstimate(float(rho), (float(min(lo, rho)), float(max(hi, rho))))


# -- algebra ------------------------------------------------------------------------

def add(f: PowerSeries, g: PowerSeries) -> PowerSeries:
    _same_center(f, g, "add")
    m = min(f.order, g.order) + 1
    return PowerSeries(f.coeffs[:m] + g.coeffs[:m], f.center)


def scale(lam, f: PowerSeries) -> PowerSeries:
    return PowerSeries(as_complex(lam, "scale factor") * f.coeffs, f.center)


def _conv(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    return np.convolve(a[:m], b[:m])[:m]


def multiply(f: PowerSeries, g: PowerSeries) -> PowerSeries:
    """Cauchy product ``c_n = sum_{j+k=n} a_j b_k``."""
    _same_center(f, g, "multiply")
    m = min(f.order, g.order) + 1
    return PowerSeries(_conv(f.coeffs, g.coeffs, m), f.center)


def power(f: PowerSeries, p: int) -> PowerSeries:
    """``f**p`` by binary exponentiation; ``p = 0`` gives the one-series."""
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)) or p < 0:
        raise DomainError(f"power needs a natural exponent, got {p!r}")
    m = f.order + 1
    result = np.zeros(m, dtype=np.complex128)
    result[0] = 1
    base = f.coeffs
    while p:
        if p & 1:
            result = _conv(result, base, m)
        p >>= 1
        if p:
            base = _conv(base, base, m)
    return PowerSeries(result, f.center)


def differentiate(f: PowerSeries) -> PowerSeries:
    if f.order == 0:
        return PowerSeries.zero(0, f.center)
    n = np.arange(1, f.order + 1)
    return PowerSeries(n * f.coeffs[1:], f.center)


def integrate(f: PowerSeries) -> PowerSeries:
    """Antiderivative vanishing at the center (order grows by one)."""
    c = np.zeros(f.order + 2, dtype=np.complex128)
    c[1:] = f.coeffs / np.arange(1, f.order + 2)
    return PowerSeries(c, f.center)


# -- recentering ----------------------------------------------------------------------

def _dyadic(x: float) -> tuple[int, int]:
    """``x == m / 2**k`` with integer ``m`` and ``k >= 0``."""
    num, den = float(x).as_integer_ratio()
    return num, den.bit_length() - 1


def shift_coefficients(a: np.ndarray, d: complex) -> np.ndarray:
    """Coefficients of ``sum a_n (d + w)^n`` in powers of ``w``.

    Equal to ``b_p = sum_{n>=p} a_n C(n, p) d^(n-p)``.  Every double is a
    dyadic rational, so the shift runs exactly over Python integers (Taylor
    shift by repeated synthetic division) and each ``b_p`` is rounded once.
    Recentering alternates signs heavily; plain float accumulation loses
    most digits of the high-order coefficients.
    """
    a = np.asarray(a, dtype=np.complex128)
    N = len(a) - 1
    d = complex(d)
    re = [_dyadic(z) for z in a.real.tolist()]
    im = [_dyadic(z) for z in a.imag.tolist()]
    F = max(k for _, k in re + im)
    dr, kr = _dyadic(d.real)
    di, ki = _dyadic(d.imag)
    E = max(kr, ki)
    Dr, Di = dr << (E - kr), di << (E - ki)
    # scale so that sum c_n (D + u)^n == 2^(F + E N) f(d + 2^-E u) with integer c_n
    cr = [(m << (F - k)) << (E * (N - n)) for n, (m, k) in enumerate(re)]
    ci = [(m << (F - k)) << (E * (N - n)) for n, (m, k) in enumerate(im)]
    if Di == 0 and not any(ci):
        for i in range(N):
            for j in range(N - 1, i - 1, -1):
                cr[j] += Dr * cr[j + 1]
    else:
        for i in range(N):
            for j in range(N - 1, i - 1, -1):
                xr, xi = cr[j + 1], ci[j + 1]
                cr[j] += Dr * xr - Di * xi
                ci[j] += Dr * xi + Di * xr
    out = np.empty(N + 1, dtype=np.complex128)
    for p in range(N + 1):
        den = 1 << (F + E * (N - p))
        try:
            out[p] = complex(cr[p] / den, ci[p] / den)
        except OverflowError:
            raise DomainError(f"recentered coefficient {p} overflows double precision") from None
    return out


def recenter(
    f: PowerSeries, z0, override: bool = False, tol: float = DEFAULT_TOL
) -> PowerSeries:
    """Re-expand ``f`` about ``z0``.

    ``|z0 - center|`` must lie inside the estimated radius unless
    ``override`` is set (useful for polynomials and known-entire sources).
    """
    z0 = as_complex(z0, "z0")
    d = z0 - f.center
    if d == 0:
        return f
    if f.order > MAX_RECENTER_ORDER:
        raise ConfigError(
            f"recentering is capped at order {MAX_RECENTER_ORDER}, got {f.order}"
        )
    est = radius(f, tol)
    if not override and abs(d) >= est.rho:
        raise DomainError(
            f"|z0 - center| = {abs(d):.6g} is not inside the estimated radius {est.rho:.6g}"
        )
    disk = est.rho - abs(d) if abs(d) < est.rho else None
    if f.disk_radius is not None and disk is not None:
        disk = min(disk, f.disk_radius - abs(d))
    return PowerSeries(shift_coefficients(f.coeffs, d), z0, disk_radius=disk)


def derivative_at(f: PowerSeries, k: int, z0=None, override: bool = False, tol: float = DEFAULT_TOL) -> complex:
    """``f^(k)(z0) = k! * b_k`` with ``b`` the coefficients recentered at ``z0``."""
    if k < 0 or k > f.order:
        raise DomainError(f"derivative order must be within 0..{f.order}, got {k}")
    g = f if z0 is None else recenter(f, z0, override, tol)
    return complex(math.factorial(k) * g.coeffs[k])


# -- composition, reciprocal, reversion ------------------------------------------------------

def compose(f: PowerSeries, g: PowerSeries, override: bool = False, tol: float = DEFAULT_TOL) -> PowerSeries:
    """``f(g(z))`` about g's center.

    With ``w0 = g(center)``, f is recentered at ``w0`` and evaluated on
    ``g - w0`` by Horner's rule; ``(g - w0)^n`` starts at degree ``n`` so the
    truncated sum is a finite triangular computation.
    """
    w0 = complex(g.coeffs[0])
    if w0 != f.center:
        est = radius(f, tol)
        if not override and abs(w0 - f.center) >= est.rho:
            raise DomainError(
                f"|g(0) - f.center| = {abs(w0 - f.center):.6g} is not inside f's "
                f"estimated radius {est.rho:.6g}"
            )
        f = recenter(f, w0, override=True, tol=tol)
    m = min(f.order, g.order) + 1
    inner = g.coeffs[:m].copy()
    inner[0] = 0
    F = f.coeffs[:m]
    acc = np.zeros(m, dtype=np.complex128)
    acc[0] = F[m - 1]
    for n in range(m - 2, -1, -1):
        acc = _conv(acc, inner, m)
        acc[0] += F[n]
    return PowerSeries(acc, g.center)


def reciprocal(f: PowerSeries, tol: float = DEFAULT_TOL) -> PowerSeries:
    """``1/f`` via ``b_0 = 1/a_0``, ``b_n = -(1/a_0) sum_{k=1..n} a_k b_{n-k}``."""
    a = f.coeffs
    if abs(a[0]) <= tol:
        raise SingularError(f"|a_0| = {abs(a[0]):.3g} <= tol; 1/f has no power series here")
    inv = 1 / a[0]
    b = np.zeros_like(a)
    b[0] = inv
    for n in range(1, len(a)):
        b[n] = -inv * np.dot(a[1 : n + 1], b[n - 1 :: -1])
    return PowerSeries(b, f.center)


def reciprocal_by_composition(f: PowerSeries, tol: float = DEFAULT_TOL) -> PowerSeries:
    """``1/f = (1/a_0) h(1 - f/a_0)`` with ``h(w) = 1/(1 - w)``; independent of the recurrence."""
    a0 = complex(f.coeffs[0])
    if abs(a0) <= tol:
        raise SingularError(f"|a_0| = {abs(a0):.3g} <= tol; 1/f has no power series here")
    c = -f.coeffs / a0
    c[0] = 0  # 1 - f/a0 vanishes at the center
    g = PowerSeries(c, f.center)
    h = PowerSeries(np.ones(f.order + 1, dtype=np.complex128))
    return scale(1 / a0, compose(h, g))


def binomial_series(p: int, order: int = DEFAULT_TRUNC_ORDER) -> PowerSeries:
    """Coefficients ``C(1/p, n)``: a p-th root of ``1 + z`` on the unit disk."""
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)) or p < 1:
        raise DomainError(f"binomial series needs a positive integer p, got {p!r}")
    return PowerSeries.from_generator(catalog_lookup("binomial", p=int(p)), order)


def revert(f: PowerSeries, tol: float = DEFAULT_TOL) -> PowerSeries:
    """Compositional inverse ``g`` with ``f(g(z)) = z`` near the center.

    Requires ``a_0 = 0`` (within tol) and ``a_1 != 0``.  Coefficients are
    fixed order by order: ``[z^n] f(g) = a_1 g_n + sum_{k>=2} a_k [z^n] g^k``
    and the sum only involves ``g_1..g_{n-1}``.
    """
    a = f.coeffs
    if abs(a[0]) > tol:
        raise NotNormalizedError(f"revert needs a_0 = 0, got |a_0| = {abs(a[0]):.3g}")
    if f.order < 1 or abs(a[1]) <= tol:
        raise SingularError("revert needs a nonzero linear coefficient a_1")
    N = f.order
    g = np.zeros(N + 1, dtype=np.complex128)
    g[1] = 1 / a[1]
    for n in range(2, N + 1):
        m = n + 1
        pw = g[:m]
        s = 0j
        for k in range(2, n + 1):
            pw = _conv(pw, g, m)
            s += a[k] * pw[n]
        g[n] = -s / a[1]
    return PowerSeries(g, f.center)


# -- zeros and identity -----------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroFactorization:
    k: int
    cofactor: PowerSeries
    z0: complex

    def reconstruct(self) -> PowerSeries:
        """``(z - z0)^k * cofactor`` as a series about ``z0``."""
        c = np.concatenate([np.zeros(self.k, dtype=np.complex128), self.cofactor.coeffs])
        return PowerSeries(c, self.z0)


def order_of_zero(f: PowerSeries, z0, override: bool = False, tol: float = DEFAULT_TOL) -> ZeroFactorization:
    """Factor ``f = (z - z0)^k g`` with ``g(z0) != 0``."""
    z0 = as_complex(z0, "z0")
    if not np.any(np.abs(f.coeffs) > tol):
        raise IdenticallyZeroError("every coefficient is below tol; the series is identically zero")
    value, _ = evaluate(f, z0)
    if abs(value) > tol:
        raise NotAZeroError(f"|f(z0)| = {abs(value):.3g} > tol; z0 is not a zero")
    b = recenter(f, z0, override, tol).coeffs
    nonzero = np.flatnonzero(np.abs(b) > tol)
    if nonzero.size == 0:
        raise IdenticallyZeroError("all recentered coefficients are below tol")
    k = int(nonzero[0])
    return ZeroFactorization(k, PowerSeries(b[k:], z0), z0)


@dataclass(frozen=True)
class Distinction:
    verdict: str  # "coefficient_equal" | "witness" | "inconclusive"
    witness: complex | None = None
    gap: float = 0.0


def distinguish(
    f: PowerSeries, g: PowerSeries, tol: float = DEFAULT_TOL, halvings: int = 60, angles: int = 16
) -> Distinction:
    """Either the coefficients agree within tol or a point where f and g differ.

    Witness candidates sit on circles of radius ``rho * 2^-j`` (``rho`` is
    the estimated radius of ``f - g``, or 1 when that is infinite) at
    ``angles`` equally spaced directions.
    """
    _same_center(f, g, "distinguish")
    if f.order != g.order:
        raise DomainError(f"distinguish needs equal truncation orders ({f.order} vs {g.order})")
    diff = PowerSeries(f.coeffs - g.coeffs, f.center)
    if np.all(np.abs(diff.coeffs) <= tol):
        return Distinction("coefficient_equal")
    rho = radius(diff, tol).rho
    r0 = 1.0 if math.isinf(rho) else rho
    turns = np.exp(2j * np.pi * np.arange(angles) / angles)
    for j in range(halvings + 1):
        r = r0 * 2.0**-j
        for u in turns.tolist():
            z = f.center + r * u
            gap = abs(evaluate(f, z)[0] - evaluate(g, z)[0])
            if gap > tol:
                return Distinction("witness", z, gap)
    return Distinction("inconclusive")


# -- continuation along a segment ----------------------------------------------------------------

@dataclass(frozen=True)
class ContinuationChain:
    centers: tuple[complex, ...]
    series_at: tuple[PowerSeries, ...]
    step: float
    radii: tuple[float, ...] = ()

    @property
    def final(self) -> PowerSeries:
        return self.series_at[-1]

    def value(self) -> complex:
        """Value at the last center (the target)."""
        return complex(self.final.coeffs[0])


def tail_errors(f: PowerSeries, rho: float, shift: float, extra: int | None = None) -> np.ndarray:
    """Model of the error that truncating ``f`` puts into each recentered coefficient.

    The unknown coefficients beyond ``N`` are modelled as ``A rho^-n`` with
    ``A`` fitted to the last quartile; the error in ``b_p`` is then
    ``sum_{n>N} A rho^-n C(n, p) shift^(n-p)``.
    """
    N = f.order
    if math.isinf(rho) or shift == 0:
        return np.zeros(N + 1)
    mags = np.abs(f.coeffs)
    idx = np.arange(N + 1)
    last = (idx >= math.ceil(3 * N / 4)) & (mags > 0)
    if not last.any():
        return np.zeros(N + 1)
    log_rho = math.log(rho)
    log_amp = np.max(np.log(mags[last]) + idx[last] * log_rho)
    extra = extra or max(4 * (N + 1), 64)
    n = np.arange(N + 1, N + 1 + extra)[None, :]
    p = idx[:, None]
    log_terms = (
        log_amp
        - n * log_rho
        + gammaln(n + 1)
        - gammaln(p + 1)
        - gammaln(n - p + 1)
        + (n - p) * math.log(shift)
    )
    return np.exp(logsumexp(log_terms, axis=1))


def _trim(series: PowerSeries, errors: np.ndarray) -> PowerSeries:
    """Keep the leading coefficients whose modelled error is below their size."""
    keep = 0
    mags = np.abs(series.coeffs)
    while keep + 1 <= series.order and errors[keep + 1] < mags[keep + 1]:
        keep += 1
    return PowerSeries(series.coeffs[: keep + 1], series.center, disk_radius=series.disk_radius)


def continue_along_segment(f: PowerSeries, target, step: float, tol: float = DEFAULT_TOL) -> ContinuationChain:
    """Carry ``f`` from its center to ``target`` through a chain of disks.

    Centers are equally spaced on the segment, ``delta <= step`` apart.  At
    each hop the current series is recentered at the next point and then
    trimmed to the coefficients that still carry information: re-expanding a
    truncated series reproduces the truncation polynomial exactly, whose
    high-order coefficients say nothing about the continued function.
    The radius is re-estimated at every center; if it does not exceed
    ``step`` the chain stops with ``ContinuationBlocked``.
    """
    target = as_complex(target, "target")
    if not (step > 0 and math.isfinite(step)):
        raise DomainError("step must be a positive real")
    span = target - f.center
    dist = abs(span)
    if dist == 0:
        return ContinuationChain((f.center,), (f,), float(step))
    hops = max(1, math.ceil(dist / step - 1e-12))
    delta = dist / hops
    unit = span / dist
    centers = [f.center]
    series = [f]
    radii = []
    current = f
    for j in range(1, hops + 1):
        est = radius(current, tol)
        radii.append(est.rho)
        if est.rho <= step:
            raise ContinuationBlocked(
                f"estimated radius {est.rho:.6g} at center {current.center!r} does not exceed step {step}",
                center=current.center,
            )
        nxt = target if j == hops else f.center + j * delta * unit
        moved = recenter(current, nxt, override=True, tol=tol)
        shift = abs(nxt - current.center)
        current = _trim(moved, tail_errors(current, est.rho, shift))
        if current.order < 1 and not math.isinf(est.rho):
            raise ContinuationBlocked(
                f"no reliable coefficients left at center {nxt!r}; raise the input order",
                center=nxt,
            )
        centers.append(nxt)
        series.append(current)
    return ContinuationChain(tuple(centers), tuple(series), float(delta), tuple(radii))
