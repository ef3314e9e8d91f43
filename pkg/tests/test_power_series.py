import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from series_lab.core import catalog_lookup
from series_lab.errors import (
    ConfigError,
    ContinuationBlocked,
    DomainError,
    IdenticallyZeroError,
    NotAZeroError,
    NotNormalizedError,
    SingularError,
)
from series_lab.power_series import (
    PowerSeries,
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
    shift_coefficients,
)


def gen(name, order=64, **params):
    return PowerSeries.from_generator(catalog_lookup(name, params), order)


GEO = gen("geometric", r=1)
EXP = gen("exponential")
FACT = np.array([math.factorial(k) for k in range(80)], dtype=float)


def close(a, b, tol):
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol


# -- construction and evaluation ------------------------------------------------------

def test_series_is_immutable_and_finite():
    f = PowerSeries.from_coeffs([1, 2, 3])
    with pytest.raises(ValueError):
        f.coeffs[0] = 5
    with pytest.raises(DomainError):
        PowerSeries.from_coeffs([1, float("nan")])
    with pytest.raises(DomainError):
        PowerSeries.from_coeffs([])


def test_source_matches_terms():
    f = gen("binomial", 30, p=3)
    g = catalog_lookup("binomial", p=3)
    assert f.source == g
    assert all(f[n] == g.term(n) for n in range(31))


def test_eval_examples():
    assert abs(evaluate(GEO, 0.5)[0] - 2) < 1e-12
    e_oracle = math.fsum(1 / math.factorial(k) for k in range(30))
    assert abs(evaluate(EXP, 1)[0] - e_oracle) < 1e-12
    f = PowerSeries.from_coeffs([3 - 1j, 7, 9], center=2j)
    assert evaluate(f, 2j)[0] == 3 - 1j
    value, tail = evaluate(GEO, 0.5)
    assert tail == pytest.approx(64 * 0.5**64)


def test_radius_examples():
    assert abs(radius(GEO).rho - 1) < 0.05
    est = radius(EXP)
    assert est.infinite
    twos = PowerSeries.from_coeffs(2.0 ** np.arange(65))
    est = radius(twos)
    assert abs(est.rho - 0.5) < 0.05
    assert est.window[0] <= est.rho <= est.window[1]
    zero = radius(PowerSeries.zero(10))
    assert zero.infinite and zero.window == (math.inf, math.inf)


def test_radius_window_widens_with_few_trailing_coefficients():
    sparse = PowerSeries.from_coeffs([1, 1, 1, 1, 1])
    est = radius(sparse)
    assert est.window[0] < est.rho < est.window[1]


# -- algebra ----------------------------------------------------------------------------

def test_add_scale_examples():
    z = PowerSeries.zero()
    assert np.array_equal(add(GEO, z).coeffs, GEO.coeffs)
    assert not np.any(scale(0, GEO).coeffs)
    n = np.arange(65)
    s = add(gen("geometric", r=0.5), gen("geometric", r=1 / 3))
    assert close(s.coeffs, 2.0**-n + 3.0**-n, 1e-15)
    with pytest.raises(DomainError):
        add(GEO, PowerSeries.zero(center=1))


def test_add_uses_shorter_truncation():
    assert add(GEO, GEO.truncate(5)).order == 5


def test_multiply_examples():
    assert close(multiply(GEO, GEO).coeffs, np.arange(1, 66), 1e-12)
    assert np.array_equal(multiply(EXP, PowerSeries.one()).coeffs, EXP.coeffs)
    n = np.arange(65)
    assert close(multiply(EXP, EXP).coeffs * FACT[:65], 2.0**n, 1e-12 * 2.0**64)
    assert np.allclose(multiply(EXP, EXP).coeffs, 2.0**n / FACT[:65], rtol=1e-13, atol=0)
    with pytest.raises(DomainError):
        multiply(GEO, PowerSeries.one(center=0.5))


def test_power_examples():
    n = np.arange(65)
    assert close(power(GEO, 3).coeffs, (n + 1) * (n + 2) / 2, 1e-9)
    assert np.array_equal(power(EXP, 1).coeffs, EXP.coeffs)
    assert np.array_equal(power(PowerSeries.one(), 7).coeffs, PowerSeries.one().coeffs)
    assert np.array_equal(power(GEO, 0).coeffs, PowerSeries.one().coeffs)
    with pytest.raises(DomainError):
        power(GEO, -1)


def test_power_agrees_with_iterated_multiply():
    f = PowerSeries.from_coeffs(np.random.default_rng(1).normal(size=33) * 0.5 ** np.arange(33))
    acc = PowerSeries.one(32)
    for p in range(6):
        assert close(power(f, p).coeffs, acc.coeffs, 1e-12)
        acc = multiply(acc, f)


def test_operators():
    f = PowerSeries.from_coeffs([1, 2])
    assert np.array_equal((f + 1).coeffs, [2, 2])
    assert np.array_equal((2 * f - f).coeffs, f.coeffs)
    assert np.array_equal((f * f).coeffs, [1, 4])
    assert np.array_equal((f**2).coeffs, [1, 4])
    assert f(0.5) == 2
    assert np.allclose((GEO / GEO).coeffs, PowerSeries.one().coeffs, atol=1e-12)


# -- calculus -------------------------------------------------------------------------------

def test_differentiate_examples():
    assert close(differentiate(EXP).coeffs, EXP.coeffs[:64], 1e-15)
    d = differentiate(GEO)
    assert d.order == 63
    assert close(d.coeffs, multiply(GEO, GEO).coeffs[:64], 1e-12)
    const = differentiate(PowerSeries.from_coeffs([4]))
    assert const.order == 0 and const[0] == 0
    assert not np.any(differentiate(PowerSeries.from_coeffs([4, 0, 0])).coeffs)


def test_differentiate_undoes_integrate_to_rounding():
    # (a / n) * n is not always a in binary floating point; one ulp is the floor
    rng = np.random.default_rng(2)
    f = PowerSeries.from_coeffs(rng.normal(size=20) + 1j * rng.normal(size=20))
    back = differentiate(integrate(f))
    assert back.order == f.order
    err = np.abs(back.coeffs - f.coeffs)
    assert np.all(err <= np.spacing(np.abs(f.coeffs)) * 2)
    dyadic = PowerSeries.from_coeffs([1, 0.5, -3, 0.25])
    assert np.array_equal(differentiate(integrate(dyadic)).coeffs, dyadic.coeffs)


def test_derivative_at_examples():
    assert abs(derivative_at(EXP, 5) - 1) < 1e-13
    assert derivative_at(GEO, 2) == 2
    assert abs(derivative_at(EXP, 3, 0.5) - math.exp(0.5)) < 1e-9
    with pytest.raises(DomainError):
        derivative_at(EXP, 65)


# -- recentering ------------------------------------------------------------------------------

def recenter_oracle(coeffs, z0):
    """Exact ``b_p = sum_n a_n C(n, p) z0^(n-p)`` over rationals (real inputs)."""
    a = [Fraction(c) for c in coeffs]
    z = Fraction(z0)
    N = len(a) - 1
    return [sum(a[n] * math.comb(n, p) * z ** (n - p) for n in range(p, N + 1)) for p in range(N + 1)]


def test_recenter_examples():
    b = recenter(gen("geometric", 128, r=1), 0.5)
    p = np.arange(21)
    assert close(b.coeffs[:21], 2.0 ** (p + 1), 1e-8)
    assert b.center == 0.5
    assert b.disk_radius == pytest.approx(radius(gen("geometric", 128, r=1)).rho - 0.5)
    e = recenter(EXP, 0.5)
    assert close(e.coeffs[:21], math.exp(0.5) / FACT[:21], 1e-10)
    assert recenter(EXP, 0) is EXP


def test_recenter_matches_exact_rational_formula():
    rng = np.random.default_rng(9)
    coeffs = rng.normal(size=41)
    for z0 in (0.3, -0.71, 0.5):
        got = shift_coefficients(coeffs, z0).real
        want = [float(v) for v in recenter_oracle(coeffs, z0)]
        # exact arithmetic with a single final rounding
        assert got.tolist() == want


def test_recenter_complex_shift_matches_high_precision():
    rng = np.random.default_rng(4)
    a = rng.normal(size=16) + 1j * rng.normal(size=16)
    d = 0.25 - 0.4j
    got = shift_coefficients(a, d)
    want = [sum(a[n] * math.comb(n, p) * d ** (n - p) for n in range(p, 16)) for p in range(16)]
    assert close(got, want, 1e-12)


def test_recenter_errors():
    with pytest.raises(DomainError):
        recenter(GEO, 1.5)
    recenter(GEO, 1.5, override=True)
    with pytest.raises(ConfigError):
        recenter(PowerSeries.from_coeffs(np.ones(1031) * 0.5 ** np.arange(1031)), 0.1)


def test_recenter_eval_agreement_on_random_points():
    rng = np.random.default_rng(21)
    for f in (GEO, EXP, gen("binomial", p=2)):
        rho = radius(f).rho
        R = 0.9 * (rho if math.isfinite(rho) else 3.0)
        for _ in range(100):
            r0 = rng.uniform(0, R)
            z0 = r0 * cmath.exp(2j * math.pi * rng.uniform())
            z = z0 + rng.uniform(0, R - r0) * cmath.exp(2j * math.pi * rng.uniform())
            g = recenter(f, z0)
            assert abs(evaluate(f, z)[0] - evaluate(g, z)[0]) < 1e-6


# -- composition, reciprocal, reversion ---------------------------------------------------------

def fibonacci(n):
    out = [1, 1]
    while len(out) < n:
        out.append(out[-1] + out[-2])
    return out[:n]


def test_compose_examples():
    lam = 0.7
    g = PowerSeries.from_coeffs([0, lam] + [0] * 63)
    n = np.arange(65)
    assert close(compose(EXP, g).coeffs, lam**n / FACT[:65], 1e-15)
    ident = PowerSeries.identity()
    assert close(compose(EXP, ident).coeffs, EXP.coeffs, 1e-12)
    zz = PowerSeries.from_coeffs([0, 1, 1] + [0] * 62)
    assert close(compose(GEO, zz).coeffs[:21], fibonacci(21), 1e-9)


def test_compose_with_shifted_inner_constant():
    # exp(0.3 + z) = e^0.3 exp(z)
    g = PowerSeries.from_coeffs([0.3, 1] + [0] * 40)
    h = compose(EXP.truncate(41), g)
    assert close(h.coeffs, math.exp(0.3) * EXP.coeffs[:42], 1e-12)
    with pytest.raises(DomainError):
        compose(GEO, PowerSeries.from_coeffs([1.2, 1]))


def test_compose_identity_on_both_sides():
    rng = np.random.default_rng(6)
    f = PowerSeries.from_coeffs((rng.normal(size=30) + 1j * rng.normal(size=30)) * 0.6 ** np.arange(30))
    ident = PowerSeries.identity(29)
    assert close(compose(f, ident).coeffs, f.coeffs, 1e-12)
    g = PowerSeries.from_coeffs(np.concatenate([[0], f.coeffs[1:]]))
    assert close(compose(ident, g).coeffs, g.coeffs, 1e-12)


def test_reciprocal_examples():
    r = reciprocal(GEO)
    assert close(r.coeffs, [1, -1] + [0] * 63, 1e-15)
    n = np.arange(65)
    assert close(reciprocal(EXP).coeffs, (-1.0) ** n / FACT[:65], 1e-15)
    assert np.array_equal(reciprocal(PowerSeries.one()).coeffs, PowerSeries.one().coeffs)
    with pytest.raises(SingularError):
        reciprocal(PowerSeries.from_coeffs([1e-12, 1]))


def test_reciprocal_two_routes_agree():
    f = gen("binomial", 40, p=2)
    assert close(reciprocal(f).coeffs, reciprocal_by_composition(f).coeffs, 1e-9)


def test_revert_examples():
    ident = PowerSeries.from_coeffs([0, 1, 0, 0])
    assert close(revert(ident).coeffs, ident.coeffs, 0)
    f = PowerSeries.from_coeffs([0, 1, 1] + [0] * 10)
    catalan = [0, 1, -1, 2, -5, 14, -42, 132, -429]
    assert close(revert(f).coeffs[:9], catalan, 1e-9)
    lin = PowerSeries.from_coeffs([0, 4, 0, 0, 0])
    assert close(revert(lin).coeffs, [0, 0.25, 0, 0, 0], 1e-15)
    with pytest.raises(NotNormalizedError):
        revert(PowerSeries.from_coeffs([1, 1]))
    with pytest.raises(SingularError):
        revert(PowerSeries.from_coeffs([0, 0, 1]))


def test_revert_log_gives_expm1():
    # log(1 + z) reverts to e^z - 1
    n = np.arange(1, 20)
    log1p = PowerSeries.from_coeffs(np.concatenate([[0], (-1.0) ** (n + 1) / n]))
    g = revert(log1p)
    assert close(g.coeffs[1:], 1 / FACT[1:20], 1e-12)


# -- zeros, identity, continuation, binomial --------------------------------------------------------

def test_order_of_zero_examples():
    f = PowerSeries.from_coeffs([0, 0, 0] + [1] * 62)
    fac = order_of_zero(f, 0)
    assert fac.k == 3
    assert close(fac.cofactor.coeffs, np.ones(62), 0)
    lin = PowerSeries.from_coeffs([-0.5, 1] + [0] * 63)
    g = multiply(power(lin, 2), EXP)
    fac = order_of_zero(g, 0.5)
    assert fac.k == 2
    assert abs(evaluate(fac.cofactor, 0.5)[0] - math.exp(0.5)) < 1e-6
    assert close(fac.reconstruct().coeffs, recenter(g, 0.5).coeffs, 1e-9)
    with pytest.raises(IdenticallyZeroError):
        order_of_zero(PowerSeries.zero(), 0)
    with pytest.raises(NotAZeroError):
        order_of_zero(EXP, 0)


def test_distinguish_examples():
    assert distinguish(GEO, GEO).verdict == "coefficient_equal"
    bumped = add(GEO, PowerSeries.monomial(10))
    d = distinguish(GEO, bumped)
    assert d.verdict == "witness"
    assert abs(evaluate(GEO, d.witness)[0] - evaluate(bumped, d.witness)[0]) > 1e-10
    tiny = PowerSeries(GEO.coeffs + 1e-15)
    assert distinguish(GEO, tiny).verdict == "coefficient_equal"
    with pytest.raises(DomainError):
        distinguish(GEO, GEO.truncate(10))


def test_distinguish_inconclusive_when_search_is_too_short():
    # z^17 - z vanishes on the unit circle at all 16th roots of unity,
    # and the root test puts the first search circle exactly there
    c = np.zeros(18)
    c[1], c[17] = -1, 1
    f, zero = PowerSeries.from_coeffs(c), PowerSeries.zero(17)
    assert distinguish(f, zero, halvings=0).verdict == "inconclusive"
    d = distinguish(f, zero)
    assert d.verdict == "witness" and abs(d.witness) == pytest.approx(0.5)


def test_continuation_examples():
    chain = continue_along_segment(gen("geometric", 256, r=1), -2, 0.4)
    assert abs(chain.value() - 1 / 3) < 1e-6
    assert chain.centers[0] == 0 and chain.centers[-1] == -2
    for a, b in zip(chain.centers, chain.centers[1:]):
        assert abs(b - a) <= 0.4 + 1e-12
    chain = continue_along_segment(EXP, 2j, 0.5)
    assert abs(chain.value() - (math.cos(2) + 1j * math.sin(2))) < 1e-8
    chain = continue_along_segment(EXP, 0, 0.5)
    assert len(chain.centers) == 1 and chain.final is EXP


def test_continuation_blocked_names_center():
    with pytest.raises(ContinuationBlocked) as info:
        continue_along_segment(GEO, -2, 1.5)
    assert info.value.center == 0


def test_binomial_series_examples():
    assert close(binomial_series(1, 10).coeffs, [1, 1] + [0] * 9, 0)
    assert close(binomial_series(2, 4).coeffs, [1, 0.5, -0.125, 0.0625, -5 / 128], 1e-16)
    sq = power(binomial_series(2, 30), 2)
    assert close(sq.coeffs[:2], [1, 1], 1e-12)
    assert np.max(np.abs(sq.coeffs[2:])) < 1e-10
    with pytest.raises(DomainError):
        binomial_series(0)


# -- properties -------------------------------------------------------------------------------------

small = st.floats(-2, 2, allow_nan=False)
cplx = st.builds(complex, small, small)


@st.composite
def series(draw, order=12):
    cs = draw(st.lists(cplx, min_size=order + 1, max_size=order + 1))
    return PowerSeries.from_coeffs(cs)


@settings(max_examples=60, deadline=None)
@given(series(), series(), series())
def test_multiply_commutative_associative(f, g, h):
    assert close(multiply(f, g).coeffs, multiply(g, f).coeffs, 1e-12)
    lhs = multiply(multiply(f, g), h).coeffs
    rhs = multiply(f, multiply(g, h)).coeffs
    assert close(lhs, rhs, 1e-12 * max(1, np.max(np.abs(lhs))))


@settings(max_examples=40, deadline=None)
@given(series(16), st.floats(0.5, 2), st.floats(-1, 1))
def test_revert_round_trip(f, a1_mag, phase):
    c = f.coeffs.copy()
    c[0] = 0
    c[1] = a1_mag * cmath.exp(1j * math.pi * phase)
    # keep |a_k| / |a_1|^k modest so the inverse is well conditioned
    c[2:] *= a1_mag ** np.arange(2, 17) * 0.25
    f = PowerSeries.from_coeffs(c)
    fg = compose(f, revert(f))
    assert close(fg.coeffs, PowerSeries.identity(16).coeffs, 1e-9)


@settings(max_examples=40, deadline=None)
@given(series(24), st.floats(0.1, 1), st.floats(-1, 1))
def test_reciprocal_properties(f, a0_mag, phase):
    c = f.coeffs.copy()
    c[0] = a0_mag * cmath.exp(1j * math.pi * phase)
    c[1:] *= abs(c[0]) * 0.5 ** np.arange(2, 26) / 2
    f = PowerSeries.from_coeffs(c)
    r = reciprocal(f)
    assert close(multiply(f, r).coeffs, PowerSeries.one(24).coeffs, 1e-9)
    assert close(r.coeffs, reciprocal_by_composition(f).coeffs, 1e-9)
