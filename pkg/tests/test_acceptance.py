"""Acceptance suite: one test per criterion.

Run ``pytest tests/test_acceptance.py`` (or execute this file); the terminal
summary prints one PASS/FAIL line per criterion.
"""

import cmath
import json
import math
from pathlib import Path

import numpy as np
import pytest

from series_lab.cli import run
from series_lab.core import catalog_lookup
from series_lab.io import load_document, parse_document, serialize_document
from series_lab.power_series import (
    PowerSeries,
    binomial_series,
    compose,
    continue_along_segment,
    differentiate,
    evaluate,
    multiply,
    order_of_zero,
    power,
    radius,
    recenter,
    reciprocal,
    reciprocal_by_composition,
    revert,
)
from series_lab.real_series import divergent_rearrangement
from series_lab.unordered_sums import Family, Partition, double_sum, regrouped_sum

FIXTURES = Path(__file__).parent / "fixtures"


def series(name, order=64, **params):
    return PowerSeries.from_generator(catalog_lookup(name, params), order)


def maxerr(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def test_criterion_01_cauchy_product():
    g = series("geometric", r=1)
    c = multiply(g, g).coeffs
    assert maxerr(c, np.arange(1, 66)) < 1e-12


def test_criterion_02_recentering():
    b = recenter(series("geometric", 128, r=1), 0.5).coeffs[:21]
    p = np.arange(21)
    assert maxerr(b, 2.0 ** (p + 1)) < 1e-8
    e = recenter(series("exponential"), 0.5).coeffs[:21]
    fact = np.array([math.factorial(k) for k in range(21)], dtype=float)
    assert maxerr(e, math.exp(0.5) / fact) < 1e-10


def test_criterion_03_recenter_eval_agreement():
    rng = np.random.default_rng(2024)
    for f in (series("geometric", r=1), series("exponential"), series("binomial", p=2)):
        rho = radius(f).rho
        # an infinite estimate leaves the disk free; sample within radius 4
        R = 0.9 * (rho if math.isfinite(rho) else 4.0)
        for _ in range(100):
            r0 = rng.uniform(0, R)
            z0 = r0 * cmath.exp(2j * math.pi * rng.uniform())
            z = z0 + rng.uniform(0, R - r0) * cmath.exp(2j * math.pi * rng.uniform())
            assert abs(evaluate(f, z)[0] - evaluate(recenter(f, z0), z)[0]) < 1e-6


def reciprocal_suite():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a0 = rng.uniform(0.1, 2) * cmath.exp(2j * math.pi * rng.uniform())
        c = (rng.normal(size=65) + 1j * rng.normal(size=65)) * 0.5 ** np.arange(65)
        # higher terms bounded by |a0| / 2 on the unit disk
        c *= abs(a0) / (2 * np.sum(np.abs(c[1:])))
        c[0] = a0
        yield PowerSeries.from_coeffs(c)


def test_criterion_04_reciprocal():
    one = PowerSeries.one().coeffs
    for f in reciprocal_suite():
        r = reciprocal(f)
        assert maxerr(multiply(f, r).coeffs, one) < 1e-9
        assert maxerr(r.coeffs, reciprocal_by_composition(f).coeffs) < 1e-9


def test_criterion_05_composition():
    fib = [1, 1]
    while len(fib) < 21:
        fib.append(fib[-1] + fib[-2])
    g = PowerSeries.from_coeffs([0, 1, 1] + [0] * 62)
    h = compose(series("geometric", r=1), g)
    assert maxerr(h.coeffs[:21], fib) < 1e-9


@pytest.mark.parametrize("p", [2, 3, 5])
def test_criterion_06_binomial_series(p):
    c = power(binomial_series(p, 30), p).coeffs
    assert maxerr(c[:2], [1, 1]) < 1e-10
    assert np.max(np.abs(c[2:31])) < 1e-10


def test_criterion_07_differentiation():
    g = series("geometric", r=1)
    d = differentiate(g)
    assert d.order == 63
    assert maxerr(d.coeffs, multiply(g, g).coeffs[:64]) < 1e-12


def test_criterion_08_zero_factorization():
    lin = PowerSeries.from_coeffs([-0.5, 1] + [0] * 63)
    f = multiply(multiply(lin, lin), series("exponential"))
    fac = order_of_zero(f, 0.5)
    assert fac.k == 2
    assert abs(evaluate(fac.cofactor, 0.5)[0] - math.exp(0.5)) < 1e-6


def reversion_suite():
    # f = a1 * (z + sum c_k z^k) with |c_k| <= 2^-k.  The round-trip error is
    # floored near eps * |a1 g_16|, so the suite keeps the inverse's
    # coefficients at a size double precision can resolve to 1e-9.
    rng = np.random.default_rng(99)
    k = np.arange(17)
    for _ in range(20):
        a1 = rng.uniform(0.5, 2) * cmath.exp(2j * math.pi * rng.uniform())
        c = rng.uniform(0, 1, 17) * np.exp(2j * math.pi * rng.uniform(size=17)) * 0.5**k
        c[0], c[1] = 0, 1
        yield PowerSeries.from_coeffs(a1 * c)


def test_criterion_09_reversion():
    g = revert(PowerSeries.from_coeffs([0, 1, 1] + [0] * 14))
    assert maxerr(g.coeffs[:6], [0, 1, -1, 2, -5, 14]) < 1e-9
    ident = PowerSeries.identity(16).coeffs
    for f in reversion_suite():
        assert maxerr(compose(f, revert(f)).coeffs, ident) < 1e-9


def test_criterion_10_continuation():
    # order 256: at order 64 the truncated input carries too little
    # information about 1/(1-z) to reach -2 at this accuracy
    chain = continue_along_segment(series("geometric", 256, r=1), -2, 0.4)
    assert chain.centers[-1] == -2
    assert abs(evaluate(chain.final, -2)[0] - 1 / 3) < 1e-6


def test_criterion_11_order_invariance():
    fam = Family.from_pairs(lambda n, m: 2.0**-n * 3.0**-m)
    values = [double_sum(fam, "row_major").value, double_sum(fam, "diagonal").value]
    values += [double_sum(fam, "random_perm", seed=s).value for s in range(20)]
    assert max(abs(v - 3) for v in values) < 1e-9
    for s in range(10):
        r = regrouped_sum(fam, Partition.random(2 + s % 5, seed=1000 + s))
        assert r.converged
        assert abs(r.value - 3) < 1e-8


def test_criterion_12_divergent_rearrangement():
    prefix = divergent_rearrangement(catalog_lookup("alternating_harmonic"), 5, budget=10**6)
    assert prefix.crossings_achieved >= 5
    assert len(prefix) <= 10**6
    first, second = prefix.block_ends[0], prefix.block_ends[1]
    assert prefix.indices[:first].tolist() == [0, 2]
    assert prefix.indices[first:second].tolist() == [1, 3, 5, 7, 9, 11, 13, 15]


def test_criterion_13_cli_round_trip_and_exit_codes(capsys):
    docs = sorted(FIXTURES.glob("*.json"))
    assert docs
    for path in docs:
        doc = load_document(path)
        again = parse_document(serialize_document(doc))
        assert np.array_equal(doc.to_series().coeffs, again.to_series().coeffs)
    cases = json.loads((FIXTURES / "errors" / "cases.json").read_text())
    assert len(cases) == 10
    for case in cases:
        path = str(FIXTURES / "errors" / case["file"])
        code = run([a.replace("{file}", path) for a in case["argv"]])
        assert code == case["exit"], case["file"]
    capsys.readouterr()


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
