"""Kernel evaluation, embedding constants, and domain verdicts."""
import math

import numpy as np
import pytest

from hermspace import AnchoredPoint, SchemeError, ToleranceError, WeightScheme
from hermspace.hermite import hermite_column
from hermspace.kernels import (
    IN,
    OUT,
    UNDECIDED,
    anchored_kernel_lower,
    domain_check,
    embed_anchor_zero_bound,
    embed_constant_lower,
    embed_constant_upper,
    embed_norm_upper,
    kernel_1d,
    kernel_product,
)
from hermspace.weights import CoordinateSequence, weight_recips


@pytest.fixture(scope="module")
def pg_log():
    return WeightScheme.pg(2.0, log_slope=3.0)


@pytest.fixture(scope="module")
def eg_b1():
    return WeightScheme.eg_single(1.0, 1.0)


def series_oracle(scheme, x, y, j=1, n=100_000):
    recs = weight_recips(scheme, n, j)
    prods = hermite_column(n, x) * hermite_column(n, y)
    return 1.0 + float(np.sum(recs[1:] * prods[1:]))


def test_pg_kernel_against_series_oracle(pg_log):
    # spec point: k(0,0) for r=2 against a 1e5-term truncated sum
    res = kernel_1d(pg_log, 0.0, 0.0, 1, tol=1e-10)
    oracle = series_oracle(pg_log, 0.0, 0.0)
    assert res.value == pytest.approx(oracle, abs=res.tail_bound + 1e-8)
    rng = np.random.default_rng(3)
    for _ in range(12):
        x, y = rng.uniform(-2.5, 2.5, size=2)
        res = kernel_1d(pg_log, x, y, 1, tol=1e-9)
        oracle = series_oracle(pg_log, x, y)
        assert res.value == pytest.approx(oracle, abs=res.tail_bound + 1e-7)


def test_pg_kernel_large_exponent_coordinate(pg_log):
    # j = 40 has r_j ~ 18; series branch with analytic tail
    res = kernel_1d(pg_log, 1.1, -0.4, 40, tol=1e-12)
    oracle = series_oracle(pg_log, 1.1, -0.4, j=40, n=200)
    assert res.value == pytest.approx(oracle, abs=1e-12)
    assert res.tail_bound <= 1e-12


def test_eg_closed_form_against_series(eg_b1):
    rng = np.random.default_rng(11)
    for _ in range(12):
        x, y = rng.uniform(-3.0, 3.0, size=2)
        res = kernel_1d(eg_b1, x, y)
        oracle = series_oracle(eg_b1, x, y, n=400)
        assert res.value == pytest.approx(oracle, rel=1e-12)


def test_eg_general_series_certificate():
    sub = WeightScheme.eg_single(1.0, 0.5)
    res = kernel_1d(sub, 1.5, -2.0, tol=1e-10)
    fine = kernel_1d(sub, 1.5, -2.0, tol=1e-12)
    assert abs(res.value - fine.value) <= res.tail_bound
    sup = WeightScheme.eg_single(0.75, 2.0)
    res = kernel_1d(sup, 0.9, 0.9, tol=1e-11)
    oracle = series_oracle(sup, 0.9, 0.9, n=100)
    assert res.value == pytest.approx(oracle, abs=res.tail_bound + 1e-13)


def test_refined_evaluation_inside_certificate(pg_log):
    rng = np.random.default_rng(5)
    for scheme in (pg_log, WeightScheme.pg_single(1.5), WeightScheme.eg_single(1.0, 0.5)):
        for _ in range(6):
            x, y = rng.uniform(-2.0, 2.0, size=2)
            coarse = kernel_1d(scheme, x, y, 1, tol=1e-7)
            fine = kernel_1d(scheme, x, y, 1, tol=1e-9)
            assert abs(coarse.value - fine.value) <= coarse.tail_bound + 1e-15


def test_kernel_symmetry_and_diagonal(pg_log, eg_b1):
    rng = np.random.default_rng(9)
    for scheme in (pg_log, eg_b1):
        for _ in range(8):
            x, y = rng.uniform(-3.0, 3.0, size=2)
            tol = 1e-9
            a = kernel_1d(scheme, x, y, 1, tol).value
            b = kernel_1d(scheme, y, x, 1, tol).value
            assert a == pytest.approx(b, abs=2 * tol)
        for _ in range(8):
            x = rng.uniform(-3.0, 3.0)
            assert kernel_1d(scheme, x, x, 1, 1e-9).value >= 1.0


def test_diagonal_monotone_in_magnitude(pg_log):
    rng = np.random.default_rng(21)
    for _ in range(100):
        x, y = rng.uniform(-3.0, 3.0, size=2)
        if abs(x) > abs(y):
            x, y = y, x
        tol = 1e-9
        kx = kernel_1d(pg_log, x, x, 1, tol).value
        ky = kernel_1d(pg_log, y, y, 1, tol).value
        assert kx <= ky + 4 * tol


def test_kernel_validation(pg_log):
    with pytest.raises(ValueError):
        kernel_1d(pg_log, float("nan"), 0.0)
    with pytest.raises(ValueError):
        kernel_1d(pg_log, 40.0, 40.0)
    with pytest.raises(ValueError):
        kernel_1d(pg_log, 0.0, 0.0, tol=0.0)
    # a univariate scheme with slow decay cannot certify a huge diagonal
    with pytest.raises(ToleranceError) as exc:
        kernel_1d(WeightScheme.eg_single(0.05, 0.5), 6.0, 6.0, tol=1e-14)
    assert exc.value.achieved > 0


def test_custom_kernel_exact():
    table = WeightScheme.custom([[1.0, 0.5, 0.25]])
    res = kernel_1d(table, 1.0, 2.0)
    h1 = 1.0 * 2.0
    h2 = ((1.0 - 1.0) / math.sqrt(2.0)) * ((4.0 - 1.0) / math.sqrt(2.0))
    assert res.value == pytest.approx(1.0 + 0.5 * h1 + 0.25 * h2, rel=1e-15)
    assert res.tail_bound == 0.0
    assert kernel_1d(table, 1.0, 2.0, j=5).value == 1.0


def test_product_kernel_fully_anchored_oracle(pg_log):
    res = kernel_product(pg_log, AnchoredPoint.make([]), AnchoredPoint.make([]))
    prod = 1.0
    for j in range(1, 2001):
        prod *= kernel_1d(pg_log, 0.0, 0.0, j, 1e-13).value
    # the oracle itself omits coordinates beyond 2000
    deficit = 2.2e-9
    assert abs(res.value - prod) <= res.tail_bound + deficit


def test_product_kernel_factorization(pg_log):
    x = AnchoredPoint.make([(3, 1.2)])
    y = AnchoredPoint.make([])
    full = kernel_product(pg_log, x, y, tol=1e-8)
    base = kernel_product(pg_log, y, y, tol=1e-8)
    factor = kernel_1d(pg_log, 1.2, 0.0, 3, 1e-12).value \
        / kernel_1d(pg_log, 0.0, 0.0, 3, 1e-12).value
    assert full.value == pytest.approx(base.value * factor, rel=1e-7)


def test_product_kernel_symmetry_and_errors(pg_log):
    xp = AnchoredPoint.make([(1, 0.4), (4, -1.0)])
    yp = AnchoredPoint.make([(2, 0.9)])
    tol = 1e-7
    ab = kernel_product(pg_log, xp, yp, tol)
    ba = kernel_product(pg_log, yp, xp, tol)
    assert ab.value == pytest.approx(ba.value, abs=2 * tol)
    with pytest.raises(ValueError):
        kernel_product(pg_log, xp, AnchoredPoint.make([(1, 0.5)], anchor=1.0))


def test_product_kernel_custom_two_coordinates():
    table = WeightScheme.custom([[1.0, 0.5], [1.0, 0.25]])
    xp = AnchoredPoint.make([(1, 1.0), (2, 2.0)])
    yp = AnchoredPoint.make([(1, -0.5)])
    res = kernel_product(table, xp, yp)
    want = (1.0 + 0.5 * 1.0 * -0.5) * (1.0 + 0.25 * 2.0 * 0.0)
    assert res.value == pytest.approx(want, rel=1e-14)


def test_embed_constant_upper_brackets(pg_log):
    single = WeightScheme.pg_single(2.0)
    cup = embed_constant_upper(single)
    odd_squares = float(np.sum((2.0 * np.arange(1, 200000.0) + 1.0) ** -2.0))
    assert 2.0 <= cup <= 2.0 + odd_squares + 1e-9
    for a in (-2.0, -0.5, 1.0, 3.0):
        assert embed_constant_upper(pg_log, a) >= 2.0
        assert embed_constant_upper(pg_log, 0.0) <= embed_constant_upper(pg_log, a) + 1e-10
    assert embed_constant_upper(pg_log) <= embed_anchor_zero_bound(pg_log)


def test_embed_norm_upper_oracle():
    aff = WeightScheme.pg(2.0, affine_slope=3.0)
    got = embed_norm_upper(aff, 0.0, tol=1e-9)
    cup = embed_constant_upper(aff, 0.0, tol=1e-12)
    partial = 1.0
    for j in range(1, 1001):
        partial *= math.sqrt(1.0 + 2.0 ** (2.0 - (2.0 + 3.0 * (j - 1))) * cup)
    assert got == pytest.approx(partial, abs=1e-8)
    assert got >= math.sqrt(1.0 + cup) - 1e-12

    table = WeightScheme.custom([[1.0, 0.5]])
    got = embed_norm_upper(table)
    assert got == pytest.approx(math.sqrt(1.0 + embed_constant_upper(table)), rel=1e-10)


def test_embed_constant_lower_and_anchored_kernel():
    pg = WeightScheme.pg(2.0, log_slope=3.0)
    assert embed_constant_lower(pg, 0.0) == pytest.approx(0.2, rel=1e-15)
    assert embed_constant_lower(pg, 1.0) < embed_constant_lower(pg, 0.5)
    assert anchored_kernel_lower(pg, 0.7, 0.7, 1.9) == 0.0
    assert anchored_kernel_lower(pg, 0.0, 2.0, 3.0) == pytest.approx(0.2 * 6.0)


def test_domain_counterexample_sequence():
    scheme = WeightScheme.eg(3.0, 1.0, r_log_slope=3.0, r_log_offset=1.0)
    roots = CoordinateSequence("power", 1.0, 0.5)
    assert domain_check(scheme, roots, "X").verdict == IN
    assert domain_check(scheme, roots, "X_UP").verdict == OUT
    assert domain_check(scheme, roots, "X_DOWN").verdict == IN


def test_domain_bounded_and_zero_sequences(pg_log):
    ones = CoordinateSequence("constant", 1.0)
    for scheme in (pg_log, WeightScheme.eg(1.0, 1.0, r_affine_slope=0.5)):
        assert domain_check(scheme, ones, "X_UP").verdict == IN
        assert domain_check(scheme, ones, "X").verdict == IN
        assert domain_check(scheme, ones, "X_DOWN").verdict == IN
    zero = CoordinateSequence("constant", 0.0)
    assert domain_check(pg_log, zero, "X_UP").verdict == IN


def test_domain_divergent_sequences(pg_log):
    fast = CoordinateSequence("power", 1.0, 2.0)
    eg = WeightScheme.eg(1.0, 1.0, r_affine_slope=0.5)
    # x_j = j^2 makes sum 2^{-r_j} x_j^2 diverge only for slow exponents
    assert domain_check(eg, fast, "X_DOWN").verdict == IN
    log_eg = WeightScheme.eg(3.0, 1.0, r_log_slope=3.0, r_log_offset=1.0)
    assert domain_check(log_eg, fast, "X_DOWN").verdict == OUT
    assert domain_check(log_eg, fast, "X").verdict == OUT
    assert domain_check(log_eg, fast, "X_UP").verdict == OUT


def test_domain_misc(pg_log):
    table = WeightScheme.custom([[1.0, 0.5]])
    v = domain_check(table, CoordinateSequence("power", 2.0, 1.0), "X")
    assert v.verdict == IN and "finite" in v.certificate
    with pytest.raises(ValueError):
        domain_check(pg_log, CoordinateSequence("constant", 1.0), "Y")
    with pytest.raises(SchemeError):
        domain_check(WeightScheme.pg_single(2.0), CoordinateSequence("constant", 1.0), "X")
    grow = CoordinateSequence("log", 2.0)
    verdict = domain_check(pg_log, grow, "X").verdict
    assert verdict in (IN, OUT, UNDECIDED)
