"""Value-level checks for the orthonormal Hermite recurrence."""
import math
from fractions import Fraction

import numpy as np
import pytest

from hermspace import hermite_column, hermite_columns, hermite_eval


def monic_coefficients(nu):
    """Exact integer coefficient lists for the monic three-term recurrence."""
    polys = [[1], [0, 1]]
    for k in range(2, nu + 1):
        prev, prev2 = polys[k - 1], polys[k - 2]
        shifted = [0] + prev
        lower = [(k - 1) * c for c in prev2] + [0] * (len(shifted) - len(prev2))
        polys.append([a - b for a, b in zip(shifted, lower)])
    return polys[: nu + 1]


def eval_oracle(nu, x_frac):
    """h_nu at a rational point: exact polynomial value over sqrt(nu!)."""
    coeffs = monic_coefficients(nu)[nu]
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x_frac + c
    return float(acc) / math.sqrt(math.factorial(nu))


def test_matches_monomial_expansion_to_degree_20():
    xs = [Fraction(k, 8) for k in range(-24, 25, 3)]
    for nu in range(21):
        for xf in xs:
            got = hermite_eval(nu, float(xf))
            want = eval_oracle(nu, xf)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_column_agrees_with_scalar_and_batch():
    rng = np.random.default_rng(7)
    xs = rng.uniform(-6.0, 6.0, size=17)
    mat = hermite_columns(40, xs)
    assert mat.shape == (17, 41)
    for i, x in enumerate(xs):
        col = hermite_column(40, x)
        assert np.array_equal(mat[i], col)
        for nu in (0, 1, 7, 40):
            assert col[nu] == hermite_eval(nu, x)


def test_known_small_values():
    assert hermite_eval(0, 3.7) == 1.0
    assert hermite_eval(1, 3.7) == 3.7
    # degree 2: (x^2 - 1)/sqrt(2)
    assert hermite_eval(2, 0.0) == pytest.approx(-1.0 / math.sqrt(2.0), rel=1e-15)
    assert hermite_eval(3, 1.0) == pytest.approx((1.0 - 3.0) / math.sqrt(6.0), rel=1e-15)


def test_even_degree_at_origin():
    # h_{2m}(0)^2 = (2m)! / (m! 2^m)^2, odd degrees vanish
    col = hermite_column(24, 0.0)
    for m in range(13):
        exact = math.factorial(2 * m) / (math.factorial(m) * 2 ** m) ** 2
        assert col[2 * m] ** 2 == pytest.approx(exact, rel=1e-13)
    for nu in range(1, 25, 2):
        assert col[nu] == 0.0


def test_square_bound_gaussian_envelope():
    # h_nu(x)^2 <= e^{x^2/2} for every degree
    xs = np.linspace(-6.0, 6.0, 241)
    mat = hermite_columns(200, xs)
    envelope = np.exp(xs * xs / 2.0)
    assert np.all(mat ** 2 <= envelope[:, None] * (1.0 + 1e-12))


def test_difference_quotient_matches_scaled_lower_degree():
    # d/dx h_nu = sqrt(nu) h_{nu-1}; checked by central differences
    rng = np.random.default_rng(42)
    eps = 1e-5
    for _ in range(1000):
        nu = int(rng.integers(1, 51))
        x = float(rng.uniform(-6.0, 6.0))
        fd = (hermite_eval(nu, x + eps) - hermite_eval(nu, x - eps)) / (2.0 * eps)
        want = math.sqrt(nu) * hermite_eval(nu - 1, x)
        scale = max(1.0, abs(want), abs(hermite_eval(nu, x)))
        assert fd == pytest.approx(want, abs=1e-6 * scale)


def test_orthonormal_under_gaussian_weight():
    # Gauss nodes for weight e^{-x^2/2} integrate degree <= 2M-1 exactly
    nodes, wts = np.polynomial.hermite_e.hermegauss(64)
    wts = wts / math.sqrt(2.0 * math.pi)
    mat = hermite_columns(30, nodes)
    gram = (mat * wts[:, None]).T @ mat
    assert np.allclose(gram, np.eye(31), atol=1e-10)


def test_input_validation():
    with pytest.raises(ValueError):
        hermite_eval(-1, 0.0)
    with pytest.raises(ValueError):
        hermite_eval(3, float("nan"))
    with pytest.raises(ValueError):
        hermite_column(-2, 1.0)
    with pytest.raises(ValueError):
        hermite_columns(5, np.array([1.0, float("inf")]))
