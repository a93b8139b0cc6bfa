"""Least-squares approximation: construction, error evaluation, bounds."""
import math

import numpy as np
import pytest

from hermspace import (
    Approx1D,
    IllConditionedError,
    SchemeError,
    ToleranceError,
    WeightScheme,
    approx_from_text,
    approx_to_text,
    density_ratio,
    least_squares_approx,
    sample_mixture,
    spectral_lower_bound,
    tail_degree_weights,
    weight_recip,
    worst_case_error_l2,
)
from hermspace.hermite import hermite_columns
from hermspace.weights import reciprocal_tail_rms

PG2 = WeightScheme.pg_single(2.0)


@pytest.fixture(scope="module")
def built_64_16():
    return least_squares_approx(64, 16, PG2, seed=7)


def test_spectral_lower_bound_examples():
    assert spectral_lower_bound(PG2, 3) == pytest.approx(0.25, abs=1e-15)
    assert spectral_lower_bound(PG2, 0) == pytest.approx(1.0, abs=1e-15)
    eg = WeightScheme.eg_single(1.0, 1.0)
    assert spectral_lower_bound(eg, 2) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ValueError):
        spectral_lower_bound(PG2, -1)


def test_zero_algorithm_error_is_one():
    rep = worst_case_error_l2(Approx1D.zero(), PG2)
    assert rep.err == pytest.approx(1.0, abs=1e-12)
    assert rep.cost == 0


def test_exact_projection_error_is_next_weight():
    # five nodes determine any polynomial of degree four, so inverting
    # the evaluation matrix gives the exact coefficient functionals; on
    # a five-entry custom table the whole space is covered and the
    # worst-case error is exactly the first dropped normalized weight
    table = (1.0, 1.0 / 4.0, 1.0 / 9.0, 1.0 / 16.0, 1.0 / 25.0)
    scheme = WeightScheme.custom([table])
    xs = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    vmat = hermite_columns(4, xs)
    coeff_map = np.linalg.inv(vmat)[:4, :]
    ap = Approx1D(
        nodes=tuple(xs),
        ls_weights=(1.0,) * 5,
        node_scales=tuple(np.exp(0.25 * xs * xs)),
        basis_dim=4,
        output_map=tuple(tuple(row) for row in coeff_map),
    )
    rep = worst_case_error_l2(ap, scheme, n_trunc=8)
    assert rep.err == pytest.approx(0.2, abs=1e-10)
    assert rep.tail_bound <= 1e-12


def test_in_span_reproduction(built_64_16):
    hmat = hermite_columns(15, built_64_16.node_array())
    for nu in range(16):
        coeffs = built_64_16.coefficients(hmat[:, nu])
        want = np.zeros(16)
        want[nu] = 1.0
        assert np.max(np.abs(coeffs - want)) < 1e-8


def test_error_below_tail_rms_budget(built_64_16):
    rep = worst_case_error_l2(built_64_16, PG2)
    beta, _ = reciprocal_tail_rms(PG2, 8)
    assert rep.err < 1.5 * beta


def test_error_dominates_lower_bound(built_64_16):
    rep = worst_case_error_l2(built_64_16, PG2)
    assert rep.err >= spectral_lower_bound(PG2, built_64_16.cost) - 1e-12
    for count, basis, seed in ((32, 8, 3), (128, 32, 5)):
        ap = least_squares_approx(count, basis, PG2, seed=seed)
        rep = worst_case_error_l2(ap, PG2)
        assert rep.err >= spectral_lower_bound(PG2, count) - 1e-12


def test_error_decay_short_window():
    sizes = (32, 64, 128, 256)
    errs = []
    for count in sizes:
        ap = least_squares_approx(count, count // 4, PG2, seed=0)
        errs.append(worst_case_error_l2(ap, PG2).err)
    slope = -np.polyfit(np.log(sizes), np.log(errs), 1)[0]
    assert 0.6 <= slope <= 1.4


def test_truncation_consistency(built_64_16):
    rep = worst_case_error_l2(built_64_16, PG2)
    rep_big = worst_case_error_l2(built_64_16, PG2, n_trunc=2048)
    assert abs(rep.err - rep_big.err) < 1e-3
    assert rep_big.tail_bound < rep.tail_bound


def test_determinism(built_64_16):
    again = least_squares_approx(64, 16, PG2, seed=7)
    assert again == built_64_16
    other = least_squares_approx(64, 16, PG2, seed=8)
    assert other != built_64_16


def test_sampler_weighted_gram_near_identity():
    rng = np.random.default_rng(np.random.SeedSequence(42))
    basis = 4
    count = 4000
    xs = sample_mixture(count, basis, PG2, rng)
    rho = density_ratio(xs, basis, PG2)
    vmat = hermite_columns(basis - 1, xs)
    gram = (vmat / rho[:, None]).T @ vmat / count
    assert np.max(np.abs(gram - np.eye(basis))) < 0.15


def test_density_ratio_positive_floor():
    xs = np.linspace(-8.0, 8.0, 41)
    rho = density_ratio(xs, 8, PG2)
    assert np.all(rho >= 1.0 / 16.0)
    assert np.all(np.isfinite(rho))


def test_tail_degree_weights_shape():
    degs, probs = tail_degree_weights(PG2, 8)
    assert degs[0] == 8
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    # spectral weighting decreases with degree
    assert probs[0] > probs[-1]
    eg = WeightScheme.eg_single(1.0, 1.0)
    degs_eg, probs_eg = tail_degree_weights(eg, 4)
    assert degs_eg.size < degs.size


def test_build_validation():
    with pytest.raises(ValueError):
        least_squares_approx(8, 0, PG2, seed=1)
    with pytest.raises(ValueError):
        least_squares_approx(7, 4, PG2, seed=1)
    with pytest.raises(SchemeError):
        least_squares_approx(8, 4, WeightScheme.custom([(1.0, 0.5)]), seed=1)
    with pytest.raises(SchemeError):
        least_squares_approx(8, 4, WeightScheme.pg_single(1.0), seed=1)


def test_error_evaluator_validation(built_64_16):
    with pytest.raises(ValueError):
        worst_case_error_l2(built_64_16, PG2, tol=0.0)
    with pytest.raises(ValueError):
        worst_case_error_l2(built_64_16, PG2, n_trunc=8)
    with pytest.raises(ToleranceError) as exc:
        worst_case_error_l2(built_64_16, PG2, tol=1e-9)
    assert exc.value.achieved > 1e-9


def test_redraw_exhaustion_raises(monkeypatch):
    import hermspace.approx1d as mod

    def degenerate(count, basis_dim, scheme, rng, j=1):
        return np.zeros(count)

    monkeypatch.setattr(mod, "sample_mixture", degenerate)
    with pytest.raises(IllConditionedError):
        least_squares_approx(8, 4, PG2, seed=1)


def test_serialization_round_trip(built_64_16):
    text = approx_to_text(built_64_16)
    assert approx_from_text(text) == built_64_16


def test_serialization_rejects_malformed(built_64_16):
    text = approx_to_text(built_64_16)
    with pytest.raises(ValueError):
        approx_from_text("something else\n")
    with pytest.raises(ValueError):
        approx_from_text("\n".join(text.splitlines()[:-1]))
    lines = text.splitlines()
    lines[3] = "0.0 1.0"
    with pytest.raises(ValueError):
        approx_from_text("\n".join(lines))


def test_instance_validation():
    with pytest.raises(ValueError):
        Approx1D(nodes=(0.0,), ls_weights=(), node_scales=(1.0,),
                 basis_dim=1, output_map=((1.0,),))
    with pytest.raises(ValueError):
        Approx1D(nodes=(0.0,), ls_weights=(1.0,), node_scales=(1.0,),
                 basis_dim=2, output_map=((1.0,), (0.0,)))
    with pytest.raises(ValueError):
        Approx1D(nodes=(0.0,), ls_weights=(1.0,), node_scales=(1.0,),
                 basis_dim=1, output_map=((1.0, 2.0),))
