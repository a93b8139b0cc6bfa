"""Quadrature rules, schedules, and the worst-case integration error."""
import math

import numpy as np
import pytest

from hermspace import WeightScheme, kernel_1d
from hermspace.hermite import hermite_columns
from hermspace.quad1d import (
    Rule1D,
    base_rule,
    rule_from_text,
    rule_to_text,
    scheduled_rule,
    shift_schedule,
    shifted_rule,
    worst_case_error_int,
)
from hermspace.weights import weight_recips


def spectral_oracle(rule, scheme, j, terms):
    """err^2 from the coefficient form, assembled independently."""
    xs = rule.node_array()
    ws = rule.weight_array()
    hmat = hermite_columns(terms, xs)
    s = ws @ hmat
    recs = weight_recips(scheme, terms, j)
    return (1.0 - s[0]) ** 2 + float(np.sum(recs[1:] * s[1:] ** 2))


def test_base_rule_midpoint_and_sums():
    mid = base_rule(1, 1)
    assert mid.nodes == (0.0,) and mid.weights == (1.0,)
    for m, r in [(1, 1), (7, 1), (16, 2), (33, 4), (40, 6), (24, 9)]:
        rule = base_rule(m, r)
        assert sum(rule.weights) == pytest.approx(1.0, abs=1e-14)
        assert all(w > 0 for w in rule.weights)
        assert all(-0.5 <= x <= 0.5 for x in rule.nodes)
    with pytest.raises(ValueError):
        base_rule(0, 1)
    with pytest.raises(ValueError):
        base_rule(4, 0)


def test_base_rule_quadratic_convergence():
    errs = []
    ms = [2, 4, 8, 16, 32, 64, 128, 256]
    for m in ms:
        rule = base_rule(m, 2)
        approx = sum(w * x * x for x, w in zip(rule.nodes, rule.weights))
        errs.append(abs(1.0 / 12.0 - approx))
    assert all(errs[i + 1] < errs[i] for i in range(len(errs) - 1))
    # resolution parameter is the panel count m - 1
    fit = np.polyfit(np.log(np.array(ms) - 1.0), np.log(errs), 1)
    assert fit[0] == pytest.approx(-2.0, abs=0.05)


def test_base_rule_degree_exactness():
    # local degree r-1 polynomials integrate exactly on each panel
    for r in (2, 3, 4, 9):
        rule = base_rule(20, r)
        for power in range(r):
            approx = sum(w * x ** power for x, w in zip(rule.nodes, rule.weights))
            exact = (0.5 ** (power + 1) - (-0.5) ** (power + 1)) / (power + 1)
            assert approx == pytest.approx(exact, abs=1e-13)


def test_shift_schedule_examples():
    big_l, sizes = shift_schedule(2, 1, 0.2)
    assert big_l == 2 and sizes == (2, 2, 2)
    for n in (4, 64, 1024):
        for r in (1, 2, 3):
            big_l, sizes = shift_schedule(n, r)
            assert len(sizes) == 2 * big_l - 1
            half = sizes[big_l - 1:]
            assert all(half[i] >= half[i + 1] for i in range(len(half) - 1))
            assert sum(sizes) <= 30 * n
    with pytest.raises(ValueError):
        shift_schedule(1, 1)
    with pytest.raises(ValueError):
        shift_schedule(8, 1, delta=0.25)
    with pytest.raises(ValueError):
        shift_schedule(8, 1, delta=0.0)


def test_shifted_rule_single_node_and_mass():
    rule = shifted_rule(1, (1,), 1)
    assert rule.nodes == (0.0,)
    assert rule.weights[0] == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-15)
    rule = shifted_rule(5, (64,) * 9, 4)
    target = math.erf(4.5 / math.sqrt(2.0))
    assert sum(rule.weights) == pytest.approx(target, abs=1e-6)
    assert all(w > 0 for w in rule.weights)
    assert all(-4.5 <= x <= 4.5 for x in rule.nodes)
    with pytest.raises(ValueError):
        shifted_rule(2, (4, 4), 1)


def test_scheduled_rule_composition():
    for n, r in [(8, 1), (16, 2), (64, 3)]:
        rule = scheduled_rule(n, r)
        big_l, sizes = shift_schedule(n, r)
        direct = shifted_rule(big_l, sizes, r)
        assert rule.nodes == direct.nodes
        assert rule.weights == direct.weights
        assert rule.shift_range == big_l
        assert rule.shift_sizes == sizes
        assert rule.smoothness == r
        raw = {round(x + shift, 14)
               for shift, m in zip(range(-big_l + 1, big_l), sizes)
               for x in base_rule(m, r).nodes}
        assert len(rule.nodes) == len(raw)


def test_wce_zero_and_single_node():
    pg = WeightScheme.pg_single(2.0)
    zero = worst_case_error_int(Rule1D.zero(), pg)
    assert zero.err == 1.0 and zero.cost == 0
    one = Rule1D((0.0,), (1.0,))
    rep = worst_case_error_int(one, pg, tol=1e-9)
    k00 = kernel_1d(pg, 0.0, 0.0, 1, 1e-12).value
    assert rep.err ** 2 == pytest.approx(k00 - 1.0, abs=1e-11)
    assert rep.cost == 1


def test_wce_matches_spectral_oracle():
    rng = np.random.default_rng(17)
    pg = WeightScheme.pg_single(2.0)
    for _ in range(5):
        nodes = tuple(sorted(rng.uniform(-2.0, 2.0, size=5)))
        wts = tuple(rng.uniform(0.05, 0.3, size=5))
        rule = Rule1D(nodes, wts)
        rep = worst_case_error_int(rule, pg, tol=1e-6)
        want = math.sqrt(spectral_oracle(rule, pg, 1, 60000))
        assert rep.err == pytest.approx(want, abs=1e-6 + rep.tail_bound)


def test_wce_custom_scheme_exact():
    table = WeightScheme.custom([[1.0, 0.5, 0.25, 0.1]])
    rng = np.random.default_rng(23)
    nodes = tuple(sorted(rng.uniform(-1.5, 1.5, size=4)))
    wts = tuple(rng.uniform(0.1, 0.4, size=4))
    rule = Rule1D(nodes, wts)
    rep = worst_case_error_int(rule, table)
    want = math.sqrt(spectral_oracle(rule, table, 1, 3))
    assert rep.err == pytest.approx(want, abs=1e-10)


def test_wce_exponential_scheme():
    eg = WeightScheme.eg_single(1.0, 1.0)
    rule = scheduled_rule(16, 2)
    rep = worst_case_error_int(rule, eg, tol=1e-9)
    want = math.sqrt(spectral_oracle(rule, eg, 1, 300))
    assert rep.err == pytest.approx(want, abs=1e-9 + rep.tail_bound)
    sub = WeightScheme.eg_single(1.0, 0.5)
    rep = worst_case_error_int(rule, sub, tol=1e-9)
    want = math.sqrt(spectral_oracle(rule, sub, 1, 4000))
    assert rep.err == pytest.approx(want, abs=1e-9 + rep.tail_bound)


def test_wce_refinement_consistency():
    pg = WeightScheme.pg_single(1.5)
    rule = scheduled_rule(32, 2)
    coarse = worst_case_error_int(rule, pg, tol=1e-6)
    fine = worst_case_error_int(rule, pg, tol=1e-9)
    assert abs(coarse.err - fine.err) <= coarse.tail_bound + fine.tail_bound + 1e-15


def test_wce_rate_window_short():
    pg = WeightScheme.pg_single(2.0)
    ns = [8, 16, 32, 64, 128]
    errs = []
    for n in ns:
        rep = worst_case_error_int(scheduled_rule(n, 2), pg, 1, 1e-9)
        errs.append(rep.err)
    assert all(errs[i + 1] < errs[i] for i in range(len(errs) - 1))
    fit = np.polyfit(np.log(ns), np.log(errs), 1)
    assert -fit[0] == pytest.approx(2.0, abs=0.4)


def test_wce_validation():
    pg = WeightScheme.pg_single(2.0)
    rule = Rule1D((0.0,), (1.0,))
    with pytest.raises(ValueError):
        worst_case_error_int(rule, pg, tol=0.0)
    with pytest.raises(ValueError):
        worst_case_error_int(Rule1D((40.0,), (1.0,)), pg)
    with pytest.raises(ValueError):
        Rule1D((0.0, 1.0), (1.0,))
    with pytest.raises(ValueError):
        Rule1D((float("inf"),), (1.0,))


def test_rule_serialization_round_trip():
    rule = scheduled_rule(16, 2)
    text = rule_to_text(rule, WeightScheme.pg_single(2.0).scheme_id())
    back = rule_from_text(text)
    assert back == rule
    bare = Rule1D((0.25, -1.5), (0.5, 0.125))
    assert rule_from_text(rule_to_text(bare)) == bare
    with pytest.raises(ValueError):
        rule_from_text("not a rule\n")
    with pytest.raises(ValueError):
        rule_to_text(rule, "has space")
    clipped = "\n".join(text.splitlines()[:-1]) + "\n"
    with pytest.raises(ValueError):
        rule_from_text(clipped)
