"""Decomposition-method solvers over anchored variable subsets.

The infinite-variate integrand is split into anchored components indexed by
finite sets of variables.  A threshold rule selects the active sets and
assigns each one an evaluation budget; the per-set algorithms tensorize the
univariate quadrature family through the combination technique; composing
them with the inclusion-exclusion stencil of the anchored decomposition and
merging coincident points flattens the whole method into one linear rule
over anchored points.

Error accounting has two layers.  The a-priori bound combines per-set
tensor-rule bounds (with empirically calibrated constants) and
zero-algorithm tails, all weighted by the coordinate embedding weights.
The exact worst-case error of a flattened rule on the unit ball of the
product-kernel space comes from its Gram matrix, assembled from certified
kernel tables with a shared inactive-coordinate tail factor.

Planning and assembly are sequential and deterministic; per-set tensor
builds and Gram assembly are independent of each other and may be run
concurrently without changing any result.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .base import AnchoredPoint, ErrorReport, SchemeError, ToleranceError
from .hermite import hermite_columns
from .kernels import (_inactive_log_tail, embed_constant_upper,
                      embed_norm_upper, kernel_1d)
from .quad1d import Rule1D, scheduled_rule, worst_case_error_int
from .weights import (WeightScheme, embedding_weight, recip_tail,
                      smoothness_growth, subset_weight_sum, weight_recip,
                      weight_recips)

_LEVEL_CAP = 30          # family levels beyond this would be astronomical
_PLAN_COORD_CAP = 1_000_000
_ANCHOR_FACTOR_CAP = 400_000


# ---------------------------------------------------------------------------
# cost model


@dataclass(frozen=True)
class CostModel:
    """Price of one function evaluation as a function of its active count.

    ``affine`` charges base + slope * n for an evaluation whose point
    differs from the anchor in n coordinates; ``table`` reads finite prices
    from a tuple and extends with the last entry.  Prices are
    non-decreasing and the price of the fully anchored evaluation is >= 1.
    """

    kind: str
    base: float = 1.0
    slope: float = 0.0
    table: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind == "AFFINE":
            if self.base < 1.0:
                raise ValueError(f"base price must be >= 1, got {self.base}")
            if self.slope < 0.0:
                raise ValueError(f"slope must be >= 0, got {self.slope}")
        elif self.kind == "TABLE":
            if not self.table:
                raise ValueError("table cost model needs at least one entry")
            if self.table[0] < 1.0:
                raise ValueError("price of the anchored evaluation must be >= 1")
            if any(b < a for a, b in zip(self.table, self.table[1:])):
                raise ValueError("table prices must be non-decreasing")
        else:
            raise ValueError(f"unknown cost model kind {self.kind!r}")

    @staticmethod
    def affine(base: float = 1.0, slope: float = 1.0) -> "CostModel":
        return CostModel("AFFINE", base=base, slope=slope)

    @staticmethod
    def from_table(prices: Iterable[float]) -> "CostModel":
        return CostModel("TABLE", table=tuple(float(p) for p in prices))

    def cost(self, active_count: int) -> float:
        if active_count < 0:
            raise ValueError(f"active count must be >= 0, got {active_count}")
        if self.kind == "AFFINE":
            return self.base + self.slope * active_count
        return self.table[min(active_count, len(self.table) - 1)]

    def satisfies_bracket(self, linear_coeff: float, exp_coeff: float,
                          n_max: int = 1000) -> bool:
        """Check linear_coeff * n <= cost(n) <= exp(exp_coeff * n) on
        0 <= n <= n_max."""
        for n in range(n_max + 1):
            price = self.cost(n)
            if price < linear_coeff * n or math.log(price) > exp_coeff * n:
                return False
        return True


# ---------------------------------------------------------------------------
# subset weights and the anchored stencil


def embedding_weight_product(scheme: WeightScheme,
                             indices: Iterable[int]) -> float:
    """Product of the per-coordinate embedding weights over a finite index
    set; the empty set gives 1."""
    prod = 1.0
    for j in set(indices):
        prod *= embedding_weight(scheme, j)
    return prod


def anchored_component_points(indices: Iterable[int],
                              point: AnchoredPoint
                              ) -> list[tuple[AnchoredPoint, int]]:
    """Inclusion-exclusion stencil of the anchored component over ``indices``.

    Returns the 2^|indices| pairs (sub-point, sign) whose signed function
    values sum to the component's value at ``point``.  The sub-point keeps
    the point's coordinates on a subset and anchors the rest; the sign
    alternates with the number of anchored coordinates.
    """
    u = tuple(sorted(set(indices)))
    stray = [j for j in point.active_indices if j not in u]
    if stray:
        raise ValueError(f"point is active outside the index set at {stray}")
    out = []
    for keep_mask in range(1 << len(u)):
        kept = [u[i] for i in range(len(u)) if keep_mask >> i & 1]
        sign = -1 if (len(u) - len(kept)) % 2 else 1
        out.append((point.restrict(kept), sign))
    return out


# ---------------------------------------------------------------------------
# tensorized rules from the univariate family


@dataclass(frozen=True)
class SmolyakRule:
    """A linear rule over points that differ from the anchor only on
    ``indices``; ``depth`` is the accepted shell depth of the combination
    technique, -1 for the zero rule returned when the budget cannot cover
    one evaluation per coordinate."""

    indices: tuple[int, ...]
    points: tuple[tuple[float, ...], ...]
    weights: tuple[float, ...]
    anchor: float
    depth: int

    def __post_init__(self):
        if len(self.points) != len(self.weights):
            raise ValueError("point and weight counts differ")
        if any(len(p) != len(self.indices) for p in self.points):
            raise ValueError("point arity must match the index set")

    @property
    def is_zero(self) -> bool:
        return not self.points

    @property
    def cost(self) -> int:
        return len(self.points)


def default_rule_family(scheme: WeightScheme,
                        delta: float = 0.2) -> Callable[[int], Rule1D]:
    """Univariate integration family indexed by level: level 0 is the
    single-node rule at the origin, level i >= 1 the scheduled rule with
    evaluation budget 2^i, tuned to the scheme's first-coordinate
    smoothness.  Levels are cached."""
    r = max(1, int(round(scheme.r1)))
    cache: dict[int, Rule1D] = {}

    def family(level: int) -> Rule1D:
        if level < 0 or level > _LEVEL_CAP:
            raise ValueError(f"family level out of range: {level}")
        if level not in cache:
            if level == 0:
                cache[level] = Rule1D((0.0,), (1.0,), smoothness=r)
            else:
                cache[level] = scheduled_rule(1 << level, r, delta)
        return cache[level]

    return family


def _flattened_difference(family: Callable[[int], Rule1D],
                          level: int) -> tuple[tuple[float, ...],
                                               tuple[float, ...]]:
    """Difference of consecutive family members as one signed point list."""
    if level == 0:
        rule = family(0)
        return rule.nodes, rule.weights
    acc: dict[float, float] = {}
    for x, w in zip(family(level).nodes, family(level).weights):
        acc[x] = acc.get(x, 0.0) + w
    for x, w in zip(family(level - 1).nodes, family(level - 1).weights):
        acc[x] = acc.get(x, 0.0) - w
    items = sorted((x, w) for x, w in acc.items() if w != 0.0)
    return tuple(x for x, _ in items), tuple(w for _, w in items)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def _add_shell(acc: dict, d: int, q: int, diffs: list) -> None:
    """Accumulate every tensor product of difference rules whose levels
    sum to q into the signed point dictionary."""
    for comp in _compositions(q, d):
        slots = [diffs[i] for i in comp]
        for combo in itertools.product(*(zip(*s) for s in slots)):
            key = tuple(x for x, _ in combo)
            w = math.prod(w for _, w in combo)
            acc[key] = acc.get(key, 0.0) + w


def _finish_rule(u: tuple[int, ...], acc: dict, anchor: float,
                 depth: int) -> SmolyakRule:
    items = sorted((p, w) for p, w in acc.items() if w != 0.0)
    return SmolyakRule(u, tuple(p for p, _ in items),
                       tuple(w for _, w in items), anchor, depth)


def _checked_indices(indices: Iterable[int]) -> tuple[int, ...]:
    u = tuple(sorted(set(int(j) for j in indices)))
    if not u or any(j < 1 for j in u):
        raise ValueError("need a nonempty set of coordinate indices >= 1")
    return u


def simplex_rule(indices: Iterable[int], depth: int,
                 family: Callable[[int], Rule1D],
                 anchor: float = 0.0) -> SmolyakRule:
    """Combination-technique rule over ``indices`` at an exact shell
    depth: the sum of difference-rule tensor products over all levels with
    coordinate sum at most ``depth``."""
    u = _checked_indices(indices)
    if depth < 0:
        return SmolyakRule(u, (), (), anchor, -1)
    if depth > _LEVEL_CAP:
        raise ValueError(f"depth {depth} exceeds the level cap {_LEVEL_CAP}")
    diffs = [_flattened_difference(family, i) for i in range(depth + 1)]
    acc: dict[tuple[float, ...], float] = {}
    for q in range(depth + 1):
        _add_shell(acc, len(u), q, diffs)
    return _finish_rule(u, acc, anchor, depth)


def smolyak_rule(indices: Iterable[int], budget: int,
                 family: Callable[[int], Rule1D],
                 anchor: float = 0.0) -> SmolyakRule:
    """Combination-technique rule over ``indices`` within an evaluation
    budget.

    Tensor products of difference rules are summed over complete shells of
    the level simplex, adding shells greedily while the number of distinct
    nonzero-weight points stays within ``budget``.  For a single coordinate
    the shells telescope exactly to the largest affordable family member.
    A budget below the coordinate count returns the zero rule (depth -1).
    """
    u = _checked_indices(indices)
    d = len(u)
    if budget < d:
        return SmolyakRule(u, (), (), anchor, -1)
    diffs = [_flattened_difference(family, 0)]
    acc: dict[tuple[float, ...], float] = {}
    accepted = False
    depth = -1
    for q in itertools.count():
        if q > 0:
            while len(diffs) <= q:
                diffs.append(_flattened_difference(family, len(diffs)))
        tentative = dict(acc)
        _add_shell(tentative, d, q, diffs)
        count = sum(1 for w in tentative.values() if w != 0.0)
        if count > budget:
            break
        acc, accepted, depth = tentative, True, q
        if q >= _LEVEL_CAP:
            break
    if not accepted:
        return SmolyakRule(u, (), (), anchor, -1)
    return _finish_rule(u, acc, anchor, depth)


def _single_shell_count(d: int, family: Callable[[int], Rule1D]) -> int:
    """Distinct points of the depth-1 simplex rule in d coordinates."""
    origin = _flattened_difference(family, 0)
    level1 = _flattened_difference(family, 1)
    pts = {tuple(origin[0][0] for _ in range(d))}
    for slot in range(d):
        for x in level1[0]:
            pts.add(tuple(x if k == slot else origin[0][0] for k in range(d)))
    return len(pts)


# ---------------------------------------------------------------------------
# tensor-rule error bound and its calibration


def smolyak_error_bound(size: int, budget: int, kappa: float,
                        c0: float, c1: float) -> float:
    """Closed-form bound for the combination-technique rule over ``size``
    coordinates at the given evaluation budget:
    c0 * c1^size * (1 + ln(n+1)/max(size-1,1))^((kappa+1)(size-1)) * (n+1)^(-kappa).
    """
    if size < 1:
        raise ValueError(f"coordinate count must be >= 1, got {size}")
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")
    log_factor = (1.0 + math.log(budget + 1.0) / max(size - 1, 1)) \
        ** ((kappa + 1.0) * (size - 1))
    return c0 * c1 ** size * log_factor * (budget + 1.0) ** (-kappa)


def _budget_log_factor(size: int, budget: int, kappa: float) -> float:
    return (1.0 + math.log(budget + 1.0) / max(size - 1, 1)) \
        ** ((kappa + 1.0) * (size - 1))


@dataclass(frozen=True)
class SmolyakFit:
    """Calibrated constants for the tensor-rule error bound together with
    the measurements they were fitted to.

    ``one_dim`` and ``two_dim`` hold (budget, measured error) pairs; the
    budgets are the right edges of the plateaus on which the constructed
    rule stays constant, so the fitted bound dominates every measured
    plateau.  ``premise_const`` is the smallest constant c with
    err(budget) <= c * budget^(-kappa) across the univariate measurements.
    """

    c0: float
    c1: float
    kappa: float
    premise_const: float
    one_dim: tuple[tuple[int, float], ...]
    two_dim: tuple[tuple[int, float], ...]


_QUAD_TOL_LADDER = (1e-11, 3e-10, 1e-8)


def _rule_quad_form(nodes: Sequence[float], weights: Sequence[float],
                    scheme: WeightScheme) -> tuple[float, float]:
    """Quadratic form of a signed univariate rule in the first-coordinate
    kernel, recovered from its certified integration error."""
    rule = Rule1D(tuple(float(x) for x in nodes),
                  tuple(float(v) for v in weights))
    report = None
    for tol in _QUAD_TOL_LADDER:
        try:
            report = worst_case_error_int(rule, scheme, 1, tol)
            break
        except ToleranceError:
            continue
    if report is None:
        raise ToleranceError(
            "univariate error certificate failed at every tolerance",
            achieved=math.inf)
    s0 = math.fsum(weights)
    hi = (report.err + report.tail_bound) ** 2
    lo = max(report.err - report.tail_bound, 0.0) ** 2
    mid = 0.5 * (hi + lo) - 1.0 + 2.0 * s0
    cert = 0.5 * (hi - lo) + 1e-14 * (1.0 + abs(mid))
    return mid, cert


def _pairwise_quad_forms(scheme: WeightScheme,
                         family: Callable[[int], Rule1D],
                         depth: int):
    """Certified mutual quadratic forms of the family's difference rules.

    The cross terms come from the polarization identity, so everything
    reduces to certified univariate integration errors.  Returns the
    per-level weight sums, the symmetric form matrix, and its certs.
    """
    diffs = [_flattened_difference(family, i) for i in range(depth + 1)]
    sums = [math.fsum(d[1]) for d in diffs]
    form = np.zeros((depth + 1, depth + 1))
    cert = np.zeros((depth + 1, depth + 1))
    for i in range(depth + 1):
        form[i, i], cert[i, i] = _rule_quad_form(diffs[i][0], diffs[i][1],
                                                 scheme)
        for k in range(i):
            nodes = diffs[i][0] + diffs[k][0]
            plus = diffs[i][1] + diffs[k][1]
            minus = diffs[i][1] + tuple(-v for v in diffs[k][1])
            qp, cp = _rule_quad_form(nodes, plus, scheme)
            qm, cm = _rule_quad_form(nodes, minus, scheme)
            form[i, k] = form[k, i] = 0.25 * (qp - qm)
            cert[i, k] = cert[k, i] = 0.25 * (cp + cm)
    return sums, form, cert


def _two_coordinate_error(forms, depth: int) -> tuple[float, float]:
    """Exact worst-case error of the two-coordinate combination rule at a
    shell depth, assembled from the pairwise quadratic forms."""
    sums, form, cert = forms
    pairs = [(i, j) for i in range(depth + 1)
             for j in range(depth + 1 - i)]
    wsum = math.fsum(sums[i] * sums[j] for i, j in pairs)
    quad_terms = []
    cert_total = 0.0
    for i, j in pairs:
        for k, l in pairs:
            quad_terms.append(form[i, k] * form[j, l])
            cert_total += abs(form[i, k]) * cert[j, l] \
                + cert[i, k] * (abs(form[j, l]) + cert[j, l])
    quad = math.fsum(quad_terms)
    err_sq = 1.0 - 2.0 * wsum + quad
    cert_total += 1e-14 * (1.0 + abs(err_sq))
    return _interval_error(err_sq - cert_total, err_sq + cert_total)


def calibrate_smolyak_constants(scheme: WeightScheme, kappa: float,
                                family: Callable[[int], Rule1D] | None = None,
                                budget_cap: int = 4096,
                                anchor: float = 0.0,
                                margin: float = 1.05) -> SmolyakFit:
    """Fit the tensor-rule bound constants to measured worst-case errors.

    Rules for one and two coordinates are built at every affordable depth
    and their exact errors on the first-coordinate slot space (and its
    two-fold tensor) are measured; the constants are the smallest pair,
    inflated by ``margin``, for which the bound dominates the measured
    upper enclosure on each plateau of the budget-to-rule map, evaluated
    at the plateau's right edge.  Deeper coordinate counts extrapolate
    through the per-coordinate constant factor, which is safe while kappa
    sits strictly below the family's true decay rate.
    """
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    fam = default_rule_family(scheme) if family is None else family
    c_up = embed_constant_upper(scheme, anchor)

    one_pairs = []
    counts1 = []
    for depth in itertools.count():
        sr = simplex_rule((1,), depth, fam, anchor)
        counts1.append(sr.cost)
        if sr.cost > budget_cap and depth > 0:
            break
        rule = Rule1D(tuple(p[0] for p in sr.points), sr.weights)
        report = None
        for tol in _QUAD_TOL_LADDER:
            try:
                report = worst_case_error_int(rule, scheme, 1, tol)
                break
            except ToleranceError:
                continue
        if report is None:
            raise ToleranceError("one-coordinate calibration rule failed "
                                 "to certify", achieved=math.inf)
        one_pairs.append([sr.cost, report.err + report.tail_bound])
    for k in range(len(one_pairs)):
        one_pairs[k][0] = counts1[k + 1] - 1

    cap2 = min(budget_cap, 2600)
    depths2 = []
    counts2 = []
    for depth in itertools.count():
        sr = simplex_rule((1, 2), depth, fam, anchor)
        counts2.append(sr.cost)
        if sr.cost > cap2 and depth > 0:
            break
        depths2.append(depth)
    forms = _pairwise_quad_forms(scheme, fam, depths2[-1])
    two_pairs = []
    for pos, depth in enumerate(depths2):
        err, spread = _two_coordinate_error(forms, depth)
        two_pairs.append([counts2[pos + 1] - 1, err + spread])

    premise = max(e * max(n, 1) ** kappa for n, e in one_pairs)
    g1 = max(c_up * e * (n + 1.0) ** kappa for n, e in one_pairs)
    g2 = max(c_up ** 2 * e * (n + 1.0) ** kappa
             / _budget_log_factor(2, n, kappa) for n, e in two_pairs)
    c1 = max(1.0, g2 / g1) * margin
    c0 = (g1 / max(1.0, g2 / g1)) * margin
    return SmolyakFit(c0=c0, c1=c1, kappa=kappa, premise_const=premise,
                      one_dim=tuple((n, e) for n, e in one_pairs),
                      two_dim=tuple((n, e) for n, e in two_pairs))


# ---------------------------------------------------------------------------
# certified kernel tables and exact worst-case errors

_DEGREE_CAP = 30000
_DEGREE_CHUNK = 2048


def _degree_floor(xmax: float) -> float:
    """Smallest useful truncation degree for a grid reaching |x| = xmax:
    past the oscillatory onset of every basis function on the grid."""
    return max(96.0, 0.5 * xmax * xmax + 6.0 * xmax ** (2.0 / 3.0) + 48.0)


def _partial_table(scheme: WeightScheme, j: int, values: np.ndarray,
                   degree: int) -> np.ndarray:
    """Truncated orthogonal expansion of the coordinate kernel on a grid,
    accumulated in degree chunks so memory stays flat at any depth."""
    n = values.size
    recs = weight_recips(scheme, degree, j)
    table = np.zeros((n, n))
    h_prev = np.ones(n)
    block = np.empty((n, _DEGREE_CHUNK))
    lo = 0
    h_cur = None
    while lo <= degree:
        hi = min(lo + _DEGREE_CHUNK, degree + 1)
        width = hi - lo
        for pos in range(width):
            nu = lo + pos
            if nu == 0:
                col = h_prev
            elif nu == 1:
                h_cur = values.copy()
                col = h_cur
            else:
                h_prev, h_cur = h_cur, \
                    (values * h_cur - math.sqrt(nu - 1.0) * h_prev) \
                    / math.sqrt(float(nu))
                col = h_cur
            block[:, pos] = col
        table += (block[:, :width] * recs[lo:hi]) @ block[:, :width].T
        lo = hi
    return table


@dataclass
class _CoordinateSpec:
    """Per-coordinate grid data for the certified Gram assembly."""

    j: int
    unique: np.ndarray
    inverse: np.ndarray
    umass: np.ndarray
    exact: bool


def _coordinate_spec(scheme: WeightScheme, j: int, column: np.ndarray,
                     w: np.ndarray) -> _CoordinateSpec:
    uq, inv = np.unique(np.asarray(column, dtype=float),
                        return_inverse=True)
    umass = np.bincount(inv, weights=np.abs(w), minlength=uq.size)
    return _CoordinateSpec(j, uq, inv, umass, scheme.kind == "CUSTOM")


_PAIR_CACHE: dict[tuple, tuple[float, float]] = {}
_PAIR_CACHE_CAP = 2_000_000


def _pair_kernel(scheme: WeightScheme, j: int, x: float, y: float,
                 target: float) -> tuple[float, float]:
    """Certified coordinate-kernel value for one pair of grid points.

    Results are cached under a canonical key; the kernel is symmetric in
    its arguments and even under joint sign flips, so all four variants
    of a pair share one entry.
    """
    key = (scheme, j, min((x, y), (y, x), (-x, -y), (-y, -x)))
    hit = _PAIR_CACHE.get(key)
    if hit is not None and hit[1] <= target:
        return hit
    res = None
    for loosen in (1.0, 10.0, 100.0, 1e4):
        try:
            res = kernel_1d(scheme, x, y, j, target * loosen)
            break
        except ToleranceError:
            continue
    if res is None:
        res = kernel_1d(scheme, x, y, j, 1e-3 * (1.0 + abs(x * y)))
    out = (res.value, res.tail_bound)
    if len(_PAIR_CACHE) >= _PAIR_CACHE_CAP:
        _PAIR_CACHE.clear()
    if hit is None or out[1] < hit[1]:
        _PAIR_CACHE[key] = out
    return out


def _pairwise_table(scheme: WeightScheme, spec: _CoordinateSpec,
                    tol_share: float) -> tuple[np.ndarray, np.ndarray]:
    """Kernel table built from certified per-pair evaluations.

    The per-pair tolerance splits the aggregate budget evenly over the
    weight mass, with a magnitude-scaled floor so evaluations far from
    the origin stay feasible; the certificate matrix records what each
    pair actually achieved.
    """
    uq = spec.unique
    ws = float(np.sum(spec.umass))
    even = 0.5 * tol_share / max(ws * ws, 1e-300)
    table = np.empty((uq.size, uq.size))
    cert = np.empty((uq.size, uq.size))
    for i in range(uq.size):
        xi = float(uq[i])
        for k in range(i + 1):
            yk = float(uq[k])
            mag = 1.0 + math.exp(min((xi * xi + yk * yk) / 4.0, 700.0))
            val, crt = _pair_kernel(scheme, spec.j, xi, yk,
                                    max(even, 1e-12 * mag))
            table[i, k] = table[k, i] = val
            cert[i, k] = cert[k, i] = crt
    return table, cert


def _series_table(scheme: WeightScheme, spec: _CoordinateSpec,
                  tol_share: float
                  ) -> tuple[np.ndarray, np.ndarray] | None:
    """Kernel table by truncated expansion, when the coordinate's weight
    decay lets an envelope bound on the remainder meet the budget.

    The remainder past degree ``M`` is at most the reciprocal-weight
    tail times the product of the two points' growth envelopes, so the
    weighted aggregate is the squared envelope mass times the tail.
    Returns ``None`` when no affordable degree reaches the budget."""
    uq = spec.unique
    xmax = float(np.max(np.abs(uq))) if uq.size else 0.0
    env = np.exp(np.minimum(uq * uq / 4.0, 350.0))
    env_mass = float(np.sum(spec.umass * env))
    guard = max(env_mass * env_mass, 1e-300)
    degree = int(math.ceil(_degree_floor(xmax)))
    while degree <= _DEGREE_CAP:
        if degree * uq.size * uq.size > 4e9:
            return None
        rt = recip_tail(scheme, degree, spec.j)
        if guard * rt <= 0.9 * tol_share:
            partial = _partial_table(scheme, spec.j, uq, degree)
            fuzz = (degree * 2e-15) * np.outer(env, env)
            cert = rt * np.outer(env, env) + fuzz
            return partial, cert
        degree *= 2
    return None


def _certified_table(scheme: WeightScheme, spec: _CoordinateSpec,
                     tol_share: float) -> tuple[np.ndarray, np.ndarray]:
    """Kernel table on a coordinate's unique values with an entrywise
    certificate whose weighted aggregate aims at ``tol_share``.

    Custom tables are finite series and exact.  Growth families use the
    truncated expansion when the remainder envelope meets the budget,
    and fall back to certified per-pair evaluations otherwise."""
    uq = spec.unique
    if spec.exact:
        if spec.j > len(scheme.recip_table):
            ones = np.ones((uq.size, uq.size))
            return ones, np.zeros_like(ones)
        row = np.asarray(scheme.recip_table[spec.j - 1], dtype=float)
        cols = hermite_columns(row.size - 1, uq)
        table = (cols * row) @ cols.T
        return table, 1e-14 * (1.0 + np.abs(table))
    got = _series_table(scheme, spec, tol_share)
    if got is not None:
        return got
    return _pairwise_table(scheme, spec, tol_share)


def _gram_with_certificates(parts: Iterable[tuple[np.ndarray, np.ndarray]]
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Entrywise product of certified factors with a propagated
    certificate: sum over factors of its certificate times the product of
    the other factors' absolute envelopes.

    Consumes the factors one at a time so the number of live matrices
    stays constant however many coordinates are active.
    """
    prod = None
    envelope = None
    cert = None
    for val, crt in parts:
        bound = np.abs(val) + crt
        if prod is None:
            prod = val.copy()
            envelope = bound
            cert = crt.copy()
        else:
            prod *= val
            cert *= bound
            cert += envelope * crt
            envelope = envelope * bound
    if prod is None:
        raise ValueError("need at least one factor")
    return prod, cert


def _quad_form_certified(w: np.ndarray, specs: Sequence[_CoordinateSpec],
                         scheme: WeightScheme,
                         tol_quad: float) -> tuple[float, float]:
    """Certified quadratic form of the weights in the product-kernel Gram
    matrix over the given coordinates."""
    share = tol_quad / max(len(specs), 1)

    def parts():
        for spec in specs:
            val, crt = _certified_table(scheme, spec, share)
            ix = np.ix_(spec.inverse, spec.inverse)
            yield val[ix], crt[ix]

    gram, gram_cert = _gram_with_certificates(parts())
    quad = float(w @ gram @ w)
    a_w = np.abs(w)
    quad_cert = float(a_w @ gram_cert @ a_w)
    quad_cert += (w.size * 2e-16) * float(a_w @ np.abs(gram) @ a_w)
    quad_cert += 1e-14 * (1.0 + abs(quad))
    return quad, quad_cert


def _interval_error(err_sq_lo: float, err_sq_hi: float) -> tuple[float, float]:
    lo = math.sqrt(max(err_sq_lo, 0.0))
    hi = math.sqrt(max(err_sq_hi, 0.0))
    value = math.sqrt(max(0.5 * (err_sq_lo + err_sq_hi), 0.0))
    return value, max(hi - value, value - lo) + 1e-15


def _certified_error(w: np.ndarray, specs: Sequence[_CoordinateSpec],
                     scheme: WeightScheme, tol: float, wsum: float,
                     scalar_lo: float,
                     scalar_hi: float) -> tuple[float, float]:
    """Interval for the worst-case error, tightening the Gram budget
    until the certificate meets the tolerance."""
    base = 1.0 - 2.0 * wsum
    if not specs:
        value, spread = _interval_error(base + wsum * wsum * scalar_lo,
                                        base + wsum * wsum * scalar_hi)
        if spread > tol:
            raise ToleranceError(
                f"error certificate {spread:.3e} exceeds tol {tol:.3e}",
                achieved=spread)
        return value, spread
    tol_quad = 0.5 * tol
    for _ in range(3):
        quad, quad_cert = _quad_form_certified(w, specs, scheme, tol_quad)
        corners = [(quad - quad_cert) * scalar_lo,
                   (quad - quad_cert) * scalar_hi,
                   (quad + quad_cert) * scalar_lo,
                   (quad + quad_cert) * scalar_hi]
        value, spread = _interval_error(base + min(corners),
                                        base + max(corners))
        if spread <= tol:
            return value, spread
        # a small error value doubles the leverage of the squared-error
        # certificate, so rescale the budget to the value just measured
        tol_quad = min(0.1 * tol_quad, 0.5 * tol * max(value, 1e-8))
    raise ToleranceError(
        f"error certificate {spread:.3e} exceeds tol {tol:.3e}",
        achieved=spread)


def tensor_slot_error(points: Sequence[Sequence[float]],
                      weights: Sequence[float],
                      scheme: WeightScheme,
                      tol: float = 1e-8) -> ErrorReport:
    """Certified worst-case integration error of a rule on the tensor
    product of copies of the first-coordinate space, one copy per point
    column."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    pts = np.asarray(points, dtype=float)
    w = np.asarray(weights, dtype=float)
    if pts.size == 0:
        return ErrorReport(err=1.0, tail_bound=0.0, cost=0)
    if pts.ndim != 2 or pts.shape[0] != w.size:
        raise ValueError("points must be a (count, arity) array matching weights")
    specs = [_coordinate_spec(scheme, 1, pts[:, slot], w)
             for slot in range(pts.shape[1])]
    wsum = float(math.fsum(w))
    value, spread = _certified_error(w, specs, scheme, tol, wsum, 1.0, 1.0)
    return ErrorReport(err=value, tail_bound=spread, cost=int(w.size))


_ANCHOR_FACTORS: dict[tuple, list] = {}


def _anchor_factor_list(scheme: WeightScheme, anchor: float,
                        upto: int) -> list:
    """Cached per-coordinate diagonal kernel values at the anchor."""
    key = (scheme, anchor)
    lst = _ANCHOR_FACTORS.setdefault(key, [])
    while len(lst) < upto:
        j = len(lst) + 1
        res = kernel_1d(scheme, anchor, anchor, j,
                        1e-12 * (1.0 + math.exp(min(anchor * anchor / 2.0,
                                                    700.0))))
        lst.append((res.value, res.tail_bound))
    return lst


@dataclass(frozen=True)
class FlatRule:
    """A single linear rule over anchored points: the flattened form of a
    decomposition method, including its constant term."""

    points: tuple[AnchoredPoint, ...]
    weights: tuple[float, ...]
    anchor: float

    def __post_init__(self):
        if len(self.points) != len(self.weights):
            raise ValueError("point and weight counts differ")
        for p in self.points:
            if p.anchor != self.anchor:
                raise ValueError("all points must share the rule's anchor")
        for w in self.weights:
            if not math.isfinite(w):
                raise ValueError("weights must be finite")

    @classmethod
    def zero(cls, anchor: float = 0.0) -> "FlatRule":
        return cls((), (), anchor)

    @property
    def is_zero(self) -> bool:
        return not self.points

    @property
    def cost(self) -> int:
        return len(self.points)

    def weight_total(self) -> float:
        return math.fsum(self.weights)


def worst_case_error_product(rule: FlatRule, scheme: WeightScheme,
                             tol: float = 1e-8) -> ErrorReport:
    """Certified exact worst-case error of a flat rule on the unit ball of
    the product-kernel space.

    The Gram form needs kernel values only on the finitely many coordinates
    where some point is active; every other coordinate contributes the same
    anchor-diagonal factor to all pairs, collected once as a scalar with a
    certified remainder of the infinite product.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    n = len(rule.points)
    if n == 0:
        return ErrorReport(err=1.0, tail_bound=0.0, cost=0)
    w = np.asarray(rule.weights, dtype=float)
    active = sorted({j for p in rule.points for j in p.active_indices})

    # shared scalar: anchor-diagonal factors on inactive coordinates
    a = rule.anchor
    j_head = active[-1] if active else 0
    if scheme.kind == "CUSTOM":
        j_head = max(j_head, len(scheme.recip_table))
    specs = [_coordinate_spec(
        scheme, j, np.array([p.coordinate(j) for p in rule.points]), w)
        for j in active]
    wsum = float(math.fsum(w))

    # the squared-error width the scalar's enclosure induces gets divided
    # by twice the error value, which is unknown upfront; anchor factors
    # are cheap and cached, so open with a quadratically tight tail target
    # and tighten further on failure
    target = max(1e-14, 0.02 * tol * min(tol, 1.0))
    for round_left in (2, 1, 0):
        while (_inactive_log_tail(scheme, a, j_head + 1) > target
               and j_head < _ANCHOR_FACTOR_CAP):
            j_head = min(j_head + max(16, j_head // 4), _ANCHOR_FACTOR_CAP)
        log_tail = _inactive_log_tail(scheme, a, j_head + 1)
        factors = _anchor_factor_list(scheme, a, j_head)
        scalar = 1.0
        scalar_rel = 0.0
        for j in range(1, j_head + 1):
            if j in active:
                continue
            val, crt = factors[j - 1]
            scalar *= val
            scalar_rel += crt / abs(val)
        scalar_lo = scalar * math.exp(-scalar_rel)
        scalar_hi = scalar * math.exp(scalar_rel + log_tail)
        try:
            value, spread = _certified_error(w, specs, scheme, tol, wsum,
                                             scalar_lo, scalar_hi)
        except ToleranceError:
            if round_left == 0 or log_tail <= 1e-14 \
                    or j_head >= _ANCHOR_FACTOR_CAP:
                raise
            target = max(1e-14, target * 1e-3)
            continue
        return ErrorReport(err=value, tail_bound=spread, cost=n)


# ---------------------------------------------------------------------------
# planning


@dataclass(frozen=True)
class ActiveTerm:
    """One selected variable subset: its sorted indices, the threshold
    score steering membership and budgets, and the evaluation budget."""

    indices: tuple[int, ...]
    score: float
    budget: int


@dataclass(frozen=True)
class MdmPlan:
    """A complete decomposition-method plan: tolerance, rate and threshold
    parameters, calibrated bound constants, the certified subset-series
    constant, and the selected active terms."""

    eps: float
    kappa: float
    delta: float
    anchor: float
    c0: float
    c1: float
    l_const: float
    active_set: tuple[ActiveTerm, ...]
    d_eps: int

    def __post_init__(self):
        for term in self.active_set:
            if term.budget < 1:
                raise ValueError("every active term needs a budget >= 1")
            if not term.indices or any(j < 1 for j in term.indices):
                raise ValueError("active terms need indices >= 1")
        want = max((len(t.indices) for t in self.active_set), default=0)
        if self.d_eps != want:
            raise ValueError(f"active dimension {self.d_eps} != {want}")

    @property
    def term_count(self) -> int:
        return len(self.active_set)


def mdm_plan(scheme: WeightScheme, eps: float, kappa: float, delta: float,
             anchor: float = 0.0, c0: float = 1.0,
             c1: float = 1.0) -> MdmPlan:
    """Select active variable subsets and their budgets for a tolerance.

    Membership uses the threshold rule score * L * c0^2 > eps^2 with
    score = c1^{2|u|} * (subset embedding weight)^delta and L the certified
    subset-series constant at power 1 - delta; budgets follow the closed
    formula floor((score * L * c0^2 / eps^2)^{1/(2 kappa)}).  Enumeration
    is a depth-first search over coordinates up to the largest index that
    any member can contain, pruned through the non-increasing per-coordinate
    factors.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if c0 <= 0 or c1 <= 0:
        raise ValueError("bound constants must be positive")
    if scheme.kind == "CUSTOM":
        raise SchemeError("planning needs a closed-form coordinate family")
    if scheme.single:
        raise SchemeError("planning needs a multi-coordinate scheme")
    growth = smoothness_growth(scheme)
    lo = 2.0 * kappa / growth if math.isfinite(growth) else 0.0
    hi = (growth - 1.0) / growth if math.isfinite(growth) else 1.0
    if not lo < delta < hi:
        raise SchemeError(
            f"delta = {delta:g} outside the admissible range "
            f"({lo:g}, {hi:g}) for kappa = {kappa:g}")

    l_const, _ = subset_weight_sum(scheme, 1.0 - delta)
    threshold = eps * eps / (l_const * c0 * c0)

    def coord_factor(j: int) -> float:
        return c1 * c1 * embedding_weight(scheme, j) ** delta

    # coordinates whose factor exceeds 1 can only help a score
    boosters = []
    j = 1
    while True:
        f = coord_factor(j)
        if f <= 1.0:
            break
        boosters.append(f)
        j += 1
        if j > _PLAN_COORD_CAP:
            raise SchemeError("threshold admits unboundedly many coordinates")
    boost_all = math.prod(boosters)
    j_cap = len(boosters)
    j = j_cap + 1
    while coord_factor(j) * boost_all > threshold:
        j_cap = j
        j += 1
        if j > _PLAN_COORD_CAP:
            raise SchemeError("threshold admits unboundedly many coordinates")

    factors = [coord_factor(i) for i in range(1, j_cap + 1)]
    suffix_boost = [1.0] * (j_cap + 1)
    for i in range(j_cap - 1, -1, -1):
        suffix_boost[i] = suffix_boost[i + 1] * max(1.0, factors[i])

    members: list[tuple[tuple[int, ...], float]] = []

    def search(pos: int, chosen: tuple[int, ...], score: float) -> None:
        if score * suffix_boost[pos] <= threshold:
            return
        if pos == j_cap:
            if chosen and score > threshold:
                members.append((chosen, score))
            return
        search(pos + 1, chosen + (pos + 1,), score * factors[pos])
        search(pos + 1, chosen, score)

    search(0, (), 1.0)
    members.sort(key=lambda m: (len(m[0]), m[0]))
    terms = []
    for u, score in members:
        budget = int((score * l_const * c0 * c0 / (eps * eps))
                     ** (1.0 / (2.0 * kappa)))
        terms.append(ActiveTerm(indices=u, score=score, budget=budget))
    d_eps = max((len(t.indices) for t in terms), default=0)
    return MdmPlan(eps=eps, kappa=kappa, delta=delta, anchor=anchor,
                   c0=c0, c1=c1, l_const=l_const,
                   active_set=tuple(terms), d_eps=d_eps)


# ---------------------------------------------------------------------------
# assembly and accounting


def mdm_assemble(plan: MdmPlan, scheme: WeightScheme,
                 family: Callable[[int], Rule1D] | None = None) -> FlatRule:
    """Flatten a plan into one linear rule over anchored points.

    Each active term's tensor rule is composed with the inclusion-exclusion
    stencil of its anchored component; coincident points merge by exact
    equality, and the constant term contributes the fully anchored point
    with weight 1.  Cancelled points (weight exactly zero) are dropped.
    """
    fam = default_rule_family(scheme) if family is None else family
    acc: dict[AnchoredPoint, float] = {
        AnchoredPoint((), plan.anchor): 1.0}
    for term in plan.active_set:
        rule = smolyak_rule(term.indices, term.budget, fam, plan.anchor)
        if rule.is_zero:
            continue
        for coords, w in zip(rule.points, rule.weights):
            xp = AnchoredPoint.make(tuple(zip(term.indices, coords)),
                                    plan.anchor)
            for sub, sign in anchored_component_points(term.indices, xp):
                acc[sub] = acc.get(sub, 0.0) + sign * w
    items = [(p, w) for p, w in acc.items() if w != 0.0]
    items.sort(key=lambda it: (it[0].active_count, it[0].active))
    return FlatRule(points=tuple(p for p, _ in items),
                    weights=tuple(w for _, w in items),
                    anchor=plan.anchor)


def mdm_cost(plan: MdmPlan, model: CostModel,
             rule: FlatRule) -> tuple[float, float]:
    """Evaluation cost of an assembled plan as (a-priori bound, exact).

    The bound charges the constant term plus budget * 2^size * price(size)
    per active term; the exact cost prices every flattened point by its
    active count.  Merging and stencil cancellation only remove
    evaluations, so exact <= bound.
    """
    bound = model.cost(0)
    for term in plan.active_set:
        size = len(term.indices)
        bound += term.budget * 2 ** size * model.cost(size)
    exact = math.fsum(model.cost(p.active_count) for p in rule.points)
    return bound, exact


@dataclass(frozen=True)
class MdmErrorBound:
    """A-priori error bound of a planned method: the bound itself, the sup
    of the budget log factors over active terms, the active and inactive
    squared contributions, and the certificate on the inactive series."""

    value: float
    log_factor_sup: float
    active_sq: float
    inactive_sq: float
    cert: float


def mdm_error_bound(plan: MdmPlan, scheme: WeightScheme,
                    family: Callable[[int], Rule1D] | None = None,
                    problem: str = "INT") -> MdmErrorBound:
    """Evaluate the a-priori worst-case error bound of a plan.

    Active terms carry the tensor-rule bound at their budget; terms whose
    budget can only afford the fully anchored evaluation fall back to the
    zero-algorithm factor, as does the certified series over all inactive
    subsets.  The total is scaled by the restriction-operator norm bound.
    ``problem`` selects the zero-algorithm factor: plain embedding constant
    for integration, with the first-degree weight correction for
    approximation.
    """
    if problem not in ("INT", "APPROX"):
        raise ValueError(f"problem must be INT or APPROX, got {problem!r}")
    fam = default_rule_family(scheme) if family is None else family
    c_up = embed_constant_upper(scheme, plan.anchor)
    zero_factor = c_up
    if problem == "APPROX":
        zero_factor *= max(1.0, math.sqrt(weight_recip(scheme, 1, 1)))
    origin_at_anchor = fam(0).nodes == (plan.anchor,)

    shell_counts: dict[int, int] = {}
    active_sq = 0.0
    log_sup = 1.0
    active_zero_sq = 0.0
    for term in plan.active_set:
        size = len(term.indices)
        gamma = embedding_weight_product(scheme, term.indices)
        zero_like = term.budget < size
        if not zero_like and origin_at_anchor:
            if size not in shell_counts:
                shell_counts[size] = _single_shell_count(size, fam)
            zero_like = term.budget < shell_counts[size]
        if zero_like:
            active_sq += gamma * zero_factor ** (2 * size)
        else:
            bound = smolyak_error_bound(size, term.budget, plan.kappa,
                                        plan.c0, plan.c1)
            active_sq += gamma * bound * bound
            log_sup = max(log_sup,
                          _budget_log_factor(size, term.budget, plan.kappa))
        active_zero_sq += gamma * zero_factor ** (2 * size)

    series, series_cert = subset_weight_sum(scheme, 1.0,
                                            zero_factor * zero_factor)
    inactive_sq = max(series - active_zero_sq, 0.0)
    norm = embed_norm_upper(scheme, plan.anchor)
    value = norm * math.sqrt(active_sq + inactive_sq + series_cert)
    return MdmErrorBound(value=value, log_factor_sup=log_sup,
                         active_sq=active_sq, inactive_sq=inactive_sq,
                         cert=series_cert)


# ---------------------------------------------------------------------------
# serialization


_PLAN_TAG = "hermspace-mdm-plan 1"
_FLAT_TAG = "hermspace-mdm-rule 1"


def plan_to_text(plan: MdmPlan, scheme_id: str = "-") -> str:
    """Versioned plain-text form of a plan: header, then one line per
    active term with its sorted indices, score, and budget."""
    if any(ch.isspace() for ch in scheme_id) or not scheme_id:
        raise ValueError("scheme_id must be a non-empty token without spaces")
    lines = [_PLAN_TAG, f"scheme {scheme_id}"]
    lines.append(f"params {plan.eps:.17g} {plan.kappa:.17g} "
                 f"{plan.delta:.17g} {plan.anchor:.17g}")
    lines.append(f"const {plan.c0:.17g} {plan.c1:.17g} {plan.l_const:.17g}")
    lines.append(f"dim {plan.d_eps}")
    lines.append(f"terms {len(plan.active_set)}")
    for term in plan.active_set:
        idx = ",".join(str(j) for j in term.indices)
        lines.append(f"{idx} {term.score:.17g} {term.budget}")
    return "\n".join(lines) + "\n"


def plan_from_text(text: str) -> MdmPlan:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != _PLAN_TAG:
        raise ValueError("unrecognized plan format")
    if len(lines) < 6 or not lines[1].startswith("scheme ") \
            or not lines[2].startswith("params ") \
            or not lines[3].startswith("const ") \
            or not lines[4].startswith("dim ") \
            or not lines[5].startswith("terms "):
        raise ValueError("malformed plan header")
    eps, kappa, delta, anchor = (float(v) for v in lines[2].split()[1:5])
    c0, c1, l_const = (float(v) for v in lines[3].split()[1:4])
    d_eps = int(lines[4].split()[1])
    count = int(lines[5].split()[1])
    if len(lines) != 6 + count:
        raise ValueError("term count does not match header")
    terms = []
    for ln in lines[6:]:
        idx_s, score_s, budget_s = ln.split()
        indices = tuple(int(v) for v in idx_s.split(","))
        terms.append(ActiveTerm(indices=indices, score=float(score_s),
                                budget=int(budget_s)))
    return MdmPlan(eps=eps, kappa=kappa, delta=delta, anchor=anchor,
                   c0=c0, c1=c1, l_const=l_const,
                   active_set=tuple(terms), d_eps=d_eps)


def flat_to_text(rule: FlatRule, scheme_id: str = "-") -> str:
    """Versioned plain-text form of a flat rule: header, then one line per
    point with its active pairs (or '-' for the fully anchored point) and
    weight."""
    if any(ch.isspace() for ch in scheme_id) or not scheme_id:
        raise ValueError("scheme_id must be a non-empty token without spaces")
    lines = [_FLAT_TAG, f"scheme {scheme_id}",
             f"anchor {rule.anchor:.17g}", f"count {len(rule.points)}"]
    for p, w in zip(rule.points, rule.weights):
        if p.active:
            pairs = ",".join(f"{j}:{x:.17g}" for j, x in p.active)
        else:
            pairs = "-"
        lines.append(f"{pairs} {w:.17g}")
    return "\n".join(lines) + "\n"


def flat_from_text(text: str) -> FlatRule:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != _FLAT_TAG:
        raise ValueError("unrecognized rule format")
    if len(lines) < 4 or not lines[1].startswith("scheme ") \
            or not lines[2].startswith("anchor ") \
            or not lines[3].startswith("count "):
        raise ValueError("malformed rule header")
    anchor = float(lines[2].split()[1])
    count = int(lines[3].split()[1])
    if len(lines) != 4 + count:
        raise ValueError("point count does not match header")
    points = []
    weights = []
    for ln in lines[4:]:
        pairs_s, w_s = ln.split()
        if pairs_s == "-":
            active: tuple = ()
        else:
            active = tuple(
                (int(tok.split(":")[0]), float(tok.split(":")[1]))
                for tok in pairs_s.split(","))
        points.append(AnchoredPoint(active, anchor))
        weights.append(float(w_s))
    return FlatRule(points=tuple(points), weights=tuple(weights),
                    anchor=anchor)
