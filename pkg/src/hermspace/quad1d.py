"""Univariate quadrature rules for Gaussian integration and their errors.

Rules live on the unit interval I = [-1/2, 1/2] (composite interpolatory
rules of a chosen local degree) or on the real line (the same rules copied
over integer shifts and damped by the standard normal density).  The worst
case integration error over the unit ball of a kernel space admits the
closed form

    err^2 = (1 - s_0)^2 + sum_{nu >= 1} alpha_nu^{-1} s_nu^2,
    s_nu  = sum_i w_i h_nu(x_i),

because the kernel integrates to one in each argument.  The evaluator
below computes this quantity with a certificate, switching between a
direct truncated sum with an analytic tail and a degree-mixture quadrature
that sums the whole series at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _mehler
from .base import ErrorReport, ToleranceError
from .weights import WeightScheme, recip_tail, weight_recips

_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)
_MAX_ABS_NODE = 37.0
_MERGE_DIGITS = 14
_BAND_EXPONENT = 80.0
_HEAD_TERMS = 40
_SERIES_CAP = 1 << 14


def _phi(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT_TWO_PI


@dataclass(frozen=True)
class Rule1D:
    """A quadrature rule: nodes, weights, and construction metadata.

    The empty rule (no nodes) is the zero algorithm.  Metadata fields are
    populated by the scheduled constructor and preserved through
    serialization; hand-built rules may leave them unset.
    """

    nodes: tuple
    weights: tuple
    smoothness: int | None = None
    shift_range: int | None = None
    shift_sizes: tuple | None = None
    delta: float | None = None

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise ValueError("node and weight counts differ")
        for value in self.nodes:
            if not math.isfinite(value):
                raise ValueError("nodes must be finite")
        for value in self.weights:
            if not math.isfinite(value):
                raise ValueError("weights must be finite")

    @classmethod
    def zero(cls) -> "Rule1D":
        return cls(nodes=(), weights=())

    @property
    def is_zero(self) -> bool:
        return len(self.nodes) == 0

    @property
    def cost(self) -> int:
        return len(self.nodes)

    def node_array(self) -> np.ndarray:
        return np.asarray(self.nodes, dtype=float)

    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


def _closed_newton_cotes(p: int):
    """Nodes and weights of the p-point closed interpolatory rule on [0, 1]."""
    if p < 2:
        raise ValueError("closed rules need at least two points")
    xs = np.linspace(0.0, 1.0, p)
    vmat = np.vander(xs, increasing=True).T
    moments = 1.0 / np.arange(1, p + 1)
    wts = np.linalg.solve(vmat, moments)
    if np.any(wts <= 0.0):
        raise ValueError(f"{p}-point closed rule has non-positive weights")
    return xs, wts


def base_rule(m: int, r: int) -> Rule1D:
    """Composite rule on [-1/2, 1/2] with about m nodes, local degree r - 1.

    The midpoint rule covers r = 1.  For 2 <= r <= 8 each panel carries the
    r-point closed interpolatory rule (positive weights, shared endpoints
    merged).  Larger r switches to per-panel Gauss-Legendre nodes, whose
    degree exceeds r - 1 and whose weights are always positive.
    """
    if m < 1 or r < 1:
        raise ValueError("need m >= 1 and r >= 1")
    if r == 1:
        edges = np.linspace(-0.5, 0.5, m + 1)
        nodes = 0.5 * (edges[:-1] + edges[1:])
        return Rule1D(tuple(nodes), tuple(np.full(m, 1.0 / m)))
    if r <= 8:
        local_x, local_w = _closed_newton_cotes(r)
        panels = max(1, int(round((m - 1) / (r - 1))))
    else:
        pts = (r + 1) // 2
        gx, gw = np.polynomial.legendre.leggauss(pts)
        local_x, local_w = 0.5 * (gx + 1.0), 0.5 * gw
        panels = max(1, int(round(m / pts)))
    edges = np.linspace(-0.5, 0.5, panels + 1)
    width = 1.0 / panels
    merged: dict = {}
    for left in edges[:-1]:
        for xi, wi in zip(local_x, local_w):
            key = round(left + xi * width, _MERGE_DIGITS)
            merged[key] = merged.get(key, 0.0) + wi * width
    keys = sorted(merged)
    return Rule1D(tuple(keys), tuple(merged[k] for k in keys))


def shift_schedule(n: int, r: int, delta: float = 0.2):
    """Shift range and per-shift sizes for a target of about n nodes.

    Returns (L, sizes) with sizes indexed by the shift -L+1 .. L-1; the
    range grows like sqrt(log n) and the sizes shrink under a Gaussian
    profile so that the total node count stays proportional to n.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if r < 1:
        raise ValueError("need r >= 1")
    if not 0.0 < delta < 0.25:
        raise ValueError("delta must lie strictly between 0 and 1/4")
    big_l = math.ceil(math.sqrt(r / delta * math.log(n)))
    sizes = tuple(
        math.ceil(n * math.exp(-delta * shift * shift / (2.0 * r)))
        for shift in range(-big_l + 1, big_l)
    )
    return big_l, sizes


def shifted_rule(big_l: int, sizes, r: int) -> Rule1D:
    """Copy base rules over integer shifts and damp by the normal density.

    Shift ell contributes the nodes of base_rule(sizes[ell], r) moved to
    I + ell with weights multiplied by the density at the node, giving a
    rule for integration against the standard Gaussian measure.
    """
    if big_l < 1:
        raise ValueError("need at least one shift")
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) != 2 * big_l - 1:
        raise ValueError("sizes must have one entry per shift")
    if any(s < 1 for s in sizes):
        raise ValueError("per-shift sizes must be positive")
    merged: dict = {}
    for index, shift in enumerate(range(-big_l + 1, big_l)):
        base = base_rule(sizes[index], r)
        for x, w in zip(base.nodes, base.weights):
            node = round(x + shift, _MERGE_DIGITS)
            merged[node] = merged.get(node, 0.0) + w * _phi(node)
    keys = sorted(merged)
    wts = tuple(merged[k] for k in keys)
    if any(w <= 0.0 for w in wts):
        raise ValueError("shifted rule produced non-positive weights")
    return Rule1D(tuple(keys), wts, smoothness=r, shift_range=big_l,
                  shift_sizes=sizes)


def scheduled_rule(n: int, r: int, delta: float = 0.2) -> Rule1D:
    """The full construction: schedule the shifts, then build the rule."""
    big_l, sizes = shift_schedule(n, r, delta)
    rule = shifted_rule(big_l, sizes, r)
    return Rule1D(rule.nodes, rule.weights, smoothness=r, shift_range=big_l,
                  shift_sizes=sizes, delta=delta)


# ---------------------------------------------------------------------------
# Worst-case integration error.


def _prepare(rule: Rule1D):
    """Sorted nodes with duplicates merged, as arrays."""
    merged: dict = {}
    for x, w in zip(rule.nodes, rule.weights):
        key = round(x, _MERGE_DIGITS)
        merged[key] = merged.get(key, 0.0) + w
    keys = sorted(merged)
    xs = np.asarray(keys, dtype=float)
    ws = np.asarray([merged[k] for k in keys], dtype=float)
    if xs.size and (abs(xs[0]) > _MAX_ABS_NODE or abs(xs[-1]) > _MAX_ABS_NODE):
        raise ValueError(f"nodes must satisfy |x| <= {_MAX_ABS_NODE}")
    return xs, ws


def _moment_sums(xs, ws, count):
    """s_nu = sum_i w_i h_nu(x_i) for nu = 0 .. count, streamed."""
    out = np.empty(count + 1)
    prev = np.ones_like(xs)
    out[0] = float(ws @ prev)
    if count == 0:
        return out
    cur = xs.copy()
    out[1] = float(ws @ cur)
    for nu in range(1, count):
        prev, cur = cur, (xs * cur - math.sqrt(nu) * prev) / math.sqrt(nu + 1.0)
        out[nu + 1] = float(ws @ cur)
    return out


def _log_w4(xs, ws):
    """log of sum_i |w_i| e^{x_i^2/4}, the growth envelope of every s_nu."""
    mask = ws != 0.0
    if not np.any(mask):
        return -math.inf
    vals = np.log(np.abs(ws[mask])) + 0.25 * xs[mask] ** 2
    top = float(np.max(vals))
    return top + math.log(float(np.sum(np.exp(vals - top))))


def _series_error_sq(xs, ws, scheme, j, terms, tail):
    s = _moment_sums(xs, ws, terms)
    recips = weight_recips(scheme, terms, j)
    core = (1.0 - s[0]) ** 2 + float(np.dot(recips[1:], s[1:] ** 2))
    return core, tail


def _series_plan(scheme, j, log_w4sq, target):
    """Smallest truncation length whose analytic tail certifies, or None."""
    n = 256
    while n <= _SERIES_CAP:
        log_tail = log_w4sq + math.log(recip_tail(scheme, n, j))
        if log_tail <= math.log(target):
            return n, math.exp(log_tail)
        n *= 2
    return None


@lru_cache(maxsize=None)
def _mixture_grid(preset: int):
    """Degree-mixture grid including the panel next to the endpoint."""
    u_min, _, pts = _mehler.PRESETS[preset]
    g = _mehler.grid(preset)
    gx, gw = np.polynomial.legendre.leggauss(pts)
    u0 = 0.5 * u_min * (gx + 1.0)
    w0 = 0.5 * u_min * gw
    u = np.concatenate([u0, g.u])
    w2u = np.concatenate([2.0 * u0 * w0, g.du_weight])
    neglog = np.concatenate([-np.log1p(-(u0 * u0)), g.neglog_t])
    u2 = u * u
    t = 1.0 - u2
    omt2 = u2 * (2.0 - u2)
    pref = omt2 ** -0.5
    c2 = (t * t) / (2.0 * omt2)
    am = t / (1.0 + t)
    return u, w2u, t, neglog, pref, c2, am


def _quadratic_form(xs, ws, pref, c2, am, bw, min_gap, w0_sq):
    """G(t) = sum_{i,l} w_i w_l M_t(x_i, x_l) with banded pair truncation.

    Pairs farther apart than the band width bw carry a Gaussian factor
    below e^{-_BAND_EXPONENT} relative to the largest possible product
    factor; the returned drop bound covers them.  When the band is
    narrower than the node spacing only the diagonal survives.  Row chunks
    are sized to the band so the evaluated windows stay thin.
    """
    n = xs.size
    drop = pref * math.exp(-_BAND_EXPONENT) * w0_sq
    if bw <= 0.5 * min_gap:
        total = float(np.dot(ws * ws, np.exp(am * xs * xs)))
        return pref * total, drop
    span = float(xs[-1] - xs[0]) if n > 1 else 0.0
    if n == 1 or bw >= span:
        d = xs[:, None] - xs[None, :]
        e = np.exp(am * np.outer(xs, xs) - c2 * d * d)
        return pref * float(ws @ e @ ws), 0.0
    chunk = max(32, int(n * bw / span) + 1)
    total = 0.0
    for i0 in range(0, n, chunk):
        i1 = min(n, i0 + chunk)
        xi = xs[i0:i1]
        j0 = int(np.searchsorted(xs, xi[0] - bw))
        j1 = int(np.searchsorted(xs, xi[-1] + bw))
        xj = xs[j0:j1]
        d = xi[:, None] - xj[None, :]
        e = np.exp(am * np.outer(xi, xj) - c2 * d * d)
        total += float(ws[i0:i1] @ e @ ws[j0:j1])
    return pref * total, drop


_SKIP_LOG = math.log(1e-19)
_TAIL_DEGREE_CAP = 100_000


def _mixture_error_sq(xs, ws, r, preset, log_w4sq):
    """err^2 through the degree-mixture identity at one grid preset.

    Degrees up to an adaptive cutoff are summed exactly from the moment
    sums; the matching polynomial is subtracted from the quadratic form.
    Grid nodes whose entire remaining integrand sits below the cutoff
    envelope are skipped, which confines the pairwise evaluation to the
    region where the Gaussian band is narrow.
    """
    u, w2u, t, neglog, pref, c2, am = _mixture_grid(preset)
    weight = w2u * neglog ** (r - 1.0) / math.gamma(r)
    xmax = max(abs(float(xs[0])), abs(float(xs[-1])))
    thresh = _BAND_EXPONENT + 0.5 * xmax * xmax
    span = float(xs[-1] - xs[0]) if xs.size > 1 else 0.0
    bw_target = max(2.0, span / 6.0)
    banded = c2 >= thresh / (bw_target * bw_target)

    # degree cutoff: past it, t^nu at every skipped node is below the
    # envelope threshold even after the growth factor of the moment sums
    cut = _HEAD_TERMS
    skipped = ~banded
    if np.any(skipped):
        lt_min = float(np.min(neglog[skipped]))
        one_minus_t = float(np.min(u[skipped])) ** 2
        need = (log_w4sq - math.log(one_minus_t) - _SKIP_LOG) / lt_min
        cut = int(min(max(cut, need), _TAIL_DEGREE_CAP))

    s = _moment_sums(xs, ws, cut)
    s0 = s[0]
    coeffs = s[1:] ** 2
    nus = np.arange(1, cut + 1, dtype=float)
    head = float(np.dot((nus + 1.0) ** (-r), coeffs))

    # certified bound on the skipped contribution
    skip_bound = 0.0
    if np.any(skipped):
        log_terms = log_w4sq + (cut + 1.0) * np.log(t[skipped]) \
            - np.log1p(-t[skipped]) + np.log(weight[skipped])
        skip_bound = float(np.sum(np.exp(np.minimum(log_terms, 60.0))))

    idx = np.nonzero(banded)[0]
    core = 0.0
    core_scale = 0.0
    drop_total = 0.0
    if idx.size:
        tb = t[idx]
        poly = np.zeros_like(tb)
        for coeff in coeffs[::-1]:
            poly = poly * tb + coeff
        poly *= tb
        gap = float(np.min(np.diff(xs))) if xs.size > 1 else math.inf
        w0_sq = float(np.sum(np.abs(ws))) ** 2
        for pos, i in enumerate(idx):
            bw = math.sqrt(thresh / c2[i])
            g_val, drop = _quadratic_form(xs, ws, pref[i], c2[i], am[i],
                                          bw, gap, w0_sq)
            core += weight[i] * (g_val - s0 * s0 - poly[pos])
            core_scale += weight[i] * abs(g_val - s0 * s0 - poly[pos])
            drop_total += weight[i] * drop
    err_sq = (1.0 - s0) ** 2 + head + core
    scale = (1.0 - s0) ** 2 + head + core_scale
    noise = 3e-15 * scale
    return err_sq, drop_total + skip_bound + noise


def _mixture_error(xs, ws, r, tol, log_w4sq):
    cache: dict = {}

    def at(preset):
        if preset not in cache:
            cache[preset] = _mixture_error_sq(xs, ws, r, preset, log_w4sq)
        return cache[preset]

    best = None
    for lo, hi in ((1, 2), (2, 3), (3, 4)):
        v_lo, _ = at(lo)
        v_hi, extra_hi = at(hi)
        cert = abs(v_lo - v_hi) + extra_hi
        if best is None or cert < best[1]:
            best = (v_hi, cert)
        if _error_interval(v_hi, cert)[1] <= tol:
            return v_hi, cert
    return best


def _error_interval(err_sq, cert):
    """(err, half-width) for the reported error given a bracket on err^2."""
    base = max(err_sq, 0.0)
    err = math.sqrt(base)
    hi = math.sqrt(base + cert)
    lo = math.sqrt(max(base - cert, 0.0))
    return err, max(hi - err, err - lo)


def worst_case_error_int(rule: Rule1D, scheme: WeightScheme, j: int = 1,
                         tol: float = 1e-9) -> ErrorReport:
    """Certified worst-case Gaussian-integration error of a rule.

    The zero rule scores exactly one.  Finite coordinate tables are summed
    exactly.  Rapidly decaying degree weights use the truncated sum with
    the growth-envelope tail; slowly decaying polynomial weights go
    through the degree-mixture quadrature with grid-refinement
    certificates.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if rule.is_zero:
        return ErrorReport(err=1.0, tail_bound=0.0, cost=0)
    xs, ws = _prepare(rule)
    cost = rule.cost
    if scheme.kind == "CUSTOM":
        if j < 1:
            raise ValueError(f"coordinate index must be >= 1, got {j}")
        row = scheme.recip_table[j - 1] if j <= len(scheme.recip_table) else (1.0,)
        terms = len(row) - 1
        s = _moment_sums(xs, ws, terms)
        rec = np.asarray(row, dtype=float)
        err_sq = (1.0 - s[0]) ** 2 + float(np.dot(rec[1:], s[1:] ** 2))
        err, spread = _error_interval(err_sq, 1e-15 * (1.0 + abs(err_sq)))
        return ErrorReport(err=err, tail_bound=spread, cost=cost)

    log_w4sq = 2.0 * _log_w4(xs, ws)
    target = 0.25 * tol * tol

    use_series = not (scheme.kind == "PG" and scheme.r(j) < 4.0)
    plan = _series_plan(scheme, j, log_w4sq, target) if use_series else None

    if plan is not None:
        terms, tail = plan
        err_sq, tail = _series_error_sq(xs, ws, scheme, j, terms, tail)
        cert = tail + 1e-15 * (1.0 + abs(err_sq))
    elif scheme.kind == "PG":
        err_sq, cert = _mixture_error(xs, ws, scheme.r(j), tol, log_w4sq)
    else:
        log_achieved = log_w4sq + math.log(recip_tail(scheme, _SERIES_CAP, j))
        raise ToleranceError(
            "series tail does not certify at the requested tolerance",
            achieved=math.exp(min(log_achieved, 700.0)))

    if err_sq < -10.0 * max(cert, tol * tol):
        raise ToleranceError("error form came out negative beyond roundoff",
                             achieved=abs(err_sq))
    err, spread = _error_interval(err_sq, cert)
    if spread > tol:
        raise ToleranceError("certificate exceeds the requested tolerance",
                             achieved=spread)
    return ErrorReport(err=err, tail_bound=spread, cost=cost)


# ---------------------------------------------------------------------------
# Serialization.

_FORMAT_TAG = "hermspace-rule 1"


def rule_to_text(rule: Rule1D, scheme_id: str = "-") -> str:
    """Versioned plain-text form: header, then one node/weight pair per line."""
    if any(ch.isspace() for ch in scheme_id) or not scheme_id:
        raise ValueError("scheme_id must be a non-empty token without spaces")
    lines = [_FORMAT_TAG, f"scheme {scheme_id}"]
    smooth = "-" if rule.smoothness is None else str(rule.smoothness)
    rng = "-" if rule.shift_range is None else str(rule.shift_range)
    delta = "-" if rule.delta is None else f"{rule.delta:.17g}"
    sizes = "-" if rule.shift_sizes is None else \
        ",".join(str(s) for s in rule.shift_sizes)
    lines.append(f"meta {smooth} {rng} {delta} {sizes}")
    lines.append(f"count {len(rule.nodes)}")
    for x, w in zip(rule.nodes, rule.weights):
        lines.append(f"{x:.17g} {w:.17g}")
    return "\n".join(lines) + "\n"


def rule_from_text(text: str) -> Rule1D:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != _FORMAT_TAG:
        raise ValueError("unrecognized rule format")
    if len(lines) < 4 or not lines[1].startswith("scheme ") \
            or not lines[2].startswith("meta ") or not lines[3].startswith("count "):
        raise ValueError("malformed rule header")
    smooth_s, rng_s, delta_s, sizes_s = lines[2].split()[1:5]
    count = int(lines[3].split()[1])
    if len(lines) != 4 + count:
        raise ValueError("node count does not match header")
    nodes, weights = [], []
    for ln in lines[4:]:
        xs, ws = ln.split()
        nodes.append(float(xs))
        weights.append(float(ws))
    return Rule1D(
        tuple(nodes), tuple(weights),
        smoothness=None if smooth_s == "-" else int(smooth_s),
        shift_range=None if rng_s == "-" else int(rng_s),
        shift_sizes=None if sizes_s == "-" else
        tuple(int(s) for s in sizes_s.split(",")),
        delta=None if delta_s == "-" else float(delta_s),
    )
