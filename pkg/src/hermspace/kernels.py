"""Kernel evaluation, embedding constants, and domain membership.

Univariate kernels are k_j(x,y) = 1 + sum_{nu>=1} alpha_{nu,j}^{-1}
h_nu(x) h_nu(y); the product kernel multiplies them over all coordinates,
with every inactive coordinate pinned to the anchor.  Each evaluation
returns a certified enclosure.  Evaluation strategy by family:

* polynomial growth: generating-series quadrature (exact in the degree
  index; certificate from grid refinement),
* exponential growth with b=1: closed form,
* other exponential growth: direct series with an analytic degree tail,
* custom tables: exact finite sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _mehler
from .base import AnchoredPoint, KernelResult, SchemeError, ToleranceError
from .hermite import hermite_column
from .weights import (
    CoordinateSequence,
    WeightScheme,
    degree_series_coefficient,
    degree_series_sum,
    embedding_weight,
    exponent_power_tail,
    fourier_weight,
    recip_tail,
    weight_recip,
    weight_recips,
)

_LN2 = math.log(2.0)
_X_CAP = 37.0  # e^{x^2/2} overflows double precision shortly past this

IN = "IN"
OUT = "OUT"
UNDECIDED = "UNDECIDED"


def _check_point(v: float, name: str) -> float:
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"{name} must be finite, got {v}")
    if abs(v) > _X_CAP:
        raise ValueError(f"|{name}| > {_X_CAP} overflows the kernel range")
    return v


def _pg_kernel(scheme: WeightScheme, x: float, y: float, j: int,
               tol: float) -> KernelResult:
    r = scheme.r(j)
    prev = None
    best = math.inf
    for preset in (1, 2, 3, 4):
        g = _mehler.grid(preset)
        val, slack = _mehler.pg_series_integral(g, x, y, r)
        if prev is not None:
            cert = abs(val - prev) + slack + 1e-15 * (1.0 + abs(val))
            if cert <= tol:
                return KernelResult(value=1.0 + val, tail_bound=cert,
                                    terms_used=g.u.size)
            best = min(best, cert)
        prev = val
    raise ToleranceError(
        f"kernel certificate {best:.3e} exceeds tol {tol:.3e}", achieved=best)


def _series_kernel(scheme: WeightScheme, x: float, y: float, j: int,
                   tol: float) -> KernelResult:
    # direct degree series; the square bound h_nu^2 <= e^{x^2/2} turns the
    # scheme's analytic degree tail into a certificate
    half_exp = 0.5 * (math.exp(x * x / 2.0) + math.exp(y * y / 2.0))
    n = 16
    while True:
        tail = half_exp * recip_tail(scheme, n + 1, j)
        if tail <= tol:
            recs = weight_recips(scheme, n, j)
            prods = hermite_column(n, x) * hermite_column(n, y)
            val = 1.0 + math.fsum(recs[1:] * prods[1:])
            return KernelResult(value=val, tail_bound=tail, terms_used=n)
        if n >= 1 << 18:
            raise ToleranceError(
                f"degree tail {tail:.3e} exceeds tol {tol:.3e} at cap",
                achieved=tail)
        n *= 2


def kernel_1d(scheme: WeightScheme, x: float, y: float, j: int = 1,
              tol: float = 1e-9) -> KernelResult:
    """Certified value of the univariate kernel k_j(x, y)."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    x = _check_point(x, "x")
    y = _check_point(y, "y")
    if scheme.kind == "CUSTOM":
        if j < 1:
            raise ValueError(f"coordinate index must be >= 1, got {j}")
        if j > len(scheme.recip_table):
            return KernelResult(value=1.0, tail_bound=0.0, terms_used=0)
        row = np.asarray(scheme.recip_table[j - 1])
        n = row.size - 1
        if n == 0:
            return KernelResult(value=1.0, tail_bound=0.0, terms_used=0)
        prods = hermite_column(n, x) * hermite_column(n, y)
        val = 1.0 + math.fsum(row[1:] * prods[1:])
        return KernelResult(value=val, tail_bound=0.0, terms_used=n)
    if scheme.kind == "PG":
        # steep degree decay makes the direct series with its rigorous
        # tail both fast and tight; the quadrature route covers slow decay
        if scheme.r(j) >= 4.0:
            return _series_kernel(scheme, x, y, j, tol)
        return _pg_kernel(scheme, x, y, j, tol)
    if scheme.b(j) == 1.0:
        t = 2.0 ** (-scheme.r(j))
        val = _mehler.mehler_closed(t, x, y)
        return KernelResult(value=val, tail_bound=8e-16 * (1.0 + abs(val)),
                            terms_used=0)
    return _series_kernel(scheme, x, y, j, tol)


def _inactive_log_tail(scheme: WeightScheme, a: float, j_from: int) -> float:
    """Bound on sum_{j >= j_from} ln k_j(a, a) via k_j(a,a) - 1 <= e^{a^2/2} sigma_j."""
    if scheme.kind == "CUSTOM":
        return 0.0 if j_from > len(scheme.recip_table) else math.inf
    if scheme.single:
        if j_from > 1:
            return 0.0
        raise SchemeError("scheme is univariate; no product kernel")
    coeff = degree_series_coefficient(scheme)
    sig_tail = coeff * 2.0 ** (-scheme.r1) * exponent_power_tail(scheme, 1.0, j_from)
    return math.exp(a * a / 2.0) * sig_tail


def kernel_product(scheme: WeightScheme, xp: AnchoredPoint, yp: AnchoredPoint,
                   tol: float = 1e-8) -> KernelResult:
    """Certified value of the product kernel K(x, y) at two anchored points.

    All but finitely many factors equal k_j(a, a); factors up to the last
    active coordinate are evaluated directly and the remaining infinite
    product is enclosed through its logarithm.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if xp.anchor != yp.anchor:
        raise ValueError("anchored points must share the same anchor")
    a = _check_point(xp.anchor, "anchor")
    active = sorted(set(xp.active_indices) | set(yp.active_indices))
    j_head = active[-1] if active else 0
    if scheme.kind == "CUSTOM":
        j_head = max(j_head, len(scheme.recip_table))
    factor_tol = max(1e-15, min(1e-11, tol * 1e-5))

    prod = 1.0
    rel = 0.0
    terms = 0

    def take_factor(j: int, x: float, y: float) -> None:
        nonlocal prod, rel, terms
        res = kernel_1d(scheme, x, y, j, factor_tol)
        prod *= res.value
        terms = max(terms, res.terms_used)
        if abs(res.value) <= 2.0 * res.tail_bound:
            raise ToleranceError(
                f"factor at coordinate {j} not certified away from zero",
                achieved=res.tail_bound)
        rel += res.tail_bound / abs(res.value)

    for j in range(1, j_head + 1):
        take_factor(j, xp.coordinate(j), yp.coordinate(j))

    # extend over inactive coordinates until the remaining log-product is
    # negligible; all extension factors sit on the anchor diagonal
    j = j_head + 1
    log_tail = _inactive_log_tail(scheme, a, j)
    cap = j_head + 16384
    while log_tail > 0.3 * tol and j <= cap:
        take_factor(j, a, a)
        j += 1
        log_tail = _inactive_log_tail(scheme, a, j)
    if log_tail > 0.3 * tol:
        raise ToleranceError(
            f"inactive-coordinate tail {log_tail:.3e} still above tol at "
            f"coordinate cap {cap}", achieved=log_tail)

    lo = prod * math.exp(-rel) if prod >= 0 else prod * math.exp(rel + log_tail)
    hi = prod * math.exp(rel + log_tail) if prod >= 0 else prod * math.exp(-rel)
    value = 0.5 * (lo + hi)
    cert = 0.5 * (hi - lo) + 1e-15 * (1.0 + abs(value))
    if cert > tol:
        raise ToleranceError(
            f"product certificate {cert:.3e} exceeds tol {tol:.3e}", achieved=cert)
    return KernelResult(value=value, tail_bound=cert, terms_used=terms)


# ---------------------------------------------------------------------------
# embedding constants


def embed_constant_upper(scheme: WeightScheme, a: float = 0.0,
                         tol: float = 1e-9) -> float:
    """Per-coordinate embedding constant 1 + k_1(a, a)."""
    return 1.0 + kernel_1d(scheme, a, a, 1, tol).value


def embed_anchor_zero_bound(scheme: WeightScheme, n_terms: int = 50_000) -> float:
    """Closed upper bound 2 + sum_nu alpha_{2nu,1}^{-1} on the anchor-zero
    embedding constant (even-degree squares at the origin are <= 1)."""
    recs = weight_recips(scheme, 2 * n_terms, 1)
    total = 2.0 + float(np.sum(recs[2::2]))
    return total + recip_tail(scheme, 2 * n_terms + 1, 1)


def embed_norm_upper(scheme: WeightScheme, a: float = 0.0,
                     tol: float = 1e-8) -> float:
    """Product embedding constant prod_j (1 + gamma_j * cup)^{1/2} with
    cup = 1 + k_1(a,a); certified to tol."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    cup_tol = min(1e-10, tol * 1e-3)
    cup = embed_constant_upper(scheme, a, cup_tol)
    if scheme.kind == "CUSTOM":
        half_log = math.fsum(
            0.5 * math.log1p(embedding_weight(scheme, j) * cup)
            for j in range(1, len(scheme.recip_table) + 1))
        return math.exp(half_log)
    if scheme.single:
        return math.sqrt(1.0 + cup)
    half_log = 0.0
    gamma_sum = 0.0
    j = 1
    while True:
        g = embedding_weight(scheme, j)
        half_log += 0.5 * math.log1p(g * cup)
        gamma_sum += g
        j += 1
        log_tail = 0.5 * cup * exponent_power_tail(scheme, 1.0, j)
        if log_tail <= tol * 0.1 or j > 200_000:
            break
    # half-log enclosure: the omitted factors add at most log_tail, and the
    # cup certificate shifts each retained factor by at most gamma_j * cup_tol / 2
    spread = 0.5 * log_tail + 0.5 * (gamma_sum + 1.0) * cup_tol
    value = math.exp(half_log + 0.5 * log_tail)
    cert = value * (math.expm1(spread) + 1e-14)
    if cert > tol * max(1.0, value):
        raise ToleranceError(
            f"embedding product certificate {cert:.3e} exceeds tol", achieved=cert)
    return value


def embed_constant_lower(scheme: WeightScheme, a: float = 0.0) -> float:
    """Scale of the dominated linear kernel anchored at a."""
    return 1.0 / (1.0 + fourier_weight(scheme, 1, 1) + a * a)


def anchored_kernel_lower(scheme: WeightScheme, a: float, x: float, y: float) -> float:
    """The rank-one anchored kernel c(a) (x-a)(y-a) dominated by k_1."""
    return embed_constant_lower(scheme, a) * (x - a) * (y - a)


# ---------------------------------------------------------------------------
# domain membership


@dataclass(frozen=True)
class DomainVerdict:
    domain: str
    verdict: str
    partial_sum: float
    certificate: str


def _decide(power: dict, logsq: float, log: float) -> str:
    """Convergence of sum_j 2^{u_j} with u_j = sum_q P_q j^q
    + logsq (log2 j)^2 + log log2 j + O(1): CONV or DIV."""
    for q in sorted(power, reverse=True):
        if q > 0 and power[q] != 0.0:
            return "CONV" if power[q] < 0 else "DIV"
    if logsq != 0.0:
        return "CONV" if logsq < 0 else "DIV"
    return "CONV" if log < -1.0 else "DIV"


def _weight_parts(scheme: WeightScheme, mult: float):
    """Class contribution of 2^{-mult * r_j} as (power, log) pieces."""
    gen = scheme.r_gen
    if gen.form == "affine":
        return {1.0: -mult * gen.slope}, 0.0
    return {}, -mult * gen.slope


def _exp_parts(seq: CoordinateSequence):
    """Class contribution of e^{x_j^2/2} as (power, logsq) pieces."""
    if seq.form == "power" and seq.p > 0:
        return {2.0 * seq.p: seq.c * seq.c / (2.0 * _LN2)}, 0.0
    if seq.form == "log":
        return {}, seq.c * seq.c * _LN2 / 2.0
    return {}, 0.0


def _merge(*parts):
    power: dict = {}
    logsq = 0.0
    log = 0.0
    for p, lsq, lg in parts:
        for q, c in p.items():
            power[q] = power.get(q, 0.0) + c
        logsq += lsq
        log += lg
    return power, logsq, log


def _upper_class(scheme: WeightScheme, seq: CoordinateSequence) -> str:
    # term <= const * e^{x_j^2/2} * 2^{-r_j}
    wp, wl = _weight_parts(scheme, 1.0)
    ep, elsq = _exp_parts(seq)
    return _decide(*_merge((wp, 0.0, wl), (ep, elsq, 0.0)))


def _factor_log_coeff(seq: CoordinateSequence, nu: int) -> float | None:
    """log2-class coefficient of the polynomial envelope |x_j|^{2 nu};
    None when the envelope is not a valid lower bound for this nu."""
    if seq.form == "power":
        if seq.p > 0:
            return 2.0 * nu * seq.p
        return 0.0 if nu % 2 == 0 else 2.0 * nu * seq.p
    if seq.form == "log":
        return 0.0   # slowly varying factor, class-neutral
    # constant sequences: h_nu could sit on a zero; only nu=1 and even
    # degrees have a guaranteed nonzero floor
    return 0.0 if (nu == 1 or nu % 2 == 0) else None


def _lower_class_x(scheme: WeightScheme, seq: CoordinateSequence) -> str:
    # term >= alpha_{nu,j}^{-1} h_nu(x_j)^2 for any fixed nu
    verdict = "CONV"
    for nu in range(1, 7):
        fc = _factor_log_coeff(seq, nu)
        if fc is None:
            continue
        if scheme.kind == "PG":
            wp, wl = _weight_parts(scheme, math.log2(nu + 1.0))
        else:
            if nu > 1 and scheme.b_gen.form != "constant":
                continue   # degree exponent then grows with j
            wp, wl = _weight_parts(scheme, float(nu) ** scheme.b_gen.value(1))
        if _decide(*_merge((wp, 0.0, wl), ({}, 0.0, fc))) == "DIV":
            verdict = "DIV"
    return verdict


def _lower_class_xup(scheme: WeightScheme, seq: CoordinateSequence) -> str:
    # term >= gamma_j * alpha_{nu,1}^{-1} h_nu(x_j)^2; the degree weight is
    # j-independent so every fixed nu contributes only through gamma_j
    wp, wl = _weight_parts(scheme, 1.0)
    for nu in range(1, 7):
        fc = _factor_log_coeff(seq, nu)
        if fc is None:
            continue
        if _decide(*_merge((wp, 0.0, wl), ({}, 0.0, fc))) == "DIV":
            return "DIV"
    return "CONV"


def _partial_sum(scheme: WeightScheme, seq: CoordinateSequence, domain: str,
                 j_max: int) -> float:
    total = 0.0
    loose = 1e-6
    for j in range(1, j_max + 1):
        xj = seq.value(j)
        if abs(xj) > _X_CAP:
            return math.inf
        if domain == "X_DOWN":
            total += weight_recip(scheme, 1, j) * xj * xj
        elif domain == "X":
            try:
                total += kernel_1d(scheme, xj, xj, j, loose).value - 1.0
            except ToleranceError:
                total = math.nan
                break
        else:
            g = embedding_weight(scheme, j)
            if g == 0.0:
                continue
            try:
                total += g * (kernel_1d(scheme, xj, xj, 1, loose).value - 1.0)
            except ToleranceError:
                total = math.nan
                break
    return total


def domain_check(scheme: WeightScheme, seq: CoordinateSequence, domain: str,
                 j_max: int = 64) -> DomainVerdict:
    """Membership of the sequence x_j in one of the three product domains.

    ``domain`` is "X" (the product-kernel domain), "X_UP" (the common
    embedded domain, where the first-coordinate kernel is summed with the
    embedding weights), or "X_DOWN" (the linear-term domain).  Verdicts
    come from asymptotic comparison tests on the closed forms; the partial
    sum over j <= j_max is reported as a diagnostic.
    """
    if domain not in ("X", "X_UP", "X_DOWN"):
        raise ValueError(f"unknown domain {domain!r}")
    if j_max < 1:
        raise ValueError(f"j_max must be >= 1, got {j_max}")
    if scheme.single:
        raise SchemeError("product domains need a multivariate scheme")

    if seq.form == "constant" and seq.c == 0.0:
        return DomainVerdict(domain, IN, 0.0, "zero sequence equals the anchor")
    if scheme.kind == "CUSTOM":
        ps = _partial_sum(scheme, seq, domain, min(j_max, len(scheme.recip_table)))
        return DomainVerdict(domain, IN, ps,
                             "finite custom table: only finitely many nontrivial terms")

    if domain == "X_DOWN" or (domain == "X" and scheme.kind == "EG"
                              and scheme.b_gen.value(1) >= 1.0):
        # the linear-term series decides in both directions: for X_DOWN it
        # is the membership series itself, and for exponential growth with
        # b >= 1 the diagonal kernel satisfies the two-sided comparison
        # t x^2 / 2 <= M_t(x,x) - 1 <= C (t + t x^2) e^{t x^2} with
        # t = 2^{-r_j} -> 0, so membership in X reduces to the same series
        wp, wl = _weight_parts(scheme, 1.0)
        fc = 2.0 * seq.p if seq.form == "power" else 0.0
        cls = _decide(*_merge((wp, 0.0, wl), ({}, 0.0, fc)))
        verdict = IN if cls == "CONV" else OUT
        cert = "two-sided comparison on sum_j 2^(-r_j) x_j^2"
        return DomainVerdict(domain, verdict, _partial_sum(scheme, seq, domain, j_max), cert)

    upper = _upper_class(scheme, seq)
    if domain == "X":
        lower = _lower_class_x(scheme, seq)
    else:
        lower = _lower_class_xup(scheme, seq)
    if upper == "CONV":
        verdict, cert = IN, "upper comparison sum_j 2^(-r_j) e^(x_j^2/2) converges"
    elif lower == "DIV":
        verdict, cert = OUT, ("lower comparison through a fixed-degree term diverges")
    else:
        verdict, cert = UNDECIDED, "comparison tests inconclusive"
    return DomainVerdict(domain, verdict, _partial_sum(scheme, seq, domain, j_max), cert)
