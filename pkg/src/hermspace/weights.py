"""Fourier-weight schemes and derived scheme arithmetic.

A scheme assigns positive, non-decreasing-in-degree Fourier weights
alpha_{nu,j} to every (degree nu, coordinate j).  Two closed-form families
are supported, polynomial growth

    alpha_{nu,j} = (nu+1)^{r_j}

and (sub-)exponential growth

    alpha_{nu,j} = 2^{r_j * nu^{b_j}},

plus finite custom tables.  The exponent sequences r_j (and b_j) come from
closed-form generators so that summability checks, embedding weights, and
tail bounds are all decidable rather than heuristic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, zeta

from .base import SchemeError

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class SequenceForm:
    """Closed-form scalar sequence over coordinate indices j >= 1.

    Forms: ``constant`` -> base; ``affine`` -> base + slope*(j-1);
    ``log`` -> base + slope*(log2(j+offset) - log2(1+offset)).  The log
    form evaluates to ``base`` at j=1 for every offset.
    """

    form: str
    base: float
    slope: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        if self.form not in ("constant", "affine", "log"):
            raise ValueError(f"unknown sequence form {self.form!r}")
        if self.form == "log" and self.offset < 0:
            raise ValueError("log form needs offset >= 0")

    def value(self, j: int) -> float:
        if j < 1:
            raise ValueError(f"coordinate index must be >= 1, got {j}")
        if self.form == "constant":
            return self.base
        if self.form == "affine":
            return self.base + self.slope * (j - 1)
        return self.base + self.slope * (math.log2(j + self.offset)
                                         - math.log2(1 + self.offset))

    def values(self, js: np.ndarray) -> np.ndarray:
        js = np.asarray(js, dtype=float)
        if self.form == "constant":
            return np.full_like(js, self.base)
        if self.form == "affine":
            return self.base + self.slope * (js - 1.0)
        return self.base + self.slope * (np.log2(js + self.offset)
                                         - math.log2(1 + self.offset))

    def describe(self) -> str:
        if self.form == "constant":
            return f"{self.base:g}"
        if self.form == "affine":
            return f"{self.base:g}+{self.slope:g}*(j-1)"
        if self.offset == 0:
            return f"{self.base:g}+{self.slope:g}*log2(j)"
        return (f"{self.base:g}+{self.slope:g}*(log2(j+{self.offset:g})"
                f"-log2(1+{self.offset:g}))")


@dataclass(frozen=True)
class CoordinateSequence:
    """Closed-form real sequence x_j used in domain-membership checks.

    Forms: ``constant`` -> c; ``power`` -> c * j^p; ``log`` -> c * ln(j+1).
    """

    form: str
    c: float
    p: float = 0.0

    def __post_init__(self):
        if self.form not in ("constant", "power", "log"):
            raise ValueError(f"unknown sequence form {self.form!r}")

    def value(self, j: int) -> float:
        if j < 1:
            raise ValueError(f"coordinate index must be >= 1, got {j}")
        if self.form == "constant":
            return self.c
        if self.form == "power":
            return self.c * j ** self.p
        return self.c * math.log(j + 1.0)

    def describe(self) -> str:
        if self.form == "constant":
            return f"{self.c:g}"
        if self.form == "power":
            return f"{self.c:g}*j^{self.p:g}"
        return f"{self.c:g}*ln(j+1)"


def _check_exponent_summable(gen: SequenceForm, what: str) -> None:
    # Sum_j 2^{-q_j} must be finite for the exponent sequence q_j.
    if gen.form == "constant":
        raise SchemeError(f"constant {what} sequence makes sum 2^(-{what}_j) diverge")
    if gen.slope <= 0:
        raise SchemeError(f"{what} sequence must be strictly increasing")
    if gen.form == "log" and gen.slope <= 1:
        raise SchemeError(f"log-form {what} needs slope > 1 for sum 2^(-{what}_j) < inf")


@dataclass(frozen=True)
class WeightScheme:
    """A Fourier-weight assignment (nu, j) -> alpha_{nu,j}.

    Build instances with the ``pg``/``eg``/``pg_single``/``eg_single``/
    ``custom`` constructors; they validate the monotonicity and summability
    conditions every downstream formula assumes.  ``single`` schemes model a
    stand-alone univariate space (weaker exponent constraints) and reject
    multivariate use.
    """

    kind: str                              # "PG" | "EG" | "CUSTOM"
    r_gen: SequenceForm | None = None
    b_gen: SequenceForm | None = None
    single: bool = False
    recip_table: tuple[tuple[float, ...], ...] | None = None  # [j-1][nu] = 1/alpha

    # -- constructors ---------------------------------------------------

    @staticmethod
    def pg(r1: float, *, affine_slope: float | None = None,
           log_slope: float | None = None, log_offset: float = 0.0) -> "WeightScheme":
        if r1 <= 1:
            raise SchemeError(f"polynomial-growth family needs r_1 > 1, got {r1}")
        if (affine_slope is None) == (log_slope is None):
            raise SchemeError("give exactly one of affine_slope, log_slope")
        if affine_slope is not None:
            gen = SequenceForm("affine", r1, affine_slope)
        else:
            gen = SequenceForm("log", r1, log_slope, log_offset)
        _check_exponent_summable(gen, "r")
        return WeightScheme("PG", r_gen=gen)

    @staticmethod
    def eg(r1: float, b1: float, *, r_affine_slope: float | None = None,
           r_log_slope: float | None = None, r_log_offset: float = 0.0,
           b_slope: float = 0.0) -> "WeightScheme":
        if r1 <= 0 or b1 <= 0:
            raise SchemeError("exponential-growth family needs r_1 > 0 and b_1 > 0")
        if (r_affine_slope is None) == (r_log_slope is None):
            raise SchemeError("give exactly one of r_affine_slope, r_log_slope")
        if r_affine_slope is not None:
            r_gen = SequenceForm("affine", r1, r_affine_slope)
        else:
            r_gen = SequenceForm("log", r1, r_log_slope, r_log_offset)
        _check_exponent_summable(r_gen, "r")
        if b_slope < 0:
            raise SchemeError("b sequence must be non-decreasing")
        b_gen = SequenceForm("constant" if b_slope == 0 else "affine", b1, b_slope)
        return WeightScheme("EG", r_gen=r_gen, b_gen=b_gen)

    @staticmethod
    def pg_single(r: float) -> "WeightScheme":
        # univariate space of finite smoothness r; the full-family constraint
        # r > 1 is not needed when only coordinate 1 exists
        if r <= 0.5:
            raise SchemeError(f"univariate polynomial growth needs r > 1/2, got {r}")
        return WeightScheme("PG", r_gen=SequenceForm("constant", r), single=True)

    @staticmethod
    def eg_single(r: float, b: float) -> "WeightScheme":
        if r <= 0 or b <= 0:
            raise SchemeError("univariate exponential growth needs r > 0 and b > 0")
        return WeightScheme("EG", r_gen=SequenceForm("constant", r),
                            b_gen=SequenceForm("constant", b), single=True)

    @staticmethod
    def custom(recip_rows) -> "WeightScheme":
        """Finite table of weight reciprocals; ``recip_rows[j-1][nu]`` is
        1/alpha_{nu,j}.  Outside the table alpha is infinite (reciprocal 0)."""
        rows = tuple(tuple(float(v) for v in row) for row in recip_rows)
        if not rows:
            raise SchemeError("custom table needs at least one coordinate row")
        for idx, row in enumerate(rows):
            if not row or row[0] != 1.0:
                raise SchemeError(f"row {idx + 1}: reciprocal at degree 0 must be 1")
            if any(v < 0 or not math.isfinite(v) for v in row):
                raise SchemeError(f"row {idx + 1}: reciprocals must be finite and >= 0")
            if any(row[k + 1] > row[k] for k in range(len(row) - 1)):
                raise SchemeError(f"row {idx + 1}: weights must be non-decreasing in degree")
        return WeightScheme("CUSTOM", recip_table=rows)

    # -- coordinate bookkeeping -----------------------------------------

    def _check_coordinate(self, j: int) -> None:
        if j < 1:
            raise ValueError(f"coordinate index must be >= 1, got {j}")
        if self.single and j != 1:
            raise SchemeError("scheme is univariate; only coordinate 1 exists")

    def r(self, j: int) -> float:
        self._check_coordinate(j)
        return self.r_gen.value(j)

    def b(self, j: int) -> float:
        self._check_coordinate(j)
        return self.b_gen.value(j)

    @property
    def r1(self) -> float:
        return self.r_gen.value(1)

    def scheme_id(self) -> str:
        if self.kind == "CUSTOM":
            return (f"CUSTOM[{len(self.recip_table)}x"
                    f"{max(len(r) for r in self.recip_table)}]")
        tag = "1" if self.single else ""
        if self.kind == "PG":
            return f"PG{tag}[r={self.r_gen.describe()}]"
        return f"EG{tag}[r={self.r_gen.describe()},b={self.b_gen.describe()}]"


# ---------------------------------------------------------------------------
# weight values


def fourier_weight(scheme: WeightScheme, nu: int, j: int = 1) -> float:
    """alpha_{nu,j}; returns +inf on overflow or outside a custom table."""
    if nu < 0:
        raise ValueError(f"degree must be >= 0, got {nu}")
    if nu == 0:
        scheme._check_coordinate(j)
        return 1.0
    if scheme.kind == "CUSTOM":
        if j < 1:
            raise ValueError(f"coordinate index must be >= 1, got {j}")
        rec = weight_recip(scheme, nu, j)
        return math.inf if rec == 0.0 else 1.0 / rec
    if scheme.kind == "PG":
        try:
            return (nu + 1.0) ** scheme.r(j)
        except OverflowError:
            return math.inf
    exponent = scheme.r(j) * float(nu) ** scheme.b(j)
    try:
        return 2.0 ** exponent
    except OverflowError:
        return math.inf


def weight_recip(scheme: WeightScheme, nu: int, j: int = 1) -> float:
    """1/alpha_{nu,j}; exact 0 where the weight is infinite."""
    if nu < 0:
        raise ValueError(f"degree must be >= 0, got {nu}")
    if nu == 0:
        scheme._check_coordinate(j)
        return 1.0
    if scheme.kind == "CUSTOM":
        if j < 1:
            raise ValueError(f"coordinate index must be >= 1, got {j}")
        if j > len(scheme.recip_table):
            return 0.0
        row = scheme.recip_table[j - 1]
        return row[nu] if nu < len(row) else 0.0
    if scheme.kind == "PG":
        return (nu + 1.0) ** (-scheme.r(j))
    return 2.0 ** (-scheme.r(j) * float(nu) ** scheme.b(j))


def weight_recips(scheme: WeightScheme, nu_max: int, j: int = 1) -> np.ndarray:
    """Vector (1/alpha_{0,j}, ..., 1/alpha_{nu_max,j})."""
    if nu_max < 0:
        raise ValueError(f"degree must be >= 0, got {nu_max}")
    if scheme.kind == "CUSTOM":
        if j < 1:
            raise ValueError(f"coordinate index must be >= 1, got {j}")
        out = np.zeros(nu_max + 1)
        out[0] = 1.0
        if j <= len(scheme.recip_table):
            row = np.asarray(scheme.recip_table[j - 1])
            k = min(nu_max + 1, row.size)
            out[:k] = row[:k]
        return out
    nus = np.arange(nu_max + 1, dtype=float)
    if scheme.kind == "PG":
        return (nus + 1.0) ** (-scheme.r(j))
    out = np.exp2(-scheme.r(j) * nus ** scheme.b(j))
    out[0] = 1.0
    return out


# ---------------------------------------------------------------------------
# tail bounds for the degree series


def recip_tail(scheme: WeightScheme, n_from: int, j: int = 1) -> float:
    """Upper bound on sum_{nu >= n_from} 1/alpha_{nu,j} (n_from >= 1).

    Polynomial growth: integral comparison, needs r_j > 1.  Exponential
    growth: geometric domination for b=1, incomplete-gamma integral bound
    otherwise.  Custom tables: exact remaining mass.
    """
    if n_from < 1:
        raise ValueError(f"tail start must be >= 1, got {n_from}")
    if scheme.kind == "CUSTOM":
        if j < 1:
            raise ValueError(f"coordinate index must be >= 1, got {j}")
        if j > len(scheme.recip_table):
            return 0.0
        row = scheme.recip_table[j - 1]
        return float(sum(row[n_from:]))
    if scheme.kind == "PG":
        r = scheme.r(j)
        if r <= 1:
            raise SchemeError(f"degree series not summable for r = {r} <= 1")
        # first term plus integral comparison over the decreasing remainder
        np1 = float(n_from) + 1.0
        return np1 ** (-r) + np1 ** (1.0 - r) / (r - 1.0)
    r, b = scheme.r(j), scheme.b(j)
    if b == 1.0:
        q = 2.0 ** (-r)
        return q ** n_from / (1.0 - q)
    # 2^{-r n^b} + integral_n^inf 2^{-r v^b} dv, substituting w = (r ln2) v^b
    s = r * _LN2
    lo = s * float(n_from) ** b
    first = 2.0 ** (-r * float(n_from) ** b)
    return first + float(gammaincc(1.0 / b, lo) * math.gamma(1.0 / b)
                         / (b * s ** (1.0 / b)))


def degree_series_sum(scheme: WeightScheme, j: int = 1,
                      rel_tol: float = 1e-12, cap: int = 2_000_000) -> tuple[float, float]:
    """Certified sigma_j = sum_{nu>=1} 1/alpha_{nu,j} as (value, tail_bound)."""
    total = 0.0
    n = 1
    block = 256
    while n <= cap:
        recs = weight_recips(scheme, min(n + block - 1, cap), j)[n:]
        total += float(recs.sum())
        n += recs.size
        tail = recip_tail(scheme, n, j)
        if tail <= rel_tol * max(total, 1.0):
            return total, tail
        block = min(2 * block, 1 << 16)
    return total, recip_tail(scheme, n, j)


def _zeta_minus_low(r: float) -> float:
    # zeta(r) - 1 - 2^{-r} = sum_{m>=3} m^{-r}
    return float(zeta(r, 3))


def degree_series_coefficient(scheme: WeightScheme) -> float:
    """Constant C with sigma_j <= C * 2^{-r_j} for every coordinate j."""
    r1 = scheme.r1
    if scheme.kind == "PG":
        if r1 <= 1:
            raise SchemeError(f"degree series not summable for r_1 = {r1} <= 1")
        # (nu+1)^{-r_j} <= (nu+1)^{-r_1} 2^{-(r_j-r_1)} for nu >= 1
        return 1.0 + 2.0 ** r1 * _zeta_minus_low(r1)
    if scheme.kind == "EG":
        b1 = scheme.b_gen.value(1)
        extra = 0.0
        nu = 2
        while True:
            t = 2.0 ** (-r1 * (float(nu) ** b1 - 1.0))
            extra += t
            if t < 1e-17 * max(extra, 1.0) or nu > 10_000:
                # geometric remainder: exponent gaps only grow with nu
                ratio = 2.0 ** (-r1 * (float(nu + 1) ** b1 - float(nu) ** b1))
                extra += t * ratio / (1.0 - ratio)
                break
            nu += 1
        return 1.0 + extra
    raise SchemeError("no closed-form coefficient for custom tables")


def exponent_power_tail(scheme: WeightScheme, q: float, j_from: int) -> float:
    """Upper bound on sum_{j >= j_from} 2^{-q*(r_j - r_1)} for q > 0."""
    if q <= 0:
        raise ValueError(f"power must be positive, got {q}")
    if scheme.kind == "CUSTOM":
        raise SchemeError("no closed-form coordinate tail for custom tables")
    if scheme.single:
        return 1.0 if j_from <= 1 else 0.0
    gen = scheme.r_gen
    if gen.form == "affine":
        ratio = 2.0 ** (-q * gen.slope)
        first = 2.0 ** (-q * gen.slope * (j_from - 1))
        return first / (1.0 - ratio)
    # log form: 2^{-q(r_j-r_1)} = ((1+o)/(j+o))^{q s}
    s, o = gen.slope, gen.offset
    e = q * s
    if e <= 1:
        raise SchemeError(f"coordinate series needs q*slope > 1, got {e}")
    scale = (1.0 + o) ** e
    # leading term plus integral comparison over the decreasing remainder
    head = scale * float(j_from + o) ** (-e)
    integral = scale * float(j_from + o) ** (1.0 - e) / (e - 1.0)
    return head + integral


def embedding_weight(scheme: WeightScheme, j: int) -> float:
    """gamma_j = sup_nu alpha_{nu,1}/alpha_{nu,j}; closed form 2^{r_1 - r_j}
    for the growth families, brute-force table sup for custom schemes."""
    if scheme.kind == "CUSTOM":
        if j < 1:
            raise ValueError(f"coordinate index must be >= 1, got {j}")
        base = scheme.recip_table[0]
        if j > len(scheme.recip_table):
            return 0.0
        row = scheme.recip_table[j - 1]
        best = 0.0
        for nu in range(1, max(len(row), len(base))):
            rj = row[nu] if nu < len(row) else 0.0
            r1 = base[nu] if nu < len(base) else 0.0
            if r1 == 0.0:
                if rj > 0.0:
                    raise SchemeError("unbounded weight ratio in custom table")
                continue
            best = max(best, rj / r1)
        return best
    return 2.0 ** (scheme.r1 - scheme.r(j))


def embedding_power_sum(scheme: WeightScheme, q: float,
                        rel_tol: float = 1e-12) -> tuple[float, float]:
    """Certified sum_{j>=1} gamma_j^q as (partial value, tail bound)."""
    if scheme.kind == "CUSTOM":
        vals = [embedding_weight(scheme, j) ** q
                for j in range(1, len(scheme.recip_table) + 1)]
        return float(sum(vals)), 0.0
    if scheme.single:
        return 1.0, 0.0
    total = 0.0
    j = 1
    block = 64
    while True:
        js = np.arange(j, j + block)
        rs = scheme.r_gen.values(js)
        total += float(np.sum(np.exp2(-q * (rs - scheme.r1))))
        j += block
        tail = exponent_power_tail(scheme, q, j)
        if tail <= rel_tol * max(total, 1.0) or j > 2_000_000:
            return total, tail
        block = min(2 * block, 1 << 16)


def _log_product_tail(scheme: WeightScheme, q: float, scale: float,
                      j_from: int) -> tuple[float, float]:
    """Certified sum_{j >= j_from} ln(1 + scale * gamma_j^q) as (value, cert).

    Expands the logarithm into a power series whose coefficient sums have
    closed forms (Hurwitz zeta for log-form exponents, geometric sums for
    affine ones); the caller must ensure scale * gamma_{j_from}^q < 1/2 so
    that the series converges at a certifiable rate.
    """
    gen = scheme.r_gen
    first = scale * 2.0 ** (-q * (gen.value(j_from) - scheme.r1))
    if first == 0.0:
        return 0.0, 0.0
    if first >= 0.5:
        raise ValueError("series tail must start past the geometric knee")
    total = 0.0
    fuzz = 0.0
    term = math.inf
    for k in range(1, 201):
        if gen.form == "affine":
            g = 2.0 ** (-q * gen.slope * k)
            power_sum = g ** (j_from - 1) / (1.0 - g)
        else:
            e = q * gen.slope * k
            power_sum = (1.0 + gen.offset) ** e * float(
                zeta(e, j_from + gen.offset))
        term = (-1.0) ** (k + 1) * scale ** k / k * power_sum
        total += term
        fuzz += 1e-14 * abs(term)
        if abs(term) <= 1e-18 * max(abs(total), 1e-300):
            break
    remainder = abs(term) * first / (1.0 - first)
    return total, remainder + fuzz


def subset_weight_sum(scheme: WeightScheme, q: float = 1.0,
                      scale: float = 1.0) -> tuple[float, float]:
    """Certified sum over all nonempty finite index sets u of
    scale^{|u|} * (prod_{j in u} gamma_j)^q, as (value, cert).

    The sum telescopes to prod_{j>=1} (1 + scale * gamma_j^q) - 1; the head
    of the product is taken verbatim and the remaining factors enter through
    a certified logarithmic tail.  Divergent parameter choices (the exponent
    series of scale * gamma_j^q not summable) raise SchemeError.
    """
    if q <= 0:
        raise ValueError(f"power must be positive, got {q}")
    if scale < 0:
        raise ValueError(f"scale must be non-negative, got {scale}")
    if scale == 0.0:
        return 0.0, 0.0
    if scheme.kind == "CUSTOM":
        prod = 1.0
        for j in range(1, len(scheme.recip_table) + 1):
            prod *= 1.0 + scale * embedding_weight(scheme, j) ** q
        return prod - 1.0, 1e-15 * prod * len(scheme.recip_table)
    if scheme.single:
        return scale, 0.0
    gen = scheme.r_gen
    if gen.form == "log" and q * gen.slope <= 1.0:
        raise SchemeError(
            f"subset weight sum diverges: power*slope = {q * gen.slope:g} <= 1")
    head_len = 64
    while scale * 2.0 ** (-q * (gen.value(head_len + 1) - scheme.r1)) >= 0.5:
        head_len *= 2
        if head_len > 1_000_000:
            raise SchemeError("subset weight sum: no geometric tail in range")
    js = np.arange(1, head_len + 1)
    factors = 1.0 + scale * np.exp2(-q * (gen.values(js) - scheme.r1))
    log_head = float(np.sum(np.log(factors)))
    log_tail, tail_cert = _log_product_tail(scheme, q, scale, head_len + 1)
    total_log = log_head + log_tail
    value = math.exp(total_log) - 1.0
    spread = math.exp(total_log) * (
        math.expm1(tail_cert + 1e-15 * head_len) + 1e-15)
    return value, spread + 1e-15 * (1.0 + abs(value))


def smoothness_growth(scheme: WeightScheme) -> float:
    """Asymptotic exponent-growth index: liminf of r_j ln(2)/ln(j).

    Affine r_j grows linearly -> +inf; log-form r_j -> the slope.
    """
    if scheme.kind == "CUSTOM":
        raise SchemeError("no generator to take a growth index from")
    if scheme.single:
        raise SchemeError("growth index is undefined for a univariate scheme")
    gen = scheme.r_gen
    if gen.form == "affine":
        return math.inf
    return gen.slope


def summability_certificate(scheme: WeightScheme, j_head: int = 8) -> tuple[float, float]:
    """Certified finite value of sum_{nu,j} 1/alpha_{nu,j} as (partial, tail).

    Head coordinates are summed with their own degree tails; the coordinate
    tail uses sigma_j <= C * 2^{-r_j} with the closed-form coefficient.
    """
    if scheme.kind == "CUSTOM":
        total = sum(sum(row[1:]) for row in scheme.recip_table)
        return float(total), 0.0
    if scheme.single:
        val, tail = degree_series_sum(scheme, 1)
        return val, tail
    partial = 0.0
    tail = 0.0
    for j in range(1, j_head + 1):
        v, t = degree_series_sum(scheme, j)
        partial += v
        tail += t
    coeff = degree_series_coefficient(scheme)
    tail += coeff * 2.0 ** (-scheme.r1) * exponent_power_tail(scheme, 1.0, j_head + 1)
    return partial, tail


# ---------------------------------------------------------------------------
# tail root-mean-square sequence and decay fitting


def reciprocal_tail_rms(scheme: WeightScheme, n: int, j: int = 1,
                        rel_tol: float = 1e-12) -> tuple[float, float]:
    """beta_n = ((1/n) * sum_{nu>=n} 1/alpha_{nu,j})^{1/2}, certified.

    Returns (value, tail_bound) where the true beta_n lies within
    [value, value + tail_bound].
    """
    if n < 1:
        raise ValueError(f"index must be >= 1, got {n}")
    partial = 0.0
    start = n
    block = 512
    while True:
        recs = weight_recips(scheme, start + block - 1, j)[start:]
        partial += float(recs.sum())
        start += recs.size
        tail = recip_tail(scheme, start, j)
        if tail <= rel_tol * max(partial, 1e-300) or start > 5_000_000:
            break
        block = min(2 * block, 1 << 16)
    value = math.sqrt(partial / n)
    upper = math.sqrt((partial + tail) / n)
    return value, upper - value


@dataclass(frozen=True)
class DecayFit:
    """Least-squares slope of ln(1/z_n) against ln(n) with diagnostics."""

    slope: float
    intercept: float
    residual_rms: float
    n_points: int


def decay_estimate(samples) -> DecayFit:
    """Empirical polynomial decay order of a positive sequence.

    ``samples`` is a sequence of (n, z_n) pairs with strictly increasing n
    and z_n > 0; at least 4 points are required.
    """
    pts = [(float(n), float(z)) for n, z in samples]
    if len(pts) < 4:
        raise ValueError(f"need at least 4 samples, got {len(pts)}")
    ns = np.array([p[0] for p in pts])
    zs = np.array([p[1] for p in pts])
    if np.any(zs <= 0):
        raise ValueError("sequence values must be positive")
    if np.any(np.diff(ns) <= 0):
        raise ValueError("sample indices must be strictly increasing")
    x = np.log(ns)
    y = -np.log(zs)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return DecayFit(slope=float(coef[0]), intercept=float(coef[1]),
                    residual_rms=float(np.sqrt(np.mean(resid ** 2))),
                    n_points=len(pts))
