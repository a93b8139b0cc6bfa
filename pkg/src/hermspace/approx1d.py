"""Least-squares approximation from point samples, with exact error evaluation.

The estimator draws a candidate pool from an equal mixture of two
densities against the Gaussian measure: the normalized square-sum of the
first basis_dim Hermite polynomials, which covers every direction of the
target span, and a spectral-tail component weighting each higher degree
by its reciprocal Fourier weight, which keeps the response to
out-of-span input under control.  Rank-revealing pivoting then keeps the
best-conditioned subset of the requested size, and the weighted
least-squares projection is solved on that subset with weights inverse
to the density ratio.  Only the kept nodes ever require function values.

All polynomial arithmetic runs on damped values h_nu(x) * exp(-x^2/4),
which the square-envelope bound keeps inside [-1, 1] at any degree, so
no intermediate quantity can overflow even at far-out tail nodes.

The worst-case L2 error of any such linear algorithm is the operator
norm of (Id - A) restricted to the unit ball, computed on the truncated
basis e_nu = alpha_nu^{-1/2} h_nu up to a truncation degree; the first
omitted basis function contributes at most alpha^{-1/2} at the next
degree, which is reported as the certificate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .base import ErrorReport, IllConditionedError, SchemeError, ToleranceError
from .weights import WeightScheme, recip_tail, weight_recip, weight_recips

_COND_LIMIT = 1e8
_REDRAW_LIMIT = 64
_TAIL_MASS_SLACK = 1e-3
_TAIL_BAND_CAP = 32
_POOL_MIN_FACTOR = 2


@dataclass(frozen=True)
class Approx1D:
    """Sampling nodes, least-squares weights, and the value-to-coefficient map.

    The algorithm applied to f returns the polynomial whose coefficient
    vector over h_0 .. h_{basis_dim-1} is output_map applied to the
    scaled samples node_scales_i * exp(-x_i^2/4) * f(x_i); the scaled
    form keeps every stored number well inside floating-point range even
    for nodes far out in the tails.  The empty instance is the zero
    algorithm.
    """

    nodes: tuple
    ls_weights: tuple
    node_scales: tuple
    basis_dim: int
    output_map: tuple

    def __post_init__(self):
        n = len(self.nodes)
        if len(self.ls_weights) != n or len(self.node_scales) != n:
            raise ValueError("node, weight, and scale counts differ")
        if len(self.output_map) != self.basis_dim:
            raise ValueError("output map must have one row per basis function")
        for row in self.output_map:
            if len(row) != n:
                raise ValueError("output map rows must match the node count")
        if self.basis_dim > n and self.basis_dim > 0:
            raise ValueError("basis dimension exceeds the sample count")

    @classmethod
    def zero(cls) -> "Approx1D":
        return cls(nodes=(), ls_weights=(), node_scales=(), basis_dim=0,
                   output_map=())

    @property
    def is_zero(self) -> bool:
        return self.basis_dim == 0

    @property
    def cost(self) -> int:
        return len(self.nodes)

    def node_array(self) -> np.ndarray:
        return np.asarray(self.nodes, dtype=float)

    def scale_array(self) -> np.ndarray:
        return np.asarray(self.node_scales, dtype=float)

    def map_array(self) -> np.ndarray:
        if self.basis_dim == 0:
            return np.zeros((0, len(self.nodes)))
        return np.asarray(self.output_map, dtype=float)

    def coefficients(self, values) -> np.ndarray:
        """Hermite coefficients of the approximant for sampled values."""
        xs = self.node_array()
        scaled = self.scale_array() * np.exp(-0.25 * xs * xs)
        return self.map_array() @ (scaled * np.asarray(values, dtype=float))


def _damped_columns(degree: int, xs: np.ndarray) -> np.ndarray:
    """Columns of h_nu(x) * exp(-x^2/4) for nu = 0..degree.

    The damped values stay in [-1, 1] by the square-envelope bound, so
    they are safe at any degree and any point, where the raw polynomial
    values would overflow.
    """
    xs = np.asarray(xs, dtype=float)
    cols = np.empty((xs.size, degree + 1))
    cols[:, 0] = np.exp(-0.25 * xs * xs)
    if degree >= 1:
        cols[:, 1] = xs * cols[:, 0]
    for nu in range(2, degree + 1):
        cols[:, nu] = (xs * cols[:, nu - 1]
                       - math.sqrt(nu - 1.0) * cols[:, nu - 2]) / math.sqrt(nu)
    return cols


def _damped_top(degree: int, xs: np.ndarray) -> np.ndarray:
    """h_degree(x) * exp(-x^2/4) alone, in constant memory."""
    xs = np.asarray(xs, dtype=float)
    prev2 = np.exp(-0.25 * xs * xs)
    if degree == 0:
        return prev2
    prev1 = xs * prev2
    for nu in range(2, degree + 1):
        prev2, prev1 = prev1, (xs * prev1
                               - math.sqrt(nu - 1.0) * prev2) / math.sqrt(nu)
    return prev1


def tail_degree_weights(scheme: WeightScheme, basis_dim: int,
                        j: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Degrees and probabilities of the spectral-tail mixture component.

    Degree nu >= basis_dim is drawn proportionally to 1/alpha_nu.  The
    band extends until all but a small fraction of the tail mass is
    covered, capped at a fixed multiple of basis_dim; probabilities are
    renormalized over the band.
    """
    if scheme.kind == "CUSTOM":
        raise SchemeError(
            "tail mixture needs an unbounded decaying weight sequence; "
            "finite custom tables do not provide one")
    if scheme.kind == "PG" and scheme.r(j) <= 1.0:
        raise SchemeError(
            f"tail mass not summable for polynomial growth r = {scheme.r(j)}")
    total = recip_tail(scheme, basis_dim, j)
    hi = 2 * basis_dim
    while True:
        recips = weight_recips(scheme, hi, j)[basis_dim:]
        mass = float(recips.sum())
        if mass >= (1.0 - _TAIL_MASS_SLACK) * total:
            break
        if hi >= _TAIL_BAND_CAP * basis_dim:
            break
        hi *= 2
    return np.arange(basis_dim, hi + 1), recips / mass


def _damped_density(xs: np.ndarray, basis_dim: int, degs: np.ndarray,
                    probs: np.ndarray) -> np.ndarray:
    """Density ratio times exp(-x^2/2), streamed over the degree band.

    This is the numerically safe form of the mixture density divided by
    the Gaussian density: every term is a damped square, so the result
    is finite everywhere and positive wherever any band polynomial is.
    """
    xs = np.asarray(xs, dtype=float)
    first = int(degs[0])
    top = int(degs[-1])
    prev2 = np.exp(-0.25 * xs * xs)
    low_sum = prev2 ** 2
    tail = np.zeros_like(xs)
    if top >= 1:
        prev1 = xs * prev2
        if basis_dim > 1:
            low_sum += prev1 ** 2
        if first <= 1:
            tail += probs[1 - first] * prev1 ** 2
        for nu in range(2, top + 1):
            cur = (xs * prev1 - math.sqrt(nu - 1.0) * prev2) / math.sqrt(nu)
            if nu < basis_dim:
                low_sum += cur ** 2
            if nu >= first:
                tail += probs[nu - first] * cur ** 2
            prev2, prev1 = prev1, cur
    return 0.5 * low_sum / basis_dim + 0.5 * tail


def density_ratio(xs: np.ndarray, basis_dim: int, scheme: WeightScheme,
                  j: int = 1) -> np.ndarray:
    """Sampling density divided by the Gaussian density at each point."""
    xs = np.asarray(xs, dtype=float)
    degs, probs = tail_degree_weights(scheme, basis_dim, j)
    damped = _damped_density(xs, basis_dim, degs, probs)
    with np.errstate(divide="ignore", over="ignore"):
        log_ratio = 0.5 * xs * xs + np.log(damped)
        return np.exp(log_ratio)


def sample_mixture(count: int, basis_dim: int, scheme: WeightScheme, rng,
                   j: int = 1) -> np.ndarray:
    """Draw nodes from the mixture density, deterministically under rng.

    Half the draws pick a degree below basis_dim uniformly, the rest
    pick a tail degree by its spectral probability; each squared
    polynomial component is drawn by rejection from a uniform proposal
    on the interval carrying all of its mass up to negligible
    truncation.  The square-envelope bound keeps every acceptance ratio
    in [0, 1].
    """
    degs, probs = tail_degree_weights(scheme, basis_dim, j)
    out = np.empty(count)
    low = rng.random(count) < 0.5
    chosen = np.where(
        low,
        rng.integers(0, basis_dim, size=count),
        degs[rng.choice(probs.size, size=count, p=probs)],
    )
    for nu in np.unique(chosen):
        slots = np.nonzero(chosen == nu)[0]
        radius = 2.0 * math.sqrt(2.0 * nu + 1.0) + 4.0
        need = slots.size
        got = []
        while need > 0:
            batch = max(32, int(2.0 * need * radius))
            x = rng.uniform(-radius, radius, size=batch)
            keep = x[rng.random(batch) < _damped_top(int(nu), x) ** 2]
            got.append(keep[:need])
            need -= len(got[-1])
        out[slots] = np.concatenate(got)
    return out


def least_squares_approx(count: int, basis_dim: int, scheme: WeightScheme,
                         seed: int, j: int = 1) -> Approx1D:
    """Build the weighted least-squares estimator on a pivoted subsample.

    Requires at least two samples per basis function.  A pool several
    times the requested size is drawn from the mixture density, and
    rank-revealing pivoting keeps the count rows of the weighted design
    with the strongest conditioning, so the kept nodes are the only
    places a function would ever be evaluated.  The same seed reproduces
    the instance bit for bit.  A subset whose normal equations exceed
    condition 1e8 is discarded and redrawn from the next derived seed; a
    long run of such draws raises.
    """
    if basis_dim < 1:
        raise ValueError("need at least one basis function")
    if count < 2 * basis_dim:
        raise ValueError("need at least two samples per basis function")
    degs, probs = tail_degree_weights(scheme, basis_dim, j)
    pool = count * max(_POOL_MIN_FACTOR,
                       int(math.ceil(math.log2(basis_dim + 16))))
    for attempt in range(_REDRAW_LIMIT):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(attempt,)))
        candidates = sample_mixture(pool, basis_dim, scheme, rng, j)
        damped_rho = _damped_density(candidates, basis_dim, degs, probs)
        scales = 1.0 / np.sqrt(damped_rho)
        full = _damped_columns(basis_dim - 1, candidates) * scales[:, None]
        _, _, pivots = scipy.linalg.qr(full.T, pivoting=True, mode="economic")
        keep = np.sort(pivots[:count])
        xs = candidates[keep]
        order = np.argsort(xs)
        xs = xs[order]
        node_scales = scales[keep][order]
        design = full[keep][order]
        sing = np.linalg.svd(design, compute_uv=False)
        if sing[-1] > 0.0 and (sing[0] / sing[-1]) ** 2 <= _COND_LIMIT:
            break
    else:
        raise IllConditionedError(
            f"no draw within {_REDRAW_LIMIT} attempts kept the normal "
            "equations below condition 1e8")
    ls_w = node_scales ** 2 * np.exp(-0.5 * xs * xs)
    # output_map rows act on scale * exp(-x^2/4) * f(x); the design is
    # exactly that scaling applied to the basis columns
    q, r = np.linalg.qr(design)
    out_map = np.linalg.solve(r, q.T)
    return Approx1D(
        nodes=tuple(float(x) for x in xs),
        ls_weights=tuple(float(w) for w in ls_w),
        node_scales=tuple(float(s) for s in node_scales),
        basis_dim=basis_dim,
        output_map=tuple(tuple(float(v) for v in row) for row in out_map),
    )


def worst_case_error_l2(ap: Approx1D, scheme: WeightScheme, j: int = 1,
                        n_trunc: int | None = None,
                        tol: float = 0.05) -> ErrorReport:
    """Exact worst-case L2 error of the algorithm over the unit ball.

    The operator Id - A is assembled degree by degree on the normalized
    basis up to the truncation degree and its largest singular value is
    the error on that span; the first untreated degree bounds the rest
    and enters the certificate together with a float-noise allowance.
    """
    if tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    big_n = max(4 * ap.basis_dim, 256) if n_trunc is None else n_trunc
    if big_n < ap.basis_dim:
        raise ValueError("truncation degree must reach the basis dimension")
    arecip_sqrt = np.sqrt(weight_recips(scheme, big_n, j))
    bmat = np.diag(arecip_sqrt)
    if not ap.is_zero:
        damped = _damped_columns(big_n, ap.node_array())
        proj = ap.map_array() @ (ap.scale_array()[:, None] * damped)
        bmat[: ap.basis_dim, :] -= proj * arecip_sqrt[None, :]
    err = float(np.linalg.svd(bmat, compute_uv=False)[0])
    tail = math.sqrt(weight_recip(scheme, big_n + 1, j)) + 1e-13 * (1.0 + err)
    if tail > tol:
        raise ToleranceError(
            f"truncation certificate {tail:.3e} exceeds the requested "
            f"tolerance {tol:.3e}; raise the truncation degree",
            achieved=tail)
    return ErrorReport(err=err, tail_bound=tail, cost=ap.cost)


def spectral_lower_bound(scheme: WeightScheme, count: int, j: int = 1) -> float:
    """Error floor for any algorithm using count function values."""
    if count < 0:
        raise ValueError(f"information count must be >= 0, got {count}")
    return math.sqrt(weight_recip(scheme, count, j))


def approx_to_text(ap: Approx1D) -> str:
    """Serialize an approximation operator; exact round trip."""
    lines = ["hermspace-approx 1",
             f"basis {ap.basis_dim}",
             f"count {len(ap.nodes)}"]
    for x, w, s in zip(ap.nodes, ap.ls_weights, ap.node_scales):
        lines.append(f"{x:.17g} {w:.17g} {s:.17g}")
    for row in ap.output_map:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def approx_from_text(text: str) -> Approx1D:
    """Rebuild an approximation operator written by approx_to_text."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "hermspace-approx 1":
        raise ValueError("not an approximation operator serialization")
    try:
        basis = int(lines[1].split()[1])
        count = int(lines[2].split()[1])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed header: {exc}") from None
    if len(lines) != 3 + count + basis:
        raise ValueError(
            f"expected {3 + count + basis} lines, got {len(lines)}")
    nodes, ls_w, scales = [], [], []
    for ln in lines[3:3 + count]:
        parts = ln.split()
        if len(parts) != 3:
            raise ValueError(f"expected 'node weight scale', got {ln!r}")
        nodes.append(float(parts[0]))
        ls_w.append(float(parts[1]))
        scales.append(float(parts[2]))
    rows = []
    for ln in lines[3 + count:]:
        row = tuple(float(v) for v in ln.split())
        if len(row) != count:
            raise ValueError("output map row length does not match count")
        rows.append(row)
    return Approx1D(nodes=tuple(nodes), ls_weights=tuple(ls_w),
                    node_scales=tuple(scales), basis_dim=basis,
                    output_map=tuple(rows))
