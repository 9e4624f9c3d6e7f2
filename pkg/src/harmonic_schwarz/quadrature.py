"""Zonal quadrature on the unit sphere S^{n-1}.

For boundary data depending only on the last coordinate t = eta_n, the
normalized surface integral collapses to a weighted 1-D integral:

    int_S h(eta_n) dsigma(eta) = c_n * int_{-1}^{1} h(t) (1 - t^2)^{(n-3)/2} dt,

with c_n = Gamma(n/2) / (sqrt(pi) * Gamma((n-1)/2)).  This module builds
Gauss-Jacobi rules for arbitrary endpoint exponents (1-x)^alpha (1+x)^beta
from scratch: nodes by Newton iteration on the orthonormal three-term
recurrence, bracketed on a Chebyshev grid, weights from the derivative of
the orthonormal polynomial.  No tables, no dependencies beyond numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import (
    InvalidDimensionError,
    NearBoundaryError,
    NonFiniteIntegrandError,
)

__all__ = [
    "DEFAULT_NODE_COUNT",
    "JacobiRule",
    "gauss_jacobi",
    "jacobi_rule",
    "node_count_for_radius",
    "sphere_weight_exponent",
    "uniform_sphere_samples",
    "zonal_normalization",
    "zonal_integral",
    "zonal_segment_integral",
]

# Node count used by solver-facing integrals unless the caller overrides it.
DEFAULT_NODE_COUNT = 128

# Radii at or beyond this are rejected unless an explicit node count is given.
NEAR_BOUNDARY_RADIUS = 0.999

_MAX_AUTO_NODES = 4096


def validate_dimension(n) -> int:
    n = int(n)
    if n < 2:
        raise InvalidDimensionError(f"ambient dimension must be >= 2, got {n}")
    return n


def sphere_weight_exponent(n: int) -> float:
    """Exponent of the zonal weight (1 - t^2)^((n-3)/2)."""
    return 0.5 * (validate_dimension(n) - 3)


def zonal_normalization(n: int) -> float:
    """c_n = Gamma(n/2) / (sqrt(pi) Gamma((n-1)/2)), via log-Gamma."""
    n = validate_dimension(n)
    return math.exp(
        math.lgamma(0.5 * n) - 0.5 * math.log(math.pi) - math.lgamma(0.5 * (n - 1))
    )


def node_count_for_radius(r: float, base: int = DEFAULT_NODE_COUNT) -> int:
    """Node budget that keeps kernel integrals at full precision up to radius r.

    The axial Poisson kernel has a pole at t = 1 + (1-r)^2/(2r); Gauss rules
    lose digits geometrically as it approaches the interval, so the budget
    grows like 1/(1-r).  Radii >= 0.999 are rejected: silently degraded
    output is worse than an explicit failure.
    """
    if r >= NEAR_BOUNDARY_RADIUS:
        raise NearBoundaryError(
            f"r={r} is too close to the boundary for the default node budget; "
            "pass an explicit node count to accept the cost"
        )
    scaled = int(math.ceil(32.0 / (1.0 - r)))
    return max(int(base), min(_MAX_AUTO_NODES, scaled))


def _jacobi_recurrence(alpha: float, beta: float, count: int):
    """Coefficients (a_k, sqrt(b_k)) of the orthonormal Jacobi recurrence.

    Monic recurrence pi_{k+1} = (x - a_k) pi_k - b_k pi_{k-1} with
    b_0 = mu_0 = 2^(a+b+1) B(a+1, b+1).
    """
    k = np.arange(count, dtype=float)
    ab = alpha + beta
    with np.errstate(invalid="ignore", divide="ignore"):
        a = (beta**2 - alpha**2) / ((2 * k + ab) * (2 * k + ab + 2))
    a[0] = (beta - alpha) / (ab + 2.0)
    b = np.empty(count)
    b[0] = math.exp(
        (ab + 1.0) * math.log(2.0)
        + math.lgamma(alpha + 1.0)
        + math.lgamma(beta + 1.0)
        - math.lgamma(ab + 2.0)
    )
    if count > 1:
        b[1] = 4.0 * (alpha + 1.0) * (beta + 1.0) / ((ab + 2.0) ** 2 * (ab + 3.0))
    if count > 2:
        j = k[2:]
        s = 2 * j + ab
        b[2:] = 4.0 * j * (j + alpha) * (j + beta) * (j + ab) / (s**2 * (s**2 - 1.0))
    return a, np.sqrt(b)


def _orthonormal_jacobi(m, x, a, sb):
    """Values and derivatives of the degree-m orthonormal Jacobi polynomial."""
    x = np.asarray(x, dtype=float)
    p_prev = np.zeros_like(x)
    d_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / sb[0])
    d = np.zeros_like(x)
    for k in range(m):
        inv = 1.0 / sb[k + 1]
        xa = x - a[k]
        p_next = (xa * p - (sb[k] * p_prev if k > 0 else 0.0)) * inv
        d_next = (p + xa * d - (sb[k] * d_prev if k > 0 else 0.0)) * inv
        p_prev, p = p, p_next
        d_prev, d = d, d_next
    return p, d


def _newton_sweeps(x, eval_pd, rounds, lo=None, hi=None, flo=None):
    """Newton iteration with per-root convergence masking.

    With lo/hi brackets the step is safeguarded by bisection; without them
    it is clipped into (-1, 1) and left to the caller to validate.
    """
    done = np.zeros(x.size, dtype=bool)
    for _ in range(rounds):
        idx = np.nonzero(~done)[0]
        if idx.size == 0:
            break
        xi = x[idx]
        p, d = eval_pd(xi)
        exact = p == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            x_new = xi - p / d
        if lo is not None:
            shrinking = p * flo[idx] > 0
            lo[idx] = np.where(shrinking, xi, lo[idx])
            flo[idx] = np.where(shrinking, p, flo[idx])
            hi[idx] = np.where(shrinking, hi[idx], xi)
            bad = ~np.isfinite(x_new) | (x_new <= lo[idx]) | (x_new >= hi[idx])
            x_new = np.where(bad, 0.5 * (lo[idx] + hi[idx]), x_new)
        else:
            x_new = np.clip(np.where(np.isfinite(x_new), x_new, 2.0), -1.0, 1.0)
        x_new = np.where(exact, xi, x_new)
        x[idx] = x_new
        done[idx] = exact | (np.abs(x_new - xi) <= 2e-16 * (1.0 + np.abs(x_new)))
    return done


@lru_cache(maxsize=256)
def gauss_jacobi(alpha: float, beta: float, m: int):
    """Nodes and weights for int_{-1}^{1} f(x) (1-x)^alpha (1+x)^beta dx.

    Exact for polynomials f of degree <= 2m - 1.  Nodes are found by sign
    scanning the orthonormal Jacobi polynomial on a Chebyshev grid followed
    by safeguarded Newton iteration; weights use
    w_i = (2m + alpha + beta + 1) / ((1 - x_i^2) phat_m'(x_i)^2).
    """
    alpha = float(alpha)
    beta = float(beta)
    m = int(m)
    if m < 1:
        raise ValueError(f"node count must be >= 1, got {m}")
    if alpha <= -1.0 or beta <= -1.0:
        raise ValueError(f"Jacobi exponents must exceed -1, got ({alpha}, {beta})")

    a, sb = _jacobi_recurrence(alpha, beta, m + 1)

    def eval_pd(x):
        return _orthonormal_jacobi(m, x, a, sb)

    # Fast path: arccos-asymptotic initial guesses (exact in the Chebyshev
    # case alpha = beta = -1/2), polished by unbracketed Newton.
    k = np.arange(1, m + 1, dtype=float)
    theta = (k + 0.5 * alpha - 0.25) * math.pi / (m + 0.5 * (alpha + beta + 1.0))
    x = np.cos(theta)[::-1].copy()
    ok = np.all(_newton_sweeps(x, eval_pd, rounds=12))
    # a duplicate pair means two guesses fell into one basin and a root was
    # missed; true Jacobi root gaps never get this small
    ok = ok and bool(
        np.all(np.diff(x) > 0.05 / (m * m)) and np.all(np.abs(x) < 1.0)
    )
    if not ok:
        x = _bracketed_roots(m, alpha, beta, eval_pd)

    _, d = eval_pd(x)
    w = (2.0 * m + alpha + beta + 1.0) / ((1.0 - x**2) * d**2)
    if alpha == beta:
        # Symmetric weight: enforce exact node symmetry so odd moments vanish.
        x = 0.5 * (x - x[::-1])
        w = 0.5 * (w + w[::-1])
    if not (np.all(np.diff(x) > 0) and np.all(np.abs(x) < 1.0) and np.all(w > 0)):
        raise RuntimeError(f"Gauss-Jacobi construction failed for ({alpha}, {beta}, {m})")
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def _bracketed_roots(m, alpha, beta, eval_pd):
    """Robust fallback: bracket every root by sign scanning a Chebyshev-type
    grid (doubling it if clustered roots hide), then safeguarded Newton."""
    grid_size = max(8 * m, 64)
    while True:
        grid = -np.cos(np.linspace(0.0, math.pi, grid_size + 1))
        vals, _ = eval_pd(grid)
        zero = vals == 0.0
        if np.any(zero[1:-1]):
            # A grid point sits exactly on a root: nudge to the cell midpoint.
            idx = np.nonzero(zero[:-1])[0]
            grid[idx] = 0.5 * (grid[idx] + grid[idx + 1])
            vals[idx], _ = eval_pd(grid[idx])
        signs = np.sign(vals)
        flips = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
        if flips.size == m:
            break
        grid_size *= 2
        if grid_size > (1 << 21):
            raise RuntimeError(f"failed to bracket {m} Jacobi roots for ({alpha}, {beta})")
    lo = grid[flips]
    hi = grid[flips + 1]
    flo = vals[flips]
    fhi = vals[flips + 1]
    x = (lo * fhi - hi * flo) / (fhi - flo)
    _newton_sweeps(x, eval_pd, rounds=80, lo=lo, hi=hi, flo=flo)
    return x


@dataclass(frozen=True)
class JacobiRule:
    """sigma-normalized zonal quadrature rule for one sphere dimension.

    Applying the rule to h gives int_S h(eta_n) dsigma(eta); the constant
    function 1 integrates to 1.
    """

    nodes: np.ndarray
    weights: np.ndarray
    alpha: float
    normalization: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes)
        weights = np.asarray(self.weights)
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("rule nodes must be strictly increasing")
        if not (np.all(nodes > -1.0) and np.all(nodes < 1.0)):
            raise ValueError("rule nodes must lie in (-1, 1)")
        if not np.all(weights > 0):
            raise ValueError("rule weights must be positive")
        total = float(weights.sum())
        if abs(total - 1.0) > 1e-13:
            raise ValueError(f"rule does not integrate 1 to 1: sum = {total!r}")

    def integrate(self, h: Callable) -> float:
        return float(self.weights @ _evaluate_profile(h, self.nodes))


@lru_cache(maxsize=64)
def _sphere_rule(n: int, m: int):
    e = sphere_weight_exponent(n)
    x, w = gauss_jacobi(e, e, m)
    scaled = w * zonal_normalization(n)
    scaled.flags.writeable = False
    return x, scaled


def jacobi_rule(dim: int, node_count: int) -> JacobiRule:
    """Zonal rule with the weight (1-t^2)^((n-3)/2), normalized to sigma."""
    n = validate_dimension(dim)
    node_count = int(node_count)
    if node_count < 2:
        raise ValueError(f"node count must be >= 2, got {node_count}")
    x, w = _sphere_rule(n, node_count)
    return JacobiRule(
        nodes=x,
        weights=w,
        alpha=sphere_weight_exponent(n),
        normalization=zonal_normalization(n),
    )


def _evaluate_profile(h: Callable, t: np.ndarray) -> np.ndarray:
    vals = np.asarray(h(t), dtype=float)
    if vals.shape != t.shape:
        vals = np.asarray([float(h(ti)) for ti in t])
    if not np.all(np.isfinite(vals)):
        bad = t[~np.isfinite(vals)][0]
        raise NonFiniteIntegrandError(
            f"integrand is not finite at t = {bad!r}", t=float(bad)
        )
    return vals


def zonal_segment_integral(
    fn: Callable,
    dim: int,
    lo: float,
    hi: float,
    *,
    power_lo: float = 0.0,
    power_hi: float = 0.0,
    nodes: Optional[int] = None,
) -> float:
    """sigma-integral of fn(t) * (t-lo)^power_lo * (hi-t)^power_hi over [lo, hi].

    fn must be smooth on the segment; algebraic endpoint factors, including
    the sphere weight itself at t = +-1, are absorbed into the Gauss-Jacobi
    weight so the rule converges geometrically.
    """
    n = validate_dimension(dim)
    m = int(nodes) if nodes is not None else DEFAULT_NODE_COUNT
    if not (-1.0 <= lo <= hi <= 1.0):
        raise ValueError(f"segment [{lo}, {hi}] must lie inside [-1, 1]")
    h = 0.5 * (hi - lo)
    if h <= 0.0:
        return 0.0
    e = sphere_weight_exponent(n)
    alpha = power_hi + (e if hi == 1.0 else 0.0)
    beta = power_lo + (e if lo == -1.0 else 0.0)
    x, w = gauss_jacobi(alpha, beta, m)
    t = 0.5 * (hi + lo) + h * x
    vals = _evaluate_profile(fn, t)
    if hi != 1.0:
        vals = vals * (1.0 - t) ** e
    if lo != -1.0:
        vals = vals * (1.0 + t) ** e
    return zonal_normalization(n) * h ** (1.0 + alpha + beta) * float(w @ vals)


def zonal_integral(
    h: Callable,
    dim: int,
    split_at: Optional[float] = None,
    nodes: Optional[int] = None,
) -> float:
    """sigma-integral over S^{n-1} of a profile h of the last coordinate.

    With split_at, the interval is integrated as two sub-segments meeting at
    the split, which restores accuracy for profiles with a kink or jump there.
    """
    n = validate_dimension(dim)
    m = int(nodes) if nodes is not None else DEFAULT_NODE_COUNT
    if split_at is None:
        x, w = _sphere_rule(n, m)
        return float(w @ _evaluate_profile(h, x))
    s = float(split_at)
    if not -1.0 <= s <= 1.0:
        raise ValueError(f"split point {s} outside [-1, 1]")
    left = zonal_segment_integral(h, n, -1.0, s, nodes=m)
    right = zonal_segment_integral(h, n, s, 1.0, nodes=m)
    return left + right


def uniform_sphere_samples(dim: int, count: int, seed: int) -> np.ndarray:
    """Deterministic uniform samples on S^{n-1} by normalized Gaussians."""
    n = validate_dimension(dim)
    count = int(count)
    if count < 1:
        raise ValueError(f"sample count must be >= 1, got {count}")
    rng = np.random.default_rng(int(seed))
    pts = rng.standard_normal((count, n))
    norms = np.linalg.norm(pts, axis=1)
    while np.any(norms < 1e-8):  # astronomically rare; keeps the map well defined
        bad = norms < 1e-8
        pts[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(pts, axis=1)
    return pts / norms[:, None]
