"""The sharp Schwarz factor for harmonic mappings vanishing at the origin.

For a Hoelder-conjugate pair (p, q) the pointwise bound is

    |f(x)| <= g_p(|x|) ||f||_p,      g_p(r) = min_{a >= 0} ||P_r - a||_{L^q(sigma)},

where P_r is the axial Poisson kernel.  The minimizing shift a*(r) is the
unique root of the balance integral

    F(r, a) = int_S (P_r - a) |P_r - a|^{q-2} dsigma,

which runs from positive to negative as a sweeps the kernel's range.  All
integrals are reduced to zonal Gauss-Jacobi quadrature split at the level
crossing P_r(t*) = a, with the algebraic factor |t - t*|^(q-2) absorbed
into the quadrature weight so that rules of modest size stay exact even
for 1 < q < 2.

Closed forms are provided for p in {1, 2, inf}; the sharp gradient
constant comes from a log-Gamma evaluation plus an independent moment
quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    BracketFailureError,
    InvalidExponentError,
    InvalidRadiusError,
)
from .kernel import axial_kernel_range, kernel_level_crossing
from .quadrature import (
    DEFAULT_NODE_COUNT,
    gauss_jacobi,
    node_count_for_radius,
    sphere_weight_exponent,
    validate_dimension,
    zonal_normalization,
    zonal_segment_integral,
)

__all__ = [
    "BoundCurve",
    "BoundPoint",
    "ExponentPair",
    "closed_form_factor",
    "conjugate",
    "factor_curve",
    "factor_slope_at_zero",
    "optimal_shift",
    "schwarz_bound",
    "schwarz_factor",
    "schwarz_factors",
    "sharp_gradient_constant",
    "shift_balance",
    "shifted_kernel_norm",
]

_SOLVER_RTOL = 1e-13
_BRACKET_INFLATION = 1e-9
_TINY = 1e-300


@dataclass(frozen=True)
class ExponentPair:
    """Hoelder-conjugate exponents with an explicit infinity representation.

    math.inf is the tagged infinite value; conjugacy is resolved by explicit
    branching, never by evaluating 1/p with p infinite.
    """

    p: float
    q: float

    def __post_init__(self):
        if not self.p >= 1.0:
            raise InvalidExponentError(f"p must be >= 1, got {self.p}")
        if self.p == math.inf:
            ok = self.q == 1.0
        elif self.p == 1.0:
            ok = self.q == math.inf
        else:
            ok = self.q < math.inf and abs(1.0 / self.p + 1.0 / self.q - 1.0) <= 1e-12
        if not ok:
            raise InvalidExponentError(f"(p, q) = ({self.p}, {self.q}) are not conjugate")


def conjugate(p: float) -> ExponentPair:
    """Exponent pair (p, q) with 1/p + 1/q = 1, honoring the infinite endpoints."""
    p = float(p)
    if not p >= 1.0:
        raise InvalidExponentError(f"p must be >= 1, got {p}")
    if p == math.inf:
        return ExponentPair(p=math.inf, q=1.0)
    if p == 1.0:
        return ExponentPair(p=1.0, q=math.inf)
    return ExponentPair(p=p, q=p / (p - 1.0))


def _as_exponents(ex: Union[ExponentPair, float]) -> ExponentPair:
    return ex if isinstance(ex, ExponentPair) else conjugate(ex)


@dataclass(frozen=True)
class BoundPoint:
    """One solved point of the bound curve: radius, optimal shift, factor."""

    r: float
    shift: float
    bound: float


@dataclass(frozen=True)
class BoundCurve:
    exponents: ExponentPair
    dim: int
    points: tuple

    def __post_init__(self):
        bounds = [pt.bound for pt in self.points]
        if any(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:])):
            raise ArithmeticError(
                "bound curve is not strictly increasing; solver inconsistency"
            )

    def radii(self) -> np.ndarray:
        return np.array([pt.r for pt in self.points])

    def bounds(self) -> np.ndarray:
        return np.array([pt.bound for pt in self.points])


def _validate_radius(r: float) -> float:
    r = float(r)
    if not 0.0 <= r < 1.0:
        raise InvalidRadiusError(f"radius must lie in [0, 1), got {r}")
    return r


def _resolve_nodes(radii, nodes: Optional[int]) -> int:
    if nodes is not None:
        m = int(nodes)
        if m < 2:
            raise ValueError(f"node count must be >= 2, got {m}")
        return m
    rmax = float(np.max(radii)) if np.ndim(radii) else float(radii)
    return node_count_for_radius(rmax)


def _axial_many(r_col: np.ndarray, t: np.ndarray, n: int) -> np.ndarray:
    denom = (1.0 - r_col) ** 2 + 2.0 * r_col * (1.0 - t)
    return (1.0 - r_col) * (1.0 + r_col) / denom ** (0.5 * n)


def _kernel_extremes(rs: np.ndarray, n: int):
    one = (1.0 - rs) * (1.0 + rs)
    return one / (1.0 + rs) ** n, one / (1.0 - rs) ** n


def _crossing_parts(rs, shifts, q, n, m, gammas):
    """Per-side log integrals of |P_r - a|^gamma dsigma, split at the crossing.

    rs, shifts: 1-D arrays (rs > 0).  Returns {gamma: (ln_left, ln_right)}.
    The quadrature weight carries |t - t*|^(q-2) (or nothing for q = 1), so
    each requested gamma must exceed it by a small integer.
    """
    rs = np.asarray(rs, dtype=float)
    shifts = np.asarray(shifts, dtype=float)
    e = sphere_weight_exponent(n)
    ln_cn = math.log(zonal_normalization(n))
    g_rule = q - 2.0 if q > 1.0 else 0.0
    deltas = {}
    for g in gammas:
        d = int(round(g - g_rule))
        if abs(g - g_rule - d) > 1e-9 or d < 0 or d > 2:
            raise ValueError(f"gamma {g} incompatible with rule exponent {g_rule}")
        deltas[g] = d

    x_l, w_l = gauss_jacobi(g_rule, e, m)
    x_r, w_r = gauss_jacobi(e, g_rule, m)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        ratio = ((1.0 - rs) * (1.0 + rs) / shifts) ** (2.0 / n)
        tstar = np.clip(1.0 + ((1.0 - rs) ** 2 - ratio) / (2.0 * rs), -1.0, 1.0)
        h_l = 0.5 * (tstar + 1.0)
        h_r = 0.5 * (1.0 - tstar)
        ok_l = h_l > 0.0
        ok_r = h_r > 0.0

        av = shifts[:, None]
        rv = rs[:, None]
        t_l = -1.0 + h_l[:, None] * (x_l + 1.0)
        d_l = h_l[:, None] * (1.0 - x_l)
        rho_l = np.maximum((av - _axial_many(rv, t_l, n)) / d_l, _TINY)
        t_r = tstar[:, None] + h_r[:, None] * (x_r + 1.0)
        d_r = h_r[:, None] * (1.0 + x_r)
        rho_r = np.maximum((_axial_many(rv, t_r, n) - av) / d_r, _TINY)

        max_l = np.where(ok_l, np.max(np.where(np.isfinite(rho_l), rho_l, 0.0), axis=1), 0.0)
        max_r = np.where(ok_r, np.max(np.where(np.isfinite(rho_r), rho_r, 0.0), axis=1), 0.0)
        scale = np.maximum(np.maximum(max_l, max_r), _TINY)
        ln_scale = np.log(scale)
        lr_l = np.log(rho_l) - ln_scale[:, None]
        lr_r = np.log(rho_r) - ln_scale[:, None]
        smooth_l = (1.0 - t_l) ** e
        smooth_r = (1.0 + t_r) ** e

        out = {}
        for g in gammas:
            d = deltas[g]
            s_l = (np.exp(g * lr_l) * (1.0 - x_l) ** d * smooth_l) @ w_l
            s_r = (np.exp(g * lr_r) * (1.0 + x_r) ** d * smooth_r) @ w_r
            ln_l = ln_cn + (1.0 + e + g) * np.log(h_l) + g * ln_scale + np.log(s_l)
            ln_r = ln_cn + (1.0 + e + g) * np.log(h_r) + g * ln_scale + np.log(s_r)
            ln_l = np.where(ok_l & np.isfinite(ln_l), ln_l, -np.inf)
            ln_r = np.where(ok_r & np.isfinite(ln_r), ln_r, -np.inf)
            out[g] = (ln_l, ln_r)
    return out


def _nocross_moment(rs, shifts, gamma, q, n, m):
    """int |P_r - a|^gamma dsigma when a lies outside the kernel range."""
    rs = np.asarray(rs, dtype=float)
    shifts = np.asarray(shifts, dtype=float)
    e = sphere_weight_exponent(n)
    x, w = gauss_jacobi(e, e, m)
    vals = np.abs(_axial_many(rs[:, None], x[None, :], n) - shifts[:, None])
    scale = np.max(vals, axis=1)
    scale = np.maximum(scale, _TINY)
    core = (vals / scale[:, None]) ** gamma @ w
    return zonal_normalization(n) * scale**gamma * core


def _phi_batch(rs, shifts, q, n, m):
    """Phi_r(a) = ||P_r - a||_{L^q} for 1 <= q < inf, vectorized over rows."""
    rs = np.asarray(rs, dtype=float)
    shifts = np.asarray(shifts, dtype=float)
    out = np.empty_like(rs)
    zero = rs == 0.0
    out[zero] = np.abs(1.0 - shifts[zero])
    live = ~zero
    if not np.any(live):
        return out
    rs_l = rs[live]
    sh_l = shifts[live]
    kmin, kmax = _kernel_extremes(rs_l, n)
    inside = (sh_l > kmin) & (sh_l < kmax)
    vals = np.empty_like(rs_l)
    if np.any(inside):
        parts = _crossing_parts(rs_l[inside], sh_l[inside], q, n, m, gammas=(q,))
        ln_l, ln_r = parts[q]
        vals[inside] = np.exp(np.logaddexp(ln_l, ln_r) / q)
    if np.any(~inside):
        mom = _nocross_moment(rs_l[~inside], sh_l[~inside], q, q, n, m)
        vals[~inside] = mom ** (1.0 / q)
    out[live] = vals
    return out


def _solve_shifts(rs, q, n, m):
    """Roots of the balance integral for 1 < q < inf, vectorized over radii.

    Bracket-safeguarded Newton on F(r, .), which decreases from F > 0 at the
    kernel minimum to F < 0 at the kernel maximum; the analytic derivative
    F_a = -(q-1) int |P_r - a|^(q-2) dsigma shares the quadrature nodes.
    """
    rs = np.asarray(rs, dtype=float)
    out = np.ones_like(rs)
    live = rs > 0.0
    if not np.any(live):
        return out
    r_act = rs[live]
    kmin, kmax = _kernel_extremes(r_act, n)
    lo = kmin * (1.0 - _BRACKET_INFLATION)
    hi = kmax * (1.0 + _BRACKET_INFLATION)

    f_lo = _nocross_moment(r_act, lo, q - 1.0, q, n, m)
    f_hi = -_nocross_moment(r_act, hi, q - 1.0, q, n, m)
    bad = ~((f_lo > 0.0) & (f_hi < 0.0))
    if np.any(bad):
        i = int(np.nonzero(bad)[0][0])
        raise BracketFailureError(
            "balance integral shows no sign change over the kernel range",
            diagnostics={
                "r": float(r_act[i]),
                "q": q,
                "n": n,
                "bracket": (float(lo[i]), float(hi[i])),
                "F": (float(f_lo[i]), float(f_hi[i])),
            },
        )

    a = np.where((lo < 1.0) & (1.0 < hi), 1.0, 0.5 * (lo + hi))
    done = np.zeros_like(a, dtype=bool)
    prev_small = np.zeros_like(done)
    for iteration in range(100):
        act = ~done
        if not np.any(act):
            break
        parts = _crossing_parts(
            r_act[act], a[act], q, n, m, gammas=(q - 1.0, q - 2.0)
        )
        ln_l1, ln_r1 = parts[q - 1.0]
        ln_l2, ln_r2 = parts[q - 2.0]
        peak = np.max(np.stack([ln_l1, ln_r1, ln_l2, ln_r2]), axis=0)
        peak = np.where(np.isfinite(peak), peak, 0.0)
        f_hat = np.exp(ln_r1 - peak) - np.exp(ln_l1 - peak)
        fa_hat = -(q - 1.0) * (np.exp(ln_r2 - peak) + np.exp(ln_l2 - peak))
        # Shrink the bracket: F > 0 means the root lies to the right.
        pos = f_hat > 0.0
        lo_act = lo[act]
        hi_act = hi[act]
        lo_act = np.where(pos, a[act], lo_act)
        hi_act = np.where(pos, hi_act, a[act])
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = a[act] - f_hat / fa_hat
        if iteration >= 50:
            newton = np.full_like(newton, np.nan)  # force bisection
        inside = np.isfinite(newton) & (newton >= lo_act) & (newton <= hi_act)
        a_next = np.where(inside, newton, 0.5 * (lo_act + hi_act))
        a_next = np.where(f_hat == 0.0, a[act], a_next)  # exact root: stay put
        small = np.abs(a_next - a[act]) <= 0.5 * _SOLVER_RTOL * a_next
        width = (hi_act - lo_act) <= _SOLVER_RTOL * lo_act
        finished = (small & prev_small[act]) | width | (f_hat == 0.0)
        lo[act] = lo_act
        hi[act] = hi_act
        a[act] = a_next
        prev_small[act] = small
        done[act] = finished
    out[live] = a
    return out


def shifted_kernel_norm(
    r: float, shift: float, ex: Union[ExponentPair, float], dim: int,
    nodes: Optional[int] = None,
) -> float:
    """Phi_r(a) = ||P_r - a||_{L^q(sigma)}; the sup-deviation for q = inf."""
    ex = _as_exponents(ex)
    n = validate_dimension(dim)
    r = _validate_radius(r)
    a = float(shift)
    if a < 0.0:
        raise ValueError(f"shift must be >= 0, got {a}")
    if ex.q == math.inf:
        rng = axial_kernel_range(r, n)
        return max(abs(rng.max_value - a), abs(rng.min_value - a))
    m = _resolve_nodes(r, nodes)
    return float(_phi_batch(np.array([r]), np.array([a]), ex.q, n, m)[0])


def shift_balance(
    r: float, shift: float, ex: Union[ExponentPair, float], dim: int,
    nodes: Optional[int] = None,
) -> float:
    """The balance integral F(r, a); its unique root is the optimal shift.

    For q = 1 this is the subgradient sigma{P_r > a} - sigma{P_r < a}.
    """
    ex = _as_exponents(ex)
    q = ex.q
    if q == math.inf:
        raise InvalidExponentError("balance integral requires q < inf (p > 1)")
    n = validate_dimension(dim)
    r = _validate_radius(r)
    a = float(shift)
    if a <= 0.0:
        raise ValueError(f"shift must be > 0, got {a}")
    if r == 0.0:
        return math.copysign(abs(1.0 - a) ** (q - 1.0), 1.0 - a) if a != 1.0 else 0.0
    m = _resolve_nodes(r, nodes)
    kmin, kmax = axial_kernel_range(r, n)
    if a <= kmin or a >= kmax:
        sign = 1.0 if a <= kmin else -1.0
        mom = _nocross_moment(np.array([r]), np.array([a]), q - 1.0, q, n, m)
        return sign * float(mom[0])
    if q == 1.0:
        tstar = kernel_level_crossing(r, a, n)
        above = zonal_segment_integral(lambda t: np.ones_like(t), n, tstar, 1.0, nodes=m)
        below = zonal_segment_integral(lambda t: np.ones_like(t), n, -1.0, tstar, nodes=m)
        return above - below
    parts = _crossing_parts(np.array([r]), np.array([a]), q, n, m, gammas=(q - 1.0,))
    ln_l, ln_r = parts[q - 1.0]
    return float(np.exp(ln_r[0]) - np.exp(ln_l[0]))


def optimal_shift(
    r: float, ex: Union[ExponentPair, float], dim: int, nodes: Optional[int] = None
) -> float:
    """The shift a*(r) minimizing ||P_r - a||_{L^q}.

    Closed forms at the endpoint exponents: for p = inf (q = 1) the kernel
    value at the equator level, a* = (1-r^2)/(1+r^2)^(n/2); for p = 1
    (q = inf) the Chebyshev center, the midpoint of the kernel's range.
    """
    ex = _as_exponents(ex)
    n = validate_dimension(dim)
    r = _validate_radius(r)
    if r == 0.0:
        return 1.0
    if ex.q == 1.0:
        return (1.0 - r) * (1.0 + r) / (1.0 + r * r) ** (0.5 * n)
    if ex.q == math.inf:
        kmin, kmax = axial_kernel_range(r, n)
        return 0.5 * (kmax + kmin)
    m = _resolve_nodes(r, nodes)
    return float(_solve_shifts(np.array([r]), ex.q, n, m)[0])


def _node_buckets(flat: np.ndarray, nodes: Optional[int]):
    """Group radii by quadrature size: power-of-two multiples of the default."""
    if nodes is not None:
        m = int(nodes)
        if m < 2:
            raise ValueError(f"node count must be >= 2, got {m}")
        yield m, np.arange(flat.size)
        return
    required = np.array([node_count_for_radius(float(r)) for r in flat])
    steps = np.ceil(np.log2(np.maximum(required, DEFAULT_NODE_COUNT) / DEFAULT_NODE_COUNT))
    sizes = (DEFAULT_NODE_COUNT * 2 ** steps.astype(int)).astype(int)
    for m in np.unique(sizes):
        yield int(m), np.nonzero(sizes == m)[0]


def schwarz_factors(
    radii: Sequence[float],
    ex: Union[ExponentPair, float],
    dim: int,
    nodes: Optional[int] = None,
):
    """Optimal shifts and bound factors for a batch of radii (vectorized)."""
    ex = _as_exponents(ex)
    n = validate_dimension(dim)
    rs = np.asarray(radii, dtype=float)
    flat = np.atleast_1d(rs.astype(float)).ravel()
    if np.any(flat < 0.0) or np.any(flat >= 1.0):
        raise InvalidRadiusError("all radii must lie in [0, 1)")
    if ex.q == math.inf:
        kmin, kmax = _kernel_extremes(flat, n)
        shifts = 0.5 * (kmax + kmin)
        factors = 0.5 * (kmax - kmin)
        shifts[flat == 0.0] = 1.0
        return shifts.reshape(rs.shape), factors.reshape(rs.shape)
    shifts = np.ones_like(flat)
    factors = np.zeros_like(flat)
    for m, idx in _node_buckets(flat, nodes):
        sub = flat[idx]
        if ex.q == 1.0:
            sh = np.where(
                sub > 0.0,
                (1.0 - sub) * (1.0 + sub) / (1.0 + sub * sub) ** (0.5 * n),
                1.0,
            )
        else:
            sh = _solve_shifts(sub, ex.q, n, m)
        shifts[idx] = sh
        factors[idx] = _phi_batch(sub, sh, ex.q, n, m)
    factors[flat == 0.0] = 0.0
    return shifts.reshape(rs.shape), factors.reshape(rs.shape)


def schwarz_factor(
    r: float, ex: Union[ExponentPair, float], dim: int, nodes: Optional[int] = None
) -> float:
    """g_p(r): the sharp factor in |f(x)| <= g_p(|x|) ||f||_p for f(0) = 0."""
    r = _validate_radius(r)
    _, factors = schwarz_factors(np.array([r]), ex, dim, nodes=nodes)
    return float(factors[0])


def factor_curve(
    ex: Union[ExponentPair, float],
    dim: int,
    radii: Sequence[float],
    nodes: Optional[int] = None,
) -> BoundCurve:
    """Solve the bound on a strictly increasing grid of radii."""
    ex = _as_exponents(ex)
    n = validate_dimension(dim)
    rs = np.asarray(radii, dtype=float)
    if rs.ndim != 1 or rs.size == 0:
        raise ValueError("radius grid must be a non-empty 1-D sequence")
    if np.any(np.diff(rs) <= 0.0):
        raise ValueError("radius grid must be strictly increasing")
    if rs[0] < 0.0 or rs[-1] >= 1.0:
        raise InvalidRadiusError("all radii must lie in [0, 1)")
    try:
        shifts, factors = schwarz_factors(rs, ex, n, nodes=nodes)
    except (ArithmeticError, ValueError) as exc:
        raise type(exc)(f"{exc} (while solving radius grid up to r={rs[-1]})") from exc
    points = tuple(
        BoundPoint(r=float(r), shift=float(a), bound=float(g))
        for r, a, g in zip(rs, shifts, factors)
    )
    return BoundCurve(exponents=ex, dim=n, points=points)


def closed_form_factor(
    p_case, r: float, dim: int, nodes: Optional[int] = None
) -> float:
    """Exact special-case factors: p = 1, p = 2, and p = inf.

    p = 1:   half the spread of the kernel range (Chebyshev radius).
    p = 2:   sqrt((1 + r^2)/(1 - r^2)^(n-1) - 1).
    p = inf: the hemisphere-difference harmonic function at r N, computed
             as the zonal quadrature of P_r * sign(t).
    """
    n = validate_dimension(dim)
    r = _validate_radius(r)
    p = float(p_case)
    if p == 1.0:
        kmin, kmax = axial_kernel_range(r, n)
        return 0.5 * (kmax - kmin)
    if p == 2.0:
        return math.sqrt((1.0 + r * r) / (1.0 - r * r) ** (n - 1) - 1.0)
    if p == math.inf:
        if r == 0.0:
            return 0.0
        m = _resolve_nodes(r, nodes)
        rv = np.array([[r]])
        upper = zonal_segment_integral(
            lambda t: _axial_many(rv, t[None, :], n)[0], n, 0.0, 1.0, nodes=m
        )
        lower = zonal_segment_integral(
            lambda t: _axial_many(rv, t[None, :], n)[0], n, -1.0, 0.0, nodes=m
        )
        return upper - lower
    raise InvalidExponentError(f"no closed form for p = {p_case}; use 1, 2 or inf")


def sharp_gradient_constant(ex: Union[ExponentPair, float], dim: int) -> float:
    """Best constant C with ||Df(0)|| <= C ||f||_p over f(0) = 0.

    C = n (Gamma(n/2) Gamma((1+q)/2) / (sqrt(pi) Gamma((n+q)/2)))^(1/q),
    evaluated through log-Gamma.  For p = 1 the q -> inf limit is n.
    """
    ex = _as_exponents(ex)
    n = validate_dimension(dim)
    if ex.q == math.inf:
        return float(n)
    q = ex.q
    ln = (
        math.lgamma(0.5 * n)
        + math.lgamma(0.5 * (1.0 + q))
        - 0.5 * math.log(math.pi)
        - math.lgamma(0.5 * (n + q))
    )
    return n * math.exp(ln / q)


def factor_slope_at_zero(
    ex: Union[ExponentPair, float], dim: int, nodes: Optional[int] = None
) -> float:
    """g_p'(0) = (int_S |n eta_n|^q dsigma)^(1/q), by moment quadrature.

    Must agree with sharp_gradient_constant, which evaluates the same
    quantity through the Gamma function.
    """
    ex = _as_exponents(ex)
    n = validate_dimension(dim)
    if ex.q == math.inf:
        raise InvalidExponentError("slope quadrature requires q < inf (p > 1)")
    q = ex.q
    m = int(nodes) if nodes is not None else DEFAULT_NODE_COUNT
    half = zonal_segment_integral(
        lambda t: np.ones_like(t), n, 0.0, 1.0, power_lo=q, nodes=m
    )
    return n * (2.0 * half) ** (1.0 / q)


def schwarz_bound(
    x,
    ex: Union[ExponentPair, float],
    norm: float,
    nodes: Optional[int] = None,
) -> float:
    """Upper bound g_p(|x|) * norm for |f(x)| given ||f||_p = norm, f(0) = 0."""
    x = np.asarray(x, dtype=float)
    n = validate_dimension(x.size)
    norm = float(norm)
    if norm <= 0.0:
        raise ValueError(f"norm must be positive, got {norm}")
    r = float(np.linalg.norm(x))
    if r >= 1.0:
        from .errors import OutOfBallError

        raise OutOfBallError(f"|x| = {r} is not inside the unit ball")
    return schwarz_factor(r, ex, n, nodes=nodes) * norm
