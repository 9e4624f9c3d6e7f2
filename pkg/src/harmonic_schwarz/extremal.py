"""Extremal boundary data and sharpness verification.

For 1 < p < inf the boundary profile

    f_R(t) = |P_R(t) - a*(R)|^(q-1) * sign(P_R(t) - a*(R))

turns the Hoelder step of the pointwise bound into an equality at x = R N;
for p = inf the extremal is the hemisphere sign profile.  Everything here
is reduced to the axis x = r N, where the data is zonal, so all integrals
run through the kink-aware zonal quadrature: every integral involving f_R
splits at the level crossing t*(R), with the local power |t - t*|^(q-1)
moved into the quadrature weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np

from .bound import (
    ExponentPair,
    _as_exponents,
    optimal_shift,
    schwarz_factor,
)
from .errors import InvalidExponentError, InvalidRadiusError
from .kernel import axial_kernel, kernel_level_crossing
from .quadrature import (
    node_count_for_radius,
    validate_dimension,
    zonal_segment_integral,
)

__all__ = [
    "SharpnessReport",
    "ZonalProfile",
    "extremal_boundary",
    "gradient_extremal_check",
    "hp_norm_zonal",
    "poisson_extend_axial",
    "sharpness_report",
]


@dataclass(frozen=True)
class ZonalProfile:
    """Boundary data depending only on t = eta_n.

    kinks lists the points where the profile is not smooth; kink_powers[i]
    is the exponent gamma of the local factor |t - kinks[i]|^gamma (zero for
    a plain corner or jump).  Quadrature splits at every kink and absorbs
    the power into the rule weight.
    """

    fn: Callable
    kinks: Tuple[float, ...] = ()
    kink_powers: Tuple[float, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.kink_powers is None:
            object.__setattr__(self, "kink_powers", (0.0,) * len(self.kinks))
        if len(self.kinks) != len(self.kink_powers):
            raise ValueError("kinks and kink_powers must have equal length")
        if any(not -1.0 <= k <= 1.0 for k in self.kinks):
            raise ValueError("kinks must lie in [-1, 1]")

    def __call__(self, t):
        return self.fn(np.asarray(t, dtype=float))


def _segments(profile: ZonalProfile):
    """Consecutive sub-intervals of [-1, 1] with the kink power at each end."""
    marks = sorted(zip(profile.kinks, profile.kink_powers))
    points = [(-1.0, 0.0)] + [m for m in marks if -1.0 < m[0] < 1.0] + [(1.0, 0.0)]
    for (lo, plo), (hi, phi_) in zip(points[:-1], points[1:]):
        if hi > lo:
            yield lo, hi, plo, phi_


def _integrate_against(profile, dim, weight_fn, nodes):
    """int weight(t) * profile(t) dsigma, kink-aware."""
    total = 0.0
    for lo, hi, plo, phi_ in _segments(profile):
        def smooth(t, lo=lo, hi=hi, plo=plo, phi_=phi_):
            v = profile(t)
            if weight_fn is not None:
                v = v * weight_fn(t)
            if plo:
                v = v / (t - lo) ** plo
            if phi_:
                v = v / (hi - t) ** phi_
            return v

        total += zonal_segment_integral(
            smooth, dim, lo, hi, power_lo=plo, power_hi=phi_, nodes=nodes
        )
    return total


def extremal_boundary(
    R: float, ex: Union[ExponentPair, float], dim: int, nodes: Optional[int] = None
) -> ZonalProfile:
    """The boundary profile achieving equality of the bound at x = R N.

    Defined for 1 < p <= inf; the p = 1 extremal is only approached in the
    limit p -> 1 and is not constructed.
    """
    ex = _as_exponents(ex)
    n = validate_dimension(dim)
    R = float(R)
    if not 0.0 < R < 1.0:
        raise InvalidRadiusError(f"extremal radius must lie in (0, 1), got {R}")
    if ex.p == 1.0:
        raise InvalidExponentError(
            "no boundary extremal for p = 1; sharpness is asymptotic as p -> 1"
        )
    shift = optimal_shift(R, ex, n, nodes=nodes)
    tstar = kernel_level_crossing(R, shift, n)
    if ex.p == math.inf:
        def sign_profile(t):
            return np.sign(t - tstar)

        return ZonalProfile(fn=sign_profile, kinks=(tstar,), kink_powers=(0.0,))

    expo = ex.q - 1.0

    def profile(t):
        d = axial_kernel(R, t, n) - shift
        return np.sign(d) * np.abs(d) ** expo

    if expo == round(expo) and int(round(expo)) % 2 == 1:
        # sign(d)|d|^expo == d^expo: smooth, nothing to split at.
        return ZonalProfile(fn=profile)
    return ZonalProfile(fn=profile, kinks=(tstar,), kink_powers=(expo,))


def poisson_extend_axial(
    f: ZonalProfile, r: float, dim: int, nodes: Optional[int] = None
) -> float:
    """Harmonic extension of zonal boundary data, evaluated at x = r N."""
    n = validate_dimension(dim)
    r = float(r)
    if not 0.0 <= r < 1.0:
        raise InvalidRadiusError(f"radius must lie in [0, 1), got {r}")
    m = int(nodes) if nodes is not None else node_count_for_radius(r)
    if r == 0.0:
        return _integrate_against(f, n, None, m)
    return _integrate_against(f, n, lambda t: axial_kernel(r, t, n), m)


def hp_norm_zonal(
    f: ZonalProfile, ex: Union[ExponentPair, float], dim: int,
    nodes: Optional[int] = None,
) -> float:
    """L^p(sigma) norm of a zonal profile (the boundary Hardy norm).

    For p = inf the supremum is taken over a refined cosine grid together
    with the kink points and interval endpoints.
    """
    ex = _as_exponents(ex)
    n = validate_dimension(dim)
    if ex.p == math.inf:
        best = 0.0
        for size in (4096, 8192):
            t = np.cos(np.linspace(math.pi, 0.0, size + 1))
            extra = []
            for k in f.kinks:
                extra.extend([k, min(k + 1e-9, 1.0), max(k - 1e-9, -1.0)])
            t = np.concatenate([t, np.asarray(extra)]) if extra else t
            best = max(best, float(np.max(np.abs(f(t)))))
        return best
    p = ex.p
    m = int(nodes) if nodes is not None else node_count_for_radius(0.0)
    total = 0.0
    for lo, hi, plo, phi_ in _segments(f):
        def smooth(t, lo=lo, hi=hi, plo=plo, phi_=phi_):
            v = np.abs(f(t))
            if plo:
                v = v / (t - lo) ** plo
            if phi_:
                v = v / (hi - t) ** phi_
            return v**p

        total += zonal_segment_integral(
            smooth, n, lo, hi, power_lo=plo * p, power_hi=phi_ * p, nodes=m
        )
    return total ** (1.0 / p)


@dataclass(frozen=True)
class SharpnessReport:
    """Equality check of the pointwise bound at its extremal data."""

    R: float
    exponents: ExponentPair
    dim: int
    lhs: float
    norm: float
    bound: float
    ratio: float
    origin_value: float


def sharpness_report(
    R: float, ex: Union[ExponentPair, float], dim: int, nodes: Optional[int] = None
) -> SharpnessReport:
    """Verify that the extremal profile attains the bound at x = R N.

    The ratio lhs / (norm * bound) must equal 1; the extension must vanish
    at the origin.  A ratio exceeding 1 beyond tolerance indicates a solver
    inconsistency and is reported as computed, never clipped.
    """
    ex = _as_exponents(ex)
    n = validate_dimension(dim)
    R = float(R)
    if not 0.0 < R < 1.0:
        raise InvalidRadiusError(f"extremal radius must lie in (0, 1), got {R}")
    m = int(nodes) if nodes is not None else node_count_for_radius(R)
    f = extremal_boundary(R, ex, n, nodes=m)
    lhs = poisson_extend_axial(f, R, n, nodes=m)
    norm = hp_norm_zonal(f, ex, n, nodes=m)
    bound_value = schwarz_factor(R, ex, n, nodes=m)
    origin = poisson_extend_axial(f, 0.0, n, nodes=m)
    return SharpnessReport(
        R=R,
        exponents=ex,
        dim=n,
        lhs=lhs,
        norm=norm,
        bound=bound_value,
        ratio=lhs / (norm * bound_value),
        origin_value=origin,
    )


def gradient_extremal_check(
    ex: Union[ExponentPair, float], dim: int, nodes: Optional[int] = None
) -> float:
    """Achieved ratio ||Du(0)|| / ||f||_p for f(t) = sign(t) |t|^(q-1).

    The origin gradient of the extension of zonal data f is n * int t f dsigma
    along the axis; the result must equal the sharp gradient constant.
    """
    ex = _as_exponents(ex)
    n = validate_dimension(dim)
    if ex.p == 1.0:
        raise InvalidExponentError("gradient extremal requires p > 1")
    expo = ex.q - 1.0

    def profile(t):
        return np.sign(t) * np.abs(t) ** expo if expo else np.sign(t)

    if expo == round(expo) and int(round(expo)) % 2 == 1:
        f = ZonalProfile(fn=profile)
    else:
        f = ZonalProfile(fn=profile, kinks=(0.0,), kink_powers=(expo,))
    m = int(nodes) if nodes is not None else node_count_for_radius(0.0)
    grad = n * _integrate_against(f, n, lambda t: t, m)
    norm = hp_norm_zonal(f, ex, n, nodes=m)
    return grad / norm
