"""Poisson kernel of the unit ball and its axial reduction.

P(x, zeta) = (1 - |x|^2) / |x - zeta|^n for x in B^n, zeta on S^{n-1}.
Rotating x onto the positive last axis turns the kernel into a function of
t = eta_n alone:

    P_r(t) = (1 - r^2) / (1 + r^2 - 2 r t)^(n/2).

The denominator is always evaluated as (1-r)^2 + 2r(1-t), which has no
cancellation even for r, t close to 1.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidRadiusError, OutOfBallError
from .quadrature import validate_dimension

__all__ = [
    "AxialKernelRange",
    "axial_kernel",
    "axial_kernel_range",
    "kernel_level_crossing",
    "poisson_kernel",
]

_ENDPOINT_TOL = 1e-12


class AxialKernelRange(NamedTuple):
    min_value: float
    max_value: float


def _validate_radius(r: float) -> float:
    r = float(r)
    if not 0.0 <= r < 1.0:
        raise InvalidRadiusError(f"radius must lie in [0, 1), got {r}")
    return r


def poisson_kernel(x, zeta) -> float:
    """P(x, zeta) for x strictly inside the ball and zeta on the sphere."""
    x = np.asarray(x, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    n = validate_dimension(x.size)
    if zeta.size != n:
        raise ValueError(f"point and boundary vectors disagree: {n} vs {zeta.size}")
    rx = float(np.linalg.norm(x))
    if rx >= 1.0:
        raise OutOfBallError(f"|x| = {rx} is not inside the unit ball")
    if abs(float(np.linalg.norm(zeta)) - 1.0) > _ENDPOINT_TOL:
        raise ValueError("zeta must be a unit vector (within 1e-12)")
    dist2 = float(np.sum((x - zeta) ** 2))
    return (1.0 - rx) * (1.0 + rx) / dist2 ** (0.5 * n)


def axial_kernel(r: float, t, dim: int):
    """P_r(t): the kernel at x = r N against eta with eta_n = t."""
    n = validate_dimension(dim)
    r = _validate_radius(r)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < -1.0 - _ENDPOINT_TOL) or np.any(t_arr > 1.0 + _ENDPOINT_TOL):
        raise ValueError("t must lie in [-1, 1]")
    denom = (1.0 - r) ** 2 + 2.0 * r * (1.0 - t_arr)
    out = (1.0 - r) * (1.0 + r) / denom ** (0.5 * n)
    return out if np.ndim(t) else float(out)


def axial_kernel_range(r: float, dim: int) -> AxialKernelRange:
    """Extreme values of P_r over the sphere: attained at t = -1 and t = +1."""
    n = validate_dimension(dim)
    r = _validate_radius(r)
    one_minus = 1.0 - r
    one_plus = 1.0 + r
    return AxialKernelRange(
        min_value=one_minus * one_plus / one_plus**n,
        max_value=one_minus * one_plus / one_minus**n,
    )


def kernel_level_crossing(r: float, a: float, dim: int) -> Optional[float]:
    """Solve P_r(t*) = a for t*; None when a is outside the kernel's range.

    Analytic inversion: t* = 1 + ((1-r)^2 - ((1-r^2)/a)^(2/n)) / (2r).
    Values within 1e-12 of an endpoint are clamped onto [-1, 1].
    """
    n = validate_dimension(dim)
    r = _validate_radius(r)
    a = float(a)
    if a <= 0.0:
        raise ValueError(f"level must be positive, got {a}")
    if r == 0.0:
        return None
    x_pow = ((1.0 - r) * (1.0 + r) / a) ** (2.0 / n)
    t = 1.0 + ((1.0 - r) ** 2 - x_pow) / (2.0 * r)
    if t > 1.0:
        return 1.0 if t <= 1.0 + _ENDPOINT_TOL else None
    if t < -1.0:
        return -1.0 if t >= -1.0 - _ENDPOINT_TOL else None
    return float(t)
