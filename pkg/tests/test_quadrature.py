import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import roots_jacobi

from harmonic_schwarz.errors import (
    InvalidDimensionError,
    NearBoundaryError,
    NonFiniteIntegrandError,
)
from harmonic_schwarz.kernel import axial_kernel
from harmonic_schwarz.quadrature import (
    JacobiRule,
    gauss_jacobi,
    jacobi_rule,
    node_count_for_radius,
    uniform_sphere_samples,
    zonal_integral,
    zonal_segment_integral,
)

from helpers import sphere_even_moment, sphere_even_moment_gamma


def test_rule_integrates_one():
    rule = jacobi_rule(3, 32)
    assert abs(rule.integrate(lambda t: np.ones_like(t)) - 1.0) < 1e-13


def test_rule_odd_moment_vanishes():
    rule = jacobi_rule(3, 32)
    assert abs(rule.integrate(lambda t: t)) < 1e-14


def test_rule_second_moment_quarter():
    rule = jacobi_rule(4, 32)
    assert abs(rule.integrate(lambda t: t**2) - 0.25) < 1e-14


@pytest.mark.parametrize("n", range(2, 9))
def test_even_moments_match_recurrence_oracle(n):
    rule = jacobi_rule(n, 64)
    for k in range(1, 11):
        want = sphere_even_moment(n, k)
        assert abs(sphere_even_moment_gamma(n, k) - want) < 1e-15 * (1 + want)
        got = rule.integrate(lambda t, k=k: t ** (2 * k))
        assert abs(got - want) < 1e-12


@pytest.mark.parametrize(
    "alpha,beta,m",
    [
        (-0.5, -0.5, 32),
        (0.0, 0.0, 64),
        (0.5, 0.5, 128),
        (2.5, 2.5, 48),
        (0.0, -0.5, 32),
        (1.5, 0.25, 64),
        (0.0, 3.0, 96),
        (-0.5, 0.37, 80),
        (1.0, -2.0 / 3.0, 256),
        (0.0, 18.0, 128),
    ],
)
def test_gauss_jacobi_matches_scipy(alpha, beta, m):
    x, w = gauss_jacobi(alpha, beta, m)
    xs, ws = roots_jacobi(m, alpha, beta)
    assert np.max(np.abs(x - xs)) < 5e-14
    # scipy's endpoint weights can themselves be off by ~1e-10 for singular
    # exponents, so this comparison is only a coarse cross-check
    assert np.max(np.abs(w - ws)) < 1e-7 * np.max(ws)
    # the sharper criterion: exactness on (1+x)^k against the Beta closed form
    for k in (0, 1, 5, 17):
        want = math.exp(
            (alpha + beta + k + 1) * math.log(2.0)
            + math.lgamma(alpha + 1.0)
            + math.lgamma(beta + k + 1.0)
            - math.lgamma(alpha + beta + k + 2.0)
        )
        assert abs(float(w @ (1.0 + x) ** k) - want) < 1e-13 * want


@given(
    n=st.integers(min_value=2, max_value=10),
    m=st.integers(min_value=2, max_value=200),
)
def test_rule_weight_sum_is_one(n, m):
    rule = jacobi_rule(n, m)
    assert abs(float(rule.weights.sum()) - 1.0) < 1e-13


def test_zonal_constant():
    assert abs(zonal_integral(lambda t: np.ones_like(t), 5) - 1.0) < 1e-14


def test_zonal_kernel_mean_value():
    got = zonal_integral(lambda t: axial_kernel(0.7, t, 3), 3)
    assert abs(got - 1.0) < 1e-12


def test_zonal_abs_t_on_circle():
    # oracle: adaptive quadrature of (1/pi) |t| (1-t^2)^(-1/2), independent path
    oracle, _ = quad(
        lambda t: abs(t) / (math.pi * math.sqrt(1.0 - t * t)),
        -1.0,
        1.0,
        points=[0.0],
        limit=200,
    )
    assert abs(oracle - 2.0 / math.pi) < 1e-11
    got = zonal_integral(np.abs, 2, split_at=0.0)
    assert abs(got - 2.0 / math.pi) < 1e-13


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_doubling_nodes_is_converged(n):
    def smooth(t):
        return np.exp(t) / (2.0 + np.sin(3.0 * t))

    a = zonal_integral(smooth, n, nodes=128)
    b = zonal_integral(smooth, n, nodes=256)
    assert abs(a - b) < 1e-12


def test_split_matches_adaptive_reference_on_kink():
    kink = lambda t: np.abs(t - 0.3)
    got = zonal_integral(kink, 2, split_at=0.3)
    oracle, _ = quad(
        lambda t: abs(t - 0.3) / (math.pi * math.sqrt(1.0 - t * t)),
        -1.0,
        1.0,
        points=[0.3],
        limit=300,
    )
    assert abs(got - oracle) < 1e-10


def test_segment_integral_with_algebraic_power():
    # int_0^1 t^2.5 (1-t^2)^0 dt * c_3 against the exact Beta value
    got = zonal_segment_integral(lambda t: np.ones_like(t), 3, 0.0, 1.0, power_lo=2.5)
    assert abs(got - 0.5 / 3.5) < 1e-15


def test_sphere_samples_are_unit_and_deterministic():
    a = uniform_sphere_samples(2, 4, seed=0)
    assert a.shape == (4, 2)
    assert np.max(np.abs(np.linalg.norm(a, axis=1) - 1.0)) < 1e-14
    b = uniform_sphere_samples(2, 4, seed=0)
    assert np.array_equal(a, b)


def test_sphere_samples_mean_small():
    pts = uniform_sphere_samples(3, 1000, seed=7)
    assert np.linalg.norm(pts.mean(axis=0)) < 3.0 / math.sqrt(1000)


def test_dimension_validation():
    with pytest.raises(InvalidDimensionError):
        jacobi_rule(1, 16)


def test_node_count_validation():
    with pytest.raises(ValueError):
        jacobi_rule(3, 1)


def test_non_finite_integrand_carries_point():
    def bad(t):
        return np.where(t > 0, np.inf, 1.0)

    with pytest.raises(NonFiniteIntegrandError) as err:
        zonal_integral(bad, 3)
    assert err.value.t is not None and err.value.t > 0


def test_split_point_domain():
    with pytest.raises(ValueError):
        zonal_integral(np.abs, 3, split_at=1.5)


def test_rule_invariants_enforced():
    with pytest.raises(ValueError):
        JacobiRule(
            nodes=np.array([0.5, -0.5]),
            weights=np.array([0.5, 0.5]),
            alpha=0.0,
            normalization=0.5,
        )
    with pytest.raises(ValueError):
        JacobiRule(
            nodes=np.array([-0.5, 0.5]),
            weights=np.array([0.7, 0.7]),
            alpha=0.0,
            normalization=0.5,
        )


def test_near_boundary_budget_is_refused():
    assert node_count_for_radius(0.95) >= 640
    with pytest.raises(NearBoundaryError):
        node_count_for_radius(0.9995)
