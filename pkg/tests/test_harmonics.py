import math

import numpy as np
import pytest

from harmonic_schwarz.bound import conjugate, schwarz_factor, sharp_gradient_constant
from harmonic_schwarz.errors import UnsupportedDimensionError
from harmonic_schwarz.harmonics import (
    HarmonicSample,
    boundary_p_norm,
    check_corollary,
    check_gradient,
    check_schwarz,
    evaluate_harmonic,
    gradient_at_origin,
    monte_carlo_check,
    random_harmonic,
)
from harmonic_schwarz.quadrature import uniform_sphere_samples

from helpers import sphere_even_moment


def coordinate_sample(n, axis):
    """The map x -> x_axis as a degree-1 sample."""
    if n == 2:
        return HarmonicSample(
            dim=2, target_dim=1, max_degree=1, seed=0, terms=(((1, axis, 1.0),),)
        )
    order = {0: 1, 1: -1, 2: 0}[axis]  # S_1^1 = x, S_1^-1 = y, S_1^0 = z
    return HarmonicSample(
        dim=3, target_dim=1, max_degree=1, seed=0, terms=(((1, order, 1.0),),)
    )


def fd_laplacian_ratio(sample, pts, h=2e-3):
    """Cancellation ratio of a 4th-order finite-difference Laplacian."""
    worst = 0.0
    for x in pts:
        lap = np.zeros(sample.target_dim)
        scale = np.zeros(sample.target_dim)
        f0 = evaluate_harmonic(sample, x)
        for i in range(sample.dim):
            e = np.zeros(sample.dim)
            e[i] = 1.0
            fp = evaluate_harmonic(sample, x + h * e)
            fm = evaluate_harmonic(sample, x - h * e)
            fp2 = evaluate_harmonic(sample, x + 2 * h * e)
            fm2 = evaluate_harmonic(sample, x - 2 * h * e)
            second = (16 * (fp + fm) - (fp2 + fm2) - 30 * f0) / (12 * h * h)
            lap += second
            scale += np.abs(second)
        worst = max(worst, float(np.max(np.abs(lap) / (scale + 1.0))))
    return worst


@pytest.mark.parametrize("n,deg,m", [(2, 8, 1), (2, 3, 2), (3, 6, 2), (3, 8, 3)])
def test_samples_are_harmonic(n, deg, m):
    sample = random_harmonic(n, deg, m, seed=100 * n + deg)
    rng = np.random.default_rng(5)
    pts = 0.6 * uniform_sphere_samples(n, 20, seed=3)
    pts *= rng.uniform(0.2, 1.0, 20)[:, None]
    assert fd_laplacian_ratio(sample, pts) < 1e-8


def test_origin_value_is_exactly_zero():
    for n in (2, 3):
        sample = random_harmonic(n, 8, 3, seed=1)
        assert np.all(evaluate_harmonic(sample, np.zeros(n)) == 0.0)


def test_random_harmonic_deterministic():
    assert random_harmonic(3, 5, 2, seed=9) == random_harmonic(3, 5, 2, seed=9)


def test_unsupported_dimension_points_to_monte_carlo():
    with pytest.raises(UnsupportedDimensionError, match="monte_carlo"):
        random_harmonic(4, 3, 1, seed=0)


def test_degree_budget_enforced():
    with pytest.raises(ValueError):
        random_harmonic(3, 13, 1, seed=0)


def test_constant_terms_rejected():
    with pytest.raises(ValueError):
        HarmonicSample(
            dim=2, target_dim=1, max_degree=1, seed=0, terms=(((0, 0, 1.0),),)
        )


def test_re_z_squared_value():
    sample = HarmonicSample(
        dim=2, target_dim=1, max_degree=2, seed=0, terms=(((2, 0, 1.0),),)
    )
    got = evaluate_harmonic(sample, np.array([0.3, 0.4]))
    assert abs(got[0] - (-0.07)) < 1e-16


def test_evaluation_is_linear_in_terms():
    s1 = random_harmonic(3, 4, 1, seed=10)
    s2 = random_harmonic(3, 4, 1, seed=11)
    combined = HarmonicSample(
        dim=3,
        target_dim=1,
        max_degree=4,
        seed=0,
        terms=(s1.terms[0] + s2.terms[0],),
    )
    pts = 0.7 * uniform_sphere_samples(3, 10, seed=2)
    lhs = evaluate_harmonic(combined, pts)
    rhs = evaluate_harmonic(s1, pts) + evaluate_harmonic(s2, pts)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


# ---------------------------------------------------------------------------
# boundary norms

def test_coordinate_norms_n3():
    z = coordinate_sample(3, 2)
    assert abs(boundary_p_norm(z, 2) - 1.0 / math.sqrt(3)) < 1e-13
    assert abs(boundary_p_norm(z, 1) - 0.5) < 1e-12
    assert abs(boundary_p_norm(z, math.inf) - 1.0) < 1e-12
    x = coordinate_sample(3, 0)
    assert abs(boundary_p_norm(x, 2) - 1.0 / math.sqrt(3)) < 1e-13
    assert abs(boundary_p_norm(x, 1.5) - (1.0 / 2.5) ** (1 / 1.5)) < 1e-9


@pytest.mark.parametrize("k", range(1, 9))
def test_circle_fourier_orthogonality(k):
    sample = HarmonicSample(
        dim=2, target_dim=1, max_degree=k, seed=0, terms=(((k, 0, 1.0),),)
    )
    assert abs(boundary_p_norm(sample, 2) - 1.0 / math.sqrt(2)) < 1e-13


def test_circle_abs_norm():
    # mean of |cos k theta| over the circle is 2/pi for every k
    sample = HarmonicSample(
        dim=2, target_dim=1, max_degree=4, seed=0, terms=(((4, 0, 1.0),),)
    )
    assert abs(boundary_p_norm(sample, 1) - 2.0 / math.pi) < 1e-10
    assert abs(boundary_p_norm(sample, math.inf) - 1.0) < 1e-12


def test_norm_scaling_homogeneity():
    base = random_harmonic(3, 5, 2, seed=3)
    scaled = HarmonicSample(
        dim=3,
        target_dim=2,
        max_degree=5,
        seed=3,
        terms=tuple(
            tuple((d, i, 2.5 * c) for d, i, c in comp) for comp in base.terms
        ),
    )
    for p in (1.0, 2.0, math.inf):
        assert abs(
            boundary_p_norm(scaled, p) - 2.5 * boundary_p_norm(base, p)
        ) < 1e-9 * boundary_p_norm(scaled, p)


def test_sphere_norm_against_frozen_brute_force():
    # frozen oracle: 65536-meridian uniform average of exact line integrals
    sample = random_harmonic(3, 8, 1, seed=13)
    assert abs(boundary_p_norm(sample, 1) - 2.624549378881012) < 2e-9


def test_sup_norm_dominates_dense_grid():
    sample = random_harmonic(3, 7, 2, seed=8)
    sup = boundary_p_norm(sample, math.inf)
    pts = uniform_sphere_samples(3, 4000, seed=1)
    dense = float(np.max(np.linalg.norm(evaluate_harmonic(sample, pts), axis=1)))
    assert sup >= dense - 1e-12
    assert sup <= dense * 1.2  # sanity: the polished sup is not wildly above


def test_boundary_norm_monotone_in_radius():
    # the Hardy supremum over radii is attained at the boundary
    sample = random_harmonic(3, 6, 1, seed=4)
    pts = uniform_sphere_samples(3, 3000, seed=2)
    inner = float(np.mean(np.abs(evaluate_harmonic(sample, 0.9 * pts)) ** 2)) ** 0.5
    assert inner <= boundary_p_norm(sample, 2) + 1e-12


# ---------------------------------------------------------------------------
# gradient at the origin

def test_gradient_of_pure_high_degree_vanishes():
    sample = HarmonicSample(
        dim=2, target_dim=1, max_degree=2, seed=0, terms=(((2, 0, 1.0),),)
    )
    jac, norm = gradient_at_origin(sample)
    assert np.all(jac == 0.0) and norm == 0.0


def test_gradient_of_coordinate_map():
    jac, norm = gradient_at_origin(coordinate_sample(3, 2))
    assert np.array_equal(jac, np.array([[0.0, 0.0, 1.0]]))
    assert norm == 1.0


def test_gradient_of_identity_pair():
    sample = HarmonicSample(
        dim=2,
        target_dim=2,
        max_degree=1,
        seed=0,
        terms=(((1, 0, 1.0),), ((1, 1, 1.0),)),
    )
    jac, norm = gradient_at_origin(sample)
    assert np.array_equal(jac, np.eye(2))
    assert abs(norm - 1.0) < 1e-15


def test_degree_one_samples_attain_sqrt_n():
    for n in (2, 3):
        sample = random_harmonic(n, 1, 1, seed=77)
        _, lhs = gradient_at_origin(sample)
        ratio = lhs / boundary_p_norm(sample, 2)
        assert abs(ratio - math.sqrt(n)) < 1e-10


# ---------------------------------------------------------------------------
# bound checks

def test_check_schwarz_coordinate_example():
    sample = coordinate_sample(3, 2)
    norm = boundary_p_norm(sample, 2)
    rhs = schwarz_factor(0.5, conjugate(2.0), 3) * norm
    lhs = abs(evaluate_harmonic(sample, np.array([0.0, 0.0, 0.5]))[0])
    assert abs(lhs - 0.5) < 1e-15
    assert abs(rhs - 0.638285) < 1e-6
    assert lhs <= rhs


@pytest.mark.parametrize("p", [1.0, 2.0, 4.0, math.inf])
@pytest.mark.parametrize("n", [2, 3])
def test_check_schwarz_no_violations(p, n):
    for seed in (1, 2):
        m = 1 + seed % 3
        sample = random_harmonic(n, 6, m, seed=seed)
        report = check_schwarz(sample, p, trials=40, seed=seed + 100)
        assert report.violations == 0
        assert report.worst_slack > 0


def test_check_gradient_equality_case():
    report = check_gradient(coordinate_sample(3, 2), 2.0)
    assert abs(report.lhs - 1.0) < 1e-15
    assert abs(report.rhs - 1.0) < 1e-12
    assert report.slack > -1e-12


def test_check_gradient_trivial_case():
    sample = HarmonicSample(
        dim=2, target_dim=1, max_degree=2, seed=0, terms=(((2, 0, 1.0),),)
    )
    for p in (1.5, 3.0):
        report = check_gradient(sample, p)
        assert report.lhs == 0.0
        assert report.slack == report.rhs


def test_check_gradient_random_batch():
    for seed in range(6):
        sample = random_harmonic(2 + seed % 2, 7, 1 + seed % 3, seed=seed)
        for p in (1.5, 2.0, math.inf):
            assert check_gradient(sample, p).slack > 0


def test_corollary_equality_family():
    report = check_corollary(coordinate_sample(3, 2), np.array([5.0]))
    # ||x_n + 5||_2^2 = 25 + 1/3, so the rhs collapses to sqrt(3) sqrt(1/3) = 1
    assert abs(report.rhs - 1.0) < 1e-12
    assert abs(report.lhs - 1.0) < 1e-15


def test_corollary_zero_shift_reduces_to_gradient():
    sample = random_harmonic(3, 5, 2, seed=6)
    a = check_corollary(sample, np.zeros(2))
    b = check_gradient(sample, 2.0)
    assert abs(a.rhs - b.rhs) < 1e-9 * b.rhs
    assert a.lhs == b.lhs


def test_corollary_random_batch():
    rng = np.random.default_rng(42)
    for seed in range(25):
        n = 2 + seed % 2
        m = 1 + seed % 3
        sample = random_harmonic(n, 6, m, seed=seed)
        shift = rng.standard_normal(m) * 4.0
        assert check_corollary(sample, shift).slack > -1e-9


def test_corollary_shift_shape_validated():
    with pytest.raises(ValueError):
        check_corollary(random_harmonic(3, 4, 2, seed=0), np.zeros(3))


# ---------------------------------------------------------------------------
# Monte Carlo mode

def test_monte_carlo_linear_data():
    # eta_n extends to x_n exactly, so the estimate must sit near 0.4 = |x|
    report = monte_carlo_check(
        5, 2.0, lambda eta: eta[:, -1], samples=100_000, seed=9,
        x=0.4 * np.eye(5)[-1],
    )
    assert not report.inconclusive
    assert report.worst_slack > 0


def test_monte_carlo_constant_data_is_trivial():
    report = monte_carlo_check(
        6, 2.0, lambda eta: np.ones(len(eta)), samples=10_000, seed=3,
        x=0.3 * np.eye(6)[0],
    )
    assert not report.inconclusive  # mean subtraction gives 0 <= 0


def test_monte_carlo_smooth_data_high_dimension():
    def data(eta):
        return np.sin(2.0 * eta[:, 0]) + eta[:, -1] ** 3

    report = monte_carlo_check(6, 3.0, data, samples=100_000, seed=12,
                               x=0.45 * np.eye(6)[-1])
    assert not report.inconclusive


def test_monte_carlo_deterministic():
    kwargs = dict(samples=5000, seed=21, x=0.2 * np.eye(4)[0])
    a = monte_carlo_check(4, 2.0, lambda eta: eta[:, 1] * eta[:, 2], **kwargs)
    b = monte_carlo_check(4, 2.0, lambda eta: eta[:, 1] * eta[:, 2], **kwargs)
    assert a == b


def test_moment_oracle_consistency():
    # the coordinate norms used above reduce to sphere moments
    assert abs(sphere_even_moment(3, 1) - 1.0 / 3.0) < 1e-15
    assert abs(sphere_even_moment(4, 1) - 0.25) < 1e-15


def test_gradient_constant_reference():
    # anchor for the equality tests above
    assert abs(sharp_gradient_constant(conjugate(2.0), 3) - math.sqrt(3)) < 1e-14
