"""Independent oracles shared by the test modules."""

import math


def golden_minimize(fn, lo, hi, iters=120):
    """Golden-section minimizer; independent of the root-finding solver."""
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def sphere_even_moment(n, k):
    """int_S eta_n^(2k) dsigma by the recurrence M_k = M_{k-1} (2k-1)/(2k-2+n)."""
    m = 1.0
    for j in range(1, k + 1):
        m *= (2 * j - 1) / (2 * j - 2 + n)
    return m


def sphere_even_moment_gamma(n, k):
    """The same moment from the closed Gamma form, as a second route."""
    return math.exp(
        math.lgamma((2 * k + 1) / 2.0)
        + math.lgamma(n / 2.0)
        - math.lgamma(0.5)
        - math.lgamma(k + n / 2.0)
    )
