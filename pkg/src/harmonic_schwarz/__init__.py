"""Sharp Schwarz-type bounds for harmonic mappings of the unit ball."""

from .bound import (
    BoundCurve,
    BoundPoint,
    ExponentPair,
    closed_form_factor,
    conjugate,
    factor_curve,
    factor_slope_at_zero,
    optimal_shift,
    schwarz_bound,
    schwarz_factor,
    schwarz_factors,
    sharp_gradient_constant,
    shift_balance,
    shifted_kernel_norm,
)
from .extremal import (
    SharpnessReport,
    ZonalProfile,
    extremal_boundary,
    gradient_extremal_check,
    hp_norm_zonal,
    poisson_extend_axial,
    sharpness_report,
)
from .harmonics import (
    BoundCheckReport,
    HarmonicSample,
    SlackReport,
    boundary_p_norm,
    check_corollary,
    check_gradient,
    check_schwarz,
    evaluate_harmonic,
    gradient_at_origin,
    monte_carlo_check,
    random_harmonic,
)
from .kernel import (
    AxialKernelRange,
    axial_kernel,
    axial_kernel_range,
    kernel_level_crossing,
    poisson_kernel,
)
from .quadrature import (
    DEFAULT_NODE_COUNT,
    JacobiRule,
    gauss_jacobi,
    jacobi_rule,
    node_count_for_radius,
    uniform_sphere_samples,
    zonal_integral,
    zonal_segment_integral,
)

__version__ = "0.1.0"
