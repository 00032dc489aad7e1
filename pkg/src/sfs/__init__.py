"""Shape-from-shading by semi-Lagrangian fixed-point iteration.

Reconstructs a height field from a single orthographic gray-level image
under Lambertian, Oren-Nayar or Phong reflectance, renders synthetic
benchmark images, and measures reconstruction errors.
"""

from .errors import (
    BrightnessOutOfRange,
    ConfigError,
    DegenerateQ,
    DegenerateView,
    DomainError,
    EmptyMask,
    MalformedHeader,
    NoConvergence,
    NonpositiveP,
    SfsError,
    UnsupportedConfiguration,
    UnsupportedDepth,
)
from .grid import (
    BOUNDARY,
    INSIDE,
    OUTSIDE,
    Grid,
    Mask,
    build_mask_from_predicate,
    gradient_central,
    square_grid,
)
from .hj_core import (
    ControlSet,
    OperatorContext,
    assemble_coefficients,
    build_control_set,
    interp_bilinear,
    sl_operator_node,
)
from .metrics import ErrorReport, image_errors, surface_errors
from .reflectance import (
    Lambertian,
    LightSource,
    OnCase,
    OrenNayar,
    Phong,
    Viewer,
    brightness,
    classify_on_case,
    eikonal_rhs,
    lambert_brightness,
    oren_nayar_brightness,
    phong_brightness,
    quantize_image,
    render_image,
)
from .scenes import (
    make_basin,
    make_sinusoid,
    make_sphere,
    make_tent,
    make_vase,
)
from .solver import (
    DirichletField,
    DirichletZero,
    SolveReport,
    SolverConfig,
    StateConstraint,
    kruzkov_forward,
    kruzkov_inverse,
    residual_check,
    solve,
)

__version__ = "0.1.0"
