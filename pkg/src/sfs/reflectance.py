"""Forward brightness models and their vertical-light eikonal inversions.

All brightness functions accept a gradient ``grad_u`` with the two
components on the last axis, so they work on single nodes (shape ``(2,)``)
and whole fields (shape ``(ny, nx, 2)``) alike.  Outputs are clamped to
[0, 1] so a render is always a valid model input.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import BrightnessOutOfRange, DegenerateView
from .grid import gradient_central

_UNIT_TOL = 1e-12
_GRAZE_TOL = 1e-9


def _unit3(vec, what):
    v = np.asarray(vec, dtype=np.float64)
    if v.shape != (3,):
        raise ValueError(f"{what} must be a 3-vector")
    if abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
        raise ValueError(f"{what} must be a unit vector (got |v|={np.linalg.norm(v)!r})")
    return v


@dataclass(frozen=True)
class LightSource:
    """Unit direction towards a light source at infinity, z-component > 0."""

    vec: np.ndarray

    def __post_init__(self):
        v = _unit3(self.vec, "light direction")
        if v[2] <= 0.0:
            raise ValueError("light direction needs a positive z-component")
        object.__setattr__(self, "vec", v)

    @classmethod
    def normalized(cls, vec):
        v = np.asarray(vec, dtype=np.float64)
        return cls(v / np.linalg.norm(v))

    @property
    def tilt(self):
        """Projection onto the image plane (omega_1, omega_2)."""
        return self.vec[:2]

    @property
    def z(self):
        return self.vec[2]

    @property
    def vertical(self):
        return float(np.hypot(*self.vec[:2])) <= _UNIT_TOL


@dataclass(frozen=True)
class Viewer:
    """Unit direction towards the orthographic camera."""

    vec: np.ndarray

    def __post_init__(self):
        v = _unit3(self.vec, "viewer direction")
        if v[2] <= 0.0:
            raise ValueError("viewer direction needs a positive z-component")
        object.__setattr__(self, "vec", v)

    @classmethod
    def normalized(cls, vec):
        v = np.asarray(vec, dtype=np.float64)
        return cls(v / np.linalg.norm(v))

    @property
    def tilt(self):
        return self.vec[:2]

    @property
    def z(self):
        return self.vec[2]

    @property
    def vertical(self):
        return float(np.hypot(*self.vec[:2])) <= _UNIT_TOL


VERTICAL = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class Lambertian:
    """Purely diffuse reflection, brightness = N . omega."""


@dataclass(frozen=True)
class OrenNayar:
    """Rough-surface diffuse model; sigma is the cavity slope in radians."""

    sigma: float
    A: float = field(init=False)
    B: float = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.sigma < np.pi / 2:
            raise ValueError("sigma must lie in [0, pi/2)")
        s2 = self.sigma * self.sigma
        object.__setattr__(self, "A", 1.0 - 0.5 * s2 / (s2 + 0.33))
        object.__setattr__(self, "B", 0.45 * s2 / (s2 + 0.09))


@dataclass(frozen=True)
class Phong:
    """Diffuse + specular model with k_D + k_S = 1 (no ambient term)."""

    k_d: float
    k_s: float
    alpha: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.k_d <= 1.0 and 0.0 <= self.k_s <= 1.0):
            raise ValueError("k_d and k_s must lie in [0, 1]")
        if abs(self.k_d + self.k_s - 1.0) > 1e-9:
            raise ValueError("k_d + k_s must equal 1")
        if not 1.0 <= self.alpha <= 10.0:
            raise ValueError("alpha must lie in [1, 10]")


class OnCase(enum.Enum):
    CASE1 = 1
    CASE2 = 2
    CASE3 = 3
    CASE4 = 4


def classify_on_case(theta_i, theta_r, delta_phi, same_direction=False):
    """Pick the Oren-Nayar formula branch for an (incidence, view) geometry.

    ``delta_phi`` is the azimuth difference phi_r - phi_i normalised to
    [0, 2*pi).  ``same_direction`` marks the measure-zero coincidence of
    light and viewer directions away from the vertical, which float angle
    comparisons cannot detect reliably.
    """
    if same_direction:
        return OnCase.CASE4
    if np.pi / 2 <= delta_phi <= 3 * np.pi / 2:
        return OnCase.CASE3
    if theta_i >= theta_r:
        return OnCase.CASE1
    return OnCase.CASE2


def azimuth_cosine(light, viewer):
    """cos(phi_r - phi_i) from the normalised in-plane projections.

    Zero when either direction is vertical: the projection degenerates and
    the model collapses to the A-scaled diffuse branch.  Returns 1 exactly
    when light and viewer coincide off-vertical.
    """
    if np.linalg.norm(light.vec - viewer.vec) <= _GRAZE_TOL:
        if light.vertical:
            return 0.0
        return 1.0
    nw = np.hypot(*light.tilt)
    nv = np.hypot(*viewer.tilt)
    if nw <= _UNIT_TOL or nv <= _UNIT_TOL:
        return 0.0
    return float(np.dot(light.tilt, viewer.tilt) / (nw * nv))


def _slope_terms(grad_u, direction):
    """(cos_theta, g) with cos_theta = N . dir and g the sin numerator."""
    grad_u = np.asarray(grad_u, dtype=np.float64)
    gx = grad_u[..., 0]
    gy = grad_u[..., 1]
    norm2 = 1.0 + gx * gx + gy * gy
    num = -(direction[0] * gx + direction[1] * gy) + direction[2]
    cos_t = num / np.sqrt(norm2)
    sin_num = np.sqrt(np.maximum(norm2 - num * num, 0.0))
    sin_t = sin_num / np.sqrt(norm2)
    return cos_t, sin_t


def lambert_brightness(grad_u, light):
    """Diffuse brightness (-omega_t . grad_u + omega_3) / sqrt(1+|grad_u|^2)."""
    cos_i, _ = _slope_terms(grad_u, light.vec)
    return np.clip(cos_i, 0.0, 1.0)


def oren_nayar_brightness(grad_u, light, viewer, spec):
    """Rough-diffuse brightness cos(theta_i) (A + B sin(a) tan(b) M).

    The branch selection collapses to one expression:
    A cos_i + B M sin_i sin_r cos_i / max(cos_i, cos_r), where the divisor
    is the cosine of the smaller zenith angle.  A grazing viewer makes the
    divisor vanish while the rough term is active, which has no finite
    brightness: DegenerateView.
    """
    m = max(0.0, azimuth_cosine(light, viewer))
    cos_i, sin_i = _slope_terms(grad_u, light.vec)
    if m == 0.0:
        return np.clip(spec.A * cos_i, 0.0, 1.0)
    cos_r, sin_r = _slope_terms(grad_u, viewer.vec)
    denom = np.maximum(cos_i, cos_r)
    if np.any((denom <= _GRAZE_TOL) & (sin_i * sin_r > 0.0)):
        raise DegenerateView("rough term diverges: viewing/lighting angle too shallow")
    denom = np.where(denom <= _GRAZE_TOL, 1.0, denom)
    value = spec.A * cos_i + spec.B * m * sin_i * sin_r * cos_i / denom
    return np.clip(value, 0.0, 1.0)


def reflection_dot_viewer(grad_u, light, viewer):
    """(2 (N.omega) N - omega) . V for the mirror direction of the light."""
    grad_u = np.asarray(grad_u, dtype=np.float64)
    cos_i, _ = _slope_terms(grad_u, light.vec)
    cos_v, _ = _slope_terms(grad_u, viewer.vec)
    return 2.0 * cos_i * cos_v - float(np.dot(light.vec, viewer.vec))


def phong_brightness(grad_u, light, viewer, spec):
    """k_D (N.omega) + k_S (R.V)^alpha with the specular term floored at 0."""
    cos_i, _ = _slope_terms(grad_u, light.vec)
    r_dot_v = reflection_dot_viewer(grad_u, light, viewer)
    specular = np.where(r_dot_v > 0.0, np.maximum(r_dot_v, 0.0) ** spec.alpha, 0.0)
    return np.clip(spec.k_d * cos_i + spec.k_s * specular, 0.0, 1.0)


def brightness(grad_u, model, light, viewer):
    """Dispatch to the model's brightness function."""
    if isinstance(model, Lambertian):
        return lambert_brightness(grad_u, light)
    if isinstance(model, OrenNayar):
        return oren_nayar_brightness(grad_u, light, viewer, model)
    if isinstance(model, Phong):
        return phong_brightness(grad_u, light, viewer, model)
    raise TypeError(f"unknown reflectance model {model!r}")


def model_max_brightness(model):
    """Largest brightness the model can produce (its singular-point value)."""
    if isinstance(model, OrenNayar):
        return model.A
    return 1.0


def eikonal_rhs(model, i_value):
    """|grad u| implied by a brightness value under vertical light and viewer.

    Solves the model's brightness formula for the gradient magnitude, the
    right-hand side of the eikonal form of each model.  Input must lie in
    (0, I_max]; a value above I_max (beyond 1e-9 slack) means the image is
    inconsistent with the model.
    """
    i_value = float(i_value)
    i_max = model_max_brightness(model)
    if i_value > i_max + 1e-9:
        raise BrightnessOutOfRange(
            f"brightness {i_value} exceeds the model maximum {i_max}"
        )
    if i_value <= 0.0:
        raise BrightnessOutOfRange("brightness must be positive")
    if i_value >= i_max:
        return 0.0
    if isinstance(model, Lambertian):
        return float(np.sqrt(1.0 / i_value**2 - 1.0))
    if isinstance(model, OrenNayar):
        return float(np.sqrt(model.A**2 / i_value**2 - 1.0))
    if isinstance(model, Phong):
        # sqrt(1+|grad u|^2) solves (I+kS) s^2 - kD s - 2 kS = 0.
        q = model.k_d**2 + 8.0 * model.k_s**2 + 8.0 * i_value * model.k_s
        s = (model.k_d + np.sqrt(q)) / (2.0 * (i_value + model.k_s))
        return float(np.sqrt(max(s * s - 1.0, 0.0)))
    raise TypeError(f"unknown reflectance model {model!r}")


def flat_background_brightness(model, light, viewer):
    """Brightness of the zero-gradient background plane."""
    return float(brightness(np.zeros(2), model, light, viewer))


def quantize_image(image, levels=256):
    """Round to the nearest of ``levels`` gray values, rescaled to [0, 1]."""
    top = levels - 1
    return np.round(np.asarray(image, dtype=np.float64) * top) / top


def render_image(height, mask, model, light, viewer, quantize=False):
    """Shade a height field: gradient by finite differences, then the model.

    Outside nodes show the flat background (zero gradient).  With
    ``quantize`` the result is collapsed onto 256 gray levels, matching
    8-bit image files.
    """
    gx, gy = gradient_central(height, mask)
    grad = np.stack([gx, gy], axis=-1)
    img = np.asarray(brightness(grad, model, light, viewer), dtype=np.float64)
    img[mask.outside] = flat_background_brightness(model, light, viewer)
    if quantize:
        img = quantize_image(img)
    return img
