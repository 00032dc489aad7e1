"""Closed-form benchmark surfaces with their masks and ground truth.

Every generator returns ``(height, mask)`` (the vase adds its rim height
field).  Heights are zero outside the silhouette, so Boundary nodes carry
the homogeneous Dirichlet value except where a scene prescribes better
data (vase rim).
"""

import numpy as np

from .grid import BOUNDARY, Mask, build_mask_from_predicate, square_grid


def sphere_radius(grid, outward_pad=False):
    """Silhouette radius: half the domain extent padded by two grid steps.

    The benchmark pads INWARD so the whole silhouette (the circle where
    the slope blows up) fits in the image with a flat-background margin;
    padding outward instead pushes the circle past the frame, leaving the
    silhouette cut open at the four edge midpoints - geometry no boundary
    condition can repair (the reconstruction is off by the cut height over
    a wide fan whatever the solver does).
    """
    pad = 2.0 * max(grid.dx, grid.dy)
    half = min(grid.extent_x, grid.extent_y) / 2.0
    return half + pad if outward_pad else half - pad


def make_sphere(grid=None, outward_pad=False):
    """Hemisphere cap u = sqrt(r^2 - x^2 - y^2) on the disk x^2+y^2 <= r^2."""
    grid = grid or square_grid(256)
    r = sphere_radius(grid, outward_pad)
    mask = build_mask_from_predicate(grid, lambda x, y: x * x + y * y <= r * r)
    X, Y = grid.meshgrid()
    height = np.sqrt(np.maximum(r * r - X * X - Y * Y, 0.0))
    height[~(X * X + Y * Y <= r * r)] = 0.0
    return height, mask


def make_tent(grid=None):
    """Ridge tent min(-2|x| + 4X/5, -|y| + 2Y/5), nondifferentiable crest."""
    grid = grid or square_grid(256)
    X_len, Y_len = grid.extent_x, grid.extent_y
    mask = build_mask_from_predicate(
        grid,
        lambda x, y: (np.abs(x) / X_len < 0.4) & (np.abs(y) / Y_len < 0.4),
    )
    X, Y = grid.meshgrid()
    height = np.minimum(-2.0 * np.abs(X) + 0.8 * X_len, -np.abs(Y) + 0.4 * Y_len)
    inside_pred = (np.abs(X) / X_len < 0.4) & (np.abs(Y) / Y_len < 0.4)
    height[~inside_pred] = 0.0
    return height, mask


def make_basin(grid=None, radial=False):
    """Bowl-and-ring surface on the disk x^2 + y^2 < 2.

    The default form -(1 - (x^2 - y^2))^2 + 1 is kept as primary; the
    ``radial`` variant replaces x^2 - y^2 by x^2 + y^2, which is
    continuous at the rim, nonnegative, and rotationally symmetric - the
    shape the concave/convex-ambiguity experiment actually exercises.
    """
    grid = grid or square_grid(151, half=1.5)
    mask = build_mask_from_predicate(grid, lambda x, y: x * x + y * y < 2.0)
    X, Y = grid.meshgrid()
    qq = X * X + Y * Y if radial else X * X - Y * Y
    height = -((1.0 - qq) ** 2) + 1.0
    height[~(X * X + Y * Y < 2.0)] = 0.0
    return height, mask


def make_sinusoid(grid=None, wavelength_x=None, wavelength_y=None):
    """Oscillating sheet 0.5 + 0.5 sin(pi x / wx) sin(pi y / wy).

    Wavelengths default to the grid spacing, which oscillates at the node
    scale; benchmarks pass something resolvable like 0.25.  The sheet
    covers the whole rectangle, so the mask degenerates to the frame ring.
    """
    grid = grid or square_grid(256)
    wx = grid.dx if wavelength_x is None else wavelength_x
    wy = grid.dy if wavelength_y is None else wavelength_y
    mask = build_mask_from_predicate(grid, lambda x, y: np.ones_like(x, dtype=bool))
    X, Y = grid.meshgrid()
    height = 0.5 + 0.5 * np.sin(np.pi * X / wx) * np.sin(np.pi * Y / wy)
    return height, mask


def vase_profile(y_frac):
    """Half-width polynomial of the vase as a function of y/Y in [-1/2, 1/2]."""
    t = np.asarray(y_frac, dtype=np.float64)
    return (
        -10.8 * t**6
        + 7.2 * t**5
        + 6.6 * t**4
        - 3.8 * t**3
        - 1.375 * t**2
        + 0.5 * t
        + 0.25
    )


def make_vase(grid=None):
    """Solid of rotation u = sqrt(P(y/Y)^2 - x^2); returns (height, mask, rim).

    The body spans the full y-range, so the silhouette is cut by the top
    and bottom image rows.  Those cut rows are boundary data, not free
    surface: the exact cross-section height there is known because the
    object is a solid of rotation, and ``rim`` carries it (zero on the
    lateral rim, the cut semicircles on the frame rows).
    """
    grid = grid or square_grid(256)
    X_len, Y_len = grid.extent_x, grid.extent_y
    X, Y = grid.meshgrid()
    prof = vase_profile(Y / Y_len) * X_len
    inside_pred = prof**2 > X * X
    mask = build_mask_from_predicate(grid, lambda x, y: (vase_profile(y / Y_len) * X_len) ** 2 > x * x)
    labels = mask.labels.copy()
    cut = inside_pred.copy()
    cut[1:-1, :] = False  # only the top and bottom rows are frame cuts
    labels[cut] = BOUNDARY
    mask = Mask(grid, labels)
    height = np.sqrt(np.maximum(prof**2 - X * X, 0.0))
    height[~inside_pred] = 0.0
    rim = height.copy()
    return height, mask, rim


SCENES = {
    "sphere": make_sphere,
    "tent": make_tent,
    "basin": make_basin,
    "basin_radial": lambda grid=None: make_basin(grid, radial=True),
    "sinusoid": make_sinusoid,
    "vase": make_vase,
}


def default_grid_for(scene_name, n=256):
    """Benchmark grid for a scene: [-1.5, 1.5]^2 for the basin, [-1, 1]^2 else."""
    if scene_name.startswith("basin"):
        return square_grid(151 if n == 256 else n, half=1.5)
    return square_grid(n)
