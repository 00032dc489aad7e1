"""Rectangular reconstruction grids, node classification and field derivatives.

Scalar fields over a grid are plain ``numpy`` arrays of shape ``(ny, nx)``
indexed ``[j, i]`` where ``i`` runs along x (columns) and ``j`` along y
(rows), node ``(i, j)`` sitting at ``(x0 + i*dx, y0 + j*dy)``.  Image files
store row 0 at the top of the picture (y = y0 + (ny-1)*dy); the file layer
flips rows so that in-memory ``j`` always increases with y.
"""

from dataclasses import dataclass

import numpy as np

# Node labels.  Kept as small ints so masks pack into int8 arrays.
OUTSIDE = 0
INSIDE = 1
BOUNDARY = 2


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular node lattice."""

    nx: int
    ny: int
    dx: float
    dy: float
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 nodes per axis")
        if self.dx <= 0 or self.dy <= 0:
            raise ValueError("grid spacing must be positive")

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def extent_x(self):
        """Physical size X = (nx-1)*dx."""
        return (self.nx - 1) * self.dx

    @property
    def extent_y(self):
        return (self.ny - 1) * self.dy

    @property
    def x1(self):
        return self.x0 + self.extent_x

    @property
    def y1(self):
        return self.y0 + self.extent_y

    @property
    def xs(self):
        return self.x0 + self.dx * np.arange(self.nx)

    @property
    def ys(self):
        return self.y0 + self.dy * np.arange(self.ny)

    def meshgrid(self):
        """Node coordinate arrays (X, Y), each of shape (ny, nx)."""
        return np.meshgrid(self.xs, self.ys)

    def node_position(self, i, j):
        return (self.x0 + i * self.dx, self.y0 + j * self.dy)


def square_grid(n=256, half=1.0):
    """n x n grid covering [-half, half]^2, the usual benchmark domain."""
    step = 2.0 * half / (n - 1)
    return Grid(nx=n, ny=n, dx=step, dy=step, x0=-half, y0=-half)


class Mask:
    """Inside/Outside/Boundary labels for every grid node."""

    def __init__(self, grid, labels):
        labels = np.asarray(labels, dtype=np.int8)
        if labels.shape != grid.shape:
            raise ValueError("label array shape does not match grid")
        if not np.isin(labels, (OUTSIDE, INSIDE, BOUNDARY)).all():
            raise ValueError("labels must be OUTSIDE, INSIDE or BOUNDARY")
        self.grid = grid
        self.labels = labels

    @property
    def inside(self):
        return self.labels == INSIDE

    @property
    def outside(self):
        return self.labels == OUTSIDE

    @property
    def boundary(self):
        return self.labels == BOUNDARY

    @property
    def known(self):
        """Nodes carrying usable values: everything except Outside."""
        return self.labels != OUTSIDE

    @property
    def n_inside(self):
        return int(np.count_nonzero(self.labels == INSIDE))

    def inside_indices(self):
        """(j_idx, i_idx) int arrays of Inside nodes, row-major order."""
        jj, ii = np.nonzero(self.labels == INSIDE)
        return jj.astype(np.int64), ii.astype(np.int64)


def _dilate4(raw):
    """True where a 4-neighbour of a True cell lies (not including itself)."""
    out = np.zeros_like(raw)
    out[1:, :] |= raw[:-1, :]
    out[:-1, :] |= raw[1:, :]
    out[:, 1:] |= raw[:, :-1]
    out[:, :-1] |= raw[:, 1:]
    return out


def build_mask_from_predicate(grid, inside_predicate):
    """Classify nodes from a vectorised predicate over node coordinates.

    ``inside_predicate(X, Y)`` receives the (ny, nx) coordinate arrays and
    returns a boolean array.  Nodes failing the predicate become Boundary
    when they touch a predicate-true node through a 4-neighbour, Outside
    otherwise.  Predicate-true nodes are Inside, including nodes on the
    grid edge: there the silhouette is cut by the image frame and the
    solver treats the frame as a free (state-constrained) edge rather than
    a Dirichlet one.  The fully degenerate all-true predicate has no
    Outside nodes to anchor a boundary condition, so the grid edge ring is
    labelled Boundary in that single case.
    """
    X, Y = grid.meshgrid()
    raw = np.asarray(inside_predicate(X, Y), dtype=bool)
    if raw.shape != grid.shape:
        raise ValueError("predicate did not return a grid-shaped array")

    labels = np.full(grid.shape, OUTSIDE, dtype=np.int8)
    if raw.all():
        labels[:, :] = INSIDE
        labels[0, :] = BOUNDARY
        labels[-1, :] = BOUNDARY
        labels[:, 0] = BOUNDARY
        labels[:, -1] = BOUNDARY
    else:
        labels[raw] = INSIDE
        labels[~raw & _dilate4(raw)] = BOUNDARY
    return Mask(grid, labels)


def gradient_central(field, mask):
    """Finite-difference gradient of a node field.

    Centered differences wherever both 4-neighbours along the axis carry a
    value (Inside or Boundary, and within the grid); one-sided differences
    when only one side is usable; exactly zero when neither is.  Outside
    nodes get a zero gradient.

    Returns (du_dx, du_dy) arrays shaped like ``field``.
    """
    field = np.asarray(field, dtype=np.float64)
    grid = mask.grid
    known = mask.known

    def axis_derivative(axis, step):
        minus = np.zeros_like(known)
        plus = np.zeros_like(known)
        f_minus = np.zeros_like(field)
        f_plus = np.zeros_like(field)
        if axis == 0:  # y
            minus[1:, :] = known[:-1, :]
            plus[:-1, :] = known[1:, :]
            f_minus[1:, :] = field[:-1, :]
            f_plus[:-1, :] = field[1:, :]
        else:  # x
            minus[:, 1:] = known[:, :-1]
            plus[:, :-1] = known[:, 1:]
            f_minus[:, 1:] = field[:, :-1]
            f_plus[:, :-1] = field[:, 1:]
        both = minus & plus
        d = np.zeros_like(field)
        d = np.where(both, (f_plus - f_minus) / (2.0 * step), d)
        d = np.where(minus & ~both, (field - f_minus) / step, d)
        d = np.where(plus & ~both, (f_plus - field) / step, d)
        return d

    gx = axis_derivative(1, grid.dx)
    gy = axis_derivative(0, grid.dy)
    gx[~known] = 0.0
    gy[~known] = 0.0
    return gx, gy
