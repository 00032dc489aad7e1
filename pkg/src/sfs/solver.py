"""Fixed-point iteration driver: Kruzkov transform, boundary data, sweeps.

The iteration starts from the 1/mu supersolution inside the silhouette and
Jacobi-sweeps the semi-Lagrangian operator until the sup-norm update drops
below the tolerance.  Models whose coefficients involve the surface
direction refresh it once per sweep from the previous iterate (lagged
gradient); each sweep is then a frozen-coefficient monotone operator.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NoConvergence
from .hj_core import (
    OperatorContext,
    assemble_coefficient_fields,
    build_control_set,
    flat_normals,
    floor_brightness,
    lagged_normals,
    model_needs_lag,
    prepare_sweep_arrays,
    run_sweep,
)
from .reflectance import quantize_image, render_image

_V_CEILING = 1.0 - 1e-15  # clip for inverse transform of state-constraint values


def kruzkov_forward(u, mu=1.0):
    """v = (1 - exp(-mu u))/mu, mapping heights into [0, 1/mu)."""
    return -np.expm1(-mu * np.asarray(u, dtype=np.float64)) / mu


def kruzkov_inverse(v, mu=1.0):
    """u = -ln(1 - mu v)/mu, inverse of the forward transform.

    Values at or above the asymptote 1/mu have no finite height.
    """
    v = np.asarray(v, dtype=np.float64)
    if np.any(mu * v >= 1.0):
        raise DomainError("Kruzkov value at or above 1/mu has no finite height")
    return -np.log1p(-mu * v) / mu


class DirichletZero:
    """Homogeneous height boundary condition (object on a flat background)."""

    def __repr__(self):
        return "DirichletZero()"


@dataclass
class DirichletField:
    """Prescribed boundary heights, given as a full-grid field."""

    g: np.ndarray


class StateConstraint:
    """Neutral boundary: v pinned at its Kruzkov ceiling 1/mu."""

    def __repr__(self):
        return "StateConstraint()"


def boundary_values(bc, mask, mu):
    """Kruzkov-space values carried by Boundary and Outside nodes."""
    shape = mask.grid.shape
    if isinstance(bc, DirichletZero):
        return np.zeros(shape)
    if isinstance(bc, DirichletField):
        g = np.asarray(bc.g, dtype=np.float64)
        if g.shape != shape:
            raise ValueError("boundary field shape does not match the grid")
        if not np.isfinite(g[mask.boundary]).all():
            raise ValueError("boundary field must be finite on Boundary nodes")
        return kruzkov_forward(g, mu)
    if isinstance(bc, StateConstraint):
        return np.full(shape, 1.0 / mu)
    raise TypeError(f"unknown boundary condition {bc!r}")


@dataclass
class SolverConfig:
    mu: float = 1.0
    h: float | None = None  # defaults to min(dx, dy)
    eta: float = 1e-8
    max_iter: int = 100_000
    bc: object = field(default_factory=DirichletZero)
    pinned: list | None = None  # [(i, j, height), ...] hard constraints
    n_theta: int = 12
    n_phi: int = 8
    hemisphere: bool = False
    include_pole: bool = True
    check_monotone: bool = True


@dataclass
class SolveReport:
    iterations: int = 0
    residuals: list = field(default_factory=list)
    wall_time: float = 0.0
    max_p_a3: list = field(default_factory=list)
    monotone_decreasing: bool = True
    monotone_violations: int = 0
    clipped_updates: int = 0
    termination: str = ""
    light_raw: np.ndarray | None = None

    def summary(self):
        last = self.residuals[-1] if self.residuals else float("nan")
        return (
            f"{self.termination} after {self.iterations} sweeps, "
            f"last residual {last:.3e}, wall time {self.wall_time:.2f}s"
        )


def solve(image, mask, model, light, viewer, config=None):
    """Reconstruct the height field that shades into ``image``.

    Returns ``(height, report)``.  Starts from the supersolution (Kruzkov
    ceiling inside, boundary data elsewhere), so with nonnegative P and
    P a3 <= 1 the per-node iterates decrease monotonically.  Raises
    NoConvergence (with partials attached) when max_iter is hit.
    """
    config = config or SolverConfig()
    grid = mask.grid
    mu = config.mu
    h = config.h if config.h is not None else min(grid.dx, grid.dy)
    controls = build_control_set(config.n_theta, config.n_phi, config.hemisphere)

    image = np.asarray(image, dtype=np.float64)
    if image.shape != grid.shape:
        raise ValueError("image shape does not match the grid")
    floored = floor_brightness(image)

    bc_vals = boundary_values(config.bc, mask, mu)
    W = np.where(mask.inside, 1.0 / mu, bc_vals)

    pinned = config.pinned or []
    pin_ji = tuple(
        (np.array([j for _, j, _ in pinned], dtype=np.int64),
         np.array([i for i, _, _ in pinned], dtype=np.int64))
    )
    pin_vals = kruzkov_forward(np.array([u for _, _, u in pinned]), mu) if pinned else None
    if pinned:
        W[pin_ji] = pin_vals

    lagging = model_needs_lag(model, light, viewer)
    ctx = OperatorContext(
        grid=grid,
        model=model,
        light=light,
        viewer=viewer,
        image=floored,
        mu=mu,
        h=h,
        d=flat_normals(grid.shape) if lagging else None,
    )
    static_arrays = None
    if not lagging:
        coeffs = assemble_coefficient_fields(ctx, mask=mask, validate=True)
        static_arrays = prepare_sweep_arrays(coeffs, mask, h)

    jj, ii = mask.inside_indices()
    a3_lookup = np.append(controls.a3, 1.0)

    report = SolveReport()
    start = time.perf_counter()
    residual = np.inf
    sweep = 0
    while sweep < config.max_iter:
        sweep += 1
        if lagging:
            if sweep > 1:
                ctx.d = lagged_normals(kruzkov_inverse(np.minimum(W, _V_CEILING / mu), mu), mask)
            coeffs = assemble_coefficient_fields(ctx, mask=mask, validate=True)
            arrays = prepare_sweep_arrays(coeffs, mask, h)
        else:
            arrays = static_arrays
        vals, args = run_sweep(W, arrays, controls, grid, mu, h, config.include_pole)
        # project onto the Kruzkov range [0, 1/mu]; a no-op whenever the
        # boundedness condition P a3 <= 1 holds, it keeps runaway
        # parameter combinations (P >> 1) from escaping the value space
        clipped = np.clip(vals, 0.0, 1.0 / mu)
        report.clipped_updates += int(np.count_nonzero(clipped != vals))
        vals = clipped

        old_inside = W[jj, ii]
        if config.check_monotone:
            increased = int(np.count_nonzero(vals > old_inside))
            if increased:
                report.monotone_violations += increased
                report.monotone_decreasing = False
        residual = float(np.abs(vals - old_inside).max()) if vals.size else 0.0

        W[jj, ii] = vals
        if pinned:
            W[pin_ji] = pin_vals

        report.residuals.append(residual)
        report.max_p_a3.append(float((arrays.p * a3_lookup[args]).max()) if vals.size else 0.0)
        if residual <= config.eta:
            break

    report.iterations = sweep
    report.wall_time = time.perf_counter() - start
    height = kruzkov_inverse(np.minimum(W, _V_CEILING / mu), mu)
    if residual > config.eta:
        report.termination = "max_iter"
        raise NoConvergence(
            f"no convergence after {sweep} sweeps (residual {residual:.3e} > {config.eta:.1e})",
            height=height,
            report=report,
        )
    report.termination = "converged"
    return height, report


def residual_check(height, image, mask, model, light, viewer, quantize=False):
    """Per-node |render(height) - image|: a-posteriori consistency field.

    This is the only validation available for real photographs, where no
    ground-truth surface exists.
    """
    rendered = render_image(height, mask, model, light, viewer, quantize=quantize)
    img = np.asarray(image, dtype=np.float64)
    if quantize:
        img = quantize_image(img)
    return np.abs(rendered - img)
