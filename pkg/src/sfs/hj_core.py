"""Semi-Lagrangian fixed-point operator for the unified brightness PDEs.

Every model reduces to the same node update

    T(W)_i = min_a { e^(-mu h) W(x_i + h b(x_i, a)) - tau P a3 (1 - mu W_i) } + tau

with a running over the unit sphere, b(x, a) = ((c a1 - e1)/q, (c a2 - e2)/q)
and P = c/q; only the per-node scalars (c, e1, e2, q) depend on the model.
The minimum is taken over a finite zenith/azimuth discretisation plus the
exact vertical direction a = (0, 0, 1).  The vertical candidate is what
freezes singular (maximum-brightness) plateaus: its value reduces
algebraically to W_i when P = 1, so saturated regions settle exactly
instead of creeping for tens of thousands of sweeps.

The foot-point arithmetic is shared, operation for operation, between the
vectorised numba kernel and the pure-python reference used in tests, so
both produce bit-identical values.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .errors import DegenerateQ, NonpositiveP, UnsupportedConfiguration
from .grid import gradient_central
from .reflectance import Lambertian, OrenNayar, Phong, azimuth_cosine

BRIGHTNESS_FLOOR = 1e-3


@dataclass(frozen=True)
class ControlSet:
    """Discretised unit sphere directions, zenith-major ordering."""

    vectors: np.ndarray
    n_theta: int
    n_phi: int
    hemisphere: bool = False

    def __len__(self):
        return self.vectors.shape[0]

    @property
    def a1(self):
        return self.vectors[:, 0]

    @property
    def a2(self):
        return self.vectors[:, 1]

    @property
    def a3(self):
        return self.vectors[:, 2]

    @property
    def pole_index(self):
        """Pseudo-index reported when the vertical candidate wins."""
        return self.vectors.shape[0]

    def a3_at(self, index):
        if index == self.pole_index:
            return 1.0
        return float(self.vectors[index, 2])

    @property
    def n_upper(self):
        """Leading controls with a3 > 0 (upper hemisphere block)."""
        return int(np.count_nonzero(self.vectors[:, 2] > 0.0))

    @property
    def paired(self):
        """True when every control has a mirror twin with the same (a1, a2).

        Holds for even n_theta; the lower-hemisphere candidates are then
        dominated by their twins whenever P >= 0 and W <= 1/mu, so the
        sweep may skip them without changing any value or argmin.
        """
        return self.n_theta % 2 == 0 and not self.hemisphere


def build_control_set(n_theta=12, n_phi=8, hemisphere=False):
    """Spherical-coordinate control grid.

    Zenith angles sit at pi (k + 1/2) / n_theta so no sample lands on a
    pole (where the azimuth is degenerate); azimuths at 2 pi l / n_phi.
    Ordering is zenith-major with ascending zenith, which puts the upper
    hemisphere first.
    """
    if n_theta < 2 or n_phi < 1:
        raise ValueError("need n_theta >= 2 and n_phi >= 1")
    thetas = np.pi * (np.arange(n_theta) + 0.5) / n_theta
    phis = 2.0 * np.pi * np.arange(n_phi) / n_phi
    if hemisphere:
        thetas = thetas[np.cos(thetas) > 0.0]
    st, sp = np.sin(thetas)[:, None], np.sin(phis)[None, :]
    ct, cp = np.cos(thetas)[:, None], np.cos(phis)[None, :]
    vecs = np.stack(
        [
            (st * cp).ravel(),
            (st * sp).ravel(),
            np.broadcast_to(ct, (len(thetas), n_phi)).ravel(),
        ],
        axis=1,
    )
    return ControlSet(np.ascontiguousarray(vecs), n_theta, n_phi, hemisphere)


def _interp_weights(fx, fy, x0, y0, x1, y1, inv_dx, inv_dy, nx, ny):
    """Clamp a point to the grid rectangle and split into cell/offset."""
    fx = min(max(fx, x0), x1)
    fy = min(max(fy, y0), y1)
    gx = (fx - x0) * inv_dx
    gy = (fy - y0) * inv_dy
    i0 = int(gx)
    if i0 > nx - 2:
        i0 = nx - 2
    j0 = int(gy)
    if j0 > ny - 2:
        j0 = ny - 2
    tx = min(max(gx - i0, 0.0), 1.0)
    ty = min(max(gy - j0, 0.0), 1.0)
    return i0, j0, tx, ty


def _interp_value(W, i0, j0, tx, ty):
    return (W[j0, i0] * (1.0 - tx) + W[j0, i0 + 1] * tx) * (1.0 - ty) + (
        W[j0 + 1, i0] * (1.0 - tx) + W[j0 + 1, i0 + 1] * tx
    ) * ty


def interp_bilinear(W, point, grid, mask=None, bc_value=0.0):
    """Monotone bilinear interpolation of a node field at an arbitrary point.

    Points outside the grid rectangle are clamped to its closure.  When a
    mask is given, Outside nodes contribute ``bc_value`` (the active
    boundary value) instead of their stored array entry, which makes the
    lookup total for semi-Lagrangian foot points.
    """
    W = np.asarray(W, dtype=np.float64)
    if mask is not None:
        W = np.where(mask.outside, bc_value, W)
    i0, j0, tx, ty = _interp_weights(
        float(point[0]),
        float(point[1]),
        grid.x0,
        grid.y0,
        grid.x1,
        grid.y1,
        1.0 / grid.dx,
        1.0 / grid.dy,
        grid.nx,
        grid.ny,
    )
    return float(_interp_value(W, i0, j0, tx, ty))


@dataclass
class OperatorContext:
    """Frozen per-sweep data the node operator needs.

    ``image`` is the brightness field already floored to
    [BRIGHTNESS_FLOOR, 1]; ``d`` holds the lagged unit surface direction
    (-grad u, 1)/|.| as three arrays, or None for models that do not use
    it.  ``h`` is the semi-Lagrangian step in domain units.
    """

    grid: object
    model: object
    light: object
    viewer: object
    image: np.ndarray
    mu: float
    h: float
    d: tuple | None = None

    @property
    def emh(self):
        return float(np.exp(-self.mu * self.h))

    @property
    def tau(self):
        # (1 - emh)/mu rather than expm1: keeps emh + mu*tau == 1 exact
        # for mu = 1, which the boundedness/monotonicity guarantees use.
        return (1.0 - self.emh) / self.mu


@dataclass
class Coefficients:
    """Per-node scalars of the unified drift/cost form, as full-grid arrays.

    Drift and cost are b = ((c a1 - e1)/q, (c a2 - e2)/q) and P = c/q.
    The sweep consumes the factored foot (x - (e1/q) h) + (c/q) h a1.
    """

    c: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    q: np.ndarray

    @property
    def p(self):
        return self.c / self.q


def lagged_normals(height, mask):
    """Unit direction (-grad u, 1)/sqrt(1+|grad u|^2) from a height iterate."""
    gx, gy = gradient_central(height, mask)
    inv = 1.0 / np.sqrt(1.0 + gx * gx + gy * gy)
    return (-gx * inv, -gy * inv, inv)


def flat_normals(shape):
    """Vertical lagged direction used before a first iterate exists."""
    one = np.ones(shape, dtype=np.float64)
    zero = np.zeros(shape, dtype=np.float64)
    return (zero, zero.copy(), one)


def model_needs_lag(model, light, viewer):
    """Whether the fixed-point coefficients depend on the lagged gradient."""
    if isinstance(model, Phong):
        return model.k_s > 0.0
    if isinstance(model, OrenNayar):
        return azimuth_cosine(light, viewer) > 0.0
    return False


def floor_brightness(image):
    """Clamp brightness into [BRIGHTNESS_FLOOR, 1] for coefficient assembly.

    Black-shadow pixels would otherwise demand unbounded slopes; the floor
    lets the scheme carry the reconstruction through shadow regions.
    """
    return np.clip(np.asarray(image, dtype=np.float64), BRIGHTNESS_FLOOR, 1.0)


def assemble_coefficient_fields(ctx, mask=None, validate=True):
    """Model dispatch for the (c, e1, e2, q) fields.

    Raises UnsupportedConfiguration for the rough-diffuse geometries whose
    PDE has no derived fixed-point form (light and viewer both oblique,
    distinct, with an azimuth gap below pi/2); NonpositiveP / DegenerateQ
    when the assembled coefficients break the scheme's assumptions on the
    solve region.
    """
    I = ctx.image
    shape = I.shape
    model, light, viewer = ctx.model, ctx.light, ctx.viewer

    def full(value):
        return np.full(shape, value, dtype=np.float64)

    def spread(arr):
        return np.ascontiguousarray(np.broadcast_to(arr, shape), dtype=np.float64)

    if isinstance(model, Lambertian):
        coeffs = Coefficients(
            c=I.copy(), e1=full(light.vec[0]), e2=full(light.vec[1]), q=full(light.z)
        )
    elif isinstance(model, OrenNayar):
        a, b = model.A, model.B
        m = azimuth_cosine(light, viewer)
        if m <= 0.0:
            c = I.copy()
        elif np.linalg.norm(light.vec - viewer.vec) <= 1e-9:
            d1, d2, d3 = ctx.d
            d_dot_w = d1 * light.vec[0] + d2 * light.vec[1] + d3 * light.z
            c = I - b + b * d_dot_w**2
        else:
            raise UnsupportedConfiguration(
                "no fixed-point form for distinct oblique light and viewer "
                "with azimuth gap below pi/2 under the rough-diffuse model"
            )
        coeffs = Coefficients(
            c=c, e1=full(a * light.vec[0]), e2=full(a * light.vec[1]), q=full(a * light.z)
        )
    elif isinstance(model, Phong):
        kd, ks = model.k_d, model.k_s
        if ks > 0.0 and model.alpha != 1.0:
            raise UnsupportedConfiguration(
                "the fixed-point form of the specular model is derived for "
                "alpha = 1 (the renderer accepts any alpha, the solver does not)"
            )
        if ks == 0.0:
            coeffs = Coefficients(
                c=I + ks * light.z,
                e1=full(kd * light.vec[0]),
                e2=full(kd * light.vec[1]),
                q=full(kd * light.z),
            )
        else:
            d1, d2, d3 = ctx.d
            d_dot_w = d1 * light.vec[0] + d2 * light.vec[1] + d3 * light.z
            d_dot_v = d1 * viewer.vec[0] + d2 * viewer.vec[1] + d3 * viewer.z
            if viewer.vertical:
                c = I + light.z * ks
                e1 = full(kd * light.vec[0])
                e2 = full(kd * light.vec[1])
                q = 2.0 * ks * d_dot_w + kd * light.z
            elif light.vertical:
                c = I + viewer.z * ks
                e1 = full(0.0)
                e2 = full(0.0)
                q = 2.0 * ks * d_dot_v + kd
            else:
                mfac = kd + 2.0 * ks * d_dot_v
                c = I + ks * float(np.dot(light.vec, viewer.vec))
                e1 = mfac * light.vec[0]
                e2 = mfac * light.vec[1]
                q = light.z * mfac
            if kd > 0.0:
                # Where the lagged mirror direction looks away from the
                # viewer the render floors the specular term at zero, so
                # the coefficients drop to the diffuse-only form there.
                r_dot_v = 2.0 * d_dot_w * d_dot_v - float(np.dot(light.vec, viewer.vec))
                clamped = r_dot_v < 0.0
                c = np.where(clamped, I, c)
                e1 = np.where(clamped, kd * light.vec[0], np.broadcast_to(e1, shape))
                e2 = np.where(clamped, kd * light.vec[1], np.broadcast_to(e2, shape))
                q = np.where(clamped, kd * light.z, q)
            coeffs = Coefficients(c=spread(c), e1=spread(e1), e2=spread(e2), q=spread(q))
    else:
        raise TypeError(f"unknown reflectance model {model!r}")

    if validate and mask is not None:
        region = mask.inside
        q_in = coeffs.q[region]
        bad_q = np.abs(q_in) < 1e-12
        if bad_q.any():
            raise DegenerateQ(
                f"normalisation Q vanished at {int(bad_q.sum())} node(s)",
                nodes=np.nonzero(bad_q)[0],
            )
        p_in = coeffs.c[region] / q_in
        bad_p = p_in < 0.0
        if bad_p.any():
            raise NonpositiveP(
                f"coefficient P negative at {int(bad_p.sum())} node(s); "
                "the model parameters are too extreme for this image",
                nodes=np.nonzero(bad_p)[0],
            )
    return coeffs


@dataclass(frozen=True)
class NodeCoefficients:
    """Unified per-node operator data at a single node (diagnostic view)."""

    c: float
    e1: float
    e2: float
    q: float

    @property
    def p(self):
        return self.c / self.q

    def drift(self, control):
        a = np.asarray(control, dtype=np.float64)
        return np.array(
            [(self.c * a[0] - self.e1) / self.q, (self.c * a[1] - self.e2) / self.q]
        )


def assemble_coefficients(ctx, node, mask=None):
    """Single-node view of the coefficient assembly; node is (i, j)."""
    fields = assemble_coefficient_fields(ctx, mask=mask, validate=False)
    i, j = node
    coeff = NodeCoefficients(
        c=float(fields.c[j, i]),
        e1=float(fields.e1[j, i]),
        e2=float(fields.e2[j, i]),
        q=float(fields.q[j, i]),
    )
    if abs(coeff.q) < 1e-12:
        raise DegenerateQ(f"normalisation Q vanished at node {node}")
    if coeff.p < 0.0:
        raise NonpositiveP(f"coefficient P negative at node {node}")
    return coeff


def node_candidate_values(W, grid, node, coeff, controls, mu, h):
    """Candidate totals (tau included) for every control at one node.

    Reference implementation of the kernel arithmetic.  Returns an array
    of length len(controls) + 1; the last entry is the vertical (pole)
    candidate, which reads its upwind foot like any other control except
    when that foot is the node itself (e = 0, vertical light), where the
    algebraic form W + tau (1 - P)(1 - mu W) keeps saturated nodes exact.
    """
    i, j = node
    x = grid.x0 + i * grid.dx
    y = grid.y0 + j * grid.dy
    emh = float(np.exp(-mu * h))
    tau = (1.0 - emh) / mu
    wi = float(W[j, i])
    p = coeff.p
    ax = (coeff.c / coeff.q) * h
    bx = x - (coeff.e1 / coeff.q) * h
    by = y - (coeff.e2 / coeff.q) * h
    base2 = tau * (1.0 - mu * wi)
    inv_dx, inv_dy = 1.0 / grid.dx, 1.0 / grid.dy
    nk = len(controls)
    vals = np.empty(nk + 1)
    for k in range(nk):
        fxk = bx + ax * controls.a1[k]
        fyk = by + ax * controls.a2[k]
        i0, j0, tx, ty = _interp_weights(
            fxk, fyk, grid.x0, grid.y0, grid.x1, grid.y1, inv_dx, inv_dy, grid.nx, grid.ny
        )
        w = _interp_value(W, i0, j0, tx, ty)
        vals[k] = (emh * w - (p * controls.a3[k]) * base2) + tau
    if coeff.e1 == 0.0 and coeff.e2 == 0.0:
        vals[nk] = wi * (emh + (mu * tau) * p) + tau * (1.0 - p)
    else:
        i0, j0, tx, ty = _interp_weights(
            bx, by, grid.x0, grid.y0, grid.x1, grid.y1, inv_dx, inv_dy, grid.nx, grid.ny
        )
        w = _interp_value(W, i0, j0, tx, ty)
        vals[nk] = (emh * w - p * base2) + tau
    return vals


def sl_operator_node(ctx, W, node, controls, mask=None, coeffs=None, include_pole=False):
    """Evaluate the fixed-point operator at one Inside node.

    Returns ``(value, argmin_index)``; the index addresses the control set,
    ``controls.pole_index`` meaning the vertical candidate won.  Ties
    resolve to the lowest index, the vertical candidate losing all ties,
    so runs are bit-reproducible.  The default evaluates the plain
    minimum over the finite control set; the solver enables the extra
    vertical candidate (see run_sweep).
    """
    if coeffs is None:
        coeff = assemble_coefficients(ctx, node, mask=mask)
    else:
        i, j = node
        coeff = NodeCoefficients(
            c=float(coeffs.c[j, i]),
            e1=float(coeffs.e1[j, i]),
            e2=float(coeffs.e2[j, i]),
            q=float(coeffs.q[j, i]),
        )
    W = np.asarray(W, dtype=np.float64)
    vals = node_candidate_values(W, ctx.grid, node, coeff, controls, ctx.mu, ctx.h)
    best = int(np.argmin(vals[:-1]))  # lowest index wins ties
    if include_pole and vals[-1] < vals[best]:
        return float(vals[-1]), controls.pole_index
    return float(vals[best]), best


@njit(parallel=True, cache=True)
def _sweep_kernel(
    W,
    jj,
    ii,
    ax,
    bx,
    by,
    p,
    a1,
    a2,
    a3,
    nk_eval,
    emh,
    tau,
    mu,
    x0,
    y0,
    x1,
    y1,
    inv_dx,
    inv_dy,
    nx,
    ny,
    pole_self,
    include_pole,
    out_vals,
    out_arg,
):
    n = jj.shape[0]
    nk_total = a1.shape[0]
    for t in prange(n):
        j = jj[t]
        i = ii[t]
        wi = W[j, i]
        base2 = tau * (1.0 - mu * wi)
        pt = p[t]
        axt = ax[t]
        bxt = bx[t]
        byt = by[t]
        best = np.inf
        barg = 0
        for k in range(nk_eval):
            fx = bxt + axt * a1[k]
            fy = byt + axt * a2[k]
            if fx < x0:
                fx = x0
            elif fx > x1:
                fx = x1
            if fy < y0:
                fy = y0
            elif fy > y1:
                fy = y1
            gx = (fx - x0) * inv_dx
            gy = (fy - y0) * inv_dy
            i0 = int(gx)
            if i0 > nx - 2:
                i0 = nx - 2
            j0 = int(gy)
            if j0 > ny - 2:
                j0 = ny - 2
            tx = gx - i0
            ty = gy - j0
            if tx < 0.0:
                tx = 0.0
            elif tx > 1.0:
                tx = 1.0
            if ty < 0.0:
                ty = 0.0
            elif ty > 1.0:
                ty = 1.0
            w = (W[j0, i0] * (1.0 - tx) + W[j0, i0 + 1] * tx) * (1.0 - ty) + (
                W[j0 + 1, i0] * (1.0 - tx) + W[j0 + 1, i0 + 1] * tx
            ) * ty
            val = emh * w - (pt * a3[k]) * base2
            if val < best:
                best = val
                barg = k
        total = best + tau
        if include_pole:
            if pole_self[t]:
                # foot is the node itself: algebraically W + tau(1-P)(1-mu W),
                # exactly W_i at saturated nodes (P = 1), so plateaus freeze
                pole = wi * (emh + (mu * tau) * pt) + tau * (1.0 - pt)
            else:
                fx = bxt
                fy = byt
                if fx < x0:
                    fx = x0
                elif fx > x1:
                    fx = x1
                if fy < y0:
                    fy = y0
                elif fy > y1:
                    fy = y1
                gx = (fx - x0) * inv_dx
                gy = (fy - y0) * inv_dy
                i0 = int(gx)
                if i0 > nx - 2:
                    i0 = nx - 2
                j0 = int(gy)
                if j0 > ny - 2:
                    j0 = ny - 2
                tx = gx - i0
                ty = gy - j0
                if tx < 0.0:
                    tx = 0.0
                elif tx > 1.0:
                    tx = 1.0
                if ty < 0.0:
                    ty = 0.0
                elif ty > 1.0:
                    ty = 1.0
                w = (W[j0, i0] * (1.0 - tx) + W[j0, i0 + 1] * tx) * (1.0 - ty) + (
                    W[j0 + 1, i0] * (1.0 - tx) + W[j0 + 1, i0 + 1] * tx
                ) * ty
                pole = (emh * w - pt * base2) + tau
            if pole < total:
                total = pole
                barg = nk_total
        out_vals[t] = total
        out_arg[t] = barg


@dataclass
class SweepArrays:
    """Flat per-inside-node arrays consumed by the sweep kernel."""

    jj: np.ndarray
    ii: np.ndarray
    ax: np.ndarray
    bx: np.ndarray
    by: np.ndarray
    p: np.ndarray
    pole_self: np.ndarray


def prepare_sweep_arrays(coeffs, mask, h):
    """Gather coefficient fields at Inside nodes and factor the foot map."""
    grid = mask.grid
    jj, ii = mask.inside_indices()
    c = coeffs.c[jj, ii]
    e1 = coeffs.e1[jj, ii]
    e2 = coeffs.e2[jj, ii]
    q = coeffs.q[jj, ii]
    x = grid.x0 + ii * grid.dx
    y = grid.y0 + jj * grid.dy
    ax = (c / q) * h
    bx = x - (e1 / q) * h
    by = y - (e2 / q) * h
    # the vertical control's foot coincides with the node iff e = 0; its
    # candidate then reduces to the exact algebraic form (see kernel)
    pole_self = (e1 == 0.0) & (e2 == 0.0)
    return SweepArrays(jj=jj, ii=ii, ax=ax, bx=bx, by=by, p=c / q, pole_self=pole_self)


def run_sweep(W, arrays, controls, grid, mu, h, include_pole=True):
    """One Jacobi sweep over Inside nodes against a frozen W.

    Returns (new inside values, argmin indices).  When the control set is
    mirror-paired and the inputs satisfy P >= 0, W <= 1/mu, the dominated
    lower hemisphere is skipped; results are identical either way.  Every
    node reads only the frozen W, so the kernel parallelises over nodes
    with output independent of thread count.

    ``include_pole`` adds the exact vertical control a = (0, 0, 1) to the
    minimisation (evaluated after the finite set, losing ties).  At
    saturated-brightness nodes (P = 1) its value reduces to W_i exactly,
    which freezes singular plateaus instead of letting them creep.
    """
    W = np.ascontiguousarray(W, dtype=np.float64)
    emh = float(np.exp(-mu * h))
    tau = (1.0 - emh) / mu
    nk_eval = len(controls)
    if (
        controls.paired
        and arrays.p.size
        and arrays.p.min() >= 0.0
        and float(W.max()) * mu <= 1.0
    ):
        nk_eval = controls.n_upper
    n = arrays.jj.shape[0]
    out_vals = np.empty(n, dtype=np.float64)
    out_arg = np.empty(n, dtype=np.int64)
    _sweep_kernel(
        W,
        arrays.jj,
        arrays.ii,
        arrays.ax,
        arrays.bx,
        arrays.by,
        arrays.p,
        np.ascontiguousarray(controls.a1),
        np.ascontiguousarray(controls.a2),
        np.ascontiguousarray(controls.a3),
        nk_eval,
        emh,
        tau,
        mu,
        grid.x0,
        grid.y0,
        grid.x1,
        grid.y1,
        1.0 / grid.dx,
        1.0 / grid.dy,
        grid.nx,
        grid.ny,
        arrays.pole_self,
        include_pole,
        out_vals,
        out_arg,
    )
    return out_vals, out_arg


def sweep_field(W, ctx, mask, controls, coeffs=None, include_pole=True):
    """Full-grid convenience sweep: returns (W_new, argmin, max P a3).

    Boundary and Outside entries of W are carried over unchanged; only
    Inside nodes are rewritten.
    """
    if coeffs is None:
        coeffs = assemble_coefficient_fields(ctx, mask=mask, validate=True)
    arrays = prepare_sweep_arrays(coeffs, mask, ctx.h)
    vals, args = run_sweep(W, arrays, controls, ctx.grid, ctx.mu, ctx.h, include_pole)
    W_new = np.array(W, dtype=np.float64, copy=True)
    W_new[arrays.jj, arrays.ii] = vals
    a3_full = np.append(controls.a3, 1.0)
    max_pa3 = float((arrays.p * a3_full[args]).max()) if vals.size else 0.0
    return W_new, args, max_pa3
