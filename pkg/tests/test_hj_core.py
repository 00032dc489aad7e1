"""Control set, interpolation, coefficients and the node operator.

The randomized suites here are the computable consequences of the scheme's
three structural guarantees (boundedness, monotonicity, contraction) plus
the kernel-vs-reference equivalence that backs every other test.
"""

import numpy as np
import pytest

import sfs
from sfs.hj_core import (
    OperatorContext,
    assemble_coefficient_fields,
    assemble_coefficients,
    build_control_set,
    floor_brightness,
    interp_bilinear,
    lagged_normals,
    node_candidate_values,
    prepare_sweep_arrays,
    run_sweep,
    sl_operator_node,
)

VERT = np.array([0.0, 0.0, 1.0])


def vertical_ctx(grid, image, mu=1.0, h=None, model=None):
    model = model or sfs.Lambertian()
    return OperatorContext(
        grid=grid,
        model=model,
        light=sfs.LightSource(VERT),
        viewer=sfs.Viewer(VERT),
        image=floor_brightness(image),
        mu=mu,
        h=h if h is not None else min(grid.dx, grid.dy),
    )


def full_mask(grid):
    return sfs.build_mask_from_predicate(grid, lambda x, y: np.ones_like(x, bool))


class TestControlSet:
    def test_default_has_96_distinct_unit_vectors(self):
        cs = build_control_set(12, 8)
        assert len(cs) == 96
        norms = np.linalg.norm(cs.vectors, axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)
        assert len({tuple(v) for v in np.round(cs.vectors, 14)}) == 96

    def test_two_by_one(self):
        cs = build_control_set(2, 1)
        expected = np.array(
            [
                [np.sin(np.pi / 4), 0.0, np.cos(np.pi / 4)],
                [np.sin(3 * np.pi / 4), 0.0, np.cos(3 * np.pi / 4)],
            ]
        )
        np.testing.assert_allclose(cs.vectors, expected, atol=1e-15)

    def test_upper_hemisphere_block_comes_first(self):
        cs = build_control_set(12, 8)
        assert cs.n_upper == 48
        assert (cs.a3[:48] > 0).all() and (cs.a3[48:] < 0).all()
        assert cs.paired

    def test_hemisphere_option(self):
        cs = build_control_set(12, 8, hemisphere=True)
        assert len(cs) == 48
        assert (cs.a3 > 0).all()

    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            build_control_set(1, 8)


class TestInterp:
    def test_node_value_exact(self):
        g = sfs.square_grid(9)
        rng = np.random.default_rng(2)
        W = rng.normal(size=g.shape)
        assert interp_bilinear(W, g.node_position(3, 5), g) == W[5, 3]

    def test_cell_center_is_mean(self):
        g = sfs.square_grid(9)
        W = np.zeros(g.shape)
        W[2:4, 4:6] = [[1.0, 2.0], [3.0, 4.0]]
        x = (g.xs[4] + g.xs[5]) / 2
        y = (g.ys[2] + g.ys[3]) / 2
        assert interp_bilinear(W, (x, y), g) == pytest.approx(2.5)

    def test_linear_reproduction(self):
        g = sfs.square_grid(9)
        X, Y = g.meshgrid()
        W = 2.0 * X - 3.0 * Y + 0.5
        rng = np.random.default_rng(4)
        for _ in range(50):
            x, y = rng.uniform(-1, 1, 2)
            assert interp_bilinear(W, (x, y), g) == pytest.approx(
                2 * x - 3 * y + 0.5, abs=1e-13
            )

    def test_clamps_outside_rectangle(self):
        g = sfs.square_grid(5)
        X, Y = g.meshgrid()
        W = X + Y
        assert interp_bilinear(W, (5.0, 5.0), g) == pytest.approx(2.0)

    def test_outside_nodes_take_boundary_value(self):
        g = sfs.square_grid(9)
        m = sfs.build_mask_from_predicate(g, lambda x, y: x < -0.3)
        assert m.outside.any()
        W = np.full(g.shape, 7.0)
        # point in a cell whose right corners are Outside (x in [0.5, 0.75]):
        # those corners contribute bc_value instead of the stored 7.0
        val = interp_bilinear(W, (g.xs[6] + 0.6 * g.dx, 0.0), g, mask=m, bc_value=1.0)
        assert val == pytest.approx(1.0)
        # cell straddling the Boundary column (keeps its stored value) and
        # the first Outside column (replaced by bc_value)
        half = interp_bilinear(W, (g.xs[3] + 0.5 * g.dx, 0.0), g, mask=m, bc_value=1.0)
        assert half == pytest.approx(4.0)

    def test_monotone_in_field(self):
        rng = np.random.default_rng(8)
        g = sfs.square_grid(7)
        for _ in range(200):
            W = rng.uniform(0, 1, g.shape)
            W2 = np.minimum(W + rng.uniform(0, 0.5, g.shape), 1.0)
            x, y = rng.uniform(-1.2, 1.2, 2)
            assert interp_bilinear(W, (x, y), g) <= interp_bilinear(W2, (x, y), g)


class TestCoefficients:
    def test_lambert_vertical_unit_brightness(self):
        g = sfs.square_grid(5)
        ctx = vertical_ctx(g, np.ones(g.shape))
        coeff = assemble_coefficients(ctx, (2, 2))
        assert coeff.p == 1.0
        a = np.array([0.3, -0.4, 0.866])
        np.testing.assert_allclose(coeff.drift(a), [0.3, -0.4])

    def test_oren_nayar_sigma_zero_equals_lambert(self):
        g = sfs.square_grid(5)
        rng = np.random.default_rng(6)
        img = rng.uniform(0.2, 1.0, g.shape)
        lam = assemble_coefficient_fields(vertical_ctx(g, img))
        on = assemble_coefficient_fields(vertical_ctx(g, img, model=sfs.OrenNayar(0.0)))
        np.testing.assert_array_equal(lam.c, on.c)
        np.testing.assert_array_equal(lam.q, on.q)
        np.testing.assert_array_equal(lam.e1, on.e1)

    def test_phong_ks_zero_vertical(self):
        g = sfs.square_grid(5)
        rng = np.random.default_rng(9)
        img = rng.uniform(0.2, 1.0, g.shape)
        ph = assemble_coefficient_fields(vertical_ctx(g, img, model=sfs.Phong(1.0, 0.0)))
        node = (1, 3)
        coeff = assemble_coefficients(
            vertical_ctx(g, img, model=sfs.Phong(1.0, 0.0)), node
        )
        i, j = node
        assert coeff.q == 1.0
        assert coeff.c == img[j, i]
        assert coeff.p == img[j, i]
        a = np.array([0.5, 0.5, np.sqrt(0.5)])
        np.testing.assert_allclose(coeff.drift(a), img[j, i] * a[:2])
        np.testing.assert_array_equal(ph.c, floor_brightness(img))

    def test_phong_specular_fallback_where_mirror_looks_away(self):
        # lagged direction tilted so the mirror of the light misses the viewer
        g = sfs.square_grid(5)
        img = np.full(g.shape, 0.5)
        ctx = vertical_ctx(g, img, model=sfs.Phong(0.6, 0.4))
        steep = np.full(g.shape, 3.0)
        gx = steep / np.sqrt(1 + 2 * steep**2)
        ctx.d = (gx, gx, 1.0 / np.sqrt(1 + 2 * steep**2))
        fields = assemble_coefficient_fields(ctx)
        # R.V = 2 d3^2 - 1 < 0 -> diffuse-only coefficients
        np.testing.assert_array_equal(fields.c, img)
        np.testing.assert_array_equal(fields.q, np.full(g.shape, 0.6))

    def test_nonpositive_p_detected(self):
        g = sfs.square_grid(5)
        m = full_mask(g)
        ctx = vertical_ctx(g, np.full(g.shape, 0.01), model=sfs.OrenNayar(1.2))
        lt = sfs.LightSource.normalized(np.array([1.0, 0.0, 1.0]))
        ctx.light = lt
        ctx.viewer = sfs.Viewer.normalized(np.array([1.0, 0.0, 1.0]))
        # coincident oblique directions use c = I - B + B (d.w)^2 < 0 for
        # dark pixels and a lagged direction orthogonal-ish to the light
        d3 = np.full(g.shape, 0.1)
        dx = np.sqrt(1 - d3**2)
        ctx.d = (-dx * lt.vec[0] * 0 + dx, np.zeros(g.shape) - dx * 0, d3)
        ctx.d = (np.zeros(g.shape), dx, d3)  # in-plane, perpendicular to omega_tilt
        with pytest.raises(sfs.NonpositiveP):
            assemble_coefficient_fields(ctx, mask=m)

    def test_unsupported_on_geometry(self):
        g = sfs.square_grid(5)
        ctx = vertical_ctx(g, np.full(g.shape, 0.5), model=sfs.OrenNayar(0.3))
        ctx.light = sfs.LightSource.normalized(np.array([1.0, 0.0, 1.0]))
        ctx.viewer = sfs.Viewer.normalized(np.array([0.8, 0.1, 1.0]))
        with pytest.raises(sfs.UnsupportedConfiguration):
            assemble_coefficient_fields(ctx)


class TestNodeOperator:
    def test_flat_patch_value_and_brute_force(self):
        # I = 1, vertical light, W = 0 around the node: independent
        # enumeration over all controls must agree, and the minimum sits
        # at the largest a3, giving tau (1 - cos(pi/24)).
        g = sfs.square_grid(9)
        ctx = vertical_ctx(g, np.ones(g.shape))
        cs = build_control_set(12, 8)
        W = np.zeros(g.shape)
        val, arg = sl_operator_node(ctx, W, (4, 4), cs)
        tau = ctx.tau
        expected = tau * (1.0 - np.cos(np.pi / 24))
        assert val == pytest.approx(expected, rel=1e-12)
        # brute force straight from the formula
        brute = min(
            ctx.emh * 0.0 - tau * 1.0 * a3 * (1.0 - 0.0) for a3 in cs.a3
        ) + tau
        assert val == pytest.approx(brute, rel=1e-12)
        assert cs.a3_at(arg) == pytest.approx(np.cos(np.pi / 24))

    def test_ceiling_field_is_invariant_and_ties_resolve_low(self):
        g = sfs.square_grid(9)
        ctx = vertical_ctx(g, np.ones(g.shape), mu=1.0)
        cs = build_control_set(12, 8)
        W = np.ones(g.shape)  # = 1/mu
        val, arg = sl_operator_node(ctx, W, (4, 4), cs)
        assert val == 1.0  # exactly, by the Sterbenz pairing of emh and tau
        assert arg == 0  # every candidate ties; lowest index wins

    def test_pole_candidate_off_by_default_on_node_op(self):
        g = sfs.square_grid(9)
        ctx = vertical_ctx(g, np.ones(g.shape))
        cs = build_control_set(12, 8)
        W = np.zeros(g.shape)
        plain, _ = sl_operator_node(ctx, W, (4, 4), cs)
        with_pole, arg = sl_operator_node(ctx, W, (4, 4), cs, include_pole=True)
        assert with_pole == 0.0  # vertical rest control freezes a singular node
        assert arg == cs.pole_index
        assert plain > 0.0

    def test_kernel_matches_node_reference_bitwise(self):
        rng = np.random.default_rng(12)
        g = sfs.square_grid(13)
        m = full_mask(g)
        cs = build_control_set(6, 4)
        cases = []
        img = rng.uniform(0.05, 1.0, g.shape)
        cases.append(vertical_ctx(g, img))
        oblique = OperatorContext(
            grid=g,
            model=sfs.Lambertian(),
            light=sfs.LightSource.normalized(np.array([1.0, 0.5, 1.2])),
            viewer=sfs.Viewer(VERT),
            image=floor_brightness(img),
            mu=1.0,
            h=min(g.dx, g.dy),
        )
        cases.append(oblique)
        ph = OperatorContext(
            grid=g,
            model=sfs.Phong(0.3, 0.7),
            light=sfs.LightSource.normalized(np.array([0.4, -0.2, 1.0])),
            viewer=sfs.Viewer(VERT),
            image=floor_brightness(img),
            mu=1.0,
            h=min(g.dx, g.dy),
        )
        height = rng.uniform(0, 0.5, g.shape)
        ph.d = lagged_normals(height, m)
        cases.append(ph)
        for ctx in cases:
            coeffs = assemble_coefficient_fields(ctx, mask=m)
            arrays = prepare_sweep_arrays(coeffs, m, ctx.h)
            W = rng.uniform(0, 1, g.shape)
            vals, args = run_sweep(W, arrays, cs, g, ctx.mu, ctx.h, include_pole=True)
            jj, ii = m.inside_indices()
            for t in range(0, jj.size, 7):
                node = (int(ii[t]), int(jj[t]))
                ref_val, ref_arg = sl_operator_node(
                    ctx, W, node, cs, coeffs=coeffs, include_pole=True
                )
                assert vals[t] == ref_val
                assert args[t] == ref_arg

    def test_lower_hemisphere_skip_changes_nothing(self):
        rng = np.random.default_rng(14)
        g = sfs.square_grid(11)
        m = full_mask(g)
        cs = build_control_set(8, 6)
        ctx = vertical_ctx(g, rng.uniform(0.1, 1.0, g.shape))
        coeffs = assemble_coefficient_fields(ctx, mask=m)
        arrays = prepare_sweep_arrays(coeffs, m, ctx.h)
        W = rng.uniform(0, 1, g.shape)
        fast_vals, fast_args = run_sweep(W, arrays, cs, g, 1.0, ctx.h)
        # force full evaluation by pushing one value above the ceiling
        W_hot = W.copy()
        W_hot[0, 0] = 1.5
        slow_vals, slow_args = run_sweep(W_hot, arrays, cs, g, 1.0, ctx.h)
        W_hot[0, 0] = W[0, 0]
        ref_vals, ref_args = run_sweep(W_hot, arrays, cs, g, 1.0, ctx.h)
        np.testing.assert_array_equal(fast_vals, ref_vals)
        np.testing.assert_array_equal(fast_args, ref_args)


class TestOperatorGuarantees:
    """Randomized suites for the operator's structural guarantees."""

    def _setup(self, rng, n=12):
        g = sfs.square_grid(n)
        m = full_mask(g)
        img = rng.uniform(0.05, 1.0, g.shape)  # P = I <= 1 = mu: conditions hold
        ctx = vertical_ctx(g, img)
        coeffs = assemble_coefficient_fields(ctx, mask=m)
        arrays = prepare_sweep_arrays(coeffs, m, ctx.h)
        cs = build_control_set(12, 8)
        return g, m, ctx, arrays, cs

    def test_boundedness_zero_violations(self):
        rng = np.random.default_rng(100)
        g, m, ctx, arrays, cs = self._setup(rng)
        for _ in range(1000):
            W = rng.uniform(0.0, 1.0, g.shape)
            vals, _ = run_sweep(W, arrays, cs, g, 1.0, ctx.h)
            assert vals.min() >= 0.0
            assert vals.max() <= 1.0

    def test_monotonicity_zero_violations(self):
        rng = np.random.default_rng(101)
        g, m, ctx, arrays, cs = self._setup(rng)
        for _ in range(1000):
            W = rng.uniform(0.0, 1.0, g.shape)
            W2 = np.minimum(W + rng.uniform(0.0, 0.5, g.shape), 1.0)
            lo, _ = run_sweep(W, arrays, cs, g, 1.0, ctx.h)
            hi, _ = run_sweep(W2, arrays, cs, g, 1.0, ctx.h)
            assert (lo <= hi).all()

    def test_contraction_zero_violations(self):
        rng = np.random.default_rng(102)
        g, m, ctx, arrays, cs = self._setup(rng)
        a3_full = np.append(cs.a3, 1.0)
        for _ in range(1000):
            W = rng.uniform(0.0, 1.0, g.shape)
            W2 = rng.uniform(0.0, 1.0, g.shape)
            va, aa = run_sweep(W, arrays, cs, g, 1.0, ctx.h)
            vb, ab = run_sweep(W2, arrays, cs, g, 1.0, ctx.h)
            pa3 = max(
                float((arrays.p * a3_full[aa]).max()),
                float((arrays.p * a3_full[ab]).max()),
            )
            assert pa3 < 1.0  # contraction hypothesis holds on this family
            factor = ctx.emh + ctx.tau * pa3
            gap = np.abs(W - W2)[m.inside].max()
            assert np.abs(va - vb).max() <= factor * gap + 1e-12

    def test_control_refinement_lowers_flat_floor(self):
        # the flat-region objective floor tau (1 - cos(pi/(2 n))) shrinks
        # as the zenith resolution grows
        g = sfs.square_grid(9)
        ctx = vertical_ctx(g, np.ones(g.shape))
        W = np.zeros(g.shape)
        vals = []
        for n_theta, n_phi in ((12, 8), (24, 16), (48, 32)):
            cs = build_control_set(n_theta, n_phi)
            val, _ = sl_operator_node(ctx, W, (4, 4), cs)
            vals.append(val)
        assert vals[0] > vals[1] > vals[2] > 0

    def test_control_refinement_bounded_change_on_sphere(self):
        # doubling the direction resolution moves the solution by at most
        # the coarse set's angular modulus (the per-unit-length objective
        # gap tan(pi/(4 n_theta)) integrated over the domain radius);
        # the error itself is not monotone in the resolution because the
        # coarse floor partly cancels the scheme's dissipation
        lt = sfs.LightSource(VERT)
        vw = sfs.Viewer(VERT)
        g = sfs.square_grid(64)
        h_true, m = sfs.make_sphere(g)
        img = sfs.render_image(h_true, m, sfs.Lambertian(), lt, vw, quantize=True)
        recs = []
        errs = []
        for n_theta, n_phi in ((12, 8), (24, 16)):
            rec, _ = sfs.solve(img, m, sfs.Lambertian(), lt, vw,
                               sfs.SolverConfig(eta=1e-7, n_theta=n_theta, n_phi=n_phi))
            recs.append(rec)
            errs.append(sfs.surface_errors(h_true, rec, m).l2)
        modulus = np.tan(np.pi / 48) * 1.0  # coarse angular gap x domain radius
        assert np.abs(recs[1] - recs[0])[m.inside].max() <= modulus
        assert abs(errs[1] - errs[0]) <= modulus
