"""Error estimator tests."""

import numpy as np
import pytest

import sfs
from sfs.grid import INSIDE, Mask, OUTSIDE
from sfs.metrics import image_errors, surface_errors


def mask_for(values_shape, n_inside):
    g = sfs.Grid(nx=values_shape[1], ny=values_shape[0], dx=1.0, dy=1.0)
    labels = np.full(values_shape, OUTSIDE, dtype=np.int8)
    labels.flat[:n_inside] = INSIDE
    return Mask(g, labels)


def reports_from_error_vector(e):
    e = np.asarray(e, dtype=float)
    shape = (2, e.size + 1)  # spare Outside column keeps tiny grids legal
    m = mask_for(shape, e.size)
    field = np.zeros(shape)
    field[0, : e.size] = -e
    return surface_errors(np.zeros(shape), field, m)


class TestSurfaceErrors:
    def test_identical_fields(self):
        rep = reports_from_error_vector([0.0, 0.0, 0.0])
        assert rep.err1 == rep.err2 == rep.linf == 0.0

    def test_unit_vector(self):
        rep = reports_from_error_vector([1.0, -1.0, 1.0])
        assert (rep.err1, rep.err2, rep.linf) == (1.0, 1.0, 1.0)

    def test_hand_computed(self):
        rep = reports_from_error_vector([3.0, 0.0, 0.0, 0.0])
        assert rep.err1 == pytest.approx(0.75)
        assert rep.err2 == pytest.approx(1.5)
        assert rep.linf == 3.0
        assert rep.n == 4
        assert rep.l2 == rep.err2

    def test_norm_inequalities_random(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            n = rng.integers(1, 50)
            rep = reports_from_error_vector(rng.normal(size=n) * rng.uniform(0.1, 10))
            assert rep.err1 <= rep.err2 + 1e-15
            assert rep.err2 <= rep.linf + 1e-15

    def test_scale_equivariance(self):
        rng = np.random.default_rng(19)
        shape = (5, 7)
        u, v = rng.normal(size=shape), rng.normal(size=shape)
        m = mask_for(shape, 30)
        base = surface_errors(u, v, m)
        scaled = surface_errors(4.5 * u, 4.5 * v, m)
        assert scaled.err1 == pytest.approx(4.5 * base.err1)
        assert scaled.err2 == pytest.approx(4.5 * base.err2)
        assert scaled.linf == pytest.approx(4.5 * base.linf)

    def test_empty_mask_rejected(self):
        m = mask_for((2, 2), 0)
        with pytest.raises(sfs.EmptyMask):
            surface_errors(np.zeros((2, 2)), np.zeros((2, 2)), m)

    def test_only_inside_counts(self):
        shape = (2, 4)
        m = mask_for(shape, 2)
        a = np.zeros(shape)
        a[0, 2:] = 9.0
        a[1, :] = 9.0
        b = np.zeros(shape)
        assert surface_errors(a, b, m).linf == 0.0


class TestImageErrors:
    def test_identical(self):
        shape = (2, 3)
        m = mask_for(shape, 3)
        rep = image_errors(np.full(shape, 0.5), np.full(shape, 0.5), m)
        assert rep.linf == 0.0

    def test_opposite_extremes(self):
        shape = (2, 3)
        m = mask_for(shape, 3)
        rep = image_errors(np.ones(shape), np.zeros(shape), m)
        assert rep.linf == 1.0

    def test_quantization_collapses_close_values(self):
        # 0.5001 and 0.5039 both round to gray level 128
        shape = (2, 2)
        m = mask_for(shape, 1)
        rep = image_errors(np.full(shape, 0.5001), np.full(shape, 0.5039), m, quantized=True)
        assert rep.linf == 0.0
        raw = image_errors(np.full(shape, 0.5001), np.full(shape, 0.5039), m, quantized=False)
        assert raw.linf == pytest.approx(0.0038)
