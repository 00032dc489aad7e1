"""PGM round-trips, height dumps, OBJ export and config parsing."""

import numpy as np
import pytest

import sfs
from sfs import fileio
from sfs.grid import INSIDE, Mask


class TestPgm:
    def test_8bit_roundtrip_bytes(self, tmp_path):
        rng = np.random.default_rng(1)
        img = np.round(rng.uniform(0, 1, (13, 9)) * 255) / 255
        p = tmp_path / "a.pgm"
        fileio.write_pgm(p, img)
        back, maxval = fileio.read_pgm(p)
        assert maxval == 255
        np.testing.assert_array_equal(back, img)
        q = tmp_path / "b.pgm"
        fileio.write_pgm(q, back)
        assert p.read_bytes() == q.read_bytes()

    def test_known_pixel_values(self, tmp_path):
        p = tmp_path / "two.pgm"
        p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 128, 255, 64]))
        img, maxval = fileio.read_pgm(p)
        # file row 0 is the TOP of the picture: in-memory row 0 is the bottom
        np.testing.assert_allclose(img[1], [0.0, 128 / 255])
        np.testing.assert_allclose(img[0], [1.0, 64 / 255])

    def test_16bit_path(self, tmp_path):
        p = tmp_path / "deep.pgm"
        vals = np.array([[0, 65535], [1234, 40000]], dtype=">u2")
        p.write_bytes(b"P5\n2 2\n65535\n" + vals.tobytes())
        img, maxval = fileio.read_pgm(p)
        assert maxval == 65535
        assert img[1, 1] == pytest.approx(1.0)
        assert img[0, 0] == pytest.approx(1234 / 65535)

    def test_ascii_variant(self, tmp_path):
        p = tmp_path / "plain.pgm"
        p.write_text("P2\n# comment\n3 2\n255\n0 10 20\n30 40 50\n")
        img, _ = fileio.read_pgm(p)
        np.testing.assert_allclose(img[1] * 255, [0, 10, 20])

    def test_comments_in_binary_header(self, tmp_path):
        p = tmp_path / "c.pgm"
        p.write_bytes(b"P5\n# made by hand\n2 1\n255\n" + bytes([7, 9]))
        img, _ = fileio.read_pgm(p)
        np.testing.assert_allclose(img[0] * 255, [7, 9])

    def test_malformed_magic(self, tmp_path):
        p = tmp_path / "bad.pgm"
        p.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
        with pytest.raises(sfs.MalformedHeader):
            fileio.read_pgm(p)

    def test_unsupported_depth(self, tmp_path):
        p = tmp_path / "deep.pgm"
        p.write_bytes(b"P5\n1 1\n70000\n\x00\x00")
        with pytest.raises(sfs.UnsupportedDepth):
            fileio.read_pgm(p)

    def test_mask_roundtrip(self, tmp_path):
        g = sfs.square_grid(32)
        _, m = sfs.make_sphere(g)
        p = tmp_path / "mask.pgm"
        fileio.write_mask_pgm(p, m)
        m2 = fileio.read_mask_pgm(p, g)
        np.testing.assert_array_equal(m.inside, m2.inside)
        np.testing.assert_array_equal(m.labels, m2.labels)


class TestHeightDump:
    def test_roundtrip(self, tmp_path):
        g = sfs.square_grid(7)
        rng = np.random.default_rng(5)
        h = rng.normal(size=g.shape)
        p = tmp_path / "h.txt"
        fileio.write_height_dump(p, h, g)
        back, header = fileio.read_height_dump(p)
        np.testing.assert_array_equal(back, h)
        assert header["nx"] == 7 and header["dx"] == g.dx


class TestObjExport:
    def test_flat_two_by_two(self, tmp_path):
        g = sfs.Grid(nx=2, ny=2, dx=1.0, dy=1.0)
        m = Mask(g, np.full((2, 2), INSIDE, dtype=np.int8))
        p = tmp_path / "flat.obj"
        nv, nf = fileio.export_mesh_obj(p, np.zeros((2, 2)), m)
        assert (nv, nf) == (4, 2)
        text = p.read_text().splitlines()
        assert sum(1 for line in text if line.startswith("v ")) == 4
        assert sum(1 for line in text if line.startswith("f ")) == 2

    def test_sphere_vertex_count(self, tmp_path):
        g = sfs.square_grid(24)
        h, m = sfs.make_sphere(g)
        p = tmp_path / "sphere.obj"
        nv, nf = fileio.export_mesh_obj(p, h, m)
        assert nv == m.n_inside

    def test_no_face_references_outside(self, tmp_path):
        rng = np.random.default_rng(9)
        g = sfs.square_grid(16)
        m = sfs.build_mask_from_predicate(
            g, lambda x, y: (x * x + y * y < 0.9) & (np.abs(x) > 0.1)
        )
        p = tmp_path / "blob.obj"
        nv, nf = fileio.export_mesh_obj(p, rng.uniform(size=g.shape), m)
        verts = 0
        for line in p.read_text().splitlines():
            if line.startswith("v "):
                verts += 1
            elif line.startswith("f "):
                idx = [int(tok) for tok in line.split()[1:]]
                assert all(1 <= k <= verts for k in idx)

    def test_deterministic_bytes(self, tmp_path):
        g = sfs.square_grid(12)
        h, m = sfs.make_sphere(g)
        p1, p2 = tmp_path / "a.obj", tmp_path / "b.obj"
        fileio.export_mesh_obj(p1, h, m)
        fileio.export_mesh_obj(p2, h, m)
        assert p1.read_bytes() == p2.read_bytes()


class TestRunConfig:
    def test_parses_and_strips(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("scene = sphere\n# full comment\neta = 1e-6  # trailing\n\n")
        cfg = fileio.parse_config(p)
        assert cfg == {"scene": "sphere", "eta": "1e-6"}

    def test_unknown_key_rejected(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("scene = sphere\nbogus = 1\n")
        with pytest.raises(sfs.ConfigError):
            fileio.parse_config(p)

    def test_duplicate_key_rejected(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("scene = sphere\nscene = vase\n")
        with pytest.raises(sfs.ConfigError):
            fileio.parse_config(p)

    def test_vector_normalised_with_warning(self):
        with pytest.warns(UserWarning):
            vec, raw = fileio.parse_vector("0.0168 1.198 0.9801", "light")
        assert np.linalg.norm(vec) == pytest.approx(1.0)
        np.testing.assert_allclose(raw, [0.0168, 1.198, 0.9801])

    def test_vector_requires_three_parts(self):
        with pytest.raises(sfs.ConfigError):
            fileio.parse_vector("1 2", "light")

    def test_pinned_list(self):
        pins = fileio.parse_pinned("75 75 0.0; 10 20 1.5")
        assert pins == [(75, 75, 0.0), (10, 20, 1.5)]
