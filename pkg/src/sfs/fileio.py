"""PGM images, mask files, height dumps, OBJ meshes and run configuration.

PGM (P2/P5, 8 or 16 bit) is the native image format: bit-exact, header-
only, dependency-free.  In-memory fields store row j at y = y0 + j*dy
while image files put row 0 at the top of the picture, so readers and
writers flip the row order.
"""

import io
import warnings

import numpy as np

from .errors import ConfigError, MalformedHeader, UnsupportedDepth
from .grid import Grid, Mask, build_mask_from_predicate


def _read_pgm_tokens(data, count):
    """Yield whitespace/comment-separated header tokens and the byte offset."""
    tokens = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(data):
            raise MalformedHeader("truncated header")
        ch = data[pos : pos + 1]
        if ch == b"#":
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise MalformedHeader("unterminated comment")
            pos = nl + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace():
                end += 1
            tokens.append(data[pos:end])
            pos = end
    return tokens, pos


def read_pgm(path):
    """Read an 8/16-bit grayscale PGM into a [0, 1] float field.

    Returns ``(image, maxval)``; the image is (ny, nx) with row 0 at the
    BOTTOM (y increasing with j).  Accepts binary (P5) and ASCII (P2).
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] not in (b"P5", b"P2"):
        raise MalformedHeader(f"not a grayscale PGM: magic {data[:2]!r}")
    magic = data[:2].decode()
    tokens, pos = _read_pgm_tokens(data[2:], 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise MalformedHeader(f"non-numeric header field: {exc}") from None
    if maxval <= 0 or maxval > 65535:
        raise UnsupportedDepth(f"maxval {maxval} outside the 8/16-bit range")
    if magic == "P5":
        raster = data[2 + pos + 1 :]  # single whitespace byte after maxval
        if maxval < 256:
            pixels = np.frombuffer(raster, dtype=np.uint8, count=width * height)
        else:
            pixels = np.frombuffer(raster, dtype=">u2", count=width * height)
    else:
        values = data[2 + pos :].split()
        if len(values) < width * height:
            raise MalformedHeader("ASCII raster shorter than width*height")
        pixels = np.array(values[: width * height], dtype=np.int64)
        if pixels.max(initial=0) > maxval:
            raise MalformedHeader("sample exceeds maxval")
    img_top = pixels.reshape(height, width).astype(np.float64) / maxval
    return img_top[::-1].copy(), maxval


def write_pgm(path, image, maxval=255, ascii_format=False):
    """Write a [0, 1] field as PGM; exact inverse of read_pgm for 8-bit data."""
    image = np.asarray(image, dtype=np.float64)
    if maxval <= 0 or maxval > 65535:
        raise UnsupportedDepth(f"maxval {maxval} outside the 8/16-bit range")
    levels = np.round(np.clip(image, 0.0, 1.0) * maxval).astype(np.uint32)
    top_first = levels[::-1]
    ny, nx = image.shape
    with open(path, "wb") as fh:
        if ascii_format:
            fh.write(f"P2\n{nx} {ny}\n{maxval}\n".encode())
            out = io.StringIO()
            for row in top_first:
                out.write(" ".join(str(v) for v in row))
                out.write("\n")
            fh.write(out.getvalue().encode())
        else:
            fh.write(f"P5\n{nx} {ny}\n{maxval}\n".encode())
            if maxval < 256:
                fh.write(top_first.astype(np.uint8).tobytes())
            else:
                fh.write(top_first.astype(">u2").tobytes())


def write_mask_pgm(path, mask):
    """Inside nodes white, everything else black (the usual mask picture)."""
    write_pgm(path, mask.inside.astype(np.float64))


def read_mask_pgm(path, grid):
    """Mask from a white-on-black image: bright pixels are the inside set."""
    img, _ = read_pgm(path)
    if img.shape != grid.shape:
        raise ConfigError(
            f"mask size {img.shape[::-1]} does not match the grid {grid.shape[::-1]}"
        )
    return build_mask_from_predicate(grid, lambda x, y: img > 0.5)


def write_height_dump(path, height, grid):
    """ASCII height grid with a 4-line header (nx, ny, dx, dy)."""
    height = np.asarray(height, dtype=np.float64)
    with open(path, "w") as fh:
        fh.write(f"nx {grid.nx}\n")
        fh.write(f"ny {grid.ny}\n")
        fh.write(f"dx {float(grid.dx)!r}\n")
        fh.write(f"dy {float(grid.dy)!r}\n")
        for row in height:
            fh.write(" ".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_height_dump(path):
    """Inverse of write_height_dump; returns (height, header dict)."""
    with open(path) as fh:
        header = {}
        for _ in range(4):
            key, value = fh.readline().split()
            header[key] = value
        nx, ny = int(header["nx"]), int(header["ny"])
        rows = [np.array(fh.readline().split(), dtype=np.float64) for _ in range(ny)]
    height = np.vstack(rows)
    if height.shape != (ny, nx):
        raise MalformedHeader("height dump shape mismatch")
    return height, {"nx": nx, "ny": ny, "dx": float(header["dx"]), "dy": float(header["dy"])}


def export_mesh_obj(path, height, mask, grid=None):
    """Triangulated OBJ of the Inside region: one vertex per Inside node.

    Cells whose four corners are all Inside contribute two triangles;
    vertex order is row-major, so output bytes are deterministic.
    """
    grid = grid or mask.grid
    height = np.asarray(height, dtype=np.float64)
    inside = mask.inside
    index = np.zeros(grid.shape, dtype=np.int64)
    jj, ii = np.nonzero(inside)
    index[jj, ii] = np.arange(1, jj.size + 1)  # OBJ indices are 1-based
    xs, ys = grid.xs, grid.ys
    with open(path, "w") as fh:
        for j, i in zip(jj, ii):
            fh.write(f"v {float(xs[i])!r} {float(ys[j])!r} {float(height[j, i])!r}\n")
        quad = inside[:-1, :-1] & inside[:-1, 1:] & inside[1:, :-1] & inside[1:, 1:]
        qj, qi = np.nonzero(quad)
        for j, i in zip(qj, qi):
            v00 = index[j, i]
            v10 = index[j, i + 1]
            v01 = index[j + 1, i]
            v11 = index[j + 1, i + 1]
            fh.write(f"f {v00} {v10} {v11}\n")
            fh.write(f"f {v00} {v11} {v01}\n")
    return jj.size, 2 * int(quad.sum())


_CONFIG_KEYS = {
    "scene",
    "variant",
    "image",
    "mask",
    "truth",
    "nx",
    "ny",
    "x0",
    "y0",
    "dx",
    "dy",
    "size",
    "model",
    "sigma",
    "kd",
    "ks",
    "alpha",
    "light",
    "viewer",
    "mu",
    "h",
    "eta",
    "max_iter",
    "bc",
    "bc_field",
    "pinned",
    "n_theta",
    "n_phi",
    "hemisphere",
    "quantize",
    "bench",
    "out_image",
    "out_mask",
    "out_height",
    "out_mesh",
    "out_report",
    "out_table",
    "out_truth",
}


def parse_config(path):
    """Flat ``key = value`` run configuration; unknown keys are rejected."""
    config = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in config:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            config[key] = value
    return config


def parse_vector(text, what="vector"):
    parts = text.replace(",", " ").split()
    if len(parts) != 3:
        raise ConfigError(f"{what} needs three components, got {text!r}")
    try:
        vec = np.array([float(p) for p in parts])
    except ValueError:
        raise ConfigError(f"non-numeric {what}: {text!r}") from None
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ConfigError(f"{what} must be nonzero")
    if abs(norm - 1.0) > 1e-6:
        warnings.warn(
            f"{what} {text!r} has length {norm:.6f}; normalising", stacklevel=2
        )
    return vec / norm, vec


def parse_pinned(text):
    """'i j height; i j height; ...' -> [(i, j, height), ...]"""
    pins = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split()
        if len(parts) != 3:
            raise ConfigError(f"pinned entry {chunk!r} needs 'i j height'")
        pins.append((int(parts[0]), int(parts[1]), float(parts[2])))
    return pins


def write_report_file(path, report, extra=None):
    """Machine-readable key = value dump of a solve report."""
    with open(path, "w") as fh:
        fh.write(f"iterations = {report.iterations}\n")
        fh.write(f"wall_time = {report.wall_time!r}\n")
        fh.write(f"termination = {report.termination}\n")
        fh.write(f"final_residual = {report.residuals[-1]!r}\n")
        fh.write(f"max_p_a3 = {max(report.max_p_a3)!r}\n")
        fh.write(f"monotone_decreasing = {report.monotone_decreasing}\n")
        fh.write(f"monotone_violations = {report.monotone_violations}\n")
        fh.write(f"clipped_updates = {report.clipped_updates}\n")
        if report.light_raw is not None:
            fh.write(f"light_raw = {' '.join(repr(float(v)) for v in report.light_raw)}\n")
        fh.write("residuals = " + " ".join(f"{v:.6e}" for v in report.residuals) + "\n")
        fh.write("max_p_a3_history = " + " ".join(f"{v:.6e}" for v in report.max_p_a3) + "\n")
        for key, value in (extra or {}).items():
            fh.write(f"{key} = {value}\n")
