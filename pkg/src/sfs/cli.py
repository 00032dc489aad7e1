"""Command-line surface: render | reconstruct | evaluate | bench.

Each command reads a flat ``key = value`` config file.  Exit codes:
0 success, 2 configuration error, 3 no convergence, 4 I/O error.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .errors import ConfigError, MalformedHeader, NoConvergence, SfsError, UnsupportedDepth
from .grid import Grid, square_grid
from .metrics import image_errors, surface_errors
from .reflectance import Lambertian, LightSource, OrenNayar, Phong, Viewer, render_image
from .scenes import SCENES, default_grid_for, make_sphere, make_tent, make_vase
from .solver import (
    DirichletField,
    DirichletZero,
    SolverConfig,
    StateConstraint,
    residual_check,
    solve,
)

VERTICAL = np.array([0.0, 0.0, 1.0])


def _model_from_config(cfg):
    name = cfg.get("model", "lambertian").lower()
    if name in ("lambertian", "lam", "l"):
        return Lambertian()
    if name in ("oren_nayar", "oren-nayar", "on"):
        return OrenNayar(float(cfg.get("sigma", 0.0)))
    if name in ("phong", "ph"):
        ks = float(cfg.get("ks", 0.0))
        kd = float(cfg.get("kd", 1.0 - ks))
        return Phong(k_d=kd, k_s=ks, alpha=float(cfg.get("alpha", 1.0)))
    raise ConfigError(f"unknown model {name!r}")


def _grid_from_config(cfg):
    if "nx" in cfg or "dx" in cfg:
        try:
            return Grid(
                nx=int(cfg["nx"]),
                ny=int(cfg["ny"]),
                dx=float(cfg["dx"]),
                dy=float(cfg["dy"]),
                x0=float(cfg.get("x0", 0.0)),
                y0=float(cfg.get("y0", 0.0)),
            )
        except KeyError as exc:
            raise ConfigError(f"incomplete grid spec: missing {exc}") from None
    size = int(cfg.get("size", 256))
    scene = cfg.get("scene")
    if scene:
        return default_grid_for(scene, size)
    return square_grid(size)


def _directions_from_config(cfg):
    light_vec, light_raw = fileio.parse_vector(cfg.get("light", "0 0 1"), "light")
    viewer_vec, _ = fileio.parse_vector(cfg.get("viewer", "0 0 1"), "viewer")
    return LightSource(light_vec), Viewer(viewer_vec), light_raw


def _scene_from_config(cfg, grid):
    name = cfg.get("scene")
    if name not in SCENES:
        raise ConfigError(f"unknown scene {name!r}; choose from {sorted(SCENES)}")
    result = SCENES[name](grid)
    if len(result) == 3:
        return result  # (height, mask, rim)
    height, mask = result
    return height, mask, None


def _solver_config_from(cfg, rim=None):
    bc_name = cfg.get("bc", "zero").lower()
    if bc_name in ("zero", "dirichlet_zero", "0"):
        bc = DirichletZero()
    elif bc_name in ("state", "state_constraint"):
        bc = StateConstraint()
    elif bc_name in ("field", "rim", "dirichlet_field"):
        if cfg.get("bc_field"):
            g, _ = fileio.read_height_dump(cfg["bc_field"])
            bc = DirichletField(g)
        elif rim is not None:
            bc = DirichletField(rim)
        else:
            raise ConfigError("bc = field needs bc_field (or a scene with rim data)")
    else:
        raise ConfigError(f"unknown bc {bc_name!r}")
    return SolverConfig(
        mu=float(cfg.get("mu", 1.0)),
        h=float(cfg["h"]) if "h" in cfg else None,
        eta=float(cfg.get("eta", 1e-8)),
        max_iter=int(cfg.get("max_iter", 100_000)),
        bc=bc,
        pinned=fileio.parse_pinned(cfg["pinned"]) if "pinned" in cfg else None,
        n_theta=int(cfg.get("n_theta", 12)),
        n_phi=int(cfg.get("n_phi", 8)),
        hemisphere=cfg.get("hemisphere", "false").lower() in ("1", "true", "yes"),
    )


def _out_path(cfg, key, out_dir, default):
    name = cfg.get(key, default)
    return str(Path(out_dir) / name)


def cmd_render(cfg, out_dir):
    grid = _grid_from_config(cfg)
    height, mask, _ = _scene_from_config(cfg, grid)
    model = _model_from_config(cfg)
    light, viewer, _ = _directions_from_config(cfg)
    quantize = cfg.get("quantize", "true").lower() in ("1", "true", "yes")
    image = render_image(height, mask, model, light, viewer, quantize=quantize)
    fileio.write_pgm(_out_path(cfg, "out_image", out_dir, "image.pgm"), image)
    fileio.write_mask_pgm(_out_path(cfg, "out_mask", out_dir, "mask.pgm"), mask)
    if cfg.get("out_truth"):
        fileio.write_height_dump(_out_path(cfg, "out_truth", out_dir, "truth.txt"), height, grid)
    return 0


def _load_problem(cfg):
    """Common input path: synthetic scene or real image + mask files."""
    grid = _grid_from_config(cfg)
    rim = None
    truth = None
    if cfg.get("image"):
        image, _ = fileio.read_pgm(cfg["image"])
        if image.shape != grid.shape:
            # no explicit grid: span [-1, 1] along x, square cells
            ny, nx = image.shape
            dx = 2.0 / (nx - 1)
            grid = Grid(nx=nx, ny=ny, dx=dx, dy=dx, x0=-1.0, y0=-dx * (ny - 1) / 2.0)
        if not cfg.get("mask"):
            raise ConfigError("real-image mode needs a mask file")
        mask = fileio.read_mask_pgm(cfg["mask"], grid)
        if cfg.get("truth"):
            truth, _ = fileio.read_height_dump(cfg["truth"])
    elif cfg.get("scene"):
        truth, mask, rim = _scene_from_config(cfg, grid)
        model = _model_from_config(cfg)
        light, viewer, _ = _directions_from_config(cfg)
        quantize = cfg.get("quantize", "true").lower() in ("1", "true", "yes")
        image = render_image(truth, mask, model, light, viewer, quantize=quantize)
    else:
        raise ConfigError("config needs either scene = ... or image = ...")
    return grid, image, mask, truth, rim


def cmd_reconstruct(cfg, out_dir):
    grid, image, mask, truth, rim = _load_problem(cfg)
    model = _model_from_config(cfg)
    light, viewer, light_raw = _directions_from_config(cfg)
    solver_cfg = _solver_config_from(cfg, rim)
    height, report = solve(image, mask, model, light, viewer, solver_cfg)
    report.light_raw = light_raw
    fileio.write_height_dump(_out_path(cfg, "out_height", out_dir, "height.txt"), height, grid)
    fileio.export_mesh_obj(_out_path(cfg, "out_mesh", out_dir, "surface.obj"), height, mask, grid)
    fileio.write_report_file(_out_path(cfg, "out_report", out_dir, "report.txt"), report)
    print(report.summary())
    return 0


def cmd_evaluate(cfg, out_dir):
    grid, image, mask, truth, rim = _load_problem(cfg)
    model = _model_from_config(cfg)
    light, viewer, _ = _directions_from_config(cfg)
    height_path = cfg.get("out_height") or "height.txt"
    height, _ = fileio.read_height_dump(str(Path(out_dir) / height_path))
    lines = []
    if truth is not None:
        se = surface_errors(truth, height, mask)
        lines.append(f"surface_l2 = {se.l2!r}")
        lines.append(f"surface_linf = {se.linf!r}")
        lines.append(f"surface_err1 = {se.err1!r}")
    rendered = render_image(height, mask, model, light, viewer, quantize=False)
    ie = image_errors(image, rendered, mask, quantized=True)
    lines.append(f"image_l2 = {ie.l2!r}")
    lines.append(f"image_linf = {ie.linf!r}")
    resid = residual_check(height, image, mask, model, light, viewer)
    lines.append(f"residual_max = {float(resid[mask.inside].max())!r}")
    out = Path(out_dir) / cfg.get("out_report", "errors.txt")
    out.write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def _bench_sphere(cfg, out_dir, size):
    grid = square_grid(size)
    height, mask = make_sphere(grid)
    light = LightSource(VERTICAL)
    viewer = Viewer(VERTICAL)
    rows = [
        ("LAM", Lambertian()),
        ("ON-00", OrenNayar(0.0)),
        ("ON-04", OrenNayar(0.4)),
        ("ON-08", OrenNayar(0.8)),
        ("PH-s00", Phong(1.0, 0.0)),
        ("PH-s04", Phong(0.6, 0.4)),
        ("PH-s08", Phong(0.2, 0.8)),
    ]
    lines = ["scheme\tL2(I)\tLinf(I)\tL2(S)\tLinf(S)\titer"]
    for name, model in rows:
        image = render_image(height, mask, model, light, viewer, quantize=True)
        h_rec, report = solve(image, mask, model, light, viewer,
                              SolverConfig(eta=float(cfg.get("eta", 1e-8))))
        se = surface_errors(height, h_rec, mask)
        ie = image_errors(image, render_image(h_rec, mask, model, light, viewer), mask)
        lines.append(
            f"{name}\t{ie.l2:.4f}\t{ie.linf:.4f}\t{se.l2:.4f}\t{se.linf:.4f}\t{report.iterations}"
        )
    return lines


def _bench_tent(cfg, out_dir, size, family):
    grid = square_grid(size)
    height, mask = make_tent(grid)
    light = LightSource(VERTICAL)
    viewer = Viewer(VERTICAL)
    if family == "on":
        variants = [("LAM", Lambertian())] + [
            (f"ON{s}", OrenNayar(s / 10)) for s in (1, 3, 5)
        ]
    else:
        variants = [("LAM", Lambertian())] + [
            (f"PH{s}", Phong(1.0 - s / 10, s / 10)) for s in (1, 3, 5)
        ]
    images = {
        name: render_image(height, mask, model, light, viewer, quantize=False)
        for name, model in variants
    }
    eta = float(cfg.get("eta", 1e-8))
    l2 = {}
    linf = {}
    for rec_name, rec_model in variants:
        for gen_name, _ in variants:
            h_rec, _ = solve(images[gen_name], mask, rec_model, light, viewer,
                             SolverConfig(eta=eta))
            se = surface_errors(height, h_rec, mask)
            l2[rec_name, gen_name] = se.l2
            linf[rec_name, gen_name] = se.linf
    names = [name for name, _ in variants]
    lines = []
    for label, table in (("L2", l2), ("Linf", linf)):
        lines.append(label + "\t" + "\t".join(names))
        for rec in names:
            lines.append(rec + "\t" + "\t".join(f"{table[rec, gen]:.4f}" for gen in names))
    return lines


def _bench_vase_bc(cfg, out_dir, size):
    grid = square_grid(size)
    height, mask, rim = make_vase(grid)
    light = LightSource(VERTICAL)
    viewer = Viewer(VERTICAL)
    rows = [
        ("LAM", Lambertian()),
        ("ON-02", OrenNayar(0.2)),
        ("ON-04", OrenNayar(0.4)),
        ("PH-s02", Phong(0.8, 0.2)),
        ("PH-s04", Phong(0.6, 0.4)),
    ]
    eta = float(cfg.get("eta", 1e-8))
    lines = []
    for bc_label, bc in (("BC=0", DirichletZero()), ("BC=rim", DirichletField(rim))):
        lines.append(f"{bc_label}\tscheme\titer\tL2(S)\tLinf(S)")
        for name, model in rows:
            image = render_image(height, mask, model, light, viewer, quantize=False)
            h_rec, report = solve(image, mask, model, light, viewer,
                                  SolverConfig(eta=eta, bc=bc))
            se = surface_errors(height, h_rec, mask)
            lines.append(f"\t{name}\t{report.iterations}\t{se.l2:.4f}\t{se.linf:.4f}")
    return lines


def cmd_bench(cfg, out_dir):
    which = cfg.get("bench", "sphere")
    size = int(cfg.get("size", 256))
    if which == "sphere":
        lines = _bench_sphere(cfg, out_dir, size)
    elif which == "tent_on":
        lines = _bench_tent(cfg, out_dir, size, "on")
    elif which == "tent_ph":
        lines = _bench_tent(cfg, out_dir, size, "ph")
    elif which == "vase_bc":
        lines = _bench_vase_bc(cfg, out_dir, size)
    else:
        raise ConfigError(f"unknown bench {which!r}")
    table = "\n".join(lines) + "\n"
    (Path(out_dir) / cfg.get("out_table", f"bench_{which}.tsv")).write_text(table)
    print(table, end="")
    return 0


COMMANDS = {
    "render": cmd_render,
    "reconstruct": cmd_reconstruct,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sfs",
        description="Shape-from-shading: render benchmark scenes, reconstruct "
        "height fields from gray-level images, evaluate errors.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="key = value run configuration")
    parser.add_argument("--out-dir", default=".", help="directory for outputs")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: SFS_THREADS or all cores)")
    args = parser.parse_args(argv)

    threads = args.threads
    if threads is None and os.environ.get("SFS_THREADS"):
        try:
            threads = int(os.environ["SFS_THREADS"])
        except ValueError:
            print(f"sfs: bad SFS_THREADS value {os.environ['SFS_THREADS']!r}", file=sys.stderr)
            return 2
    if threads is not None:
        import numba

        numba.set_num_threads(max(1, threads))

    try:
        cfg = fileio.parse_config(args.config)
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, args.out_dir)
    except ConfigError as exc:
        print(f"sfs: config error: {exc}", file=sys.stderr)
        return 2
    except NoConvergence as exc:
        print(f"sfs: {exc}", file=sys.stderr)
        return 3
    except (OSError, MalformedHeader, UnsupportedDepth) as exc:
        print(f"sfs: i/o error: {exc}", file=sys.stderr)
        return 4
    except SfsError as exc:
        print(f"sfs: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
