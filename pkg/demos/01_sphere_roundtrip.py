"""Render a shaded hemisphere, reconstruct it, and measure the errors.

The complete loop on the standard benchmark: shade the analytic surface
into an 8-bit image, run the semi-Lagrangian fixed-point solver on that
image alone, then compare against the generator both in height and in
re-rendered brightness.  Outputs land in demos/out/.
"""

from pathlib import Path

import numpy as np

import sfs
from sfs import fileio

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

light = sfs.LightSource(np.array([0.0, 0.0, 1.0]))
viewer = sfs.Viewer(np.array([0.0, 0.0, 1.0]))
model = sfs.Lambertian()

grid = sfs.square_grid(128)
height, mask = sfs.make_sphere(grid)
print(f"scene: hemisphere, {mask.n_inside} inside nodes on a {grid.nx}x{grid.ny} grid")

image = sfs.render_image(height, mask, model, light, viewer, quantize=True)
fileio.write_pgm(OUT / "sphere.pgm", image)
fileio.write_mask_pgm(OUT / "sphere_mask.pgm", mask)

recon, report = sfs.solve(image, mask, model, light, viewer, sfs.SolverConfig(eta=1e-8))
print("solve:", report.summary())

surf = sfs.surface_errors(height, recon, mask)
img_err = sfs.image_errors(
    image, sfs.render_image(recon, mask, model, light, viewer), mask
)
print(f"surface errors: L1 {surf.err1:.4f}  L2 {surf.l2:.4f}  Linf {surf.linf:.4f}")
print(f"image errors (8-bit): L2 {img_err.l2:.4f}  Linf {img_err.linf:.4f}")

fileio.write_height_dump(OUT / "sphere_height.txt", recon, grid)
nv, nf = fileio.export_mesh_obj(OUT / "sphere.obj", recon, mask, grid)
print(f"wrote sphere.obj ({nv} vertices, {nf} triangles) and sphere_height.txt")
