"""Reconstruct the ridge tent with matching and mismatched model parameters.

Each column uses an image generated by one model variant; each row
reconstructs with another.  The diagonal (matching parameters) wins, and
errors grow with the parameter distance - the quantitative reason model
choice matters when shading real materials.
"""

import numpy as np

import sfs

light = sfs.LightSource(np.array([0.0, 0.0, 1.0]))
viewer = sfs.Viewer(np.array([0.0, 0.0, 1.0]))
grid = sfs.square_grid(96)
height, mask = sfs.make_tent(grid)

variants = [("LAM", sfs.Lambertian())] + [
    (f"ON{int(10 * s)}", sfs.OrenNayar(s)) for s in (0.1, 0.3, 0.5)
]
images = {
    name: sfs.render_image(height, mask, model, light, viewer)
    for name, model in variants
}

names = [n for n, _ in variants]
print("surface L2 error, reconstruction model (rows) vs image generator (columns)")
print("        " + "  ".join(f"{n:>7s}" for n in names))
for rec_name, rec_model in variants:
    row = []
    for gen_name, _ in variants:
        recon, _ = sfs.solve(
            images[gen_name], mask, rec_model, light, viewer,
            sfs.SolverConfig(eta=1e-6, n_theta=24),
        )
        row.append(sfs.surface_errors(height, recon, mask).l2)
    best = names[int(np.argmin(row))]
    print(f"{rec_name:>7s} " + "  ".join(f"{v:7.4f}" for v in row) + f"   best: {best}")
