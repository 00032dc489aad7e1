"""Compare the three brightness models and their eikonal inversions.

Shows how the rough-diffuse and specular models depart from plain
Lambertian shading on the same slope sweep, checks the model reductions
(sigma = 0 and k_S = 0 recover Lambertian), and demonstrates that under a
vertical light each model's brightness formula inverts exactly back to
the gradient magnitude.
"""

import numpy as np

import sfs

light = sfs.LightSource(np.array([0.0, 0.0, 1.0]))
viewer = sfs.Viewer(np.array([0.0, 0.0, 1.0]))

slopes = np.linspace(0.0, 3.0, 7)
grads = np.stack([slopes, np.zeros_like(slopes)], axis=-1)

lam = sfs.lambert_brightness(grads, light)
on = sfs.oren_nayar_brightness(grads, light, viewer, sfs.OrenNayar(0.5))
ph = sfs.phong_brightness(grads, light, viewer, sfs.Phong(0.6, 0.4))

print("slope   Lambertian  Oren-Nayar(0.5)  Phong(kS=0.4)")
for s, a, b, c in zip(slopes, lam, on, ph):
    print(f"{s:5.2f}   {a:10.4f}  {b:15.4f}  {c:13.4f}")

print("\nmodel reductions (max |difference| on 1000 random gradients):")
rng = np.random.default_rng(0)
g = rng.uniform(-4, 4, (1000, 2))
print("  OrenNayar(0)  vs Lambertian:",
      np.abs(sfs.oren_nayar_brightness(g, light, viewer, sfs.OrenNayar(0.0))
             - sfs.lambert_brightness(g, light)).max())
print("  Phong(kS=0)   vs Lambertian:",
      np.abs(sfs.phong_brightness(g, light, viewer, sfs.Phong(1.0, 0.0))
             - sfs.lambert_brightness(g, light)).max())

print("\neikonal inversion (vertical light): brightness -> |grad u|")
for model in (sfs.Lambertian(), sfs.OrenNayar(0.4), sfs.Phong(0.6, 0.4)):
    mags = rng.uniform(0.0, 0.95, 1000)
    ang = rng.uniform(0, 2 * np.pi, 1000)
    gg = np.stack([mags * np.cos(ang), mags * np.sin(ang)], axis=-1)
    b = sfs.brightness(gg, model, light, viewer)
    rec = np.array([sfs.eikonal_rhs(model, v) for v in b])
    print(f"  {type(model).__name__:11s} max inversion error {np.abs(rec - mags).max():.2e}")
