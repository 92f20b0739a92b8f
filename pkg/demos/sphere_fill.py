"""Frames over a triangulated 2-sphere and a single filled triangle.

Run with ``python3 demos/sphere_fill.py``.
"""
from mfd.disk2d import diagonalize_complex2, extend_triangle, fill_anchor_residual, fill_boundary_exact
from mfd.generators import boundary_loop, monopole, sphere_random

prev = None
for k in range(3):
    fr = diagonalize_complex2(sphere_random(k, n=3, seed=0), eps=0.1, strict=False)
    r = fr.meta["report"].max
    ratio = "" if prev is None else f"  ratio {r / prev:.2f}"
    print(f"sphere2({k})  max residual {r:.4f}{ratio}")
    prev = r

# a small loop of frames around one triangle, filled from its centroid
data = boundary_loop(seed=0, oscillation=0.02)
fill = extend_triangle(data)
print(
    f"triangle fill  boundary exact {fill_boundary_exact(fill, data)}, "
    f"interior residual {fill_anchor_residual(fill, data.base):.3f}"
)

# the monopole's eigenlines are nontrivial bundles; the frames still exist
fr = diagonalize_complex2(monopole(2), eps=0.2, strict=False)
print(f"monopole  eigenline Chern numbers {fr.meta['chern']}, residual {fr.meta['report'].max:.3f}")
