"""One-dimensional carriers: an interval, a winding loop and a braided loop.

Run with ``python3 demos/interval_and_cycles.py``.
"""
import numpy as np

from mfd.diag1d import diagonalize_cycle, diagonalize_path
from mfd.errors import Obstructed
from mfd.generators import crossing, gen_field, interval_random, winding

# a smooth normal field on [0, 1]: residuals shrink like 1/m
for m in (32, 64, 128):
    fld = interval_random(m, n=4, seed=7)
    fr = diagonalize_path(fld, eps=np.inf)
    print(f"interval({m:3d})  max residual {fr.meta['report'].max:.2e}")

# two eigenvalues that cross; the frames follow the eigenvectors, not the order
fr = diagonalize_path(crossing(128), eta=0.05, eps=0.06)
print(f"crossing        max residual {fr.meta['report'].max:.2e}")

# one eigenvalue winds around 0 without braiding: still diagonalizable
fr = diagonalize_cycle(winding(256))
print(f"winding         label windings {fr.meta['windings']}")

# eigenvalues +-e^{it/2} swap once around the loop: no continuous frame exists
try:
    diagonalize_cycle(gen_field("braid", m=256))
except Obstructed as exc:
    rep = exc.report
    print(f"braid           obstructed, perm {rep.value}, det winding {rep.details['det_winding']}")
