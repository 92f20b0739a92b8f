"""Integer certificates on the 3-sphere, and the homotopy to the identity.

Run with ``python3 demos/certificates.py``.
"""
import numpy as np

from mfd.dense import expih_batch
from mfd.diag1d import diagonalize_path
from mfd.domain import s3
from mfd.generators import _rand_herm, interval_random
from mfd.homotopy import basic_homotopy
from mfd.obstruction import certify, degree3, gen_example

dom = s3(2)
print(f"s3(2): {dom.n_vertices} vertices, {len(dom.tets)} tets")
print("degree of u(z, w)           ", degree3(gen_example("s3_unitary", dom)))
print("degree of the reflected map ", degree3(gen_example("s3_unitary", dom, reflect=True)))

reports, blocking = certify(gen_example("count1_b", dom))
for rep in reports:
    print(f"  [{rep.kind}] {rep.verdict}")
print("blocking:", blocking)

# an almost commuting unitary over an interval, contracted to 1
fr = diagonalize_path(interval_random(64, n=3, seed=5), eps=np.inf)
K = _rand_herm(np.random.default_rng(1), 3)
for delta in (1e-3, 1e-2, 5e-2):
    u = expih_batch(np.broadcast_to(K, (65, 3, 3)), delta)
    path = basic_homotopy(fr, u)
    print(
        f"delta {delta:.0e}: input commutator {path.delta_in:.2e}, "
        f"path max {path.max_commutator:.2e}, ||a|| {path.log_norm:.2e}"
    )
