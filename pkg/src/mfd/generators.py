"""Seeded test fields with known regularity, plus the CLI ``gen`` dispatcher."""
import numpy as np

from .dense import dagger, expih_batch
from .domain import build_domain, cycle, interval, sphere2
from .errors import BadParam
from .field import Generator, GeneratorField
from .obstruction import gen_example


def _rand_herm(rng, n, norm=1.0):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = (x + dagger(x)) / 2.0
    return h * (norm / np.linalg.norm(h, 2))


def _rand_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def measured_lipschitz(sampler, points, pairs):
    """Largest ||A(x) - A(y)|| / |x - y| over the given point pairs."""
    A = sampler(points)
    d = np.linalg.norm(points[pairs[:, 0]] - points[pairs[:, 1]], axis=-1)
    diff = np.linalg.norm(A[pairs[:, 0]] - A[pairs[:, 1]], 2, axis=(-2, -1))
    return float(np.max(diff / d))


def interval_sampler(n, seed, kind="normal"):
    """Smooth commuting-field sampler ``t -> V(t) diag(c(t)) V(t)*`` on [0, 1].

    Labels stay at least 0.3 apart; frames rotate by ``exp(i t K)`` with
    ``||K|| = 0.25``.
    """
    rng = np.random.default_rng(seed)
    V0 = _rand_unitary(rng, n)
    K = _rand_herm(rng, n, 0.25)
    base = np.linspace(-0.6, 0.6, n) if n > 1 else np.zeros(1)
    amp = 0.08 * rng.uniform(-1, 1, size=(n, 2))
    freq = rng.uniform(0.5, 1.5, size=n)
    phase = rng.uniform(0, 2 * np.pi, size=n)

    def sample(t):
        t = np.asarray(t, dtype=float).reshape(-1)
        re = base + amp[:, 0] * np.sin(freq * t[:, None] + phase)
        im = amp[:, 1] * np.cos(freq * t[:, None] + phase)
        c = re + 1j * im if kind == "normal" else re + 0j
        V = expih_batch(np.broadcast_to(K, (len(t), n, n)), t) @ V0
        return (V * c[:, None, :]) @ dagger(V)

    return sample


def interval_random(m, n=4, seed=0, kind="normal"):
    dom = interval(m)
    sample = interval_sampler(n, seed, kind)
    fine = np.linspace(0, 1, 2049)
    pairs = np.stack([np.arange(2048), np.arange(1, 2049)], axis=1)
    lip = measured_lipschitz(lambda p: sample(p[:, 0]), fine[:, None], pairs)
    gkind = "normal" if kind == "normal" else "hermitian"
    return GeneratorField(dom, [Generator("a", gkind, sample(dom.coords[:, 0]), lip)]).validate()


def sphere_sampler(n, seed):
    """Hermitian sampler on R^3 restricted to the unit sphere.

    ``x -> V(x) diag(c(x)) V(x)*`` with ``V(x) = exp(i sum_k x_k K_k)`` and
    labels affine in ``x``; the ordered labels never meet.
    """
    rng = np.random.default_rng(seed)
    V0 = _rand_unitary(rng, n)
    Ks = np.array([_rand_herm(rng, n, 0.2) for _ in range(3)])
    base = np.linspace(-0.7, 0.7, n) if n > 1 else np.zeros(1)
    slope = 0.1 * rng.uniform(-1, 1, size=(n, 3))

    def sample(x):
        x = np.atleast_2d(x)
        c = base + x @ slope.T
        H = np.einsum("pk,kab->pab", x, Ks)
        V = expih_batch(H) @ V0
        return (V * c[:, None, :]) @ dagger(V)

    return sample


def sphere_random(k, n=3, seed=0):
    dom = sphere2(k)
    sample = sphere_sampler(n, seed)
    fine = sphere2(4)
    lip = measured_lipschitz(sample, fine.coords, fine.edges)
    return GeneratorField(dom, [Generator("a", "hermitian", sample(dom.coords), lip)]).validate()


def winding(m):
    """``diag(e^{i t}, 1)`` on a cycle: one label winds once, no braiding."""
    dom = cycle(m)
    th = dom.coords[:, 0]
    u = np.zeros((m, 2, 2), dtype=complex)
    u[:, 0, 0] = np.exp(1j * th)
    u[:, 1, 1] = 1.0
    return GeneratorField(dom, [Generator("u", "unitary", u, 1.0)]).validate()


def crossing(m):
    """``diag(t, 1 - t)`` on [0, 1]: the two eigenvalues cross at t = 1/2."""
    dom = interval(m)
    t = dom.coords[:, 0]
    a = np.zeros((m + 1, 2, 2), dtype=complex)
    a[:, 0, 0] = t
    a[:, 1, 1] = 1.0 - t
    return GeneratorField(dom, [Generator("a", "hermitian", a, 1.0)]).validate()


def monopole(k):
    """``x . sigma`` on the sphere; its lower eigenline has Chern number -1."""
    dom = sphere2(k)
    sig = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)
    a = np.einsum("vk,kab->vab", dom.coords, sig)
    return GeneratorField(dom, [Generator("a", "hermitian", a, 1.0)]).validate()


def boundary_loop(seed, oscillation=0.02, m=16, n=3):
    """Seeded closed loop of frames and labels around one triangle.

    Frames are ``exp(i H(t)) Vc`` and labels ``lc + l(t)`` with ``H`` and
    ``l`` trigonometric of degree 2 in the loop angle.  Both amplitudes are
    tuned so that the label motion and the projector motion about the
    anchor ``(lc, Vc)`` both equal ``oscillation``.
    """
    from .dense import SpectralDecomp
    from .disk2d import BoundaryData

    rng = np.random.default_rng(seed)
    Vc = _rand_unitary(rng, n)
    lc = np.sort(rng.uniform(-1, 1, n)).astype(complex)
    Ks = np.array([_rand_herm(rng, n) for _ in range(4)])
    dl = rng.normal(size=(4, n))
    L = 3 * m
    t = 2 * np.pi * np.arange(L + 1) / L
    coef = np.stack([np.cos(t), np.sin(t), np.cos(2 * t), np.sin(2 * t)], axis=1)
    H = np.einsum("kj,jab->kab", coef, Ks)
    base = SpectralDecomp(lc, Vc)

    def build(sf, sl):
        F = expih_batch(H, sf) @ Vc
        F[-1] = F[0]
        lab = lc[None] + sl * (coef @ dl)
        lab[-1] = lab[0]
        return BoundaryData(lab, F, m, base)

    sf = sl = 1.0
    for _ in range(60):
        d = build(sf, sl)
        if abs(d.frame_motion - oscillation) < 1e-12 * oscillation:
            break
        sf *= oscillation / d.frame_motion
    sl *= oscillation / d.label_motion
    return build(sf, sl)


GEN_KINDS = (
    "interval-random", "sphere-random", "crossing", "winding", "braid",
    "monopole", "s3-unitary", "count1-b", "tcount",
)


def gen_field(kind, m=None, n=None, k=None, seed=0, reflect=False):
    """Build a named example field (the CLI ``gen`` backend)."""
    if kind == "interval-random":
        return interval_random(m or 128, n or 4, seed)
    if kind == "sphere-random":
        return sphere_random(2 if k is None else k, n or 3, seed)
    if kind == "crossing":
        return crossing(m or 128)
    if kind == "winding":
        return winding(m or 256)
    if kind == "braid":
        return gen_example("braid", cycle(m or 256))
    if kind == "monopole":
        return monopole(2 if k is None else k)
    if kind == "s3-unitary":
        return gen_example("s3_unitary", build_domain("s3", 2 if k is None else k), reflect)
    if kind == "count1-b":
        return gen_example("count1_b", build_domain("s3", 2 if k is None else k))
    if kind == "tcount":
        return gen_example(f"tcount({n or 3})", build_domain("s3", 2 if k is None else k))
    raise BadParam(f"unknown field kind {kind!r}")
