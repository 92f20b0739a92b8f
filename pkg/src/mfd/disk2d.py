"""Triangle fills and the driver for 2-complexes.

A triangle's boundary loop (three edge transports glued end to end) is
extended inward on a barycentric grid.  The anchor is an exact joint
decomposition taken at the centroid, aligned with the loop.  Every loop
frame factors as ``F_k = Vc B_k exp(i h_k)`` where ``B_k`` is block
unitary over the groups of anchor columns that the loop mixes and ``h_k``
is small.  Moving
inward, first ``exp(i h)`` is contracted, then ``B`` is shrunk to the
identity along its logarithm; the eigenprojections stay continuous because
``B`` only mixes columns inside one cluster.
"""
from dataclasses import dataclass

import numpy as np

from .dense import (
    SpectralDecomp,
    dagger,
    expih_batch,
    joint_normal_batch,
    log_unitary_batch,
    opnorm,
    polar_batch,
)
from .diag1d import _rephase_to, default_eta, gauge_skeleton
from .errors import (
    DegenerateFrame,
    FramesInvalid,
    GapCollapse,
    Obstructed,
    OscillationTooLarge,
    OverlapCollapse,
    MeshTooCoarse,
    Singular,
    ToleranceNotMet,
    ValidationFailed,
)
from .field import DiagonalFrameField, FunctionDictionary, TriangleFill, residual_report
from .matching import match_decompositions

RHO0 = 0.02
FRAME_BOUND = 0.2


@dataclass(eq=False)
class BoundaryData:
    """Closed loop of labels and frames around one triangle.

    ``labels`` is ``(3m + 1, n, g)`` and ``frames`` is ``(3m + 1, n, n)``;
    corners sit at positions 0, m and 2m, and the last sample repeats the
    first.  ``base`` is the anchor decomposition, ordered like the loop.
    """

    labels: np.ndarray
    frames: np.ndarray
    m: int
    base: SpectralDecomp = None
    triangle: tuple = (0, 1, 2)

    def __post_init__(self):
        if self.labels.ndim == 2:
            self.labels = self.labels[..., None]
        if len(self.frames) != 3 * self.m + 1 or len(self.labels) != 3 * self.m + 1:
            raise FramesInvalid("loop must carry 3m + 1 samples")
        if not (
            np.array_equal(self.frames[0], self.frames[-1])
            and np.array_equal(self.labels[0], self.labels[-1])
        ):
            raise FramesInvalid("boundary loop does not close exactly")
        if self.base is None:
            self.base = SpectralDecomp(self.labels[0].copy(), self.frames[0].copy())

    @property
    def corners(self):
        return self.labels[[0, self.m, 2 * self.m]]

    @property
    def label_motion(self):
        d = self.labels - self.base.joint_labels[None]
        return float(np.sqrt(np.sum(np.abs(d) ** 2, axis=-1)).max())

    @property
    def frame_motion(self):
        """Largest projector distance ``||p_i(k) - p_i(anchor)||`` on the loop."""
        ov = np.abs(np.einsum("ai,kai->ki", np.conj(self.base.frame), self.frames)) ** 2
        return float(np.sqrt(np.clip(1.0 - ov, 0.0, None)).max())

    @property
    def oscillation(self):
        return max(self.label_motion, self.frame_motion)


def boundary_align(data):
    """Unitaries ``u_k`` with ``u_k* p_i(k) u_k = p_i(L - k)`` on the upper half.

    ``u_k = F_k F_{L-k}*``; it is the identity at both junctions
    ``k = 0`` and ``k = L/2``.
    """
    F = data.frames
    norms = np.linalg.norm(F, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-8):
        raise DegenerateFrame("loop frame column norm deviates from 1")
    L = len(F) - 1
    k = np.arange(L // 2 + 1)
    return F[k] @ dagger(F[L - k])


def reference_grid(m):
    """Barycentric grid ``(P, 3)`` and loop positions of boundary points."""
    pts, pos = [], []
    for i in range(m, -1, -1):
        for j in range(m - i, -1, -1):
            k = m - i - j
            pts.append((i, j, k))
            if k == 0:
                pos.append(j)
            elif i == 0:
                pos.append(m + k)
            elif j == 0:
                pos.append((2 * m + i) % (3 * m))
            else:
                pos.append(-1)
    return np.array(pts, dtype=float) / m, np.array(pos)


def _block_polar(G, clusters):
    B = np.zeros_like(G)
    for c in clusters:
        try:
            B[:, c[:, None], c[None, :]] = polar_batch(G[:, c[:, None], c[None, :]])
        except Singular as exc:
            raise GapCollapse("loop frame leaves an anchor cluster") from exc
    return B


def mixing_clusters(G, thresh=0.5):
    """Group anchor columns that the loop frames mix strongly.

    Columns ``i`` and ``j`` are joined when some ``|G_k[i, j]|`` reaches
    ``thresh``; ``G_k = Vc* F_k`` is the loop frame seen from the anchor.
    """
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    n = G.shape[-1]
    mix = np.abs(G).max(axis=0) >= thresh
    adj = mix | mix.T | np.eye(n, dtype=bool)
    _, comp = connected_components(csr_matrix(adj), directed=False)
    order = list(dict.fromkeys(comp))
    return [np.flatnonzero(comp == c) for c in order]


def _loop_position(wb, m):
    """Continuous loop coordinate of a boundary barycentric point."""
    j = int(np.argmin(wb))
    if j == 2:
        return wb[1] * m
    if j == 0:
        return m + wb[2] * m
    return 2 * m + wb[0] * m


def extend_triangle(data, eps=None, eta=0.1, frame_bound=FRAME_BOUND, strict=True, rho0=RHO0):
    """Extend boundary frames and labels over the triangle.

    Parameters
    ----------
    data : BoundaryData
    eps : float, optional
        Only recorded; the caller judges residuals.
    eta : float
        Admissible label motion around the loop.
    frame_bound : float
        Admissible projector motion around the loop.
    strict : bool
        Raise ``OscillationTooLarge`` when the loop is not admissible.

    Returns
    -------
    TriangleFill
        Boundary samples are copies of the loop samples.
    """
    m = data.m
    L = 3 * m
    if strict and (data.label_motion > eta or data.frame_motion > frame_bound):
        raise OscillationTooLarge(
            f"loop oscillation (labels {data.label_motion:.3g}, frames "
            f"{data.frame_motion:.3g}) exceeds ({eta:.3g}, {frame_bound:.3g}); refine"
        )
    Vc = data.base.frame
    lc = data.base.joint_labels
    n = Vc.shape[0]
    G = dagger(Vc)[None] @ data.frames[:L]
    clusters = mixing_clusters(G)
    B = _block_polar(G, clusters)
    h, gaps = log_unitary_batch(dagger(B) @ G)
    if np.any(gaps < 1e-3):
        raise GapCollapse("no spectral gap in a loop correction")
    Bn = np.roll(B, -1, axis=0)
    _, _, th_r, V_r = log_unitary_batch(dagger(B) @ Bn, with_eig=True)

    bary, pos = reference_grid(m)
    P = len(bary)
    frames = np.empty((P, n, n), dtype=complex)
    labels = np.empty((P,) + data.labels.shape[1:], dtype=complex)
    corners = data.corners
    interior = np.flatnonzero(pos < 0)
    for p in np.flatnonzero(pos >= 0):
        frames[p] = data.frames[pos[p]]
        labels[p] = data.labels[pos[p]]

    cen = np.full(3, 1.0 / 3.0)
    rho = np.max(1.0 - 3.0 * bary, axis=1)
    Bt = np.empty((len(interior), n, n), dtype=complex)
    ht = np.empty_like(Bt)
    lam_loop = np.empty((len(interior),) + labels.shape[1:], dtype=complex)
    wbs = np.empty((len(interior), 3))
    for q, p in enumerate(interior):
        r = rho[p]
        wb = cen + (bary[p] - cen) / r if r > 0 else np.array([1.0, 0.0, 0.0])
        wb = np.clip(wb, 0.0, None)
        wb = wb / wb.sum()
        wbs[q] = wb
        tau = _loop_position(wb, m) % L
        k = int(np.floor(tau)) % L
        f = tau - np.floor(tau)
        step = (V_r[k] * np.exp(1j * f * th_r[k])) @ dagger(V_r[k])
        Bt[q] = B[k] @ step
        ht[q] = (1.0 - f) * h[k] + f * h[(k + 1) % L]
        lam_loop[q] = (1.0 - f) * data.labels[k] + f * data.labels[k + 1]
    r = rho[interior]
    outer = r >= rho0
    rhat = np.where(outer, (r - rho0) / (1.0 - rho0), 0.0)
    inner_frac = np.where(outer, 1.0, r / rho0)
    # inner disk: shrink B along its own logarithm
    logB, _ = log_unitary_batch(Bt) if len(Bt) else (Bt, None)
    Bs = expih_batch(logB, inner_frac) if len(Bt) else Bt
    Bs = np.where(outer[:, None, None], Bt, Bs)
    Z = expih_batch(ht, rhat) if len(ht) else ht
    frames[interior] = Vc[None] @ Bs @ Z

    lin = np.einsum("pc,cng->png", bary[interior], corners)
    lin_b = np.einsum("pc,cng->png", wbs, corners)
    lam = lin + r[:, None, None] * (lam_loop - lin_b)
    radius = np.sqrt(np.sum(np.abs(data.labels - lc[None]) ** 2, axis=-1)).max(axis=0)
    off = lam - lc[None]
    dist = np.sqrt(np.sum(np.abs(off) ** 2, axis=-1))
    shrink = np.where(dist > radius[None], radius[None] / np.where(dist > 0, dist, 1.0), 1.0)
    labels[interior] = lc[None] + off * shrink[..., None]
    return TriangleFill(tuple(int(x) for x in data.triangle), m, bary, labels, frames, pos)


def fill_anchor_residual(fill, base):
    """Largest ``||sum_i lambda_ij(x) p_i(x) - A_j||`` over the fill, A the anchor."""
    out = 0.0
    for j in range(base.n_generators):
        A = base.matrix(j)
        D = (fill.frames * fill.labels[:, None, :, j]) @ dagger(fill.frames)
        out = max(out, float(opnorm(D - A[None]).max()))
    return out


def fill_boundary_exact(fill, data):
    """True when every boundary grid point equals its loop sample bit for bit."""
    b = fill.boundary >= 0
    return bool(
        np.array_equal(fill.frames[b], data.frames[fill.boundary[b]])
        and np.array_equal(fill.labels[b], data.labels[fill.boundary[b]])
    )


# ----------------------------------------------------------------------------
# vertex snapping


def snap_vertex_homomorphism(samples, tol=1e-13):
    """Exactly commuting diagonal model of an almost commuting normal tuple.

    ``samples`` has shape ``(g, n, n)``.  The tuple's Hermitian and
    skew-Hermitian parts are jointly diagonalized; labels are the diagonal
    entries of ``V* A_j V``.  The model ``V diag(labels_j) V*`` commutes
    exactly and is an exact homomorphism on polynomials.
    """
    samples = np.asarray(samples, dtype=complex)
    lab, V = joint_normal_batch(samples[None], tol)
    return SpectralDecomp(lab[0], V[0])


# ----------------------------------------------------------------------------
# driver


def _loop(transports, eidx, tri):
    a, b, c = (int(x) for x in tri)
    parts = []
    for u, v in ((a, b), (b, c), (c, a)):
        t = transports[eidx[frozenset((u, v))]]
        parts.append(t if t.edge == (u, v) else t.reversed())
    labels = np.concatenate([parts[0].labels] + [p.labels[1:] for p in parts[1:]])
    frames = np.concatenate([parts[0].frames] + [p.frames[1:] for p in parts[1:]])
    return labels, frames


def _anchor(X, labels, frames, tri, eta):
    a, b, c = (int(x) for x in tri)
    Xc = (X[a] + X[b] + X[c]) / 3.0
    lab, V = joint_normal_batch(Xc[None])
    target = SpectralDecomp((labels[a] + labels[b] + labels[c]) / 3.0, frames[a])
    plan = match_decompositions(target, SpectralDecomp(lab[0], V[0]), eta)
    Vc = _rephase_to(frames[a], V[0][:, plan.perm])
    return SpectralDecomp(lab[0][plan.perm], Vc)


def diagonalize_complex2(
    fld, eta=None, eps=0.1, dict_degree=2, strict=True, obstruct_on_chern=False, rho0=RHO0
):
    """Diagonalize a field over a complex of dimension <= 2.

    Vertices keep exact joint decompositions, edges carry gauge-fixed
    transports with one common step count, and every triangle is filled.
    Nontrivial monodromy raises ``Obstructed``.  Chern numbers of the
    eigenline bundles are computed when possible and stored in
    ``meta["chern"]``; a nonzero value only blocks the run when
    ``obstruct_on_chern`` is set.
    """
    dom = fld.domain
    if dom.dimension > 2:
        raise ValidationFailed("diagonalize_complex2 handles dimension <= 2")
    if eta is None:
        eta = default_eta(fld)
    labels, frames, transports, cotree = gauge_skeleton(fld, eta, global_steps=True)
    X = fld.stack()
    eidx = dom.edge_index()
    fills = {}
    m = next(iter(transports.values())).steps if transports else 0
    for t, tri in enumerate(dom.triangles):
        lab_l, fr_l = _loop(transports, eidx, tri)
        base = _anchor(X, labels, frames, tri, eta)
        data = BoundaryData(lab_l, fr_l, m, base, tuple(int(x) for x in tri))
        fills[t] = extend_triangle(data, eps, eta=eta, strict=False, rho0=rho0)
    out = DiagonalFrameField(
        dom, labels, frames, transports, fills, fld.names,
        {"eta": float(eta), "forced_closures": cotree, "steps": int(m)},
    )
    chern = _chern_info(out)
    out.meta["chern"] = chern
    if obstruct_on_chern and chern and any(c for c in chern):
        from .obstruction import ObstructionReport

        raise Obstructed(
            ObstructionReport(
                "chern", int(next(c for c in chern if c)), f"{dom.kind}({dom.param})",
                f"eigenline Chern numbers {chern} are not all zero",
                details={"chern": chern},
            )
        )
    rep = residual_report(fld, out, FunctionDictionary(dict_degree, fld.g), eps)
    out.meta["report"] = rep
    if strict and not rep.verdict:
        raise ToleranceNotMet(
            f"max residual {rep.max:.3e} exceeds eps {eps:.3e}; refine the mesh",
            report=rep, suggested_refine=1,
        )
    return out


def _chern_info(frames_field):
    from .obstruction import chern_number

    dom = frames_field.domain
    if not len(dom.triangles):
        return None
    count = np.zeros(len(dom.edges), dtype=int)
    eidx = dom.edge_index()
    for a, b, c in dom.triangles:
        for u, v in ((a, b), (b, c), (c, a)):
            count[eidx[frozenset((int(u), int(v)))]] += 1
    if np.any(count != 2):
        return None
    out = []
    try:
        for i in range(frames_field.n):
            out.append(chern_number(frames_field.frames[:, :, [i]], dom.triangles))
    except (OverlapCollapse, MeshTooCoarse):
        return None
    return out
