"""Diagonalization over 1-complexes.

Each vertex gets an exact joint decomposition.  A breadth-first spanning
tree fixes one gauge: every child vertex relabels its eigenpairs to follow
its parent and rephases its columns so that parent and child columns have
real positive overlap.  Every edge then carries a short unitary path
``exp(i s h)`` between the two vertex frames with linearly interpolated
labels.  Column phases are split off first and ramped linearly, so ``h``
only rotates the eigenprojections.  Edges outside the tree close loops and
are where monodromy shows.
"""
from dataclasses import dataclass

import numpy as np

from .dense import (
    SpectralDecomp,
    dagger,
    joint_normal_batch,
    log_unitary_batch,
    opnorm,
    polar_batch,
)
from .domain import bfs_tree
from .errors import GapCollapse, Singular, Obstructed, ToleranceNotMet, ValidationFailed
from .field import DiagonalFrameField, EdgeTransport, FunctionDictionary, residual_report
from .matching import (
    MatchingPlan,
    cluster_by_radius,
    format_perm,
    permutation_cycles,
    label_distances,
    match_decompositions,
    reduce_within_clusters,
)

STEP_ANGLE = 0.2
MIN_STEPS = 8


@dataclass
class MonodromyResult:
    perm: np.ndarray
    windings: np.ndarray
    trivial: bool
    raw_perm: np.ndarray = None

    def cycle_notation(self):
        return format_perm(self.perm)


# ----------------------------------------------------------------------------
# vertex level


def vertex_decompositions(fld):
    """Joint decompositions of every vertex: labels (V, n, g), frames (V, n, n)."""
    return joint_normal_batch(fld.stack())


def default_eta(fld):
    """Four times the largest per-edge spectral motion estimate.

    By Weyl's inequality (and its normal analogue) no label moves further
    than the operator-norm change of its generator along an edge.
    """
    X = fld.stack()
    e = fld.domain.edges
    if len(e) == 0:
        return 1e-8
    motion = opnorm(X[e[:, 1]] - X[e[:, 0]]).max(axis=-1)
    return float(max(4.0 * motion.max(), 1e-8))


def _rephase_to(parent_frame, child_frame):
    ov = np.einsum("ai,ai->i", np.conj(parent_frame), child_frame)
    ph = np.where(np.abs(ov) > 0, np.conj(ov) / np.where(np.abs(ov) > 0, np.abs(ov), 1), 1.0)
    return child_frame * ph[None, :]


def _exact_blocks(labels, scale):
    """Groups of labels that coincide to rounding level."""
    part = cluster_by_radius(labels, 1e-12 * scale)
    return [c for c in part.clusters if len(c) > 1]


def align_child(parent, child, eta, scale=1.0):
    """Relabel and rephase ``child`` to follow ``parent``.

    Inside exactly degenerate eigenspaces the child's basis is replaced by the
    one closest to the parent's columns, which keeps the decomposition exact.
    Returns the aligned decomposition and the plan used.
    """
    plan = match_decompositions(parent, child, eta)
    lab = child.joint_labels[plan.perm]
    F = child.frame[:, plan.perm]
    for blk in _exact_blocks(lab, scale):
        sub = F[:, blk]
        proj = sub @ dagger(sub)
        target = proj @ parent.frame[:, blk]
        try:
            F[:, blk] = polar_batch(target[None])[0]
        except Singular:
            pass
    F = _rephase_to(parent.frame, F)
    return SpectralDecomp(lab, F), plan


# ----------------------------------------------------------------------------
# edges


def _transport_paths(items, steps=None):
    """Transports for a list of ``(A, B, plan, edge)``, batched.

    ``steps`` may be a common step count; otherwise each edge gets
    ``max(8, ceil(||h|| / 0.2))``.
    """
    if not items:
        return []
    Fa, Fb, phi = _split_phases(items)
    h, gaps, theta, Vh = log_unitary_batch(Fb @ dagger(Fa), with_eig=True)
    if np.any(gaps < 1e-3):
        raise GapCollapse("alignment unitary has no usable spectral gap")
    size = np.maximum(np.abs(theta).max(axis=1), np.abs(phi).max(axis=1))
    out = []
    for k, (A, B, plan, edge) in enumerate(items):
        m = steps if steps is not None else max(MIN_STEPS, int(np.ceil(size[k] / STEP_ANGLE)))
        s = np.arange(m + 1) / m
        Z = (Vh[k][None] * np.exp(1j * s[:, None] * theta[k])[:, None, :]) @ dagger(Vh[k])[None]
        frames = (Z @ Fa[k]) * np.exp(1j * s[:, None] * phi[k])[:, None, :]
        frames[0] = Fa[k]
        frames[-1] = B.frame[:, plan.perm]
        la = A.joint_labels
        lb = B.joint_labels[plan.perm]
        labels = (1.0 - s)[:, None, None] * la[None] + s[:, None, None] * lb[None]
        labels[0] = la
        labels[-1] = lb
        D = (Fa[k][None] * la.T[:, None, :]) @ dagger(Fa[k])[None]
        comm = np.zeros(m + 1)
        for Dj in D:
            comm = np.maximum(comm, opnorm(Z @ Dj - Dj @ Z))
        comm[0] = 0.0
        out.append(
            EdgeTransport(tuple(int(x) for x in edge), plan, h[k], s, labels, frames, comm, phi[k])
        )
    return out


def _split_phases(items):
    """Start frames, phase-aligned end frames and the column phases removed."""
    Fa = np.stack([A.frame for A, _, _, _ in items])
    Fb = np.stack([B.frame[:, p.perm] for _, B, p, _ in items])
    ov = np.einsum("kai,kai->ki", np.conj(Fa), Fb)
    phi = np.where(np.abs(ov) > 1e-12, np.angle(ov), 0.0)
    return Fa, Fb * np.exp(-1j * phi)[:, None, :], phi


def steps_needed(items):
    """Largest default step count over a list of ``(A, B, plan, edge)``."""
    if not items:
        return MIN_STEPS
    Fa, Fb, phi = _split_phases(items)
    _, _, theta, _ = log_unitary_batch(Fb @ dagger(Fa), with_eig=True)
    size = max(np.abs(theta).max(), np.abs(phi).max())
    return max(MIN_STEPS, int(np.ceil(size / STEP_ANGLE)))


def edge_transport(A, B, eta=None, steps=None, plan=None, edge=(0, 1)):
    """Matched frame transport from decomposition ``A`` to ``B``.

    Parameters
    ----------
    A, B : SpectralDecomp
        Joint decompositions at the two ends of an edge.
    eta : float, optional
        Matching radius; default 1e-2 times the spectral diameter.
    steps : int, optional
        Number of path segments; default ``max(8, ceil(||h|| / 0.2))``.
    plan : MatchingPlan, optional
        Use this assignment instead of matching.

    Returns
    -------
    EdgeTransport
        Step 0 is ``A`` and the last step is ``B`` reordered by the plan,
        both copied exactly.
    """
    if eta is None:
        lab = np.concatenate([A.joint_labels, B.joint_labels])
        eta = 1e-2 * float(label_distances(lab, lab).max()) if len(lab) > 1 else 1e-8
    if plan is None:
        plan = match_decompositions(A, B, eta)
    return _transport_paths([(A, B, plan, edge)], steps)[0]


# ----------------------------------------------------------------------------
# skeleton driver


def _identity_plan(n, cost, eta):
    return MatchingPlan(np.arange(n), cost, eta, cost <= eta)


def gauge_skeleton(fld, eta, global_steps=False):
    """Gauge-fixed vertex decompositions and edge transports of a complex.

    Returns ``(labels, frames, transports, cotree_perms)``.  Raises
    ``Obstructed`` when a cotree edge closes a loop with a permutation that
    cannot be absorbed inside one eta-cluster.
    """
    dom = fld.domain
    lab0, F0 = vertex_decompositions(fld)
    nv, n = F0.shape[0], F0.shape[1]
    scale = max(1.0, float(np.abs(lab0).max()) if lab0.size else 1.0)
    parent, order, tree = bfs_tree(dom)
    labels = lab0.copy()
    frames = F0.copy()
    for v in order:
        p = parent[v]
        if p < 0:
            continue
        dec, _ = align_child(
            SpectralDecomp(labels[p], frames[p]), SpectralDecomp(lab0[v], F0[v]), eta, scale
        )
        labels[v], frames[v] = dec.labels, dec.frame
    cotree = {}
    plans = {}
    for k, (u, v) in enumerate(dom.edges):
        A = SpectralDecomp(labels[u], frames[u])
        B = SpectralDecomp(labels[v], frames[v])
        cost = float(np.max(label_distances(labels[u], labels[v]).diagonal())) if n else 0.0
        if k in tree:
            plans[k] = _identity_plan(n, cost, eta)
            continue
        plan = match_decompositions(A, B, eta)
        if not plan.is_identity:
            part = cluster_by_radius(np.concatenate([labels[u], labels[v]]), eta)
            red = reduce_within_clusters(plan.perm, part.member_of[:n])
            same = all(
                part.member_of[i] == part.member_of[n + plan.perm[i]] for i in range(n)
            )
            if not np.all(red == np.arange(n)) and not same:
                from .obstruction import ObstructionReport

                rep = ObstructionReport(
                    kind="monodromy",
                    value=[int(x) for x in plan.perm],
                    carrier=f"loop through edge ({int(u)}, {int(v)})",
                    verdict=(
                        "labels do not close up around a loop: monodromy "
                        f"{format_perm(plan.perm)}"
                    ),
                    tension_flag=True,
                )
                raise Obstructed(rep)
            cotree[k] = [int(x) for x in plan.perm]
        plans[k] = _identity_plan(n, cost, eta)
    items = []
    for k, (u, v) in enumerate(dom.edges):
        A = SpectralDecomp(labels[u], frames[u])
        B = SpectralDecomp(labels[v], frames[v])
        items.append((A, B, plans[k], (u, v)))
    m_glob = steps_needed(items) if global_steps else None
    transports = dict(enumerate(_transport_paths(items, m_glob)))
    return labels, frames, transports, cotree


def diagonalize_path(fld, eta=None, eps=0.05, dict_degree=2, strict=True):
    """Diagonalize a field over an interval or tree.

    Frames are exact at every vertex.  Raises ``ToleranceNotMet`` (carrying
    the report) when the residual exceeds ``eps`` and ``strict`` is set.
    """
    if fld.domain.dimension > 1 or not fld.domain.is_acyclic():
        raise ValidationFailed("diagonalize_path needs an acyclic 1-complex")
    return _diagonalize_1d(fld, eta, eps, dict_degree, strict)


def _diagonalize_1d(fld, eta, eps, dict_degree, strict):
    if eta is None:
        eta = default_eta(fld)
    labels, frames, transports, cotree = gauge_skeleton(fld, eta)
    out = DiagonalFrameField(
        fld.domain, labels, frames, transports, {}, fld.names,
        {"eta": float(eta), "forced_closures": cotree},
    )
    rep = residual_report(fld, out, FunctionDictionary(dict_degree, fld.g), eps)
    out.meta["report"] = rep
    if strict and not rep.verdict:
        raise ToleranceNotMet(
            f"max residual {rep.max:.3e} exceeds eps {eps:.3e}", report=rep, suggested_refine=1
        )
    return out


def cycle_monodromy(fld, eta=None):
    """Compose spectral matchings once around a cycle.

    The permutation is reported at cluster resolution: permutation cycles
    that stay inside one eta-cluster of the base vertex count as trivial.
    Windings are label phase windings around 0 (first generator); labels in
    one orbit share the winding of the whole orbit.
    """
    dom = fld.domain
    if not dom.is_cycle():
        raise ValidationFailed("cycle_monodromy needs a single cycle")
    if eta is None:
        eta = default_eta(fld)
    lab, F = vertex_decompositions(fld)
    nv, n = F.shape[0], F.shape[1]
    # walk 0 -> 1 -> ... following the cycle's neighbour structure
    nb = dom.neighbors()
    walk = [0]
    prev = -1
    while len(walk) < nv:
        cur = walk[-1]
        nxt = [x for x in nb[cur] if x != prev][0] if prev >= 0 else min(nb[cur])
        prev = cur
        walk.append(nxt)
    walk.append(0)
    pos = np.arange(n)  # label i of the base vertex sits at index pos[i]
    phase = np.zeros(n)
    cur = SpectralDecomp(lab[0], F[0])
    for a, b in zip(walk[:-1], walk[1:]):
        nxt = SpectralDecomp(lab[b], F[b])
        plan = match_decompositions(cur, nxt, eta)
        za = cur.joint_labels[pos, 0]
        pos = plan.perm[pos]
        zb = nxt.joint_labels[pos, 0]
        ok = (np.abs(za) > 1e-12) & (np.abs(zb) > 1e-12)
        phase += np.where(ok, np.angle(np.where(ok, zb / np.where(ok, za, 1), 1)), 0.0)
        cur = nxt
    raw = pos.copy()
    part = cluster_by_radius(lab[0], eta)
    perm = reduce_within_clusters(raw, part.member_of)
    wind = np.zeros(n, dtype=int)
    for cyc in permutation_cycles(raw):
        w = int(np.rint(phase[cyc].sum() / (2 * np.pi)))
        wind[cyc] = w
    return MonodromyResult(perm, wind, bool(np.all(perm == np.arange(n))), raw)


def diagonalize_cycle(fld, eta=None, eps=0.05, dict_degree=2, strict=True):
    """Diagonalize over a cycle or raise ``Obstructed`` on nontrivial monodromy."""
    if eta is None:
        eta = default_eta(fld)
    mono = cycle_monodromy(fld, eta)
    if not mono.trivial:
        from .obstruction import monodromy_report

        raise Obstructed(monodromy_report(fld, mono))
    out = _diagonalize_1d(fld, eta, eps, dict_degree, strict)
    out.meta["windings"] = [int(x) for x in mono.windings]
    return out
