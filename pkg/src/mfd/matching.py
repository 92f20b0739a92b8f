"""Spectral multiset matching, eta-clustering and frame alignment."""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, maximum_bipartite_matching

from .dense import dagger, is_normal, normal_decompose
from .errors import DegenerateFrame, NotNormal, SizeMismatch


@dataclass(frozen=True)
class MatchingPlan:
    """Assignment ``a_i -> b_perm[i]`` with its bottleneck cost.

    ``feasible`` records whether the cost stayed within ``eta``.
    """

    perm: np.ndarray
    bottleneck_cost: float
    eta: float
    feasible: bool = True

    @property
    def is_identity(self):
        return bool(np.all(self.perm == np.arange(len(self.perm))))

    def inverse(self):
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(len(self.perm))
        return MatchingPlan(inv, self.bottleneck_cost, self.eta, self.feasible)


@dataclass(frozen=True)
class ClusterPartition:
    clusters: list
    centers: np.ndarray
    eta: float = 0.0
    member_of: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.clusters)


def _as_points(labels):
    lab = np.asarray(labels, dtype=complex)
    return lab[:, None] if lab.ndim == 1 else lab


def label_distances(a, b):
    """Euclidean distances in C^g between two label lists."""
    a, b = _as_points(a), _as_points(b)
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.sum(np.abs(diff) ** 2, axis=-1))


def spectral_diameter(labels):
    pts = _as_points(labels)
    if len(pts) < 2:
        return 0.0
    return float(label_distances(pts, pts).max())


def _has_perfect_matching(allowed):
    n = allowed.shape[0]
    if n == 0:
        return True
    m = maximum_bipartite_matching(csr_matrix(allowed.astype(np.int8)), perm_type="column")
    return bool(np.all(m >= 0))


def _lexmin_matching(allowed):
    """Lexicographically smallest perfect matching of a boolean matrix."""
    n = allowed.shape[0]
    perm = np.full(n, -1)
    rows = list(range(n))
    cols_free = np.ones(n, dtype=bool)
    for i in range(n):
        rest = rows[i + 1:]
        for j in np.flatnonzero(allowed[i] & cols_free):
            cols_free[j] = False
            sub = allowed[np.ix_(rest, np.flatnonzero(cols_free))]
            if _has_perfect_matching(sub):
                perm[i] = j
                break
            cols_free[j] = True
    return perm


def bottleneck_match(a, b, eta=None):
    """Permutation minimizing the largest matched distance.

    Parameters
    ----------
    a, b : array_like
        Label lists of equal length, shape ``(n,)`` or ``(n, g)``.
    eta : float, optional
        Matching radius.  Defaults to 1e-2 times the spectral diameter of
        the union of both lists.

    Returns
    -------
    MatchingPlan
        ``perm[i]`` is the index in ``b`` assigned to ``a[i]``.  Among all
        optimal assignments the lexicographically smallest is returned.
    """
    a, b = _as_points(a), _as_points(b)
    if a.shape != b.shape:
        raise SizeMismatch(f"label lists have shapes {a.shape} and {b.shape}")
    n = a.shape[0]
    if eta is None:
        eta = 1e-2 * spectral_diameter(np.concatenate([a, b]))
    if n == 0:
        return MatchingPlan(np.zeros(0, dtype=int), 0.0, float(eta), True)
    D = label_distances(a, b)
    levels = np.unique(D)
    lo, hi = 0, len(levels) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(D <= levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    perm = _lexmin_matching(D <= levels[lo])
    cost = float(D[np.arange(n), perm].max())
    return MatchingPlan(perm, cost, float(eta), cost <= eta)


def cluster_by_radius(labels, eta):
    """Connected components of the proximity graph ``dist <= eta``.

    Clusters are listed by their smallest member index and each cluster's
    members are ascending.  Centers are member means.
    """
    pts = _as_points(labels)
    n = pts.shape[0]
    if n == 0:
        return ClusterPartition([], np.zeros((0, pts.shape[1]), complex), eta, np.zeros(0, int))
    adj = label_distances(pts, pts) <= eta
    _, comp = connected_components(csr_matrix(adj), directed=False)
    order = []
    for c in comp:
        if c not in order:
            order.append(c)
    relabel = {c: k for k, c in enumerate(order)}
    member_of = np.array([relabel[c] for c in comp])
    clusters = [np.flatnonzero(member_of == k) for k in range(len(order))]
    centers = np.array([pts[c].mean(axis=0) for c in clusters])
    return ClusterPartition(clusters, centers, float(eta), member_of)


def match_decompositions(A, B, eta):
    """Match two joint decompositions, tracking frames inside clusters.

    Labels of both sides are pooled and clustered at radius ``eta``.
    Inside a cluster with equally many members from each side, columns are
    paired by maximal frame overlap ``|<a_i, b_j>|^2``, so a crossing is
    followed by eigenvector continuity rather than by label order.  If any
    cluster is unbalanced the plain bottleneck assignment is used.
    """
    la, lb = A.joint_labels, B.joint_labels
    n = la.shape[0]
    part = cluster_by_radius(np.concatenate([la, lb]), eta)
    perm = np.full(n, -1)
    overlap = np.abs(dagger(A.frame) @ B.frame) ** 2
    for members in part.clusters:
        ia = members[members < n]
        ib = members[members >= n] - n
        if len(ia) != len(ib):
            return bottleneck_match(la, lb, eta)
        if len(ia) == 0:
            continue
        r, c = linear_sum_assignment(-overlap[np.ix_(ia, ib)])
        perm[ia[r]] = ib[c]
    cost = float(label_distances(la, lb)[np.arange(n), perm].max()) if n else 0.0
    return MatchingPlan(perm, cost, float(eta), cost <= eta)


def frame_alignment_unitary(A, B, plan):
    """Unitary ``W`` with ``W* p_i(A) W = p_perm[i](B)`` for every column.

    ``W = sum_i a_i b_perm[i]*``, so ``W* a_i = b_perm[i]`` exactly.
    """
    for d in (A, B):
        norms = np.linalg.norm(d.frame, axis=0)
        if np.any(np.abs(norms - 1.0) > 1e-8):
            raise DegenerateFrame("frame column norm deviates from 1")
    if A.n != B.n:
        raise SizeMismatch("frames of different size")
    return A.frame @ dagger(B.frame[:, plan.perm])


def hausdorff(a, b):
    D = label_distances(a, b)
    if D.size == 0:
        return 0.0
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def spectra_hausdorff(A, B):
    """Hausdorff distance between the spectra of two normal matrices."""
    for m in (A, B):
        if not is_normal(m, 1e-8):
            raise NotNormal("spectra_hausdorff needs normal inputs")
    return hausdorff(normal_decompose(A).labels, normal_decompose(B).labels)


def compose(p, q):
    """Permutation ``i -> q[p[i]]``."""
    return np.asarray(q)[np.asarray(p)]


def permutation_cycles(perm):
    perm = np.asarray(perm)
    seen = np.zeros(len(perm), dtype=bool)
    cycles = []
    for i in range(len(perm)):
        if seen[i]:
            continue
        cyc = []
        j = i
        while not seen[j]:
            seen[j] = True
            cyc.append(int(j))
            j = int(perm[j])
        cycles.append(cyc)
    return cycles


def reduce_within_clusters(perm, member_of):
    """Replace permutation cycles that stay inside one cluster by fixed points."""
    out = np.array(perm, copy=True)
    for cyc in permutation_cycles(perm):
        if len(cyc) > 1 and len({int(member_of[i]) for i in cyc}) == 1:
            out[cyc] = cyc
    return out


def format_perm(perm):
    """Cycle notation with 1-based indices, e.g. ``(1 2)``; ``()`` for identity."""
    cyc = [c for c in permutation_cycles(perm) if len(c) > 1]
    if not cyc:
        return "()"
    return "".join("(" + " ".join(str(i + 1) for i in c) + ")" for c in cyc)


__all__ = [
    "ClusterPartition",
    "MatchingPlan",
    "bottleneck_match",
    "cluster_by_radius",
    "frame_alignment_unitary",
    "match_decompositions",
    "spectra_hausdorff",
]
