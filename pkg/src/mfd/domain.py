"""Simplicial carriers: intervals, cycles, triangulated 2-spheres and 3-spheres."""
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import BadParam, ValidationFailed


@dataclass(frozen=True, eq=False)
class SimplicialDomain:
    """Triangulated carrier.

    Simplices are stored as integer index arrays.  Triangles and tets are
    stored in their positive order, so ``orientation`` is all ones for the
    built-in carriers; it is kept so that externally supplied complexes can
    carry signs.
    """

    kind: str
    coords: np.ndarray
    edges: np.ndarray
    triangles: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), int))
    tets: np.ndarray = field(default_factory=lambda: np.zeros((0, 4), int))
    orientation: np.ndarray = None
    param: int = 0

    def __post_init__(self):
        if self.orientation is None:
            top = self.tets if len(self.tets) else self.triangles
            object.__setattr__(self, "orientation", np.ones(len(top), dtype=int))

    @property
    def n_vertices(self):
        return self.coords.shape[0]

    @property
    def dimension(self):
        if len(self.tets):
            return 3
        if len(self.triangles):
            return 2
        if len(self.edges):
            return 1
        return 0

    def euler_characteristic(self):
        return self.n_vertices - len(self.edges) + len(self.triangles) - len(self.tets)

    def edge_index(self):
        """Map ``frozenset({u, v})`` to the row of ``edges``."""
        return {frozenset(map(int, e)): k for k, e in enumerate(self.edges)}

    def neighbors(self):
        nb = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges:
            nb[u].append(int(v))
            nb[v].append(int(u))
        return [sorted(x) for x in nb]

    def is_acyclic(self):
        return len(self.edges) == self.n_vertices - n_components(self)

    def is_cycle(self):
        return (
            self.dimension == 1
            and len(self.edges) == self.n_vertices
            and all(len(x) == 2 for x in self.neighbors())
            and n_components(self) == 1
        )

    def validate(self):
        """Check face closure and orientation consistency; raise on failure."""
        eidx = self.edge_index()
        for t in self.triangles:
            for a, b in combinations(t, 2):
                if frozenset((int(a), int(b))) not in eidx:
                    raise ValidationFailed(f"triangle {tuple(t)} has a missing edge")
        if len(self.tets):
            faces = {frozenset(map(int, t)) for t in self.triangles}
            for t in self.tets:
                for f in combinations(t, 3):
                    if frozenset(map(int, f)) not in faces:
                        raise ValidationFailed(f"tet {tuple(t)} has a missing face")
        top = self.tets if len(self.tets) else self.triangles
        if len(top) and not orientation_consistent(top, self.orientation):
            raise ValidationFailed("inconsistent orientation on a closed manifold")
        return self


def n_components(dom):
    parent = list(range(dom.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in dom.edges:
        parent[find(int(u))] = find(int(v))
    return len({find(i) for i in range(dom.n_vertices)})


def _oriented_faces(simplex, sign):
    """Codimension-one faces with induced orientation, as (sorted tuple, sign)."""
    out = []
    k = len(simplex)
    for i in range(k):
        face = [int(x) for j, x in enumerate(simplex) if j != i]
        s = sign * (-1) ** i
        order = np.argsort(face)
        s *= permutation_sign(order)
        out.append((tuple(sorted(face)), s))
    return out


def permutation_sign(order):
    order = list(order)
    sign = 1
    seen = [False] * len(order)
    for i in range(len(order)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def orientation_consistent(top, orientation):
    """On a closed pseudomanifold every face is shared with opposite signs."""
    acc = {}
    for s, o in zip(top, orientation):
        for f, sg in _oriented_faces(s, int(o)):
            acc.setdefault(f, []).append(sg)
    return all(len(v) == 1 or (len(v) == 2 and sum(v) == 0) for v in acc.values())


def bfs_tree(dom, root=None):
    """Breadth-first spanning forest; returns (parent, order, tree_edge_ids).

    Neighbours are visited in ascending id, roots are the lowest unvisited
    vertex ids, so the tree is deterministic.
    """
    nb = dom.neighbors()
    eidx = dom.edge_index()
    n = dom.n_vertices
    parent = np.full(n, -1)
    seen = np.zeros(n, dtype=bool)
    order, tree = [], set()
    roots = range(n) if root is None else [root] + [v for v in range(n) if v != root]
    for r in roots:
        if seen[r]:
            continue
        seen[r] = True
        q = deque([r])
        while q:
            u = q.popleft()
            order.append(u)
            for v in nb[u]:
                if not seen[v]:
                    seen[v] = True
                    parent[v] = u
                    tree.add(eidx[frozenset((u, v))])
                    q.append(v)
    return parent, order, tree


def _edges_from(simplices):
    es = set()
    for s in simplices:
        for a, b in combinations(sorted(map(int, s)), 2):
            es.add((a, b))
    return np.array(sorted(es), dtype=int).reshape(-1, 2)


def _faces_from(tets):
    fs = set()
    for t in tets:
        for f in combinations(sorted(map(int, t)), 3):
            fs.add(f)
    return np.array(sorted(fs), dtype=int).reshape(-1, 3)


def _orient(simplices, coords):
    """Order each simplex so that det[v0, v1, ...] > 0 (outward on spheres)."""
    out = np.array(simplices, dtype=int)
    for k, s in enumerate(out):
        if np.linalg.det(coords[s]) < 0:
            out[k, [0, 1]] = out[k, [1, 0]]
    return out


class _Midpoints:
    def __init__(self, coords):
        self.coords = [np.asarray(c, float) for c in coords]
        self.cache = {}

    def __call__(self, a, b):
        key = (min(a, b), max(a, b))
        if key not in self.cache:
            self.cache[key] = len(self.coords)
            self.coords.append((self.coords[a] + self.coords[b]) / 2.0)
        return self.cache[key]


def _subdivide_triangles(coords, tris):
    mid = _Midpoints(coords)
    out = []
    for a, b, c in tris:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    return np.array(mid.coords), np.array(out, dtype=int)


def _subdivide_tets(coords, tets):
    """Red refinement: 4 corner tets plus the inner octahedron cut in 4."""
    mid = _Midpoints(coords)
    out = []
    for t in tets:
        a, b, c, d = (int(x) for x in t)
        ab, ac, ad = mid(a, b), mid(a, c), mid(a, d)
        bc, bd, cd = mid(b, c), mid(b, d), mid(c, d)
        out += [(a, ab, ac, ad), (ab, b, bc, bd), (ac, bc, c, cd), (ad, bd, cd, d)]
        # inner octahedron along the ac-bd diagonal
        out += [(ab, ac, ad, bd), (ab, ac, bc, bd), (ac, ad, bd, cd), (ac, bc, bd, cd)]
    return np.array(mid.coords), np.array(out, dtype=int)


def _normalize_rows(x):
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def interval(m):
    if m < 1:
        raise BadParam("interval needs m >= 1")
    coords = (np.arange(m + 1) / m)[:, None]
    edges = np.stack([np.arange(m), np.arange(1, m + 1)], axis=1)
    return SimplicialDomain("interval", coords, edges, param=m)


def cycle(m):
    if m < 3:
        raise BadParam("cycle needs m >= 3")
    th = 2 * np.pi * np.arange(m) / m
    edges = np.stack([np.arange(m), (np.arange(m) + 1) % m], axis=1)
    return SimplicialDomain("cycle", th[:, None], edges, param=m)


def sphere2(k):
    if k < 0:
        raise BadParam("sphere2 needs k >= 0")
    coords = np.vstack([np.eye(3), -np.eye(3)])
    tris = [(a, b, c) for a in (0, 3) for b in (1, 4) for c in (2, 5)]
    tris = np.array(tris)
    for _ in range(k):
        coords, tris = _subdivide_triangles(coords, tris)
        coords = _normalize_rows(coords)
    tris = _orient(tris, coords)
    return SimplicialDomain("sphere2", coords, _edges_from(tris), tris, param=k)


def s3(k):
    if k < 0:
        raise BadParam("s3 needs k >= 0")
    coords = np.vstack([np.eye(4), -np.eye(4)])
    tets = [(a, b, c, d) for a in (0, 4) for b in (1, 5) for c in (2, 6) for d in (3, 7)]
    tets = np.array(tets)
    for _ in range(k):
        coords, tets = _subdivide_tets(coords, tets)
        coords = _normalize_rows(coords)
    tets = _orient(tets, coords)
    return SimplicialDomain(
        "s3", coords, _edges_from(tets), _faces_from(tets), tets, param=k
    )


_BUILDERS = {"interval": interval, "cycle": cycle, "sphere2": sphere2, "s3": s3}


def build_domain(kind, size=None):
    """Build a standard carrier.

    ``kind`` is one of ``interval``, ``cycle`` (size = number of edges) or
    ``sphere2``, ``s3`` (size = subdivision level).  A string such as
    ``"interval(4)"`` is accepted as well.
    """
    if size is None and isinstance(kind, str) and "(" in kind:
        kind, rest = kind.split("(", 1)
        size = int(rest.rstrip(")"))
    if kind not in _BUILDERS:
        raise BadParam(f"unknown domain kind {kind!r}")
    if size is None:
        raise BadParam("domain size missing")
    return _BUILDERS[kind](int(size))


def vertex_link(dom, v):
    """Oriented 2-sphere surrounding vertex ``v`` of a 3-complex.

    Returns triangles (faces opposite ``v`` in its tets) ordered so that
    their orientation is the one induced as the boundary of the star.
    """
    out = []
    for t, o in zip(dom.tets, dom.orientation):
        t = [int(x) for x in t]
        if v not in t:
            continue
        i = t.index(v)
        face = [x for x in t if x != v]
        if (o * (-1) ** i) < 0:
            face[0], face[1] = face[1], face[0]
        out.append(face)
    return np.array(out, dtype=int).reshape(-1, 3)
