"""Topological certificates and the standard non-diagonalizable examples.

Certificates are integers computed from sums of principal phases, so they
are exact as long as every rounding step has margin.  Each routine refuses
(``MeshTooCoarse`` / ``OverlapCollapse``) rather than round an ambiguous
value.
"""
from dataclasses import dataclass, field

import numpy as np

from .dense import dagger, hermitian_eig_batch
from .domain import vertex_link
from .errors import (
    DomainMismatch,
    MeshTooCoarse,
    NotSpecialUnitary,
    OverlapCollapse,
)
from .field import Generator, GeneratorField
from .matching import format_perm

ROUND_MARGIN = 0.1
TENSION_NOTE = (
    "a literal reading of the approximate diagonalization theorem for "
    "carriers of dimension <= 2 predicts success here"
)


@dataclass
class ObstructionReport:
    kind: str  # monodromy | det_winding | chern | degree3
    value: object
    carrier: str
    verdict: str
    tension_flag: bool = False
    details: dict = field(default_factory=dict)

    @property
    def nonzero(self):
        if self.kind == "monodromy":
            return list(self.value) != list(range(len(self.value)))
        return int(self.value) != 0


def _round_integer(x, what):
    k = int(np.rint(x))
    if abs(x - k) > ROUND_MARGIN:
        raise MeshTooCoarse(f"{what} is not close to an integer ({x:.3f}); refine the mesh")
    return k


# ----------------------------------------------------------------------------
# winding


def cycle_order(domain):
    """Vertex sequence once around a cycle domain, starting at vertex 0."""
    if not domain.is_cycle():
        raise DomainMismatch("expected a single cycle")
    nb = domain.neighbors()
    walk, prev = [0], -1
    while len(walk) < domain.n_vertices:
        cur = walk[-1]
        nxt = min(nb[cur]) if prev < 0 else [x for x in nb[cur] if x != prev][0]
        prev = cur
        walk.append(nxt)
    return walk


def _unitary_samples(u):
    if isinstance(u, GeneratorField):
        gens = [g for g in u.generators if g.kind == "unitary"] or u.generators
        return gens[0].samples, u.domain
    return np.asarray(u, dtype=complex), None


def det_winding(u, domain=None):
    """Winding number of ``det u`` around a cycle.

    ``u`` is either a field (its first unitary generator is used) or an
    array of samples ordered around the loop.
    """
    samples, dom = _unitary_samples(u)
    dom = dom or domain
    if dom is not None:
        samples = samples[cycle_order(dom)]
    d = np.linalg.det(samples)
    inc = np.angle(np.roll(d, -1) / d)
    if np.any(np.abs(inc) > np.pi - ROUND_MARGIN):
        raise MeshTooCoarse("det phase jumps by almost pi on one edge")
    return _round_integer(inc.sum() / (2 * np.pi), "det winding")


# ----------------------------------------------------------------------------
# Chern numbers


def _range_frames(p, rank=None):
    """Orthonormal range frames (V, n, r) of projections or of given frames."""
    p = np.asarray(p, dtype=complex)
    if p.ndim == 2:
        p = p[:, :, None]
    if p.shape[-1] != p.shape[-2] or rank is not None and p.shape[-1] == rank:
        return p
    lam, V = hermitian_eig_batch((p + dagger(p)) / 2.0)
    r = int(np.rint(np.trace(p[0]).real)) if rank is None else rank
    return V[:, :, -r:]


def chern_number(p, triangles, rank=None):
    """First Chern number of a projection field over an oriented surface.

    Parameters
    ----------
    p : array_like
        Either projections ``(V, n, n)`` or range frames ``(V, n, r)``
        (a single vector per vertex as ``(V, n)`` is accepted).
    triangles : (T, 3) int array
        Positively oriented triangles of a closed surface.

    Uses the link-product construction: the phase of
    ``det<a|b> det<b|c> det<c|a>`` summed over triangles is ``2 pi c1``.
    With this sign the lower band of ``k.sigma`` on the outward-oriented
    sphere has ``c1 = -1``.
    """
    F = _range_frames(p, rank)
    tri = np.asarray(triangles, dtype=int)
    a, b, c = F[tri[:, 0]], F[tri[:, 1]], F[tri[:, 2]]
    links = [np.linalg.det(dagger(x) @ y) for x, y in ((a, b), (b, c), (c, a))]
    if min(float(np.abs(l).min()) for l in links) < 0.1:
        raise OverlapCollapse("adjacent frames are nearly orthogonal; refine the mesh")
    flux = np.angle(links[0] * links[1] * links[2]).sum()
    return _round_integer(flux / (2 * np.pi), "Chern number")


def band_chern_numbers(samples, triangles):
    """Chern numbers of every eigenline of a Hermitian field on a surface."""
    lam, V = hermitian_eig_batch(samples)
    return [chern_number(V[:, :, [i]], triangles) for i in range(V.shape[-1])]


def hermitian_link_certificates(samples, domain, coords=None):
    """Chern numbers of lower spectral projections on vertex links.

    For every split between consecutive eigenvalues, vertices where the gap
    is a local minimum over their neighbours are examined; the projection
    onto the eigenvectors below the split is restricted to the link
    2-sphere of the vertex.  A nonzero value certifies that the split cannot
    be continued across the vertex, so no continuous rank-one frame exists.
    """
    lam, V = hermitian_eig_batch(samples)
    nb = domain.neighbors()
    out = []
    n = lam.shape[1]
    for k in range(n - 1):
        gap = lam[:, k + 1] - lam[:, k]
        for v in range(domain.n_vertices):
            if not nb[v] or gap[v] > min(gap[w] for w in nb[v]):
                continue
            link = vertex_link(domain, v)
            if not len(link):
                continue
            try:
                c = chern_number(V[:, :, : k + 1], link)
            except (OverlapCollapse, MeshTooCoarse):
                continue
            if c != 0:
                where = "" if coords is None else " at " + np.array2string(
                    np.round(coords[v], 6), separator=", "
                )
                out.append(
                    ObstructionReport(
                        "chern",
                        int(c),
                        f"link sphere of vertex {v}{where}",
                        f"lower {k + 1}-band projection has Chern number {c} on the "
                        f"link of vertex {v}: the eigenline bundle does not extend",
                        details={"vertex": int(v), "split": int(k), "gap": float(gap[v])},
                    )
                )
    return out


# ----------------------------------------------------------------------------
# degree on S^3


def su2_points(samples, tol=1e-8):
    """Map SU(2) matrices ``[[z, -conj w], [w, conj z]]`` to points of R^4."""
    samples = np.asarray(samples, dtype=complex)
    det = np.linalg.det(samples)
    if samples.shape[-1] != 2 or np.any(np.abs(det - 1.0) > tol):
        raise NotSpecialUnitary("degree3 needs SU(2)-valued samples")
    z, w = samples[:, 0, 0], samples[:, 1, 0]
    return np.stack([z.real, z.imag, w.real, w.imag], axis=1)


_FALLBACK_DIRECTION = np.array([0.3141592653, -0.2718281828, 0.5772156649, -0.7071067812])


def degree3(u, domain=None, regular_value=None):
    """Degree of an SU(2)-valued field on a triangulated 3-sphere.

    Each tet is mapped linearly into R^4 and counted when the ray through
    the regular value meets the cone over its image, with the sign of the
    image orientation times the tet orientation.
    """
    samples, dom = _unitary_samples(u)
    dom = dom or domain
    if dom is None or not len(dom.tets):
        raise DomainMismatch("degree3 needs a 3-dimensional carrier")
    P = su2_points(samples)
    img = P[dom.tets]  # (K, 4, 4)
    diam = np.max(np.linalg.norm(img[:, :, None] - img[:, None, :], axis=-1), axis=(1, 2))
    if np.any(diam >= 1.0):
        raise MeshTooCoarse("a tet's image has diameter >= 1; refine the mesh")
    if regular_value is None:
        cen = P.mean(axis=0)
        if np.linalg.norm(cen) > 1e-6:
            q = -cen / np.linalg.norm(cen)
        else:
            q = _FALLBACK_DIRECTION / np.linalg.norm(_FALLBACK_DIRECTION)
    else:
        q = np.asarray(regular_value, float)
        q = q / np.linalg.norm(q)
    M = np.swapaxes(img, 1, 2)  # columns are image vertices
    det = np.linalg.det(M)
    ok = np.abs(det) > 1e-14
    total = 0
    if np.any(ok):
        lam = np.linalg.solve(M[ok], np.broadcast_to(q, (int(ok.sum()), 4))[..., None])[..., 0]
        hit = np.all(lam > 0, axis=1)
        if np.any(np.abs(lam[hit]) < 1e-12):
            raise MeshTooCoarse("regular value lies on a face of the image")
        signs = np.sign(det[ok]) * dom.orientation[ok]
        total = int(np.sum(signs[hit]))
    return total


# ----------------------------------------------------------------------------
# example fields


def s3_points(domain):
    """Points (z, w) of the unit 3-sphere attached to each vertex."""
    c = domain.coords
    if domain.kind == "s3":
        x = c
    elif domain.kind == "sphere2":
        x = np.concatenate([c, np.zeros((len(c), 1))], axis=1)
    elif domain.kind == "cycle":
        x = np.concatenate([np.cos(c), np.sin(c), np.zeros((len(c), 2))], axis=1)
    else:
        raise DomainMismatch(f"no 3-sphere coordinates on a {domain.kind} carrier")
    x = x / np.linalg.norm(x, axis=1, keepdims=True)
    return x[:, 0] + 1j * x[:, 1], x[:, 2] + 1j * x[:, 3]


def su2_matrix(z, w):
    z, w = np.asarray(z), np.asarray(w)
    out = np.empty(z.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = z
    out[..., 0, 1] = -np.conj(w)
    out[..., 1, 0] = w
    out[..., 1, 1] = np.conj(z)
    return out


def count1_b_matrix(z, w):
    """Hermitian ``b`` whose spectrum ``{+-r}`` closes only at ``(+-1, 0)``."""
    z, w = np.asarray(z), np.asarray(w)
    out = np.empty(z.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = z.imag
    out[..., 0, 1] = 1j * np.conj(w)
    out[..., 1, 0] = -1j * w
    out[..., 1, 1] = -z.imag
    return out


def gen_example(kind, domain, reflect=False):
    """Closed-form example fields.

    ``s3_unitary``
        ``u(z, w) = [[z, -conj w], [w, conj z]]`` (``reflect`` replaces
        ``w`` by ``conj w``, which reverses orientation).
    ``braid``
        ``u(t) = [[0, e^{it}], [1, 0]]`` on a cycle; eigenvalues
        ``+-e^{it/2}`` swap once around the loop.
    ``count1_b``
        Hermitian ``b`` together with the unitary ``u = Re(z) + i b``,
        so ``u + u* = (z + conj z) I``.
    ``tcount(n)``
        ``(b + 1)/4`` on the first two coordinates and ``1`` on the rest
        (``b`` itself when ``n = 2``).
    """
    name, size = kind, None
    if "(" in kind:
        name, rest = kind.split("(", 1)
        size = int(rest.rstrip(")"))
    name = name.replace("-", "_")
    if name == "braid":
        if domain.kind != "cycle":
            raise DomainMismatch("braid lives on a cycle")
        th = domain.coords[:, 0]
        u = np.zeros((len(th), 2, 2), dtype=complex)
        u[:, 0, 1] = np.exp(1j * th)
        u[:, 1, 0] = 1.0
        gens = [Generator("u", "unitary", u)]
    elif name == "s3_unitary":
        if domain.kind != "s3":
            raise DomainMismatch("s3_unitary lives on s3")
        z, w = s3_points(domain)
        gens = [Generator("u", "unitary", su2_matrix(z, np.conj(w) if reflect else w))]
    elif name == "count1_b":
        if domain.kind != "s3":
            raise DomainMismatch("count1_b lives on s3")
        z, w = s3_points(domain)
        b = count1_b_matrix(z, w)
        u = z.real[:, None, None] * np.eye(2) + 1j * b
        gens = [Generator("b", "hermitian", b), Generator("u", "unitary", u)]
    elif name == "tcount":
        n = 2 if size is None else size
        if n < 2:
            raise DomainMismatch("tcount needs n >= 2")
        z, w = s3_points(domain)
        b = count1_b_matrix(z, w)
        if n == 2:
            x = b
        else:
            x = np.zeros((len(z), n, n), dtype=complex)
            x[:, :2, :2] = (b + np.eye(2)) / 4.0
            x[:, 2:, 2:] = np.eye(n - 2)
        gens = [Generator("b", "hermitian", x)]
    else:
        raise DomainMismatch(f"unknown example kind {kind!r}")
    return GeneratorField(domain, gens).validate()


# ----------------------------------------------------------------------------
# reports and analysis


def monodromy_report(fld, mono):
    details = {"raw_perm": [int(x) for x in mono.raw_perm], "windings": [int(x) for x in mono.windings]}
    try:
        details["det_winding"] = det_winding(fld)
    except (MeshTooCoarse, DomainMismatch):
        pass
    return ObstructionReport(
        "monodromy",
        [int(x) for x in mono.perm],
        f"{fld.domain.kind}({fld.domain.param})",
        f"nontrivial monodromy {format_perm(mono.perm)}: the eigenvalue labels "
        f"cannot be followed continuously once around the cycle; {TENSION_NOTE}",
        tension_flag=True,
        details=details,
    )


def certify(fld, eta=None):
    """Every certificate that applies to a field.

    Returns ``(reports, obstructed)``.  Monodromy, link Chern numbers on
    3-dimensional carriers and the 3-sphere degree block diagonalization;
    det windings and Chern numbers of bands over a closed surface are
    informative only.
    """
    from .diag1d import cycle_monodromy

    dom = fld.domain
    reports = []
    blocking = False
    if dom.dimension == 1 and dom.is_cycle():
        mono = cycle_monodromy(fld, eta)
        if not mono.trivial:
            reports.append(monodromy_report(fld, mono))
            blocking = True
        for gen in fld.generators:
            if gen.kind == "unitary":
                try:
                    w = det_winding(gen.samples, dom)
                except MeshTooCoarse:
                    continue
                reports.append(
                    ObstructionReport(
                        "det_winding", w, f"cycle({dom.param})",
                        f"det({gen.name}) winds {w} time(s) around the cycle",
                    )
                )
    elif dom.dimension == 2:
        for gen in fld.generators:
            if gen.kind != "hermitian":
                continue
            try:
                cs = band_chern_numbers(gen.samples, dom.triangles)
            except (OverlapCollapse, MeshTooCoarse):
                continue
            for i, c in enumerate(cs):
                reports.append(
                    ObstructionReport(
                        "chern", int(c), f"{dom.kind}({dom.param})",
                        f"eigenline {i + 1} of {gen.name} has Chern number {c} "
                        "(a nontrivial line bundle does not block approximate "
                        "diagonalization on a surface)",
                        details={"band": i},
                    )
                )
    elif dom.dimension == 3:
        for gen in fld.generators:
            if gen.kind == "hermitian":
                for rep in hermitian_link_certificates(gen.samples, dom, dom.coords):
                    rep.verdict = f"{gen.name}: {rep.verdict}"
                    reports.append(rep)
                    blocking = True
            elif gen.kind == "unitary" and gen.samples.shape[-1] == 2:
                try:
                    d = degree3(gen.samples, dom)
                except (NotSpecialUnitary, MeshTooCoarse):
                    continue
                reports.append(
                    ObstructionReport(
                        "degree3", d, f"{dom.kind}({dom.param})",
                        f"{gen.name} has degree {d} as a map S^3 -> SU(2)"
                        + (": it is not connected to the identity" if d else ""),
                    )
                )
                blocking = blocking or d != 0
    return reports, blocking
