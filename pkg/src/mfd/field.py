"""Generator fields, diagonal frame fields, test functions and residuals."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dense import SpectralDecomp, dagger, opnorm
from .domain import SimplicialDomain
from .errors import FrameMismatch, ShapeMismatch, ValidationFailed

KINDS = ("hermitian", "unitary", "normal")


@dataclass(eq=False)
class Generator:
    name: str
    kind: str
    samples: np.ndarray  # (V, n, n)
    lipschitz_hint: Optional[float] = None


@dataclass(eq=False)
class GeneratorField:
    """Per-vertex samples of a commuting family of normal matrices."""

    domain: SimplicialDomain
    generators: list
    tol_commute: float = 1e-8
    tol_normal: float = 1e-8

    @property
    def n(self):
        return self.generators[0].samples.shape[-1]

    @property
    def g(self):
        return len(self.generators)

    @property
    def names(self):
        return tuple(gen.name for gen in self.generators)

    def stack(self):
        """Samples as one array of shape (V, g, n, n)."""
        return np.stack([gen.samples for gen in self.generators], axis=1)

    def validate(self):
        if not self.generators:
            raise ValidationFailed("field has no generators")
        nv = self.domain.n_vertices
        for gen in self.generators:
            s = gen.samples
            if s.ndim != 3 or s.shape[0] != nv or s.shape[1:] != (self.n, self.n):
                raise ValidationFailed(f"generator {gen.name!r} has shape {s.shape}")
            if not np.all(np.isfinite(s)):
                raise ValidationFailed(f"generator {gen.name!r} has non-finite entries")
            if gen.kind not in KINDS:
                raise ValidationFailed(f"unknown generator kind {gen.kind!r}")
        X = self.stack()
        scale = (1.0 + opnorm(X).max(axis=1)) ** 2
        eye = np.eye(self.n)
        for j, gen in enumerate(self.generators):
            A = X[:, j]
            if gen.kind == "hermitian":
                bad = opnorm(A - dagger(A)) > self.tol_normal * np.sqrt(scale)
                what = "Hermitian"
            elif gen.kind == "unitary":
                bad = opnorm(dagger(A) @ A - eye) > self.tol_normal
                what = "unitary"
            else:
                bad = opnorm(A @ dagger(A) - dagger(A) @ A) > self.tol_normal * scale
                what = "normal"
            if np.any(bad):
                v = int(np.flatnonzero(bad)[0])
                raise ValidationFailed(f"generator {gen.name!r} is not {what} at vertex {v}")
            for k in range(j):
                B = X[:, k]
                bad = opnorm(A @ B - B @ A) > self.tol_commute * scale
                if np.any(bad):
                    v = int(np.flatnonzero(bad)[0])
                    raise ValidationFailed(
                        f"generators {self.generators[k].name!r} and {gen.name!r} "
                        f"do not commute at vertex {v}"
                    )
        return self

    def max_commutator(self):
        X = self.stack()
        out = 0.0
        for j in range(self.g):
            for k in range(j):
                c = X[:, j] @ X[:, k] - X[:, k] @ X[:, j]
                out = max(out, float(opnorm(c).max()))
        return out


# ----------------------------------------------------------------------------
# test functions


@dataclass(frozen=True)
class Monomial:
    """``z_j^a * conj(z_j)^b``; ``a = b = 0`` is the constant 1."""

    gen: int
    a: int
    b: int

    @property
    def degree(self):
        return self.a + self.b

    def name(self, names=None):
        if self.degree == 0:
            return "1"
        z = names[self.gen] if names else f"z{self.gen}"
        parts = []
        if self.a:
            parts.append(z if self.a == 1 else f"{z}^{self.a}")
        if self.b:
            parts.append(f"conj({z})" if self.b == 1 else f"conj({z})^{self.b}")
        return "*".join(parts)

    def scalar(self, labels):
        """Evaluate on joint labels of shape (..., g)."""
        z = labels[..., self.gen]
        return z ** self.a * np.conj(z) ** self.b

    def matrix(self, X):
        """Evaluate on generator samples of shape (..., g, n, n)."""
        A = X[..., self.gen, :, :]
        n = A.shape[-1]
        out = np.broadcast_to(np.eye(n, dtype=complex), A.shape).copy()
        for _ in range(self.a):
            out = out @ A
        Ah = dagger(A)
        for _ in range(self.b):
            out = out @ Ah
        return out

    def lipschitz(self, radius):
        """Lipschitz constant on the ball of the given radius."""
        d = self.degree
        return 0.0 if d == 0 else d * max(radius, 1e-300) ** (d - 1)


@dataclass(frozen=True)
class FunctionDictionary:
    """All monomials of degree 1..D per generator, plus the constant."""

    degree: int = 2
    n_generators: int = 1

    @property
    def members(self):
        out = [Monomial(0, 0, 0)]
        for j in range(self.n_generators):
            for d in range(1, self.degree + 1):
                for a in range(d, -1, -1):
                    out.append(Monomial(j, a, d - a))
        return out

    def __len__(self):
        return len(self.members)

    def lipschitz(self, radius):
        return max(m.lipschitz(radius) for m in self.members)


def _joint(decomp):
    """Accept a joint SpectralDecomp or a tuple of them sharing one frame."""
    if isinstance(decomp, SpectralDecomp):
        return decomp.joint_labels, decomp.frame
    decomp = list(decomp)
    frame = decomp[0].frame
    for d in decomp[1:]:
        if d.frame.shape != frame.shape or not np.array_equal(d.frame, frame):
            raise FrameMismatch("decompositions do not share one frame")
    labels = np.stack([np.asarray(d.labels) for d in decomp], axis=1)
    return labels, frame


def diagonal_model(frames, labels, f):
    """``F diag(f(labels)) F*`` batched over leading axes."""
    vals = f.scalar(labels)
    return (frames * vals[..., None, :]) @ dagger(frames)


def evaluate_hom(decomp, f):
    """Functional calculus of a joint decomposition on one dictionary member."""
    labels, frame = _joint(decomp)
    return diagonal_model(frame, labels, f)


# ----------------------------------------------------------------------------
# frame fields


@dataclass(eq=False)
class EdgeTransport:
    """Discretized transport of a decomposition along one edge.

    ``frames[k] = exp(i s_k h) frames[0] diag(exp(i s_k phases))``; the two
    ends are the vertex frames themselves, copied exactly.
    """

    edge: tuple
    plan: object
    h: np.ndarray
    s: np.ndarray
    labels: np.ndarray  # (m+1, n, g)
    frames: np.ndarray  # (m+1, n, n)
    commutator_profile: np.ndarray
    phases: np.ndarray = None

    @property
    def steps(self):
        return len(self.s) - 1

    def reversed(self):
        return EdgeTransport(
            (self.edge[1], self.edge[0]), self.plan, -self.h, 1.0 - self.s[::-1],
            self.labels[::-1], self.frames[::-1], self.commutator_profile[::-1],
            None if self.phases is None else -self.phases,
        )


@dataclass(eq=False)
class TriangleFill:
    """Frames and labels on a barycentric grid of one triangle."""

    triangle: tuple
    m: int
    bary: np.ndarray  # (P, 3)
    labels: np.ndarray
    frames: np.ndarray
    boundary: np.ndarray  # (P,) loop position or -1 for interior points


@dataclass(eq=False)
class DiagonalFrameField:
    domain: SimplicialDomain
    labels: np.ndarray  # (V, n, g)
    frames: np.ndarray  # (V, n, n)
    transports: dict = field(default_factory=dict)
    fills: dict = field(default_factory=dict)
    names: tuple = ()
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.frames.shape[-1]

    def decomposition(self, v):
        return SpectralDecomp(self.labels[v], self.frames[v])

    def projections(self, v=None):
        F = self.frames if v is None else self.frames[v]
        return np.einsum("...ai,...bi->...iab", F, np.conj(F))

    def projection_defect(self):
        """max over vertices of ||sum p_i - I|| and ||p_i p_j - delta_ij p_i||."""
        F = self.frames
        eye = np.eye(self.n)
        gram = dagger(F) @ F
        return float(opnorm(gram - eye).max()) if len(F) else 0.0

    def label_windings(self, j=0):
        """Winding of each label path around 0 along the transports of a cycle."""
        total = np.zeros(self.n)
        for t in self.transports.values():
            z = t.labels[:, :, j]
            total += np.angle(z[1:] / z[:-1]).sum(axis=0)
        return np.rint(total / (2 * np.pi)).astype(int)


# ----------------------------------------------------------------------------
# residuals


@dataclass(eq=False)
class ResidualReport:
    member_names: list
    vertex: np.ndarray  # (V, M)
    edge_max: np.ndarray  # (E,)
    fill_max: np.ndarray  # (T,)
    max: float
    mean: float
    continuity: dict
    eps: float

    @property
    def verdict(self):
        return bool(self.max <= self.eps)

    def summary(self):
        return {
            "max": self.max,
            "mean": self.mean,
            "vertex_max": float(self.vertex.max()) if self.vertex.size else 0.0,
            "edge_max": float(self.edge_max.max()) if self.edge_max.size else 0.0,
            "fill_max": float(self.fill_max.max()) if self.fill_max.size else 0.0,
            "eps": self.eps,
            "verdict": self.verdict,
            **self.continuity,
        }


def _residuals(ref_stack, frames, labels, members):
    """(P, M) operator-norm residuals for sample points."""
    out = np.empty((frames.shape[0], len(members)))
    for k, f in enumerate(members):
        d = f.matrix(ref_stack) - diagonal_model(frames, labels, f)
        out[:, k] = opnorm(d)
    return out


def residual_report(fld, frames, dictionary=None, eps=np.inf):
    """Operator-norm residuals of a frame field against a generator field.

    Vertices are compared with the samples themselves.  Along an edge the
    reference is the linear interpolation of the two endpoint samples, and
    inside a triangle fill it is the barycentric interpolation of the corner
    samples, so the report measures the piecewise-linear field that the
    samples define.
    """
    if dictionary is None:
        dictionary = FunctionDictionary(2, fld.g)
    if (
        frames.frames.shape[0] != fld.domain.n_vertices
        or frames.n != fld.n
        or frames.labels.shape[-1] != fld.g
    ):
        raise ShapeMismatch("frame field does not fit the generator field")
    members = dictionary.members
    X = fld.stack()
    vert = _residuals(X, frames.frames, frames.labels, members)
    edge_max = np.zeros(len(frames.transports))
    df_max = dl_max = 0.0
    for k, (e, t) in enumerate(sorted(frames.transports.items())):
        u, v = t.edge
        s = t.s[:, None, None, None]
        ref = (1.0 - s) * X[u][None] + s * X[v][None]
        edge_max[k] = _residuals(ref, t.frames, t.labels, members).max()
        if t.steps:
            df_max = max(df_max, float(opnorm(np.diff(t.frames, axis=0)).max()))
            dl_max = max(dl_max, float(np.abs(np.diff(t.labels, axis=0)).max()))
    fill_max = np.zeros(len(frames.fills))
    for k, (tid, fl) in enumerate(sorted(frames.fills.items())):
        corners = X[list(fl.triangle)]
        ref = np.einsum("pc,cgab->pgab", fl.bary, corners)
        fill_max[k] = _residuals(ref, fl.frames, fl.labels, members).max()
    allmax = max(
        float(vert.max()) if vert.size else 0.0,
        float(edge_max.max()) if edge_max.size else 0.0,
        float(fill_max.max()) if fill_max.size else 0.0,
    )
    mean = float(vert.mean()) if vert.size else 0.0
    return ResidualReport(
        [m.name(fld.names) for m in members], vert, edge_max, fill_max,
        allmax, mean, {"frame_step_max": df_max, "label_step_max": dl_max}, float(eps),
    )
