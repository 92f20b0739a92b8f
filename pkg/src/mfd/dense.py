"""Dense complex-matrix kernels.

Everything here is built on one batched cyclic Jacobi kernel that jointly
diagonalizes a family of Hermitian matrices with complex Givens rotations
(Cardoso-Souloumiac angles).  A single Hermitian matrix is the family of
size one; a normal matrix is handled through its commuting Hermitian pair
``H = (A + A*)/2``, ``K = (A - A*)/2i``.

All public functions accept single ``(n, n)`` matrices.  The ``*_batch``
variants take stacks ``(B, n, n)`` and are what the field-level code uses.
"""
from dataclasses import dataclass

import numpy as np

from .errors import (
    NoConvergence,
    NotHermitian,
    NotNormal,
    NotUnitary,
    Singular,
    SpectrumStraddle,
)

TWO_PI = 2.0 * np.pi


def dagger(x):
    return np.conj(np.swapaxes(x, -1, -2))


def opnorm(x):
    """Operator (spectral) norm over the last two axes."""
    x = np.asarray(x)
    if x.shape[-1] == 0:
        return np.zeros(x.shape[:-2])
    return np.linalg.norm(x, 2, axis=(-2, -1))


def _scale(a):
    return np.maximum(1.0, opnorm(a))


def is_hermitian(a, tol=1e-10):
    a = np.asarray(a)
    return bool(np.all(opnorm(a - dagger(a)) <= tol * _scale(a)))


def is_unitary(a, tol=1e-10):
    a = np.asarray(a)
    eye = np.eye(a.shape[-1])
    return bool(np.all(opnorm(dagger(a) @ a - eye) <= tol))


def is_normal(a, tol=1e-10):
    a = np.asarray(a)
    c = a @ dagger(a) - dagger(a) @ a
    return bool(np.all(opnorm(c) <= tol * _scale(a) ** 2))


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigen-labels plus a unitary frame whose column ``i`` spans ``p_i``.

    ``labels`` has shape ``(n,)`` for a single matrix, or ``(n, g)`` for a
    joint decomposition of ``g`` commuting generators sharing one frame.
    """

    labels: np.ndarray
    frame: np.ndarray

    @property
    def n(self):
        return self.frame.shape[0]

    @property
    def joint_labels(self):
        lab = np.asarray(self.labels)
        return lab[:, None] if lab.ndim == 1 else lab

    @property
    def n_generators(self):
        return self.joint_labels.shape[1]

    def component(self, j):
        return SpectralDecomp(self.joint_labels[:, j].copy(), self.frame)

    def projections(self):
        v = self.frame
        return np.einsum("ai,bi->iab", v, np.conj(v))

    def matrix(self, j=0):
        lab = self.joint_labels[:, j]
        return (self.frame * lab) @ dagger(self.frame)

    def reorder(self, perm):
        perm = np.asarray(perm)
        return SpectralDecomp(np.asarray(self.labels)[perm], self.frame[:, perm])


# ----------------------------------------------------------------------------
# Jacobi kernel


def _offdiag_mass(mats):
    """sqrt of the summed squared off-diagonal moduli; mats is (B, m, n, n)."""
    n = mats.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.sum(np.abs(mats[..., mask]) ** 2, axis=(-2, -1)))


def _principal_direction(G):
    """Unit top eigenvector of each PSD 3x3 block, by repeated squaring."""
    M = G.copy()
    for _ in range(9):
        tr = M[:, 0, 0] + M[:, 1, 1] + M[:, 2, 2]
        tr = np.where(tr > 0, tr, 1.0)
        M = M / tr[:, None, None]
        M = M @ M
    cols = np.linalg.norm(M, axis=-2)
    j = np.argmax(cols, axis=-1)
    v = M[np.arange(M.shape[0]), :, j]
    nv = np.linalg.norm(v, axis=-1)
    e1 = np.zeros_like(v)
    e1[:, 0] = 1.0
    v = np.where(nv[:, None] > 0, v / np.where(nv > 0, nv, 1.0)[:, None], e1)
    v = np.where(v[:, :1] < 0, -v, v)
    # never accept a rotation that scores worse than doing nothing
    gain = np.einsum("bi,bij,bj->b", v, G, v)
    keep = gain >= G[:, 0, 0]
    return np.where(keep[:, None], v, e1)


def _jacobi(mats, tol, max_sweeps=None, history=None):
    """Joint Jacobi sweeps on a (B, m, n, n) stack of Hermitian matrices.

    Returns ``(V, D)`` with ``D = V* A V``.  Convergence is declared per
    batch element when the off-diagonal mass drops below ``tol`` times the
    summed Frobenius norms, or when a whole sweep stops making progress
    (the family does not commute and a stationary point was reached).
    """
    A = np.array(mats, dtype=complex)
    nb, m, n, _ = A.shape
    V = np.broadcast_to(np.eye(n, dtype=complex), (nb, n, n)).copy()
    off = _offdiag_mass(A)
    if history is not None:
        history.append(off.copy())
    if n == 1:
        return V, A
    scale = np.sum(np.linalg.norm(A, axis=(-2, -1)), axis=-1)
    thresh = tol * np.maximum(scale, np.finfo(float).tiny)
    if max_sweeps is None:
        max_sweeps = max(1, (100 * n * n) // (n * (n - 1) // 2))
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]
    done = off <= thresh
    for _ in range(max_sweeps):
        if done.all():
            return V, A
        for p, q in pairs:
            app = A[:, :, p, p].real
            aqq = A[:, :, q, q].real
            apq = A[:, :, p, q]
            h = np.stack([app - aqq, 2.0 * apq.real, 2.0 * apq.imag], axis=-1)
            G = np.einsum("bmi,bmj->bij", h, h)
            x, y, z = _principal_direction(G).T
            c = np.sqrt((1.0 + x) / 2.0)
            s = (y - 1j * z) / (2.0 * c)
            ca, sa = c[:, None, None], s[:, None, None]
            cv, sv = c[:, None], s[:, None]
            cp = A[..., :, p].copy()
            cq = A[..., :, q]
            A[..., :, p] = ca * cp + sa * cq
            A[..., :, q] = -np.conj(sa) * cp + ca * cq
            rp = A[..., p, :].copy()
            rq = A[..., q, :]
            A[..., p, :] = ca * rp + np.conj(sa) * rq
            A[..., q, :] = -sa * rp + ca * rq
            vp = V[..., :, p].copy()
            vq = V[..., :, q]
            V[..., :, p] = cv * vp + sv * vq
            V[..., :, q] = -np.conj(sv) * vp + cv * vq
        new_off = _offdiag_mass(A)
        if history is not None:
            history.append(new_off.copy())
        stalled = new_off >= off * (1.0 - 1e-9)
        done = done | (new_off <= thresh) | stalled
        off = new_off
    if done.all():
        return V, A
    raise NoConvergence(
        f"Jacobi sweeps exhausted the budget of {max_sweeps} sweeps "
        f"(max off-diagonal mass {off.max():.3e})"
    )


def _sort_order(labels):
    """Stable order by (real, imag) of each generator in turn."""
    lab = labels if labels.ndim == 3 else labels[..., None]
    keys = []
    for j in reversed(range(lab.shape[-1])):
        keys.append(lab[..., j].imag)
        keys.append(lab[..., j].real)
    return np.lexsort(keys, axis=-1)


def _take_columns(frames, order):
    return np.take_along_axis(frames, order[:, None, :], axis=-1)


# ----------------------------------------------------------------------------
# Hermitian and normal decompositions


def hermitian_eig_batch(As, tol=1e-14):
    """Batched Hermitian eigendecomposition: returns (labels, frames)."""
    As = np.asarray(As, dtype=complex)
    V, D = _jacobi(As[:, None], tol)
    lab = np.diagonal(D[:, 0], axis1=-2, axis2=-1).real.copy()
    order = np.argsort(lab, axis=-1, kind="stable")
    return np.take_along_axis(lab, order, axis=-1), _take_columns(V, order)


def hermitian_eig(A, tol=1e-14):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi.

    Returns real labels in ascending order; ties keep their Jacobi order.
    """
    A = np.asarray(A, dtype=complex)
    if not is_hermitian(A):
        raise NotHermitian("matrix is not Hermitian within 1e-10")
    lab, V = hermitian_eig_batch(A[None], tol)
    return SpectralDecomp(lab[0], V[0])


def joint_diagonalize(family, tol=1e-12, history=None):
    """Approximate joint diagonalizer of a family of Hermitian matrices.

    Parameters
    ----------
    family : sequence of (n, n) Hermitian arrays
    tol : float
        Relative stopping threshold on the off-diagonal mass.
    history : list, optional
        If given, receives the off-diagonal mass after every sweep.

    Returns
    -------
    frame : (n, n) unitary
    residual : float
        ``sqrt(sum_j ||offdiag(frame* A_j frame)||_F^2)``.
    """
    fam = np.asarray(family, dtype=complex)
    if fam.ndim == 2:
        fam = fam[None]
    for a in fam:
        if not is_hermitian(a):
            raise NotHermitian("joint_diagonalize expects Hermitian members")
    hist = [] if history is not None else None
    V, D = _jacobi(fam[None], tol, history=hist)
    if history is not None:
        history.extend(float(h[0]) for h in hist)
    return V[0], float(_offdiag_mass(D)[0])


def hk_split(A):
    A = np.asarray(A, dtype=complex)
    H = (A + dagger(A)) / 2.0
    K = (A - dagger(A)) / 2.0j
    return H, K


def joint_normal_batch(gens, tol=1e-13):
    """Joint decomposition of commuting normal tuples.

    ``gens`` has shape (B, g, n, n).  Returns ``(labels (B, n, g), frames)``
    with labels read off the diagonal of ``V* A_j V`` and sorted.
    """
    gens = np.asarray(gens, dtype=complex)
    H, K = hk_split(gens)
    fam = np.concatenate([H, K], axis=1)
    V, _ = _jacobi(fam, tol)
    D = dagger(V)[:, None] @ gens @ V[:, None]
    lab = np.moveaxis(np.diagonal(D, axis1=-2, axis2=-1), 1, 2).copy()
    order = _sort_order(lab)
    lab = np.take_along_axis(lab, order[..., None], axis=1)
    return lab, _take_columns(V, order)


def normal_decompose_batch(As, tol=1e-13):
    lab, V = joint_normal_batch(np.asarray(As)[:, None], tol)
    return lab[..., 0], V


def normal_decompose(A, tol=1e-13):
    """Spectral decomposition of a normal matrix via its H/K split."""
    A = np.asarray(A, dtype=complex)
    H, K = hk_split(A)
    if opnorm(H @ K - K @ H) > 1e-8 * (1.0 + opnorm(A) ** 2):
        raise NotNormal("commutator of Hermitian and skew parts is too large")
    lab, V = normal_decompose_batch(A[None], tol)
    return SpectralDecomp(lab[0], V[0])


# ----------------------------------------------------------------------------
# Logarithms and exponentials


def gap_cut(angles):
    """Midpoint of the largest gap between angles on the circle, in (0, 2pi]."""
    a = np.sort(np.mod(np.asarray(angles, dtype=float), TWO_PI))
    gaps = np.diff(np.concatenate([a, [a[0] + TWO_PI]]))
    k = int(np.argmax(gaps))
    mid = np.mod(a[k] + gaps[k] / 2.0, TWO_PI)
    return (mid if mid > 0 else TWO_PI), float(gaps[k])


def _branch(angles, cut):
    """Representatives of ``angles`` in the window (cut - 2pi, cut]."""
    return cut - np.mod(cut - angles, TWO_PI)


def log_unitary_batch(Us, with_eig=False):
    """Gap-rule logarithms of a (B, n, n) stack of unitaries.

    Returns ``(h, gaps)`` with ``exp(i h) = U`` and the largest spectral gap
    of each input; with ``with_eig`` also the eigenpairs ``(angles, V)`` of
    ``h``.
    """
    lab, V = normal_decompose_batch(Us)
    theta = np.angle(lab)
    out = np.empty_like(theta)
    gaps = np.empty(theta.shape[0])
    for b in range(theta.shape[0]):
        cut, gaps[b] = gap_cut(theta[b])
        out[b] = _branch(theta[b], cut)
    h = (V * out[:, None, :]) @ dagger(V)
    h = (h + dagger(h)) / 2.0
    if with_eig:
        return h, gaps, out, V
    return h, gaps


def unitary_log_gap(u):
    """Hermitian ``h`` with ``exp(i h) = u``, cut in the largest spectral gap.

    The branch cut sits at the midpoint of the widest eigenvalue-free arc of
    the unit circle, so ``||h|| <= 2 pi - gap/2 <= 2 pi`` and the path
    ``t -> exp(i t h)`` has length ``||h||``.
    """
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise NotUnitary("matrix is not unitary within 1e-10")
    h, _ = log_unitary_batch(u[None])
    return h[0]


def expih_batch(h, s=1.0):
    """``exp(i s h)`` for a (B, n, n) stack of Hermitian ``h``."""
    lam, V = hermitian_eig_batch(h)
    s = np.asarray(s, dtype=float)
    ph = np.exp(1j * lam * (s[:, None] if s.ndim else s))
    return (V * ph[:, None, :]) @ dagger(V)


def expih(h, s=1.0):
    return expih_batch(np.asarray(h, dtype=complex)[None], s)[0]


# ----------------------------------------------------------------------------
# Snapping


def snap(A, mode="projection"):
    """Round a near-projection or near-unitary to the exact object.

    ``mode="projection"``: eigenvalues are rounded to 0/1 at threshold 1/2.
    ``mode="unitary"``: the polar factor ``A (A*A)^(-1/2)`` is returned.
    """
    A = np.asarray(A, dtype=complex)
    if mode == "projection":
        if not is_hermitian(A, 1e-8):
            raise NotHermitian("projection snapping needs a Hermitian input")
        d = hermitian_eig((A + dagger(A)) / 2.0)
        if np.any(np.abs(d.labels - 0.5) < 1e-6):
            raise SpectrumStraddle("an eigenvalue sits at 1/2")
        keep = d.frame[:, d.labels > 0.5]
        return keep @ dagger(keep)
    if mode == "unitary":
        lam, V = hermitian_eig_batch((dagger(A) @ A)[None])
        lam, V = lam[0], V[0]
        if lam[0] <= 1e-24 * max(lam[-1], 1e-300) or lam[-1] == 0:
            raise Singular("cannot take the polar factor of a singular matrix")
        return A @ ((V / np.sqrt(lam)) @ dagger(V))
    raise ValueError(f"unknown snap mode {mode!r}")


def polar_batch(As):
    """Unitary polar factors of a (B, n, n) stack; raises Singular."""
    As = np.asarray(As, dtype=complex)
    lam, V = hermitian_eig_batch(dagger(As) @ As)
    if np.any(lam[:, 0] <= 1e-20 * np.maximum(lam[:, -1], 1e-300)):
        raise Singular("singular block in polar factorization")
    return As @ ((V / np.sqrt(lam)[:, None, :]) @ dagger(V))
