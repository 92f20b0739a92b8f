"""Unitary paths from an almost-commuting unitary to the identity over an interval.

The path has two halves.  On ``[0, 1/2]`` the unitary is rotated into the
commutant of the frame field, ``U(s) = u exp(2 i s a)``, where ``exp(i a)``
equals ``u* sum_i beta_i p_i`` and ``beta_i`` is the phase of the diagonal
entry of ``u`` in the frame.  On ``[1/2, 1]`` the phases ``beta_i`` are
contracted to 1 along the shorter arc, so every sample of the second half
commutes with the frame exactly.
"""
from dataclasses import dataclass

import numpy as np

from .dense import dagger, log_unitary_batch, opnorm
from .errors import FramesInvalid, GapCollapse, ShapeMismatch
from .field import FunctionDictionary, GeneratorField, diagonal_model

MIN_INTERVALS = 32
MAX_INCREMENT = 0.1
MIN_GAP = 1e-6


@dataclass(eq=False)
class HomotopyPath:
    """Discretized path ``U(s)`` with its diagnostics.

    Attributes
    ----------
    s_grid : (S,) array
        Path parameters, ``s_grid[0] = 0``, ``s_grid[-1] = 1``, and ``1/2``
        is always a grid point.
    U : (S, V, n, n) array
        One unitary per grid point and vertex.
    commutator_profile : (S, M) array
        ``max_v ||[U(s)_v, sum_i f(alpha_i) p_i]||`` per dictionary member.
    log_norm : float
        Largest ``||a||`` over the vertices.
    defect : float
        Largest ``||1 - u* sum_i beta_i p_i||`` over the vertices.
    delta_in : float
        Largest input commutator ``||[u, sum_i f(alpha_i) p_i]||``.
    """

    s_grid: np.ndarray
    U: np.ndarray
    commutator_profile: np.ndarray
    log_norm: float
    defect: float
    delta_in: float
    member_names: list
    pinned: str = "none"
    eps: float = np.inf

    @property
    def max_commutator(self):
        return float(self.commutator_profile.max())

    @property
    def bound(self):
        """``2 arcsin(eps / 4)``, the log-norm bound that applies when the
        defect is below ``eps / 2``."""
        return 2.0 * np.arcsin(min(self.eps / 4.0, 1.0))

    @property
    def bound_applies(self):
        return bool(self.defect < self.eps / 2.0)

    def increments(self):
        """Largest ``||U(s_k+1) - U(s_k)||`` over vertices, per step."""
        return opnorm(np.diff(self.U, axis=0)).max(axis=1)


def _unitary_input(u, nv, n):
    if isinstance(u, GeneratorField):
        kinds = [g.kind for g in u.generators]
        j = kinds.index("unitary") if "unitary" in kinds else 0
        u = u.generators[j].samples
    u = np.asarray(u, dtype=complex)
    if u.shape != (nv, n, n):
        raise ShapeMismatch(f"unitary field has shape {u.shape}, expected {(nv, n, n)}")
    if np.any(opnorm(dagger(u) @ u - np.eye(n)) > 1e-10):
        raise ShapeMismatch("unitary field is not unitary within 1e-10")
    return u


def _phases(z):
    """Arguments in (-pi, pi]; the antipodal tie goes to +pi."""
    ang = np.angle(z)
    return np.where(ang <= -np.pi + 1e-15, np.pi, ang)


def _exact_block_compress(a, labels):
    """Keep only the entries of ``a`` (in the frame basis) between equal labels."""
    same = np.all(labels[:, None, :] == labels[None, :, :], axis=-1)
    return a * same


def basic_homotopy(frames, u, eps=np.inf, pinned="none", dict_degree=2):
    """Unitary path from ``u`` to the identity that stays almost commuting.

    Parameters
    ----------
    frames : DiagonalFrameField
        Diagonal frames over an interval domain.
    u : (V, n, n) array or GeneratorField
        Unitary samples at the vertices.
    eps : float
        Target commutator size.  When the measured defect is below
        ``eps / 2`` the bound ``log_norm <= 2 arcsin(eps / 4)`` is checked.
    pinned : {"none", "left", "both"}
        Endpoints at which the path is kept in the commutant of the vertex
        decomposition.
    dict_degree : int
        Degree of the monomial dictionary used for the commutator profile.

    Returns
    -------
    HomotopyPath

    Raises
    ------
    FramesInvalid
        Frames are not unitary, or the domain is not an interval.
    GapCollapse
        A phase ``beta_i`` is undefined, or ``u* sum beta_i p_i`` has no
        spectral gap to cut the logarithm in.
    """
    dom = frames.domain
    if dom.dimension != 1 or not dom.is_acyclic():
        raise FramesInvalid("homotopy needs frames over an interval")
    if pinned not in ("none", "left", "both"):
        raise ValueError(f"unknown pinning {pinned!r}")
    F = np.asarray(frames.frames)
    nv, n = F.shape[0], F.shape[-1]
    if np.any(opnorm(dagger(F) @ F - np.eye(n)) > 1e-9):
        raise FramesInvalid("frames are not unitary within 1e-9")
    u = _unitary_input(u, nv, n)
    labels = np.asarray(frames.labels)

    # phases of u in the frame, and the commutant projection P = F diag(beta) F*
    d = np.einsum("vai,vab,vbi->vi", np.conj(F), u, F)
    if np.any(np.abs(d) < 1e-12):
        raise GapCollapse("a diagonal entry of u vanishes in the frame")
    arg = _phases(d)
    beta = np.exp(1j * arg)
    P = (F * beta[:, None, :]) @ dagger(F)
    W = dagger(u) @ P
    defect = float(opnorm(np.eye(n) - W).max())
    a, gaps = log_unitary_batch(W)
    if np.any(gaps < MIN_GAP):
        raise GapCollapse("u* sum beta_i p_i has no spectral gap")

    ends = {"none": [], "left": [0], "both": [0, nv - 1]}[pinned]
    for v in ends:
        ab = dagger(F[v]) @ a[v] @ F[v]
        a[v] = F[v] @ _exact_block_compress(ab, labels[v]) @ dagger(F[v])
        a[v] = (a[v] + dagger(a[v])) / 2.0
    log_norm = float(opnorm(a).max())
    if defect < eps / 2.0 and log_norm > 2.0 * np.arcsin(min(eps / 4.0, 1.0)) + 1e-12:
        raise GapCollapse(f"logarithm norm {log_norm:.3g} exceeds the gap bound")

    lam, V = np.linalg.eigh(a)
    size = max(log_norm, float(np.abs(arg).max()))
    N = MIN_INTERVALS
    while True:
        s = np.linspace(0.0, 1.0, N + 1)
        U = _sample_path(s, u, V, lam, F, arg)
        if opnorm(np.diff(U, axis=0)).max() <= MAX_INCREMENT or N > 4 * (size / MAX_INCREMENT + MIN_INTERVALS):
            break
        N *= 2

    dictionary = FunctionDictionary(dict_degree, labels.shape[-1])
    members = dictionary.members
    D = np.stack([diagonal_model(F, labels, f) for f in members], axis=1)  # (V, M, n, n)
    comm = U[:, :, None] @ D[None] - D[None] @ U[:, :, None]
    profile = opnorm(comm).max(axis=1)
    return HomotopyPath(
        s, U, profile, log_norm, defect, float(profile[0].max()),
        [m.name(frames.names or None) for m in members], pinned, float(eps),
    )


def _sample_path(s, u, V, lam, F, arg):
    nv, n = u.shape[0], u.shape[-1]
    U = np.empty((len(s), nv, n, n), dtype=complex)
    half = int(np.flatnonzero(np.isclose(s, 0.5))[0])
    for k in range(half):
        ph = np.exp(2j * s[k] * lam)
        U[k] = u @ ((V * ph[:, None, :]) @ dagger(V))
    for k in range(half, len(s)):
        ph = np.exp(1j * (2.0 - 2.0 * s[k]) * arg)
        U[k] = (F * ph[:, None, :]) @ dagger(F)
    U[0] = u
    U[-1] = np.eye(n)
    return U
