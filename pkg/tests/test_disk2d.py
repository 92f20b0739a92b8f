import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import rand_unitary
from mfd.dense import SpectralDecomp, dagger, opnorm
from mfd.disk2d import (
    BoundaryData,
    boundary_align,
    diagonalize_complex2,
    extend_triangle,
    fill_anchor_residual,
    fill_boundary_exact,
    reference_grid,
    snap_vertex_homomorphism,
)
from mfd.errors import FramesInvalid, Obstructed, OscillationTooLarge
from mfd.field import Monomial, evaluate_hom
from mfd.generators import boundary_loop, monopole, sphere_random

seeds = st.integers(0, 2**16)


def test_reference_grid():
    bary, pos = reference_grid(4)
    assert len(bary) == 15
    np.testing.assert_allclose(bary.sum(axis=1), 1.0)
    assert sorted(pos[pos >= 0].tolist()) == list(range(12))


def test_constant_loop_gives_constant_fill(rng):
    V = rand_unitary(rng, 3)
    lab = np.array([0.0, 1.0, 2.0], dtype=complex)
    m = 4
    data = BoundaryData(np.tile(lab, (3 * m + 1, 1)), np.tile(V, (3 * m + 1, 1, 1)), m)
    fill = extend_triangle(data)
    assert np.abs(fill.frames - V).max() < 1e-12
    assert fill_anchor_residual(fill, data.base) < 1e-12


def test_loop_must_close(rng):
    F = np.array([rand_unitary(rng, 2) for _ in range(7)])
    with pytest.raises(FramesInvalid):
        BoundaryData(np.zeros((7, 2)), F, 2)


@given(seeds)
def test_boundary_exact_and_small_residual(seed):
    data = boundary_loop(seed, 0.02, m=8)
    fill = extend_triangle(data)
    assert fill_boundary_exact(fill, data)
    assert fill_anchor_residual(fill, data.base) <= 4 * data.oscillation
    assert opnorm(dagger(fill.frames) @ fill.frames - np.eye(3)).max() < 1e-10


def test_boundary_align_junctions():
    data = boundary_loop(0, 0.02, m=4)
    u = boundary_align(data)
    np.testing.assert_allclose(u[0], np.eye(3), atol=1e-12)


def test_strict_oscillation():
    data = boundary_loop(1, 0.3, m=4)
    with pytest.raises(OscillationTooLarge):
        extend_triangle(data, eta=0.1)


@pytest.mark.parametrize("delta", [1e-4, 1e-2])
def test_snap_vertex_homomorphism(rng, delta):
    V = rand_unitary(rng, 4)
    X = np.array([(V * rng.normal(size=4)) @ dagger(V) for _ in range(2)], dtype=complex)
    X = X + delta * rng.normal(size=X.shape)
    d = snap_vertex_homomorphism(X)
    A, B = d.matrix(0), d.matrix(1)
    assert np.linalg.norm(A @ B - B @ A, 2) < 1e-12
    f = Monomial(0, 1, 0)
    np.testing.assert_allclose(evaluate_hom(d, Monomial(0, 2, 0)), evaluate_hom(d, f) @ evaluate_hom(d, f), atol=1e-12)


def test_sphere_convergence():
    r = [diagonalize_complex2(sphere_random(k), strict=False).meta["report"].max for k in (0, 1)]
    assert r[1] <= 0.7 * r[0]


def test_chern_is_informative_by_default():
    fr = diagonalize_complex2(monopole(1), strict=False)
    assert fr.meta["chern"] == [-1, 1]
    with pytest.raises(Obstructed):
        diagonalize_complex2(monopole(1), strict=False, obstruct_on_chern=True)
