import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import rand_herm, rand_unitary
from mfd.dense import dagger, expih_batch
from mfd.domain import cycle, s3, sphere2
from mfd.errors import DomainMismatch, MeshTooCoarse, NotSpecialUnitary
from mfd.generators import monopole, winding
from mfd.obstruction import (
    band_chern_numbers,
    certify,
    chern_number,
    degree3,
    det_winding,
    gen_example,
    hermitian_link_certificates,
    s3_points,
    su2_matrix,
)

seeds = st.integers(0, 2**16)


@pytest.fixture(scope="module")
def s3_2():
    return s3(2)


def test_det_winding():
    assert det_winding(winding(64)) == 1
    th = cycle(32).coords[:, 0]
    u = np.exp(-2j * th)[:, None, None] * np.eye(1)
    assert det_winding(u) == -2
    with pytest.raises(MeshTooCoarse):
        det_winding(np.exp(2j * cycle(4).coords[:, 0])[:, None, None] * np.eye(1))


def test_chern_monopole_and_constant():
    fld = monopole(2)
    a = fld.generators[0].samples
    lam, V = np.linalg.eigh(a)
    tri = fld.domain.triangles
    assert chern_number(V[:, :, [0]], tri) == -1
    assert chern_number(V[:, :, [1]], tri) == 1
    P = np.broadcast_to(np.diag([1.0, 0.0]).astype(complex), a.shape)
    assert chern_number(P, tri) == 0
    assert sum(band_chern_numbers(a, tri)) == 0


@given(seeds)
def test_chern_gauge_invariant(seed):
    # rephasing the frames at each vertex does not change the integer
    rng = np.random.default_rng(seed)
    fld = monopole(1)
    _, V = np.linalg.eigh(fld.generators[0].samples)
    ph = np.exp(1j * rng.uniform(0, 2 * np.pi, size=V.shape[0]))
    assert chern_number(V[:, :, [0]] * ph[:, None, None], fld.domain.triangles) == -1


def test_degree_examples(s3_2):
    assert degree3(gen_example("s3_unitary", s3_2)) == 1
    assert degree3(gen_example("s3_unitary", s3_2, reflect=True)) == -1
    I = np.broadcast_to(np.eye(2, dtype=complex), (s3_2.n_vertices, 2, 2))
    assert degree3(I, s3_2) == 0


def test_degree_of_reassembled_diagonal_unitary(s3_2, rng):
    # a unitary built from continuous frames and labels has degree 0
    x = s3_2.coords
    Ks = np.array([rand_herm(rng, 2) * 0.3 for _ in range(4)])
    F = expih_batch(np.einsum("vk,kab->vab", x, Ks)) @ rand_unitary(rng, 2)
    phi = 0.7 * x[:, 0] + 0.4 * x[:, 3]
    lab = np.stack([np.exp(1j * phi), np.exp(-1j * phi)], axis=1)
    u = (F * lab[:, None, :]) @ dagger(F)
    assert degree3(u, s3_2) == 0


def test_degree_errors(s3_2):
    with pytest.raises(NotSpecialUnitary):
        degree3(np.broadcast_to(1j * np.eye(2), (s3_2.n_vertices, 2, 2)), s3_2)
    with pytest.raises(DomainMismatch):
        degree3(np.zeros((6, 2, 2)), sphere2(0))


def test_count1_links(s3_2):
    fld = gen_example("count1_b", s3_2)
    b, u = fld.generators[0].samples, fld.generators[1].samples
    z, _ = s3_points(s3_2)
    err = np.abs(u + dagger(u) - 2 * z.real[:, None, None] * np.eye(2)).max()
    assert err <= 1e-12
    reps = hermitian_link_certificates(b, s3_2, s3_2.coords)
    found = {tuple(np.round(s3_2.coords[r.details["vertex"]], 6)): r.value for r in reps}
    assert sorted(found.values()) == [-1, 1]
    assert set(found) == {(1.0, 0.0, 0.0, 0.0), (-1.0, 0.0, 0.0, 0.0)}


def test_tcount_shapes(s3_2):
    assert gen_example("tcount(3)", s3_2).n == 3
    assert gen_example("tcount(2)", s3_2).n == 2


def test_certify_dispatch(s3_2):
    reps, blocking = certify(gen_example("count1_b", s3_2))
    assert blocking and {r.kind for r in reps} == {"chern", "degree3"}
    reps, blocking = certify(monopole(1))
    assert not blocking and [r.value for r in reps] == [-1, 1]
    reps, blocking = certify(gen_example("braid", cycle(64)))
    assert blocking and reps[0].tension_flag


def test_su2_matrix_is_special_unitary(rng):
    z, w = rng.normal(size=2) + 1j * rng.normal(size=2)
    r = np.hypot(abs(z), abs(w))
    m = su2_matrix(z / r, w / r)
    np.testing.assert_allclose(m @ dagger(m), np.eye(2), atol=1e-14)
    assert np.linalg.det(m) == pytest.approx(1.0)
