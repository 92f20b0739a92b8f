import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import rand_unitary
from mfd.dense import SpectralDecomp, dagger, opnorm
from mfd.diag1d import (
    cycle_monodromy,
    diagonalize_cycle,
    diagonalize_path,
    edge_transport,
)
from mfd.errors import Obstructed, ToleranceNotMet, ValidationFailed
from mfd.generators import crossing, gen_field, interval_random, winding

seeds = st.integers(0, 2**32 - 1)


def test_edge_transport_endpoints_exact(rng):
    V = rand_unitary(rng, 3)
    W = rand_unitary(rng, 3)
    A = SpectralDecomp(np.array([0.0, 1.0, 2.0]), V)
    B = SpectralDecomp(np.array([0.1, 1.1, 2.1]), W)
    t = edge_transport(A, B, eta=0.5)
    assert np.array_equal(t.frames[0], A.frame)
    assert np.array_equal(t.frames[-1], B.frame[:, t.plan.perm])
    assert opnorm(dagger(t.frames) @ t.frames - np.eye(3)).max() < 1e-12
    # the parameterized form holds at interior steps
    k = 3
    Z = t.frames[k] * np.exp(-1j * t.s[k] * t.phases)[None, :] @ dagger(t.frames[0])
    assert opnorm(dagger(Z) @ Z - np.eye(3)) < 1e-12
    r = t.reversed()
    assert np.array_equal(r.frames[0], t.frames[-1])


@given(seeds)
def test_edge_transport_identity_when_equal(seed):
    rng = np.random.default_rng(seed)
    V = rand_unitary(rng, 3)
    A = SpectralDecomp(np.array([0.0, 1.0, 2.0]), V)
    t = edge_transport(A, A, eta=0.1)
    assert np.abs(t.frames - V[None]).max() < 1e-12
    assert t.commutator_profile.max() < 1e-12


def test_interval_random_small():
    fld = interval_random(32, 3, seed=1)
    fr = diagonalize_path(fld, eps=0.05)
    rep = fr.meta["report"]
    assert rep.max <= 2 * fld.generators[0].lipschitz_hint / 32 + 1e-8
    assert fr.projection_defect() < 1e-9


def test_refinement_stability():
    r = [diagonalize_path(interval_random(m, 3, seed=2), eps=1).meta["report"].max for m in (16, 32, 64)]
    assert r[2] <= r[1] <= r[0]


def test_crossing_is_followed():
    fr = diagonalize_path(crossing(64), eta=0.05, eps=0.06)
    assert fr.meta["report"].max <= 0.06


def test_strict_tolerance():
    with pytest.raises(ToleranceNotMet) as exc:
        diagonalize_path(interval_random(8, 3, seed=0), eps=1e-12)
    assert exc.value.report.max > 1e-12


def test_path_rejects_cycle():
    with pytest.raises(ValidationFailed):
        diagonalize_path(winding(16))


def test_winding_cycle():
    fr = diagonalize_cycle(winding(64), eps=0.05)
    assert fr.meta["windings"] == [1, 0]
    assert fr.meta["report"].max <= 0.05


def test_braid_monodromy():
    fld = gen_field("braid", m=64)
    mono = cycle_monodromy(fld)
    assert mono.perm.tolist() == [1, 0] and not mono.trivial
    assert mono.cycle_notation() == "(1 2)"
    with pytest.raises(Obstructed) as exc:
        diagonalize_cycle(fld)
    assert exc.value.report.kind == "monodromy"
    assert exc.value.report.details["det_winding"] == 1


def test_conjugated_endpoint_commutator_small(rng):
    V = rand_unitary(rng, 3)
    A = SpectralDecomp(np.array([0.0, 1.0, 2.0]), V)
    H = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    H = (H + dagger(H)) / 2
    H /= np.linalg.norm(H, 2)
    eps = 1e-2
    from mfd.dense import expih

    R = expih(H, eps)
    B = SpectralDecomp(A.labels, R @ V)
    t = edge_transport(A, B, eta=0.1)
    assert t.commutator_profile.max() <= 5 * eps
    assert np.array_equal(t.frames[-1], B.frame[:, t.plan.perm])


def test_constant_field_is_exact():
    from mfd.domain import interval
    from mfd.field import Generator, GeneratorField

    A = np.diag([0.0, 1.0, 3.0]).astype(complex)
    fld = GeneratorField(interval(16), [Generator("a", "hermitian", np.array([A] * 17))])
    fr = diagonalize_path(fld)
    assert fr.meta["report"].max <= 1e-9
    assert np.abs(fr.frames - fr.frames[0]).max() <= 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_residual_bound_propagation(seed):
    # on every edge: residual <= Lip(dictionary) * (label motion + path commutator)
    from mfd.field import FunctionDictionary

    fr = diagonalize_path(interval_random(64, 3, seed=seed), eps=1)
    rep = fr.meta["report"]
    lip = FunctionDictionary(2, 1).lipschitz(np.abs(fr.labels).max())
    for k, (_, t) in enumerate(sorted(fr.transports.items())):
        motion = np.abs(t.labels[-1] - t.labels[0]).max()
        assert rep.edge_max[k] <= lip * (motion + t.commutator_profile.max())


def test_monodromy_refinement_invariant():
    perms = [cycle_monodromy(gen_field("braid", m=m)).perm.tolist() for m in (64, 128, 256)]
    assert perms == [[1, 0]] * 3
    for m in (32, 64):
        assert cycle_monodromy(winding(m)).trivial


def test_sorted_hermitian_cycle_is_trivial():
    from mfd.domain import cycle
    from mfd.field import Generator, GeneratorField

    dom = cycle(48)
    th = dom.coords[:, 0]
    a = np.zeros((48, 2, 2), dtype=complex)
    a[:, 0, 0] = np.cos(th)
    a[:, 1, 1] = 3 + np.sin(th)
    a[:, 0, 1] = a[:, 1, 0] = 0.3 * np.sin(2 * th)
    fld = GeneratorField(dom, [Generator("a", "hermitian", a)])
    assert cycle_monodromy(fld).trivial
