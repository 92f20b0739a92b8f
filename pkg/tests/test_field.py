import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import rand_unitary
from mfd.dense import SpectralDecomp, dagger
from mfd.domain import interval
from mfd.errors import FrameMismatch, ShapeMismatch, ValidationFailed
from mfd.field import (
    DiagonalFrameField,
    FunctionDictionary,
    Generator,
    GeneratorField,
    Monomial,
    evaluate_hom,
    residual_report,
)

seeds = st.integers(0, 2**32 - 1)


def test_dictionary_members():
    d = FunctionDictionary(2, 1)
    names = [m.name(("z",)) for m in d.members]
    assert names == ["1", "z", "conj(z)", "z^2", "z*conj(z)", "conj(z)^2"]
    assert len(FunctionDictionary(2, 2)) == 11
    assert d.lipschitz(1.0) == 2.0


@given(seeds)
def test_evaluate_hom_matches_matrix_function(seed):
    rng = np.random.default_rng(seed)
    V = rand_unitary(rng, 4)
    z = rng.normal(size=4) + 1j * rng.normal(size=4)
    d = SpectralDecomp(z, V)
    A = d.matrix()
    for f in FunctionDictionary(3, 1).members:
        np.testing.assert_allclose(evaluate_hom(d, f), f.matrix(A[None]), atol=1e-10)


@given(seeds)
def test_multiplicativity(seed):
    rng = np.random.default_rng(seed)
    V = rand_unitary(rng, 3)
    d = SpectralDecomp(rng.normal(size=3) + 1j * rng.normal(size=3), V)
    f, g, fg = Monomial(0, 1, 0), Monomial(0, 0, 1), Monomial(0, 1, 1)
    np.testing.assert_allclose(evaluate_hom(d, fg), evaluate_hom(d, f) @ evaluate_hom(d, g), atol=1e-12)


@given(seeds)
def test_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    V = rand_unitary(rng, 3)
    W = rand_unitary(rng, 3)
    z = rng.normal(size=3) + 0j
    f = Monomial(0, 2, 0)
    lhs = evaluate_hom(SpectralDecomp(z, W @ V), f)
    rhs = W @ evaluate_hom(SpectralDecomp(z, V), f) @ dagger(W)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_tuple_decomposition_requires_shared_frame(rng):
    V = rand_unitary(rng, 2)
    a = SpectralDecomp(np.array([1.0, 2.0]), V)
    b = SpectralDecomp(np.array([3.0, 4.0]), V)
    out = evaluate_hom((a, b), Monomial(1, 1, 0))
    np.testing.assert_allclose(out, b.matrix(), atol=1e-14)
    with pytest.raises(FrameMismatch):
        evaluate_hom((a, SpectralDecomp(b.labels, rand_unitary(rng, 2))), Monomial(0, 1, 0))


def test_field_validation(rng):
    dom = interval(2)
    A = np.array([np.diag([1.0, 2.0])] * 3, dtype=complex)
    GeneratorField(dom, [Generator("a", "hermitian", A)]).validate()
    bad = A.copy()
    bad[1, 0, 1] = 1.0
    with pytest.raises(ValidationFailed):
        GeneratorField(dom, [Generator("a", "hermitian", bad)]).validate()
    B = np.array([[[0, 1], [1, 0]]] * 3, dtype=complex)
    with pytest.raises(ValidationFailed, match="commute"):
        GeneratorField(dom, [Generator("a", "hermitian", A), Generator("b", "hermitian", B)]).validate()
    with pytest.raises(ValidationFailed):
        GeneratorField(dom, [Generator("a", "hermitian", A[:2])]).validate()


def test_residual_report_exact_frames_zero():
    dom = interval(2)
    A = np.array([np.diag([1.0, 2.0])] * 3, dtype=complex)
    fld = GeneratorField(dom, [Generator("a", "hermitian", A)])
    frames = DiagonalFrameField(dom, np.array([[[1.0], [2.0]]] * 3, dtype=complex), np.array([np.eye(2)] * 3, dtype=complex))
    rep = residual_report(fld, frames, eps=1e-12)
    assert rep.max == 0.0 and rep.verdict
    wrong = DiagonalFrameField(dom, frames.labels[:2], frames.frames[:2])
    with pytest.raises(ShapeMismatch):
        residual_report(fld, wrong)
