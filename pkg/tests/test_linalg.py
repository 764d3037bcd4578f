import numpy as np
import pytest
from hypothesis import given, strategies as st

from cfinsler.errors import DegenerateBasisError, FormNotPositiveError, NotHermitianError
from cfinsler.linalg import (ChartPoint, ComplexifiedVector, HermitianMatrix, TangentVector,
                             gram_matrix, levi_gram_schmidt, posdef_check, type_split)

R2 = np.sqrt(2.0)


def test_type_split_real_direction():
    w = TangentVector(ChartPoint([0, 0]), [1, 0])
    c = type_split(w)
    assert np.array_equal(c.holo, [1, 0]) and np.array_equal(c.anti, [1, 0])


def test_type_split_imaginary_direction():
    c = type_split(TangentVector(ChartPoint([0, 0]), [1j, 0]))
    assert np.array_equal(c.holo, [1j, 0]) and np.array_equal(c.anti, [-1j, 0])


def test_J_acts_as_i_on_holomorphic_part():
    w = TangentVector(ChartPoint([0, 0]), [1, 0])
    assert np.array_equal(w.J().v, [1j, 0])
    assert np.allclose(type_split(w.J()).holo, 1j * type_split(w).holo)


def test_posdef_identity_and_indefinite():
    assert posdef_check(np.eye(2)) == posdef_check(HermitianMatrix(np.eye(2)))
    r = posdef_check(np.eye(2), 1e-10)
    assert r.is_posdef and r.min_eigenvalue == pytest.approx(1.0)
    r = posdef_check(np.diag([1.0, -1.0]), 1e-10)
    assert not r.is_posdef and r.min_eigenvalue == pytest.approx(-1.0)


def test_posdef_quartic_gram():
    # eigenvalues of [[a, b], [b, a]] are a +- b; a = 3 sqrt2/4, b = -sqrt2/4
    m = [[0.75 * R2, -R2 / 4], [-R2 / 4, 0.75 * R2]]
    r = posdef_check(m)
    assert r.is_posdef
    assert r.min_eigenvalue == pytest.approx(R2 / 2, abs=1e-12)
    # characteristic polynomial cross-check: l^2 - tr l + det = 0
    lam = r.min_eigenvalue
    assert lam**2 - 1.5 * R2 * lam + (9 / 8 - 1 / 8) == pytest.approx(0.0, abs=1e-12)


def test_hermitian_matrix_symmetrizes_and_rejects():
    h = HermitianMatrix([[1.0, 1j + 1e-14], [-1j, 2.0]])
    assert np.allclose(h.entries, h.entries.conj().T, atol=0)
    with pytest.raises(NotHermitianError):
        HermitianMatrix([[1.0, 1.0], [0.0, 1.0]])


def test_gram_schmidt_examples():
    eye = np.eye(2)
    out = levi_gram_schmidt([ComplexifiedVector.pure_holo([1, 0]),
                             ComplexifiedVector.pure_holo([0, 1])], eye)
    assert np.allclose(out[0].holo, [1, 0]) and np.allclose(out[1].holo, [0, 1])
    out = levi_gram_schmidt([ComplexifiedVector.pure_holo([2, 0])], eye)
    assert np.allclose(out[0].holo, [1, 0])
    out = levi_gram_schmidt([ComplexifiedVector.pure_holo([1, 1]),
                             ComplexifiedVector.pure_holo([0, 1])], eye)
    assert np.allclose(out[0].holo, np.array([1, 1]) / R2)
    assert np.allclose(out[1].holo, np.array([-1, 1]) / R2)


def test_gram_schmidt_errors():
    with pytest.raises(DegenerateBasisError):
        levi_gram_schmidt([ComplexifiedVector.pure_holo([1, 1]),
                           ComplexifiedVector.pure_holo([2, 2])], np.eye(2))
    with pytest.raises(FormNotPositiveError):
        levi_gram_schmidt([ComplexifiedVector.pure_holo([0, 1])], np.diag([1.0, -1.0]))


@st.composite
def hermitian_posdef(draw, n=3):
    re = draw(st.lists(st.floats(-2, 2), min_size=n * n, max_size=n * n))
    im = draw(st.lists(st.floats(-2, 2), min_size=n * n, max_size=n * n))
    a = np.array(re).reshape(n, n) + 1j * np.array(im).reshape(n, n)
    return a @ a.conj().T + 0.5 * np.eye(n)


@given(hermitian_posdef(), st.integers(0, 2**31))
def test_gram_schmidt_orthonormal(form, seed):
    rng = np.random.default_rng(seed)
    basis = [ComplexifiedVector.pure_holo(rng.standard_normal(3) + 1j * rng.standard_normal(3))
             for _ in range(3)]
    out = levi_gram_schmidt(basis, form)
    G = gram_matrix([e.holo for e in out], form)
    assert np.allclose(G, np.eye(3), atol=1e-9)
    assert all(e.is_real() for e in out)
