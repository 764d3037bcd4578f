import numpy as np
import pytest
from hypothesis import given, strategies as st

from cfinsler.errors import FinslerError, OutsideDomainError
from cfinsler.tensors import jet
from cfinsler.metric import builtin_metric, homogeneity_check, metric_from_expression


def test_euclidean_value():
    m = builtin_metric("EUCLIDEAN", 2)
    assert m.G([0, 0], [3, 4j]) == pytest.approx(25.0)


def test_poincare_value():
    m = builtin_metric("POINCARE_BALL", 1)
    assert m.G([0.5], [1.0]) == pytest.approx(16 / 9, rel=1e-14)


def test_quartic_value():
    m = builtin_metric("QUARTIC")
    assert m.G([0, 0], [1, 1]) == pytest.approx(np.sqrt(2.0), rel=1e-14)
    assert m.F([0, 0], [1, 1]) == pytest.approx(2**0.25, rel=1e-14)


def test_hermitian_const_value():
    A = np.array([[2.0, 0.5j], [-0.5j, 1.0]])
    m = builtin_metric("HERMITIAN_CONST", matrix=A)
    v = np.array([1 + 1j, -0.3])
    assert m.G([0, 0], v) == pytest.approx((v @ A @ v.conj()).real)


def test_builtin_errors():
    with pytest.raises(FinslerError):
        builtin_metric("HERMITIAN_CONST", matrix=[[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(FinslerError):
        builtin_metric("HERMITIAN_CONST", matrix=np.diag([1.0, -1.0]))
    with pytest.raises(FinslerError):
        builtin_metric("NOPE", 2)


def test_poincare_domain():
    m = builtin_metric("POINCARE_BALL", 2)
    with pytest.raises(OutsideDomainError):
        jet(m, [0.8, 0.8], [1, 0], 2)
    assert not m.in_domain([0.1, 0.1], [0, 0])


def test_quartic_guard_excludes_axes():
    m = builtin_metric("QUARTIC")
    assert not m.in_domain([0, 0], [1, 0])
    assert m.in_domain([0, 0], [1, 0.2])


@pytest.mark.parametrize("name,n", [("EUCLIDEAN", 2), ("POINCARE_BALL", 2), ("QUARTIC", None)])
def test_builtin_homogeneity(name, n):
    rep = homogeneity_check(builtin_metric(name, n), 100, seed=3)
    assert rep.passed and rep.max_residual < 1e-12


def test_broken_metric_fails_homogeneity():
    rep = homogeneity_check(metric_from_expression("abs2(v1) + re(v1)", 1), 100, seed=0)
    assert not rep.passed and rep.max_residual > 1e-2


def test_dsl_matches_builtin():
    dsl = metric_from_expression("sqrt(abs2(v1)^2 + abs2(v2)^2)", 2)
    q = builtin_metric("QUARTIC")
    for v in ([1, 2j], [0.3 - 1j, 0.7]):
        assert dsl.G([0, 0], v) == pytest.approx(q.G([0, 0], v), rel=1e-14)


@given(st.floats(0.1, 5), st.floats(0, 2 * np.pi), st.integers(0, 2**31))
def test_poincare_homogeneous(r, phi, seed):
    rng = np.random.default_rng(seed)
    m = builtin_metric("POINCARE_BALL", 2)
    z = 0.3 * (rng.standard_normal(2) + 1j * rng.standard_normal(2)) / 2
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    lam = r * np.exp(1j * phi)
    assert m.G(z, lam * v) == pytest.approx(r * r * m.G(z, v), rel=1e-12)
