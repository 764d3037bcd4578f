import numpy as np
import pytest
from hypothesis import given, strategies as st

from cfinsler.connection import ProjPoint, horizontal_lift, horizontal_velocity
from cfinsler.curvature import (curvature, curvature_components, curvature_data, holonomy_defect,
                                torsion, torsion_components, torsion_from_fields,
                                weakly_kahler_check, weakly_kahler_residual)
from cfinsler.metric import builtin_metric, sample_point

from conftest import crandn
from oracles import ball_gamma, ball_transport


def test_ball_gamma_oracle_matches(poincare2):
    from cfinsler.connection import connection_coefficients
    z = np.array([0.2 + 0.1j, -0.3j])
    cc = connection_coefficients(poincare2, z, [1.0, 0.4j])
    assert np.allclose(cc.gamma, ball_gamma(z), atol=1e-12)


def test_euclidean_all_zero(euclid2):
    X, Y = ([1, 0.5j], [0.2, 1]), ([0, 1], [1j, 0])
    T = torsion(euclid2, ([0, 0], [1, 1]), X, Y)
    K = curvature(euclid2, ([0, 0], [1, 1]), X, Y)
    assert np.allclose(T.total, 0) and np.allclose(K.total, 0)


def test_poincare_disk_omega_at_origin(poincare1):
    data = curvature_data(poincare1, [0.0], [1.0])
    assert data.dtheta[0, 0, 0, 0] == pytest.approx(2.0, abs=1e-12)
    K = curvature(poincare1, ([0.0], [1.0]), ([1.0], [0.0]), ([1j], [0.0]))
    # K(x, y) = dtheta (xbar y - ybar x) = 2 (i + i)
    assert K.omega_part[0, 0] == pytest.approx(4j, abs=1e-12)
    assert np.allclose(K.pi_part, 0) and np.allclose(K.phi_part, 0)


def test_hermitian_curvature_matches_transport_oracle(poincare2):
    z = np.array([0.15 - 0.1j, 0.2j])
    v = np.array([1.0, 0.3 + 0.2j])
    X, Y = np.array([1.0, 0.5j]), np.array([-0.3, 1.0 + 0.2j])
    Xh = (X, horizontal_velocity(poincare2, z, v, X))
    Yh = (Y, horizontal_velocity(poincare2, z, v, Y))
    K = curvature(poincare2, (z, v), Xh, Yh)
    errs = []
    for eps in (1e-2, 5e-3):
        P = ball_transport(z, X, Y, eps)
        errs.append(np.linalg.norm((np.eye(2) - P) / eps**2 - K.total))
    assert errs[1] < 0.6 * errs[0]  # first-order convergence of the quotient
    assert errs[1] < 1e-2 * np.linalg.norm(K.total)
    assert np.allclose(K.pi_part, 0, atol=1e-10) and np.allclose(K.phi_part, 0, atol=1e-10)


def test_quartic_blocks(quartic):
    z, v = np.zeros(2), np.array([0.8, 0.5 + 0.4j])
    X, Y = ([1, 0.2], [0.3j, 1]), ([0.5j, 1], [1, -0.2])
    K = curvature(quartic, (z, v), X, Y)
    assert np.allclose(K.omega_part, 0, atol=1e-12) and np.allclose(K.pi_part, 0, atol=1e-12)
    assert np.linalg.norm(K.phi_part) > 1e-2


def test_poincare_torsion_free(poincare2):
    rng = np.random.default_rng(4)
    for _ in range(10):
        z, v = sample_point(poincare2, rng)
        X = (crandn(rng, 2), np.zeros(2))
        Y = (crandn(rng, 2), np.zeros(2))
        T = torsion(poincare2, (z, v), X, Y)
        assert np.linalg.norm(T.total) < 1e-8 and np.linalg.norm(T.finsler_part) < 1e-12


def test_hermitian_torsion_classical(non_kahler):
    from cfinsler.connection import connection_coefficients
    z, v = np.array([0.2, 0.1j]), np.array([1.0, 0.3])
    rng = np.random.default_rng(0)
    X = (crandn(rng, 2), crandn(rng, 2))
    Y = (crandn(rng, 2), crandn(rng, 2))
    T = torsion(non_kahler, (z, v), X, Y)
    G = connection_coefficients(non_kahler, z, v).gamma
    classical = np.einsum("ijk,j,k->i", G - G.transpose(0, 2, 1), Y[0], X[0])
    assert np.allclose(T.pure_part, classical, atol=1e-12)
    assert np.allclose(T.finsler_part, 0, atol=1e-12)
    assert np.linalg.norm(classical) > 1e-3


@given(st.integers(0, 2**31))
def test_antisymmetry_and_split(seed):
    rng = np.random.default_rng(seed)
    m = builtin_metric("QUARTIC")
    z, v = sample_point(m, rng)
    X = (crandn(rng, 2), crandn(rng, 2))
    Y = (crandn(rng, 2), crandn(rng, 2))
    T1, T2 = torsion(m, (z, v), X, Y), torsion(m, (z, v), Y, X)
    assert np.allclose(T1.total, -T2.total, atol=1e-12)
    assert np.allclose(T1.total, T1.pure_part + T1.finsler_part, atol=1e-12)
    K1, K2 = curvature(m, (z, v), X, Y), curvature(m, (z, v), Y, X)
    assert np.allclose(K1.total, -K2.total, atol=1e-12)


def test_pointwise_dependence(quartic):
    z0, v0 = np.array([0.1, -0.2j]), np.array([0.9, 0.5 + 0.3j])
    X, a = np.array([1.0, 0.3j]), np.array([0.2, -1.0])
    Y, b = np.array([0.4j, 1.0]), np.array([1.0j, 0.1])
    ref = torsion(quartic, (z0, v0), (X, a), (Y, b)).total
    const_x = lambda z, v: (X, a)
    const_y = lambda z, v: (Y, b)
    bent_x = lambda z, v: (X + 0.7 * (z - z0) * (v - v0)[::-1] + 0.3j * (v - v0) ** 2, a + (z - z0))
    bent_y = lambda z, v: (Y + 1.3 * (v - v0) - 0.4 * (z - z0) ** 2, b - 0.5j * (v - v0))
    for fx, fy in ((const_x, const_y), (bent_x, bent_y), (bent_x, const_y)):
        assert np.allclose(torsion_from_fields(quartic, z0, v0, fx, fy), ref, atol=1e-10)


def test_components_shapes(quartic, poincare1):
    T = torsion_components(quartic, [0, 0], [0.7, 1j])
    R = curvature_components(quartic, [0, 0], [0.7, 1j])
    assert T.shape == (2, 2, 2) and R.shape == (2, 2, 2, 2)
    assert np.allclose(T, -T.transpose(0, 2, 1))
    R1 = curvature_components(poincare1, [0.0], [1.0])
    assert R1.shape == (1, 1, 1, 1) and abs(R1[0, 0, 0, 0]) == pytest.approx(2.0)


def test_weakly_kahler(euclid2, poincare2, non_kahler):
    rep = weakly_kahler_check(euclid2, 10, 0)
    assert rep.passed and rep.max_residual == 0
    assert weakly_kahler_check(poincare2, 30, 0).passed
    rep = weakly_kahler_check(non_kahler, 30, 0)
    assert not rep.passed and rep.max_residual > 1e-3


def test_weakly_kahler_residual_projective(poincare2):
    X = ([1.0, 0.2j], [0.0, 0.0])
    a = weakly_kahler_residual(poincare2, [0.1, 0.2], [1, 0.3], X)
    b = weakly_kahler_residual(poincare2, [0.1, 0.2], [2j, 0.6j], X)
    assert a == pytest.approx(b, abs=1e-12)


@pytest.mark.parametrize("name,n", [("POINCARE_BALL", 2), ("QUARTIC", None)])
def test_holonomy_order(name, n):
    m = builtin_metric(name, n)
    z, v = np.array([0.1, 0.05j]), np.array([0.8, 0.5 + 0.3j])
    X = (np.array([1.0, 0.3j]), np.array([0.3, 1.0j]))
    Y = (np.array([0.2, 1.0]), np.array([0.5j, -0.4]))
    assert np.linalg.norm(curvature(m, (z, v), X, Y).total) > 1e-2
    d1 = holonomy_defect(m, z, v, X, Y, 1e-2)
    d2 = holonomy_defect(m, z, v, X, Y, 1e-3)
    assert np.log10(d1 / d2) >= 2.7
