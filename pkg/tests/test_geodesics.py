import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfinsler.connection import ProjPoint, ProjTangent, ddt
from cfinsler.errors import ConvergenceError, FinslerError
from cfinsler.geodesics import (geodesic_bvp, geodesic_rhs, holomorphic_curvature_rate,
                                integrate_geodesic, integrate_jacobi, jacobi_fd_oracle,
                                standard_lift)
from cfinsler.metric import builtin_metric


def test_rhs_examples(euclid2, poincare1, quartic):
    assert np.allclose(geodesic_rhs(euclid2, [0.1, 0.2], [1, 1j]), 0)
    assert geodesic_rhs(poincare1, [0.5], [1.0])[0] == pytest.approx(-4 / 3, rel=1e-13)
    assert np.allclose(geodesic_rhs(quartic, [0.1, 0.2], [1, 0.3j]), 0)


def test_euclidean_line(euclid2):
    sol = integrate_geodesic(euclid2, [0, 0], [1, 0], 1.0)
    assert sol.complete and np.allclose(sol.points[-1], [1, 0], atol=1e-12)


def test_poincare_tanh(poincare1):
    t0 = time.perf_counter()
    sol = integrate_geodesic(poincare1, [0.0], [1.0], 2.0)
    assert time.perf_counter() - t0 < 2.0
    s = np.linspace(0, 2, 41)
    z, _ = sol(s)
    assert np.max(np.abs(np.abs(z[:, 0]) - np.tanh(s))) < 1e-6
    assert sol.speed_drift < 10 * 1e-9 * 2


def test_quartic_affine(quartic):
    z0, v0 = np.array([0.1, -0.2j]), np.array([0.7, 0.4 + 0.2j])
    sol = integrate_geodesic(quartic, z0, v0, 1.0)
    expected = z0[None, :] + sol.times[:, None] * v0[None, :]
    assert np.max(np.abs(sol.points - expected)) < 1e-9


def test_leaving_chart_truncates(poincare1):
    sol = integrate_geodesic(poincare1, [0.0], [1.0], 50.0)
    assert sol.status in ("left chart", "left smooth domain") and not sol.complete
    assert sol.times[-1] < 50


def test_reversibility(poincare2):
    z0, v0 = np.array([0.1, -0.2j]), np.array([0.6, 0.3j])
    fwd = integrate_geodesic(poincare2, z0, v0, 1.0)
    back = integrate_geodesic(poincare2, fwd.points[-1], -fwd.velocities[-1], 1.0)
    assert np.linalg.norm(back.points[-1] - z0) < 100 * 1e-9
    assert np.linalg.norm(-back.velocities[-1] - v0) < 100 * 1e-9


def test_non_weakly_kahler_needs_opt_in(non_kahler):
    with pytest.raises(FinslerError, match="weakly"):
        integrate_geodesic(non_kahler, [0, 0], [1, 0.2], 0.2)
    sol = integrate_geodesic(non_kahler, [0, 0], [1, 0.2], 0.2, allow_non_wk=True)
    assert sol.complete and sol.wk_residual > 1e-3


@settings(max_examples=10)
@given(st.integers(0, 2**31))
def test_speed_conservation(seed):
    rng = np.random.default_rng(seed)
    m = builtin_metric("POINCARE_BALL", 2)
    z0 = 0.3 * (rng.standard_normal(2) + 1j * rng.standard_normal(2)) / 2
    v0 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    v0 /= m.F(z0, v0)
    sol = integrate_geodesic(m, z0, v0, 1.0)
    assert sol.complete and sol.speed_drift < 10 * 1e-9


def test_bvp_examples(euclid2, poincare1, quartic):
    sol = geodesic_bvp(euclid2, [0, 0], [1, 1])
    assert sol.iterations <= 1 and np.allclose(sol.points[-1], [1, 1], atol=1e-10)
    sol = geodesic_bvp(poincare1, [0.0], [0.6])
    assert sol.iterations <= 12 and sol.endpoint_error < 1e-8
    assert sol.velocities[0][0] == pytest.approx(np.arctanh(0.6), abs=1e-7)
    z0, z1 = np.array([0.1, 0.2j]), np.array([-0.3, 0.5])
    sol = geodesic_bvp(quartic, z0, z1)
    assert np.allclose(sol.velocities[0], z1 - z0, atol=1e-9)


def test_bvp_failure_carries_residual(poincare1):
    with pytest.raises(ConvergenceError) as ei:
        geodesic_bvp(poincare1, [0.0], [0.999999], restarts=2, max_iter=2)
    assert ei.value.best_residual > 1e-8


def test_standard_lift_examples(euclid2, poincare2):
    line = integrate_geodesic(euclid2, [0, 0], [1, 0.5j], 1.0)
    lifts = standard_lift(euclid2, line, lambda t: np.array([0.3, 1j]), times=[0.0, 0.5])
    assert all(np.allclose(L.dv, 0, atol=1e-10) for L in lifts)
    diam = integrate_geodesic(poincare2, [0, 0], [1, 0], 0.5)
    (L,) = standard_lift(poincare2, diam, lambda t: np.array([0, t]), times=[0.0])
    assert np.allclose(L.dz, 0) and np.allclose(L.dv, [0, 1], atol=1e-8)


def test_standard_lift_of_velocity_is_tautological(poincare2):
    g = integrate_geodesic(poincare2, [0.1, 0], [0.3, 0.6j], 1.0)
    t = 0.4
    (L,) = standard_lift(poincare2, g, lambda s: g(s)[1], times=[t])
    p = ProjPoint(*g(t))
    ddir = ddt(lambda s: ProjPoint(*g(s)).dir, t)
    ref = ProjTangent.gauge_fixed(poincare2, p, g(t)[1], ddir)
    assert np.allclose(L.dz, ref.dz, atol=1e-8) and np.allclose(L.dv, ref.dv, atol=1e-6)


def test_jacobi_euclidean_linear(euclid2):
    g = integrate_geodesic(euclid2, [0, 0], [1, 0.3], 1.0)
    I0, I1 = np.array([0.2, 1j]), np.array([1.0, -0.5])
    jac = integrate_jacobi(euclid2, g, I0, I1)
    assert np.allclose(jac.I, I0[None] + g.times[:, None] * I1[None], atol=1e-10)


def test_jacobi_poincare_constant_curvature(poincare1):
    kappa2 = holomorphic_curvature_rate(poincare1, [0.0], [1.0])
    assert kappa2 == pytest.approx(4.0, rel=1e-10)
    k = np.sqrt(kappa2)
    g = integrate_geodesic(poincare1, [0.0], [1.0], 1.0)
    jac = integrate_jacobi(poincare1, g, [0.0], [1j])
    z, _ = g(g.times)
    F = np.abs(jac.I[:, 0]) / (1 - np.abs(z[:, 0]) ** 2)
    assert np.max(np.abs(F - np.sinh(k * g.times) / k)) < 1e-7
    assert jac.residual < 1e-6


def test_jacobi_tangential(poincare2):
    g = integrate_geodesic(poincare2, [0.1, 0.2j], [0.5, 0.2], 1.0)
    a, b = 0.7, -0.3
    u0 = g.velocities[0]
    # I0_dot is the coordinate derivative of (a + b t) gamma' at t = 0
    jac = integrate_jacobi(poincare2, g, a * u0, b * u0 + a * _acc(poincare2, g))
    expected = (a + b * g.times)[:, None] * g.velocities
    assert np.max(np.abs(jac.I - expected)) < 1e-7


def _acc(m, g):
    return geodesic_rhs(m, g.points[0], g.velocities[0])


def test_jacobi_linearity(quartic, poincare2):
    for m in (quartic, poincare2):
        g = integrate_geodesic(m, [0.1, 0.0], [0.6, 0.4j], 1.0)
        a0, a1 = np.array([0.1, 0.2j]), np.array([1.0, 0.0])
        b0, b1 = np.array([0.0, 1.0]), np.array([0.3j, -0.2])
        A = integrate_jacobi(m, g, a0, a1)
        B = integrate_jacobi(m, g, b0, b1)
        C = integrate_jacobi(m, g, a0 + 2 * b0, a1 + 2 * b1)
        assert np.max(np.abs(C.I - A.I - 2 * B.I)) < 1e-9


@pytest.mark.parametrize("name,n", [("POINCARE_BALL", 1), ("POINCARE_BALL", 2), ("QUARTIC", None)])
def test_jacobi_matches_family(name, n):
    m = builtin_metric(name, n)
    z0 = np.zeros(m.dimension, dtype=complex)
    v0 = np.ones(m.dimension, dtype=complex) * 0.6
    v0[0] = 0.7
    I0 = 0.3j * np.ones(m.dimension)
    I1 = np.ones(m.dimension, dtype=complex)
    g = integrate_geodesic(m, z0, v0, 1.0)
    jac = integrate_jacobi(m, g, I0, I1)
    ts, field = jacobi_fd_oracle(m, z0, v0, I0, I1, 1.0, 1e-3, times=g.times, rtol=1e-12, atol=1e-14)
    err = np.max(np.abs(field - jac.I)) / np.max(np.abs(jac.I))
    assert err < 1e-3


def test_fd_oracle_step_range(euclid2):
    with pytest.raises(ValueError):
        jacobi_fd_oracle(euclid2, [0, 0], [1, 0], [0, 1], [0, 0], 1.0, 0.1)
    ts, f = jacobi_fd_oracle(euclid2, [0, 0], [1, 0], [0, 1], [1, 0], 1.0, 1e-3)
    assert np.allclose(f, np.array([0, 1])[None] + ts[:, None] * np.array([1, 0])[None], atol=1e-9)
