"""Geodesics, two-point shooting, standard lifts and Jacobi fields.

Along the tautological lift the geodesic law ``D_{v'} gamma' = 0`` closes as

    z'' = -sum gamma[i, j, k](z, z') z'^j z'^k

because the fiber block is annihilated by the velocity.  Jacobi fields are
integrated as the pair ``(I, P)`` with ``P = D_L gamma'`` the covariant
derivative of the velocity along the variation ``L = (I, I')``::

    I' = P - gamma(u, I)
    P' = -theta(v') P + K(v', L) u

which is the exact linearization of the geodesic flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import RK45
from scipy.interpolate import CubicHermiteSpline

from .connection import ProjPoint, ProjTangent, connection_coefficients, ddt
from .curvature import curvature_data, torsion, weakly_kahler_check
from .errors import ConvergenceError, FinslerError
from .linalg import as_cvector
from .metric import FinslerMetric

RTOL = 1e-9
ATOL = 1e-11
WK_TOL = 1e-8


def _pack(z, u) -> np.ndarray:
    return np.concatenate([z.real, z.imag, u.real, u.imag])


def _unpack(y: np.ndarray, n: int):
    return y[:n] + 1j * y[n:2 * n], y[2 * n:3 * n] + 1j * y[3 * n:4 * n]


def _quad(gamma: np.ndarray, a, b) -> np.ndarray:
    """``sum gamma[i, j, k] a^j b^k``."""
    return np.einsum("ijk,j,k->i", gamma, a, b)


def geodesic_rhs(metric: FinslerMetric, z, v) -> np.ndarray:
    """Coordinate acceleration of the geodesic through ``(z, v)``."""
    cc = connection_coefficients(metric, z, v)
    return -_quad(cc.gamma, cc.v, cc.v)


@lru_cache(maxsize=64)
def _weakly_kahler(metric: FinslerMetric) -> bool:
    return weakly_kahler_check(metric, samples=16, seed=0, tol=WK_TOL).passed


def _require_wk(metric: FinslerMetric, allow_non_wk: bool):
    if not allow_non_wk and not _weakly_kahler(metric):
        raise FinslerError(
            f"{metric.name} is not weakly Kähler; pass allow_non_wk=True to integrate anyway"
        )


@dataclass(frozen=True, eq=False)
class GeodesicSolution:
    times: np.ndarray
    points: np.ndarray  # (m, n) complex
    velocities: np.ndarray  # (m, n) complex
    speed_drift: float
    wk_residual: float
    status: str = "ok"
    iterations: int = 0  # Newton iterations when produced by shooting
    endpoint_error: float = 0.0
    metric: FinslerMetric | None = field(default=None, repr=False)
    _spline: CubicHermiteSpline | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def complete(self) -> bool:
        return self.status == "ok"

    def __call__(self, t):
        """Dense ``(z, z')`` at time(s) ``t``."""
        y = self._spline(t)
        n = self.n
        y = np.moveaxis(np.asarray(y), -1, 0) if np.ndim(t) else y
        z = y[:n] + 1j * y[n:2 * n]
        u = y[2 * n:3 * n] + 1j * y[3 * n:4 * n]
        return (z.T, u.T) if np.ndim(t) else (z, u)


def _wk_along(metric, z, u) -> float:
    """Max torsion pairing over a real basis of tangent directions."""
    n = metric.dimension
    nu = np.linalg.norm(u)
    U = u / nu
    cc = connection_coefficients(metric, z, U)
    Uh = (U, -_quad(cc.gamma, cc.v, U))
    worst = 0.0
    for k in range(n):
        for s in (1.0, 1j):
            e = np.zeros(n, dtype=complex)
            e[k] = s
            for X in ((e, np.zeros(n)), (np.zeros(n, dtype=complex), e)):
                T = torsion(metric, (z, U), X, Uh, cc=cc).total
                worst = max(worst, abs(2.0 * (T @ cc.g @ U.conj()).real))
    return worst


def _integrate(fun, y0, t_end, rtol, atol, inside: Callable, max_steps: int = 200000):
    """RK45 stepping with a domain check after every accepted step.

    Returns times, states, derivatives and a status string; the last
    state is always inside the domain.
    """
    ts, ys, fs = [0.0], [np.array(y0, dtype=float)], [fun(0.0, y0)]
    if t_end == 0:
        return np.array(ts), np.array(ys), np.array(fs), "ok"
    solver = RK45(fun, 0.0, y0, t_end, rtol=rtol, atol=atol)
    status = "ok"
    for _ in range(max_steps):
        if solver.status != "running":
            break
        try:
            msg = solver.step()
        except FinslerError:
            status = "left smooth domain"
            break
        if msg is not None or solver.status == "failed":
            status = f"integrator failed: {msg}"
            break
        y = solver.y.copy()
        if not inside(y):
            status = "left chart"
            break
        ts.append(solver.t)
        ys.append(y)
        fs.append(fun(solver.t, y))
    else:
        status = "step limit"
    return np.array(ts), np.array(ys), np.array(fs), status


def integrate_geodesic(metric: FinslerMetric, z0, v0, t_end: float = 1.0, tol: float = RTOL, *,
                       atol: float = ATOL, allow_non_wk: bool = False, wk_samples: int = 8) -> GeodesicSolution:
    """Adaptive RK45 on ``(z, z')`` with dense cubic Hermite output.

    Leaving the chart or the smooth domain truncates the run and sets
    ``status``.  ``wk_residual`` is the torsion pairing of the weakly-Kähler
    condition sampled at ``wk_samples`` points along the solution.
    """
    z0, v0 = metric.check_point(z0, v0)
    if np.linalg.norm(v0) == 0:
        raise FinslerError("initial velocity must be nonzero")
    _require_wk(metric, allow_non_wk)
    n = metric.dimension

    def fun(t, y):
        z, u = _unpack(y, n)
        return _pack(u, geodesic_rhs(metric, z, u))

    def inside(y):
        z, u = _unpack(y, n)
        return metric.in_domain(z, u)

    ts, ys, fs, status = _integrate(fun, _pack(z0, v0), float(t_end), tol, atol, inside)
    return _solution(metric, ts, ys, fs, status, wk_samples)


def _solution(metric, ts, ys, fs, status, wk_samples) -> GeodesicSolution:
    n = metric.dimension
    zs = ys[:, :n] + 1j * ys[:, n:2 * n]
    us = ys[:, 2 * n:3 * n] + 1j * ys[:, 3 * n:4 * n]
    speeds = np.array([metric.F(z, u) for z, u in zip(zs, us)])
    drift = float(np.max(np.abs(speeds - speeds[0])))
    picks = np.unique(np.linspace(0, len(ts) - 1, min(wk_samples, len(ts))).astype(int))
    wk = max((_wk_along(metric, zs[i], us[i]) for i in picks), default=0.0)
    spline = CubicHermiteSpline(ts, ys, fs, axis=0) if len(ts) > 1 else None
    return GeodesicSolution(ts, zs, us, drift, float(wk), status=status, metric=metric, _spline=spline)


# two-point problem --------------------------------------------------------------


def geodesic_bvp(metric: FinslerMetric, z0, z1, tol: float = 1e-8, *, t_end: float = 1.0,
                 max_iter: int = 12, restarts: int = 8, seed: int = 0,
                 allow_non_wk: bool = False) -> GeodesicSolution:
    """Damped Newton shooting on the initial velocity.

    The Jacobian columns are Jacobi fields with ``I(0) = 0`` and initial
    derivative along each real direction of the velocity.
    """
    z0, z1 = metric.check_point(z0, z1)
    if np.allclose(z0, z1, rtol=0, atol=1e-14):
        raise FinslerError("endpoints must differ")
    _require_wk(metric, allow_non_wk)
    n = metric.dimension
    rng = np.random.default_rng(seed)
    base = (z1 - z0) / t_end
    best = (np.inf, None)
    for attempt in range(restarts):
        v = base if attempt == 0 else base * (1 + 0.3 * rng.standard_normal()) + \
            0.3 * np.linalg.norm(base) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        try:
            sol, res = _newton(metric, z0, z1, v, t_end, tol, max_iter)
        except FinslerError:
            continue
        if res < best[0]:
            best = (res, sol)
        if res < tol:
            return sol
    raise ConvergenceError(f"shooting did not converge after {restarts} restarts", float(best[0]))


def _endpoint(metric, z0, v, t_end):
    sol = integrate_geodesic(metric, z0, v, t_end, allow_non_wk=True, wk_samples=1)
    if not sol.complete:
        raise FinslerError(sol.status)
    return sol


def _newton(metric, z0, z1, v, t_end, tol, max_iter):
    n = metric.dimension
    sol = _endpoint(metric, z0, v, t_end)
    r = sol.points[-1] - z1
    res = float(np.linalg.norm(r))
    iters = 0
    while res >= tol and iters < max_iter:
        cols = []
        for k in range(n):
            for s in (1.0, 1j):
                d = np.zeros(n, dtype=complex)
                d[k] = s
                I = integrate_jacobi(metric, sol, np.zeros(n), d, check=False).I[-1]
                cols.append(np.concatenate([I.real, I.imag]))
        J = np.column_stack(cols)
        step = np.linalg.lstsq(J, -np.concatenate([r.real, r.imag]), rcond=None)[0]
        dv = step[0::2] + 1j * step[1::2]
        iters += 1
        alpha = 1.0
        while alpha > 1e-4:
            try:
                trial = _endpoint(metric, z0, v + alpha * dv, t_end)
                rt = trial.points[-1] - z1
                if np.linalg.norm(rt) < (1 - 1e-4 * alpha) * res:
                    break
            except FinslerError:
                pass
            alpha /= 2
        else:
            break
        v = v + alpha * dv
        sol, r = trial, rt
        res = float(np.linalg.norm(r))
    return replace(sol, iterations=iters, endpoint_error=res), res


# standard lift and Jacobi fields -----------------------------------------------------


def standard_lift(metric: FinslerMetric, gamma: GeodesicSolution, X: Callable, times=None,
                  h: float = 1e-4) -> list[ProjTangent]:
    """``(dz, dv) = (X, X')`` at each time, gauge-fixed at ``[gamma']``.

    ``dv`` is rescaled to the canonical representative of the direction.
    """
    times = gamma.times if times is None else np.asarray(times, dtype=float)
    out = []
    for t in times:
        z, u = gamma(t)
        p = ProjPoint(z, u)
        k = int(np.flatnonzero(np.abs(u) == np.abs(u).max())[0])
        c = u[k]
        Xt = as_cvector(X(t))
        dX = ddt(lambda s: as_cvector(X(s)), t, h)
        out.append(ProjTangent.gauge_fixed(metric, p, Xt, dX / c))
    return out


@dataclass(frozen=True, eq=False)
class JacobiSolution:
    times: np.ndarray
    I: np.ndarray  # (m, n)
    I_dot: np.ndarray  # covariant derivative D_{v'} I
    residual: float
    coord_dot: np.ndarray = field(default=None, repr=False)  # coordinate derivative I'


def _jacobi_terms(metric, z, u, I, Idot):
    data = curvature_data(metric, z, u)
    cc = data.cc
    acc = -_quad(cc.gamma, cc.v, cc.v)
    theta = np.einsum("ijk,k->ij", cc.gamma, u) + np.einsum("ijk,k->ij", cc.c, acc)
    vdot = np.concatenate([u, acc])
    L = np.concatenate([I, Idot])
    return cc, acc, theta, data.K(vdot, L) @ u


def integrate_jacobi(metric: FinslerMetric, gamma: GeodesicSolution, I0, I0_dot, *,
                     rtol: float = RTOL, atol: float = ATOL, check: bool = True) -> JacobiSolution:
    """Jacobi field along ``gamma`` with ``I(0) = I0`` and coordinate derivative ``I'(0) = I0_dot``.

    Integrated jointly with the geodesic and reported on ``gamma.times``;
    ``I_dot`` holds the covariant derivative along the tautological lift.
    """
    n = metric.dimension
    z0, u0 = gamma.points[0], gamma.velocities[0]
    I0 = as_cvector(I0, n, "I0")
    I0_dot = as_cvector(I0_dot, n, "I0_dot")
    cc0 = connection_coefficients(metric, z0, u0)
    P0 = I0_dot + _quad(cc0.gamma, u0, I0)

    def fun(t, y):
        z, u = _unpack(y[:4 * n], n)
        I, P = _unpack(y[4 * n:], n)
        cc = connection_coefficients(metric, z, u)
        Idot = P - _quad(cc.gamma, u, I)
        cc, acc, theta, KL = _jacobi_terms(metric, z, u, I, Idot)
        Pdot = -theta @ P + KL
        return np.concatenate([_pack(u, acc), _pack(Idot, Pdot)])

    y0 = np.concatenate([_pack(z0, u0), _pack(I0, P0)])
    t_end = float(gamma.times[-1])
    if t_end == 0:
        ts = np.array([0.0])
        ys = y0[None, :]
    else:
        from scipy.integrate import solve_ivp

        out = solve_ivp(fun, (0.0, t_end), y0, method="RK45", rtol=rtol, atol=atol,
                        t_eval=gamma.times, dense_output=check)
        if not out.success:
            raise FinslerError(f"Jacobi integration failed: {out.message}")
        ts, ys = out.t, out.y.T
    Is, Ps = [], []
    Idots, Ds = [], []
    for y in ys:
        z, u = _unpack(y[:4 * n], n)
        I, P = _unpack(y[4 * n:], n)
        cc = connection_coefficients(metric, z, u)
        Idot = P - _quad(cc.gamma, u, I)
        acc = -_quad(cc.gamma, cc.v, cc.v)
        theta = np.einsum("ijk,k->ij", cc.gamma, u) + np.einsum("ijk,k->ij", cc.c, acc)
        Is.append(I)
        Idots.append(Idot)
        Ds.append(Idot + theta @ I)
    residual = 0.0
    if check and t_end > 0:
        residual = _jacobi_residual(metric, out.sol, n, t_end)
    return JacobiSolution(ts, np.array(Is), np.array(Ds), residual, np.array(Idots))


def _jacobi_residual(metric, dense, n, t_end, samples: int = 9) -> float:
    """Post-hoc defect of ``P' + theta P - K(v', L) u`` from the dense output.

    ``P'`` is differentiated numerically; the curvature operator is the one
    exported by the curvature module, evaluated afresh.
    """
    h = min(1e-3, t_end / 20)
    worst = 0.0
    for t in np.linspace(2 * h, t_end - 2 * h, samples):
        def P_at(s):
            y = dense(s)
            z, u = _unpack(y[:4 * n], n)
            I, P = _unpack(y[4 * n:], n)
            return P

        y = dense(t)
        z, u = _unpack(y[:4 * n], n)
        I, P = _unpack(y[4 * n:], n)
        data = curvature_data(metric, z, u)
        cc = data.cc
        acc = -_quad(cc.gamma, cc.v, cc.v)
        Idot = P - _quad(cc.gamma, u, I)
        theta = np.einsum("ijk,k->ij", cc.gamma, u) + np.einsum("ijk,k->ij", cc.c, acc)
        lhs = ddt(P_at, t, h) + theta @ P
        rhs = data.K(np.concatenate([u, acc]), np.concatenate([I, Idot])) @ u
        scale = max(1.0, float(np.linalg.norm(P)))
        worst = max(worst, float(np.linalg.norm(lhs - rhs)) / scale)
    return worst


def jacobi_fd_oracle(metric: FinslerMetric, z0, v0, I0, I0_dot, t_end: float = 1.0,
                     s_step: float = 1e-3, *, times=None, rtol: float = RTOL,
                     atol: float = ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Central difference of the geodesic family through ``z0 +- s I0`` with velocity ``v0 +- s I0_dot``.

    Returns ``(times, field)``.
    """
    if not 1e-5 <= s_step <= 1e-2:
        raise ValueError("s_step must lie in [1e-5, 1e-2]")
    z0, v0 = metric.check_point(z0, v0)
    I0 = as_cvector(I0, metric.dimension)
    I0_dot = as_cvector(I0_dot, metric.dimension)
    plus = integrate_geodesic(metric, z0 + s_step * I0, v0 + s_step * I0_dot, t_end, rtol,
                              atol=atol, allow_non_wk=True, wk_samples=1)
    minus = integrate_geodesic(metric, z0 - s_step * I0, v0 - s_step * I0_dot, t_end, rtol,
                               atol=atol, allow_non_wk=True, wk_samples=1)
    if not (plus.complete and minus.complete):
        raise FinslerError("a member of the geodesic family left the domain")
    if times is None:
        times = np.linspace(0.0, t_end, 21)
    times = np.asarray(times, dtype=float)
    return times, (plus(times)[0] - minus(times)[0]) / (2 * s_step)


def holomorphic_curvature_rate(metric: FinslerMetric, z, v) -> float:
    """``kappa^2 = -g_v(K(X, JX) JX, X) / g_v(X, X)`` for ``X = v / F(v)`` lifted horizontally."""
    z, v = metric.check_point(z, v)
    X = v / metric.F(z, v)
    data = curvature_data(metric, z, X)
    cc = data.cc
    xh = np.concatenate([X, -_quad(cc.gamma, cc.v, X)])
    jxh = 1j * xh
    R = data.K(xh, jxh) @ (1j * X)
    gv = lambda a, b: float(2.0 * (a @ cc.g @ b.conj()).real)
    return -gv(R, X) / gv(X, X)
