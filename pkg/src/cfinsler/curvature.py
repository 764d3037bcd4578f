"""Torsion and curvature of the Kobayashi connection and the weakly-Kähler test.

Total-space coordinates are ``w = (z, v)``; a tangent vector to the
projectivized bundle is represented by its (1,0) components ``(dz, dv)``.
The connection matrix along ``dw^a`` is ``theta_a[i, j] = gamma[i, j, a]``
for base directions and ``c[i, j, a - n]`` for fiber directions, and the
curvature is ``K(X, Y) = sum_{a,b} d theta_a / d wbar^b (conj(x^b) y^a - conj(y^b) x^a)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .connection import (ConnectionCoefficients, ProjPoint, ProjTangent, coefficients_from_jet,
                         connection_coefficients, connection_term, ddt, horizontal_velocity)
from .frames import adapted_frame
from .linalg import as_cvector
from .metric import FinslerMetric, sample_point
from .tensors import jet


def _parts(t) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(t, ProjTangent):
        return np.asarray(t.dz), np.asarray(t.dv)
    dz, dv = t
    return as_cvector(dz), as_cvector(dv)


def _point(p) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(p, ProjPoint):
        return np.asarray(p.z), np.asarray(p.dir)
    z, v = p
    return as_cvector(z), as_cvector(v)


@dataclass(frozen=True)
class TorsionValue:
    total: np.ndarray
    pure_part: np.ndarray
    finsler_part: np.ndarray


def _torsion_closed(cc: ConnectionCoefficients, X, a, Y, b) -> np.ndarray:
    g = cc.gamma
    return (np.einsum("ijk,j,k->i", g, Y, X) - np.einsum("ijk,j,k->i", g, X, Y)
            + np.einsum("ijk,j,k->i", cc.c, Y, a) - np.einsum("ijk,j,k->i", cc.c, X, b))


def torsion(metric: FinslerMetric, p, Xh, Yh, *, cc: ConnectionCoefficients | None = None) -> TorsionValue:
    """``D_X Y - D_Y X`` for coordinate-constant extensions of the projections.

    ``Xh`` and ``Yh`` are ``ProjTangent`` or ``(dz, dv)`` pairs relative to
    the representative of ``p``.
    """
    z, v = _point(p)
    if cc is None:
        cc = connection_coefficients(metric, z, v)
    X, a = _parts(Xh)
    Y, b = _parts(Yh)
    total = _torsion_closed(cc, X, a, Y, b)
    ah = -np.einsum("ijk,j,k->i", cc.gamma, v, X)
    bh = -np.einsum("ijk,j,k->i", cc.gamma, v, Y)
    pure = _torsion_closed(cc, X, ah, Y, bh)
    return TorsionValue(total, pure, total - pure)


def torsion_from_fields(metric: FinslerMetric, z, v, Xfield: Callable, Yfield: Callable,
                        h: float = 1e-3) -> np.ndarray:
    """Torsion from arbitrary vector fields on the total space, by finite differences.

    A field maps ``(z, v)`` to ``(dz, dv)``.  Computes
    ``D_X (pi Y) - D_Y (pi X) - pi [X, Y]`` with every derivative taken
    numerically along the flow lines through ``(z, v)``.
    """
    z, v = as_cvector(z), as_cvector(v)
    cc = connection_coefficients(metric, z, v)
    X, a = (as_cvector(c) for c in Xfield(z, v))
    Y, b = (as_cvector(c) for c in Yfield(z, v))

    def along(field, dz, dv):
        return ddt(lambda s: as_cvector(field(z + s * dz, v + s * dv)[0]), 0.0, h)

    dY_X = along(Yfield, X, a)
    dX_Y = along(Xfield, Y, b)
    DXY = dY_X + connection_term(cc, Y, X, a)
    DYX = dX_Y + connection_term(cc, X, Y, b)
    bracket = dY_X - dX_Y
    return DXY - DYX - bracket


@dataclass(frozen=True)
class CurvatureValue:
    omega_part: np.ndarray
    pi_part: np.ndarray
    phi_part: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.omega_part + self.pi_part + self.phi_part

    def apply(self, Z) -> "CurvatureValue":
        Z = as_cvector(Z)
        return CurvatureValue(self.omega_part @ Z, self.pi_part @ Z, self.phi_part @ Z)


@dataclass(frozen=True, eq=False)
class CurvatureData:
    """``dtheta[b, a] = d theta_a / d wbar^b`` together with the connection."""

    cc: ConnectionCoefficients
    dtheta: np.ndarray  # [b, a, i, j]

    def K(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        w = np.outer(x.conj(), y) - np.outer(y.conj(), x)  # [b, a]
        return np.einsum("ba,baij->ij", w, self.dtheta)


def curvature_data(metric: FinslerMetric, z, v) -> CurvatureData:
    mj = jet(metric, z, v, 4)
    cc = coefficients_from_jet(mj)
    n = mj.n
    M = cc.ginv
    dg = {}
    for grp in ("z", "v", "zbar", "vbar"):
        dg[grp] = mj.tensor("v", "vbar", grp)  # [j, l, a]
    theta = [cc.gamma[:, :, a] for a in range(n)] + [cc.c[:, :, a] for a in range(n)]
    d2 = {(ag, bg): mj.tensor("v", "vbar", ag, bg) for ag in ("z", "v") for bg in ("zbar", "vbar")}
    out = np.empty((2 * n, 2 * n, n, n), dtype=complex)
    for bi in range(2 * n):
        bg, bk = ("zbar", bi) if bi < n else ("vbar", bi - n)
        dgb = dg[bg][:, :, bk]
        for ai in range(2 * n):
            ag, ak = ("z", ai) if ai < n else ("v", ai - n)
            dgab = d2[(ag, bg)][:, :, ak, bk]
            out[bi, ai] = M.T @ (dgab.T - dgb.T @ theta[ai])
    return CurvatureData(cc, out)


def _split(cc: ConnectionCoefficients, X, a):
    ah = -np.einsum("ijk,j,k->i", cc.gamma, cc.v, X)
    zero = np.zeros_like(X)
    return np.concatenate([X, ah]), np.concatenate([zero, a - ah])


def curvature(metric: FinslerMetric, p, Xh, Yh, Z=None, *, data: CurvatureData | None = None) -> CurvatureValue:
    """Curvature operator split into base-base, mixed, and fiber-fiber blocks.

    With ``Z`` the operators are applied to it.
    """
    z, v = _point(p)
    if data is None:
        data = curvature_data(metric, z, v)
    X, a = _parts(Xh)
    Y, b = _parts(Yh)
    xh, xv = _split(data.cc, X, a)
    yh, yv = _split(data.cc, Y, b)
    val = CurvatureValue(data.K(xh, yh), data.K(xh, yv) + data.K(xv, yh), data.K(xv, yv))
    return val if Z is None else val.apply(Z)


# frame components -------------------------------------------------------------


def _horizontal_frame(metric, z, v):
    fr = adapted_frame(metric, z, v)
    E = fr.matrix
    cc = connection_coefficients(metric, z, v)
    lifts = [np.concatenate([E[:, k], -np.einsum("ijk,j,k->i", cc.gamma, cc.v, E[:, k])])
             for k in range(E.shape[1])]
    return E, lifts, cc


def torsion_components(metric: FinslerMetric, z, v) -> np.ndarray:
    """``T[alpha, beta, gamma]``: frame components of the torsion on horizontal lifts of ``e_beta, e_gamma``."""
    E, lifts, cc = _horizontal_frame(metric, z, v)
    n = E.shape[0]
    Einv = np.linalg.inv(E)
    T = np.zeros((n, n, n), dtype=complex)
    for b, lb in enumerate(lifts):
        for c, lc in enumerate(lifts):
            T[:, b, c] = Einv @ _torsion_closed(cc, lb[:n], lb[n:], lc[:n], lc[n:])
    return T


def curvature_components(metric: FinslerMetric, z, v) -> np.ndarray:
    """``R[alpha, beta, gamma, delta]``: coefficient of ``theta^gamma ^ conj(theta^delta)``.

    Computed as ``sum_{a,b} dtheta[b, a] l_gamma^a conj(l_delta^b)`` on the
    horizontal lifts ``l`` of the frame vectors, conjugated into the frame.
    """
    z, v = as_cvector(z), as_cvector(v)
    E, lifts, _ = _horizontal_frame(metric, z, v)
    data = curvature_data(metric, z, v)
    n = E.shape[0]
    Einv = np.linalg.inv(E)
    R = np.zeros((n, n, n, n), dtype=complex)
    for c, lc in enumerate(lifts):
        for d, ld in enumerate(lifts):
            op = np.einsum("b,a,baij->ij", ld.conj(), lc, data.dtheta)
            R[:, :, c, d] = Einv @ op @ E
    return R


# weakly Kähler --------------------------------------------------------------------


@dataclass(frozen=True)
class WeaklyKahlerReport:
    passed: bool
    max_residual: float
    samples: int
    tol: float


def weakly_kahler_residual(metric: FinslerMetric, z, v, Xh) -> float:
    """``|g_v(T(X, U_h), U)|`` with ``U_h`` the horizontal lift of the unit representative ``U``."""
    z, v = as_cvector(z), as_cvector(v)
    U = v / np.linalg.norm(v)
    cc = connection_coefficients(metric, z, U)
    Uh = (U, horizontal_velocity(metric, z, U, U))
    T = torsion(metric, (z, U), Xh, Uh, cc=cc).total
    return abs(2.0 * (T @ cc.g @ U.conj()).real)


def weakly_kahler_check(metric: FinslerMetric, samples: int = 50, seed: int = 0,
                        tol: float = 1e-8, radius: float = 0.5) -> WeaklyKahlerReport:
    rng = np.random.default_rng(seed)
    n = metric.dimension
    worst = 0.0
    for _ in range(samples):
        z, v = sample_point(metric, rng, radius)
        X = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        X /= np.linalg.norm(X)
        a /= np.linalg.norm(a)
        worst = max(worst, weakly_kahler_residual(metric, z, v, (X, a)))
    return WeaklyKahlerReport(bool(worst < tol), float(worst), samples, tol)


# holonomy --------------------------------------------------------------------------


def _transport_leg(metric, w0, dw, Y, steps):
    n = metric.dimension

    def rhs(s, Y):
        w = w0 + s * dw
        cc = connection_coefficients(metric, w[:n], w[n:])
        return -connection_term_matrix(cc, dw) @ Y

    h = 1.0 / steps
    s = 0.0
    for _ in range(steps):
        k1 = rhs(s, Y)
        k2 = rhs(s + h / 2, Y + h / 2 * k1)
        k3 = rhs(s + h / 2, Y + h / 2 * k2)
        k4 = rhs(s + h, Y + h * k3)
        Y = Y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s += h
    return Y


def connection_term_matrix(cc: ConnectionCoefficients, dw) -> np.ndarray:
    n = cc.v.shape[0]
    return np.einsum("ijk,k->ij", cc.gamma, dw[:n]) + np.einsum("ijk,k->ij", cc.c, dw[n:])


def square_holonomy(metric: FinslerMetric, z, v, Xh, Yh, eps: float, steps: int = 4) -> np.ndarray:
    """Parallel transport matrix around the parallelogram ``eps X``, ``eps Y`` based at ``(z, v)``."""
    z, v = as_cvector(z), as_cvector(v)
    x = np.concatenate(_parts(Xh))
    y = np.concatenate(_parts(Yh))
    w0 = np.concatenate([z, v])
    P = np.eye(metric.dimension, dtype=complex)
    corners = [w0, w0 + eps * x, w0 + eps * x + eps * y, w0 + eps * y]
    legs = [eps * x, eps * y, -eps * x, -eps * y]
    for start, d in zip(corners, legs):
        P = _transport_leg(metric, start, d, P, steps)
    return P


def holonomy_defect(metric: FinslerMetric, z, v, Xh, Yh, eps: float, steps: int = 4) -> float:
    """``|| P - I + eps^2 K(X, Y) ||`` for the transport around the square.

    Transport solves ``dY/ds = -theta(w') Y``, so the loop ``X`` then ``Y``
    returns ``I - eps^2 K(X, Y)`` up to ``O(eps^3)``.
    """
    P = square_holonomy(metric, z, v, Xh, Yh, eps, steps)
    K = curvature(metric, (z, v), Xh, Yh).total
    return float(np.linalg.norm(P - np.eye(P.shape[0]) + eps**2 * K))


__all__ = [
    "TorsionValue", "CurvatureValue", "CurvatureData", "WeaklyKahlerReport", "torsion",
    "torsion_from_fields", "curvature", "curvature_data", "torsion_components",
    "curvature_components", "weakly_kahler_check", "weakly_kahler_residual", "square_holonomy",
    "holonomy_defect",
]
