"""Bundle metric on the pulled-back tangent bundle and its two connections.

A path in the projectivized tangent bundle is given by any representative
curve ``t -> (z(t), v(t))``; sections are curves ``t -> Y(t)`` of (1,0)
coordinate vectors.  Coefficient conventions::

    gamma[i, j, k] = sum_l dg[j, l]/dz^k  ginv[l, i]
    c[i, j, k]     = sum_l dg[j, l]/dv^k  ginv[l, i]
    (D Y)^i = dY^i/dt + sum (gamma[i, j, k] dz^k + c[i, j, k] dv^k) Y^j
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import FinslerError, SingularMetricError
from .frames import adapted_frame, frame_tensors
from .linalg import ChartPoint, as_cvector
from .metric import FinslerMetric
from .tensors import MetricJet, jet, vertical_derivative

COND_LIMIT = 1e12
STENCIL_STEP = 1e-4


def canonical_direction(v) -> np.ndarray:
    """Rescale so the largest-modulus component is 1 (lowest index on ties)."""
    v = as_cvector(v)
    mags = np.abs(v)
    if mags.max() == 0:
        raise FinslerError("direction must be nonzero")
    k = int(np.flatnonzero(mags == mags.max())[0])
    out = v / v[k]
    out[k] = 1.0
    return out


@dataclass(frozen=True, eq=False)
class ProjPoint:
    base: ChartPoint
    dir: np.ndarray

    def __post_init__(self):
        if not isinstance(self.base, ChartPoint):
            object.__setattr__(self, "base", ChartPoint(self.base))
        d = canonical_direction(as_cvector(self.dir, self.base.n, "dir"))
        d.setflags(write=False)
        object.__setattr__(self, "dir", d)

    @property
    def z(self) -> np.ndarray:
        return self.base.z


@dataclass(frozen=True, eq=False)
class ProjTangent:
    """Tangent vector to the projectivized bundle at ``at``.

    ``dv`` is the fiber velocity of the canonical representative with its
    component along ``at.dir`` removed under ``g``.
    """

    at: ProjPoint
    dz: np.ndarray
    dv: np.ndarray

    @classmethod
    def gauge_fixed(cls, metric: FinslerMetric, at: ProjPoint, dz, dv) -> "ProjTangent":
        g = _fiber_metric(metric, at.z, at.dir)
        u = at.dir
        dv = as_cvector(dv, at.base.n, "dv")
        dv = dv - (dv @ g @ u.conj()) / (u @ g @ u.conj()) * u
        return cls(at, as_cvector(dz, at.base.n, "dz"), dv)


def _fiber_metric(metric, z, v) -> np.ndarray:
    return jet(metric, z, v, 2, fiber_only=True).tensor("v", "vbar")


def pullback_metric(metric: FinslerMetric, p: ProjPoint) -> Callable[[np.ndarray, np.ndarray], float]:
    """``(X, Y) -> 2 Re sum g_{j kbar}(z, U) X^j conj(Y^k)`` with ``U = p.dir``."""
    g = _fiber_metric(metric, p.z, p.dir)

    def form(X, Y) -> float:
        return float(2.0 * (as_cvector(X) @ g @ as_cvector(Y).conj()).real)

    return form


@dataclass(frozen=True, eq=False)
class ConnectionCoefficients:
    gamma: np.ndarray
    c: np.ndarray
    z: np.ndarray
    v: np.ndarray
    g: np.ndarray
    ginv: np.ndarray

    def apply(self, Y, dz, dv) -> np.ndarray:
        """Connection term ``sum (gamma dz + c dv) Y``."""
        return connection_term(self, Y, dz, dv)

    def euler_residual(self) -> float:
        scale = max(1.0, float(np.max(np.abs(self.c))) * float(np.linalg.norm(self.v)))
        return float(np.max(np.abs(np.einsum("ijk,j->ik", self.c, self.v)))) / scale


def connection_term(cc: ConnectionCoefficients, Y, dz, dv) -> np.ndarray:
    return (np.einsum("ijk,j,k->i", cc.gamma, Y, dz)
            + np.einsum("ijk,j,k->i", cc.c, Y, dv))


def coefficients_from_jet(mj: MetricJet) -> ConnectionCoefficients:
    g = mj.tensor("v", "vbar")
    cond = np.linalg.cond(g)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMetricError(float(cond))
    ginv = np.linalg.inv(g)
    dgz = mj.tensor("v", "vbar", "z")  # [j, l, k]
    dgv = mj.tensor("v", "vbar", "v")
    gamma = np.einsum("jlk,li->ijk", dgz, ginv)
    c = np.einsum("jlk,li->ijk", dgv, ginv)
    return ConnectionCoefficients(gamma, c, mj.z, mj.v, g, ginv)


def connection_coefficients(metric: FinslerMetric, z, v, *, guard: bool = True) -> ConnectionCoefficients:
    return coefficients_from_jet(jet(metric, z, v, 3, guard=guard))


# paths ---------------------------------------------------------------------


def ddt(f: Callable, t0: float, h: float = STENCIL_STEP):
    """Fourth-order central difference of an array-valued function."""
    return (-np.asarray(f(t0 + 2 * h)) + 8 * np.asarray(f(t0 + h))
            - 8 * np.asarray(f(t0 - h)) + np.asarray(f(t0 - 2 * h))) / (12 * h)


def path_velocity(path: Callable, t0: float, h: float = STENCIL_STEP):
    dz = ddt(lambda t: np.asarray(path(t)[0], dtype=complex), t0, h)
    dv = ddt(lambda t: np.asarray(path(t)[1], dtype=complex), t0, h)
    return dz, dv


def tautological_derivative(cc: ConnectionCoefficients, dz, dv) -> np.ndarray:
    """``D U`` for the representative ``U = v`` itself."""
    return dv + np.einsum("ijk,j,k->i", cc.gamma, cc.v, dz)


def covariant_derivative_D(metric: FinslerMetric, path: Callable, section: Callable, t0: float,
                           h: float = STENCIL_STEP) -> np.ndarray:
    z, v = (as_cvector(a) for a in path(t0))
    dz, dv = path_velocity(path, t0, h)
    Y = as_cvector(section(t0))
    dY = ddt(lambda t: as_cvector(section(t)), t0, h)
    cc = connection_coefficients(metric, z, v)
    return dY + connection_term(cc, Y, dz, dv)


def nabla_correction(metric: FinslerMetric, z, v, DU, Y) -> np.ndarray:
    """``(nabla - D) Y`` built blockwise in the adapted frame at ``[v]``.

    With ``rho`` the frame components of ``D U / F(U)`` the nonzero blocks
    are ``Delta^mu_nu = -H(e_mu^{01}, e_nu^{10}, e_lam^{10}) rho^lam`` and
    ``Delta^0_lam = -h(e_lam^{10}, e_nu^{10}) rho^nu`` for indices >= 1.
    """
    n = metric.dimension
    Y = as_cvector(Y)
    if n == 1:
        return np.zeros(1, dtype=complex)
    fr = adapted_frame(metric, z, v)
    E = fr.matrix
    ft = frame_tensors(metric, fr)
    rho = np.linalg.solve(E, as_cvector(DU) / metric.F(z, v))
    y = np.linalg.solve(E, Y)
    H21 = ft.H3[1]  # [a, b, cbar]: two unbarred then one barred
    delta = np.zeros((n, n), dtype=complex)
    r = rho[1:]
    # H(e_mu^{01}, e_nu^{10}, e_lam^{10}) = H21[nu, lam, mu]
    delta[1:, 1:] = -np.einsum("nlm,l->mn", H21[1:, 1:, 1:], r)
    delta[0, 1:] = -ft.h_pure[1:, 1:] @ r
    return E @ (delta @ y)


def covariant_derivative_nabla(metric: FinslerMetric, path: Callable, section: Callable, t0: float,
                               h: float = STENCIL_STEP) -> np.ndarray:
    z, v = (as_cvector(a) for a in path(t0))
    dz, dv = path_velocity(path, t0, h)
    Y = as_cvector(section(t0))
    dY = ddt(lambda t: as_cvector(section(t)), t0, h)
    cc = connection_coefficients(metric, z, v)
    DY = dY + connection_term(cc, Y, dz, dv)
    DU = tautological_derivative(cc, dz, dv)
    return DY + nabla_correction(metric, z, v, DU, Y)


def horizontal_velocity(metric: FinslerMetric, z, v, X) -> np.ndarray:
    """Fiber velocity ``-sum gamma[i, j, k] v^j X^k`` of the horizontal lift of ``X``."""
    cc = connection_coefficients(metric, z, v)
    return -np.einsum("ijk,j,k->i", cc.gamma, cc.v, as_cvector(X))


def horizontal_lift(metric: FinslerMetric, z, v, X) -> ProjTangent:
    p = ProjPoint(z, v)
    dv = horizontal_velocity(metric, p.z, p.dir, X)
    return ProjTangent.gauge_fixed(metric, p, X, dv)


# compatibility ---------------------------------------------------------------


@dataclass(frozen=True)
class CompatibilityResiduals:
    res_D: float
    res_nabla: float


def defect_oracle(metric: FinslerMetric, z, v, DU, Y, Z) -> float:
    """``2 Re[H_U(w, Y^{10}, Z^{01}) + H_U(w, Z^{10}, Y^{01})]`` with ``w = D U``.

    Evaluated in coordinates by nested fiber derivatives, independently of
    the frame construction used by the semi-Hermitian derivative.
    """
    from .linalg import ComplexifiedVector as CV

    w = CV.pure_holo(DU)
    a = vertical_derivative(metric, z, v, [w, CV.pure_holo(Y), CV.pure_anti(np.conj(Z))])
    b = vertical_derivative(metric, z, v, [w, CV.pure_holo(Z), CV.pure_anti(np.conj(Y))])
    return float(2.0 * (a + b).real)


def compatibility_residuals(metric: FinslerMetric, path: Callable, Y: Callable, Z: Callable,
                            t0: float = 0.0, h: float = STENCIL_STEP) -> CompatibilityResiduals:
    """Leibniz-rule residuals for ``D`` and for ``nabla`` (the latter net of its defect)."""
    z, v = (as_cvector(a) for a in path(t0))
    dz, dv = path_velocity(path, t0, h)

    def gval(t):
        zt, vt = path(t)
        g = _fiber_metric(metric, zt, vt)
        return 2.0 * (as_cvector(Y(t)) @ g @ as_cvector(Z(t)).conj()).real

    dg = float(ddt(gval, t0, h))
    cc = connection_coefficients(metric, z, v)
    y0, z0 = as_cvector(Y(t0)), as_cvector(Z(t0))
    dY = ddt(lambda t: as_cvector(Y(t)), t0, h)
    dZ = ddt(lambda t: as_cvector(Z(t)), t0, h)
    DY = dY + connection_term(cc, y0, dz, dv)
    DZ = dZ + connection_term(cc, z0, dz, dv)

    def form(a, b):
        return float(2.0 * (a @ cc.g @ b.conj()).real)

    res_D = abs(dg - form(DY, z0) - form(y0, DZ))
    DU = tautological_derivative(cc, dz, dv)
    NY = DY + nabla_correction(metric, z, v, DU, y0)
    NZ = DZ + nabla_correction(metric, z, v, DU, z0)
    defect = defect_oracle(metric, z, v, DU, y0, z0)
    res_nabla = abs(dg - form(NY, z0) - form(y0, NZ) - defect)
    return CompatibilityResiduals(res_D, res_nabla)


@dataclass(frozen=True, eq=False)
class PolyPath:
    """Quadratic representative path with quadratic sections, used for sampling."""

    z: np.ndarray  # shape (3, n): constant, linear, quadratic coefficients
    v: np.ndarray

    def __call__(self, t):
        return (self.z[0] + t * self.z[1] + t * t * self.z[2],
                self.v[0] + t * self.v[1] + t * t * self.v[2])


def _crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_path(metric: FinslerMetric, rng: np.random.Generator, radius: float = 0.4,
                speed: float = 0.3):
    """A random path through a sampled point plus two random sections."""
    from .metric import sample_point

    n = metric.dimension
    z0, v0 = sample_point(metric, rng, radius)
    path = PolyPath(np.stack([z0, speed * _crandn(rng, n), speed * _crandn(rng, n)]),
                    np.stack([v0, _crandn(rng, n), _crandn(rng, n)]))
    ys = _crandn(rng, 3, n)
    zs = _crandn(rng, 3, n)

    def Y(t):
        return ys[0] + t * ys[1] + t * t * ys[2]

    def Z(t):
        return zs[0] + t * zs[1] + t * t * zs[2]

    return path, Y, Z
