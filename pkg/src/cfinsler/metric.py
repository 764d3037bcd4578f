"""Finsler metrics ``G = F^2`` on a single chart of C^n."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import dsl, jets
from .errors import FinslerError, NotHermitianError
from .linalg import HermitianMatrix, as_cvector, posdef_check

ALGEBRAIC_TOL = 1e-10


def _default_guard(z, v) -> bool:
    return bool(np.linalg.norm(v) > 0)


def _no_margin(z) -> float:
    return np.inf


@dataclass(frozen=True, eq=False)
class FinslerMetric:
    """``G(z, v)`` with its smoothness guard.

    ``evaluator`` receives sequences of scalars (complex, numpy arrays or
    jets) and must only use arithmetic, ``jets.conj`` and ``jets.sqrt`` so
    that it works unchanged on all of them.  ``chart_margin(z)`` is positive
    inside the chart and crosses zero at its boundary.
    """

    dimension: int
    evaluator: Callable
    domain_guard: Callable = _default_guard
    chart_margin: Callable = _no_margin
    name: str = "custom"
    hermitian: bool | None = None  # known to come from a Hermitian metric
    key: str = ""
    params: dict = field(default_factory=dict)

    def G(self, z, v) -> float:
        val = self.evaluator(list(np.asarray(z, dtype=complex)), list(np.asarray(v, dtype=complex)))
        return float(np.real(val))

    def G_complex(self, z, v) -> complex:
        return complex(self.evaluator(list(np.asarray(z, dtype=complex)),
                                      list(np.asarray(v, dtype=complex))))

    def F(self, z, v) -> float:
        return float(np.sqrt(self.G(z, v)))

    def in_domain(self, z, v) -> bool:
        z = np.asarray(z, dtype=complex)
        v = np.asarray(v, dtype=complex)
        return self.chart_margin(z) > 0 and bool(self.domain_guard(z, v))

    def check_point(self, z, v):
        z = as_cvector(z, self.dimension, "z")
        v = as_cvector(v, self.dimension, "v")
        return z, v

    def __repr__(self) -> str:
        return f"FinslerMetric({self.name}, n={self.dimension})"


# built-ins ---------------------------------------------------------------


def _euclidean(z, v):
    acc = 0.0
    for x in v:
        acc = acc + x * jets.conj(x)
    return acc


def _hermitian_evaluator(a: np.ndarray):
    n = a.shape[0]

    def G(z, v):
        vb = [jets.conj(x) for x in v]
        acc = 0.0
        for j in range(n):
            for k in range(n):
                if a[j, k] != 0:
                    acc = acc + complex(a[j, k]) * (v[j] * vb[k])
        return acc

    return G


def _poincare_evaluator(n: int):
    def G(z, v):
        zb = [jets.conj(x) for x in z]
        vb = [jets.conj(x) for x in v]
        r2 = 0.0
        vv = 0.0
        zv = 0.0
        for k in range(n):
            r2 = r2 + z[k] * zb[k]
            vv = vv + v[k] * vb[k]
            zv = zv + zb[k] * v[k]
        w = 1.0 - r2
        if n == 1:
            return vv / (w * w)
        return (w * vv + zv * jets.conj(zv)) / (w * w)

    return G


def _quartic(z, v):
    a = v[0] * jets.conj(v[0])
    b = v[1] * jets.conj(v[1])
    return jets.sqrt(a * a + b * b)


def _off_axes(z, v) -> bool:
    v = np.asarray(v)
    scale = np.linalg.norm(v)
    return bool(scale > 0 and np.min(np.abs(v)) > 1e-8 * scale)


def builtin_metric(name: str, n: int | None = None, matrix=None) -> FinslerMetric:
    """One of ``EUCLIDEAN``, ``HERMITIAN_CONST``, ``POINCARE_BALL``, ``QUARTIC``."""
    key = name.upper()
    if key == "EUCLIDEAN":
        n = 2 if n is None else int(n)
        return FinslerMetric(n, _euclidean, name=f"EUCLIDEAN({n})", hermitian=True,
                             key=f"EUCLIDEAN:{n}", params={"builtin": key, "dimension": n})
    if key == "HERMITIAN_CONST":
        if matrix is None:
            raise FinslerError("HERMITIAN_CONST needs a matrix")
        try:
            h = HermitianMatrix(matrix)
        except NotHermitianError as exc:
            raise FinslerError(f"HERMITIAN_CONST matrix is {exc}") from exc
        rep = posdef_check(h)
        if not rep.is_posdef:
            raise FinslerError(
                f"HERMITIAN_CONST matrix is not positive definite (min eigenvalue {rep.min_eigenvalue:.3e})"
            )
        a = np.array(h.entries)
        m = a.shape[0]
        if n is not None and int(n) != m:
            raise FinslerError(f"matrix is {m}x{m} but dimension is {n}")
        digest = hashlib.sha256(np.ascontiguousarray(a).tobytes()).hexdigest()[:16]
        return FinslerMetric(m, _hermitian_evaluator(a), name=f"HERMITIAN_CONST({m})",
                             hermitian=True, key=f"HERMITIAN_CONST:{digest}",
                             params={"builtin": key, "dimension": m, "matrix": a})
    if key == "POINCARE_BALL":
        n = 1 if n is None else int(n)

        def margin(z):
            return 1.0 - float(np.vdot(z, z).real)

        return FinslerMetric(n, _poincare_evaluator(n), chart_margin=margin,
                             name=f"POINCARE_BALL({n})", hermitian=True,
                             key=f"POINCARE_BALL:{n}", params={"builtin": key, "dimension": n})
    if key == "QUARTIC":
        if n is not None and int(n) != 2:
            raise FinslerError("QUARTIC is defined for dimension 2 only")
        return FinslerMetric(2, _quartic, domain_guard=_off_axes, name="QUARTIC",
                             hermitian=False, key="QUARTIC",
                             params={"builtin": key, "dimension": 2})
    raise FinslerError(f"unknown builtin metric {name!r}")


BUILTINS = ("EUCLIDEAN", "HERMITIAN_CONST", "POINCARE_BALL", "QUARTIC")


def metric_from_expression(text: str, n: int, *, exclude_axes: bool = False,
                           probes: int = 16, seed: int = 0) -> FinslerMetric:
    """Parse ``text`` and check it is real-valued at seeded probe points."""
    spec = dsl.parse_metric(text, n)
    return metric_from_spec(spec, exclude_axes=exclude_axes, probes=probes, seed=seed)


def metric_from_spec(spec: dsl.MetricSpec, *, exclude_axes: bool = False,
                     probes: int = 16, seed: int = 0) -> FinslerMetric:
    ev = dsl.compile_spec(spec)
    n = spec.dimension
    rng = np.random.default_rng(seed)
    for _ in range(probes):
        z = 0.3 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        val = complex(ev(list(z), list(v)))
        if not np.isfinite(val):
            continue
        if abs(val.imag) >= ALGEBRAIC_TOL * max(1.0, abs(val.real)):
            raise FinslerError(
                f"metric expression is not real-valued: imaginary part {val.imag:.3e} at probe point"
            )
    guard = _off_axes if exclude_axes else _default_guard
    return FinslerMetric(n, ev, domain_guard=guard, name=f"DSL[{spec.content_hash[:12]}]",
                         hermitian=None, key=f"DSL:{spec.content_hash}",
                         params={"expression": spec.pretty(), "dimension": n})


# sampling ----------------------------------------------------------------


def sample_point(metric: FinslerMetric, rng: np.random.Generator, radius: float = 0.5,
                 max_tries: int = 1000):
    """A random ``(z, v)`` inside the chart and the smoothness guard."""
    n = metric.dimension
    for _ in range(max_tries):
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        z *= radius * rng.uniform(0, 1) ** (1 / (2 * n)) / np.linalg.norm(z)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        if metric.in_domain(z, v):
            return z, v
    raise FinslerError(f"could not sample a point inside the domain of {metric.name}")


@dataclass(frozen=True)
class HomogeneityReport:
    passed: bool
    max_residual: float
    samples: int
    tol: float


def homogeneity_check(metric: FinslerMetric, samples: int = 100, seed: int = 0,
                      tol: float = ALGEBRAIC_TOL) -> HomogeneityReport:
    """Max of ``|G(z, lam v) - |lam|^2 G(z, v)| / |G(z, v)|`` over random samples."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        z, v = sample_point(metric, rng)
        lam = rng.uniform(0.2, 5.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        g0 = metric.G(z, v)
        g1 = metric.G(z, lam * v)
        res = abs(g1 - abs(lam) ** 2 * g0) / max(abs(g0), 1e-300)
        worst = max(worst, res if np.isfinite(res) else np.inf)
    return HomogeneityReport(bool(worst < tol), float(worst), samples, tol)
