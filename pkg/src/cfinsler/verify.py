"""The invariant suite behind ``cfinsler verify``."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .connection import compatibility_residuals, connection_coefficients, ddt, random_path
from .curvature import curvature, torsion, weakly_kahler_check
from .errors import FinslerError
from .frames import pseudoconvexity_scan
from .metric import FinslerMetric, homogeneity_check, sample_point
from .tensors import euler_residuals, jet, real_hessian, scale_invariance_check, vertical_tensors

PASS, FAIL, NA = "pass", "fail", "not applicable"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    max_residual: float
    samples: int
    tol: float
    detail: str = ""
    elapsed: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return self.status != FAIL


@dataclass(frozen=True)
class VerifyReport:
    metric: str
    seed: int
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_dict(self, timings: bool = False) -> dict:
        rows = []
        for c in self.checks:
            row = {"name": c.name, "status": c.status, "max_residual": c.max_residual,
                   "samples": c.samples, "tol": c.tol}
            if c.detail:
                row["detail"] = c.detail
            if timings:
                row["elapsed"] = round(c.elapsed, 6)
            rows.append(row)
        return {"metric": self.metric, "seed": self.seed,
                "status": PASS if self.passed else FAIL, "checks": rows}


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


def _rng(seed: int, salt: int) -> np.random.Generator:
    return np.random.default_rng([seed, salt])


def check_homogeneity(metric, seed, samples=100, tol=1e-10) -> CheckResult:
    rep = homogeneity_check(metric, samples, seed, tol)
    return CheckResult("homogeneity", _status(rep.passed), rep.max_residual, samples, tol)


def check_euler(metric, seed, samples=100, tol=1e-9) -> CheckResult:
    rng = _rng(seed, 1)
    worst = 0.0
    for _ in range(samples):
        z, v = sample_point(metric, rng)
        worst = max(worst, euler_residuals(metric, z, v).worst)
    return CheckResult("euler_identities", _status(worst < tol), worst, samples, tol)


def check_scale_invariance(metric, seed, samples=50, tol=1e-9) -> CheckResult:
    rng = _rng(seed, 2)
    n = metric.dimension
    worst = 0.0
    for _ in range(samples):
        z, v = sample_point(metric, rng)
        X = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        Y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        lam = rng.uniform(0.3, 3.0) * np.exp(2j * np.pi * rng.uniform())
        mj = jet(metric, z, v, 2, fiber_only=True)
        scale = max(1.0, abs(real_hessian(mj, X, Y) + real_hessian(mj, 1j * X, 1j * Y)))
        worst = max(worst, scale_invariance_check(metric, z, v, X, Y, lam) / scale)
    return CheckResult("scale_invariance", _status(worst < tol), worst, samples, tol)


def check_pseudoconvexity(metric, seed, samples=50) -> CheckResult:
    rep = pseudoconvexity_scan(metric, samples, int(_rng(seed, 3).integers(2**31)))
    detail = "" if rep.degenerate == 0 else f"{rep.degenerate} degenerate points"
    if metric.domain_guard.__name__ == "_off_axes":
        detail = (detail + "; " if detail else "") + "sampled off the coordinate axes"
    return CheckResult("pseudoconvexity", _status(rep.passed), rep.min_eigenvalue, samples, 0.0,
                       detail)


def check_compatibility(metric, seed, samples=20, tol=1e-7) -> list[CheckResult]:
    rng = _rng(seed, 4)
    wd = wn = 0.0
    for _ in range(samples):
        path, Y, Z = random_path(metric, rng)
        r = compatibility_residuals(metric, path, Y, Z)
        wd, wn = max(wd, r.res_D), max(wn, r.res_nabla)
    return [CheckResult("compatibility_D", _status(wd < tol), wd, samples, tol),
            CheckResult("compatibility_nabla", _status(wn < tol), wn, samples, tol)]


def check_connection_euler(metric, seed, samples=50, tol=1e-9) -> CheckResult:
    rng = _rng(seed, 5)
    worst = 0.0
    for _ in range(samples):
        z, v = sample_point(metric, rng)
        worst = max(worst, connection_coefficients(metric, z, v).euler_residual())
    return CheckResult("connection_euler", _status(worst < tol), worst, samples, tol)


def looks_hermitian(metric: FinslerMetric, seed: int = 0, samples: int = 5) -> bool:
    if metric.hermitian is not None:
        return metric.hermitian
    rng = _rng(seed, 6)
    for _ in range(samples):
        z, v = sample_point(metric, rng)
        if vertical_tensors(metric, z, v).max_abs(3) > 1e-9:
            return False
    return True


def _classical_gamma(metric, z, v, h=1e-3) -> np.ndarray:
    """``g^{-1} dg/dz`` with ``dg/dz`` from central differences in ``z``."""
    n = metric.dimension
    g = jet(metric, z, v, 2, fiber_only=True).tensor("v", "vbar")

    def gm(zz):
        return jet(metric, zz, v, 2, fiber_only=True, guard=False).tensor("v", "vbar")

    ginv = np.linalg.inv(g)
    out = np.zeros((n, n, n), dtype=complex)
    for k in range(n):
        e = np.zeros(n, dtype=complex)
        e[k] = 1.0
        dx = ddt(lambda s: gm(z + s * e), 0.0, h)
        dy = ddt(lambda s: gm(z + 1j * s * e), 0.0, h)
        dgk = 0.5 * (dx - 1j * dy)
        out[:, :, k] = (dgk @ ginv).T
    return out


def hermitian_reduction_residual(metric, seed, samples=10) -> float:
    rng = _rng(seed, 7)
    n = metric.dimension
    worst = 0.0
    for _ in range(samples):
        z, v = sample_point(metric, rng)
        vt = vertical_tensors(metric, z, v)
        worst = max(worst, vt.max_abs(3), vt.max_abs(4))
        cc = connection_coefficients(metric, z, v)
        worst = max(worst, float(np.max(np.abs(cc.c))))
        v2 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        cc2 = connection_coefficients(metric, z, v2)
        worst = max(worst, float(np.max(np.abs(cc.gamma - cc2.gamma))))
        worst = max(worst, float(np.max(np.abs(cc.gamma - _classical_gamma(metric, z, v)))))
        X = (rng.standard_normal(n) + 1j * rng.standard_normal(n),
             rng.standard_normal(n) + 1j * rng.standard_normal(n))
        Y = (rng.standard_normal(n) + 1j * rng.standard_normal(n),
             rng.standard_normal(n) + 1j * rng.standard_normal(n))
        T = torsion(metric, (z, v), X, Y, cc=cc)
        K = curvature(metric, (z, v), X, Y)
        worst = max(worst, float(np.max(np.abs(T.finsler_part))),
                    float(np.max(np.abs(K.pi_part))), float(np.max(np.abs(K.phi_part))))
    return worst


def check_hermitian_reduction(metric, seed, samples=10, tol=1e-8) -> CheckResult:
    if not looks_hermitian(metric, seed):
        return CheckResult("hermitian_reduction", NA, 0.0, 0, tol, "metric is not Hermitian")
    worst = hermitian_reduction_residual(metric, seed, samples)
    return CheckResult("hermitian_reduction", _status(worst < tol), worst, samples, tol)


def check_weakly_kahler(metric, seed, samples=50, tol=1e-8) -> CheckResult:
    rep = weakly_kahler_check(metric, samples, int(_rng(seed, 8).integers(2**31)), tol)
    return CheckResult("weakly_kahler", _status(rep.passed), rep.max_residual, samples, tol)


def run_verify(metric: FinslerMetric, seed: int = 0, samples: dict | None = None,
               tol: float | None = None) -> VerifyReport:
    """Run every check sequentially; a check that raises is reported as failed.

    ``tol`` overrides the homogeneity threshold.
    """
    samples = samples or {}
    plan = [
        ("homogeneity", lambda: check_homogeneity(metric, seed, samples.get("homogeneity", 100),
                                                  1e-10 if tol is None else tol)),
        ("euler_identities", lambda: check_euler(metric, seed, samples.get("euler", 100))),
        ("scale_invariance", lambda: check_scale_invariance(metric, seed, samples.get("scale", 50))),
        ("pseudoconvexity", lambda: check_pseudoconvexity(metric, seed, samples.get("pseudoconvexity", 50))),
        ("compatibility", lambda: check_compatibility(metric, seed, samples.get("compatibility", 20))),
        ("connection_euler", lambda: check_connection_euler(metric, seed, samples.get("connection", 50))),
        ("hermitian_reduction", lambda: check_hermitian_reduction(metric, seed, samples.get("hermitian", 10))),
        ("weakly_kahler", lambda: check_weakly_kahler(metric, seed, samples.get("weakly_kahler", 50))),
    ]
    results = []
    for name, fn in plan:
        t0 = time.perf_counter()
        try:
            with np.errstate(all="ignore"):
                out = fn()
        except (FinslerError, ArithmeticError, np.linalg.LinAlgError) as exc:
            out = CheckResult(name, FAIL, float("inf"), 0, 0.0, f"error: {exc}")
        dt = time.perf_counter() - t0
        for r in out if isinstance(out, list) else [out]:
            results.append(CheckResult(r.name, r.status, r.max_residual, r.samples, r.tol,
                                       r.detail, dt))
    return VerifyReport(metric.name, seed, tuple(results))
