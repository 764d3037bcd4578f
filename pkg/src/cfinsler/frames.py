"""Adapted frames at a point of the indicatrix and frame components of tensors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateIndicatrixError, FinslerError, FormNotPositiveError,
                     NotPseudoconvexError, OutsideDomainError)
from .linalg import (ALGEBRAIC_TOL, ChartPoint, ComplexifiedVector, HermitianMatrix,
                     as_cvector, gram_matrix, levi_gram_schmidt)
from .metric import FinslerMetric, sample_point
from .tensors import VerticalTensors, jet, split_blocks

UNIT_TOL = 1e-9


def _gradient_and_hessian(metric: FinslerMetric, z, f0, guard=True):
    mj = jet(metric, z, f0, 2, fiber_only=True, guard=guard)
    return mj.tensor("v"), mj.tensor("v", "vbar"), mj.value


def _kernel_basis(a: np.ndarray) -> list[np.ndarray]:
    """Basis of ``{w : a . w = 0}`` from projected coordinate vectors.

    The projection of ``e_k`` with the smallest norm is dropped (lowest
    index on ties) so the remaining ``n - 1`` vectors are independent.
    """
    n = a.shape[0]
    a2 = float(np.vdot(a, a).real)
    proj = []
    for k in range(n):
        e = np.zeros(n, dtype=complex)
        e[k] = 1.0
        proj.append(e - (a @ e) / a2 * a.conj())
    norms = [np.linalg.norm(p) for p in proj]
    drop = int(np.argmin(norms))
    return [p for k, p in enumerate(proj) if k != drop]


def indicatrix_tangent(metric: FinslerMetric, z, f0, *, guard: bool = True) -> list[ComplexifiedVector]:
    """Basis of the maximal complex subspace tangent to the indicatrix at ``f0``."""
    grad, _, G = _gradient_and_hessian(metric, z, f0, guard)
    if abs(G - 1.0) > UNIT_TOL:
        raise FinslerError(f"f0 is not on the indicatrix: F(f0)^2 = {G!r}")
    if np.linalg.norm(grad) <= ALGEBRAIC_TOL:
        raise DegenerateIndicatrixError()
    return [ComplexifiedVector.real(w) for w in _kernel_basis(grad)]


def levi_form(metric: FinslerMetric, z, f0, *, guard: bool = True):
    """``(X, Y) -> sum g_{j kbar}(f0) X^j conj(Y^k)`` on (1,0) parts."""
    _, g, _ = _gradient_and_hessian(metric, z, f0, guard)

    def form(X, Y) -> complex:
        x = X.holo if isinstance(X, ComplexifiedVector) else as_cvector(X)
        y = Y.holo if isinstance(Y, ComplexifiedVector) else as_cvector(Y)
        return complex(x @ g @ y.conj())

    return form


@dataclass(frozen=True, eq=False)
class AdaptedFrame:
    base: ChartPoint
    v: np.ndarray
    e: tuple  # ComplexifiedVector e_0 .. e_{n-1}
    levi: HermitianMatrix  # Gram matrix of e_1..e_{n-1}

    @property
    def matrix(self) -> np.ndarray:
        """Columns are the (1,0) parts of ``e_0..e_{n-1}``."""
        return np.column_stack([e.holo for e in self.e])

    def to_json(self) -> dict:
        from .io import encode

        return {"z": encode(self.base.z), "v": encode(self.v),
                "columns": [encode(e.holo) for e in self.e],
                "levi": encode(self.levi.entries)}


def adapted_frame(metric: FinslerMetric, z, v, *, guard: bool = True) -> AdaptedFrame:
    z, v = metric.check_point(z, v)
    if np.linalg.norm(v) == 0:
        raise FinslerError("v must be nonzero")
    if guard and not metric.in_domain(z, v):
        raise OutsideDomainError(f"z={z.tolist()}, v={v.tolist()}")
    f0 = v / metric.F(z, v)
    grad, g, _ = _gradient_and_hessian(metric, z, f0, guard)
    if np.linalg.norm(grad) <= ALGEBRAIC_TOL:
        raise DegenerateIndicatrixError()
    seeds = _kernel_basis(grad)
    n = metric.dimension
    if n > 1:
        rest = _levi_unitary(seeds, g, z, v)
        gram = gram_matrix([e.holo for e in rest], g)
    else:
        rest, gram = [], np.zeros((0, 0))
    e = (ComplexifiedVector.real(f0),) + tuple(rest)
    return AdaptedFrame(ChartPoint(z), v, e, HermitianMatrix(gram, tol=1e-8))


def _levi_unitary(seeds, g, z, v):
    lam = np.linalg.eigvalsh(_restricted(g, seeds))[0]
    if lam <= ALGEBRAIC_TOL * max(1.0, float(np.max(np.abs(g)))):
        raise NotPseudoconvexError(z, v, float(lam))
    try:
        return levi_gram_schmidt([ComplexifiedVector.real(s) for s in seeds], g)
    except FormNotPositiveError as exc:
        raise NotPseudoconvexError(z, v) from exc


def _restricted(g, basis) -> np.ndarray:
    """Levi form on ``basis`` normalized to an orthonormal Euclidean basis."""
    B = np.column_stack(basis)
    Q, _ = np.linalg.qr(B)
    m = Q.T @ g @ Q.conj()
    return 0.5 * (m + m.conj().T)


def frame_tensors(metric: FinslerMetric, frame: AdaptedFrame, *, guard: bool = True) -> VerticalTensors:
    """Vertical tensors at ``f0`` contracted against ``e_alpha`` and conjugates."""
    E = frame.matrix
    f0 = E[:, 0]
    mj = jet(metric, frame.base.z, f0, 4, fiber_only=True, guard=guard)
    n = metric.dimension
    # stacked change of basis: holo slots take E, anti slots take conj(E)
    S = np.zeros((2 * n, 2 * n), dtype=complex)
    S[:n, :n] = E
    S[n:, n:] = E.conj()
    framed = {}
    for k in (2, 3, 4):
        t = mj.fiber_tensor(k)
        for _ in range(k):
            t = np.tensordot(t, S, axes=([0], [0]))
        framed[k] = t
    h = framed[2]
    return VerticalTensors(
        h_mixed=HermitianMatrix(h[:n, n:], tol=1e-8),
        h_pure=np.array(h[:n, :n]),
        H3=split_blocks(framed[3], n),
        H4=split_blocks(framed[4], n),
    )


@dataclass(frozen=True)
class PseudoconvexityReport:
    passed: bool
    min_eigenvalue: float
    samples: int
    degenerate: int  # points where the frame could not be built
    worst_point: tuple | None = None


def levi_min_eigenvalue(metric: FinslerMetric, z, v, *, guard: bool = True) -> float:
    """Smallest eigenvalue of the Levi form on the complex tangent at ``[v]``."""
    z, v = metric.check_point(z, v)
    f0 = v / metric.F(z, v)
    grad, g, _ = _gradient_and_hessian(metric, z, f0, guard)
    if np.linalg.norm(grad) <= ALGEBRAIC_TOL:
        raise DegenerateIndicatrixError()
    if metric.dimension == 1:
        return float(g[0, 0].real)
    return float(np.linalg.eigvalsh(_restricted(g, _kernel_basis(grad)))[0])


def pseudoconvexity_scan(metric: FinslerMetric, samples: int = 100, seed: int = 0, *,
                         radius: float = 0.5, points=None) -> PseudoconvexityReport:
    """Minimum Levi eigenvalue over sampled (or given) points.

    With explicit ``points`` the smoothness guard is bypassed so that
    degenerate loci can be probed; non-finite or failing evaluations count
    as degenerate.
    """
    rng = np.random.default_rng(seed)
    if points is None:
        pts = [sample_point(metric, rng, radius) for _ in range(samples)]
        guard = True
    else:
        pts = [(as_cvector(z), as_cvector(v)) for z, v in points]
        guard = False
    worst, where, bad = np.inf, None, 0
    for z, v in pts:
        try:
            with np.errstate(all="ignore"):
                lam = levi_min_eigenvalue(metric, z, v, guard=guard)
        except (FinslerError, ZeroDivisionError, np.linalg.LinAlgError):
            lam = np.nan
        if not np.isfinite(lam):
            bad += 1
            continue
        if lam < worst:
            worst, where = lam, (z, v)
    passed = bad == 0 and worst > ALGEBRAIC_TOL
    return PseudoconvexityReport(bool(passed), float(worst), len(pts), bad,
                                 None if where is None else (where[0].tolist(), where[1].tolist()))
