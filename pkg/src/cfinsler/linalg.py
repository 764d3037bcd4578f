"""Chart-level complex linear algebra.

Points and vectors are plain complex coordinate arrays in a single chart.
A real tangent vector ``w`` with complex coordinates ``w.v`` has (1,0) part
with the same coefficients on ``d/dv`` and (0,1) part with the conjugate
coefficients on ``d/dvbar``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DegenerateBasisError, FinslerError, FormNotPositiveError, NotHermitianError

ALGEBRAIC_TOL = 1e-10
SYMMETRY_TOL = 1e-12


def as_cvector(x, n: int | None = None, name: str = "vector") -> np.ndarray:
    """Validate and convert to a 1-d complex array."""
    arr = np.asarray(x, dtype=complex).reshape(-1)
    if n is not None and arr.shape[0] != n:
        raise FinslerError(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise FinslerError(f"{name} has non-finite entries")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ChartPoint:
    z: np.ndarray

    def __post_init__(self):
        z = as_cvector(self.z, name="z")
        if z.shape[0] < 1:
            raise FinslerError("chart point needs n >= 1 coordinates")
        object.__setattr__(self, "z", _frozen(z))

    @property
    def n(self) -> int:
        return self.z.shape[0]


@dataclass(frozen=True)
class TangentVector:
    base: ChartPoint
    v: np.ndarray

    def __post_init__(self):
        if not isinstance(self.base, ChartPoint):
            object.__setattr__(self, "base", ChartPoint(self.base))
        object.__setattr__(self, "v", _frozen(as_cvector(self.v, self.base.n, "v")))

    def J(self) -> "TangentVector":
        return TangentVector(self.base, 1j * self.v)

    def require_nonzero(self):
        if np.linalg.norm(self.v) == 0:
            raise FinslerError("tangent vector must be nonzero")
        return self


@dataclass(frozen=True)
class ComplexifiedVector:
    holo: np.ndarray
    anti: np.ndarray

    def __post_init__(self):
        h = as_cvector(self.holo, name="holo")
        a = as_cvector(self.anti, h.shape[0], "anti")
        object.__setattr__(self, "holo", _frozen(h))
        object.__setattr__(self, "anti", _frozen(a))

    @classmethod
    def pure_holo(cls, x) -> "ComplexifiedVector":
        x = as_cvector(x)
        return cls(x, np.zeros_like(x))

    @classmethod
    def pure_anti(cls, x) -> "ComplexifiedVector":
        """(0,1) vector with the given ``d/dvbar`` coefficients."""
        x = as_cvector(x)
        return cls(np.zeros_like(x), x)

    @classmethod
    def real(cls, x) -> "ComplexifiedVector":
        x = as_cvector(x)
        return cls(x, x.conj())

    def stacked(self) -> np.ndarray:
        """Coefficients on (d/dv_1..d/dv_n, d/dvbar_1..d/dvbar_n)."""
        return np.concatenate([self.holo, self.anti])

    def is_real(self, tol: float = ALGEBRAIC_TOL) -> bool:
        return bool(np.allclose(self.anti, self.holo.conj(), atol=tol, rtol=0))

    def __add__(self, other):
        return ComplexifiedVector(self.holo + other.holo, self.anti + other.anti)

    def __mul__(self, a):
        return ComplexifiedVector(a * self.holo, a * self.anti)

    __rmul__ = __mul__


@dataclass(frozen=True)
class HermitianMatrix:
    """Square complex matrix, symmetrized on construction.

    Raises :class:`NotHermitianError` when ``entries`` is further than
    ``tol`` (relative to the largest entry) from Hermitian.
    """

    entries: np.ndarray
    tol: float = field(default=SYMMETRY_TOL, repr=False, compare=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise FinslerError(f"Hermitian matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise FinslerError("Hermitian matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
        defect = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
        if defect > self.tol * scale:
            raise NotHermitianError(defect)
        object.__setattr__(self, "entries", _frozen(0.5 * (a + a.conj().T)))

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    @property
    def shape(self):
        return self.entries.shape

    def quadratic(self, x, y=None) -> complex:
        """``sum m[j, k] x^j conj(y^k)``."""
        y = x if y is None else y
        return complex(np.asarray(x) @ self.entries @ np.conj(y))


def type_split(w: TangentVector) -> ComplexifiedVector:
    return ComplexifiedVector(w.v, np.conj(w.v))


@dataclass(frozen=True)
class PosdefReport:
    is_posdef: bool
    min_eigenvalue: float


def posdef_check(m, tol: float = ALGEBRAIC_TOL) -> PosdefReport:
    h = m if isinstance(m, HermitianMatrix) else HermitianMatrix(m)
    if h.shape[0] == 0:
        return PosdefReport(True, float("inf"))
    lam = float(np.linalg.eigvalsh(h.entries)[0])
    return PosdefReport(lam > tol, lam)


Form = Union["HermitianMatrix", np.ndarray, Callable[[np.ndarray, np.ndarray], complex]]


def _form_evaluator(form: Form) -> Callable[[np.ndarray, np.ndarray], complex]:
    if callable(form):
        return form
    g = np.asarray(form.entries if isinstance(form, HermitianMatrix) else form, dtype=complex)
    return lambda x, y: complex(x @ g @ y.conj())


def levi_gram_schmidt(basis: Sequence[ComplexifiedVector], form: Form,
                      tol: float = ALGEBRAIC_TOL) -> list[ComplexifiedVector]:
    """Orthonormalize (1,0) parts of ``basis`` against a Hermitian form.

    ``form`` is either the coefficient matrix ``g[j, k]`` of
    ``sum g_jk x^j conj(y^k)`` or a callable ``(x, y) -> complex``.
    Classical Gram-Schmidt with a second re-orthogonalization pass.
    """
    if len(basis) == 0:
        return []
    vecs = [as_cvector(b.holo if isinstance(b, ComplexifiedVector) else b) for b in basis]
    mat = np.column_stack(vecs)
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[-1] <= tol * max(1.0, sv[0]) or len(vecs) > mat.shape[0]:
        raise DegenerateBasisError(f"smallest singular value {sv[-1]:.3e}")
    ev = _form_evaluator(form)
    out: list[np.ndarray] = []
    for w in vecs:
        w = w.copy()
        for _ in range(2):
            for e in out:
                w = w - ev(w, e) * e
        nrm2 = ev(w, w).real
        if not nrm2 > tol * max(1.0, float(np.vdot(w, w).real)):
            raise FormNotPositiveError(nrm2)
        out.append(w / np.sqrt(nrm2))
    return [ComplexifiedVector(e, e.conj()) for e in out]


def gram_matrix(vectors: Sequence[np.ndarray], form: Form) -> np.ndarray:
    ev = _form_evaluator(form)
    k = len(vectors)
    return np.array([[ev(vectors[i], vectors[j]) for j in range(k)] for i in range(k)])
