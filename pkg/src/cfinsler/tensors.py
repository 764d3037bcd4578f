"""Wirtinger jets of ``G`` and the vertical tensors built from them.

Multi-indices are exponent tuples of length ``4n`` over the complex
variables in the order ``(z_1..z_n, zbar_1..zbar_n, v_1..v_n, vbar_1..vbar_n)``.
``MetricJet.deriv("z1 v2 vbar2")`` is a readable shortcut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import gmpy2
import numpy as np

from .errors import OutsideDomainError
from .jets import Jet, block_wirtinger_matrix, jet_space
from .linalg import ComplexifiedVector, HermitianMatrix, as_cvector
from .metric import FinslerMetric

GROUPS = ("z", "zbar", "v", "vbar")


def _group_offset(group: str, n: int, fiber_only: bool) -> int:
    if fiber_only:
        if group not in ("v", "vbar"):
            raise KeyError(f"fiber-only jet has no {group!r} derivatives")
        return 0 if group == "v" else n
    return GROUPS.index(group) * n


def parse_multi_index(text: str, n: int) -> tuple[int, ...]:
    """``"z1 vbar2 vbar2"`` -> exponent tuple of length ``4n``."""
    e = [0] * (4 * n)
    for tok in text.replace(",", " ").split():
        name = tok.rstrip("0123456789")
        idx = int(tok[len(name):]) - 1
        if name not in GROUPS or not 0 <= idx < n:
            raise KeyError(f"bad derivative variable {tok!r}")
        e[GROUPS.index(name) * n + idx] += 1
    return tuple(e)


@lru_cache(maxsize=None)
def _tensor_index(n: int, fiber_only: bool, order: int, groups: tuple[str, ...]):
    space = jet_space((2 if fiber_only else 4) * n, order)
    nv = space.nvars
    offs = [_group_offset(g, n, fiber_only) for g in groups]
    idx = np.empty((n,) * len(groups), dtype=np.intp)
    for combo in product(range(n), repeat=len(groups)):
        e = [0] * nv
        for off, c in zip(offs, combo):
            e[off + c] += 1
        idx[combo] = space.index[tuple(e)]
    return idx, space.factorial[idx]


@lru_cache(maxsize=None)
def _stacked_index(n: int, fiber_only: bool, order: int, k: int):
    """Index arrays for the dense (2n)^k fiber tensor over (v, vbar)."""
    space = jet_space((2 if fiber_only else 4) * n, order)
    base = 0 if fiber_only else 2 * n
    idx = np.empty((2 * n,) * k, dtype=np.intp)
    for combo in product(range(2 * n), repeat=k):
        e = [0] * space.nvars
        for c in combo:
            e[base + c] += 1
        idx[combo] = space.index[tuple(e)]
    return idx, space.factorial[idx]


@dataclass(frozen=True, eq=False)
class MetricJet:
    """All mixed Wirtinger derivatives of ``G`` at ``(z, v)`` up to ``order``."""

    z: np.ndarray
    v: np.ndarray
    order: int
    fiber_only: bool
    coeffs: np.ndarray  # Taylor coefficients in Wirtinger monomials

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def space(self):
        return jet_space((2 if self.fiber_only else 4) * self.n, self.order)

    @property
    def value(self) -> float:
        return float(self.coeffs[0].real)

    def _full_index(self, exponents) -> int:
        e = tuple(exponents)
        if self.fiber_only:
            n = self.n
            if any(e[: 2 * n]):
                raise KeyError("fiber-only jet has no base derivatives")
            e = e[2 * n:]
        return self.space.index[e]

    def deriv(self, which) -> complex:
        if isinstance(which, str):
            which = parse_multi_index(which, self.n)
        i = self._full_index(which)
        return complex(self.coeffs[i] * self.space.factorial[i])

    @property
    def derivs(self) -> dict[tuple[int, ...], complex]:
        space = self.space
        vals = self.coeffs * space.factorial
        out = {}
        pad = (0,) * (2 * self.n) if self.fiber_only else ()
        for m, val in zip(space.monomials, vals):
            out[pad + m] = complex(val)
        return out

    def tensor(self, *groups: str) -> np.ndarray:
        """Dense array ``T[i, j, ...] = d^k G / d g1_i d g2_j ...``."""
        if not groups:
            return np.array(self.coeffs[0])
        idx, fac = _tensor_index(self.n, self.fiber_only, self.order, tuple(groups))
        return self.coeffs[idx] * fac

    def fiber_tensor(self, k: int) -> np.ndarray:
        """Order-``k`` fiber derivatives over the stacked variables ``(v, vbar)``."""
        idx, fac = _stacked_index(self.n, self.fiber_only, self.order, k)
        return self.coeffs[idx] * fac


def _seed(values: np.ndarray, space, offset: int) -> list[Jet]:
    n = values.shape[0]
    out = []
    for k in range(n):
        c = np.zeros(space.size, dtype=complex)
        c[0] = values[k]
        if space.order >= 1:
            c[space.index[_unit(space.nvars, offset + k)]] = 1.0
            c[space.index[_unit(space.nvars, offset + n + k)]] = 1.0j
        out.append(Jet(space, c))
    return out


@lru_cache(maxsize=None)
def _unit(nvars: int, k: int) -> tuple[int, ...]:
    e = [0] * nvars
    e[k] = 1
    return tuple(e)


def jet(metric: FinslerMetric, z, v, order: int = 4, *, fiber_only: bool = False,
        guard: bool = True) -> MetricJet:
    """Forward-mode jet of ``G`` at ``(z, v)``.

    The evaluator runs on truncated Taylor polynomials in the real
    coordinates ``(Re z, Im z, Re v, Im v)``; the coefficients are then
    rewritten in Wirtinger variables.
    """
    if not 1 <= order <= 4:
        raise ValueError("order must be in 1..4")
    z, v = metric.check_point(z, v)
    if guard and not metric.in_domain(z, v):
        raise OutsideDomainError(f"z={z.tolist()}, v={v.tolist()}")
    n = metric.dimension
    if fiber_only:
        space = jet_space(2 * n, order)
        zj = list(z)
        vj = _seed(v, space, 0)
        blocks = (n,)
    else:
        space = jet_space(4 * n, order)
        zj = _seed(z, space, 0)
        vj = _seed(v, space, 2 * n)
        blocks = (n, n)
    val = metric.evaluator(zj, vj)
    if not isinstance(val, Jet):
        val = space.constant(val)
    coeffs = block_wirtinger_matrix(blocks, order) @ val.coeffs
    coeffs.setflags(write=False)
    return MetricJet(z, v, order, fiber_only, coeffs)


def fiber_metric(metric: FinslerMetric, z, v, *, guard: bool = True) -> HermitianMatrix:
    """``g[j, k] = d^2 G / dv^j dvbar^k``."""
    mj = jet(metric, z, v, 2, fiber_only=True, guard=guard)
    return HermitianMatrix(mj.tensor("v", "vbar"), tol=1e-9)


def vertical_derivative(metric: FinslerMetric, z, U, dirs, *, guard: bool = True) -> complex:
    """Nested fiber derivative of ``G`` at ``U`` along complexified directions."""
    k = len(dirs)
    if not 1 <= k <= 4:
        raise ValueError("between 1 and 4 directions are supported")
    mj = jet(metric, z, U, k, fiber_only=True, guard=guard)
    return contract_fiber(mj.fiber_tensor(k), dirs)


def contract_fiber(t: np.ndarray, dirs) -> complex:
    for d in dirs:
        vec = d.stacked() if isinstance(d, ComplexifiedVector) else as_cvector(d)
        t = t @ vec if t.ndim == 1 else np.tensordot(t, vec, axes=([t.ndim - 1], [0]))
    return complex(t)


@dataclass(frozen=True, eq=False)
class VerticalTensors:
    """Fiber derivatives of ``G`` split by how many indices are barred.

    ``H3[b]`` has ``3 - b`` unbarred indices followed by ``b`` barred ones;
    likewise ``H4[b]``.  ``h_mixed[j, k] = G_{v^j vbar^k}`` and
    ``h_pure[j, k] = G_{v^j v^k}``.
    """

    h_mixed: HermitianMatrix
    h_pure: np.ndarray
    H3: dict
    H4: dict

    def max_abs(self, order: int) -> float:
        blocks = self.H3 if order == 3 else self.H4
        return max(float(np.max(np.abs(b))) for b in blocks.values())


def split_blocks(full: np.ndarray, n: int) -> dict[int, np.ndarray]:
    k = full.ndim
    out = {}
    for b in range(k + 1):
        sl = tuple([slice(0, n)] * (k - b) + [slice(n, 2 * n)] * b)
        out[b] = np.array(full[sl])
    return out


def vertical_tensors(metric: FinslerMetric, z, U, *, guard: bool = True) -> VerticalTensors:
    mj = jet(metric, z, U, 4, fiber_only=True, guard=guard)
    return tensors_from_jet(mj)


def tensors_from_jet(mj: MetricJet) -> VerticalTensors:
    n = mj.n
    return VerticalTensors(
        h_mixed=HermitianMatrix(mj.tensor("v", "vbar"), tol=1e-9),
        h_pure=mj.tensor("v", "v"),
        H3=split_blocks(mj.fiber_tensor(3), n),
        H4=split_blocks(mj.fiber_tensor(4), n),
    )


# finite-difference oracle -------------------------------------------------


def _default_step(order: int) -> float:
    return 1e-3 if order >= 3 else 1e-4


def _wirtinger_expansion(exponents, n):
    """Expand a Wirtinger multi-index into ``[(coef, real_var_list)]``.

    Real variables are numbered ``(Re z, Im z, Re v, Im v)`` blockwise.
    """
    factors = []
    for g, group in enumerate(GROUPS):
        block = 0 if g < 2 else 2
        sign = -1j if group in ("z", "v") else 1j
        for k in range(n):
            for _ in range(exponents[g * n + k]):
                rx = block * n + k
                ry = (block + 1) * n + k
                factors.append(((0.5, rx), (0.5 * sign, ry)))
    terms = []
    for choice in product(*factors):
        coef = 1.0 + 0j
        vars_ = []
        for c, r in choice:
            coef *= c
            vars_.append(r)
        terms.append((coef, tuple(sorted(vars_))))
    return terms


class _Stencil:
    """Cached multiprecision evaluations on the grid ``p + (h/2) * offset``.

    ``G`` is evaluated with ``bits`` of mantissa so that the ``1/h^k``
    amplification of rounding stays far below the truncation error; only
    arithmetic, ``conjugate`` and ``** 0.5`` are required of the evaluator.
    """

    def __init__(self, metric: FinslerMetric, z, v, h: float, bits: int = 128):
        self.metric = metric
        self.n = metric.dimension
        self.ctx = gmpy2.context(precision=bits)
        with gmpy2.context(self.ctx):
            self.z0 = [gmpy2.mpc(complex(c)) for c in np.asarray(z, dtype=complex)]
            self.v0 = [gmpy2.mpc(complex(c)) for c in np.asarray(v, dtype=complex)]
            self.half = gmpy2.mpfr(h) / 2
            self.h = gmpy2.mpfr(h)
        self.cache: dict[tuple[int, ...], object] = {}

    def _nested(self, real_vars, scale):
        pts = {}
        k = len(real_vars)
        for signs in product((1, -1), repeat=k):
            off = [0] * (4 * self.n)
            for s, r in zip(signs, real_vars):
                off[r] += s * scale
            key = tuple(off)
            pts[key] = pts.get(key, 0) + math.prod(signs)
        return pts

    def requests(self, real_vars):
        return [self._nested(real_vars, 1), self._nested(real_vars, 2)]

    def evaluate(self, keys):
        n = self.n
        with gmpy2.context(self.ctx):
            half = self.half
            for key in keys:
                if key in self.cache:
                    continue
                z = [self.z0[k] + half * gmpy2.mpc(key[k], key[n + k]) for k in range(n)]
                v = [self.v0[k] + half * gmpy2.mpc(key[2 * n + k], key[3 * n + k]) for k in range(n)]
                self.cache[key] = gmpy2.mpc(self.metric.evaluator(z, v)).real

    def real_derivative(self, real_vars):
        k = len(real_vars)
        if k == 0:
            self.evaluate([(0,) * (4 * self.n)])
            return self.cache[(0,) * (4 * self.n)]
        fine, coarse = self.requests(real_vars)
        self.evaluate(list(fine) + list(coarse))
        with gmpy2.context(self.ctx):
            d_fine = gmpy2.fsum([w * self.cache[p] for p, w in fine.items()]) / self.h**k
            d_coarse = gmpy2.fsum([w * self.cache[p] for p, w in coarse.items()]) / (2 * self.h) ** k
            return (4 * d_fine - d_coarse) / 3


def fd_oracle(metric: FinslerMetric, z, v, multi_index, step: float | None = None) -> complex:
    """Central differences with one Richardson level, evaluated in multiprecision.

    Independent of the jet machinery: it perturbs ``z`` and ``v`` directly
    and recombines real partials into Wirtinger ones.
    """
    n = metric.dimension
    if isinstance(multi_index, str):
        multi_index = parse_multi_index(multi_index, n)
    order = sum(multi_index)
    h = _default_step(order) if step is None else step
    if not 1e-6 <= h <= 1e-3:
        raise ValueError("step must lie in [1e-6, 1e-3]")
    st = _Stencil(metric, z, v, h)
    total = 0j
    for coef, rv in _wirtinger_expansion(multi_index, n):
        total += coef * complex(st.real_derivative(rv))
    return total


def fd_all(metric: FinslerMetric, z, v, order: int = 4) -> dict[tuple[int, ...], complex]:
    """Oracle values for every multi-index of total degree ``1..order``."""
    n = metric.dimension
    space = jet_space(4 * n, order)
    stencils: dict[float, _Stencil] = {}
    real_cache: dict[tuple, complex] = {}
    out = {}
    for m in space.monomials[1:]:
        deg = sum(m)
        h = _default_step(deg)
        st = stencils.setdefault(h, _Stencil(metric, z, v, h))
        total = 0j
        for coef, rv in _wirtinger_expansion(m, n):
            key = (h, rv)
            if key not in real_cache:
                real_cache[key] = complex(st.real_derivative(rv))
            total += coef * real_cache[key]
        out[m] = total
    return out


# identities ----------------------------------------------------------------


def real_hessian(mj: MetricJet, X, Y) -> float:
    """``h_U(X, Y)``: second real directional fiber derivative."""
    X = as_cvector(X)
    Y = as_cvector(Y)
    t = mj.fiber_tensor(2)
    val = np.concatenate([X, X.conj()]) @ t @ np.concatenate([Y, Y.conj()])
    return float(val.real)


def scale_invariance_check(metric: FinslerMetric, z, v, X, Y, lam) -> float:
    """``|h_{lam v}(X,Y) + h_{lam v}(JX,JY) - h_v(X,Y) - h_v(JX,JY)|``."""
    X = as_cvector(X)
    Y = as_cvector(Y)
    v = as_cvector(v)
    a = jet(metric, z, v, 2, fiber_only=True)
    b = jet(metric, z, lam * v, 2, fiber_only=True)
    before = real_hessian(a, X, Y) + real_hessian(a, 1j * X, 1j * Y)
    after = real_hessian(b, X, Y) + real_hessian(b, 1j * X, 1j * Y)
    return abs(after - before)


@dataclass(frozen=True)
class EulerResiduals:
    contraction_g: float  # |sum g_{i jbar} v^i vbar^j - G| / G
    contraction_dg: float  # max |sum_i dg_{i jbar}/dv^k v^i| / (|g| / |v|)
    gradient: float  # |sum dG/dv^i v^i - G| / G

    @property
    def worst(self) -> float:
        return max(self.contraction_g, self.contraction_dg, self.gradient)


def euler_residuals(metric: FinslerMetric, z, v, mj: MetricJet | None = None) -> EulerResiduals:
    if mj is None:
        mj = jet(metric, z, v, 3, fiber_only=True)
    v = as_cvector(v)
    G = mj.value
    g = mj.tensor("v", "vbar")
    dg = mj.tensor("v", "vbar", "v")  # [i, j, k]
    grad = mj.tensor("v")
    scale_dg = float(np.max(np.abs(g))) / float(np.linalg.norm(v))
    r1 = abs(v @ g @ v.conj() - G) / abs(G)
    r2 = float(np.max(np.abs(np.einsum("ijk,i->jk", dg, v)))) / scale_dg
    r3 = abs(grad @ v - G) / abs(G)
    return EulerResiduals(float(r1), r2, float(r3))
