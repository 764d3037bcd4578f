"""Truncated multivariate Taylor arithmetic (forward-mode jets).

A :class:`Jet` is a polynomial in ``m`` small displacements, truncated at
total degree ``d``.  Coefficients are complex and stored densely in graded
order.  Arithmetic is exact up to truncation, so derivatives of polynomial
and ``sqrt``/power expressions come out correct to rounding.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np


class JetSpace:
    """Monomial bookkeeping for jets in ``nvars`` variables up to ``order``."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        monos = []
        for deg in range(order + 1):
            for combo in combinations_with_replacement(range(nvars), deg):
                e = [0] * nvars
                for k in combo:
                    e[k] += 1
                monos.append(tuple(e))
        self.monomials = monos
        self.index = {m: i for i, m in enumerate(monos)}
        self.size = len(monos)
        self.degree = np.array([sum(m) for m in monos])
        self.factorial = np.array(
            [math.prod(math.factorial(k) for k in m) for m in monos], dtype=float
        )

        left, right, target = [], [], []
        for i, a in enumerate(monos):
            da = self.degree[i]
            for j, b in enumerate(monos):
                if da + self.degree[j] > order:
                    continue
                left.append(i)
                right.append(j)
                target.append(self.index[tuple(x + y for x, y in zip(a, b))])
        self._left = np.array(left, dtype=np.intp)
        self._right = np.array(right, dtype=np.intp)
        self._target = np.array(target, dtype=np.intp)

    def __repr__(self) -> str:
        return f"JetSpace(nvars={self.nvars}, order={self.order})"

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        prod = a[self._left] * b[self._right]
        re = np.bincount(self._target, weights=prod.real, minlength=self.size)
        im = np.bincount(self._target, weights=prod.imag, minlength=self.size)
        return re + 1j * im

    def constant(self, c) -> "Jet":
        coeffs = np.zeros(self.size, dtype=complex)
        coeffs[0] = c
        return Jet(self, coeffs)

    def variable(self, k: int, value, direction=1.0) -> "Jet":
        """Jet of ``value + direction * d_k``."""
        coeffs = np.zeros(self.size, dtype=complex)
        coeffs[0] = value
        if self.order >= 1:
            e = [0] * self.nvars
            e[k] = 1
            coeffs[self.index[tuple(e)]] = direction
        return Jet(self, coeffs)


@lru_cache(maxsize=None)
def jet_space(nvars: int, order: int) -> JetSpace:
    return JetSpace(nvars, order)


def _power_derivatives(x0: complex, p: float, order: int) -> list[complex]:
    out = []
    coef = 1.0
    for k in range(order + 1):
        out.append(coef * x0 ** (p - k))
        coef *= p - k
    return out


class Jet:
    __slots__ = ("space", "coeffs")
    __array_priority__ = 1000

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        self.coeffs = coeffs

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    def derivative(self, exponents) -> complex:
        i = self.space.index[tuple(exponents)]
        return complex(self.coeffs[i] * self.space.factorial[i])

    def _lift(self, other) -> np.ndarray:
        if isinstance(other, Jet):
            return other.coeffs
        c = np.zeros(self.space.size, dtype=complex)
        c[0] = other
        return c

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.space, self.coeffs + other.coeffs)
        c = self.coeffs.copy()
        c[0] += other
        return Jet(self.space, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(self.space, self.space.mul(self.coeffs, other.coeffs))
        return Jet(self.space, self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.space, self.coeffs / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            raise TypeError("jet exponents must be constants")
        if isinstance(p, complex):
            if p.imag != 0:
                raise TypeError("complex exponents are not supported")
            p = p.real
        if float(p).is_integer():
            n = int(p)
            if n < 0:
                return self.reciprocal() ** (-n)
            result = self.space.constant(1.0)
            base = self
            while n:
                if n & 1:
                    result = result * base
                n >>= 1
                if n:
                    base = base * base
            return result
        return self.compose(_power_derivatives(self.value, float(p), self.space.order))

    def compose(self, derivs) -> "Jet":
        """Apply a univariate function given its derivatives at the constant term."""
        h = self.coeffs.copy()
        h[0] = 0.0
        order = self.space.order
        acc = np.zeros_like(h)
        acc[0] = derivs[order] / math.factorial(order)
        for k in range(order - 1, -1, -1):
            acc = self.space.mul(acc, h)
            acc[0] += derivs[k] / math.factorial(k)
        return Jet(self.space, acc)

    def reciprocal(self) -> "Jet":
        x0 = self.value
        if x0 == 0:
            raise ZeroDivisionError("jet reciprocal of a zero constant term")
        return self.compose(_power_derivatives(x0, -1.0, self.space.order))

    def sqrt(self) -> "Jet":
        return self.compose(_power_derivatives(self.value, 0.5, self.space.order))

    def conjugate(self) -> "Jet":
        # valid because the underlying variables are real displacements
        return Jet(self.space, self.coeffs.conj())

    def __repr__(self) -> str:
        return f"Jet(value={self.value!r}, nvars={self.space.nvars}, order={self.space.order})"


def conj(x):
    return x.conjugate()


def sqrt(x):
    if isinstance(x, Jet):
        return x.sqrt()
    if isinstance(x, (np.ndarray, np.generic, complex, float, int)):
        return np.sqrt(x)
    return x ** 0.5  # multiprecision scalars


@lru_cache(maxsize=None)
def wirtinger_matrix(npairs: int, order: int) -> np.ndarray:
    """Map real-coordinate Taylor coefficients to Wirtinger ones.

    Variable ``k < npairs`` of a real block is ``x_k`` and ``k + npairs`` is
    ``y_k``; the target ordering pairs ``w_k`` with ``conj(w_k)`` the same way.
    Spaces with several blocks are handled by :func:`block_wirtinger_matrix`.
    """
    return block_wirtinger_matrix((npairs,), order)


@lru_cache(maxsize=None)
def block_wirtinger_matrix(blocks: tuple[int, ...], order: int) -> np.ndarray:
    nvars = 2 * sum(blocks)
    space = jet_space(nvars, order)
    # substitution x = (w + wbar)/2, y = (w - wbar)/(2i), block by block
    subs = [None] * nvars
    offset = 0
    for nb in blocks:
        for k in range(nb):
            ix, iy = offset + k, offset + nb + k
            w = space.variable(ix, 0.0)
            wb = space.variable(iy, 0.0)
            subs[ix] = (w + wb) * 0.5
            subs[iy] = (w - wb) * (-0.5j)
        offset += 2 * nb
    images = np.zeros((space.size, space.size), dtype=complex)
    images[0, 0] = 1.0
    for i, mono in enumerate(space.monomials[1:], start=1):
        k = next(j for j, e in enumerate(mono) if e)
        prev = list(mono)
        prev[k] -= 1
        p = space.index[tuple(prev)]
        images[:, i] = space.mul(images[:, p], subs[k].coeffs)
    return images
