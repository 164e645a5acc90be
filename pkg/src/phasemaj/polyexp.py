"""Exact algebra for polynomials and for functions ``w*delta(z) + P(z)*exp(-z)``.

Polynomials carry :class:`fractions.Fraction` coefficients in increasing
degree order, with trailing zeros stripped so that equality is structural.
Floating point only appears in :func:`evaluate` and :meth:`Poly.evalf`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Union

import numpy as np

from .errors import DiracAtPoint, NonZeroDirac

Rational = Union[int, Fraction]


def as_fraction(value) -> Fraction:
    """Convert ``value`` to a Fraction, refusing binary floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (float, np.floating)):
        raise TypeError(f"exact rational expected, got float {value!r}")
    return Fraction(value)


@dataclass(frozen=True)
class Poly:
    """Polynomial with exact rational coefficients; ``coeffs[i]`` multiplies z**i."""

    coeffs: tuple = ()

    def __post_init__(self):
        c = [as_fraction(x) for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def constant(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def monomial(cls, k: int, c=1) -> "Poly":
        return cls((0,) * k + (c,))

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def coeff(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __repr__(self):
        return "Poly([" + ", ".join(str(c) for c in self.coeffs) + "])"

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(as_fraction(other))
        n = max(len(self), len(other))
        return Poly(tuple(self.coeff(i) + other.coeff(i) for i in range(n)))

    __radd__ = __add__

    def __neg__(self):
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(as_fraction(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.is_zero() or other.is_zero():
                return Poly()
            out = [Fraction(0)] * (len(self) + len(other) - 1)
            for i, a in enumerate(self.coeffs):
                if a:
                    for j, b in enumerate(other.coeffs):
                        out[i + j] += a * b
            return Poly(tuple(out))
        s = as_fraction(other)
        return Poly(tuple(c * s for c in self.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        s = as_fraction(scalar)
        return Poly(tuple(c / s for c in self.coeffs))

    def __divmod__(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(self) - len(other) + 1
        if dq <= 0:
            return Poly(), self
        quo = [Fraction(0)] * dq
        lc = other.lc
        for k in range(dq - 1, -1, -1):
            q = rem[k + len(other) - 1] / lc
            quo[k] = q
            if q:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= q * b
        return Poly(tuple(quo)), Poly(tuple(rem[: len(other) - 1]))

    def __floordiv__(self, other: "Poly"):
        return divmod(self, other)[0]

    def __mod__(self, other: "Poly"):
        return divmod(self, other)[1]

    # evaluation -----------------------------------------------------------

    def __call__(self, x):
        """Horner evaluation; exact for int/Fraction arguments."""
        if isinstance(x, (int, Fraction)):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc

    def evalf(self, z):
        """Vectorized float evaluation."""
        if self.is_zero():
            return np.zeros_like(np.asarray(z, dtype=float))
        return np.polyval([float(c) for c in reversed(self.coeffs)], np.asarray(z, dtype=float))

    def derivative(self) -> "Poly":
        return Poly(tuple(i * c for i, c in enumerate(self.coeffs) if i))

    def antiderivative(self) -> "Poly":
        """Antiderivative vanishing at zero."""
        return Poly((0,) + tuple(c / (i + 1) for i, c in enumerate(self.coeffs)))

    def scale_arg(self, c) -> "Poly":
        c = as_fraction(c)
        return Poly(tuple(a * c**i for i, a in enumerate(self.coeffs)))

    def monic(self) -> "Poly":
        return self / self.lc if self.coeffs else self


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic greatest common divisor (zero if both are zero)."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def laguerre(n: int) -> Poly:
    """Laguerre polynomial L_n by the three-term recurrence."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    prev, cur = Poly(), Poly((1,))
    x = Poly((0, 1))
    for k in range(n):
        nxt = ((2 * k + 1) * cur - x * cur - k * prev) / (k + 1)
        prev, cur = cur, nxt
    return cur


def scale_arg(p: Poly, c) -> Poly:
    """Return q with q(z) = p(c*z)."""
    return p.scale_arg(c)


def derivative(p: Poly) -> Poly:
    return p.derivative()


def antiderivative(p: Poly) -> Poly:
    return p.antiderivative()


@dataclass(frozen=True)
class PolyExpFn:
    """Generalized function ``dirac_weight*delta(z) + poly(z)*exp(-z)`` on z >= 0."""

    dirac_weight: Fraction = Fraction(0)
    poly: Poly = Poly()

    def __post_init__(self):
        object.__setattr__(self, "dirac_weight", as_fraction(self.dirac_weight))
        if not isinstance(self.poly, Poly):
            object.__setattr__(self, "poly", Poly(tuple(self.poly)))

    @classmethod
    def dirac(cls, w=1) -> "PolyExpFn":
        return cls(w, Poly())

    @classmethod
    def from_coeffs(cls, coeffs: Iterable, dirac_weight=0) -> "PolyExpFn":
        return cls(dirac_weight, Poly(tuple(coeffs)))

    def __add__(self, other: "PolyExpFn"):
        return PolyExpFn(self.dirac_weight + other.dirac_weight, self.poly + other.poly)

    def __sub__(self, other: "PolyExpFn"):
        return PolyExpFn(self.dirac_weight - other.dirac_weight, self.poly - other.poly)

    def __neg__(self):
        return PolyExpFn(-self.dirac_weight, -self.poly)

    def __mul__(self, scalar):
        s = as_fraction(scalar)
        return PolyExpFn(self.dirac_weight * s, self.poly * s)

    __rmul__ = __mul__

    def __call__(self, z):
        return evaluate(self, z)

    def total_integral(self) -> Fraction:
        """Exact integral over [0, inf), Dirac part included."""
        return self.dirac_weight + tail_poly(self.poly)(0)


class TailIntegral(NamedTuple):
    """``integral_x^inf f = r(x)*exp(-x) + (dirac_weight if include_dirac)``."""

    r: Poly
    include_dirac: bool
    x: Fraction
    dirac_weight: Fraction

    def exact_at_zero(self) -> Fraction:
        if self.x != 0:
            raise ValueError("exact value only available at x = 0")
        return self.r(Fraction(0)) + (self.dirac_weight if self.include_dirac else 0)

    def value(self) -> float:
        out = float(self.r(self.x)) * math.exp(-float(self.x))
        if self.include_dirac:
            out += float(self.dirac_weight)
        return out


def tail_poly(p: Poly) -> Poly:
    """R = sum_j p^(j), so that integral_x^inf p(z)exp(-z) dz = R(x)exp(-x)."""
    out = Poly()
    d = p
    while not d.is_zero():
        out = out + d
        d = d.derivative()
    return out


def tail_integral(f: PolyExpFn, x=0) -> TailIntegral:
    x = as_fraction(x)
    if x < 0:
        raise ValueError("x must be nonnegative")
    return TailIntegral(tail_poly(f.poly), x == 0, x, f.dirac_weight)


def convolve_exp(f: PolyExpFn) -> PolyExpFn:
    """f * exp(-z) on the half line.

    delta * e^-z = e^-z and (p' e^-z) * e^-z = (p - p(0)) e^-z.
    """
    return PolyExpFn(0, f.poly.antiderivative() + f.dirac_weight)


def deconvolve_exp(g: PolyExpFn) -> PolyExpFn:
    """Inverse of :func:`convolve_exp` on Dirac-free functions."""
    if g.dirac_weight != 0:
        raise NonZeroDirac("cannot deconvolve a function with a Dirac component")
    return PolyExpFn(g.poly.coeff(0), g.poly.derivative())


def evaluate(f: PolyExpFn, z) -> float:
    """Pointwise value poly(z)*exp(-z) as a float."""
    if z < 0:
        raise ValueError("z must be nonnegative")
    if z == 0 and f.dirac_weight != 0:
        raise DiracAtPoint("Dirac component at z = 0 has no pointwise value")
    if isinstance(z, (int, Fraction)):
        return float(f.poly(as_fraction(z))) * math.exp(-float(z))
    return float(f.poly(float(z))) * math.exp(-float(z))


def evaluate_array(f: PolyExpFn, z) -> np.ndarray:
    """Vectorized float evaluation of the continuous part."""
    z = np.asarray(z, dtype=float)
    return f.poly.evalf(z) * np.exp(-z)
