"""Radial Wigner profiles of Fock states and their finite mixtures.

Convention: with z = r**2 a radial profile stores ``pi * W(r)`` so that the
vacuum is exactly ``exp(-z)`` and every profile integrates to 1 in dz.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import NotNormalized
from .polyexp import (
    Poly,
    PolyExpFn,
    as_fraction,
    convolve_exp,
    deconvolve_exp,
    evaluate,
    laguerre,
    tail_poly,
)
from .sturm import NonnegCertificate, certify_poly_nonnegative


@dataclass(frozen=True)
class FockMixture:
    """Finite convex combination of Fock states, ``{n: weight}``."""

    weights: Mapping[int, Fraction]

    def __post_init__(self):
        clean = {}
        for n, w in self.weights.items():
            if not isinstance(n, int) or isinstance(n, bool) or n < 0:
                raise ValueError(f"Fock index must be a nonnegative integer, got {n!r}")
            w = as_fraction(w)
            if w < 0:
                raise ValueError(f"negative weight {w} for |{n}>")
            if w:
                clean[n] = clean.get(n, Fraction(0)) + w
        total = sum(clean.values(), Fraction(0))
        if total != 1:
            raise NotNormalized(f"mixture weights sum to {total}, not 1")
        object.__setattr__(self, "weights", dict(sorted(clean.items())))

    @classmethod
    def pure(cls, n: int) -> "FockMixture":
        return cls({n: Fraction(1)})

    @classmethod
    def uniform(cls, M: int) -> "FockMixture":
        """Equal-weight mixture of |0>, ..., |M>."""
        return cls({z: Fraction(1, M + 1) for z in range(M + 1)})

    @property
    def max_index(self) -> int:
        return max(self.weights)

    def __str__(self):
        return ",".join(f"{n}:{w}" for n, w in self.weights.items())


@dataclass(frozen=True)
class RadialProfile:
    """A Dirac-free ``PolyExpFn`` with unit integral over [0, inf)."""

    fn: PolyExpFn

    def __post_init__(self):
        if self.fn.dirac_weight != 0:
            raise ValueError("a radial profile cannot carry a Dirac component")
        total = self.fn.total_integral()
        if total != 1:
            raise NotNormalized(f"profile integrates to {total}, not 1")

    @property
    def poly(self) -> Poly:
        return self.fn.poly

    def __call__(self, z) -> float:
        return evaluate(self.fn, z)


def fock_poly(n: int) -> Poly:
    """(-1)**n * L_n(2z)."""
    p = laguerre(n).scale_arg(2)
    return -p if n % 2 else p


def fock_radial(n: int) -> RadialProfile:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return RadialProfile(PolyExpFn(0, fock_poly(n)))


def mixture_radial(mix: FockMixture) -> RadialProfile:
    poly = Poly()
    for n, w in mix.weights.items():
        poly = poly + w * fock_poly(n)
    return RadialProfile(PolyExpFn(0, poly))


def vacuum() -> RadialProfile:
    return fock_radial(0)


def certify_nonnegative(p: RadialProfile) -> NonnegCertificate:
    """Exact test of ``p >= 0`` on [0, inf); exp(-z) > 0 so only the polynomial matters."""
    return certify_poly_nonnegative(p.poly)


@dataclass(frozen=True)
class VacuumDecomposition:
    """``profile = c * exp(-z)`` together with the exact entry-condition checks on ``c``.

    ``tail`` is R with integral_x^inf c = R(x) exp(-x) for x > 0.
    """

    c: PolyExpFn
    total: Fraction
    tail: Poly
    tail_certificate: NonnegCertificate

    @property
    def total_is_one(self) -> bool:
        return self.total == 1

    @property
    def tail_nonneg(self) -> bool:
        return self.tail_certificate.nonneg

    @property
    def entry_conditions_hold(self) -> bool:
        return self.total_is_one and self.tail_nonneg


def decompose(fn: PolyExpFn) -> VacuumDecomposition:
    c = deconvolve_exp(fn)
    tail = tail_poly(c.poly)
    return VacuumDecomposition(c, c.total_integral(), tail, certify_poly_nonnegative(tail))


def vacuum_decomposition(p: RadialProfile) -> VacuumDecomposition:
    dec = decompose(p.fn)
    assert convolve_exp(dec.c) == p.fn
    return dec


def recursion_sides(n: int) -> tuple[Poly, Poly]:
    """Both sides of the tail identity for the derivative of (-1)**n L_n(2z).

    Left: R with integral_x^inf (-1)**n d/dz[L_n(2z)] e^-z dz = R(x) e^-x.
    Right: 2 * sum_{i<n} (-1)**i L_i(2x).
    """
    if n < 1:
        raise ValueError("n must be positive")
    lhs = tail_poly(fock_poly(n).derivative())
    rhs = Poly()
    for i in range(n):
        rhs = rhs + fock_poly(i)
    return lhs, 2 * rhs


def recursion_identity_check(n: int) -> bool:
    lhs, rhs = recursion_sides(n)
    return lhs == rhs


def mixture_from_recursion(n: int) -> RadialProfile:
    """Equal-weight mixture of |0>, ..., |n-1> (n states, as the sum is written)."""
    if n < 1:
        raise ValueError("n must be positive")
    return mixture_radial(FockMixture.uniform(n - 1))
