"""Fock-state mixtures leaving a balanced beamsplitter fed with |m> and |n>."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

from .errors import BoundExceeded, IdentityViolation
from .fockspace import FockMixture

DEFAULT_BOUND = 24


@dataclass(frozen=True)
class SigmaCoefficients:
    """Weights ``a[z]`` of |z><z| in sigma(m, n), z = 0..m+n."""

    m: int
    n: int
    a: tuple

    def as_mixture(self) -> FockMixture:
        return FockMixture(dict(enumerate(self.a)))


def _coefficient(m: int, M: int, z: int) -> Fraction:
    # index range written with M = m + n held fixed
    lo, hi = max(0, z + m - M), min(z, m)
    total = 0
    for i in range(lo, hi + 1):
        ti = comb(m, i) * comb(M - m, z - i)
        for j in range(lo, hi + 1):
            tj = comb(m, j) * comb(M - m, z - j)
            total += (-1) ** (i + j) * ti * tj * factorial(z) * factorial(M - z)
    return Fraction(total, factorial(m) * factorial(M - m) * 2**M)


def coefficients_mn_form(m: int, n: int) -> tuple:
    """Same weights with the index range written in terms of (m, n)."""
    out = []
    for z in range(m + n + 1):
        lo, hi = max(0, z - n), min(z, m)
        total = 0
        for i in range(lo, hi + 1):
            for j in range(lo, hi + 1):
                total += (
                    (-1) ** (i + j)
                    * comb(m, i) * comb(n, z - i)
                    * comb(m, j) * comb(n, z - j)
                    * factorial(z) * factorial(m + n - z)
                )
        out.append(Fraction(total, factorial(m) * factorial(n) * 2 ** (m + n)))
    return tuple(out)


def sigma_coefficients(m: int, n: int, bound: int = DEFAULT_BOUND) -> SigmaCoefficients:
    if m < 0 or n < 0:
        raise ValueError("m and n must be nonnegative")
    if m + n > bound:
        raise BoundExceeded(f"m + n = {m + n} exceeds the configured bound {bound}")
    M = m + n
    a = tuple(_coefficient(m, M, z) for z in range(M + 1))
    if sum(a) != 1:
        raise IdentityViolation(f"sigma({m},{n}) weights sum to {sum(a)}")
    return SigmaCoefficients(m, n, a)


def symmetry_check(M: int, bound: int = DEFAULT_BOUND) -> bool:
    """True iff a_{m,z} == a_{z,m} for all 0 <= m, z <= M."""
    rows = [sigma_coefficients(m, M - m, bound).a for m in range(M + 1)]
    return all(rows[m][z] == rows[z][m] for m in range(M + 1) for z in range(M + 1))


def equal_mixture(M: int, bound: int = DEFAULT_BOUND) -> FockMixture:
    """(1/(M+1)) * sum_m sigma(m, M-m), checked to be the uniform mixture of |0>..|M>."""
    if M < 0:
        raise ValueError("M must be nonnegative")
    weights = [Fraction(0)] * (M + 1)
    for m in range(M + 1):
        for z, a in enumerate(sigma_coefficients(m, M - m, bound).a):
            weights[z] += a
    weights = [w / (M + 1) for w in weights]
    if any(w != Fraction(1, M + 1) for w in weights):
        raise IdentityViolation(f"equal sigma mixture for M={M} is not uniform: {weights}")
    return FockMixture(dict(enumerate(weights)))
