"""Sturm sequences over the rationals: root counting, isolation, sign certificates."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .polyexp import Poly, as_fraction, poly_gcd


def squarefree_part(p: Poly) -> Poly:
    if p.degree <= 0:
        return p
    return (p // poly_gcd(p, p.derivative())).monic()


def sturm_sequence(p: Poly) -> list[Poly]:
    """Sturm chain p0 = p, p1 = p', p_{k+1} = -rem(p_{k-1}, p_k).

    ``p`` should be squarefree for the root count to be exact.
    """
    if p.is_zero():
        return []
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        seq.append(-(seq[-2] % seq[-1]))
    seq.pop()
    return seq


def _variations(signs) -> int:
    count, last = 0, 0
    for s in signs:
        if s == 0:
            continue
        if last and s != last:
            count += 1
        last = s
    return count


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def variations_at(seq: Sequence[Poly], x) -> int:
    """Sign variations of the chain at ``x``; ``x=None`` means +infinity."""
    if x is None:
        return _variations(_sign(q.lc) for q in seq)
    x = as_fraction(x)
    return _variations(_sign(q(x)) for q in seq)


def count_roots(seq: Sequence[Poly], lo, hi=None) -> int:
    """Number of distinct real roots in the half-open interval (lo, hi]."""
    return variations_at(seq, lo) - variations_at(seq, hi)


def cauchy_bound(p: Poly) -> Fraction:
    """Every real root of ``p`` has absolute value below this bound."""
    lc = abs(p.lc)
    return 1 + max((abs(c) / lc for c in p.coeffs[:-1]), default=Fraction(0))


@dataclass(frozen=True)
class RootInterval:
    """Half-open (lo, hi] holding exactly one root; ``lo == hi`` marks an exact rational root."""

    lo: Fraction
    hi: Fraction

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2


def isolate_roots(p: Poly, lo=0, hi=None) -> list[RootInterval]:
    """Disjoint isolating intervals for the distinct roots of ``p`` in (lo, hi].

    ``hi=None`` searches (lo, inf). The upper endpoint of a non-exact interval
    is never a root; a lower endpoint can only be a root if it is the upper
    endpoint of the preceding (exact) interval.
    """
    s = squarefree_part(p)
    if s.degree <= 0:
        return []
    seq = sturm_sequence(s)
    lo = as_fraction(lo)
    top = cauchy_bound(s) if hi is None else as_fraction(hi)
    if hi is None:
        top = max(top, lo + 1)
    out: list[RootInterval] = []
    stack = [(lo, top, count_roots(seq, lo, top))]
    while stack:
        a, b, n = stack.pop()
        if n == 0:
            continue
        if n == 1:
            if s(b) == 0:
                out.append(RootInterval(b, b))
            else:
                out.append(RootInterval(a, b))
            continue
        m = (a + b) / 2
        left = count_roots(seq, a, m)
        stack.append((m, b, n - left))
        stack.append((a, m, left))
    out.sort(key=lambda r: r.hi)
    return out


def refine_root(p: Poly, iv: RootInterval, width) -> RootInterval:
    """Bisect an isolating interval of a squarefree ``p`` until narrower than ``width``."""
    if iv.exact:
        return iv
    width = as_fraction(width)
    seq = sturm_sequence(squarefree_part(p))
    a, b = iv.lo, iv.hi
    while b - a > width:
        m = (a + b) / 2
        if count_roots(seq, a, m):
            b = m
            if p(m) == 0:
                return RootInterval(m, m)
        else:
            a = m
    return RootInterval(a, b)


@dataclass(frozen=True)
class NonnegCertificate:
    """Exact decision of ``p >= 0`` on (0, inf).

    When ``nonneg`` is false, ``point`` is a rational in the open interval
    (``interval[0]``, ``interval[1]``) at which ``p`` is strictly negative;
    ``interval[1] is None`` stands for +infinity. ``sturm_counts`` are the sign
    variations of the squarefree part's Sturm chain at 0 and at +infinity.
    """

    nonneg: bool
    sturm_counts: tuple
    leading_sign: int
    roots: tuple = field(default_factory=tuple)
    interval: Optional[tuple] = None
    point: Optional[Fraction] = None

    @property
    def root_count(self) -> int:
        return self.sturm_counts[0] - self.sturm_counts[1]


def certify_poly_nonnegative(p: Poly) -> NonnegCertificate:
    """Decide exactly whether ``p(z) >= 0`` for every z > 0.

    The sign of ``p`` is constant between consecutive distinct roots, so one
    rational test point per gap decides the question, including tangential
    (even multiplicity) roots that sampling would miss.
    """
    if p.is_zero():
        return NonnegCertificate(True, (0, 0), 0)
    s = squarefree_part(p)
    seq = sturm_sequence(s)
    counts = (variations_at(seq, 0), variations_at(seq, None))
    lead = 1 if p.lc > 0 else -1
    roots = isolate_roots(p, 0, None)

    bounds = [Fraction(0)] + [r.lo for r in roots]
    tops = [r.hi for r in roots] + [None]
    for i, (left, right) in enumerate(zip([None] + roots, roots + [None])):
        if right is None:
            t = left.hi + 1 if left is not None else Fraction(1)
        elif left is not None and not left.exact:
            t = left.hi
        else:
            t = _point_before(s, seq, Fraction(0) if left is None else left.hi, right)
        value = p(t)
        if value < 0:
            return NonnegCertificate(
                False, counts, lead, tuple(roots), (bounds[i], tops[i]), t
            )
    return NonnegCertificate(True, counts, lead, tuple(roots))


def _point_before(s: Poly, seq, floor: Fraction, right: RootInterval) -> Fraction:
    """A rational strictly between ``floor`` (a root or 0) and the root isolated by ``right``."""
    if right.exact:
        return (floor + right.hi) / 2
    if right.lo > floor:
        return right.lo
    lo, hi = right.lo, right.hi
    while True:
        m = (lo + hi) / 2
        if s(m) == 0:
            return (lo + m) / 2
        if count_roots(seq, lo, m) == 0:
            return m
        hi = m
