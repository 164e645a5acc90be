from fractions import Fraction as F

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from phasemaj.polyexp import Poly
from phasemaj.sturm import (
    cauchy_bound,
    certify_poly_nonnegative,
    count_roots,
    isolate_roots,
    refine_root,
    squarefree_part,
    sturm_sequence,
)


def from_roots(roots, lead=1):
    p = Poly((lead,))
    for r in roots:
        p = p * Poly((-F(r), 1))
    return p


def test_squarefree_part_removes_multiplicity():
    p = from_roots([1, 1, 2, F(1, 3), F(1, 3), F(1, 3)])
    assert squarefree_part(p) == from_roots([1, 2, F(1, 3)])


def test_count_roots_half_open():
    seq = sturm_sequence(from_roots([1, 2, 3]))
    assert count_roots(seq, 0, None) == 3
    assert count_roots(seq, 1, 3) == 2
    assert count_roots(seq, 0, 1) == 1


@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=20), min_size=1, max_size=6, unique=True))
def test_isolation_finds_every_root(roots):
    p = from_roots(roots)
    found = isolate_roots(p, -cauchy_bound(p), None)
    assert len(found) == len([r for r in roots if r > -cauchy_bound(p)])
    for r, iv in zip(sorted(roots), found):
        assert iv.lo <= r <= iv.hi
        assert (iv.lo < r) or iv.exact


def test_refine_root_tightens_to_sqrt2():
    p = Poly((-2, 0, 1))
    (iv,) = isolate_roots(p, 0)
    r = refine_root(p, iv, F(1, 10**12))
    assert r.lo < 2**0.5 <= r.hi and r.hi - r.lo <= F(1, 10**12)


def test_certificate_double_root_is_nonnegative():
    cert = certify_poly_nonnegative(from_roots([1, 1]))
    assert cert.nonneg and cert.root_count == 1


def test_certificate_tangent_pair_missed_by_coarse_sampling():
    # (z - 1)^2 - 1e-12 dips below zero only on a tiny interval around 1
    p = from_roots([1, 1]) - Poly((F(1, 10**12),))
    cert = certify_poly_nonnegative(p)
    assert not cert.nonneg
    assert p(cert.point) < 0
    grid = np.linspace(0, 2, 1001)[::7]
    assert np.all(np.polyval([1, -2, 1 - 1e-12], grid) >= -1e-9)


def test_certificate_reports_negative_interval():
    cert = certify_poly_nonnegative(Poly((-1, 2)))
    assert not cert.nonneg
    lo, hi = cert.interval
    assert lo == 0 and hi >= F(1, 2) and lo < cert.point < F(1, 2)


def test_certificate_negative_at_infinity():
    cert = certify_poly_nonnegative(Poly((1, 0, -1)))
    assert not cert.nonneg and cert.point > 1 and cert.interval[1] is None


@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=8), min_size=1, max_size=7))
def test_certificate_agrees_with_exact_dense_check(coeffs):
    p = Poly(tuple(coeffs))
    if p.is_zero():
        return
    cert = certify_poly_nonnegative(p)
    if not cert.nonneg:
        assert p(cert.point) < 0 and cert.point > 0
    else:
        pts = [F(k, 16) for k in range(1, 16 * 12)]
        assert all(p(t) >= 0 for t in pts)
