from fractions import Fraction as F

import pytest

from phasemaj.errors import BoundExceeded
from phasemaj.fockspace import FockMixture, certify_nonnegative, mixture_radial
from phasemaj.sigma import (
    coefficients_mn_form,
    equal_mixture,
    sigma_coefficients,
    symmetry_check,
)


@pytest.mark.parametrize(
    "m, n, expected",
    [(0, 0, (1,)), (1, 1, (F(1, 2), 0, F(1, 2))), (1, 0, (F(1, 2), F(1, 2)))],
)
def test_examples(m, n, expected):
    assert sigma_coefficients(m, n).a == tuple(F(v) for v in expected)


def test_bound():
    with pytest.raises(BoundExceeded):
        sigma_coefficients(13, 12)
    assert len(sigma_coefficients(13, 12, bound=25).a) == 26


def test_index_forms_agree():
    for M in range(9):
        for m in range(M + 1):
            assert sigma_coefficients(m, M - m).a == coefficients_mn_form(m, M - m)


def test_rows_nonnegative_and_normalized():
    for M in range(13):
        for m in range(M + 1):
            a = sigma_coefficients(m, M - m).a
            assert sum(a) == 1
            assert all(v >= 0 for v in a)


def test_columns_normalized():
    for M in range(13):
        rows = [sigma_coefficients(m, M - m).a for m in range(M + 1)]
        assert all(sum(r[z] for r in rows) == 1 for z in range(M + 1))


@pytest.mark.parametrize("M", [0, 2, 10])
def test_symmetry(M):
    assert symmetry_check(M)


def test_equal_mixture_examples():
    assert equal_mixture(0) == FockMixture.pure(0)
    assert equal_mixture(1) == FockMixture({0: F(1, 2), 1: F(1, 2)})
    assert equal_mixture(2) == FockMixture.uniform(2)


def test_equal_mixture_profiles_nonnegative():
    for M in range(9):
        assert certify_nonnegative(mixture_radial(equal_mixture(M))).nonneg


def test_sigma_as_mixture():
    assert sigma_coefficients(1, 1).as_mixture() == FockMixture({0: F(1, 2), 2: F(1, 2)})
