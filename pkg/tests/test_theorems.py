import random
from fractions import Fraction as F

import numpy as np
import pytest

from phasemaj.errors import (
    EntryConditionsFailed,
    Lemma1Failure,
    SuffixConditionFailed,
    TheoremViolation,
)
from phasemaj.fockspace import FockMixture, fock_radial, mixture_radial, vacuum_decomposition
from phasemaj.majorize import majorizes_discrete
from phasemaj.polyexp import Poly, PolyExpFn, convolve_exp, evaluate_array
from phasemaj.theorems import (
    ConeVertexSpec,
    NotApplicable,
    Theorem1Instance,
    build_discretization,
    build_v0,
    build_vk_uk,
    cone_point,
    cone_vertex,
    convolution_G,
    discrete_vs_continuous_error,
    find_suffix_threshold,
    lemma1_decompose,
    lemma1_reconstruct,
    monte_carlo_theorem1,
    toeplitz_convolve,
    verify_theorem1,
    verify_theorem2_convergence,
    vertex_table,
    x_from_lambdas,
)

HALF = F(1, 2)


def vertex_rows(a):
    """Rows (V, U) and lambda columns of the N = 3 vertex table, symbolic in a."""
    return {
        "λλλ": ((1, a, a**2, 0, 0, 0), (0, 0, 0)),
        "000": ((0, 0, 0, 1, a, a**2), (1, 1, 1)),
        "0λλ": ((0, 1, a, a**2, 0, 0), (1, 0, 0)),
        "λ0λ": ((1, 0, a, a**2 - a**3, a**3, 0), (0, a, 0)),
        "λλ0": ((1, a, 0, a**2 - a**3, a**3 - a**4, a**4), (0, 0, a**2)),
        "λ00": ((1, 0, 0, a - a**3, a**2, a**3), (0, a, a)),
        "0λ0": ((0, 1, 0, a, a**2 - a**3, a**3), (1, 0, a)),
        "00λ": ((0, 0, 1, a, a**2, 0), (1, 1, 0)),
    }


def test_build_v0_examples():
    assert build_v0(3, HALF) == [1, HALF, F(1, 4)]
    assert build_v0(1, F(2, 7)) == [1]
    assert build_v0(4, F(1, 3)) == [1, F(1, 3), F(1, 9), F(1, 27)]


def test_build_vk_examples():
    assert build_vk_uk(3, HALF, 1) == [-1, HALF, F(1, 4), F(1, 4), 0, 0]
    assert build_vk_uk(3, HALF, 3) == [0, 0, -1, HALF, F(1, 4), F(1, 4)]
    for N in range(1, 7):
        for k in range(1, N + 1):
            assert sum(build_vk_uk(N, F(2, 5), k)) == 0


def test_convolution_examples():
    assert convolution_G(Theorem1Instance(3, HALF, (0, 0, 0))) == build_v0(3, HALF) + [0, 0, 0]
    assert convolution_G(Theorem1Instance(3, HALF, (1, 1, 1))) == [0, 0, 0, 1, HALF, F(1, 4)]
    assert convolution_G(Theorem1Instance(3, HALF, (0, HALF, 0))) == [1, 0, HALF, F(1, 8), F(1, 8), 0]


def test_construction_equivalence_random():
    rng = random.Random(1)
    for _ in range(500):
        N = rng.randint(1, 8)
        a = F(rng.randint(1, 9), 10)
        lam = [F(rng.randint(0, 16), 8) for _ in range(N)]
        direct = cone_point(N, a, lam)
        assert direct == toeplitz_convolve(x_from_lambdas(lam), build_v0(N, a))
        assert sum(direct) == sum(build_v0(N, a))


def test_instance_validation():
    with pytest.raises(ValueError):
        Theorem1Instance(3, F(3, 2), (0, 0, 0))
    with pytest.raises(ValueError):
        Theorem1Instance(3, HALF, (0, -1, 0))
    with pytest.raises(ValueError):
        Theorem1Instance(3, HALF, (0, 0))


def test_verify_theorem1_examples():
    assert verify_theorem1(Theorem1Instance(3, HALF, (0, 0, 0))).holds
    assert verify_theorem1(Theorem1Instance(3, HALF, (1, 1, 1))).holds
    na = verify_theorem1(Theorem1Instance(3, HALF, (2, 0, 0)))
    assert isinstance(na, NotApplicable) and na.index == 0


def test_monte_carlo_small():
    for a in (F(1, 4), HALF, F(3, 4)):
        s = monte_carlo_theorem1(3, a, 10**4, seed=2024)
        assert s.violations == 0
        assert s.holds > 0 and s.not_applicable > 0
        assert s.holds + s.not_applicable == 10**4


def test_monte_carlo_is_independent_of_jobs():
    a = monte_carlo_theorem1(3, F(1, 3), 3000, seed=5, chunk=500)
    b = monte_carlo_theorem1(3, F(1, 3), 3000, seed=5, chunk=500, jobs=2)
    assert (a.holds, a.not_applicable, a.min_margin) == (b.holds, b.not_applicable, b.min_margin)


@pytest.mark.parametrize("a", [HALF, F(1, 3)])
def test_vertex_table_reproduced(a):
    rows = vertex_rows(a)
    table = vertex_table(3, a)
    assert len(table) == 8
    top = build_v0(3, a) + [0, 0, 0]
    for v in table:
        vec, lam = rows[v.spec.label]
        assert v.vector == tuple(F(x) for x in vec)
        assert v.lambdas == tuple(F(x) for x in lam)
        assert majorizes_discrete(top, list(v.vector), tol=0).holds


def test_vertex_examples():
    v = cone_vertex(ConeVertexSpec.parse("λ0λ", HALF))
    assert v.vector == (1, 0, HALF, F(1, 8), F(1, 8), 0)
    assert cone_vertex(ConeVertexSpec.parse("lll", HALF)).vector == tuple(build_v0(3, HALF) + [0, 0, 0])


def test_vertex_transfers_replay():
    v = cone_vertex(ConeVertexSpec.parse("λ00", F(2, 5)))
    G = build_v0(3, F(2, 5)) + [F(0)] * 3
    for i, j, d in v.transfers:
        assert 0 <= d <= G[i] - G[j]
        G[i] -= d
        G[j] += d
    assert tuple(G) == v.vector


def test_seven_dimensional_vertex_pattern():
    a = F(3, 7)
    v = cone_vertex(ConeVertexSpec.parse("λλ0λλ0λ", a))
    expected = (1, a, 0, a**2, a**3, 0, a**4, a**5 - a**7, a**6 - a**8, a**7,
                a**8 - a**9, a**9 - a**10, a**10, 0)
    assert v.vector == tuple(F(x) for x in expected)
    assert v.lambdas == (0, 0, a**2, 0, 0, a**4, 0)


def test_all_vertices_constructible_up_to_8():
    for N in range(1, 9):
        for v in vertex_table(N, F(2, 3)):
            assert all(x >= 0 for x in v.vector)


def test_spec_validation():
    with pytest.raises(ValueError):
        ConeVertexSpec(3, HALF, ("0", "λ"))
    with pytest.raises(ValueError):
        ConeVertexSpec.parse("0x0", HALF)


def test_point_outside_cone_still_majorized():
    # negative middle lambda; G[2] = (1 - a)(a^2 - eps), so eps <= (1 - a)^2
    # suffices only for a >= 1/2 and eps <= min(a^2, (1 - a)^2) in general
    for a in (F(1, 5), F(1, 3), HALF, F(3, 4)):
        bound = min(a**2, (1 - a) ** 2)
        for eps in (bound, bound / 3):
            G = cone_point(3, a, (a, -eps, a**2))
            assert G[2] == (1 - a) * (a**2 - eps)
            assert all(g >= 0 for g in G)
            assert majorizes_discrete(build_v0(3, a) + [0] * 3, G, tol=0).holds


def test_point_outside_cone_bound_is_sharp_below_half():
    a = F(1, 3)
    G = cone_point(3, a, (a, -((1 - a) ** 2), a**2))
    assert G[2] < 0


def test_lemma1_examples():
    assert lemma1_decompose([1, 0, 0]) == [1, 0, 0]
    assert lemma1_decompose([HALF, F(-1, 4), F(3, 4)]) == [1, HALF, F(3, 4)]
    with pytest.raises(Lemma1Failure) as exc:
        lemma1_decompose([1, 1, -1])
    assert exc.value.k == 2 and exc.value.suffix == -1


def test_lemma1_round_trip():
    rng = random.Random(9)
    done = 0
    while done < 200:
        x = [F(rng.randint(-4, 8), 4) for _ in range(rng.randint(1, 7))]
        try:
            lam = lemma1_decompose(x)
        except Lemma1Failure:
            continue
        assert lemma1_reconstruct(lam) == x
        done += 1


ERLANG_C = PolyExpFn(0, Poly((1,)))


def test_discretization_of_dirac():
    d = build_discretization(PolyExpFn.dirac(), 30, 32)
    assert d.k_tilde == 1.0
    assert np.array_equal(d.C_vec, np.r_[1.0, np.zeros(32)])
    assert np.array_equal(d.G_vec, np.r_[d.e0_vec, np.zeros(32)])


def test_discretization_shapes_and_normalization():
    d = build_discretization(ERLANG_C, 30, 64)
    assert d.C_vec.shape == (65,) and d.e0_vec.shape == (64,) and d.G_vec.shape == (128,)
    assert d.C_vec.sum() == pytest.approx(1, abs=1e-15)
    assert d.delta_z == F(30, 128)


def test_suprema_cover_interior_maximum():
    # c(z) = z e^-z peaks inside the cell containing z = 1
    c = PolyExpFn(0, Poly((0, 1)))
    dz = F(3, 4)
    from phasemaj.theorems import cell_suprema

    sup = cell_suprema(c, dz, 4)
    assert sup[1] == pytest.approx(np.exp(-1), rel=1e-12)
    assert sup[0] == pytest.approx(0.75 * np.exp(-0.75), rel=1e-12)


def test_erlang_error_decreases():
    errs = [discrete_vs_continuous_error(build_discretization(ERLANG_C, 30, n)) for n in (32, 64, 128, 256)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    d = build_discretization(ERLANG_C, 30, 256)
    g = evaluate_array(convolve_exp(ERLANG_C), d.grid[:256])
    assert np.max(np.abs(d.G_vec[:256] / d.k_tilde - g)) < 0.02


def test_w1_discretization_has_negative_entries_near_origin():
    c = vacuum_decomposition(fock_radial(1)).c
    d = build_discretization(c, 30, 64)
    assert d.G_vec[0] < 0
    g = evaluate_array(convolve_exp(c), d.grid[:64])
    assert np.all(d.G_vec[:64][g > 1e-3] >= 0)


def test_entry_conditions_enforced():
    with pytest.raises(EntryConditionsFailed):
        build_discretization(PolyExpFn(0, Poly((2,))), 30, 16)
    with pytest.raises(EntryConditionsFailed):
        build_discretization(PolyExpFn(2, Poly((-1,))), 30, 16)


def test_suffix_threshold_found():
    # a negative Dirac weight outweighs the coarsely discounted tail term
    c = vacuum_decomposition(fock_radial(1)).c
    with pytest.raises(SuffixConditionFailed) as exc:
        build_discretization(c, 8, 1)
    assert exc.value.delta_z == 4.0 and exc.value.index == 0
    assert find_suffix_threshold(c, 8) == (2, 2.0)
    d = build_discretization(c, 8, 2)
    assert np.all(np.cumsum(d.C_vec[::-1]) >= 0)


def test_theorem2_dirac_trivial():
    r = verify_theorem2_convergence(PolyExpFn.dirac(), [(30, 32), (30, 64)])
    assert r.all_hold and r.witness.transfers == 0 and r.witness.doubly_stochastic


def test_theorem2_erlang():
    r = verify_theorem2_convergence(ERLANG_C, [(30, 64), (30, 128), (30, 256)])
    assert r.all_hold and r.errors_nonincreasing
    assert r.levels[-1].error < r.levels[-2].error < r.levels[0].error
    assert r.witness.doubly_stochastic


def test_theorem2_uniform_three():
    c = vacuum_decomposition(mixture_radial(FockMixture.uniform(2))).c
    r = verify_theorem2_convergence(c, [(30, 64), (30, 128), (30, 256)])
    assert r.all_hold and r.witness.doubly_stochastic


def test_theorem2_w1_not_applicable():
    c = vacuum_decomposition(fock_radial(1)).c
    r = verify_theorem2_convergence(c, [(30, 64), (30, 128)])
    assert all(not lv.applicable and lv.verdict is None for lv in r.levels)
    assert r.witness is None


def test_schedule_validation():
    with pytest.raises(ValueError):
        verify_theorem2_convergence(ERLANG_C, [(30, 64), (30, 100)])


def test_theorem_violation_is_raised_on_bad_verdict(monkeypatch):
    import phasemaj.theorems as th
    from phasemaj.majorize import MajorizationVerdict

    monkeypatch.setattr(th, "majorizes_discrete", lambda *a, **k: MajorizationVerdict(False, 1, 1, -1, 1, 0))
    with pytest.raises(TheoremViolation) as exc:
        th.verify_theorem1(Theorem1Instance(2, HALF, (0, 0)))
    assert exc.value.instance.N == 2
