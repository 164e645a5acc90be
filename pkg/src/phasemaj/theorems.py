"""Constructive and numerical checks of the convolution majorization theorems.

Discrete part: the cone of convolutions ``x * v0`` with ``v0 = (1, a, ..., a^(N-1))``
and ``x`` built from nonnegative elementary differences; everything is exact.

Continuous part: discretize ``c * exp(-z)`` on a grid and check that the
discrete statement holds level by level while the grid is refined.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ConstructionFailure,
    ConvergenceViolation,
    EntryConditionsFailed,
    IdentityViolation,
    Lemma1Failure,
    SuffixConditionFailed,
    TheoremViolation,
)
from .fockspace import decompose
from .majorize import (
    DEFAULT_TOLERANCE,
    MajorizationVerdict,
    is_doubly_stochastic,
    majorizes_discrete,
    robin_hood_decompose,
)
from .polyexp import PolyExpFn, as_fraction, convolve_exp, evaluate_array, tail_poly
from .sturm import isolate_roots, refine_root

LAMBDA = "λ"
MAX_VERTEX_N = 12


@dataclass(frozen=True)
class Theorem1Instance:
    N: int
    a: Fraction
    lambdas: tuple

    def __post_init__(self):
        a = as_fraction(self.a)
        lambdas = tuple(as_fraction(v) for v in self.lambdas)
        if self.N < 1:
            raise ValueError("N must be positive")
        if not 0 < a < 1:
            raise ValueError("a must lie strictly between 0 and 1")
        if len(lambdas) != self.N:
            raise ValueError(f"expected {self.N} lambdas, got {len(lambdas)}")
        if any(v < 0 for v in lambdas):
            raise ValueError("lambdas must be nonnegative")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "lambdas", lambdas)


def build_v0(N: int, a) -> list:
    a = as_fraction(a)
    if not 0 < a < 1:
        raise ValueError("a must lie strictly between 0 and 1")
    return [a**i for i in range(N)]


def build_vk_uk(N: int, a, k: int) -> list:
    """Elementary convolution vector (v_k, u_k); ``k`` is 1-based.

    Positions k..k+N (1-based) hold -1, 1-a, a-a^2, ..., a^(N-2)-a^(N-1), a^(N-1).
    """
    if not 1 <= k <= N:
        raise ValueError("k must satisfy 1 <= k <= N")
    p = build_v0(N, a)
    body = [-p[0]] + [p[i - 1] - p[i] for i in range(1, N)] + [p[N - 1]]
    out = [Fraction(0)] * (2 * N)
    out[k - 1 : k + N] = body
    return out


def cone_point(N: int, a, lambdas: Sequence) -> list:
    """(v0, 0) + sum_k lambda_k (v_k, u_k), without any sign requirement on lambda."""
    G = build_v0(N, a) + [Fraction(0)] * N
    for k, lam in enumerate(lambdas, start=1):
        lam = as_fraction(lam)
        if lam:
            for i, v in enumerate(build_vk_uk(N, a, k)):
                G[i] += lam * v
    return G


def toeplitz_convolve(y: Sequence, x: Sequence) -> list:
    """Full discrete convolution (len(y) + len(x) - 1 entries), exact for rationals."""
    out = [Fraction(0)] * (len(y) + len(x) - 1)
    for i, yi in enumerate(y):
        if yi:
            for j, xj in enumerate(x):
                out[i + j] += yi * xj
    return out


def x_from_lambdas(lambdas: Sequence) -> list:
    """(1, 0, ..., 0) + sum_k (0, .., -lambda_k, lambda_k, .., 0), length N + 1."""
    x = [Fraction(1)] + [Fraction(0)] * len(lambdas)
    for k, lam in enumerate(lambdas):
        x[k] -= lam
        x[k + 1] += lam
    return x


def convolution_G(inst: Theorem1Instance) -> list:
    """G = x * v0 computed as a cone point and cross-checked as a Toeplitz product."""
    direct = cone_point(inst.N, inst.a, inst.lambdas)
    via_x = toeplitz_convolve(x_from_lambdas(inst.lambdas), build_v0(inst.N, inst.a))
    if direct != via_x:
        raise IdentityViolation(f"cone and convolution forms of G disagree for {inst}")
    return direct


@dataclass(frozen=True)
class NotApplicable:
    """The hypothesis G >= 0 fails; ``index`` is the first negative entry (0-based)."""

    G: tuple
    index: int


def verify_theorem1(inst: Theorem1Instance):
    """Majorization verdict for ``(v0, 0) > G``, or :class:`NotApplicable` if G has a negative entry."""
    G = convolution_G(inst)
    neg = next((i for i, g in enumerate(G) if g < 0), None)
    if neg is not None:
        return NotApplicable(tuple(G), neg)
    top = build_v0(inst.N, inst.a) + [Fraction(0)] * inst.N
    verdict = majorizes_discrete(top, G, tol=0)
    if not verdict.holds:
        raise TheoremViolation(f"G >= 0 but (v0, 0) does not majorize G for {inst}", inst)
    return verdict


# --------------------------------------------------------------------------
# Monte Carlo harness (integer arithmetic on a common denominator)


@dataclass
class MonteCarloSummary:
    N: int
    a: Fraction
    samples: int
    seed: int
    holds: int = 0
    not_applicable: int = 0
    violations: int = 0
    min_margin: Optional[Fraction] = None

    def merge(self, other: "MonteCarloSummary") -> None:
        self.holds += other.holds
        self.not_applicable += other.not_applicable
        self.violations += other.violations
        if other.min_margin is not None and (
            self.min_margin is None or other.min_margin < self.min_margin
        ):
            self.min_margin = other.min_margin


def _scaled_rows(N: int, a: Fraction):
    p, q = a.numerator, a.denominator
    s = [p**i * q ** (N - 1 - i) for i in range(N)]
    body = [-s[0]] + [s[i - 1] - s[i] for i in range(1, N)] + [s[N - 1]]
    return s, body


PROPOSALS = ("uniform", "mixed")


def _vertex_lambdas(N: int, a: Fraction) -> np.ndarray:
    if N > MAX_VERTEX_N:
        return np.zeros((0, N))
    return np.array([[float(v) for v in vx.lambdas] for vx in vertex_table(N, a)])


def _draw(rng, count, N, lam_max, scale, proposal, vertices):
    """Integer numerators of dyadic lambdas in [0, lam_max].

    "mixed" replaces every other draw by a random convex combination of the
    vertex lambdas (rounded to the dyadic grid), which lands inside the region
    G >= 0 far more often than uniform draws do once N grows.
    """
    draws = rng.integers(0, lam_max * scale, size=(count, N), endpoint=True)
    if proposal == "mixed" and len(vertices):
        w = rng.dirichlet(np.ones(len(vertices)), size=count)
        near = np.rint(w @ vertices * scale).astype(np.int64)
        pick = rng.random(count) < 0.5
        draws[pick] = np.clip(near[pick], 0, lam_max * scale)
    return draws


def _mc_chunk(args) -> MonteCarloSummary:
    N, a, count, seed_seq, lam_max, bits, proposal = args
    rng = np.random.default_rng(seed_seq)
    s, body = _scaled_rows(N, a)
    scale = 2**bits
    top = [v * scale for v in s] + [0] * N
    vertices = _vertex_lambdas(N, a) if proposal == "mixed" else None
    draws = _draw(rng, count, N, lam_max, scale, proposal, vertices)
    out = MonteCarloSummary(N, a, count, 0)
    denom = scale * a.denominator ** (N - 1)
    for row in draws.tolist():
        G = list(top)
        for k, m in enumerate(row):
            if m:
                for i, v in enumerate(body):
                    G[k + i] += m * v
        if min(G) < 0:
            out.not_applicable += 1
            continue
        verdict = majorizes_discrete(top, G, tol=0)
        if not verdict.holds:
            inst = Theorem1Instance(N, a, tuple(Fraction(m, scale) for m in row))
            raise TheoremViolation(f"counterexample found: {inst}", inst)
        out.holds += 1
        margin = Fraction(verdict.min_margin, denom)
        if out.min_margin is None or margin < out.min_margin:
            out.min_margin = margin
    return out


def monte_carlo_theorem1(
    N: int,
    a,
    samples: int,
    seed: int = 0,
    lam_max: int = 2,
    bits: int = 10,
    jobs: int = 1,
    chunk: int = 1000,
    proposal: str = "mixed",
) -> MonteCarloSummary:
    """Random dyadic lambda in [0, lam_max]^N with denominator 2**bits.

    Each chunk of draws gets its own child seed from ``seed`` so the result
    does not depend on ``jobs``. Raises :class:`TheoremViolation` on the first
    counterexample.
    """
    a = as_fraction(a)
    if not 0 < a < 1:
        raise ValueError("a must lie strictly between 0 and 1")
    if proposal not in PROPOSALS:
        raise ValueError(f"proposal must be one of {PROPOSALS}")
    sizes = [min(chunk, samples - i) for i in range(0, samples, chunk)]
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    tasks = [(N, a, n, s, lam_max, bits, proposal) for n, s in zip(sizes, seeds)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_mc_chunk, tasks))
    else:
        parts = [_mc_chunk(t) for t in tasks]
    summary = MonteCarloSummary(N, a, samples, seed)
    for part in parts:
        summary.merge(part)
    return summary


# --------------------------------------------------------------------------
# cone vertices


@dataclass(frozen=True)
class ConeVertexSpec:
    """Vertex v0 + v_{i1...iN}; each index is "0" (coordinate zeroed) or "λ" (lambda_k = 0)."""

    N: int
    a: Fraction
    indices: tuple

    def __post_init__(self):
        idx = tuple(LAMBDA if str(i) in (LAMBDA, "l", "L", "lambda") else str(i) for i in self.indices)
        if len(idx) != self.N or any(i not in ("0", LAMBDA) for i in idx):
            raise ValueError(f"need {self.N} indices from {{'0', 'λ'}}, got {self.indices!r}")
        a = as_fraction(self.a)
        if not 0 < a < 1:
            raise ValueError("a must lie strictly between 0 and 1")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "a", a)

    @classmethod
    def parse(cls, text: str, a) -> "ConeVertexSpec":
        text = text.replace("lambda", "l")
        return cls(len(text), a, tuple(text))

    @property
    def label(self) -> str:
        return "".join(self.indices)


@dataclass(frozen=True)
class ConeVertex:
    spec: ConeVertexSpec
    vector: tuple
    lambdas: tuple
    transfers: tuple

    @property
    def V(self) -> tuple:
        return self.vector[: self.spec.N]

    @property
    def U(self) -> tuple:
        return self.vector[self.spec.N :]


def cone_vertex(spec: ConeVertexSpec) -> ConeVertex:
    """Build the vertex by zeroing the "0" coordinates in increasing order.

    Each addition of lambda_j (v_j, u_j) is sliced into Robin Hood transfers
    from coordinate j to coordinates j+1, ..., j+N (amounts lambda_j times the
    positive entries of (v_j, u_j)); every slice is checked against the
    transfer condition before it is applied.
    """
    N, a = spec.N, spec.a
    G = build_v0(N, a) + [Fraction(0)] * N
    top = list(G)
    lambdas = [Fraction(0)] * N
    transfers = []
    body = build_vk_uk(N, a, 1)[1 : N + 1]
    for j, idx in enumerate(spec.indices):
        if idx != "0":
            continue
        lam = G[j]
        if lam < 0:
            raise ConstructionFailure(f"coordinate {j + 1} is negative before zeroing: {lam}")
        lambdas[j] = lam
        for i, share in enumerate(body, start=1):
            amount = lam * share
            if not amount:
                continue
            if amount > G[j] - G[j + i]:
                raise ConstructionFailure(
                    f"slice {amount} from {j + 1} to {j + i + 1} is not a Robin Hood transfer"
                )
            G[j] -= amount
            G[j + i] += amount
            transfers.append((j, j + i, amount))
        if G[j] != 0 or any(g < 0 for g in G):
            raise ConstructionFailure(f"construction left {G} after zeroing coordinate {j + 1}")
    if G != cone_point(N, a, lambdas):
        raise IdentityViolation("sliced construction disagrees with the cone point")
    if not majorizes_discrete(top, G, tol=0).holds:
        raise TheoremViolation(f"vertex {spec.label} is not majorized by (v0, 0)", spec)
    return ConeVertex(spec, tuple(G), tuple(lambdas), tuple(transfers))


def vertex_table(N: int, a) -> list:
    """All 2**N vertices, ordered by index pattern (λ before 0 in each slot)."""
    if N > MAX_VERTEX_N:
        raise ValueError(f"vertex enumeration is capped at N = {MAX_VERTEX_N}")
    out = []
    for mask in range(2**N):
        idx = tuple("0" if mask >> (N - 1 - b) & 1 else LAMBDA for b in range(N))
        out.append(cone_vertex(ConeVertexSpec(N, a, idx)))
    return out


# --------------------------------------------------------------------------
# suffix-sum decomposition


def lemma1_decompose(x: Sequence) -> list:
    """Suffix sums lambda_k = sum_{i>=k} x_i for k = 0..N.

    Raises :class:`Lemma1Failure` at the first k with a negative suffix sum.
    """
    x = [as_fraction(v) for v in x]
    lambdas = []
    acc = Fraction(0)
    for v in reversed(x):
        acc += v
        lambdas.append(acc)
    lambdas.reverse()
    for k, lam in enumerate(lambdas):
        if lam < 0:
            raise Lemma1Failure(k, lam)
    return lambdas


def lemma1_reconstruct(lambdas: Sequence) -> list:
    """(lambda_0, 0, ..., 0) + sum_{k>=1} (0, .., -lambda_k, lambda_k, .., 0) with -lambda_k at k-1."""
    x = [Fraction(0)] * len(lambdas)
    x[0] = as_fraction(lambdas[0])
    for k in range(1, len(lambdas)):
        x[k - 1] -= lambdas[k]
        x[k] += lambdas[k]
    return x


# --------------------------------------------------------------------------
# continuous theorem: discretization and convergence


@dataclass(frozen=True)
class Theorem2Discretization:
    c: PolyExpFn
    z_end: Fraction
    N: int
    delta_z: Fraction
    C_vec: np.ndarray
    e0_vec: np.ndarray
    G_vec: np.ndarray
    k_tilde: float
    suprema: np.ndarray
    c_last: float

    @property
    def grid(self) -> np.ndarray:
        """z_j = j * delta_z, j = 0..2N-1 (the points matched to G entries)."""
        return np.arange(2 * self.N) * float(self.delta_z)


def check_entry_conditions(c: PolyExpFn):
    """Raise unless the tail of ``c`` is >= 0 on (0, inf) and its total integral is 1."""
    dec = decompose(convolve_exp(c))
    if not dec.entry_conditions_hold:
        raise EntryConditionsFailed(
            f"total integral {dec.total}, tail nonnegative: {dec.tail_nonneg}"
        )
    return dec


def cell_suprema(c: PolyExpFn, delta_z: Fraction, cells: int) -> np.ndarray:
    """sup of c.poly(z) exp(-z) on [(i-1) dz, i dz], i = 1..cells.

    Interior maxima sit at roots of P' - P, isolated exactly with Sturm chains.
    """
    P = c.poly
    if P.is_zero():
        return np.zeros(cells)
    edges = [i * delta_z for i in range(cells + 1)]
    vals = np.array([float(P(z)) * math.exp(-float(z)) for z in edges])
    sup = np.maximum(vals[:-1], vals[1:])
    crit = P.derivative() - P
    width = delta_z * Fraction(1, 2**40)
    for iv in isolate_roots(crit, 0, edges[-1]):
        r = refine_root(crit, iv, width)
        z = float(r.midpoint())
        i = min(int(r.midpoint() / delta_z), cells - 1)
        sup[i] = max(sup[i], P(z) * math.exp(-z))
    return sup


def build_discretization(c: PolyExpFn, z_end, N: int, check: bool = True) -> Theorem2Discretization:
    """Vector C_{N+1}, the sampled exponential e0 and G = C * e0 on 2N cells of [0, z_end]."""
    if check:
        check_entry_conditions(c)
    z_end = as_fraction(z_end)
    if z_end <= 0 or N < 1:
        raise ValueError("need z_end > 0 and N >= 1")
    dz = z_end / (2 * N)
    h = float(dz)
    damp = -math.expm1(-h)
    sup = cell_suprema(c, dz, N)
    zN = N * dz
    c_last = float(tail_poly(c.poly)(zN)) * math.exp(-float(zN))
    raw = np.empty(N + 1)
    raw[0] = float(c.dirac_weight)
    raw[1:N] = sup[: N - 1] * damp
    raw[N] = c_last * damp / h
    total = raw.sum()
    if not total > 0:
        raise SuffixConditionFailed(f"C vector sums to {total}", float(dz), 0)
    k_tilde = 1.0 / total
    C = k_tilde * raw
    suffix = np.cumsum(C[::-1])[::-1]
    bad = np.flatnonzero(suffix < -1e-14)
    if bad.size:
        raise SuffixConditionFailed(
            f"suffix sum from index {bad[0]} is {suffix[bad[0]]:.3g} at dz = {h:.4g}", h, int(bad[0])
        )
    e0 = np.exp(-np.arange(N) * h)
    G = np.convolve(C, e0)
    return Theorem2Discretization(c, z_end, N, dz, C, e0, G, k_tilde, sup, c_last)


def find_suffix_threshold(c: PolyExpFn, z_end, N: int = 1, max_N: int = 2**16) -> tuple:
    """Smallest N = N0 * 2**k whose discretization satisfies the suffix condition; returns (N, dz)."""
    check_entry_conditions(c)
    while N <= max_N:
        try:
            d = build_discretization(c, z_end, N, check=False)
            return N, float(d.delta_z)
        except SuffixConditionFailed:
            N *= 2
    raise SuffixConditionFailed(f"no N <= {max_N} satisfies the suffix condition")


def discrete_vs_continuous_error(d: Theorem2Discretization) -> float:
    """max_{j<N} |G_j / k - g(z_j)| with g = c * exp(-z) evaluated exactly."""
    g = evaluate_array(convolve_exp(d.c), d.grid[: d.N])
    return float(np.max(np.abs(d.G_vec[: d.N] / d.k_tilde - g)))


@dataclass
class Theorem2Level:
    z_end: Fraction
    N: int
    delta_z: float
    k_tilde: float
    G_nonneg: bool
    sign_ok: bool
    verdict: Optional[MajorizationVerdict]
    error: float

    @property
    def applicable(self) -> bool:
        return self.G_nonneg


@dataclass
class WitnessSummary:
    size: int
    transfers: int
    max_row_deviation: float
    max_col_deviation: float
    min_entry: float
    max_residual: float
    doubly_stochastic: bool


@dataclass
class Theorem2Report:
    levels: list = field(default_factory=list)
    witness: Optional[WitnessSummary] = None
    errors_nonincreasing: bool = True

    @property
    def all_hold(self) -> bool:
        return all(lv.verdict is not None and lv.verdict.holds for lv in self.levels)


def verify_theorem2_convergence(
    c: PolyExpFn, schedule: Sequence, tol: float = DEFAULT_TOLERANCE
) -> Theorem2Report:
    """Run the discretization over a refining schedule of (z_end, N) levels."""
    check_entry_conditions(c)
    schedule = [(as_fraction(z), int(n)) for z, n in schedule]
    for (z0, n0), (z1, n1) in zip(schedule, schedule[1:]):
        if n1 != 2 * n0 or z1 < z0:
            raise ValueError("schedule must double N and keep z_end nondecreasing")
    g_fn = convolve_exp(c)
    report = Theorem2Report()
    finest = None
    for z_end, N in schedule:
        d = build_discretization(c, z_end, N, check=False)
        g = evaluate_array(g_fn, d.grid[:N])
        G = d.G_vec
        sign_ok = bool(np.all(G[:N][g >= tol] >= 0))
        if not sign_ok:
            raise ConvergenceViolation(f"discrete G negative where g >= {tol} (z_end={z_end}, N={N})")
        nonneg = bool(np.all(G >= 0))
        verdict = None
        if nonneg:
            top = np.concatenate([d.e0_vec, np.zeros(N)])
            verdict = majorizes_discrete(top, G, tol)
            if not verdict.holds:
                raise TheoremViolation(f"e0 does not majorize G at z_end={z_end}, N={N}", (c, z_end, N))
            finest = (d, top)
        report.levels.append(
            Theorem2Level(z_end, N, float(d.delta_z), d.k_tilde, nonneg, sign_ok, verdict,
                          discrete_vs_continuous_error(d))
        )
    if len(report.levels) >= 2:
        prev, last = report.levels[-2].error, report.levels[-1].error
        report.errors_nonincreasing = last <= prev * (1 + 1e-9) + 1e-15
        if not report.errors_nonincreasing:
            raise ConvergenceViolation(f"error grew from {prev:.3g} to {last:.3g}")
    if finest is not None:
        d, top = finest
        seq = robin_hood_decompose(top, d.G_vec)
        W = seq.witness
        report.witness = WitnessSummary(
            size=W.shape[0],
            transfers=len(seq.transfers),
            max_row_deviation=float(np.max(np.abs(W.sum(axis=1) - 1))),
            max_col_deviation=float(np.max(np.abs(W.sum(axis=0) - 1))),
            min_entry=float(W.min()),
            max_residual=float(np.max(np.abs(W @ top - d.G_vec))),
            doubly_stochastic=is_doubly_stochastic(W, 1e-12),
        )
    return report
