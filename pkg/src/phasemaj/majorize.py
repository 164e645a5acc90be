"""Discrete and continuous majorization checks.

Continuous checks work on the half line in the variable z = r**2 with plain
Lebesgue measure, which is the radial phase-space measure after substitution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate

from .errors import NegativeInput, NotMajorized, TailTooHeavy, Unstable
from .fockspace import RadialProfile, certify_nonnegative
from .polyexp import Poly, tail_poly

DEFAULT_TOLERANCE = 1e-9
ENTROPY_TOLERANCE = 1e-6


@dataclass(frozen=True)
class MajorizationVerdict:
    """Outcome of an ``x > y`` check.

    ``min_margin`` is the smallest prefix-sum difference (x minus y) over all
    prefixes of the decreasing rearrangements; ``argmin_prefix`` is the number
    of leading entries (discrete) or the measure t (continuous) where it occurs.
    """

    holds: bool
    total_x: float
    total_y: float
    min_margin: float
    argmin_prefix: Union[int, float]
    tolerance: float
    history: tuple = ()


def _is_exact(v) -> bool:
    return all(isinstance(e, (int, Fraction)) and not isinstance(e, bool) for e in v)


def _pad(x, y):
    x, y = list(x), list(y)
    n = max(len(x), len(y))
    return x + [0] * (n - len(x)), y + [0] * (n - len(y))


def majorizes_discrete(x: Sequence, y: Sequence, tol: float = DEFAULT_TOLERANCE) -> MajorizationVerdict:
    """Prefix-sum test of ``x > y`` on descending-sorted copies.

    Integer and Fraction inputs are compared exactly; pass ``tol=0`` for a
    strict exact verdict. The shorter vector is padded with zeros.
    """
    if isinstance(x, np.ndarray) or isinstance(y, np.ndarray) or not (_is_exact(x) and _is_exact(y)):
        xs = -np.sort(-np.asarray(x, dtype=float).ravel())
        ys = -np.sort(-np.asarray(y, dtype=float).ravel())
        n = max(len(xs), len(ys))
        xs = np.pad(xs, (0, n - len(xs)))
        ys = np.pad(ys, (0, n - len(ys)))
        xs, ys = -np.sort(-xs), -np.sort(-ys)
        margins = np.cumsum(xs) - np.cumsum(ys)
        k = int(np.argmin(margins))
        tx, ty = float(xs.sum()), float(ys.sum())
        m = float(margins[k])
    else:
        x, y = _pad(x, y)
        xs = sorted(x, reverse=True)
        ys = sorted(y, reverse=True)
        margins = [a - b for a, b in zip(accumulate(xs), accumulate(ys))]
        k = min(range(len(margins)), key=margins.__getitem__)
        tx, ty, m = sum(xs), sum(ys), margins[k]
    holds = m >= -tol and abs(tx - ty) <= tol
    return MajorizationVerdict(bool(holds), tx, ty, m, k + 1, tol)


@dataclass
class TransferSequence:
    """Robin Hood transfers ``(i, j, delta)`` (0-based positions, giver first).

    Replaying the transfers on ``x`` yields a rearrangement of ``y``; the
    ``witness`` is the doubly stochastic matrix (product of the T-transforms
    followed by that final permutation) with ``witness @ x == y``.
    """

    transfers: list
    witness: np.ndarray
    permutation: list = field(default_factory=list)

    def apply(self, x) -> list:
        v = list(x)
        for i, j, d in self.transfers:
            v[i] -= d
            v[j] += d
        out = [0] * len(v)
        for src, dst in enumerate(self.permutation):
            out[dst] = v[src]
        return out


def robin_hood_decompose(x: Sequence, y: Sequence, tol: float = 1e-12) -> TransferSequence:
    """Classical Muirhead/Dalton construction of at most ``len - 1`` transfers.

    At each step take the largest sorted slot j still above its target and the
    first slot k after it still below its target; move
    ``min(x_j - y_j, y_k - x_k)`` from j to k. One slot is settled per step.
    """
    exact = _is_exact(x) and _is_exact(y) and not isinstance(x, np.ndarray)
    x, y = _pad(x, y)
    if not exact:
        x, y = [float(v) for v in x], [float(v) for v in y]
    if any(v < 0 for v in x) or any(v < 0 for v in y):
        raise NotMajorized("Robin Hood transfers are defined for nonnegative vectors")
    verdict = majorizes_discrete(x, y, 0 if exact else tol)
    if not verdict.holds:
        raise NotMajorized(f"x does not majorize y (min margin {verdict.min_margin})")

    n = len(x)
    px = sorted(range(n), key=lambda i: -x[i])
    py = sorted(range(n), key=lambda i: -y[i])
    cur = [x[i] for i in px]
    target = [y[i] for i in py]
    eps = 0 if exact else 8 * np.finfo(float).eps * max(1.0, max(x, default=0.0)) * n
    M = np.eye(n)
    transfers = []
    while True:
        diff = [c - t for c, t in zip(cur, target)]
        j = next((i for i in range(n - 1, -1, -1) if diff[i] > eps), None)
        if j is None:
            break
        k = next((i for i in range(j + 1, n) if diff[i] < -eps), None)
        if k is None:
            break
        delta = min(diff[j], -diff[k])
        gap = cur[j] - cur[k]
        share = float(delta / gap)
        transfers.append((px[j], px[k], delta))
        if delta == diff[j]:
            cur[j] = target[j]
            cur[k] = cur[k] + delta
        else:
            cur[k] = target[k]
            cur[j] = cur[j] - delta
        a, b = px[j], px[k]
        ra, rb = M[a].copy(), M[b].copy()
        M[a] = (1 - share) * ra + share * rb
        M[b] = share * ra + (1 - share) * rb

    permutation = [0] * n
    W = np.empty_like(M)
    for s in range(n):
        permutation[px[s]] = py[s]
        W[py[s]] = M[px[s]]
    return TransferSequence(transfers, W, permutation)


def t_transform(n: int, i: int, j: int, lam: float) -> np.ndarray:
    """lam * I + (1 - lam) * (transposition of i and j)."""
    T = lam * np.eye(n)
    P = np.eye(n)
    P[[i, j]] = P[[j, i]]
    return T + (1 - lam) * P


def is_doubly_stochastic(D, tol: float = 1e-12) -> bool:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("a square matrix is required")
    return bool(
        np.all(D >= -tol)
        and np.all(np.abs(D.sum(axis=0) - 1) <= tol)
        and np.all(np.abs(D.sum(axis=1) - 1) <= tol)
    )


def circulant_matrix(y: Sequence, size: Optional[int] = None) -> np.ndarray:
    """Circulant matrix whose first column is ``y`` zero-padded to ``size`` (default 2 len(y)).

    Its first ``len(y)`` columns are the full convolution matrix of y, so for a
    probability vector y it is a doubly stochastic convolution operator.
    """
    y = np.asarray([float(v) for v in y])
    size = size or 2 * len(y)
    col = np.zeros(size)
    col[: len(y)] = y
    idx = (np.arange(size)[:, None] - np.arange(size)[None, :]) % size
    return col[idx]


# --------------------------------------------------------------------------
# continuous setting


@dataclass(frozen=True)
class GridConfig:
    """Discretization of [0, z_max]; ``z_max=None`` picks it from the tail bound."""

    z_max: Optional[float] = None
    cells: int = 2**14
    refine_rounds: int = 3
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.z_max is not None and not self.z_max > 0:
            raise ValueError("z_max must be positive")
        if self.cells < 16:
            raise ValueError("cells must be at least 16")
        if self.refine_rounds < 1:
            raise ValueError("refine_rounds must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class RearrangedProfile:
    """Decreasing rearrangement on a uniform grid.

    ``values`` are sorted descending, ``masses`` are the measures of the cells
    carrying each value (equal values merged) and ``integrals`` the integral of
    the function over those cells.
    """

    values: np.ndarray
    masses: np.ndarray
    integrals: np.ndarray
    z_max: float

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def cells(self) -> list:
        return list(zip(self.values.tolist(), self.masses.tolist()))

    def cumulative(self) -> tuple[np.ndarray, np.ndarray]:
        """(t, integral of the rearrangement over [0, t]) at cell boundaries."""
        return np.cumsum(self.masses), np.cumsum(self.integrals)


def _abs_poly(p: Poly) -> Poly:
    return Poly(tuple(abs(c) for c in p.coeffs))


def tail_mass_bound(p: Poly, z: float) -> float:
    """Upper bound on integral_z^inf |p(t)| exp(-t) dt."""
    return float(tail_poly(_abs_poly(p)).evalf(z)) * math.exp(-z)


def _functional_tail_bound(p: Poly, z: float) -> float:
    # covers Phi in {x, |x|^p (p >= 1), x log x} once |f| <= 1 on the tail
    return float(tail_poly(Poly((1, 1)) * _abs_poly(p)).evalf(z)) * math.exp(-z)


def choose_z_max(p: Poly, tol: float, bound=tail_mass_bound, start: float = 1.0, cap: float = 5000.0) -> float:
    """Smallest integer z >= start with ``bound(p, z) < tol / 10``."""
    z = math.ceil(start)
    while z <= cap:
        if bound(p, z) < tol / 10:
            return float(z)
        z += 1
    raise TailTooHeavy(f"tail bound still above {tol / 10} at z = {cap}")


def _profile_z_max(f: RadialProfile, cfg: GridConfig) -> float:
    if cfg.z_max is not None:
        b = tail_mass_bound(f.poly, cfg.z_max)
        if b >= cfg.tolerance / 10:
            raise TailTooHeavy(f"neglected tail mass up to {b:.3g} at z_max = {cfg.z_max}")
        return float(cfg.z_max)
    return choose_z_max(f.poly, cfg.tolerance)


def _sorted_cells(f, z_max: float, cells: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint values sorted descending (stable) and the matching cell integrals."""
    edges = np.linspace(0.0, z_max, cells + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    if isinstance(f, RadialProfile):
        values = f.poly.evalf(mids) * np.exp(-mids)
        tail = tail_poly(f.poly).evalf(edges) * np.exp(-edges)
        integrals = tail[:-1] - tail[1:]
    else:
        values = _sample(f, mids)
        integrals = values * (z_max / cells)
    order = np.argsort(-values, kind="stable")
    return values[order], integrals[order]


def _sample(f: Callable, z: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(z), dtype=float)
        if out.shape == z.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(f(v)) for v in z])


def decreasing_rearrangement(f, cfg: GridConfig = GridConfig()) -> RearrangedProfile:
    """Grid rearrangement of a radial profile or of a sampled callable.

    Profiles get exact per-cell integrals from the closed form; callables use
    value times width and need an explicit ``cfg.z_max``.
    """
    if isinstance(f, RadialProfile):
        z_max = _profile_z_max(f, cfg)
    else:
        if cfg.z_max is None:
            raise ValueError("a sampled function needs an explicit z_max")
        z_max = float(cfg.z_max)
    values, integrals = _sorted_cells(f, z_max, cfg.cells)
    width = z_max / cfg.cells
    # merge runs of equal values
    starts = np.flatnonzero(np.r_[True, values[1:] != values[:-1]])
    counts = np.diff(np.r_[starts, len(values)])
    return RearrangedProfile(
        values[starts],
        counts * width,
        np.add.reduceat(integrals, starts),
        z_max,
    )


def majorizes_continuous(f: RadialProfile, g: RadialProfile, cfg: GridConfig = GridConfig()) -> MajorizationVerdict:
    """Grid test of ``f > g``: compare cumulative integrals of the two rearrangements.

    Cells are ranked by midpoint value; their contents are integrated exactly.
    The grid is doubled ``refine_rounds - 1`` times and the verdict must agree
    over the last two rounds.
    """
    if cfg.z_max is None:
        z_max = max(_profile_z_max(f, cfg), _profile_z_max(g, cfg))
    else:
        z_max = _profile_z_max(f, cfg)
        _profile_z_max(g, cfg)
    history = []
    verdict = None
    for r in range(cfg.refine_rounds):
        cells = cfg.cells * 2**r
        _, fi = _sorted_cells(f, z_max, cells)
        _, gi = _sorted_cells(g, z_max, cells)
        cf, cg = np.cumsum(fi), np.cumsum(gi)
        margin = cf - cg
        k = int(np.argmin(margin))
        tx, ty = float(cf[-1]), float(cg[-1])
        holds = bool(margin[k] >= -cfg.tolerance and abs(tx - ty) <= cfg.tolerance)
        history.append(holds)
        verdict = MajorizationVerdict(
            holds, tx, ty, float(margin[k]), (k + 1) * z_max / cells, cfg.tolerance
        )
    if len(history) >= 2 and history[-1] != history[-2]:
        raise Unstable(f"verdict changed between the last two refinements: {history}")
    return MajorizationVerdict(**{**verdict.__dict__, "history": tuple(history)})


# --------------------------------------------------------------------------
# convex functionals


def _xlogx(v):
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(v > 0, v * np.log(np.where(v > 0, v, 1.0)), 0.0)


def _phi(phi: str, p: Optional[float]):
    if phi == "x":
        return lambda v: np.asarray(v, dtype=float)
    if phi == "xlogx":
        return _xlogx
    if phi == "x2":
        return lambda v: np.asarray(v, dtype=float) ** 2
    if phi == "absp":
        if p is None or p < 1:
            raise ValueError("|x|^p needs p >= 1 to be convex")
        return lambda v: np.abs(np.asarray(v, dtype=float)) ** p
    raise ValueError(f"unknown functional {phi!r}; expected x, xlogx, x2 or absp")


FUNCTIONALS = ("x", "xlogx", "x2", "absp")


def convex_functional(
    f: RadialProfile,
    phi: str = "xlogx",
    cfg: Optional[GridConfig] = None,
    p: Optional[float] = None,
    method: str = "adaptive",
) -> float:
    """Integral over [0, inf) of Phi(f(z)) dz.

    ``method="adaptive"`` integrates unit pieces of [0, z_max] with QUADPACK;
    ``method="grid"`` sums Phi over the cells of the decreasing rearrangement
    (the integral of Phi(f) equals that of Phi(f_down)) at ``cfg.cells``.
    """
    cfg = cfg or GridConfig(tolerance=ENTROPY_TOLERANCE)
    fn = _phi(phi, p)
    if phi == "xlogx":
        cert = certify_nonnegative(f)
        if not cert.nonneg:
            raise NegativeInput(
                f"profile is negative at z = {cert.point} (x log x needs f >= 0)", cert
            )
    start = 2.0 * (f.poly.degree + 1)
    z_max = cfg.z_max or choose_z_max(f.poly, cfg.tolerance, _functional_tail_bound, start)
    if method == "grid":
        values, _ = _sorted_cells(f, z_max, cfg.cells)
        return float(np.sum(fn(values)) * z_max / cfg.cells)
    if method != "adaptive":
        raise ValueError(f"unknown method {method!r}")
    coeffs = [float(c) for c in reversed(f.poly.coeffs)]

    def integrand(z):
        return float(fn(np.polyval(coeffs, z) * math.exp(-z)))

    pieces = max(1, math.ceil(z_max))
    eps = cfg.tolerance / (100 * pieces)
    total = 0.0
    for k in range(pieces):
        val, _ = integrate.quad(integrand, k, min(k + 1.0, z_max), epsabs=eps, epsrel=1e-12, limit=200)
        total += val
    return total


def wigner_entropy(f: RadialProfile, cfg: Optional[GridConfig] = None, method: str = "adaptive") -> float:
    """Phase-space Shannon entropy -integral W ln W dx dp = ln(pi) - integral f ln f dz."""
    return math.log(math.pi) - convex_functional(f, "xlogx", cfg, method=method)
