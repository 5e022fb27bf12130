"""Empirical divergence profiles of geodesics leaving a common basepoint.

For a basepoint ``b`` and integer times ``R``, ``R + r`` the scans range over
every pair of points ``p, p'`` at distance ``R`` from ``b`` that are at least
``D`` apart, and every pair ``q, q'`` at distance ``R + r`` lying beyond them on
geodesics from ``b``. ``f_D(r)`` is the least ``d(q, q')`` seen; ``e(r)`` is the
least length of a path from ``q`` to ``q'`` that never enters the open ball of
radius ``R + r`` around ``b``.

Empirical infima are upper bounds on the true infima and suprema taken inside
a finite window are lower bounds; the flags on each result say which apply.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .hyperbolicity import _levels, unit_lattice
from .metric import CurvlabError, MetricSpace, fmt_rational, parse_rational

_BIG = np.iinfo(np.int64).max // 4  # disconnected
_NONE = 2 * _BIG  # no qualifying descendant


@dataclass
class DivergenceProfile:
    D: Fraction
    mode: str  # "f" or "e"
    samples: list[tuple[int, Fraction | None]]
    witnesses: dict[int, tuple] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    def value(self, r: int):
        for rr, v in self.samples:
            if rr == r:
                return v
        raise KeyError(r)

    def to_json(self) -> dict:
        return {
            "D": fmt_rational(self.D),
            "mode": self.mode,
            "samples": [{"r": r, "value": "inf" if v is None else fmt_rational(v)} for r, v in self.samples],
            "flags": list(self.flags),
        }

    @classmethod
    def from_json(cls, data: dict) -> "DivergenceProfile":
        samples = [(int(s["r"]), None if s["value"] == "inf" else parse_rational(s["value"])) for s in data["samples"]]
        return cls(parse_rational(data["D"]), data["mode"], samples, {}, list(data.get("flags", [])))


@dataclass
class DivergenceConstants:
    D: Fraction
    N: Fraction | None
    u: Fraction | None
    flags: list[str]

    def to_json(self) -> dict:
        f = lambda v: None if v is None else fmt_rational(v)  # noqa: E731
        return {"D": fmt_rational(self.D), "N": f(self.N), "u": f(self.u), "flags": list(self.flags)}


def _pick_bases(space: MetricSpace, base_budget: int | None, seed: int) -> tuple[list[int], bool]:
    if base_budget is None or base_budget >= space.n:
        return list(range(space.n)), False
    return sorted(random.Random(seed).sample(range(space.n), base_budget)), True


def _avoiding_distances(space: MetricSpace, keep: np.ndarray, sources: np.ndarray) -> np.ndarray:
    """Scaled path lengths from ``sources`` inside the subgraph induced on ``keep``."""
    n = space.n
    rows, cols, vals = [], [], []
    for u, v, w in space.edges:
        a, b = space.index[u], space.index[v]
        if keep[a] and keep[b]:
            rows.append(a)
            cols.append(b)
            vals.append(float(space.to_scaled(w)))
    graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
    dist = dijkstra(graph, directed=False, indices=sources)
    out = np.full(dist.shape, _BIG, dtype=np.int64)
    finite = np.isfinite(dist)
    out[finite] = np.rint(dist[finite]).astype(np.int64)
    return out


def _level_pairs(space: MetricSpace, unit: int, b: int, r_max: int, mode: str, distinct: bool) -> Iterator[tuple]:
    """Yield ``(R, r, P, Q, M)`` for basepoint ``b``: ``M`` holds the pair values on level ``R + r``."""
    D = space.dmat
    levels = _levels(D[b], unit)
    for ell in range(2, len(levels)):
        Q = levels[ell]
        if len(Q) == 0:
            continue
        if mode == "f":
            M = D[np.ix_(Q, Q)].astype(np.int64)
        else:
            M = _avoiding_distances(space, D[b] >= ell * unit, Q)[:, Q]
        if distinct:
            np.fill_diagonal(M, _NONE)
        for r in range(1, min(r_max, ell - 1) + 1):
            P = levels[ell - r]
            if len(P) >= 2:
                yield ell - r, r, P, Q, M


def _best_pair(P, Q, M, sep, desc) -> tuple[int, tuple] | None:
    """Least ``M[q, q']`` over ``p, p'`` with ``sep`` and ``q, q'`` descending from them."""
    T = np.where(desc[:, :, None], M[None, :, :], _NONE).min(axis=1)  # T[p, q']
    F = np.where(desc[None, :, :], T[:, None, :], _NONE).min(axis=2)  # F[p, p']
    F = np.where(sep, F, _NONE)
    k = int(F.argmin())
    i, j = divmod(k, F.shape[1])
    if F[i, j] >= _NONE:
        return None
    cand_q2 = np.flatnonzero(desc[j])
    q2 = cand_q2[int(T[i, cand_q2].argmin())]
    cand_q1 = np.flatnonzero(desc[i])
    q1 = cand_q1[int(M[cand_q1, q2].argmin())]
    return int(F[i, j]), (int(P[i]), int(P[j]), int(Q[q1]), int(Q[q2]))


def _profile(space: MetricSpace, D, r_max: int, mode: str, base_budget, seed: int, distinct: bool) -> DivergenceProfile:
    D = Fraction(D)
    if D <= 0:
        raise ValueError("D must be positive")
    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    unit = unit_lattice(space)
    Ds = D * space.scale
    dm = space.dmat
    bases, sampled = _pick_bases(space, base_budget, seed)
    best: dict[int, tuple[int, tuple]] = {}
    for b in bases:
        for R, r, P, Q, M in _level_pairs(space, unit, b, r_max, mode, distinct):
            sep = dm[np.ix_(P, P)] >= Ds
            if not sep.any():
                continue
            desc = dm[np.ix_(P, Q)] == r * unit
            got = _best_pair(P, Q, M, sep, desc)
            if got is None:
                continue
            v, (p1, p2, q1, q2) = got
            if r not in best or v < best[r][0]:
                pts = space.points
                best[r] = (v, (pts[b], R, pts[p1], pts[p2], pts[q1], pts[q2]))
    samples: list[tuple[int, Fraction | None]] = [(0, D)]
    witnesses = {}
    flags = ["infimum-is-upper-bound"]
    if distinct:
        flags.append("distinct-endpoints")
    if sampled:
        flags.append(f"sampled-bases:{len(bases)}")
    missing = [r for r in range(1, r_max + 1) if r not in best]
    for r in sorted(best):
        v, w = best[r]
        samples.append((r, None if v >= _BIG else space.to_fraction(v)))
        witnesses[r] = w
    if not best:
        flags.append("no-qualifying-pairs")
    elif missing:
        flags.append("no-pairs-at-r:" + ",".join(map(str, missing)))
    return DivergenceProfile(D, mode, samples, witnesses, flags)


def estimate_f_D(
    space: MetricSpace, D, r_max: int, base_budget: int | None = None, seed: int = 0, distinct: bool = False
) -> DivergenceProfile:
    """Profile of ``f_D`` on integer ``r <= r_max``; ``f_D(0) = D`` by definition.

    Geodesics that split and later meet again count, so in a grid ``f_D`` drops
    to 0. ``distinct=True`` keeps only pairs with ``q != q'``. ``base_budget``
    limits the scan to that many seeded basepoints.
    Witness per sample: ``(basepoint, R, p, p', q, q')``.
    """
    return _profile(space, D, r_max, "f", base_budget, seed, distinct)


def estimate_e(
    space: MetricSpace, D, r_max: int, base_budget: int | None = None, seed: int = 0, distinct: bool = False
) -> DivergenceProfile:
    """Profile of ``e``: paths avoid the open ball, so boundary points stay usable. ``None`` is infinity."""
    return _profile(space, D, r_max, "e", base_budget, seed, distinct)


def _window_sup(samples, bound) -> tuple[int | None, bool]:
    """Largest sampled ``r`` with value below ``bound``; flags a hit at the window edge."""
    below = [r for r, v in samples if v is not None and v < bound]
    if not below:
        return None, False
    top = max(below)
    return top, top == samples[-1][0]


def divergence_constants(profile: DivergenceProfile) -> DivergenceConstants:
    """``N = 1 + 3D + sup{r : f_D(r) < 9D}`` and ``u = sup{t : f_D(t) < 4N + 2}`` over the window."""
    if profile.mode != "f":
        raise ValueError("divergence constants need an f_D profile")
    if len(profile.samples) <= 1:
        raise CurvlabError("empty divergence profile")
    D = profile.D
    flags = ["empirical"]
    sN, edge = _window_sup(profile.samples, 9 * D)
    if sN is None:
        sN = 0  # r ranges over r >= 0, so an empty set contributes nothing
        flags.append("N-sup-empty")
    N = 1 + 3 * D + sN
    if edge:
        flags.append("N-window-limited")
    su, edge = _window_sup(profile.samples, 4 * N + 2)
    u = None if su is None else Fraction(su)
    if su is None:
        flags.append("u-undetermined")
    elif edge:
        flags.append("u-window-limited")
    return DivergenceConstants(D, N, u, flags)


@dataclass
class CorridorViolation:
    witness: tuple  # (basepoint, R, r, m, m')
    value: Fraction
    low: Fraction
    high: Fraction


@dataclass
class CorridorCheck:
    configurations: int
    violations: list[CorridorViolation]
    truncated: bool

    @property
    def vacuous(self) -> bool:
        return self.configurations == 0


def corridor_bounds_check(space: MetricSpace, K, eps, D, T, max_configs: int | None = None) -> CorridorCheck:
    """Check ``d(γ(R+r), γ'(R+r)) ∈ [D/K − 2ε, KT + 2Kε]`` for ``0 <= r <= r0``.

    Exhaustive over basepoints, integer ``R, r0`` and geodesic pairs with
    separation at least ``D`` at ``R`` and exactly ``T`` at ``R + r0``;
    intermediate points range over all geodesic continuations.
    """
    K, eps, D, T = (Fraction(v) for v in (K, eps, D, T))
    if K < 1 or eps < 0:
        raise ValueError("need K >= 1 and eps >= 0")
    if D < 2 * K * eps:
        raise ValueError("need D >= 2*K*eps")
    if T < D / K - 2 * eps:
        raise ValueError("need T >= D/K - 2*eps")
    unit = unit_lattice(space)
    dm = space.dmat
    sc = space.scale
    lo, hi = (D / K - 2 * eps) * sc, (K * T + 2 * K * eps) * sc
    Ds, Ts = D * sc, T * sc
    if Ts.denominator != 1:
        return CorridorCheck(0, [], False)
    Ts = int(Ts)
    configs, violations, truncated = 0, [], False
    pts = space.points
    for b in range(space.n):
        levels = _levels(dm[b], unit)
        for R in range(1, len(levels)):
            P = levels[R]
            sep = dm[np.ix_(P, P)] >= Ds
            for i, j in np.argwhere(sep):
                p1, p2 = P[i], P[j]
                for r0 in range(1, len(levels) - R):
                    Q = levels[R + r0]
                    q1s = Q[dm[p1, Q] == r0 * unit]
                    q2s = Q[dm[p2, Q] == r0 * unit]
                    for q1, q2 in np.argwhere(dm[np.ix_(q1s, q2s)] == Ts):
                        q1, q2 = q1s[q1], q2s[q2]
                        if max_configs is not None and configs >= max_configs:
                            return CorridorCheck(configs, violations, True)
                        configs += 1
                        for r in range(r0 + 1):
                            L = levels[R + r]
                            m1 = L[(dm[p1, L] == r * unit) & (dm[L, q1] == (r0 - r) * unit)]
                            m2 = L[(dm[p2, L] == r * unit) & (dm[L, q2] == (r0 - r) * unit)]
                            block = dm[np.ix_(m1, m2)]
                            for a, c in np.argwhere((block < lo) | (block > hi)):
                                violations.append(
                                    CorridorViolation(
                                        (pts[b], R, r, pts[m1[a]], pts[m2[c]]),
                                        space.to_fraction(block[a, c]),
                                        lo / sc,
                                        hi / sc,
                                    )
                                )
    return CorridorCheck(configs, violations, truncated)


@dataclass
class GrowthCheck:
    k: int
    r: int
    value: Fraction | None
    bound: Fraction
    ok: bool


def small_lemma_check(f_profile: DivergenceProfile, N, slack) -> bool | None:
    """``f_D(N) >= 3D - slack``; ``None`` when ``N`` lies outside the sampled window."""
    N = Fraction(N)
    if N.denominator != 1:
        N = Fraction(math.ceil(N))
    try:
        v = f_profile.value(int(N))
    except KeyError:
        return None
    return v >= 3 * f_profile.D - Fraction(slack)


def exponential_growth_check(e_profile: DivergenceProfile, N, u) -> list[GrowthCheck]:
    """``e(r) > (3/2)^k (4N+2)`` at ``r = u + kN + 1`` for every ``k >= 1`` in the window."""
    N, u = Fraction(N), Fraction(u)
    have = dict(e_profile.samples)
    out = []
    k = 1
    while True:
        r = math.floor(u + k * N) + 1
        if r > e_profile.samples[-1][0]:
            return out
        if r in have:
            bound = Fraction(3, 2) ** k * (4 * N + 2)
            v = have[r]
            out.append(GrowthCheck(k, r, v, bound, v is None or v > bound))
        k += 1


def profile_rows(profile: DivergenceProfile) -> Iterable[str]:
    for r, v in profile.samples:
        yield f"{r}\t{'inf' if v is None else fmt_rational(v)}"
