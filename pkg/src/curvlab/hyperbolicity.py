"""Hyperbolicity constants, quasi-geodesic paths, bigons and geodesic-pair scans."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .metric import (
    DEFAULT_GEODESIC_CAP,
    CurvlabError,
    GeodesicPath,
    MetricSpace,
    enumerate_geodesics,
    fmt_rational,
    interval,
    least_geodesic,
)

# ----------------------------------------------------------- four-point delta


def delta_four_point(space: MetricSpace) -> tuple[Fraction, tuple | None]:
    """Largest ``(S1 - S2) / 2`` over quadruples, with the least witness."""
    D = space.dmat
    n = space.n
    if n < 4:
        return Fraction(0), None
    best, wit = -1, None
    chunk = max(1, 2_000_000 // (n * n))
    for a in range(n):
        for b0 in range(a + 1, n, chunk):
            b = np.arange(b0, min(n, b0 + chunk))
            s1 = D[a, b][:, None, None] + D[None, :, :]
            s2 = D[a, :][None, :, None] + D[b][:, None, :]
            s3 = D[a, :][None, None, :] + D[b][:, :, None]
            hi = np.maximum(np.maximum(s1, s2), s3)
            lo = np.minimum(np.minimum(s1, s2), s3)
            gap = 2 * hi + lo - (s1 + s2 + s3)  # largest minus middle
            top = int(gap.max())
            if top > best:
                k, c, d = np.unravel_index(int(gap.argmax()), gap.shape)
                best, wit = top, (a, int(b[k]), int(c), int(d))
    return Fraction(best, 2 * space.scale), tuple(space.points[i] for i in wit)


# ---------------------------------------------------------------- slim delta


@dataclass(frozen=True)
class DeltaEstimate:
    value: Fraction
    exact: bool
    triple: tuple | None
    side_point: object

    def to_json(self) -> dict:
        return {"value": fmt_rational(self.value), "exact": self.exact}


def geodesic_bottleneck(space: MetricSpace) -> np.ndarray:
    """``W[y, z, p]``: the largest distance from ``p`` to a geodesic ``y``-``z``.

    That is, the maximum over geodesics ``Q`` from ``y`` to ``z`` of
    ``min_{q in Q} d(p, q)``, computed by a widest-path pass over the
    shortest-path DAG.
    """
    return _bottleneck_cached(space)


@lru_cache(maxsize=8)
def _bottleneck_cached(space: MetricSpace) -> np.ndarray:
    D = space.dmat
    n = space.n
    adj = space.adjacency
    W = np.empty((n, n, n), dtype=D.dtype)
    for y in range(n):
        W[y, y] = D[:, y]
        for z in range(y + 1, n):
            on = interval(space, y, z)
            on = on[np.argsort(D[y, on], kind="stable")]
            inside = np.zeros(n, dtype=bool)
            inside[on] = True
            best = {}
            for u in on:
                du = D[y, u]
                if u == y:
                    best[u] = D[:, y]
                    continue
                preds = [best[v] for v, w in adj[u] if inside[v] and D[y, v] + w == du and v in best]
                reach = preds[0] if len(preds) == 1 else np.max(preds, axis=0)
                best[u] = np.minimum(D[:, u], reach)
            W[y, z] = W[z, y] = best[z]
    W.setflags(write=False)
    return W


def delta_slim(space: MetricSpace, cap: int = DEFAULT_GEODESIC_CAP, method: str = "dag") -> DeltaEstimate:
    """Slim-triangle constant measured on waypoints.

    ``method="dag"`` is exact without enumerating paths. ``method="enumerate"``
    walks every combination of enumerated sides (up to ``cap`` geodesics per
    pair) and is meant for small spaces.
    """
    if method == "enumerate":
        return _delta_slim_enumerate(space, cap)
    if method != "dag":
        raise ValueError(f"unknown method {method!r}")
    D = space.dmat
    n = space.n
    W = geodesic_bottleneck(space)
    best, wit = -1, None
    for x in range(n):
        for y in range(n):
            on = interval(space, x, y)
            # side x-y against sides y-z and z-x, for every z at once
            val = np.minimum(W[y][:, on], W[:, x][:, on])
            per_z = val.max(axis=1)
            z = int(per_z.argmax())
            if per_z[z] > best:
                p = int(on[int(val[z].argmax())])
                best, wit = int(per_z[z]), (x, y, z, p)
    x, y, z, p = wit
    return DeltaEstimate(space.to_fraction(best), True, (space.points[x], space.points[y], space.points[z]), space.points[p])


def _delta_slim_enumerate(space: MetricSpace, cap: int) -> DeltaEstimate:
    D = space.dmat
    n = space.n
    exact = True
    geo = {}
    for a in range(n):
        for b in range(n):
            paths, trunc = enumerate_geodesics(space, space.points[a], space.points[b], cap)
            exact &= not trunc
            geo[a, b] = [[space.index[p] for p in g.waypoints] for g in paths]
    best, wit = -1, None
    for x, y, z in itertools.product(range(n), repeat=3):
        for P, Q, R in itertools.product(geo[x, y], geo[y, z], geo[z, x]):
            other = Q + R
            for p in P:
                v = int(D[p, other].min())
                if v > best:
                    best, wit = v, (x, y, z, p)
    x, y, z, p = wit
    return DeltaEstimate(space.to_fraction(best), exact, (space.points[x], space.points[y], space.points[z]), space.points[p])


# --------------------------------------------------------------- quasi paths


@dataclass(frozen=True)
class QPath:
    waypoints: tuple
    arc_lengths: tuple
    q: Fraction

    @property
    def K(self) -> Fraction:
        return self.q

    @property
    def start(self):
        return self.waypoints[0]

    @property
    def end(self):
        return self.waypoints[-1]


def qpath_from_waypoint(space: MetricSpace, x, p, y) -> QPath:
    """Broken geodesic ``x -> p -> y`` through lexicographically least legs."""
    g1 = least_geodesic(space, x, p)
    g2 = least_geodesic(space, p, y)
    off = g1.length
    pts = g1.waypoints + g2.waypoints[1:]
    arcs = g1.arc_lengths + tuple(off + a for a in g2.arc_lengths[1:])
    K = space.dist(x, p) + space.dist(p, y) - space.dist(x, y)
    return QPath(pts, arcs, K)


def from_geodesic(g: GeodesicPath) -> QPath:
    return QPath(g.waypoints, g.arc_lengths, Fraction(0))


def qpath_defect(space: MetricSpace, path) -> Fraction:
    """Smallest q making the waypoint parameterisation a (1, q)-quasigeodesic."""
    worst = Fraction(0)
    for (p, a), (r, b) in itertools.combinations(zip(path.waypoints, path.arc_lengths), 2):
        worst = max(worst, abs(abs(b - a) - space.dist(p, r)))
    return worst


@dataclass(frozen=True)
class Bigon:
    side1: QPath
    side2: QPath

    def __post_init__(self):
        if self.side1.start != self.side2.start or self.side1.end != self.side2.end:
            raise ValueError("bigon sides must share both endpoints")


def bigon_fatness(space: MetricSpace, b: Bigon) -> Fraction:
    """Hausdorff distance between the waypoint images of the two sides."""
    i1 = [space.index[p] for p in b.side1.waypoints]
    i2 = [space.index[p] for p in b.side2.waypoints]
    sub = space.dmat[np.ix_(i1, i2)]
    return space.to_fraction(max(sub.min(axis=1).max(), sub.min(axis=0).max()))


def geodesic_bigon(space: MetricSpace, g1: GeodesicPath, g2: GeodesicPath) -> Bigon:
    return Bigon(from_geodesic(g1), from_geodesic(g2))


# --------------------------------------------------------- synchronous lemma


@dataclass
class SyncCheck:
    vacuous: bool
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def synchronous_check(space: MetricSpace, g1, g2, K) -> SyncCheck:
    """Check that synchronous distance >= K forces asynchronous distance >= K/2.

    Violations are ``(t, s, distance)`` triples.
    """
    K = Fraction(K)
    if g1.waypoints[0] != g2.waypoints[0]:
        raise ValueError("geodesics must share their starting point")
    pos2 = dict(zip(g2.arc_lengths, g2.waypoints))
    times = [t for p, t in zip(g1.waypoints, g1.arc_lengths) if t in pos2 and space.dist(p, pos2[t]) >= K]
    out = SyncCheck(vacuous=not times)
    at = dict(zip(g1.arc_lengths, g1.waypoints))
    for t in times:
        for q, s in zip(g2.waypoints, g2.arc_lengths):
            d = space.dist(at[t], q)
            if d < K / 2:
                out.violations.append((t, s, d))
    return out


@dataclass
class SyncScan:
    configurations: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def synchronous_scan(space: MetricSpace, max_report: int = 20) -> SyncScan:
    """Exhaustive check over all pairs of geodesics from a common basepoint.

    A pair (gamma through p at time t, gamma' through p' at time t and q at time
    s) exists exactly when ``d(b, p) = d(b, p')`` and ``q`` is collinear with
    ``b`` and ``p'``, so the scan runs over those configurations.
    """
    D = space.dmat
    n = space.n
    configs = 0
    bad = []
    for b in range(n):
        db = D[b]
        # collinear[p', q]: q lies on a geodesic from b through p', or before it
        after = db[None, :] == db[:, None] + D
        before = db[:, None] == db[None, :] + D
        col = after | before
        for p in range(n):
            same = np.flatnonzero(db == db[p])
            K = D[p, same]
            hit = col[same]  # (p', q)
            configs += int(hit.sum())
            short = hit & (2 * D[p][None, :] < K[:, None])
            if short.any() and len(bad) < max_report:
                for k, q in np.argwhere(short)[: max_report - len(bad)]:
                    bad.append((space.points[b], space.points[p], space.points[int(same[k])], space.points[int(q)]))
    return SyncScan(configs, bad)


# ------------------------------------------------------------ lattice checks


def unit_lattice(space: MetricSpace) -> int:
    """Scaled length of one unit step; requires all edge weights to equal 1/m."""
    weights = {w for _, _, w in space.edges}
    if len(weights) != 1 or next(iter(weights)).numerator != 1:
        raise CurvlabError(
            "integer-offset scans need every edge weight equal to 1/m for one integer m; subdivide the space first"
        )
    return space.scale


def _levels(db: np.ndarray, unit: int) -> list[np.ndarray]:
    top = int(db.max()) // unit
    return [np.flatnonzero(db == k * unit) for k in range(top + 1)]


@dataclass
class CorridorScan:
    length: int
    capped: bool
    witness: tuple | None

    def to_json(self) -> dict:
        return {"length": self.length, "capped": self.capped, "witness": list(self.witness) if self.witness else None}


def fellow_travel_scan(space: MetricSpace, K0, K1, scan_cap: int = 64) -> CorridorScan:
    """Longest run of unit steps over which two geodesics from a common
    basepoint keep their synchronous distance inside ``[K0, K1]``.

    Exhaustive over geodesic pairs via a level-by-level dynamic programme.
    Witness: ``(basepoint, p, p', R)`` where the corridor starts.
    """
    K0, K1 = Fraction(K0), Fraction(K1)
    if not 0 <= K0 <= K1:
        raise ValueError("need 0 <= K0 <= K1")
    unit = unit_lattice(space)
    D = space.dmat
    lo, hi = K0 * space.scale, K1 * space.scale
    best, wit = -1, None
    for b in range(space.n):
        lv = _levels(D[b], unit)
        val_next = None
        for k in range(len(lv) - 1, -1, -1):
            L = lv[k]
            sub = D[np.ix_(L, L)]
            band = (sub >= lo) & (sub <= hi)
            val = np.where(band, 0, -1)
            if val_next is not None and len(lv[k + 1]):
                N = lv[k + 1]
                child = D[np.ix_(L, N)] == unit  # (p, q)
                cont = np.where(val_next >= 0, val_next + 1, -1)  # (q, q')
                # best continuation over q' in children of p', then q in children of p
                t1 = np.where(child[None, :, :], cont[:, None, :], -1).max(axis=2)  # (q, p')
                t2 = np.where(child[:, :, None], t1[None, :, :], -1).max(axis=1)  # (p, p')
                val = np.where(band, np.maximum(val, t2), -1)
            val = np.minimum(val, scan_cap)
            top = int(val.max()) if val.size else -1
            if top > best:
                i, j = np.argwhere(val == top)[0]
                best, wit = top, (b, int(L[i]), int(L[j]), k)
            val_next = val
    if wit is None:
        return CorridorScan(0, False, None)
    b, p, q, k = wit
    return CorridorScan(best, best >= scan_cap, (space.points[b], space.points[p], space.points[q], k))


# ---------------------------------------------------------- K-path proximity


@dataclass
class KPathScan:
    checked: int
    violations: list
    bound: str

    @property
    def ok(self) -> bool:
        return not self.violations


def kpath_scan(space: MetricSpace, eps, factor: int = 2, max_report: int = 20) -> KPathScan:
    """Every point on a K-path from x to y stays near every geodesic x-y.

    A point w lies on some K-path exactly when ``d(x,w) + d(w,y) - d(x,y) <= K``,
    so w is checked at its own defect K_w against the bound
    ``2 K_w + factor * eps + 2 * slack`` (factor 2 for eccentricity bounds,
    6 for Hausdorff bounds).
    """
    D = space.dmat
    W = geodesic_bottleneck(space)
    extra = (factor * Fraction(eps) + 2 * space.slack) * space.scale
    den, num = extra.denominator, extra.numerator
    bad = []
    for x in range(space.n):
        Kw = D[x][None, :] + D - D[x][:, None]  # [y, w]
        far = W[x]  # [y, w] farthest geodesic x-y from w
        hit = np.argwhere(den * (far - 2 * Kw) > num)
        for y, w in hit[: max_report - len(bad)]:
            bad.append((space.points[x], space.points[int(y)], space.points[int(w)], space.to_fraction(far[y, w])))
    return KPathScan(space.n**3, bad, f"2K + {factor}*eps + 2*slack")
