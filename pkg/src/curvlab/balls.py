"""Balls, ball intersections, eccentricity and Hausdorff distance to balls.

Point sets are returned as tuples in the space's point order. Internally every
routine works on boolean masks over point indices and scaled integer distances.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from ._kernels import pair_grid_kernel
from .metric import MetricSpace, fmt_rational, interval


@dataclass(frozen=True)
class Ball:
    center: object
    radius: Fraction


@dataclass(frozen=True)
class EccentricityReport:
    inradius: Fraction
    incenter: object
    circumradius: Fraction
    circumcenter: object
    eccentricity: Fraction
    quantization_slack: Fraction

    def to_json(self) -> dict:
        return {
            "inradius": fmt_rational(self.inradius),
            "incenter": self.incenter,
            "circumradius": fmt_rational(self.circumradius),
            "circumcenter": self.circumcenter,
            "eccentricity": fmt_rational(self.eccentricity),
            "slack": fmt_rational(self.quantization_slack),
        }


@dataclass(frozen=True)
class HausdorffResult:
    value: Fraction
    witness: object


def _mask(space: MetricSpace, S: Iterable) -> np.ndarray:
    m = np.zeros(space.n, dtype=bool)
    for p in S:
        m[space.index[p]] = True
    return m


def _points(space: MetricSpace, mask: np.ndarray) -> tuple:
    return tuple(space.points[i] for i in np.flatnonzero(mask))


def ball_mask(space: MetricSpace, c, R) -> np.ndarray:
    R = Fraction(R)
    if R < 0:
        raise ValueError("radius must be nonnegative")
    # floor onto the distance grid; membership only changes at grid values
    r = (R * space.scale).__floor__()
    return space.dmat[space.index[c]] <= r


def ball(space: MetricSpace, c, R) -> tuple:
    """Closed ball ``{x : d(c, x) <= R}``."""
    return _points(space, ball_mask(space, c, R))


def ball_intersection(space: MetricSpace, x, s, y, t) -> tuple:
    return _points(space, ball_mask(space, x, s) & ball_mask(space, y, t))


# ---------------------------------------------------------------- eccentricity


def _inrad_per_center(D: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Scaled inradius at every center; -1 for centers outside the set."""
    comp = ~mask
    if comp.any():
        m = D[:, comp].min(axis=1)
        inside = np.where(D < m[:, None], D, -1).max(axis=1)
    else:
        inside = D.max(axis=1)
    return np.where(mask, inside, -1)


def ecc_from_mask(D: np.ndarray, mask: np.ndarray) -> tuple[int, int, int, int]:
    """``(inradius, incenter, circumradius, circumcenter)`` in scaled units.

    Requires a nonempty mask. Centers are the smallest indices attaining the
    optimum.
    """
    inr = _inrad_per_center(D, mask)
    ic = int(np.argmax(inr))
    far = D[:, mask].max(axis=1)
    cc = int(np.argmin(far))
    return int(inr[ic]), ic, int(far[cc]), cc


def ecc_report(space: MetricSpace, S: Iterable) -> EccentricityReport:
    mask = _mask(space, S)
    zero = Fraction(0)
    if not mask.any():
        return EccentricityReport(zero, None, zero, None, zero, space.slack)
    inr, ic, circ, cc = ecc_from_mask(space.dmat, mask)
    return EccentricityReport(
        space.to_fraction(inr),
        space.points[ic],
        space.to_fraction(circ),
        space.points[cc],
        space.to_fraction(max(0, circ - inr)),
        space.slack,
    )


# ------------------------------------------------------------------- Hausdorff


def hausdorff(space: MetricSpace, A: Iterable, B: Iterable) -> HausdorffResult:
    a, b = _mask(space, A), _mask(space, B)
    if not a.any() or not b.any():
        raise ValueError("Hausdorff distance of an empty set is undefined")
    D = space.dmat
    to_b = np.where(a, D[:, b].min(axis=1), -1)
    to_a = np.where(b, D[:, a].min(axis=1), -1)
    side = np.maximum(to_b, to_a)
    w = int(np.argmax(side))
    return HausdorffResult(space.to_fraction(side[w]), space.points[w])


def nearest_ball_from_mask(D: np.ndarray, mask: np.ndarray) -> tuple[int, int, int]:
    """Minimise Hausdorff distance from the set to a ball over centers and realized radii.

    Returns scaled ``(value, center index, radius)`` with ties broken by
    smallest center, then smallest radius.
    """
    n = D.shape[0]
    Sidx = np.flatnonzero(mask)
    to_S = D[:, Sidx].min(axis=1)
    best = None
    for c in range(n):
        order = np.argsort(D[c], kind="stable")
        dsorted = D[c, order]
        # ball for the k-th candidate radius is order[: ends[k] + 1]
        ends = np.flatnonzero(np.append(dsorted[1:] != dsorted[:-1], True))
        ball_side = np.maximum.accumulate(to_S[order])[ends]
        set_side = np.minimum.accumulate(D[np.ix_(Sidx, order)], axis=1)[:, ends].max(axis=0)
        val = np.maximum(ball_side, set_side)
        k = int(np.argmin(val))
        cand = (int(val[k]), c, int(dsorted[ends[k]]))
        if best is None or cand[0] < best[0]:
            best = cand
            if cand[0] == 0:
                break
    return best


def nearest_ball_hausdorff(space: MetricSpace, S: Iterable) -> tuple[Ball, Fraction]:
    mask = _mask(space, S)
    if not mask.any():
        raise ValueError("nearest ball of the empty set is undefined")
    val, c, r = nearest_ball_from_mask(space.dmat, mask)
    return Ball(space.points[c], space.to_fraction(r)), space.to_fraction(val)


# ------------------------------------------------------------ ball-pair scans


@dataclass(frozen=True)
class AllRealized:
    """Every center pair and every realized radius from each center."""

    name = "all-realized"

    def echo(self) -> dict:
        return {"policy": self.name}


@dataclass(frozen=True)
class Aligned:
    """Realized radii that are multiples of ``step`` and whose prescribed
    intersection center ``(s - t + d) / 2`` is also a multiple of ``step``.

    On a unit tree subdivided ``k`` times with ``step = 1/(k+1)`` every such
    center is a vertex, so intersections of these balls are exact balls.
    """

    step: Fraction = Fraction(1, 2)
    name = "aligned"

    def echo(self) -> dict:
        return {"policy": self.name, "step": fmt_rational(self.step)}


@dataclass(frozen=True)
class Sampled:
    n: int
    seed: int = 0
    name = "sampled"

    def echo(self) -> dict:
        return {"policy": self.name, "n": self.n, "seed": self.seed}


def parse_policy(text: str, seed: int = 0):
    """``all``, ``aligned[:step]`` or ``sampled:n``."""
    head, _, arg = text.partition(":")
    if head in ("all", "all-realized"):
        return AllRealized()
    if head == "aligned":
        return Aligned(Fraction(arg) if arg else Fraction(1, 2))
    if head == "sampled":
        return Sampled(int(arg or 1000), seed)
    raise ValueError(f"unknown radius policy {text!r}")


@dataclass
class PairGrid:
    """Eccentricity data for ``B(x, s) ∩ B(y, t)`` over a grid of realized radii.

    Arrays are indexed ``[a, b]`` with ``s = sx[a]`` and ``t = ty[b]``; all
    distances are scaled integers.
    """

    x: int
    y: int
    d: int
    sx: np.ndarray
    ty: np.ndarray
    count: np.ndarray
    inradius: np.ndarray
    incenter: np.ndarray
    circumradius: np.ndarray
    circumcenter: np.ndarray
    ix: np.ndarray = field(repr=False)
    iy: np.ndarray = field(repr=False)

    @property
    def eccentricity(self) -> np.ndarray:
        return np.where(self.count > 0, np.maximum(self.circumradius - self.inradius, 0), 0)

    def mask(self, a: int, b: int) -> np.ndarray:
        return (self.ix <= a) & (self.iy <= b)


class _RowSearch:
    """Per-space lookup tables for ball membership counts and inradii."""

    def __init__(self, D: np.ndarray):
        n = D.shape[0]
        self.n = n
        big = int(D.max()) + 2 if n else 2
        self.offsets = np.arange(n, dtype=np.int64) * big
        self.flat = (np.sort(D, axis=1) + self.offsets[:, None]).ravel()
        # below[c, p]: largest distance realized from c strictly below d(c, p), -1 if none
        pos = np.searchsorted(self.flat, (D + self.offsets[:, None]).ravel(), side="left").reshape(D.shape)
        prev = self.flat[np.maximum(pos - 1, 0)].reshape(D.shape) - self.offsets[:, None]
        self.below = np.where(D > 0, prev, -1)
        self.ecc = D.max(axis=1)

    def count_at_most(self, rows: np.ndarray, bound: np.ndarray) -> np.ndarray:
        off = self.offsets[rows]
        pos = np.searchsorted(self.flat, bound + off, side="right")
        return pos - rows * self.n


def _group_reduce(ufunc, D: np.ndarray, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduce the columns of ``D`` sharing a key; returns ``(unique keys, (n, k) array)``."""
    order = np.argsort(keys, kind="stable")
    ks = keys[order]
    starts = np.flatnonzero(np.r_[True, ks[1:] != ks[:-1]])
    return ks[starts], ufunc.reduceat(D[:, order], starts, axis=1)


def pair_grid(space: MetricSpace, x: int, y: int, search: _RowSearch | None = None) -> PairGrid:
    """Eccentricity data for every realized radius pair around centers ``x, y``."""
    D = space.dmat
    n = space.n
    search = search or _RowSearch(D)
    if D.dtype == np.int64:
        sx, ix, ty, iy, count, inrad, ic, circ, cc = pair_grid_kernel(D, search.below, search.ecc, x, y)
        return PairGrid(x, y, int(D[x, y]), sx, ty, count, inrad, ic, circ, cc, ix, iy)
    # object-dtype distances (huge denominators) take the slower numpy route
    dx, dy = D[x], D[y]
    sx, ix = np.unique(dx, return_inverse=True)
    ty, iy = np.unique(dy, return_inverse=True)
    A, B = len(sx), len(ty)

    hist = np.zeros((A, B), dtype=np.int64)
    np.add.at(hist, (ix, iy), 1)
    count = hist.cumsum(0).cumsum(1)

    # circumradius: 2-D prefix max of d(c, p) over the dominance region {ix <= a, iy <= b}
    G = np.full((n, A * B), -1, dtype=D.dtype)
    codes, vals = _group_reduce(np.maximum, D, ix * B + iy)
    G[:, codes] = vals
    G = G.reshape(n, A, B)
    np.maximum.accumulate(G, axis=1, out=G)
    np.maximum.accumulate(G, axis=2, out=G)
    cc = G.argmin(axis=0)
    circ = np.take_along_axis(G, cc[None], axis=0)[0]

    # inradius at c: min of below[c, p] over the complement {ix > a} ∪ {iy > b};
    # a center outside the set meets itself in the complement and scores -1
    def suffix_min(idx, size):
        H = np.empty((n, size), dtype=D.dtype)
        H[:, -1] = search.ecc
        H[:, :-1] = _group_reduce(np.minimum, search.below, idx)[1][:, 1:]
        H = np.minimum.accumulate(H[:, ::-1], axis=1)[:, ::-1]
        return H

    inr = np.minimum(suffix_min(ix, A)[:, :, None], suffix_min(iy, B)[:, None, :])
    ic = inr.argmax(axis=0)
    inrad = np.take_along_axis(inr, ic[None], axis=0)[0]
    inrad = np.where(count > 0, inrad, -1)
    return PairGrid(x, y, int(D[x, y]), sx, ty, count, inrad, ic, circ, cc, ix, iy)


def _aligned_selector(step: int):
    def select(sx, ty, d):
        s = sx[:, None]
        t = ty[None, :]
        return (s % step == 0) & (t % step == 0) & ((s - t + d) % (2 * step) == 0)

    return select


@dataclass
class PairScan:
    max_ecc: Fraction
    ecc_witness: tuple | None
    max_hausdorff: Fraction | None
    hausdorff_witness: tuple | None
    nearest_ball: tuple | None
    ball_pairs: int
    distinct_sets: int
    lower_bound: bool
    policy: dict
    slack: Fraction

    def to_json(self) -> dict:
        return {
            "ecc_max": fmt_rational(self.max_ecc),
            "ecc_witness": _witness_json(self.ecc_witness),
            "hausdorff_max": None if self.max_hausdorff is None else fmt_rational(self.max_hausdorff),
            "hausdorff_witness": _witness_json(self.hausdorff_witness),
            "ball_pairs": self.ball_pairs,
            "lower_bound": self.lower_bound,
            "radius_policy": self.policy,
            "slack": fmt_rational(self.slack),
        }


def _witness_json(w):
    if w is None:
        return None
    x, s, y, t = w
    return [x, fmt_rational(s), y, fmt_rational(t)]


def iter_pair_grids(space: MetricSpace) -> Iterator[PairGrid]:
    """Grids for every unordered center pair ``x <= y`` in index order."""
    search = _RowSearch(space.dmat)
    for x in range(space.n):
        for y in range(x, space.n):
            yield pair_grid(space, x, y, search)


def _witness(space: MetricSpace, grid: PairGrid, a: int, b: int) -> tuple:
    return (space.points[grid.x], space.to_fraction(grid.sx[a]), space.points[grid.y], space.to_fraction(grid.ty[b]))


def _witness_key(space: MetricSpace, w: tuple) -> tuple:
    return (space.index[w[0]], w[1], space.index[w[2]], w[3])


def scan_ball_pairs(space: MetricSpace, policy=AllRealized(), hausdorff: bool = True) -> PairScan:
    """Maximum eccentricity (and nearest-ball Hausdorff distance) of ball intersections."""
    if isinstance(policy, Sampled):
        return _scan_sampled(space, policy, hausdorff)
    D = space.dmat
    select = _aligned_selector(space.to_scaled(policy.step)) if isinstance(policy, Aligned) else None
    best_e, wit_e = -1, None
    best_h, wit_h, ball_h = -1, None, None
    seen: dict[bytes, tuple] = {}
    pairs = 0
    search = _RowSearch(D)
    for grid in iter_pair_grids(space):
        cells = grid.count > 0
        if select is not None:
            cells &= select(grid.sx, grid.ty, grid.d)
        pairs += int(cells.sum()) * (1 if grid.x == grid.y else 2)
        if not cells.any():
            continue
        ecc = np.where(cells, grid.eccentricity, -1)
        top = int(ecc.max())
        if top >= best_e:
            for a, b in np.argwhere(ecc == top):
                w = _witness(space, grid, a, b)
                if top > best_e or _witness_key(space, w) < _witness_key(space, wit_e):
                    best_e, wit_e = top, w
                break
        if not hausdorff:
            continue
        # nearest-ball value is 0 exactly when the inscribed ball fills the set
        ic, cc = grid.incenter, grid.circumcenter
        shape = ic.shape
        in_fills = search.count_at_most(ic.ravel(), np.maximum(grid.inradius, 0).ravel()).reshape(shape) == grid.count
        circ_fits = search.count_at_most(cc.ravel(), np.maximum(grid.circumradius, 0).ravel()).reshape(shape) == grid.count
        filled = in_fills | circ_fits
        hval = np.zeros(ecc.shape, dtype=np.int64)
        todo = cells & ~filled
        for a, b in np.argwhere(todo):
            mask = grid.mask(a, b)
            key = np.packbits(mask).tobytes()
            if key not in seen:
                seen[key] = nearest_ball_from_mask(D, mask)
            hval[a, b] = seen[key][0]
        hval = np.where(cells, hval, -1)
        top = int(hval.max())
        if top >= best_h:
            a, b = np.argwhere(hval == top)[0]
            w = _witness(space, grid, a, b)
            if top > best_h or _witness_key(space, w) < _witness_key(space, wit_h):
                best_h, wit_h = top, w
    if wit_h is not None:
        # the fast path may pick a different optimal ball; redo the tie-break
        x, s, y, t = (space.index[wit_h[0]], space.to_scaled(wit_h[1]), space.index[wit_h[2]], space.to_scaled(wit_h[3]))
        _, c, r = nearest_ball_from_mask(D, (D[x] <= s) & (D[y] <= t))
        ball_h = (space.points[c], space.to_fraction(r))
    return PairScan(
        space.to_fraction(max(best_e, 0)),
        wit_e,
        space.to_fraction(max(best_h, 0)) if hausdorff else None,
        wit_h,
        ball_h,
        pairs,
        len(seen),
        False,
        policy.echo(),
        space.slack,
    )


def _scan_sampled(space: MetricSpace, policy: Sampled, hausdorff: bool) -> PairScan:
    D = space.dmat
    rng = np.random.default_rng(policy.seed)
    best_e, wit_e, best_h, wit_h, ball_h = -1, None, -1, None, None
    for _ in range(policy.n):
        x, y = (int(v) for v in rng.integers(space.n, size=2))
        s = int(rng.choice(np.unique(D[x])))
        t = int(rng.choice(np.unique(D[y])))
        mask = (D[x] <= s) & (D[y] <= t)
        w = (space.points[x], space.to_fraction(s), space.points[y], space.to_fraction(t))
        key = (x, w[1], y, w[3])
        e = 0
        if mask.any():
            inr, _, circ, _ = ecc_from_mask(D, mask)
            e = max(0, circ - inr)
        if e > best_e or (e == best_e and key < _witness_key(space, wit_e)):
            best_e, wit_e = e, w
        if hausdorff and mask.any():
            h, c, r = nearest_ball_from_mask(D, mask)
            if h > best_h or (h == best_h and key < _witness_key(space, wit_h)):
                best_h, wit_h, ball_h = h, w, (space.points[c], space.to_fraction(r))
    return PairScan(
        space.to_fraction(max(best_e, 0)),
        wit_e,
        space.to_fraction(max(best_h, 0)) if hausdorff else None,
        wit_h,
        ball_h,
        policy.n,
        0,
        True,
        policy.echo(),
        space.slack,
    )


def max_ball_pair_ecc(space: MetricSpace, radius_policy=AllRealized()) -> tuple[Fraction, tuple | None]:
    scan = scan_ball_pairs(space, radius_policy, hausdorff=False)
    return scan.max_ecc, scan.ecc_witness


# ------------------------------------------------------- inscribed-ball lemmas


@dataclass
class InscribedCheck:
    vacuous: bool
    center: object = None
    offset: Fraction | None = None
    radius: Fraction | None = None
    contained: bool | None = None
    gap: bool = False
    max_inscribed: Fraction | None = None
    upper_bound_ok: bool | None = None
    extension_ok: bool | None = None

    @property
    def ok(self) -> bool:
        return all(v is not False for v in (self.contained, self.upper_bound_ok, self.extension_ok))


def inscribed_formula_check(space: MetricSpace, x, s, y, t, extension: bool = False) -> InscribedCheck:
    """Check the inscribed-ball formulas for ``B(x, s) ∩ B(y, t)``.

    (i) a point ``c`` on a geodesic at distance ``(s - t + d) / 2`` from ``x``
    (within half the slack) carries a ball of radius ``(s + t - d) / 2`` minus
    the offset inside the intersection; (ii) when ``s, t < d`` no contained ball
    has radius above ``s + t - d``; (iii) with the extension flag the largest
    contained ball has radius ``(s + t - d) / 2`` up to the slack.
    """
    s, t = Fraction(s), Fraction(t)
    if x == y:
        raise ValueError("centers must differ")
    d = space.dist(x, y)
    D = space.dmat
    xi, yi = space.index[x], space.index[y]
    Y = ball_mask(space, x, s) & ball_mask(space, y, t)
    if s + t < d or s >= t + d or t >= s + d:
        return InscribedCheck(vacuous=True)
    out = InscribedCheck(vacuous=False)
    r = (s + t - d) / 2
    pos = (s - t + d) / 2
    on = interval(space, xi, yi)
    off = [abs(space.idist(xi, c) - pos) for c in on]
    k = min(range(len(on)), key=lambda i: (off[i], i))
    if off[k] <= space.slack / 2:
        c = int(on[k])
        out.center, out.offset = space.points[c], off[k]
        out.radius = r - off[k]
        if out.radius >= 0:
            inner = ball_mask(space, space.points[c], out.radius)
            out.contained = not (inner & ~Y).any()
    else:
        out.gap = True
    inr = _inrad_per_center(D, Y).max()
    out.max_inscribed = space.to_fraction(inr) if inr >= 0 else None
    if s < d and t < d and out.max_inscribed is not None:
        out.upper_bound_ok = out.max_inscribed <= s + t - d
    if extension and out.max_inscribed is not None:
        out.extension_ok = abs(out.max_inscribed - r) <= space.slack
    return out


@dataclass
class LemmaGeneralScan:
    pairs_checked: int = 0
    containment_checked: int = 0
    containment_violations: list = field(default_factory=list)
    gaps: int = 0
    upper_checked: int = 0
    upper_violations: list = field(default_factory=list)
    upper_allowance: Fraction = Fraction(0)
    upper_strict: int = 0  # cells over s + t - d by any amount, allowance aside

    @property
    def ok(self) -> bool:
        return not self.containment_violations and not self.upper_violations


def lemma_general_scan(space: MetricSpace, max_report: int = 20) -> LemmaGeneralScan:
    """Exhaustive check of both inscribed-ball lemmas over realized radii.

    The radius bound of part (2) relies on a geodesic point at distance
    exactly ``R`` from the ball center. With all edge weights equal such a
    point always exists and no allowance is made; otherwise the bound is
    checked up to the slack.
    """
    D = space.dmat
    slack2 = space.to_scaled(space.slack)  # offsets below are doubled, so compare with slack
    uniform = len({w for _, _, w in space.edges}) <= 1
    out = LemmaGeneralScan(upper_allowance=Fraction(0) if uniform else space.slack)
    allow = space.to_scaled(out.upper_allowance)
    for grid in iter_pair_grids(space):
        if grid.x == grid.y:
            continue
        d = grid.d
        s = grid.sx[:, None]
        t = grid.ty[None, :]
        live = (s + t >= d) & (s < t + d) & (t < s + d)
        out.pairs_checked += int(live.sum())
        # (2): contained balls have radius at most s + t - d when s, t < d
        upper = live & (s < d) & (t < d) & (grid.count > 0)
        out.upper_checked += int(upper.sum())
        out.upper_strict += int((upper & (grid.inradius > s + t - d)).sum())
        bad = upper & (grid.inradius > s + t - d + allow)
        for a, b in np.argwhere(bad)[: max_report - len(out.upper_violations)]:
            out.upper_violations.append(_witness(space, grid, a, b) + (space.to_fraction(grid.inradius[a, b]),))
        # (1): ball at the prescribed center inside the intersection
        on = interval(space, grid.x, grid.y)
        pos2 = (s - t + d)  # twice the prescribed position
        cells = np.argwhere(live)
        if not len(cells):
            continue
        p2 = pos2[cells[:, 0], cells[:, 1]]
        offs2 = np.abs(2 * D[grid.x, on][None, :] - p2[:, None])  # twice the offset
        k = offs2.argmin(axis=1)
        off2 = offs2[np.arange(len(k)), k]
        found = off2 <= slack2
        out.gaps += int((~found).sum())
        c = on[k]
        r2 = (s + t - d)[cells[:, 0], cells[:, 1]] - off2  # twice the reduced radius
        use = found & (r2 >= 0)
        if not use.any():
            continue
        cu, ru, cl = c[use], r2[use], cells[use]
        inner = 2 * D[cu] <= ru[:, None]
        Ymask = (D[grid.x][None, :] <= grid.sx[cl[:, 0]][:, None]) & (D[grid.y][None, :] <= grid.ty[cl[:, 1]][:, None])
        out.containment_checked += int(use.sum())
        leak = (inner & ~Ymask).any(axis=1)
        for (a, b), cc in zip(cl[leak], cu[leak]):
            if len(out.containment_violations) < max_report:
                out.containment_violations.append(_witness(space, grid, a, b) + (space.points[cc],))
    return out
