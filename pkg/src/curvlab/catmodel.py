"""Comparison triangles in the model plane of curvature ``κ <= 0``.

This is the only floating-point part of the package. Flat triangles use plain
coordinates; for ``κ < 0`` the hyperbolic law of cosines runs in mpmath at
``DPS`` digits, since near-degenerate and near-flat triangles lose everything
to cancellation in doubles.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .balls import AllRealized, Aligned, _aligned_selector, iter_pair_grids
from .metric import CurvlabError, MetricSpace, enumerate_geodesics, fmt_rational, geodesic_successors

DPS = 50
TRI_TOL = 1e-12
MARGIN_TOL = 1e-9


def _check_sides(kappa: float, s: float, t: float, d: float):
    if kappa > 0:
        raise ValueError("model spaces are only defined here for kappa <= 0")
    if min(s, t, d) < -TRI_TOL:
        raise ValueError("side lengths must be nonnegative")
    if s > t + d + TRI_TOL or t > s + d + TRI_TOL or d > s + t + TRI_TOL:
        raise ValueError(f"sides ({s}, {t}, {d}) violate the triangle inequality")


def _flat(s: float, t: float, d: float, a: float) -> float:
    zx = (s * s + d * d - t * t) / (2 * d)
    zy = math.sqrt(max(s * s - zx * zx, 0.0))
    return math.hypot(zx - a, zy)


def _hyperbolic(kappa: float, s, t, d, a) -> float:
    with mpmath.workdps(DPS):
        k = mpmath.sqrt(-mpmath.mpf(kappa))
        S, T, Dd, A = (k * mpmath.mpf(v) for v in (s, t, d, a))
        cos_x = (mpmath.cosh(S) * mpmath.cosh(Dd) - mpmath.cosh(T)) / (mpmath.sinh(S) * mpmath.sinh(Dd))
        cos_x = min(max(cos_x, mpmath.mpf(-1)), mpmath.mpf(1))
        ch = mpmath.cosh(S) * mpmath.cosh(A) - mpmath.sinh(S) * mpmath.sinh(A) * cos_x
        return float(mpmath.acosh(max(ch, mpmath.mpf(1))) / k)


def model_distance(kappa: float, s: float, t: float, d: float, a: float) -> float:
    """Distance from the apex ``z̄`` to the point at arc position ``a`` on side ``x̄ȳ``."""
    kappa, s, t, d, a = float(kappa), float(s), float(t), float(d), float(a)
    _check_sides(kappa, s, t, d)
    if d <= 0:
        return s
    a = min(max(a, 0.0), d)
    if a == 0:
        return s
    if s <= 0:
        return a
    if kappa == 0:
        return _flat(s, t, d, a)
    return _hyperbolic(kappa, s, t, d, a)


def comparison_distance(kappa: float, s: float, t: float, d: float) -> float:
    """``d(z̄, c̄)`` with ``c̄`` at distance ``(d + s - t)/2`` from ``x̄``."""
    return model_distance(kappa, s, t, d, (float(d) + float(s) - float(t)) / 2)


def ecc_kappa(kappa: float, s: float, t: float, d: float) -> float:
    return comparison_distance(kappa, s, t, d) - (float(s) + float(t) - float(d)) / 2


# ---------------------------------------------------------------- space tests


@dataclass
class CatViolation:
    witness: tuple
    measured: float
    model: float

    @property
    def margin(self) -> float:
        return self.measured - self.model

    def to_json(self) -> dict:
        return {"witness": list(self.witness), "measured": self.measured, "model": self.model, "margin": self.margin}


@dataclass
class CatReport:
    kappa: float
    checks: int
    violations: list[CatViolation]
    slack: Fraction
    skipped: int = 0
    params: dict = field(default_factory=dict)

    @property
    def max_margin(self) -> float | None:
        return max((v.margin for v in self.violations), default=None)

    def to_json(self) -> dict:
        shown = sorted(self.violations, key=lambda v: -v.margin)[:20]
        return {
            "kappa": self.kappa,
            "checks": self.checks,
            "skipped": self.skipped,
            "violation_count": len(self.violations),
            "max_margin": self.max_margin,
            "violations": [v.to_json() for v in shown],
            "slack": fmt_rational(self.slack),
            "params": self.params,
        }


def _random_geodesic(space: MetricSpace, i: int, j: int, rng: random.Random) -> list[int]:
    succ = geodesic_successors(space, i, j)
    path = [i]
    while path[-1] != j:
        path.append(rng.choice(succ[path[-1]]))
    return path


def cat_test(space: MetricSpace, kappa: float, sample_budget: int | None = None, seed: int = 0, geodesic_cap: int = 8) -> CatReport:
    """Compare ``d(p, z)`` with the model distance for points ``p`` on side ``xy``.

    With no budget every triangle is checked on up to ``geodesic_cap``
    geodesics per side; otherwise ``sample_budget`` random triangles are
    checked on one random geodesic each. A violation needs a margin above
    ``MARGIN_TOL``; quantization slack is reported, not subtracted.
    """
    kappa = float(kappa)
    if kappa > 0:
        raise ValueError("kappa must be <= 0")
    n = space.n
    rng = random.Random(seed)
    fr = space.to_fraction
    checks, violations = 0, []
    cache: dict[tuple, float] = {}

    def triangles():
        if sample_budget is None:
            for x in range(n):
                for y in range(x + 1, n):
                    paths, _ = enumerate_geodesics(space, space.points[x], space.points[y], geodesic_cap)
                    idx = [[space.index[p] for p in g.waypoints] for g in paths]
                    for z in range(n):
                        for path in idx:
                            yield x, y, z, path
        else:
            for _ in range(sample_budget):
                x, y, z = (rng.randrange(n) for _ in range(3))
                if x != y:
                    yield x, y, z, _random_geodesic(space, x, y, rng)

    D = space.dmat
    for x, y, z, path in triangles():
        s, t, d = float(fr(D[x, z])), float(fr(D[y, z])), float(fr(D[x, y]))
        for p in path:
            a = float(fr(D[x, p]))
            key = (s, t, d, a)
            if key not in cache:
                cache[key] = model_distance(kappa, s, t, d, a)
            model = cache[key]
            measured = float(fr(D[p, z]))
            checks += 1
            if measured - model > MARGIN_TOL:
                pts = space.points
                violations.append(CatViolation((pts[x], pts[y], pts[z], pts[p]), measured, model))
    params = {"sample_budget": sample_budget, "seed": seed, "geodesic_cap": geodesic_cap}
    return CatReport(kappa, checks, violations, space.slack, 0, params)


def extension_check(space: MetricSpace) -> bool:
    """One-step geodesic extension test.

    Every edge is a geodesic and every geodesic ends in an edge ``p → y``; the
    space passes when each such edge continues to some ``w != p`` with
    ``p → y → w`` still geodesic. A finite space can only pass this local
    form of the extension property.
    """
    if space.n < 2 or not space.edges:
        return False
    D = space.dmat
    nbrs: dict[int, list[int]] = {i: [] for i in range(space.n)}
    for u, v, _ in space.edges:
        a, b = space.index[u], space.index[v]
        nbrs[a].append(b)
        nbrs[b].append(a)
    for y, around in nbrs.items():
        for p in around:
            if not any(w != p and D[p, w] == D[p, y] + D[y, w] for w in around):
                return False
    return True


def _ecc_kappa_grid(kappa: float, s: np.ndarray, t: np.ndarray, d: float) -> np.ndarray:
    """Vectorised ``Ecc_κ`` for arrays of radii at a fixed center distance (doubles)."""
    m = (d + s - t) / 2
    if d == 0:
        return np.maximum(s - (s + t) / 2, 0)
    if kappa == 0:
        zx = (s * s + d * d - t * t) / (2 * d)
        zy = np.sqrt(np.maximum(s * s - zx * zx, 0))
        dist = np.hypot(zx - m, zy)
    else:
        # half-angle forms of the law of cosines; the textbook form cancels badly
        # for thin triangles
        k = math.sqrt(-kappa)
        S, T, Dd, M = k * s, k * t, k * d, k * m
        with np.errstate(invalid="ignore", divide="ignore"):
            one_minus_cos = 2 * np.sinh((T + S - Dd) / 2) * np.sinh((T - S + Dd) / 2) / (np.sinh(S) * math.sinh(Dd))
        one_minus_cos = np.clip(np.nan_to_num(one_minus_cos, nan=0.0), 0, 2)
        half = np.sinh((S - M) / 2) ** 2 + np.sinh(S) * np.sinh(M) * one_minus_cos / 2  # (cosh dist - 1) / 2
        dist = 2 * np.arcsinh(np.sqrt(np.maximum(half, 0))) / k
    return dist - (s + t - d) / 2


def cat_ecc_test(space: MetricSpace, kappa: float, policy=AllRealized(), override: bool = False) -> CatReport:
    """Ball-pair eccentricity against ``Ecc_κ(s, t, d(x, y)) + slack``.

    Radius pairs outside the triangle inequality with ``d`` have no model
    triangle and are counted as skipped.
    """
    kappa = float(kappa)
    if kappa > 0:
        raise ValueError("kappa must be <= 0")
    if not override and not extension_check(space):
        raise CurvlabError("geodesic extension check failed; pass override=True to test anyway")
    scale = space.scale
    slack = float(space.slack)
    select = _aligned_selector(space.to_scaled(policy.step)) if isinstance(policy, Aligned) else None
    checks = skipped = 0
    violations = []
    for grid in iter_pair_grids(space):
        cells = grid.count > 0
        if select is not None:
            cells &= select(grid.sx, grid.ty, grid.d)
        s = (grid.sx[:, None] + 0 * grid.ty[None, :]).astype(float) / scale
        t = (grid.ty[None, :] + 0 * grid.sx[:, None]).astype(float) / scale
        d = grid.d / scale
        ok_tri = (s <= t + d) & (t <= s + d) & (d <= s + t)
        skipped += int((cells & ~ok_tri).sum())
        cells &= ok_tri
        checks += int(cells.sum())
        ecc = grid.eccentricity.astype(float) / scale
        hot = cells & (ecc > slack + MARGIN_TOL)  # Ecc_κ >= 0, so smaller values cannot fail
        if not hot.any():
            continue
        bound = _ecc_kappa_grid(kappa, s[hot], t[hot], d) + slack
        for (a, b), e, bd in zip(np.argwhere(hot), ecc[hot], bound):
            if e - bd > MARGIN_TOL:
                pts = space.points
                w = (pts[grid.x], fmt_rational(Fraction(int(grid.sx[a]), scale)), pts[grid.y], fmt_rational(Fraction(int(grid.ty[b]), scale)))
                violations.append(CatViolation(w, float(e), float(bd)))
    params = {"radius_policy": policy.echo(), "override": override}
    return CatReport(kappa, checks, violations, space.slack, skipped, params)
