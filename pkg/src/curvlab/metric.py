"""Finite metric spaces with exact rational distances.

Distances are held as an integer matrix ``dmat`` together with a common
denominator ``scale``; ``dmat[i, j] / scale`` is the exact distance.  This keeps
every comparison exact while letting scans run on numpy arrays.
"""
from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

Point = Hashable

DEFAULT_GEODESIC_CAP = 10**6

# float64 shortest paths are exact while every path sum stays below 2**53
_FLOAT_EXACT_LIMIT = 2**53


class CurvlabError(Exception):
    pass


class ParseError(CurvlabError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DisconnectedError(CurvlabError, ValueError):
    pass


class MetricAxiomError(CurvlabError, ValueError):
    def __init__(self, message: str, witness: tuple = ()):
        self.witness = witness
        super().__init__(message)


def point_key(p: Point):
    """Total order on point identifiers: integers first, then subdivision tuples."""
    if isinstance(p, tuple):
        return (1, tuple(point_key(e) for e in p))
    return (0, p)


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not text:
        raise ValueError("empty number")
    return Fraction(text)


def fmt_rational(x: Fraction | int) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class GeodesicPath:
    waypoints: tuple
    arc_lengths: tuple

    @property
    def length(self) -> Fraction:
        return self.arc_lengths[-1]

    @property
    def start(self):
        return self.waypoints[0]

    @property
    def end(self):
        return self.waypoints[-1]

    def __len__(self) -> int:
        return len(self.waypoints)

    def position(self, t) -> Point | None:
        """Waypoint at arc length ``t``, or None if no waypoint sits there."""
        t = Fraction(t)
        for p, ell in zip(self.waypoints, self.arc_lengths):
            if ell == t:
                return p
        return None


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """Immutable finite metric space.

    ``edges`` holds ``(u, v, w)`` triples for graph-derived spaces. Matrix spaces
    get the essential edges (pairs with no point strictly between them) so that
    geodesics are well defined for both origins.
    """

    points: tuple
    dmat: np.ndarray
    scale: int
    origin: str
    edges: tuple = ()
    source: str = ""
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {p: i for i, p in enumerate(self.points)})
        self.dmat.setflags(write=False)

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, p) -> bool:
        return p in self.index

    @property
    def n(self) -> int:
        return len(self.points)

    def dist(self, p, q) -> Fraction:
        return Fraction(int(self.dmat[self.index[p], self.index[q]]), self.scale)

    def idist(self, i: int, j: int) -> Fraction:
        return Fraction(int(self.dmat[i, j]), self.scale)

    def to_fraction(self, scaled) -> Fraction:
        return Fraction(int(scaled), self.scale)

    def to_scaled(self, x) -> int:
        """Scaled integer for rational ``x``; raises if ``x`` is not on the grid."""
        x = Fraction(x) * self.scale
        if x.denominator != 1:
            raise ValueError(f"{x / self.scale} is not a multiple of 1/{self.scale}")
        return x.numerator

    @cached_property
    def diameter(self) -> Fraction:
        return self.to_fraction(self.dmat.max()) if self.n else Fraction(0)

    @cached_property
    def slack(self) -> Fraction:
        """Quantization slack: the largest edge weight."""
        if not self.edges:
            return Fraction(0)
        return max(w for _, _, w in self.edges)

    @cached_property
    def adjacency(self) -> tuple:
        """Per point index, sorted ``(neighbour index, scaled weight)`` pairs."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for u, v, w in self.edges:
            i, j = self.index[u], self.index[v]
            ws = self.to_scaled(w)
            adj[i].append((j, ws))
            adj[j].append((i, ws))
        return tuple(tuple(sorted(a)) for a in adj)

    def describe(self) -> dict:
        return {
            "source": self.source,
            "origin": self.origin,
            "points": self.n,
            "edges": len(self.edges),
            "slack": fmt_rational(self.slack),
        }


# ---------------------------------------------------------------- construction


def _lcm_denominators(values: Iterable[Fraction]) -> int:
    return reduce(math.lcm, (Fraction(v).denominator for v in values), 1)


def _dijkstra_exact(n: int, adj: list[list[tuple[int, int]]]) -> np.ndarray:
    out = np.zeros((n, n), dtype=object)
    for s in range(n):
        dist = [None] * n
        dist[s] = 0
        heap = [(0, s)]
        while heap:
            d, u = heapq.heappop(heap)
            if d != dist[u]:
                continue
            for v, w in adj[u]:
                nd = d + w
                if dist[v] is None or nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        out[s] = dist
    return out


def from_edges(edges: Iterable[tuple], source: str = "", points: Iterable | None = None) -> MetricSpace:
    """Build a graph-derived space from ``(u, v, w)`` triples.

    Duplicate edges keep the minimum weight; the graph must be connected.
    """
    best: dict[tuple, Fraction] = {}
    pts = set(points or ())
    for u, v, w in edges:
        w = Fraction(w)
        if w <= 0:
            raise ValueError(f"edge {u}-{v} has non-positive weight {w}")
        if u == v:
            raise ValueError(f"self-loop at {u}")
        a, b = sorted((u, v), key=point_key)
        if (a, b) not in best or w < best[(a, b)]:
            best[(a, b)] = w
        pts.update((u, v))
    ordered = tuple(sorted(pts, key=point_key))
    if not ordered:
        raise ValueError("empty space")
    edge_list = tuple((a, b, w) for (a, b), w in sorted(best.items(), key=lambda kv: (point_key(kv[0][0]), point_key(kv[0][1]))))
    scale = _lcm_denominators(w for _, _, w in edge_list)
    n = len(ordered)
    idx = {p: i for i, p in enumerate(ordered)}
    if n == 1:
        return MetricSpace(ordered, np.zeros((1, 1), dtype=np.int64), scale, "graph", edge_list, source)

    rows, cols, vals = [], [], []
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for a, b, w in edge_list:
        i, j, ws = idx[a], idx[b], int(w * scale)
        rows += [i, j]
        cols += [j, i]
        vals += [ws, ws]
        adj[i].append((j, ws))
        adj[j].append((i, ws))
    graph = csr_matrix((np.array(vals, dtype=np.float64), (rows, cols)), shape=(n, n))
    ncomp, labels = connected_components(graph, directed=False)
    if ncomp > 1:
        stray = ordered[int(np.argmax(labels != labels[0]))]
        raise DisconnectedError(f"graph is disconnected ({ncomp} components; {ordered[0]} cannot reach {stray})")
    if sum(vals) // 2 < _FLOAT_EXACT_LIMIT:
        dm = dijkstra(graph, directed=False).astype(np.int64)
    else:
        dm = _dijkstra_exact(n, adj)
    return MetricSpace(ordered, dm, scale, "graph", edge_list, source)


def from_matrix(ids: Sequence, matrix: Sequence[Sequence], source: str = "") -> MetricSpace:
    """Build a matrix-origin space; checks symmetry, zero diagonal and triangle inequality."""
    n = len(ids)
    if len(set(ids)) != n:
        raise ValueError("duplicate point identifiers")
    fr = [[Fraction(x) for x in row] for row in matrix]
    if len(fr) != n or any(len(r) != n for r in fr):
        raise ValueError("matrix is not square")
    order = sorted(range(n), key=lambda i: point_key(ids[i]))
    ids = [ids[i] for i in order]
    fr = [[fr[i][j] for j in order] for i in order]
    scale = _lcm_denominators(x for row in fr for x in row)
    big = max((abs(x) for row in fr for x in row), default=0) * scale * 3 >= 2**62
    dm = np.array([[int(x * scale) for x in row] for row in fr], dtype=object if big else np.int64)
    for i in range(n):
        if dm[i, i] != 0:
            raise MetricAxiomError(f"nonzero diagonal at {ids[i]}", (ids[i],))
        for j in range(n):
            if dm[i, j] < 0:
                raise MetricAxiomError(f"negative distance between {ids[i]} and {ids[j]}", (ids[i], ids[j]))
            if dm[i, j] != dm[j, i]:
                raise MetricAxiomError(f"asymmetric distance between {ids[i]} and {ids[j]}", (ids[i], ids[j]))
            if i != j and dm[i, j] == 0:
                raise MetricAxiomError(f"distinct points {ids[i]} and {ids[j]} at distance 0", (ids[i], ids[j]))
    # d(i,k) <= d(i,j) + d(j,k) for all triples
    for j in range(n):
        viol = dm > dm[:, j][:, None] + dm[j, :][None, :]
        if viol.any():
            i, k = (int(a) for a in np.argwhere(viol)[0])
            a, b, c = sorted((ids[i], ids[j], ids[k]), key=point_key)
            raise MetricAxiomError(
                f"triangle inequality violated: d({ids[i]},{ids[k]}) > d({ids[i]},{ids[j]}) + d({ids[j]},{ids[k]}) for triple ({a},{b},{c})",
                (ids[i], ids[j], ids[k]),
            )
    # essential edges: no third point lies strictly between the endpoints
    edges = []
    for i in range(n):
        for k in range(i + 1, n):
            between = dm[i, :] + dm[:, k] == dm[i, k]
            between[i] = between[k] = False
            if not between.any():
                edges.append((ids[i], ids[k], Fraction(int(dm[i, k]), scale)))
    return MetricSpace(tuple(ids), dm, scale, "matrix", tuple(edges), source)


# --------------------------------------------------------------------- loading


def _parse_id(tok: str, line: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise ParseError(f"point identifier {tok!r} is not an integer", line) from None
    if v < 0:
        raise ParseError(f"point identifier {tok!r} is negative", line)
    return v


def parse_edgelist(text: str, source: str = "") -> MetricSpace:
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if len(toks) != 3:
            raise ParseError(f"expected 'u v w', got {len(toks)} fields", lineno)
        u, v = _parse_id(toks[0], lineno), _parse_id(toks[1], lineno)
        try:
            w = parse_rational(toks[2])
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad weight {toks[2]!r}", lineno) from None
        if w <= 0:
            raise ParseError(f"weight must be positive, got {toks[2]}", lineno)
        if u == v:
            raise ParseError(f"self-loop at {u}", lineno)
        edges.append((u, v, w))
    if not edges:
        raise ParseError("no edges found")
    return from_edges(edges, source)


def parse_matrix(text: str, source: str = "") -> MetricSpace:
    rows = [r for r in csv.reader(text.splitlines()) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty matrix")
    header = [c.strip() for c in rows[0]]
    if header and (header[0] == "" or not header[0].lstrip("-").isdigit()):
        header = header[1:]
    ids = [_parse_id(h, 1) for h in header]
    n = len(ids)
    matrix = []
    row_ids = []
    for lineno, row in enumerate(rows[1:], start=2):
        cells = [c.strip() for c in row]
        if len(cells) != n + 1:
            raise ParseError(f"expected {n + 1} fields, got {len(cells)}", lineno)
        row_ids.append(_parse_id(cells[0], lineno))
        try:
            matrix.append([parse_rational(c) for c in cells[1:]])
        except (ValueError, ZeroDivisionError):
            raise ParseError("bad distance entry", lineno) from None
    if row_ids != ids:
        raise ParseError("row identifiers do not match header")
    try:
        return from_matrix(ids, matrix, source)
    except MetricAxiomError:
        raise
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def load_space(path: str | Path, format: str = "edgelist") -> MetricSpace:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if format == "edgelist":
        return parse_edgelist(text, str(path))
    if format == "matrix":
        return parse_matrix(text, str(path))
    raise ValueError(f"unknown format {format!r}")


def write_edgelist(space: MetricSpace) -> str:
    if space.origin != "graph":
        raise CurvlabError("only graph spaces have an edge list")
    return "".join(f"{u} {v} {fmt_rational(w)}\n" for u, v, w in space.edges)


# ----------------------------------------------------------------- subdivision


def subdivide(space: MetricSpace, k: int) -> MetricSpace:
    """Replace each edge by ``k + 1`` equal pieces through points ``(u, v, i)``."""
    if space.origin != "graph":
        raise CurvlabError("cannot subdivide a matrix-origin space (it has no edges)")
    if k < 0:
        raise ValueError("subdivision level must be nonnegative")
    if k == 0:
        return space
    edges = []
    for u, v, w in space.edges:
        piece = w / (k + 1)
        chain = [u] + [(u, v, i) for i in range(1, k + 1)] + [v]
        edges.extend((a, b, piece) for a, b in zip(chain, chain[1:]))
    return from_edges(edges, space.source, points=space.points)


# ------------------------------------------------------------------- geodesics


def geodesic_successors(space: MetricSpace, i: int, j: int) -> list[list[int]]:
    """Shortest-path DAG from index ``i`` to ``j``: successor lists (ascending)."""
    D = space.dmat
    target = D[i, j]
    succ: list[list[int]] = [[] for _ in range(space.n)]
    on = np.flatnonzero(D[i, :] + D[:, j] == target)
    for u in on:
        du = D[i, u]
        for v, w in space.adjacency[u]:
            if D[i, v] == du + w and du + w + D[v, j] == target:
                succ[u].append(v)
    return succ


def interval(space: MetricSpace, i: int, j: int) -> np.ndarray:
    """Indices of points lying on some geodesic between ``i`` and ``j``."""
    D = space.dmat
    return np.flatnonzero(D[i, :] + D[:, j] == D[i, j])


def _path(space: MetricSpace, idx: list[int]) -> GeodesicPath:
    i0 = idx[0]
    return GeodesicPath(
        tuple(space.points[i] for i in idx),
        tuple(space.idist(i0, i) for i in idx),
    )


def iter_geodesic_indices(space: MetricSpace, i: int, j: int):
    """Yield geodesics from ``i`` to ``j`` as index lists, lexicographically."""
    if i == j:
        yield [i]
        return
    succ = geodesic_successors(space, i, j)
    path = [i]
    stack = [iter(succ[i])]
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            path.pop()
            continue
        path.append(nxt)
        if nxt == j:
            yield list(path)
            path.pop()
        else:
            stack.append(iter(succ[nxt]))


def count_geodesics(space: MetricSpace, i: int, j: int) -> int:
    if i == j:
        return 1
    succ = geodesic_successors(space, i, j)
    order = sorted(interval(space, i, j), key=lambda u: space.dmat[i, u], reverse=True)
    count = {int(j): 1}
    for u in order:
        if u != j:
            count[int(u)] = sum(count.get(v, 0) for v in succ[u])
    return count[i]


def enumerate_geodesics(space: MetricSpace, x, y, cap: int = DEFAULT_GEODESIC_CAP) -> tuple[list[GeodesicPath], bool]:
    """All shortest ``x``-``y`` paths in lexicographic waypoint order.

    Returns ``(paths, truncated)``; at most ``cap`` paths are produced.
    """
    if cap < 1:
        raise ValueError("cap must be positive")
    i, j = space.index[x], space.index[y]
    out = []
    for idx in iter_geodesic_indices(space, i, j):
        if len(out) == cap:
            return out, True
        out.append(_path(space, idx))
    return out, False


def least_geodesic(space: MetricSpace, x, y) -> GeodesicPath:
    return _path(space, next(iter_geodesic_indices(space, space.index[x], space.index[y])))
