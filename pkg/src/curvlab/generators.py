"""Seeded generators for the test-suite spaces (unit weights throughout)."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .metric import MetricSpace, from_edges

MAX_POINTS = 10**4

KINDS = ("tree", "binary-tree", "cycle", "grid", "torus", "hyperbolic-tessellation", "random-graph")


@dataclass(frozen=True)
class GenSpec:
    kind: str
    n: int = 0
    m: int = 0
    depth: int = 0
    radius: int = 0
    seed: int = 0

    def echo(self) -> dict:
        return {"kind": self.kind, "n": self.n, "m": self.m, "depth": self.depth, "radius": self.radius, "seed": self.seed}


def _need(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


def random_tree_edges(n: int, rng: random.Random) -> list[tuple[int, int]]:
    """Uniform attachment: point ``i`` hangs off a uniformly chosen earlier point."""
    return [(rng.randrange(i), i) for i in range(1, n)]


def binary_tree_edges(depth: int) -> list[tuple[int, int]]:
    return [((i - 1) // 2, i) for i in range(1, 2 ** (depth + 1) - 1)]


def cycle_edges(n: int) -> list[tuple[int, int]]:
    return [(i, (i + 1) % n) for i in range(n)]


def grid_edges(n: int, m: int) -> list[tuple[int, int]]:
    out = []
    for i in range(n):
        for j in range(m):
            v = i * m + j
            if j + 1 < m:
                out.append((v, v + 1))
            if i + 1 < n:
                out.append((v, v + m))
    return out


def torus_edges(n: int, m: int) -> list[tuple[int, int]]:
    """Box product of two cycles; both factors need length >= 3."""
    out = set()
    for i in range(n):
        for j in range(m):
            v = i * m + j
            for w in (i * m + (j + 1) % m, ((i + 1) % n) * m + j):
                out.add((min(v, w), max(v, w)))
    return sorted(out)


def tessellation_edges(radius: int, order: int = 7) -> list[tuple[int, int]]:
    """Ball of the given radius around a vertex of the order-``order`` triangulation.

    Built ring by ring: every vertex of ring ``k`` still short of ``order``
    neighbours spawns a consecutive run of ring ``k + 1`` vertices, sharing the
    first of the run with its predecessor on the ring. Ring sizes for order 7
    are 1, 7, 21, 56, 147, ...
    """
    edges: list[tuple[int, int]] = []
    deg = [0]

    def link(a, b):
        edges.append((a, b))
        deg[a] += 1
        deg[b] += 1

    if radius == 0:
        return edges
    ring = list(range(1, order + 1))
    deg.extend([0] * order)
    for v in ring:
        link(0, v)
    for a, b in zip(ring, ring[1:] + ring[:1]):
        link(a, b)
    for _ in range(radius - 1):
        nxt: list[int] = []
        first_shared = None
        prev_last = None
        for v in ring:
            need = order - deg[v]
            _need(need >= 2, "triangulation order too small for a hyperbolic layer recurrence")
            run = []
            if prev_last is not None:
                run.append(prev_last)
            fresh = need - 1 if prev_last is not None else need
            for _ in range(fresh):
                deg.append(0)
                run.append(len(deg) - 1)
            if prev_last is None:
                first_shared = run[0]
                nxt.extend(run)
            else:
                nxt.extend(run[1:])
            for u in run:
                link(v, u)
            prev_last = run[-1]
        # the last vertex's final new neighbour coincides with the first one
        last = nxt.pop()
        edges[:] = [(a, first_shared if b == last else b) for a, b in edges]
        deg[first_shared] += deg[last]
        deg.pop()
        for a, b in zip(nxt, nxt[1:] + nxt[:1]):
            link(a, b)
        ring = nxt
    return edges


def random_graph_edges(n: int, extra: int, rng: random.Random) -> list[tuple[int, int]]:
    """Uniform-attachment spanning tree plus ``extra`` random chords."""
    out = set((min(a, b), max(a, b)) for a, b in random_tree_edges(n, rng))
    possible = n * (n - 1) // 2
    extra = min(extra, possible - len(out))
    while extra > 0:
        a, b = rng.sample(range(n), 2)
        e = (min(a, b), max(a, b))
        if e not in out:
            out.add(e)
            extra -= 1
    return sorted(out)


def generate_edges(spec: GenSpec) -> list[tuple[int, int]]:
    k = spec.kind
    rng = random.Random(spec.seed)
    if k == "tree":
        _need(spec.n >= 2, "tree needs n >= 2")
        edges = random_tree_edges(spec.n, rng)
        npts = spec.n
    elif k == "binary-tree":
        _need(spec.depth >= 1, "binary tree needs depth >= 1")
        npts = 2 ** (spec.depth + 1) - 1
        _need(npts <= MAX_POINTS, "too many points")
        edges = binary_tree_edges(spec.depth)
    elif k == "cycle":
        _need(spec.n >= 3, "cycle needs n >= 3")
        edges, npts = cycle_edges(spec.n), spec.n
    elif k == "grid":
        m = spec.m or spec.n
        _need(spec.n >= 1 and m >= 1 and spec.n * m >= 2, "grid needs at least two points")
        edges, npts = grid_edges(spec.n, m), spec.n * m
    elif k == "torus":
        m = spec.m or spec.n
        _need(spec.n >= 3 and m >= 3, "torus factors need length >= 3")
        edges, npts = torus_edges(spec.n, m), spec.n * m
    elif k == "hyperbolic-tessellation":
        _need(1 <= spec.radius <= 6, "tessellation radius must be in 1..6")
        edges = tessellation_edges(spec.radius)
        npts = 1 + max(max(e) for e in edges)
    elif k == "random-graph":
        _need(spec.n >= 2, "random graph needs n >= 2")
        edges = random_graph_edges(spec.n, spec.m if spec.m else spec.n, rng)
        npts = spec.n
    else:
        raise ValueError(f"unknown kind {k!r}; expected one of {', '.join(KINDS)}")
    _need(npts <= MAX_POINTS, f"{npts} points exceeds the limit of {MAX_POINTS}")
    return [(min(a, b), max(a, b)) for a, b in edges]


def generate(spec: GenSpec) -> MetricSpace:
    edges = generate_edges(spec)
    return from_edges(((a, b, 1) for a, b in edges), source=f"gen:{spec.kind}")


def edgelist_text(spec: GenSpec) -> str:
    head = "# " + " ".join(f"{k}={v}" for k, v in spec.echo().items()) + "\n"
    return head + "".join(f"{a} {b} 1\n" for a, b in generate_edges(spec))
