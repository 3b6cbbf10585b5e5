"""Farey graph on slopes: adjacency, bounded breadth-first distances and balls.

The vertex universe for every search is finite: slopes p/q with
1 <= q <= ``denom_bound`` and |p/q| <= ``height``, together with 1/0.
Edges are never materialised globally; neighbours are enumerated from the
determinant condition |p s - q r| = threshold.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .foliation import Slope, slope_intersection

INFINITY = Slope(1, 0)


class DisconnectedError(ValueError):
    """The two slopes lie in different components of the adjacency graph."""


class BallOverflowError(RuntimeError):
    pass


@dataclass(frozen=True)
class FareyParams:
    threshold: int = 1

    def __post_init__(self):
        if self.threshold not in (1, 2):
            raise ValueError("threshold must be 1 (torus) or 2 (four-punctured sphere)")


TORUS = FareyParams(1)


def adjacent(a: Slope, b: Slope, params: FareyParams = TORUS) -> bool:
    if a == b:
        warnings.warn(f"adjacency of {a} with itself is degenerate", stacklevel=2)
        return False
    return slope_intersection(a, b) == params.threshold


def in_universe(v: Slope, denom_bound: int, height: int) -> bool:
    return v.q == 0 or (v.q <= denom_bound and abs(v.p) <= height * v.q)


def neighbors(v: Slope, params: FareyParams, denom_bound: int, height: int) -> list[Slope]:
    """All universe slopes adjacent to ``v``, sorted by (q, p)."""
    t = params.threshold
    out = []
    if v.q == 0:
        if t <= denom_bound:
            out = [Slope(r, t) for r in range(-height * t, height * t + 1) if math.gcd(r, t) == 1]
        return out
    p, q = v.p, v.q
    if q == t:
        out.append(INFINITY)
    s0 = pow(p, -1, q) if q > 1 else 0
    r0 = (p * s0 - 1) // q
    for sign in (1, -1):
        rp, sp = sign * t * r0, sign * t * s0
        k_lo = -((sp - 1) // q)  # ceil((1 - sp) / q)
        k_hi = (denom_bound - sp) // q
        for k in range(k_lo, k_hi + 1):
            r, s = rp + k * p, sp + k * q
            if abs(r) <= height * s and math.gcd(r, s) == 1:
                out.append(Slope(r, s))
    out = sorted(set(out), key=Slope.sort_key)
    return out


def default_bounds(*slopes: Slope) -> tuple[int, int]:
    """Smallest universe that contains every geodesic between the given slopes.

    Farey geodesics can be taken inside the ladder of triangles crossed by
    the hyperbolic geodesic, whose vertices have denominators at most the
    larger input denominator and values between the inputs' integer parts.
    """
    bound = max([1] + [s.q for s in slopes])
    height = 1 + max([0] + [math.ceil(abs(s.p) / s.q) for s in slopes if s.q])
    return bound, height


class _Universe:
    def __init__(self, params: FareyParams, denom_bound: int, height: int):
        self.params, self.denom_bound, self.height = params, denom_bound, height
        self._adj: dict[Slope, list[Slope]] = {}

    def nbrs(self, v: Slope) -> list[Slope]:
        got = self._adj.get(v)
        if got is None:
            got = self._adj[v] = neighbors(v, self.params, self.denom_bound, self.height)
        return got


@lru_cache(maxsize=64)
def _universe(params: FareyParams, denom_bound: int, height: int) -> _Universe:
    return _Universe(params, denom_bound, height)


def _check(a: Slope, b: Slope, denom_bound: int, height: int):
    for v in (a, b):
        if not in_universe(v, denom_bound, height):
            raise ValueError(f"{v} lies outside the search universe "
                             f"(denom_bound={denom_bound}, height={height})")


def _resolve(a, b, denom_bound, height):
    d_b, d_h = default_bounds(a, b)
    return (d_b if denom_bound is None else denom_bound,
            d_h if height is None else height)


def bfs_layers(source: Slope, params: FareyParams, denom_bound: int, height: int,
               cutoff: int | None = None, stop: Slope | None = None,
               max_vertices: int | None = None) -> dict[Slope, int]:
    """Breadth-first distances from ``source`` inside the bounded universe."""
    U = _universe(params, denom_bound, height)
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        dv = dist[v]
        if v == stop or (cutoff is not None and dv >= cutoff):
            if v == stop:
                break
            continue
        for w in U.nbrs(v):
            if w not in dist:
                dist[w] = dv + 1
                if max_vertices is not None and len(dist) > max_vertices:
                    raise BallOverflowError(f"ball exceeded {max_vertices} vertices")
                queue.append(w)
    return dist


def farey_distance(a: Slope, b: Slope, params: FareyParams = TORUS,
                   denom_bound: int | None = None, height: int | None = None) -> int:
    """Edge-path distance between ``a`` and ``b`` in the bounded universe.

    Bidirectional breadth-first search; raises DisconnectedError when no
    path exists inside the universe.
    """
    denom_bound, height = _resolve(a, b, denom_bound, height)
    _check(a, b, denom_bound, height)
    if a == b:
        return 0
    U = _universe(params, denom_bound, height)
    da, db = {a: 0}, {b: 0}
    fa, fb = [a], [b]
    best = math.inf
    while fa and fb:
        # expand the cheaper frontier one full layer
        if sum(len(U.nbrs(v)) for v in fa) > sum(len(U.nbrs(v)) for v in fb):
            fa, fb, da, db = fb, fa, db, da
        nxt = []
        for v in fa:
            for w in U.nbrs(v):
                if w in db:
                    best = min(best, da[v] + 1 + db[w])
                if w not in da:
                    da[w] = da[v] + 1
                    nxt.append(w)
        if best < math.inf:
            return int(best)
        fa = nxt
    raise DisconnectedError(f"{a} and {b} are not connected within the universe")


def geodesic_path(a: Slope, b: Slope, params: FareyParams = TORUS,
                  denom_bound: int | None = None, height: int | None = None) -> list[Slope]:
    """One shortest path from a to b; ties broken by smallest (q, p)."""
    denom_bound, height = _resolve(a, b, denom_bound, height)
    _check(a, b, denom_bound, height)
    to_b = bfs_layers(b, params, denom_bound, height, stop=a)
    if a not in to_b:
        raise DisconnectedError(f"{a} and {b} are not connected within the universe")
    U = _universe(params, denom_bound, height)
    path = [a]
    while path[-1] != b:
        want = to_b[path[-1]] - 1
        path.append(next(w for w in U.nbrs(path[-1]) if to_b.get(w) == want))
    return path


@dataclass
class FareyBall:
    center: Slope
    radius: int
    denom_bound: int
    height: int
    params: FareyParams = TORUS
    dist: dict[Slope, int] = field(default_factory=dict)
    edges: list[tuple[Slope, Slope]] = field(default_factory=list)

    @property
    def vertices(self) -> list[Slope]:
        return sorted(self.dist, key=Slope.sort_key)

    def distance_matrix(self) -> tuple[list[Slope], np.ndarray]:
        """Pairwise Farey distances between ball vertices.

        Computed over the whole bounded universe, so geodesics may leave the ball.
        """
        order = self.vertices
        return order, universe_distances(order, self.params, self.denom_bound, self.height)

    def edges_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex1", "vertex2"])
        for u, v in self.edges:
            w.writerow([str(u), str(v)])
        return buf.getvalue()

    def distances_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex", "dist"])
        for v in self.vertices:
            w.writerow([str(v), self.dist[v]])
        return buf.getvalue()


def ball(center: Slope, radius: int, params: FareyParams = TORUS,
         denom_bound: int = 8, height: int | None = None,
         max_vertices: int = 200_000) -> FareyBall:
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if height is None:
        height = default_bounds(center)[1]
    _check(center, center, denom_bound, height)
    dist = bfs_layers(center, params, denom_bound, height, cutoff=radius,
                      max_vertices=max_vertices)
    U = _universe(params, denom_bound, height)
    edges = []
    for v in sorted(dist, key=Slope.sort_key):
        for w in U.nbrs(v):
            if w in dist and Slope.sort_key(v) < Slope.sort_key(w):
                edges.append((v, w))
    return FareyBall(center, radius, denom_bound, height, params, dist, edges)


def universe_distances(sources: list[Slope], params: FareyParams, denom_bound: int,
                       height: int) -> np.ndarray:
    """Distances from each source to each source, over the full bounded universe."""
    verts = slopes_up_to(denom_bound, -height, height)
    idx = {v: i for i, v in enumerate(sources)}
    for v in verts:
        idx.setdefault(v, len(idx))
    U = _universe(params, denom_bound, height)
    rows, cols = [], []
    for v, i in idx.items():
        for w in U.nbrs(v):
            rows.append(i)
            cols.append(idx[w])
    n = len(idx)
    g = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    D = shortest_path(g, unweighted=True, directed=False, indices=np.arange(len(sources)))
    return D[:, : len(sources)]


def slopes_up_to(denom_bound: int, lo: int = 0, hi: int = 1,
                 with_infinity: bool = True) -> list[Slope]:
    """Canonical slopes with value in [lo, hi] and denominator <= denom_bound."""
    out = {Slope(p, q) for q in range(1, denom_bound + 1)
           for p in range(lo * q, hi * q + 1) if math.gcd(p, q) == 1}
    if with_infinity:
        out.add(INFINITY)
    return sorted(out, key=Slope.sort_key)


def is_edge_path(path: Iterable[Slope], params: FareyParams = TORUS) -> bool:
    path = list(path)
    return all(slope_intersection(u, v) == params.threshold for u, v in zip(path, path[1:]))
