"""Finite nets in the upper half-plane carrying the electric Teichmüller metric.

Net points sit on a lattice that is uniform for the hyperbolic metric:
rows at heights y_j = exp(j * row_gap), and within row j an x-spacing of
2 * step * y_j (offset by half a spacing on odd rows).  Halving ``step``
gives a superset of the points.  Nearby points are joined by edges
weighted by the Teichmüller distance, and every point whose shortest
curve has extremal length <= epsilon is attached to that curve's cone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .electric import ElectricSpace, MetricSample, build_electric
from .foliation import Slope
from .teich import DEFAULT_EPSILON, TeichPoint, shortest_curves, teich_distance_array

ROW_FACTOR = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class BoxWindow:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def row_intervals(self, y: float) -> list[tuple[float, float]]:
        return [(self.x_lo, self.x_hi)]

    def y_range(self) -> tuple[float, float]:
        return self.y_lo, self.y_hi


@dataclass(frozen=True)
class TubeWindow:
    """All points within Teichmüller distance ``radius`` of some anchor."""

    anchors: tuple[tuple[float, float], ...]
    radius: float = 2.0

    @cached_property
    def _arrays(self):
        a = np.array(self.anchors, dtype=float)
        return a[:, 0], a[:, 1]

    def y_range(self) -> tuple[float, float]:
        ax, ay = self._arrays
        f = math.exp(2 * self.radius)
        return float(ay.min() / f), float(ay.max() * f)

    def row_intervals(self, y: float) -> list[tuple[float, float]]:
        ax, ay = self._arrays
        c = math.cosh(2 * self.radius) - 1.0
        w2 = 2.0 * y * ay * c - (y - ay) ** 2
        ok = w2 > 0
        if not ok.any():
            return []
        w = np.sqrt(w2[ok])
        lo, hi = ax[ok] - w, ax[ok] + w
        order = np.argsort(lo)
        merged = []
        for a, b in zip(lo[order], hi[order]):
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return [(float(a), float(b)) for a, b in merged]


def tube_around(paths: Sequence[Sequence[TeichPoint]], radius: float = 2.0) -> TubeWindow:
    return TubeWindow(tuple((p.x, p.y) for path in paths for p in path), radius)


@dataclass(frozen=True)
class NetConfig:
    step: float = 0.15          # Teichmüller spacing inside a row
    reach: float = 3.2          # edge cutoff in units of step
    epsilon: float = DEFAULT_EPSILON
    denom_bound: int | None = None  # cones only for slopes with q <= bound; None = all

    @property
    def row_gap(self) -> float:
        return 2.0 * self.step * ROW_FACTOR

    @property
    def cutoff(self) -> float:
        return self.reach * self.step


def lattice_points(window, step: float) -> tuple[np.ndarray, np.ndarray]:
    gap = 2.0 * step * ROW_FACTOR
    y_lo, y_hi = window.y_range()
    j_lo = math.ceil(math.log(y_lo) / gap - 1e-9)
    j_hi = math.floor(math.log(y_hi) / gap + 1e-9)
    xs, ys = [], []
    for j in range(j_lo, j_hi + 1):
        y = math.exp(j * gap)
        s = 2.0 * step * y
        off = 0.5 * s if j % 2 else 0.0
        for a, b in window.row_intervals(y):
            k = np.arange(math.ceil((a - off) / s), math.floor((b - off) / s) + 1)
            xs.append(k * s + off)
            ys.append(np.full(k.shape, y))
    if not xs:
        return np.empty(0), np.empty(0)
    return np.concatenate(xs), np.concatenate(ys)


def neighbor_edges(x: np.ndarray, y: np.ndarray, cutoff: float, gap: float):
    """All pairs at Teichmüller distance <= cutoff, each unordered pair once."""
    band = np.floor(np.log(y) / gap + 0.5).astype(np.int64)
    order = np.lexsort((x, band))
    bands = band[order]
    uniq, starts = np.unique(bands, return_index=True)
    ends = np.append(starts[1:], len(order))
    span = {int(b): (s, e) for b, s, e in zip(uniq, starts, ends)}
    # hyperbolic separation of bands b, b + db is at least (db - 1) * gap
    max_db = int(math.ceil(2.0 * cutoff / gap)) + 1
    wfac = math.sqrt(2.0 * (math.cosh(2.0 * cutoff) - 1.0))
    R, C = [], []
    for b, (s, e) in span.items():
        ib = order[s:e]
        xb = x[ib]
        for db in range(0, max_db + 1):
            other = span.get(b + db)
            if other is None:
                continue
            io = order[other[0]:other[1]]
            xo = x[io]
            ymax = max(y[ib].max(), y[io].max())
            w = ymax * wfac
            lo = np.searchsorted(xo, xb - w, "left")
            hi = np.searchsorted(xo, xb + w, "right")
            counts = hi - lo
            total = int(counts.sum())
            if total == 0:
                continue
            src = np.repeat(np.arange(len(ib)), counts)
            offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
            dst = lo[src] + offs
            a, c = ib[src], io[dst]
            if db == 0:
                keep = a < c
                a, c = a[keep], c[keep]
            R.append(a)
            C.append(c)
    if not R:
        return np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0)
    a = np.concatenate(R)
    c = np.concatenate(C)
    d = teich_distance_array(x[a], y[a], x[c], y[c])
    keep = (d <= cutoff) & (a != c)
    return a[keep], c[keep], d[keep]


def cone_sets(x: np.ndarray, y: np.ndarray, epsilon: float,
              denom_bound: int | None = None, collar: float = 0.0):
    """Net points grouped by the Thin region containing them.

    For epsilon < 1 a point lies in at most one Thin region, that of its
    shortest curve.  Returns (members, links): ``links`` holds points
    outside the region but within Teichmüller distance ``collar`` of it,
    with cone-link length 1/2 + 1/2 log(ext / epsilon) (the exact distance
    to a horoball, plus the cone edge).
    """
    if epsilon >= 1:
        raise ValueError("cone sets assume epsilon < 1 (Thin regions pairwise disjoint)")
    p, q = shortest_curves(x, y)
    flip = (q < 0) | ((q == 0) & (p < 0))
    p, q = np.where(flip, -p, p), np.where(flip, -q, q)
    ext = ((p + q * x) ** 2 + (q * y) ** 2) / y
    near = ext <= epsilon * math.exp(2.0 * collar)
    if denom_bound is not None:
        near &= q <= denom_bound
    idx = np.flatnonzero(near)
    members: dict[Slope, list[int]] = {}
    links: dict[Slope, list[int]] = {}
    for i, pp, qq in zip(idx.tolist(), p[idx].tolist(), q[idx].tolist()):
        s = Slope(pp, qq)
        (members if ext[i] <= epsilon else links).setdefault(s, []).append(i)
    order = sorted(members, key=Slope.sort_key)
    cones = {s: np.array(members[s]) for s in order}
    cone_links = {}
    for s in order:
        if s in links:
            li = np.array(links[s])
            cone_links[s] = (li, 0.5 + 0.5 * np.log(ext[li] / epsilon))
    return cones, cone_links


@dataclass
class HyperbolicNet:
    """Net points (lattice first, then extras), their cones and the electric space."""

    config: NetConfig
    window: object
    x: np.ndarray
    y: np.ndarray
    n_lattice: int
    cones: dict[Slope, np.ndarray]
    edges: tuple[np.ndarray, np.ndarray, np.ndarray]
    space: ElectricSpace = field(repr=False)

    def __len__(self) -> int:
        return len(self.x)

    def point(self, i: int) -> TeichPoint:
        return TeichPoint(float(self.x[i]), float(self.y[i]))

    def extra_index(self, k: int) -> int:
        return self.n_lattice + k

    def d_el(self, i: int, j: int) -> float:
        return self.space.d_el(i, j)

    def thin_distance(self, a: Slope, b: Slope) -> float:
        return self.space.set_distance(a, b)

    def cone_of(self, i: int) -> Slope | None:
        for s, members in self.cones.items():
            if i in members:
                return s
        return None

    def lattice_near(self, pt: TeichPoint, k: int = 1) -> np.ndarray:
        d = teich_distance_array(self.x[: self.n_lattice], self.y[: self.n_lattice], pt.x, pt.y)
        return np.argsort(d, kind="stable")[:k]

    def metric_sample(self) -> MetricSample:
        x, y = self.x, self.y
        return MetricSample(
            [f"{a!r},{b!r}" for a, b in zip(x.tolist(), y.tolist())],
            lambda i, j: float(teich_distance_array(x[i], y[i], x[j], y[j])),
        )


def build_net(config: NetConfig, window, extras: Sequence[TeichPoint] = ()) -> HyperbolicNet:
    return _build_net(config, window, tuple((p.x, p.y) for p in extras))


@lru_cache(maxsize=8)
def _build_net(config: NetConfig, window, extras: tuple[tuple[float, float], ...]) -> HyperbolicNet:
    lx, ly = lattice_points(window, config.step)
    n_lat = len(lx)
    if extras:
        ex = np.array(extras, dtype=float)
        x = np.concatenate([lx, ex[:, 0]])
        y = np.concatenate([ly, ex[:, 1]])
    else:
        x, y = lx, ly
    if len(x) == 0:
        raise ValueError("window contains no net points")
    edges = neighbor_edges(x, y, config.cutoff, config.row_gap)
    cones, links = cone_sets(x, y, config.epsilon, config.denom_bound, config.cutoff)
    labels = list(range(len(x)))
    base = MetricSample(labels, lambda i, j: float(teich_distance_array(x[i], y[i], x[j], y[j])))
    space = build_electric(base, cones, edges, links)
    return HyperbolicNet(config, window, x, y, n_lat, cones, edges, space)
