"""Hyperbolicity instrumentation for finite metric samples.

Gromov products, the four-point delta, narrow polygons, the
product/distance sandwich, quasi-isometry constants and a finite-sample
test for convergence at infinity.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Hashable, Sequence

import numpy as np
from numba import njit

from .electric import MetricSample

Metric = Callable[[Any, Any], float]

EXACT_SCAN_LIMIT = 300


def as_metric(d) -> Metric:
    if callable(d):
        return d
    D = np.asarray(d, dtype=float)
    return lambda i, j: float(D[i, j])


def gromov_product(d, x, y, base) -> float:
    d = as_metric(d)
    return 0.5 * (d(x, base) + d(y, base) - d(x, y))


@dataclass(frozen=True)
class GromovReport:
    delta: float
    witness: tuple[int, int, int, int] | None  # (basepoint, x, y, z)
    sample_size: int
    coverage: float = 1.0
    labels: tuple | None = None

    def replay(self, D: np.ndarray) -> float:
        if self.witness is None:
            return 0.0
        w, x, y, z = self.witness
        g = lambda a, b: gromov_product(D, a, b, w)
        return min(g(x, y), g(y, z)) - g(x, z)

    def to_json(self) -> str:
        data = asdict(self)
        if self.labels is not None and self.witness is not None:
            data["witness_labels"] = [str(self.labels[i]) for i in self.witness]
        data.pop("labels")
        return json.dumps(data, sort_keys=True)


@njit(cache=True)
def _four_point_exact(D):
    # delta = max over quadruples of (largest - second largest pair sum) / 2
    n = D.shape[0]
    best = 0.0
    bi, bj, bk, bl, bm = -1, -1, -1, -1, -1
    for i in range(n):
        for j in range(i + 1, n):
            dij = D[i, j]
            for k in range(j + 1, n):
                dik = D[i, k]
                djk = D[j, k]
                for l in range(k + 1, n):
                    s0 = dij + D[k, l]
                    s1 = dik + D[j, l]
                    s2 = D[i, l] + djk
                    if s0 >= s1 and s0 >= s2:
                        gap, m = s0 - max(s1, s2), 0
                    elif s1 >= s2:
                        gap, m = s1 - max(s0, s2), 1
                    else:
                        gap, m = s2 - max(s0, s1), 2
                    if gap > best:
                        best = gap
                        bi, bj, bk, bl, bm = i, j, k, l, m
    return best * 0.5, bi, bj, bk, bl, bm


@njit(cache=True)
def _four_point_sampled(D, quads):
    best = 0.0
    bq, bm = -1, -1
    for r in range(quads.shape[0]):
        i, j, k, l = quads[r, 0], quads[r, 1], quads[r, 2], quads[r, 3]
        s0 = D[i, j] + D[k, l]
        s1 = D[i, k] + D[j, l]
        s2 = D[i, l] + D[j, k]
        if s0 >= s1 and s0 >= s2:
            gap, m = s0 - max(s1, s2), 0
        elif s1 >= s2:
            gap, m = s1 - max(s0, s2), 1
        else:
            gap, m = s2 - max(s0, s1), 2
        if gap > best:
            best, bq, bm = gap, r, m
    return best * 0.5, bq, bm


def _witness(i, j, k, l, m) -> tuple[int, int, int, int]:
    # matching m pairs up the quadruple with the largest sum: {a,c} and {b,w}
    # give d(a,c) + d(b,w) > max(...), i.e. <a|c>_w < min(<a|b>_w, <b|c>_w)
    a, c, b, w = [(i, j, k, l), (i, k, j, l), (i, l, j, k)][m]
    return (w, a, b, c)


def delta_four_point(sample: MetricSample | np.ndarray, max_exact: int = EXACT_SCAN_LIMIT,
                     n_samples: int = 2_000_000, seed: int = 0) -> GromovReport:
    """Smallest delta with <x|z>_w >= min(<x|y>_w, <y|z>_w) - delta on the sample.

    Exact over all quadruples up to ``max_exact`` points; beyond that a
    seeded uniform sample of quadruples is scanned and its coverage reported.
    The returned delta is recomputed from the witness through
    :func:`gromov_product`, so replaying the witness reproduces it.
    """
    labels = tuple(sample.labels) if isinstance(sample, MetricSample) else None
    D = sample.matrix() if isinstance(sample, MetricSample) else np.asarray(sample, dtype=float)
    n = D.shape[0]
    if n < 4:
        return GromovReport(0.0, None, n, 1.0, labels)
    D = np.ascontiguousarray(D, dtype=np.float64)
    total = math.comb(n, 4)
    if n <= max_exact:
        delta, i, j, k, l, m = _four_point_exact(D)
        coverage = 1.0
        quad = (i, j, k, l) if i >= 0 else None
    else:
        rng = np.random.default_rng(seed)
        quads = np.sort(rng.integers(0, n, size=(n_samples, 4)), axis=1).astype(np.int64)
        delta, r, m = _four_point_sampled(D, quads)
        coverage = min(1.0, n_samples / total)
        quad = tuple(int(v) for v in quads[r]) if r >= 0 else None
    if quad is None or delta <= 0:
        return GromovReport(0.0, None, n, coverage, labels)
    witness = _witness(*quad, m)
    report = GromovReport(0.0, tuple(int(v) for v in witness), n, coverage, labels)
    return GromovReport(report.replay(D), report.witness, n, coverage, labels)


def _nearest(point, others, d: Metric) -> float:
    return min(d(point, q) for q in others)


def narrow_polygon_check(sides: Sequence[Sequence[Hashable]], d, bound: float) -> tuple[bool, float]:
    """Is every sampled point of each side within ``bound`` of the other sides?

    Returns (verdict, worst offset).
    """
    d = as_metric(d)
    if len(sides) < 3:
        raise ValueError("a polygon needs at least three sides")
    for k, side in enumerate(sides):
        nxt = sides[(k + 1) % len(sides)]
        if side[-1] != nxt[0]:
            raise ValueError(f"side {k} does not end where side {(k + 1) % len(sides)} starts")
    worst = 0.0
    for k, side in enumerate(sides):
        others = [p for j, s in enumerate(sides) if j != k for p in s]
        for p in side:
            worst = max(worst, _nearest(p, others, d))
    return worst <= bound, worst


@dataclass(frozen=True)
class Sandwich:
    ok: bool
    product: float
    dist_to_geodesic: float
    upper_slack: float  # d(0,[x,y]) - <x|y>, must be >= 0
    lower_slack: float  # <x|y> - (d(0,[x,y]) - 4 delta), must be >= 0


def product_distance_sandwich(d, base, x, y, geodesic: Sequence[Hashable], delta: float,
                              tol: float = 1e-9) -> Sandwich:
    """Check d(0,[x,y]) - 4 delta <= <x|y>_0 <= d(0,[x,y]) on a sampled geodesic.

    ``tol`` absorbs sampling error of the geodesic.
    """
    d = as_metric(d)
    if geodesic[0] != x or geodesic[-1] != y:
        raise ValueError("geodesic endpoints must be x and y")
    g = gromov_product(d, x, y, base)
    dist = _nearest(base, geodesic, d)
    upper = dist - g
    lower = g - (dist - 4 * delta)
    return Sandwich(upper >= -tol and lower >= -tol, g, dist, upper, lower)


@dataclass(frozen=True)
class QIReport:
    k: float
    mu: float
    cobounded_L: float | None = None
    witnesses: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=str)


def fit_qi_constants(a: np.ndarray, b: np.ndarray) -> tuple[float, float, dict]:
    """(k, mu) for paired distances a (source) and b (target).

    mu is first fixed at the floor forced by collapsed pairs (one distance
    zero), which no choice of k can lower; k is then the least value making
    a / k - mu <= b <= k a + mu hold for every pair.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    za, zb = a == 0, b == 0
    mu = float(max(b[za].max(initial=0.0), a[zb].max(initial=0.0)))
    live = ~za & ~zb
    k, kw = 1.0, None
    if live.any():
        with np.errstate(divide="ignore"):
            need = np.maximum(a[live] / (b[live] + mu), (b[live] - mu) / a[live])
        i = int(np.argmax(need))
        if need[i] > 1.0:
            k, kw = float(need[i]), int(np.flatnonzero(live)[i])
    muw = None
    if mu > 0:
        muw = int(np.argmax(np.where(za, b, 0.0) + np.where(zb, a, 0.0)))
    return k, mu, {"k": kw, "mu": muw}


def quasi_isometry_fit(pairs: Sequence[tuple], d0, d1, cover: tuple | None = None) -> QIReport:
    """Fit (k, mu) for a relation given as quadruples (p, p', q, q') with
    p ~ q and p' ~ q'.

    ``cover`` = (targets, images) additionally reports the coboundedness
    constant L = max over targets of the distance to the nearest image.
    """
    if not pairs:
        raise ValueError("need at least one pair of related pairs")
    d0, d1 = as_metric(d0), as_metric(d1)
    a = np.array([d0(p, pp) for p, pp, _, _ in pairs])
    b = np.array([d1(q, qq) for _, _, q, qq in pairs])
    k, mu, w = fit_qi_constants(a, b)
    L = None
    if cover is not None:
        targets, images = cover
        L = max(_nearest(t, images, d1) for t in targets)
    witnesses = {name: (None if i is None else [str(v) for v in pairs[i]]) for name, i in w.items()}
    return QIReport(k, mu, L, witnesses)


@dataclass(frozen=True)
class ConvergenceReport:
    verdict: str  # "diverging" | "bounded" | "inconclusive"
    profile: tuple[float, ...]
    threshold: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def convergence_at_infinity(seq: Sequence[Hashable], d, base, tail: int = 2,
                            threshold: float | None = None) -> ConvergenceReport:
    """Finite evidence for lim <x_m|x_n> = infinity.

    The profile is L(N) = min over m != n >= N of <x_m|x_n>, for N up to
    len(seq) - tail.  Verdict "diverging" when L rises by more than
    ``threshold`` (default five times the median step length of the
    sequence), "bounded" when it rises by at most half of that.
    """
    if not 2 <= tail <= len(seq):
        raise ValueError("need len(seq) >= tail >= 2")
    d = as_metric(d)
    n = len(seq)
    G = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            G[i, j] = G[j, i] = gromov_product(d, seq[i], seq[j], base)
    if threshold is None:
        steps = [d(seq[i], seq[i + 1]) for i in range(n - 1)]
        threshold = 5.0 * float(np.median(steps))
    profile = []
    for N in range(n - tail + 1):
        block = G[N:, N:].copy()
        np.fill_diagonal(block, np.inf)
        profile.append(float(block.min()))
    rise = profile[-1] - profile[0]
    if threshold > 0 and rise > threshold:
        verdict = "diverging"
    elif rise <= 0.5 * threshold:
        verdict = "bounded"
    else:
        verdict = "inconclusive"
    return ConvergenceReport(verdict, tuple(profile), float(threshold))
