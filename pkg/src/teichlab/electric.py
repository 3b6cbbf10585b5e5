"""Coned-off (electric) metrics on finite samples.

Each designated subset of a sample gets a new cone point joined to every
member by an edge of length 1/2, so the subset collapses to diameter at
most 1.  Electric distances are shortest paths in the augmented graph.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import dijkstra

CONE_EDGE = 0.5


@dataclass
class MetricSample:
    """Finite labelled point set with a distance matrix or a distance oracle.

    ``dist`` is either a symmetric (n, n) array or a callable taking two
    point indices.
    """

    labels: Sequence[Hashable]
    dist: np.ndarray | Callable[[int, int], float]

    def __len__(self) -> int:
        return len(self.labels)

    def d(self, i: int, j: int) -> float:
        if callable(self.dist):
            return 0.0 if i == j else float(self.dist(i, j))
        return float(self.dist[i, j])

    def matrix(self) -> np.ndarray:
        if not callable(self.dist):
            return np.asarray(self.dist, dtype=float)
        n = len(self)
        D = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                D[i, j] = D[j, i] = self.dist(i, j)
        return D

    def audit(self, triples: int = 1000, seed: int = 0, tol: float = 1e-9) -> float:
        """Worst triangle-inequality violation over random triples (<= tol is clean).

        Also raises if the diagonal or symmetry conditions fail.
        """
        n = len(self)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(triples if n else 0):
            i, j, k = rng.integers(0, n, 3)
            if abs(self.d(i, i)) > tol or abs(self.d(i, j) - self.d(j, i)) > tol:
                raise ValueError(f"not a metric at ({i}, {j})")
            worst = max(worst, self.d(i, k) - self.d(i, j) - self.d(j, k))
        return worst


@dataclass(frozen=True)
class PathTrace:
    """Ordered point indices of a sampled path with strictly increasing parameters."""

    nodes: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        nodes = tuple(int(v) for v in self.nodes)
        params = tuple(float(t) for t in self.params) or tuple(float(i) for i in range(len(nodes)))
        if len(params) != len(nodes):
            raise ValueError("one parameter value per node is required")
        if any(b <= a for a, b in zip(params, params[1:])):
            raise ValueError("path parameters must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "params", params)

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass
class ElectricSpace:
    """A metric sample with cone points attached to named subsets.

    Node ``i < n`` is sample point ``i``; cone ``k`` (in insertion order of
    ``cones``) is node ``n + k``.
    """

    base: MetricSample
    cones: dict[Hashable, frozenset[int]]
    graph: csr_matrix
    _rows: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def n_points(self) -> int:
        return len(self.base)

    def cone_node(self, name: Hashable) -> int:
        for k, key in enumerate(self.cones):
            if key == name:
                return self.n_points + k
        raise KeyError(name)

    def distances_from(self, sources: Sequence[int]) -> np.ndarray:
        """Electric distances from each source node to every node (rows)."""
        sources = [int(s) for s in sources]
        missing = sorted({s for s in sources if s not in self._rows})
        if missing:
            D = dijkstra(self.graph, directed=False, indices=missing)
            for s, row in zip(missing, np.atleast_2d(D)):
                self._rows[s] = row
        return np.array([self._rows[s] for s in sources])

    def d_el(self, i: int, j: int) -> float:
        return float(self.distances_from([i])[0, j])

    def pairwise(self, nodes: Sequence[int]) -> np.ndarray:
        nodes = list(nodes)
        return self.distances_from(nodes)[:, nodes]

    def set_distance(self, a: Hashable, b: Hashable) -> float:
        """Electric distance between the two collapsed subsets themselves."""
        if a == b:
            return 0.0
        return self.d_el(self.cone_node(a), self.cone_node(b)) - 2 * CONE_EDGE

    def edges_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node1", "node2", "weight"])
        g = self.graph.tocoo()
        names = [str(lab) for lab in self.base.labels] + [f"cone:{c}" for c in self.cones]
        # each unordered pair is stored once, in either orientation
        for i, j, wt in sorted((min(i, j), max(i, j), wt) for i, j, wt in
                               zip(g.row.tolist(), g.col.tolist(), g.data.tolist())):
            w.writerow([names[i], names[j], repr(wt)])
        return buf.getvalue()


def build_electric(base: MetricSample, cones: Mapping[Hashable, Iterable[int]] | None = None,
                   edges: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
                   cone_links: Mapping[Hashable, tuple[np.ndarray, np.ndarray]] | None = None,
                   ) -> ElectricSpace:
    """Attach a cone point to each subset in ``cones``.

    ``edges`` = (rows, cols, weights) replaces the complete graph on the
    sample with a pruned one; weights must be base distances.
    ``cone_links`` maps a cone name to (indices, weights) of non-member
    points joined to the cone by paths of the given length (>= 1/2).
    """
    n = len(base)
    cones = {name: frozenset(int(i) for i in members) for name, members in (cones or {}).items()}
    for name, members in cones.items():
        if not members:
            raise ValueError(f"cone set {name!r} is empty")
        if min(members) < 0 or max(members) >= n:
            raise ValueError(f"cone set {name!r} has indices outside the sample")
    if edges is None:
        D = base.matrix()
        iu, ju = np.triu_indices(n, 1)
        rows, cols, wts = iu, ju, D[iu, ju]
    else:
        rows, cols, wts = (np.asarray(a) for a in edges)
    cr, cc, cw = [], [], []
    for k, (name, members) in enumerate(cones.items()):
        m = sorted(members)
        cr.extend([n + k] * len(m))
        cc.extend(m)
        cw.extend([CONE_EDGE] * len(m))
        if cone_links and name in cone_links:
            idx, w = cone_links[name]
            if np.any(np.asarray(w) < CONE_EDGE):
                raise ValueError("cone links must be at least as long as a cone edge")
            cr.extend([n + k] * len(idx))
            cc.extend(np.asarray(idx).tolist())
            cw.extend(np.asarray(w, dtype=float).tolist())
    rows = np.concatenate([rows, np.array(cr, dtype=np.int64)])
    cols = np.concatenate([cols, np.array(cc, dtype=np.int64)])
    wts = np.concatenate([np.asarray(wts, dtype=float), np.array(cw, dtype=float)])
    # zero weights would read as missing edges in the sparse graph
    wts = np.where(wts > 0, wts, 1e-300)
    size = n + len(cones)
    # each unordered pair must appear once: coo -> csr sums duplicates
    graph = coo_matrix((wts, (rows, cols)), shape=(size, size)).tocsr()
    return ElectricSpace(base, cones, graph)


def _block_counts(D: np.ndarray, c: float, start: int) -> np.ndarray:
    """Greedy block counts for every prefix start..t of the sampled path.

    Consecutive blocks share their boundary sample, matching a subdivision
    of the parameter interval into closed subintervals.  A hop between
    consecutive samples longer than c costs ceil(hop / c) blocks.
    """
    m = D.shape[0]
    counts = np.zeros(m, dtype=np.int64)
    n_blocks = 0
    block_start = start
    is_open = False
    for t in range(start + 1, m):
        if is_open and D[block_start:t, t].max() <= c:
            pass
        elif D[t - 1, t] <= c:
            n_blocks += 1
            block_start = t - 1
            is_open = True
        else:
            n_blocks += math.ceil(D[t - 1, t] / c)
            is_open = False
        counts[t] = n_blocks
    return counts


def lc_length(sp: ElectricSpace, path: PathTrace, c: float) -> float:
    """Arclength of ``path`` on the scale ``c``: c times the fewest blocks of
    electric diameter <= c covering it."""
    if c <= 0:
        raise ValueError("scale c must be positive")
    if len(path) == 0:
        raise ValueError("empty path")
    if len(path) == 1:
        return float(c)
    D = sp.pairwise(path.nodes)
    return float(c) * max(1, int(_block_counts(D, c, 0)[-1]))


@dataclass(frozen=True)
class QuasigeodesicFit:
    k: float
    mu: float
    witness: tuple[int, int] | None
    upper_automatic: bool = True


def quasigeodesic_fit(sp: ElectricSpace, path: PathTrace, c: float) -> QuasigeodesicFit:
    """Lexicographically smallest (k, mu) with l_c(p[s,t]) / k - mu <= d_el(p(s), p(t)).

    Every sampled pair (s, t) is checked.  Since mu is free, the minimal k
    is 1 and mu absorbs the excess of scale-c arclength over electric
    distance.
    """
    if len(path) < 2:
        raise ValueError("need at least two path samples")
    D = sp.pairwise(path.nodes)
    m = len(path)
    best, witness = 0.0, None
    for s in range(m - 1):
        counts = _block_counts(D, c, s)
        excess = c * np.maximum(counts[s + 1:], 1) - D[s, s + 1:]
        t = int(np.argmax(excess))
        if excess[t] > best:
            best, witness = float(excess[t]), (s, s + 1 + t)
    return QuasigeodesicFit(1.0, best, witness)
