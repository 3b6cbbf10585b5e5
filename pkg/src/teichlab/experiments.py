"""Proposition-level experiments on the torus model.

Each experiment builds (or reuses) a hyperbolic net with horoball cones,
samples rays or segments, and returns an :class:`ExperimentReport` whose
``verdict`` is pass / fail / inconclusive and whose ``finding`` names the
observed behaviour.  Thresholds live in :class:`Thresholds`; raw profiles
are always embedded so the thresholds can be audited.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from .farey import default_bounds, farey_distance, slopes_up_to
from .foliation import ContinuedFraction, FoliationVec, Slope
from .gromov import convergence_at_infinity, fit_qi_constants
from .net import BoxWindow, NetConfig, build_net, tube_around
from .electric import PathTrace, quasigeodesic_fit
from .teich import (BASEPOINT, TeichPoint, ThinRegion, forward_endpoint, geodesic_segment,
                    ray_points, shortest_curves, teich_distance, teich_distance_array,
                    thin_membership)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
EXIT_CODES = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2}


@dataclass(frozen=True)
class Thresholds:
    # pinned by the committed oracle runs in tests/test_experiments.py
    ray_rise: float = 5.0            # d_el rise (in cone diameters) for "diverging"
    min_crossings: int = 5
    tail_oscillation: float = 1.0    # max - min of d_el over the last half for "bounded"
    plateau_slope: float = 0.01      # per-step slope of the product envelope, last quarter
    hausdorff_tol: float = 0.01
    endpoint_tol: float = 1e-6
    qi_stability: float = 1.5


@dataclass(frozen=True)
class LabConfig:
    epsilon: float = 0.1
    step: float = 0.15
    reach: float = 3.2
    tube_radius: float = 2.0
    spacing: float = 0.25            # Teichmüller spacing of ray samples
    seed: int = 0
    denom_bound: int | None = None
    thresholds: Thresholds = field(default_factory=Thresholds)

    def net_config(self) -> NetConfig:
        return NetConfig(self.step, self.reach, self.epsilon, self.denom_bound)


class RedirectError(ValueError):
    """The inputs belong to a different experiment."""


@dataclass
class ExperimentReport:
    experiment: str
    parameters: dict[str, Any]
    verdict: str
    finding: str
    metrics: dict[str, Any]
    profile_csv: str
    provenance: dict[str, Any]

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2, default=_jsonable)


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return str(v)


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _finite(v: float) -> float | None:
    return float(v) if math.isfinite(v) else None


def _provenance(cfg: LabConfig, window, extra: dict | None = None) -> dict:
    out = {
        "seed": cfg.seed,
        "grid_step": cfg.step,
        "edge_reach": cfg.reach,
        "epsilon": cfg.epsilon,
        "denom_bound": cfg.denom_bound,
        "window": repr(window) if not hasattr(window, "anchors") else
        f"tube(radius={window.radius}, anchors={len(window.anchors)})",
    }
    out.update(extra or {})
    return out


def _target_vec(cf: ContinuedFraction) -> FoliationVec:
    return FoliationVec.from_cf(cf)


def _ray_samples(cf: ContinuedFraction, T: float, spacing: float) -> tuple[np.ndarray, list[TeichPoint]]:
    n = int(math.floor(T / spacing + 1e-9))
    ts = np.array([k * spacing for k in range(n + 1)] + ([T] if T - n * spacing > 1e-9 else []))
    return ts, ray_points(BASEPOINT, _target_vec(cf), ts)


def _systole(points: Sequence[TeichPoint]) -> list[Slope]:
    p, q = shortest_curves(np.array([z.x for z in points]), np.array([z.y for z in points]))
    return [Slope(int(a), int(b)) for a, b in zip(p, q)]


def ray_profile(target: ContinuedFraction, T: float, cfg: LabConfig = LabConfig()) -> ExperimentReport:
    """Electric distance from the basepoint along the ray toward ``target``.

    A cone crossing is a sample where the ray's shortest curve changes,
    i.e. the ray passes from the neighbourhood of one Thin region to the next.
    """
    if T < 0:
        raise ValueError("T must be non-negative")
    th = cfg.thresholds
    if target.is_finite and cfg.denom_bound is not None:
        q = target.value().denominator
        if q > cfg.denom_bound:
            raise ValueError(f"target denominator {q} exceeds the cone bound "
                             f"{cfg.denom_bound}; widen denom_bound")
    ts, pts = _ray_samples(target, T, cfg.spacing)
    params = {"target": str(target), "T": T}
    if len(pts) == 1:
        return ExperimentReport("ray", params, PASS if target.is_finite else INCONCLUSIVE,
                                "bounded", {"samples": 1, "d_el_final": 0.0},
                                _csv(["t", "x", "y", "d_el"], [(0.0, pts[0].x, pts[0].y, 0.0)]),
                                _provenance(cfg, None))
    window = tube_around([pts], cfg.tube_radius)
    net = build_net(cfg.net_config(), window, pts)
    nodes = [net.extra_index(k) for k in range(len(pts))]
    prof = net.space.distances_from([nodes[0]])[0, nodes]
    if not np.all(np.isfinite(prof)):
        raise RuntimeError("ray samples disconnected in the net; increase tube_radius")
    syst = _systole(pts)
    crossings = [k for k in range(1, len(pts)) if syst[k] != syst[k - 1]]
    at_cross = prof[crossings]
    increasing = bool(len(at_cross) >= 2 and np.all(np.diff(at_cross) > 0))
    half = prof[len(prof) // 2:]
    oscillation = float(half.max() - half.min())
    rise = float(prof[-1] - prof[0])
    if rise > th.ray_rise and len(crossings) >= th.min_crossings and increasing:
        finding = "diverging"
    elif oscillation <= th.tail_oscillation:
        finding = "bounded"
    else:
        finding = "inconclusive"
    expected = "bounded" if target.is_finite else "diverging"
    metrics = {
        "d_el_final": float(prof[-1]),
        "rise": rise,
        "tail_oscillation": oscillation,
        "crossings": len(crossings),
        "increasing_at_crossings": increasing,
        "net_points": len(net),
    }
    if target.is_finite:
        v = target.value()
        region = ThinRegion(Slope(v.numerator, v.denominator), cfg.epsilon)
        # rational rays end inside one Thin region
        metrics["tail_in_thin_region"] = bool(thin_membership(region, pts[-1]))
        metrics["thin_region"] = str(region.curve)
    verdict = PASS if finding == expected else (INCONCLUSIVE if finding == "inconclusive" else FAIL)
    if target.is_finite and finding == "bounded" and not metrics["tail_in_thin_region"] and T > 0:
        verdict = FAIL
    rows = [(t, z.x, z.y, d, str(s)) for t, z, d, s in zip(ts, pts, prof, syst)]
    return ExperimentReport("ray", params, verdict, finding, metrics,
                            _csv(["t", "x", "y", "d_el", "systole"], rows),
                            _provenance(cfg, window, {"samples": len(pts)}))


def _require_irrational(*cfs: ContinuedFraction, redirect: str):
    for cf in cfs:
        if cf.is_finite:
            raise RedirectError(f"{cf} is rational; use {redirect} instead")


def separation_profile(F: ContinuedFraction, G: ContinuedFraction, n: int = 48,
                       cfg: LabConfig = LabConfig()) -> ExperimentReport:
    """Gromov products <x_k | y_k>_el of samples along the rays toward F and G.

    When F == G the second sequence uses 1.5 times the spacing (a control
    whose products must diverge).
    """
    _require_irrational(F, G, redirect="ray_profile")
    if n < 4:
        raise ValueError("need n >= 4 samples")
    th = cfg.thresholds
    same = F == G
    sx = cfg.spacing
    sy = cfg.spacing * (1.5 if same else 1.0)
    xs = ray_points(BASEPOINT, _target_vec(F), [k * sx for k in range(1, n + 1)])
    ys = ray_points(BASEPOINT, _target_vec(G), [k * sy for k in range(1, n + 1)])
    anchors_x = ray_points(BASEPOINT, _target_vec(F), np.arange(0, n * sx + 1e-9, 0.25))
    anchors_y = ray_points(BASEPOINT, _target_vec(G), np.arange(0, n * sy + 1e-9, 0.25))
    window = tube_around([anchors_x, anchors_y], cfg.tube_radius)
    net = build_net(cfg.net_config(), window, [BASEPOINT, *xs, *ys])
    o = net.extra_index(0)
    xi = [net.extra_index(1 + k) for k in range(n)]
    yi = [net.extra_index(1 + n + k) for k in range(n)]
    d0 = net.space.distances_from([o])[0]
    dxy = net.space.distances_from(xi)[np.arange(n), yi]
    prod = 0.5 * (d0[xi] + d0[yi] - dxy)
    env = np.maximum.accumulate(prod)
    q = (3 * n) // 4
    slope = float((env[-1] - env[q]) / (n - 1 - q))
    finding = "separated" if slope < th.plateau_slope else "joint"
    expected = "joint" if same else "separated"
    verdict = PASS if finding == expected else FAIL
    metrics = {"last_quarter_slope": slope, "plateau": float(env[-1]),
               "product_final": float(prod[-1]), "net_points": len(net)}
    rows = [(k + 1, float(d0[xi[k]]), float(d0[yi[k]]), float(dxy[k]), float(prod[k]), float(env[k]))
            for k in range(n)]
    return ExperimentReport("separate", {"F": str(F), "G": str(G), "n": n}, verdict, finding,
                            metrics, _csv(["k", "d_el_0x", "d_el_0y", "d_el_xy", "product", "envelope"], rows),
                            _provenance(cfg, window, {"spacing_x": sx, "spacing_y": sy}))


def _line_points(a: float, b: float, half_len: float, step: float) -> list[complex]:
    s = np.arange(-half_len, half_len + step / 2, step)
    if math.isinf(b) or math.isinf(a):
        foot = b if math.isinf(a) else a
        return list(foot + 1j * np.exp(s))
    c, r = 0.5 * (a + b), 0.5 * abs(b - a)
    return list(c + r * (np.tanh(s) + 1j / np.cosh(s)))


def _dist_to_line(z: np.ndarray, a: float, b: float) -> np.ndarray:
    """Teichmüller distance from points z to the complete geodesic with ideal ends a, b."""
    if math.isinf(b):
        w = z - a
    elif math.isinf(a):
        w = z - b
    else:
        w = (z - a) / (z - b)
    return 0.5 * np.arcsinh(np.abs(w.real) / np.abs(w.imag))


def segment_accumulation(F: ContinuedFraction, G: ContinuedFraction, n: int = 24,
                         cfg: LabConfig = LabConfig(), window_radius: float = 1.5,
                         sample_step: float = 0.005) -> ExperimentReport:
    """Do segments [x_k, y_k] with x_k -> F and y_k -> G converge on a compact set?

    The compact window is the Teichmüller ball of ``window_radius`` about
    the point of the limit geodesic nearest the basepoint; the profile is the Hausdorff distance between each
    segment and the limit geodesic (ideal ends b(F), b(G)) inside it.
    """
    _require_irrational(F, G, redirect="ray_profile")
    th = cfg.thresholds
    same = F == G
    sx = cfg.spacing
    sy = cfg.spacing * (1.5 if same else 1.0)
    bF, bG = _target_vec(F).ideal_point(), _target_vec(G).ideal_point()
    xs = ray_points(BASEPOINT, _target_vec(F), [k * sx for k in range(1, n + 1)])
    ys = ray_points(BASEPOINT, _target_vec(G), [k * sy for k in range(1, n + 1)])
    if same:
        cx, cy, line_k = 0.0, 1.0, np.empty(0, complex)
    else:
        line = np.array(_line_points(bF, bG, 12.0, 2 * sample_step))
        top = line[int(np.argmin(teich_distance_array(line.real, line.imag, 0.0, 1.0)))]
        cx, cy = float(top.real), float(top.imag)
        line_k = line[teich_distance_array(line.real, line.imag, cx, cy) <= window_radius]
    rows, prof = [], []
    end_err = math.nan
    for k, (x, y) in enumerate(zip(xs, ys), start=1):
        if x == y:
            h = math.inf
        else:
            length = teich_distance(x, y)
            m = int(min(40_000, max(2, math.ceil(length / sample_step) + 1)))
            seg = geodesic_segment(x, y, m)
            z = np.array([p.tau for p in seg])
            zk = z[teich_distance_array(z.real, z.imag, cx, cy) <= window_radius]
            if len(zk) == 0 or len(line_k) == 0:
                h = math.inf
            else:
                h1 = float(_dist_to_line(zk, bF, bG).max())
                D = teich_distance_array(line_k.real[:, None], line_k.imag[:, None],
                                         zk.real[None, :], zk.imag[None, :])
                h = max(h1, float(D.min(axis=1).max()))
            if not same:
                e1, e2 = forward_endpoint(y, x), forward_endpoint(x, y)
                end_err = max(_end_gap(e1, bF), _end_gap(e2, bG))
        prof.append(h)
        rows.append((k, x.x, x.y, y.x, y.y, h))
    last = prof[-1]
    if same:
        finding = "escaping" if not math.isfinite(last) or last > prof[0] else "converging"
        verdict = PASS if finding == "escaping" else FAIL
    else:
        converging = math.isfinite(last) and last <= th.hausdorff_tol and end_err <= th.endpoint_tol
        finding = "converging" if converging else "not converging"
        verdict = PASS if converging else (FAIL if n > 1 else INCONCLUSIVE)
    metrics = {"hausdorff_final": _finite(last), "endpoint_error": _finite(end_err),
               "limit_endpoints": [bF, bG], "window_center": [cx, cy], "segments": n}
    return ExperimentReport("segments", {"F": str(F), "G": str(G), "n": n}, verdict, finding,
                            metrics, _csv(["k", "x_re", "x_im", "y_re", "y_im", "hausdorff"], rows),
                            _provenance(cfg, None, {"window_radius": window_radius,
                                                    "sample_step": sample_step}))


def _end_gap(e: float, target: float) -> float:
    if math.isinf(target) or math.isinf(e):
        return 0.0 if e == target else math.inf
    return abs(e - target)


def qi_window(denom_bound: int, epsilon: float) -> BoxWindow:
    """Window holding the tops of every Thin region for slopes in [0, 1] with q <= bound."""
    return BoxWindow(-1.5, 0.5, epsilon / (2.0 * denom_bound**2), 3.0 / epsilon)


def random_geodesics(count: int, seed: int, window: BoxWindow, spacing: float = 0.1
                     ) -> list[list[TeichPoint]]:
    rng = np.random.default_rng(seed)
    out = []
    ylo, yhi = max(window.y_lo * 50, 0.02), min(window.y_hi / 3, 3.0)
    for _ in range(count):
        a, b = [TeichPoint(float(rng.uniform(window.x_lo + 0.25, window.x_hi - 0.25)),
                           float(math.exp(rng.uniform(math.log(ylo), math.log(yhi)))))
                for _ in range(2)]
        n = max(2, int(math.ceil(teich_distance(a, b) / spacing)) + 1)
        out.append(geodesic_segment(a, b, n))
    return out


def _top_inside(s: Slope, w: BoxWindow, epsilon: float) -> bool:
    foot, diam = ThinRegion(s, epsilon).horoball()
    if s.is_infinite:
        return w.y_hi >= 1.0 / epsilon
    return w.x_lo <= foot <= w.x_hi and w.y_lo <= diam <= w.y_hi


def qi_audit(denom_bound: int, cfg: LabConfig = LabConfig(), window: BoxWindow | None = None,
             n_geodesics: int = 10, c: float = 1.0,
             extra_geodesics: Sequence[Sequence[TeichPoint]] = ()) -> ExperimentReport:
    """Compare Farey distance with electric distance between Thin regions,
    and fit electric quasigeodesic constants for Teichmüller geodesics."""
    window = window or qi_window(denom_bound, cfg.epsilon)
    slopes = slopes_up_to(denom_bound, 0, 1)
    outside = [str(s) for s in slopes if not _top_inside(s, window, cfg.epsilon)]
    if outside:
        raise ValueError(f"window misses the Thin regions of {outside[:5]}; widen the window")
    geos = random_geodesics(n_geodesics, cfg.seed, window) + [list(g) for g in extra_geodesics]
    extras = [p for g in geos for p in g]
    net = build_net(cfg.net_config(), window, extras)
    missing = [str(s) for s in slopes if s not in net.cones]
    if missing:
        raise ValueError(f"window misses the Thin regions of {missing[:5]}; widen the window")
    nodes = [net.space.cone_node(s) for s in slopes]
    rows_all = net.space.distances_from(nodes)
    M = rows_all[:, nodes] - 1.0
    if not np.all(np.isfinite(M)):
        raise ValueError("electric sample is disconnected; widen the window")
    # part (a): relation alpha ~ Thin_alpha over all pairs
    a_list, b_list, pair_rows = [], [], []
    for i, j in itertools.combinations(range(len(slopes)), 2):
        fd = farey_distance(slopes[i], slopes[j])
        a_list.append(fd)
        b_list.append(max(M[i, j], 0.0))
        pair_rows.append((str(slopes[i]), str(slopes[j]), fd, float(M[i, j])))
    k_a, mu_a, w = fit_qi_constants(np.array(a_list, float), np.array(b_list, float))
    # thin sets of the relation are L-dense in the sampled window
    lattice = np.arange(net.n_lattice)
    L = float(np.max(np.min(rows_all[:, lattice], axis=0)) - 0.5)
    adjacent_max = max((b for a, b in zip(a_list, b_list) if a == 1), default=math.nan)
    # part (b): quasigeodesic constants at scale c
    fits = []
    offset = 0
    for g in geos:
        idx = tuple(net.extra_index(offset + k) for k in range(len(g)))
        offset += len(g)
        fit = quasigeodesic_fit(net.space, PathTrace(idx), c)
        fits.append((fit.k, fit.mu, teich_distance(g[0], g[-1])))
    k_b = max(f[0] for f in fits) if fits else math.nan
    mu_b = max(f[1] for f in fits) if fits else math.nan
    ok = math.isfinite(k_a) and math.isfinite(mu_a) and all(math.isfinite(f[1]) for f in fits)
    metrics = {
        "k": k_a, "mu": mu_a, "cobounded_L": L,
        "witness_k": None if w["k"] is None else list(pair_rows[w["k"]][:2]),
        "adjacent_thin_distance_max": adjacent_max,
        "adjacent_thin_distance_exact": math.log(1.0 / cfg.epsilon),
        "quasigeodesic_k": k_b, "quasigeodesic_mu": mu_b,
        "quasigeodesic_fits": [[f[0], f[1]] for f in fits],
        "composition_factor": k_a * k_b if fits else None,
        "pairs": len(a_list), "net_points": len(net),
    }
    return ExperimentReport("qi-audit", {"denom_bound": denom_bound, "c": c, "geodesics": len(geos)},
                            PASS if ok else FAIL, "finite constants" if ok else "unbounded",
                            metrics, _csv(["alpha", "beta", "farey", "thin_distance"], pair_rows),
                            _provenance(cfg, window))


def _cf_prefix(a: Slope, b: Slope) -> int:
    ca = ContinuedFraction.from_fraction(a.value())
    cb = ContinuedFraction.from_fraction(b.value())
    xa, xb = (ca.a0, *ca.terms), (cb.a0, *cb.terms)
    n = 0
    # the last quotient of a finite expansion is ambiguous (a = (a-1) + 1/1)
    for u, v in zip(xa[:-1], xb[:-1]):
        if u != v:
            break
        n += 1
    return n


def boundary_map_audit(seq: Sequence[Slope], base: Slope = Slope(1, 0), tail: int = 2,
                       threshold: float | None = None, denom_bound: int | None = None,
                       cfg: LabConfig = LabConfig()) -> ExperimentReport:
    """Does a slope sequence converge at infinity in the Farey graph, and if so
    do the slopes converge on the real line?"""
    seq = list(seq)
    if len(seq) < 3:
        raise ValueError("need at least three slopes")
    if denom_bound is not None:
        big = [str(s) for s in seq if s.q > denom_bound]
        if big:
            raise ValueError(f"slopes {big[:3]} exceed the ball bound {denom_bound}; widen the bound")
    B, H = default_bounds(base, *seq)
    pts = [base, *seq]
    n = len(pts)
    D = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        D[i, j] = D[j, i] = farey_distance(pts[i], pts[j], denom_bound=B, height=H)
    conv = convergence_at_infinity(list(range(1, n)), D, 0, tail, threshold)
    finite = [s for s in seq if s.q]
    vals = np.array([float(s) for s in finite])
    spread = math.nan
    prefix = 0
    if len(vals) >= 2:
        half = vals[len(vals) // 2:]
        spread = float(np.max(np.abs(half - half[-1])))
        prefix = _cf_prefix(finite[-2], finite[-1])
    if conv.verdict == "diverging":
        limit_ok = math.isfinite(spread) and spread < 1e-3 and prefix >= 5
        finding = "converges to an irrational" if limit_ok else "diverges without a real limit"
        verdict = PASS if limit_ok else FAIL
    elif conv.verdict == "bounded":
        finding, verdict = "bounded, no boundary point", PASS
    else:
        finding, verdict = "inconclusive", INCONCLUSIVE
    metrics = {"farey_verdict": conv.verdict, "threshold": conv.threshold,
               "limit_estimate": float(vals[-1]) if len(vals) else None,
               "tail_spread": _finite(spread), "common_cf_prefix": prefix,
               "distance_from_base": [int(v) for v in D[0, 1:]]}
    rows = [(N, L) for N, L in enumerate(conv.profile)]
    return ExperimentReport("boundary-map", {"sequence": [str(s) for s in seq], "base": str(base),
                                             "tail": tail}, verdict, finding, metrics,
                            _csv(["N", "min_product"], rows),
                            _provenance(cfg, None, {"universe": [B, H]}))
