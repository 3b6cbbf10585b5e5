"""Command-line entry point: ``teichlab farey|electric|gromov|lab ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import experiments as ex
from .electric import MetricSample
from .farey import FareyParams, ball, farey_distance, geodesic_path
from .foliation import ContinuedFraction, Slope
from .gromov import convergence_at_infinity, delta_four_point, quasi_isometry_fit
from .net import BoxWindow, build_net, tube_around
from .teich import TeichPoint, geodesic_segment, teich_distance


def parse_target(text: str) -> ContinuedFraction:
    text = text.strip()
    if text.startswith("["):
        return ContinuedFraction.parse(text)
    s = Slope.parse(text)
    if s.is_infinite:
        raise argparse.ArgumentTypeError("the target 1/0 has no finite expansion")
    return ContinuedFraction.from_fraction(Fraction(s.p, s.q))


def parse_point(text: str) -> TeichPoint:
    x, y = (float(v) for v in text.split(","))
    return TeichPoint(x, y)


def _read_matrix(path: str) -> tuple[list[str], np.ndarray]:
    """Square distance matrix CSV with a header row of labels."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    labels = rows[0]
    D = np.array([[float(v) for v in r[-len(labels):]] for r in rows[1:]])
    if D.shape != (len(labels), len(labels)):
        raise SystemExit(f"{path}: expected a {len(labels)}x{len(labels)} matrix")
    return labels, D


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _lab_config(args) -> ex.LabConfig:
    cfg = ex.LabConfig(epsilon=args.epsilon, seed=args.seed)
    if args.grid is not None:
        cfg = replace(cfg, step=args.grid)
    if args.window is not None and len(args.window) == 1:
        cfg = replace(cfg, tube_radius=args.window[0])
    return cfg


def cmd_farey(args) -> int:
    params = FareyParams(args.threshold)
    if args.action == "dist":
        a, b = Slope.parse(args.a), Slope.parse(args.b)
        d = farey_distance(a, b, params, args.denom_bound, args.height)
        path = geodesic_path(a, b, params, args.denom_bound, args.height)
        _emit(json.dumps({"a": str(a), "b": str(b), "distance": d,
                          "path": [str(v) for v in path]}, sort_keys=True), args.out)
    else:
        B = ball(Slope.parse(args.center), args.radius, params, args.denom_bound or 8, args.height)
        _emit(B.edges_csv(), args.out)
        if args.distances:
            Path(args.distances).write_text(B.distances_csv())
    return 0


def cmd_electric(args) -> int:
    cfg = _lab_config(args)
    if args.action == "profile":
        rep = ex.ray_profile(parse_target(args.ray), args.T, cfg)
        rows = list(csv.DictReader(io.StringIO(rep.profile_csv)))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "d_el"])
        for r in rows:
            w.writerow([r["t"], r["d_el"]])
        _emit(buf.getvalue(), args.out)
        return 0
    a, b = parse_point(args.a), parse_point(args.b)
    n = max(2, int(teich_distance(a, b) / 0.25) + 2)
    seg = geodesic_segment(a, b, n)
    net = build_net(cfg.net_config(), tube_around([seg], cfg.tube_radius), [a, b])
    d = net.d_el(net.extra_index(0), net.extra_index(1))
    _emit(json.dumps({"a": [a.x, a.y], "b": [b.x, b.y], "d_el": d,
                      "d_teich": teich_distance(a, b)}, sort_keys=True), args.out)
    return 0


def cmd_gromov(args) -> int:
    if args.action == "delta":
        labels, D = _read_matrix(args.matrix)
        rep = delta_four_point(MetricSample(labels, D), seed=args.seed)
        _emit(rep.to_json(), args.out)
    elif args.action == "qi-fit":
        l0, D0 = _read_matrix(args.source)
        l1, D1 = _read_matrix(args.target)
        i0, i1 = {v: k for k, v in enumerate(l0)}, {v: k for k, v in enumerate(l1)}
        with open(args.relation, newline="") as fh:
            rel = [(i0[r[0]], i1[r[1]]) for r in csv.reader(fh) if r and r[0] in i0]
        pairs = [(p, pp, q, qq) for k, (p, q) in enumerate(rel) for (pp, qq) in rel[k + 1:]]
        rep = quasi_isometry_fit(pairs, D0, D1, cover=(list(range(len(l1))), [q for _, q in rel]))
        _emit(rep.to_json(), args.out)
    else:
        labels, D = _read_matrix(args.matrix)
        idx = {v: k for k, v in enumerate(labels)}
        seq = [idx[v] for v in args.sequence.split(",")]
        rep = convergence_at_infinity(seq, D, idx[args.base], args.tail, args.threshold)
        _emit(rep.to_json(), args.out)
    return 0


def cmd_lab(args) -> int:
    cfg = _lab_config(args)
    if args.action == "ray":
        rep = ex.ray_profile(parse_target(args.target), args.T, cfg)
    elif args.action == "separate":
        rep = ex.separation_profile(parse_target(args.f), parse_target(args.g), args.n, cfg)
    elif args.action == "segments":
        rep = ex.segment_accumulation(parse_target(args.f), parse_target(args.g), args.n, cfg)
    elif args.action == "qi-audit":
        window = BoxWindow(*args.window) if args.window and len(args.window) == 4 else None
        rep = ex.qi_audit(args.denom, cfg, window, args.geodesics, args.c)
    else:
        seq = [Slope.parse(v) for v in args.sequence.split(",")]
        rep = ex.boundary_map_audit(seq, Slope.parse(args.base), args.tail)
    _emit(rep.to_json(), args.out)
    if args.out:
        print(f"{rep.experiment}: {rep.verdict} ({rep.finding})")
    return rep.exit_code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="teichlab")
    sub = p.add_subparsers(dest="group", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=0)

    geo = argparse.ArgumentParser(add_help=False)
    geo.add_argument("--epsilon", type=float, default=0.1, help="Thin-region threshold")
    geo.add_argument("--grid", type=float, default=None, help="net spacing (Teichmüller units)")
    geo.add_argument("--window", type=float, nargs="+", default=None,
                     help="tube radius, or x_lo x_hi y_lo y_hi for a box (qi-audit)")

    f = sub.add_parser("farey", help="Farey graph distances and balls")
    fs = f.add_subparsers(dest="action", required=True)
    for name in ("dist", "ball"):
        q = fs.add_parser(name, parents=[common])
        q.add_argument("--threshold", type=int, default=1, choices=(1, 2))
        q.add_argument("--denom-bound", type=int, default=None)
        q.add_argument("--height", type=int, default=None)
        if name == "dist":
            q.add_argument("a")
            q.add_argument("b")
        else:
            q.add_argument("center")
            q.add_argument("radius", type=int)
            q.add_argument("--distances", help="also write the (vertex, dist) CSV here")
    f.set_defaults(func=cmd_farey)

    e = sub.add_parser("electric", help="electric distances on a net")
    es = e.add_subparsers(dest="action", required=True)
    q = es.add_parser("dist", parents=[common, geo])
    q.add_argument("a", help="x,y")
    q.add_argument("b", help="x,y")
    q = es.add_parser("profile", parents=[common, geo])
    q.add_argument("--ray", required=True, help='target, e.g. "[1;(1)]" or 0/1')
    q.add_argument("--T", type=float, required=True)
    e.set_defaults(func=cmd_electric)

    g = sub.add_parser("gromov", help="hyperbolicity instruments on CSV matrices")
    gs = g.add_subparsers(dest="action", required=True)
    q = gs.add_parser("delta", parents=[common])
    q.add_argument("matrix")
    q = gs.add_parser("qi-fit", parents=[common])
    q.add_argument("source")
    q.add_argument("target")
    q.add_argument("relation", help="CSV of (source label, target label) rows")
    q = gs.add_parser("converge", parents=[common])
    q.add_argument("matrix")
    q.add_argument("--sequence", required=True, help="comma-separated labels")
    q.add_argument("--base", required=True)
    q.add_argument("--tail", type=int, default=2)
    q.add_argument("--threshold", type=float, default=None)
    g.set_defaults(func=cmd_gromov)

    lab = sub.add_parser("lab", help="experiments")
    ls = lab.add_subparsers(dest="action", required=True)
    q = ls.add_parser("ray", parents=[common, geo])
    q.add_argument("--target", required=True)
    q.add_argument("--T", type=float, required=True)
    for name in ("separate", "segments"):
        q = ls.add_parser(name, parents=[common, geo])
        q.add_argument("--f", required=True)
        q.add_argument("--g", required=True)
        q.add_argument("--n", type=int, default=48 if name == "separate" else 24)
    q = ls.add_parser("qi-audit", parents=[common, geo])
    q.add_argument("--denom", type=int, required=True)
    q.add_argument("--geodesics", type=int, default=10)
    q.add_argument("--c", type=float, default=1.0)
    q = ls.add_parser("boundary-map", parents=[common, geo])
    q.add_argument("--sequence", required=True, help="comma-separated slopes")
    q.add_argument("--base", default="1/0")
    q.add_argument("--tail", type=int, default=2)
    lab.set_defaults(func=cmd_lab)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
