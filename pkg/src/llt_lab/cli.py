"""Command line front end.

Subcommands load a distribution spec, run one experiment family and write
deterministic CSV tables (optionally a small SVG error curve).  Outputs are
byte-identical across reruns with the same inputs and seeds; parallel width
is capped by the LLT_LAB_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import asllt as asl
from .approx import delta_n_report, stable_llt_error, write_reports_csv
from .characteristics import characteristics_record
from .errors import LltLabError
from .exact import sum_law
from .lattice import LatticePmf, bernoulli, centered_coin, lazy_walk, power_tail, uniform_range
from .rng import worker_count
from .suites import run_suite


def parse_dist(spec: str) -> LatticePmf:
    """Inline family (bernoulli:p, uniform:a..b, coin, lazy, power_tail:a[,c]) or JSON path."""
    if spec == "coin":
        return centered_coin()
    if spec == "lazy":
        return lazy_walk()
    if ":" in spec:
        name, _, arg = spec.partition(":")
        if name == "bernoulli":
            return bernoulli(float(arg))
        if name == "uniform":
            a, _, b = arg.partition("..")
            return uniform_range(int(a), int(b))
        if name == "power_tail":
            parts = arg.split(",")
            c = float(parts[1]) if len(parts) > 1 else 1.0
            return power_tail(float(parts[0]), c=c)
        raise LltLabError(f"unknown family {name!r}")
    path = Path(spec)
    if not path.exists():
        raise LltLabError(f"distribution spec not found: {spec}")
    return LatticePmf.from_json(path.read_text())


def parse_grid(text: str) -> list[int]:
    """Dyadic range "a..b" (doubling) or explicit comma list."""
    if ".." in text:
        a, _, b = text.partition("..")
        lo, hi = int(a), int(b)
        out = []
        n = lo
        while n <= hi:
            out.append(n)
            n *= 2
        return out
    return [int(x) for x in text.split(",")]


def parse_seeds(args) -> list[int]:
    if args.seeds:
        a, _, b = args.seeds.partition(":")
        return list(range(int(a), int(b)))
    return [args.seed]


def _write_csv(path: Path, header: list[str], rows: list[list], comment: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"# {comment}"])
        w.writerow(header)
        w.writerows(rows)


def _write_svg(path: Path, xs, ys, title: str) -> None:
    """Minimal deterministic polyline plot (log-free, scaled to the data box)."""
    W, H, pad = 640, 400, 40
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    sx = (W - 2 * pad) / (x1 - x0 if x1 > x0 else 1.0)
    sy = (H - 2 * pad) / (y1 - y0 if y1 > y0 else 1.0)
    pts = " ".join(f"{pad + (x - x0) * sx:.2f},{H - pad - (y - y0) * sy:.2f}"
                   for x, y in zip(xs, ys))
    body = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">'
        f'<rect width="{W}" height="{H}" fill="white"/>'
        f'<text x="{pad}" y="20" font-size="14">{title}</text>'
        f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>'
        "</svg>\n"
    )
    path.write_text(body)


def cmd_delta_n(args) -> int:
    p = parse_dist(args.dist)
    grid = parse_grid(args.n)
    reports = [delta_n_report(p, n) for n in grid]
    out = Path(args.out) / "delta_n.csv"
    write_reports_csv(out, reports,
                      comment="delta_n = sup_N |B_n P(S_n=N) - (D/sqrt(2pi)) exp(-(N-M_n)^2/(2 B_n^2))|")
    print(f"wrote {out}")
    if args.format == "svg":
        svg = Path(args.out) / "delta_n.svg"
        _write_svg(svg, grid, [r.error for r in reports], "scaled local error vs n")
        print(f"wrote {svg}")
    return 0


def cmd_asllt(args) -> int:
    seeds = parse_seeds(args)
    kind = args.kind
    rho = asl.dickman_rho() if kind == "dickman" else None

    def one(seed: int):
        if kind == "dickman":
            return asl.asllt_dickman_path(args.N, seed, rho, x=args.x)
        if kind == "t1":
            return asl.asllt_path(parse_dist(args.dist), args.kappa, args.N, seed)
        if kind == "ce":
            return asl.chung_erdos_path(parse_dist(args.dist), args.a, args.N, seed,
                                        masses=masses)
        if kind == "markov":
            chain = asl.TwoStateChain(args.p01, args.p10)
            return asl.markov_asllt_path(chain, args.kappa, args.N, seed)
        raise LltLabError(f"unknown estimator kind {kind!r}")

    masses = None
    if kind == "ce":
        masses = asl.hit_mass_sequence(parse_dist(args.dist), args.a, args.N)
    with ThreadPoolExecutor(max_workers=worker_count(len(seeds))) as pool:
        estimates = list(pool.map(one, seeds))
    out = Path(args.out) / f"asllt_{kind}.csv"
    asl.write_paths_csv(out, estimates)
    print(f"wrote {out}")
    if args.format == "svg":
        svg = Path(args.out) / f"asllt_{kind}.svg"
        est = estimates[0]
        _write_svg(svg, [math.log10(n) for n, _ in est.checkpoints],
                   [v for _, v in est.checkpoints],
                   f"log-average trace vs log10 N (target {est.target:.4f})")
        print(f"wrote {svg}")
    return 0


def cmd_dickman_rho(args) -> int:
    rho = asl.dickman_rho(u_max=args.u_max, step=args.step)
    out = Path(args.out) / "dickman_rho.csv"
    rows = [[repr(i * rho.step), repr(float(v))] for i, v in enumerate(rho.values)]
    _write_csv(out, ["u", "rho"], rows, "solution of u r'(u) + r(u-1) = 0, r=1 on [0,1]")
    print(f"wrote {out}")
    return 0


def cmd_stable_error(args) -> int:
    p = power_tail(args.alpha, c=args.c)
    grid = parse_grid(args.n)
    reports = [stable_llt_error(p, n, x_max=args.x_max) for n in grid]
    out = Path(args.out) / "stable_error.csv"
    write_reports_csv(out, reports, comment="sup_m |B_n P(S_n=m) - g(m/B_n)|")
    print(f"wrote {out}")
    return 0


def cmd_characteristics(args) -> int:
    p = parse_dist(args.dist).relabel()
    rec = characteristics_record(p)
    out = Path(args.out) / "characteristics.csv"
    rec.to_csv(out)
    print(f"wrote {out}")
    return 0


def cmd_sum_law(args) -> int:
    p = parse_dist(args.dist)
    law = sum_law(p, args.N)
    out = Path(args.out) / f"sum_law_{args.N}.csv"
    law.to_csv(out)
    print(f"wrote {out}")
    return 0


def cmd_verify(args) -> int:
    checks = run_suite(args.suite)
    failed = 0
    for name, ok, detail in checks:
        status = "PASS" if ok else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        print(f"[{status}] {name}{suffix}")
        if not ok:
            failed += 1
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="llt-lab",
                                 description="exact lattice-sum distributions and "
                                             "local limit diagnostics")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=["csv", "svg"], default="csv")

    d = sub.add_parser("delta-n", help="scaled sup-error of the Gaussian local term")
    d.add_argument("--dist", required=True)
    d.add_argument("--n", required=True, help="dyadic range a..b or comma list")
    common(d)
    d.set_defaults(fn=cmd_delta_n)

    a = sub.add_parser("asllt", help="almost-sure local estimator paths")
    a.add_argument("--kind", choices=["t1", "ce", "markov", "dickman"], required=True)
    a.add_argument("--dist", default="bernoulli:0.5")
    a.add_argument("--x", type=float, default=1.0, help="dickman target slope")
    a.add_argument("--kappa", type=float, default=0.0, help="normalised offset")
    a.add_argument("--a", type=int, default=0, help="fixed level for the ce kind")
    a.add_argument("--p01", type=float, default=0.5)
    a.add_argument("--p10", type=float, default=0.5)
    a.add_argument("--N", type=int, required=True)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--seeds", help="half-open range lo:hi of master seeds")
    common(a)
    a.set_defaults(fn=cmd_asllt)

    r = sub.add_parser("dickman-rho", help="tabulate the delay-equation solution")
    r.add_argument("--u-max", type=float, default=20.0)
    r.add_argument("--step", type=float, default=1.0 / 1024.0)
    common(r)
    r.set_defaults(fn=cmd_dickman_rho)

    s = sub.add_parser("stable-error", help="local error against the stable density")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--n", required=True)
    s.add_argument("--x-max", type=float, default=60.0)
    common(s)
    s.set_defaults(fn=cmd_stable_error)

    c = sub.add_parser("characteristics", help="structural characteristics table")
    c.add_argument("--dist", required=True)
    common(c)
    c.set_defaults(fn=cmd_characteristics)

    t = sub.add_parser("sum-law", help="exact pmf table of S_N")
    t.add_argument("--dist", required=True)
    t.add_argument("--N", type=int, required=True)
    common(t)
    t.set_defaults(fn=cmd_sum_law)

    v = sub.add_parser("verify", help="run invariant suites")
    v.add_argument("--suite", default="all")
    v.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (LltLabError, ValueError, KeyError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
