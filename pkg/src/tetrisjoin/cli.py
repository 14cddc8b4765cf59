"""Command-line frontend: solve, join, gen, bench, verify."""

from __future__ import annotations

import argparse
import csv
import json
import math
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import instances, joins
from .boxindex import BoxOracle
from .dyadic import point_values, read_boxes
from .engine import MODES, ConfigurationError, Trace, solve, suggest_sao
from .verify import brute_force_bcp

BENCH_COLUMNS = ["family", "mode", "params", "num_boxes", "cert_size", "resolutions_gap",
                 "resolutions_output", "skeleton_calls", "boxes_loaded", "tuples", "wall_time"]


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _fail(msg: str, code: int = 2) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _parse_sao(text: str | None, attrs: list[str]) -> list[int] | None:
    if not text:
        return None
    names = [s.strip() for s in text.split(",") if s.strip()]
    unknown = [a for a in names if a not in attrs]
    if unknown:
        raise ConfigurationError(f"unknown attribute(s) in SAO: {', '.join(unknown)}")
    if sorted(names) != sorted(attrs):
        raise ConfigurationError(f"SAO must list every attribute exactly once: {', '.join(attrs)}")
    return [attrs.index(a) for a in names]


def _write_lines(path: str | None, lines) -> None:
    if path in (None, "-"):
        for ln in lines:
            print(ln)
        return
    with open(path, "w") as fh:
        for ln in lines:
            fh.write(ln + "\n")


def _write_stats(path: str | None, stats, **context) -> None:
    text = json.dumps(stats.to_dict(**context), indent=2, sort_keys=True)
    if path == "-":
        print(text, file=sys.stderr)
    elif path:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def cmd_solve(args) -> int:
    try:
        d, attrs, boxes = read_boxes(args.boxes)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    try:
        sao = _parse_sao(args.sao, attrs)
    except ConfigurationError as exc:
        return _fail(str(exc))
    if args.mode.endswith("-lb") and len(attrs) < 3:
        _warn(f"{args.mode} needs n >= 3; running the plain engine instead")
    trace = Trace() if args.trace else None
    tuples, stats = solve(BoxOracle(boxes, len(attrs), d, attrs), args.mode, sao, trace=trace)
    if trace is not None:
        trace.dump(args.trace)
    rows = sorted(point_values(t, d) for t in tuples)
    _write_lines(args.output, (" ".join(map(str, r)) for r in rows))
    _write_stats(args.stats, stats, mode=args.mode, n=len(attrs), d=d)
    return 0


def cmd_join(args) -> int:
    try:
        q = joins.load_query(args.query)
    except FileNotFoundError as exc:
        return _fail(f"missing input file: {exc.filename}")
    except (OSError, ValueError, KeyError) as exc:
        return _fail(f"bad query: {exc}")
    try:
        if args.sao:
            sao = [s.strip() for s in args.sao.split(",")]
        else:
            sao = suggest_sao(q.hypergraph(), args.sao_strategy)
        trace = Trace() if args.trace else None
        rows, stats = joins.evaluate(q, args.mode, sao, trace=trace)
    except joins.NotAcyclicError:
        return _fail("query is cyclic; reverse-gyo needs an alpha-acyclic query "
                     "(try --sao-strategy min-width)")
    except ConfigurationError as exc:
        return _fail(str(exc))
    if trace is not None:
        trace.dump(args.trace)
    decoded = [q.decode(r) for r in rows]
    if args.output in (None, "-"):
        writer = csv.writer(sys.stdout)
        writer.writerow(q.attributes)
        writer.writerows(decoded)
    else:
        with open(args.output, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(q.attributes)
            writer.writerows(decoded)
    _write_stats(args.stats, stats, mode=args.mode, sao=list(sao), d=q.d)
    return 0


def _parse_params(items: list[str]) -> dict:
    out = {}
    for item in items or []:
        key, _, value = item.partition("=")
        if not value:
            raise ValueError(f"parameter must look like key=value: {item!r}")
        try:
            out[key] = int(value)
        except ValueError:
            out[key] = value
    return out


def cmd_gen(args) -> int:
    try:
        inst = instances.generate(args.family, **_parse_params(args.param))
    except (ValueError, TypeError) as exc:
        return _fail(str(exc))
    manifest = args.manifest or args.output + ".json"
    inst.save(args.output, manifest)
    print(f"wrote {len(inst.boxes)} boxes to {args.output} (manifest {manifest})")
    return 0


def _bench_point(job):
    family, mode, params = job
    inst = instances.generate(family, **params)
    start = time.perf_counter()
    tuples, stats = solve(inst.oracle(), mode, inst.sao)
    wall = time.perf_counter() - start
    return {"family": family, "mode": mode, "params": json.dumps(params, sort_keys=True),
            "num_boxes": len(inst.boxes), "cert_size": inst.cert_size,
            "resolutions_gap": stats.resolutions_gap,
            "resolutions_output": stats.resolutions_output,
            "skeleton_calls": stats.skeleton_calls, "boxes_loaded": stats.boxes_loaded,
            "tuples": len(tuples), "wall_time": round(wall, 6)}


def fit_slope(xs, ys):
    """Least-squares slope of log y against log x, with the RMS residual.

    Returns None when fewer than two distinct x values are available.
    """
    pts = [(math.log(x), math.log(max(y, 1))) for x, y in zip(xs, ys) if x > 0]
    if len({p[0] for p in pts}) < 2:
        return None
    lx, ly = zip(*pts)
    fit = statistics.linear_regression(lx, ly)
    resid = math.sqrt(sum((y - fit.slope * x - fit.intercept) ** 2 for x, y in pts) / len(pts))
    return fit.slope, resid


def cmd_bench(args) -> int:
    try:
        base = _parse_params(args.param)
    except ValueError as exc:
        return _fail(str(exc))
    if args.x_axis != "num_boxes" and args.x_axis not in (args.sweep, *base):
        return _fail(f"--x-axis {args.x_axis!r} is neither num_boxes nor a parameter")
    sweep = [int(v) for v in args.values.split(",")] if args.values else [None]
    jobs = []
    for mode in args.modes.split(","):
        if mode not in MODES:
            return _fail(f"unknown mode {mode!r}")
        for v in sweep:
            params = dict(base)
            if v is not None:
                params[args.sweep] = v
            jobs.append((args.family, mode, params))
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_bench_point, jobs))
    else:
        rows = [_bench_point(j) for j in jobs]
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.output:
            out.close()
    for mode in dict.fromkeys(r["mode"] for r in rows):
        sel = [r for r in rows if r["mode"] == mode]
        if args.x_axis == "num_boxes":
            xs = [r["num_boxes"] for r in sel]
        else:
            xs = [json.loads(r["params"])[args.x_axis] for r in sel]
        fit = fit_slope(xs, [r[args.metric] for r in sel])
        if fit is None:
            print(f"slope {mode} {args.metric}: n/a", file=sys.stderr)
        else:
            print(f"slope {mode} {args.metric}: {fit[0]:.3f} (residual {fit[1]:.3f})",
                  file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    try:
        d, attrs, boxes = read_boxes(args.boxes)
        result = brute_force_bcp(boxes, len(attrs), d, override=args.override)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    got = sorted(point_values(t, d) for t in result.uncovered_points)
    if args.expected is None:
        _write_lines(None, (" ".join(map(str, r)) for r in got))
        return 0
    with open(args.expected) as fh:
        want = sorted(tuple(int(v) for v in ln.split()) for ln in fh if ln.strip())
    if got == want:
        print(f"ok: {len(got)} uncovered points match")
        return 0
    missing = sorted(set(got) - set(want))
    extra = sorted(set(want) - set(got))
    print(f"mismatch: {len(missing)} missing, {len(extra)} unexpected", file=sys.stderr)
    for r in missing[:5]:
        print(f"  missing {' '.join(map(str, r))}", file=sys.stderr)
    for r in extra[:5]:
        print(f"  unexpected {' '.join(map(str, r))}", file=sys.stderr)
    return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tetrisjoin", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="list the points no box covers")
    s.add_argument("boxes")
    s.add_argument("--mode", choices=MODES, default="preloaded")
    s.add_argument("--sao", help="comma-separated attribute names")
    s.add_argument("--trace", help="write a JSONL event log here")
    s.add_argument("--stats", help="write run counters as JSON here ('-' for stderr)")
    s.add_argument("-o", "--output", help="tuple output file (default stdout)")
    s.set_defaults(func=cmd_solve)

    j = sub.add_parser("join", help="evaluate a natural join query")
    j.add_argument("query", help="query JSON file")
    j.add_argument("--mode", choices=MODES, default="preloaded")
    j.add_argument("--sao-strategy", choices=["reverse-gyo", "min-width", "fixed"],
                   default="reverse-gyo")
    j.add_argument("--sao", help="explicit attribute order, overrides the strategy")
    j.add_argument("--trace")
    j.add_argument("--stats")
    j.add_argument("-o", "--output")
    j.set_defaults(func=cmd_join)

    g = sub.add_parser("gen", help="write a generated instance")
    g.add_argument("family", choices=sorted(instances.FAMILIES))
    g.add_argument("-p", "--param", action="append", help="key=value, repeatable")
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--manifest")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="sweep an instance family and fit log-log slopes")
    b.add_argument("family", choices=sorted(instances.FAMILIES))
    b.add_argument("--modes", default="preloaded")
    b.add_argument("--sweep", default="c", help="parameter to sweep")
    b.add_argument("--values", help="comma-separated values for the swept parameter")
    b.add_argument("-p", "--param", action="append", help="fixed key=value, repeatable")
    b.add_argument("--metric", default="resolutions_gap",
                   choices=["resolutions_gap", "skeleton_calls", "boxes_loaded"])
    b.add_argument("--x-axis", default="num_boxes",
                   help="num_boxes, or a parameter name to fit against")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="brute-force the uncovered points of a box file")
    v.add_argument("boxes")
    v.add_argument("--expected", help="file of expected points, one per line")
    v.add_argument("--override", action="store_true", help="lift the size guard")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
