"""Command-line front end.

    krongap construct simple --alpha1 "0;1,(2)" --depth 30
    krongap analyze --alpha "0;1,(2)" --alpha "0;3,(2)" --nmax 200 --format csv
    krongap verify theorem1 --alpha1 "0;1,(2)" --nmax 2000 --metrics 1,2,inf
    krongap gaps-1d --alpha "0;2,(1)" --n 6 --base 0
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import _accel
from .cf import (
    CoefficientStream,
    StreamError,
    complement,
    format_rational,
    format_stream,
    parse_rational,
    parse_stream,
    rational_to_cf,
)
from .construction import (
    ConstructedTuple,
    ConstructionError,
    ConstructionSchedule,
    LedgerEntry,
    construct_3d,
    extended_construct,
    general_construct,
    simple_pair,
)
from .nn import TruncationError, circle_gaps, format_edges, generate, nn_graph, realize
from .torus import L2, parse_metrics
from . import verify as V


class UsageError(Exception):
    pass


def _stream_or_rational(text: str):
    if ";" in text:
        return parse_stream(text)
    x = parse_rational(text)
    if not 0 < x < 1:
        raise UsageError(f"rational {text!r} must lie in (0, 1)")
    return x


def _as_streams(texts):
    out = []
    for t in texts:
        x = _stream_or_rational(t)
        out.append(x if isinstance(x, CoefficientStream) else rational_to_cf(x))
    return out


def _read_json_arg(text: str):
    p = Path(text)
    if not text.lstrip().startswith(("{", "[")) and p.exists():
        text = p.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None


def tuple_to_json(t: ConstructedTuple) -> dict:
    out = t.to_dict()
    if all(s.is_terminating for s in t.streams):
        out["alpha"] = [format_rational(a) for a in t.alpha()]
    return out


def tuple_from_json(obj: dict) -> ConstructedTuple:
    try:
        streams = tuple(parse_stream(s) for s in obj["streams"])
        ledger = tuple(
            LedgerEntry(e["l"], e["q"], e["k"], e["q1"], e.get("index3"), e.get("b", 1)) for e in obj.get("ledger", [])
        )
    except KeyError as e:
        raise UsageError(f"tuple file lacks field {e}") from None
    sched = ConstructionSchedule.from_json(obj["schedule"]) if obj.get("schedule") else None
    solved = {int(i): a for i, a in obj.get("solved_coefficients", {}).items()}
    return ConstructedTuple(streams, ledger, solved, obj.get("kind", "general"), sched)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def cmd_construct(args) -> int:
    alpha1 = parse_stream(args.alpha1)
    if args.kind == "simple":
        t = simple_pair(alpha1, args.depth)
    else:
        if not args.schedule:
            raise UsageError(f"construct {args.kind} needs --schedule")
        sched = ConstructionSchedule.from_json(_read_json_arg(args.schedule))
        if args.kind == "general":
            t = general_construct(alpha1, sched)
        elif args.kind == "3d":
            t = construct_3d(alpha1, sched)
        else:
            t = extended_construct(alpha1, sched, strict=not args.lenient)
    _emit(_dump(tuple_to_json(t)), args.out)
    return 0


def _alpha_inputs(args):
    if args.tuple:
        return tuple_from_json(_read_json_arg(args.tuple))
    if not args.alpha:
        raise UsageError("give --alpha (repeatable) or --tuple")
    return [_stream_or_rational(a) for a in args.alpha]


def _depth(text):
    return None if text in (None, "auto") else int(text)


def cmd_analyze(args) -> int:
    metrics = parse_metrics(args.metrics)
    src = _alpha_inputs(args)
    if not isinstance(src, ConstructedTuple):
        src = [x if isinstance(x, CoefficientStream) else rational_to_cf(x) for x in src]
    rows, alpha, windows = V.sweep(src, args.nmax, metrics, depth=_depth(args.depth))
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N"] + [f"g_{m.name}" for m in metrics] + ["h1", "window"])
        for r in rows:
            w.writerow(r.csv_fields(metrics))
        text = buf.getvalue()
    else:
        text = _dump(
            {
                "alpha": [format_rational(a) for a in alpha],
                "metrics": [str(m) for m in metrics],
                "columns": ["N"] + [f"g_{m.name}" for m in metrics] + ["h1", "window"],
                "rows": [r.csv_fields(metrics) for r in rows],
                "windows": [{"q": w.q, "q_next": w.q_next, "g": w.g, "lo": w.lo, "hi": w.hi} for w in windows],
            }
        )
    _emit(text, args.out)
    if args.graph_n:
        ps = generate(alpha, args.graph_n, args.base)
        edges = format_edges(nn_graph(ps, metrics[0]))
        if args.graph_out:
            Path(args.graph_out).write_text(edges)
        else:
            sys.stdout.write(edges)
    return 0


def cmd_gaps1d(args) -> int:
    a = _stream_or_rational(args.alpha)
    if not isinstance(a, Fraction):
        a = realize([a], max(args.n, 2), depth=_depth(args.depth)).alpha[0]
    gaps = circle_gaps(a, args.n, args.base)
    distinct = sorted(set(gaps))
    if args.format == "json":
        _emit(
            _dump(
                {
                    "alpha": format_rational(a),
                    "N": args.n,
                    "base": args.base,
                    "distinct": len(distinct),
                    "gaps": {format_rational(g): gaps.count(g) for g in distinct},
                }
            ),
            args.out,
        )
    else:
        lines = [f"{len(distinct)} distinct gaps"]
        lines += [f"  {format_rational(g)} x{gaps.count(g)}" for g in distinct]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _run_check(job):
    name, kw = job
    if name == "three-gap":
        return [V.check_three_gap(_stream_or_rational(a), kw["nmax"], kw["base"]) for a in kw["alpha"]]
    if name == "lemma1":
        reps = []
        vec = realize(_as_streams(kw["alpha"]), kw["nmax"]).alpha
        for m in parse_metrics(kw["metrics"]):
            reps.append(V.check_lemma_part1(vec, kw["nmax"], m))
        return reps
    if name == "lemma2":
        if kw.get("tuple"):
            t = tuple_from_json(_read_json_arg(kw["tuple"]))
        else:
            t = simple_pair(parse_stream(kw["alpha1"]), kw.get("ledger_depth", 40))
        return [V.check_lemma_part2(t, parse_metrics(kw["metrics"]), kw["qcap"])]
    if name == "theorem1":
        return [
            V.check_theorem1(parse_stream(kw["alpha1"]), kw["nmax"], parse_metrics(kw["metrics"]), kw["convention"])
        ]
    if name == "asmallest":
        return [V.check_asmallest(parse_stream(a), kw["imax"]) for a in kw["alpha"]]
    if name == "bounds":
        log = []
        for spec in kw["alpha_sets"]:
            rows, alpha, _ = V.sweep(_as_streams(spec), kw["nmax"], (L2,))
            log += [(len(alpha), L2, r.N, r.g[L2.name]) for r in rows]
        return [V.check_upper_bounds(log)]
    raise UsageError(f"unknown check {name}")


def cmd_verify(args) -> int:
    metrics = args.metrics
    alpha1 = args.alpha1 or "0;1,(2)"
    alphas = args.alpha or [alpha1]
    jobs = []
    which = ["three-gap", "lemma1", "lemma2", "theorem1", "asmallest", "bounds"] if args.check == "all" else [args.check]
    for name in which:
        if name == "three-gap":
            a = args.alpha or ["0;2,(1)"]
            jobs.append((name, {"alpha": a, "nmax": args.nmax, "base": args.base}))
        elif name == "lemma1":
            a = args.alpha or [alpha1, format_stream(complement(parse_stream(alpha1)))]
            jobs.append((name, {"alpha": a, "nmax": min(args.nmax, 400) if args.check == "all" else args.nmax, "metrics": metrics}))
        elif name == "lemma2":
            jobs.append((name, {"alpha1": alpha1, "tuple": args.tuple, "metrics": metrics, "qcap": args.qcap}))
        elif name == "theorem1":
            jobs.append((name, {"alpha1": alpha1, "nmax": args.nmax, "metrics": metrics, "convention": args.convention}))
        elif name == "asmallest":
            jobs.append((name, {"alpha": alphas if args.check != "all" else [alpha1], "imax": args.imax}))
        elif name == "bounds":
            sets = [[a] for a in (args.alpha or [])] or [[alpha1, format_stream(complement(parse_stream(alpha1)))]]
            jobs.append((name, {"alpha_sets": sets, "nmax": args.nmax}))
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_run_check, jobs))
    else:
        results = [_run_check(j) for j in jobs]
    reports = [r for group in results for r in group]
    data = []
    meta = {"backend": _accel.BACKEND, "runtime_seconds": {}}
    for i, r in enumerate(reports):
        d = r.to_dict()
        meta["runtime_seconds"][f"{i}:{r.name}"] = round(d.pop("runtime"), 4)
        if isinstance(r, V.WindowReport):
            d["windows"] = [
                {"q": w.q, "q_next": w.q_next, "g": w.g, "lo": w.lo, "hi": w.hi, "observed": w.observed, "passed": w.passed}
                for w in r.windows
            ]
        data.append(d)
    ok = all(r.passed for r in reports)
    _emit(_dump({"passed": ok, "reports": data}), args.out)
    if args.meta:
        Path(args.meta).write_text(_dump(meta))
    for r in reports:
        print(r.line(), file=sys.stderr)
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="krongap", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a matched alpha-vector")
    c.add_argument("kind", choices=["simple", "general", "3d", "extended"])
    c.add_argument("--alpha1", required=True, help='stream such as "0;1,(2)"')
    c.add_argument("--schedule", help="schedule JSON (inline or file path)")
    c.add_argument("--depth", type=int, default=None, help="ledger depth for the simple pair")
    c.add_argument("--lenient", action="store_true", help="extended: do not enforce a/(2b) > 2")
    c.add_argument("--out")
    c.set_defaults(func=cmd_construct)

    a = sub.add_parser("analyze", help="sweep g_N and h_1 over N")
    a.add_argument("--alpha", action="append", help="coordinate stream or p/q (repeat per coordinate)")
    a.add_argument("--tuple", help="tuple JSON written by construct")
    a.add_argument("--nmax", type=int, required=True)
    a.add_argument("--metrics", default="1,2,inf")
    a.add_argument("--base", type=int, choices=[0, 1], default=1)
    a.add_argument("--depth", default="auto")
    a.add_argument("--format", choices=["json", "csv"], default="csv")
    a.add_argument("--out")
    a.add_argument("--graph-n", type=int, default=0, help="also export the NN graph of S_N")
    a.add_argument("--graph-out")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="run checks; exit 0 iff all pass")
    v.add_argument("check", choices=["three-gap", "lemma1", "lemma2", "theorem1", "asmallest", "bounds", "all"])
    v.add_argument("--alpha1")
    v.add_argument("--alpha", action="append")
    v.add_argument("--tuple")
    v.add_argument("--nmax", type=int, default=500)
    v.add_argument("--qcap", type=int, default=10**4)
    v.add_argument("--imax", type=int, default=8)
    v.add_argument("--metrics", default="1,2,inf")
    v.add_argument("--base", type=int, choices=[0, 1], default=1)
    v.add_argument("--convention", choices=["exact", "stated"], default="exact")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--out")
    v.add_argument("--meta", help="write runtimes/backend here (kept out of the data file)")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gaps-1d", help="distinct arc lengths of a circle rotation")
    g.add_argument("--alpha", required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--base", type=int, choices=[0, 1], default=1)
    g.add_argument("--depth", default="auto", help="truncation depth of the stream")
    g.add_argument("--format", choices=["text", "json"], default="text")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gaps1d)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, StreamError, ConstructionError, ValueError) as e:
        print(f"krongap: error: {e}", file=sys.stderr)
        return 2
    except TruncationError as e:
        print(f"krongap: unstable truncation: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
