"""Command-line front end.

Exit codes: 0 success, 1 runtime failure (including a failed validation),
2 input error (bad flags, unreadable or malformed files).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import experiments as ex
from .dist import (DistributionError, ProductDist, product_from_json, product_to_json,
                   read_samples_csv, write_samples_csv)
from .evaluation import opt, rev_exact, rev_mc
from .hardgen import GENERATORS, ParameterError, revenue_curve_csvs, validate
from .info import measured_bound, sample_lb, skl
from .learn import SampleError, dominated_empirical_myerson
from .mech import MechanismError, deserialize, parse_feasibility, serialize
from .xform import t_max_quantile, t_max_value, t_min

EXIT_OK, EXIT_RUNTIME, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _read_text(path: str) -> str:
    try:
        return sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _read_json(path: str):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at offset {exc.pos}: {exc.msg}") from exc


def _read_dist(path: str):
    return product_from_json(_read_json(path))


def _emit(args, text: str) -> None:
    if args.out and args.out != "-":
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _report(args, obj: dict) -> None:
    """Write a flat record as JSON or as two-column CSV."""
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in obj.items():
            w.writerow([k, repr(v) if isinstance(v, float) else v])
        _emit(args, buf.getvalue())
    else:
        _emit(args, json.dumps(obj, indent=1) + "\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from exc


def _finite(x: float):
    return x if math.isfinite(x) else str(x)


# ---------------------------------------------------------------------------
# subcommands


def cmd_sample(args) -> int:
    d = _read_dist(args.dist)
    if args.count < 0:
        raise InputError("--count must be nonnegative")
    s = d.sample(args.seed, args.count, args.trial)
    _emit(args, write_samples_csv(s) if args.count else "")
    return EXIT_OK


def cmd_learn(args) -> int:
    s = read_samples_csv(_read_text(args.samples))
    m = dominated_empirical_myerson(s, args.delta, parse_feasibility(args.feasibility))
    _emit(args, serialize(m).decode() + "\n")
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        m = deserialize(_read_text(args.mechanism))
    except MechanismError as exc:
        raise InputError(f"{args.mechanism}: {exc}") from exc
    d = _read_dist(args.dist)
    if args.mc:
        res = rev_mc(m, d, args.mc, args.seed, args.cap)
        _report(args, res.to_json())
    else:
        _report(args, {"method": "exact", "value": rev_exact(m, d), "halfwidth": 0.0})
    return EXIT_OK


def cmd_opt(args) -> int:
    d = _read_dist(args.dist)
    _report(args, {"opt": opt(d, parse_feasibility(args.feasibility))})
    return EXIT_OK


def cmd_skl(args) -> int:
    p, q = _read_dist(args.p), _read_dist(args.q)
    if p.n != 1 or q.n != 1:
        raise InputError("skl compares single distributions")
    value, err = skl(p[0], q[0])
    out = {"skl": _finite(value), "error": err, "sample_lb": _finite(sample_lb(value, args.c0))}
    if args.cuts:
        out["dptrick_bound"] = measured_bound(p[0], q[0], _floats(args.cuts))
    _report(args, out)
    return EXIT_OK


def cmd_hard_instance(args) -> int:
    fam = args.family
    kw = {"bounded_1H": lambda: (args.n, args.H, args.eps),
          "bounded_01": lambda: (args.n, args.eps),
          "regular": lambda: (args.n, args.eps),
          "kunit": lambda: (args.n, args.k, args.eps)}
    if fam in ("mhr_discrete", "mhr_continuous"):
        h = GENERATORS[fam](args.n, eps=args.eps if args.eps0 is None else None, eps0=args.eps0)
    else:
        if args.eps is None or (fam == "bounded_1H" and args.H is None):
            raise InputError(f"{fam} needs --eps" + (" and --H" if fam == "bounded_1H" else ""))
        h = GENERATORS[fam](*kw[fam]())
    report = validate(h)
    doc = {"instance": h.to_json(), "validation": report.to_json()}
    if args.out and args.out != "-":
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "instance.json").write_text(json.dumps(doc, indent=1) + "\n")
        for name, text in revenue_curve_csvs(h).items():
            (out / f"{name}_curve.csv").write_text(text)
    else:
        sys.stdout.write(json.dumps(doc, indent=1) + "\n")
    return EXIT_OK if report.passed else EXIT_RUNTIME


def cmd_xform(args) -> int:
    d = _read_dist(args.dist)
    ops = [x for x in (args.tmin, args.tmax_value, args.tmax_quantile) if x is not None]
    if len(ops) != 1:
        raise InputError("pass exactly one of --tmin, --tmax-value, --tmax-quantile")
    if not d.is_discrete:
        raise InputError("truncations act on discrete distributions")
    if args.tmin is not None:
        coords = [t_min(c, args.tmin) for c in d]
    elif args.tmax_value is not None:
        coords = [t_max_value(c, args.tmax_value) for c in d]
    else:
        coords = [t_max_quantile(c, args.tmax_quantile) for c in d]
    out = product_to_json(ProductDist(coords))
    _emit(args, json.dumps(out, indent=1) + "\n")
    return EXIT_OK


def _grid(text: str) -> list[int]:
    vals = _floats(text)
    if not vals or any(v < 1 or v != int(v) for v in vals):
        raise InputError("--m-grid needs positive integers")
    return [int(v) for v in vals]


def _write_experiment(args, rows, columns, plot) -> None:
    if args.format == "json":
        _emit(args, json.dumps(rows, indent=1) + "\n")
        return
    _emit(args, ex.to_csv(rows, columns))
    if args.out and args.out != "-":
        Path(args.out + ".gp").write_text(plot(Path(args.out).name))


def cmd_convergence(args) -> int:
    rows = ex.convergence(_grid(args.m_grid), args.trials, args.seed, args.delta, args.H,
                          args.guard_exponent)
    _write_experiment(args, rows, ex.CONVERGENCE_COLUMNS, ex.convergence_gnuplot)
    if args.summary:
        for (m, algo), r in sorted(ex.mean_ratios(rows).items()):
            print(f"m={m} {algo}: mean ratio {r:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_trend(args) -> int:
    rows = ex.trend(_grid(args.m_grid), args.trials, args.seed, args.delta)
    _write_experiment(args, rows, ex.TREND_COLUMNS, ex.trend_gnuplot)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _global_flags(p: argparse.ArgumentParser, defaults: bool) -> None:
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=d(0), help="master seed (u64)")
    p.add_argument("--delta", type=float, default=d(0.05), help="failure probability for shading")
    p.add_argument("--out", default=d(None), help="output path (directory for hard-instance)")
    p.add_argument("--format", choices=("csv", "json"), default=d(None))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="demyerson", description=__doc__.splitlines()[0])
    _global_flags(parser, True)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("sample", cmd_sample, "draw a sample matrix from a distribution file")
    p.add_argument("--dist", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--trial", type=int, default=0)

    p = add("learn", cmd_learn, "dominated empirical Myerson from a sample CSV")
    p.add_argument("--samples", required=True)
    p.add_argument("--feasibility", default="single")

    p = add("eval", cmd_eval, "expected revenue of a mechanism")
    p.add_argument("--mechanism", required=True)
    p.add_argument("--dist", required=True)
    p.add_argument("--mc", type=int, default=0, help="Monte Carlo draws (0 = exact)")
    p.add_argument("--cap", type=float, default=None, help="payment cap for the interval")

    p = add("opt", cmd_opt, "optimal revenue of a discrete product")
    p.add_argument("--dist", required=True)
    p.add_argument("--feasibility", default="single")

    p = add("skl", cmd_skl, "symmetric KL divergence of two distributions")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--cuts", default=None, help="partition endpoints for the bound, e.g. 0,2.5,inf")
    p.add_argument("--c0", type=float, default=1.0)

    p = add("hard-instance", cmd_hard_instance, "generate and validate a lower-bound instance")
    p.add_argument("--family", required=True, choices=sorted(GENERATORS))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--eps0", type=float, default=None)
    p.add_argument("--H", type=float, default=None)
    p.add_argument("--k", type=int, default=1)

    p = add("xform", cmd_xform, "truncate a discrete distribution")
    p.add_argument("--dist", required=True)
    p.add_argument("--tmin", type=float, default=None)
    p.add_argument("--tmax-value", type=float, default=None)
    p.add_argument("--tmax-quantile", type=float, default=None)

    p = add("convergence", cmd_convergence, "pricing rules on the heavy-tail law")
    p.add_argument("--m-grid", default="100,1000,10000")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--H", type=float, default=100.0)
    p.add_argument("--guard-exponent", type=float, default=1.0 / 3.0)
    p.add_argument("--summary", action="store_true", help="print mean ratios to stderr")

    p = add("trend", cmd_trend, "additive gap of the dominated learner as m grows")
    p.add_argument("--m-grid", default="256,1024,4096,16384")
    p.add_argument("--trials", type=int, default=40)
    return parser


INPUT_ERRORS = (InputError, DistributionError, SampleError, MechanismError, ParameterError,
                json.JSONDecodeError)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if not 0 < args.delta < 1:
            raise InputError("--delta must lie in (0, 1)")
        if args.seed < 0 or args.seed >= 2**64:
            raise InputError("--seed must be a u64")
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - any other failure is a runtime error
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

