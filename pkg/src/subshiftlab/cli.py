"""Command-line front end.

Exit status is 0 whenever a command completes, fail verdicts included; 2 for
bad arguments or configuration, 1 for runtime errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .besicovitch import besicovitch_db
from .factor import extract_periodic_structure, regularity_check
from .seqentropy import BudgetExhausted, independence_search, seq_entropy_estimate, seqentr_builder
from .specs import parse_point, parse_positions, parse_system
from .suite import ConfigError, ClassificationRow, builtin_suite, emit_report, load_config, run_suite
from .systems import language
from .verdict import ProbeVerdict, Verdict, _jsonable


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2)


def _suite_config(args):
    cfg = load_config(args.config) if args.config else builtin_suite(seed=args.seed if args.seed is not None else 0)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.horizon is not None:
        cfg.horizon = args.horizon
    if args.budget is not None:
        cfg.budget = args.budget
    if args.format is not None:
        cfg.format = args.format
    return cfg


def cmd_build(args) -> str:
    model = parse_system(args.system, args.horizon)
    n = args.length
    if args.text:
        return model.generators[args.generator].to_text(n)
    out = {
        "model": model.describe(),
        "generators": [g.name for g in model.generators],
        "prefix": model.generators[args.generator].to_text(n),
        "language_sizes": {str(k): len(language(model, k, args.horizon or 1 << 16)) for k in range(1, args.words + 1)},
    }
    return _dump(out)


def cmd_db(args) -> str:
    x, y = parse_point(args.x), parse_point(args.y)
    return _dump(besicovitch_db(x, y, args.horizon or 10**6).to_json())


def cmd_classify(args) -> str:
    cfg = _suite_config(args)
    return emit_report(run_suite(cfg), cfg.format)


def cmd_report(args) -> str:
    with open(args.input) as fh:
        data = json.load(fh)
    rows = []
    for item in data:
        verdicts = {}
        for key, v in item["verdicts"].items():
            verdicts[key] = ProbeVerdict(
                v["probe"], v["parameters"], Verdict(v["verdict"]), v.get("statistic"), v.get("witness"), v.get("notes", {})
            )
        rows.append(ClassificationRow(item["system"], item["model"], verdicts, item.get("errors", {})))
    return emit_report(rows, args.format or "csv")


def cmd_seqentropy(args) -> str:
    model = parse_system(args.system, args.horizon)
    horizon = args.horizon or 1 << 16
    if args.builder is not None:
        chosen, curve = seqentr_builder(model, args.builder, args.steps, horizon, args.max_time)
        return _dump({"times": chosen, "curve": curve.to_json()})
    est = seq_entropy_estimate(model, parse_positions(args.positions), horizon)
    return _dump({"positions": parse_positions(args.positions), **est.to_json()})


def cmd_independence(args) -> str:
    model = parse_system(args.system, args.horizon)
    horizon = args.horizon or 1 << 16
    try:
        cert = independence_search(model, args.u, args.v, args.max_k, horizon, args.budget or 100_000, args.position_bound)
    except BudgetExhausted as exc:
        return _dump({"outcome": "budget_exhausted", "nodes": exc.nodes, "best": exc.best})
    if cert is None:
        return _dump({"outcome": "none"})
    return _dump({"outcome": "certificate", "size": cert.size, "certificate": cert})


def cmd_regularity(args) -> str:
    try:
        x = parse_system(args.target, args.horizon).generators[0]
    except (KeyError, ValueError):
        x = parse_point(args.target)
    horizon = args.horizon or 1 << 20
    ps = extract_periodic_structure(x, args.max_period, horizon)
    v = regularity_check(ps, Fraction(args.tolerance))
    return _dump({**ps.to_json(), "verdict": v.verdict.value})


def _int_arg(text: str) -> int:
    base, sep, exp = text.partition("^")
    return int(base) ** int(exp) if sep else int(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="suite config (JSON or YAML)")
    common.add_argument("--horizon", type=_int_arg, help="integer, or a power such as 2^20")
    common.add_argument("--seed", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--format", choices=["json", "csv"])

    ap = argparse.ArgumentParser(prog="subshiftlab", description="Symbolic-dynamics classification lab")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="build a system and export a generator prefix")
    p.add_argument("system")
    p.add_argument("--length", type=int, default=64)
    p.add_argument("--generator", type=int, default=0)
    p.add_argument("--words", type=int, default=4, help="report language sizes up to this length")
    p.add_argument("--text", action="store_true", help="print the raw prefix only")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("db", parents=[common], help="Besicovitch distance between two points")
    p.add_argument("x")
    p.add_argument("y")
    p.set_defaults(func=cmd_db)

    p = sub.add_parser("classify", parents=[common], help="run a probe suite (built-in when no --config)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("report", parents=[common], help="re-render a saved JSON report")
    p.add_argument("input")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("seqentropy", parents=[common], help="sequence-entropy rate or greedy builder")
    p.add_argument("system")
    p.add_argument("--positions", default="0:12")
    p.add_argument("--builder", type=int, metavar="M", help="run the greedy builder with cylinder length M")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--max-time", type=int, default=64)
    p.set_defaults(func=cmd_seqentropy)

    p = sub.add_parser("independence", parents=[common], help="search for an independence certificate")
    p.add_argument("system")
    p.add_argument("--u", default="0")
    p.add_argument("--v", default="1")
    p.add_argument("--max-k", type=int, default=4)
    p.add_argument("--position-bound", type=int)
    p.set_defaults(func=cmd_independence)

    p = sub.add_parser("regularity", parents=[common], help="periodic structure and regularity verdict")
    p.add_argument("target", help="system name or point spec")
    p.add_argument("--max-period", type=int, default=64)
    p.add_argument("--tolerance", default="1/512")
    p.set_defaults(func=cmd_regularity)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
    except (ConfigError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(out if out.endswith("\n") else out + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
