"""Command line entry point.

Exit codes: 0 success, 1 configuration or I/O error, 2 numeric precondition
violated, 3 convergence failure or failed verification.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .errors import ConfigError, ConvergenceError, HolonomyError
from .report import OutputError, emit
from .runconfig import FORMATS, SweepSpec, parse_config, parse_range, validate_sweep
from .scenarios import PRESETS

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_CONVERGENCE = 0, 1, 2, 3


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror or e}") from None


def _load(args):
    cfg = parse_config(_read(args.config))
    out = cfg.output
    if args.format or args.output:
        out = dataclasses.replace(out, format=args.format or out.format, path=args.output or out.path)
        cfg = dataclasses.replace(cfg, output=out)
    if args.degrees:
        cfg = dataclasses.replace(cfg, degrees=True)
    return cfg


def _emit(cfg, rows) -> None:
    if cfg.degrees and cfg.output.format != "text":
        raise ConfigError("degrees are a display option for text output only", field="degrees")
    emit(rows, cfg.output.format, cfg.output.path, cfg.degrees)


def cmd_compute(args) -> int:
    from .runner import run
    cfg = _load(args)
    _emit(cfg, run(cfg))
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .runner import run
    cfg = _load(args)
    a, b, n = parse_range(args.range, "--range")
    sweep = SweepSpec(args.param, a, b, n)
    validate_sweep(cfg, sweep)
    cfg = cfg.with_sweep(sweep)
    _emit(cfg, run(cfg))
    return EXIT_OK


def _jsonable(v):
    if v is None or isinstance(v, (str, bool, int)):
        return v
    return float(v)


def cmd_presets(args) -> int:
    if args.format == "json":
        doc = [{"name": p.name, "method": p.default_method, "summary": p.summary,
                "parameters": {k: _jsonable(v) for k, v in p.defaults.items()}} for p in PRESETS.values()]
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
        return EXIT_OK
    for p in PRESETS.values():
        sys.stdout.write(f"{p.name}  (default method: {p.default_method})\n    {p.summary}\n")
        for k, v in p.defaults.items():
            shown = "auto" if v is None else (format(v, ".12g") if isinstance(v, float) else v)
            kind = "str" if isinstance(v, str) else ("int" if k == "steps" else "float")
            sys.stdout.write(f"    {k:<8} {kind:<6} default {shown}\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import format_table, run_suite, select
    if not args.tighten > 0:
        raise ConfigError("must be positive", field="--tighten")
    if not select(args.filter):
        raise ConfigError(f"no criterion matches {args.filter!r}", field="--filter")
    results = run_suite(args.filter, args.tighten)
    sys.stdout.write(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_CONVERGENCE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="holonomy", description="Geometric phases of mixed-state curves.")
    sub = p.add_subparsers(dest="command", required=True)

    def output_opts(sp):
        sp.add_argument("config", help="JSON run configuration, or - for standard input")
        sp.add_argument("--format", choices=FORMATS, help="override output.format")
        sp.add_argument("--output", help="override output.path (- for standard output)")
        sp.add_argument("--degrees", action="store_true", help="show phases in degrees (text output only)")

    c = sub.add_parser("compute", help="run every scenario of a config")
    output_opts(c)
    c.set_defaults(func=cmd_compute)

    s = sub.add_parser("sweep", help="run a config over a linear range of one preset parameter")
    output_opts(s)
    s.add_argument("--param", required=True, help="preset parameter to vary")
    s.add_argument("--range", required=True, metavar="A:B:N", help="N evenly spaced values from A to B")
    s.set_defaults(func=cmd_sweep)

    ps = sub.add_parser("presets", help="list presets and their parameters")
    ps.add_argument("--format", choices=("text", "json"), default="text")
    ps.set_defaults(func=cmd_presets)

    v = sub.add_parser("verify-paper", help="run the acceptance suite")
    v.add_argument("--filter", help="run only criteria whose name contains this text (or a criterion number)")
    v.add_argument("--tighten", type=float, default=1.0, metavar="FACTOR",
                   help="divide every comparison tolerance by FACTOR")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse reports usage errors with status 2
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, OutputError) as e:
        print(f"holonomy: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as e:
        print(f"holonomy: convergence failure: {e}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except HolonomyError as e:
        print(f"holonomy: precondition violated: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except KeyError as e:
        print(f"holonomy: configuration error: unknown name {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
        print(f"holonomy: numerical failure: {e}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
