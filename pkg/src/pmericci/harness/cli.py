"""Command-line entry point ``pmericci``.

Exit status: 0 all checks pass, 1 a mathematical check failed, 2 usage or
configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

from ..errors import PmeError, UsageError
from . import runner
from .config import load_config

SUBCOMMANDS = ("check-conditions", "solve", "verify-estimate", "lemma-residual",
               "cutoff-test", "convergence", "sweep")


def _common(suppress: bool) -> argparse.ArgumentParser:
    # subcommand copies use SUPPRESS so flags given before the subcommand survive
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=d(None), help="INI configuration file")
    common.add_argument("--out", metavar="DIR", default=d(None),
                        help=f"output directory (default: [output] dir, ${runner.OUT_ENV}, cwd)")
    common.add_argument("--set", metavar="K=V", action="append", default=d([]),
                        dest="overrides_sub" if suppress else "overrides",
                        help="override a config value, e.g. --set model.N=256 (repeatable)")
    common.add_argument("--jobs", type=int, default=d(1), metavar="N",
                        help="worker processes for sweeps")
    common.add_argument("--format", choices=("csv", "json"), default=d(None),
                        help="report format (default: [output] format)")
    common.add_argument("--quiet", action="store_true", default=d(False),
                        help="do not print the summary line")
    return common


def build_parser() -> argparse.ArgumentParser:
    common, sub_common = _common(False), _common(True)

    parser = argparse.ArgumentParser(prog="pmericci", parents=[common],
                                     description="Numerical checks of gradient estimates for "
                                                 "the porous medium equation under Ricci flow.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "check-conditions": "check the coefficient triple's admissibility system",
        "solve": "integrate the pressure equation and write the trace",
        "verify-estimate": "admissibility, solve and estimate verification",
        "lemma-residual": "as verify-estimate plus the discrete differential inequality",
        "cutoff-test": "empirical constants of the cutoff function",
        "convergence": "manufactured-solution refinement study",
        "sweep": "Cartesian parameter sweep of verify-estimate",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[sub_common], help=helps[name])
        if name == "sweep":
            p.add_argument("--axis", action="append", default=[], metavar="KEY=V1,V2",
                           help="sweep axis, e.g. --axis pme.m=1.5,2,3 (repeatable)")
            p.add_argument("--what", default="verify-estimate",
                           choices=sorted(runner.COMMANDS), help="command run per point")
    return parser


def _summary(bundle) -> str:
    verdicts = " ".join(f"{k}={'PASS' if v else 'FAIL'}" for k, v in sorted(bundle.verdicts.items()))
    return f"{bundle.command}: {'PASS' if bundle.passed else 'FAIL'} ({verdicts})"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        overrides = args.overrides + getattr(args, "overrides_sub", [])
        cfg = load_config(args.config, overrides)
        fmt = args.format or cfg["output"]["format"]
        out = runner.resolve_out_dir(args.out, cfg)
        prefix = cfg["output"]["prefix"]
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")

        if args.command == "sweep":
            axes = args.axis or cfg["sweep"]["axes"]
            result = runner.sweep(cfg, axes, jobs=args.jobs, command=args.what)
            out.mkdir(parents=True, exist_ok=True)
            paths = [result.write_summary(out / f"{prefix}_sweep.csv")]
            if fmt == "json":
                path = out / f"{prefix}_sweep.json"
                path.write_text(runner.dumps(result.to_dict()) + "\n")
                paths.append(path)
            if not args.quiet:
                counts = {}
                for r in result.rows:
                    counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
                print(f"sweep: {len(result.rows)} runs {dict(sorted(counts.items()))} -> {paths[0]}")
            return result.exit_code

        if args.command == "solve":
            bundle, trace = runner.solve_only(cfg)
            out.mkdir(parents=True, exist_ok=True)
            if fmt == "csv":
                path = out / f"{prefix}_trace.csv"
                trace.write_csv(path)
            else:
                runner.emit(bundle, out, fmt, prefix)
        else:
            bundle = runner.COMMANDS[args.command](cfg)
            runner.emit(bundle, out, fmt, prefix)
        if not args.quiet:
            print(_summary(bundle))
        return bundle.exit_code
    except PmeError as exc:
        stage = getattr(exc, "stage", None)
        where = f" [stage {stage}]" if stage else ""
        print(f"pmericci: error{where}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"pmericci: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
