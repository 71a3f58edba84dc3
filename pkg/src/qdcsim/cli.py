"""Command-line entry point: ``qdcsim {run,walk-check,tomography,attack}``.

Exit status is 0 on success, 1 for configuration errors and 2 for runtime
failures.
"""
from __future__ import annotations

import argparse
import sys

from .adversary import STRATEGIES
from .errors import ConfigError, QDCError
from .harness import FORMATS, ExperimentSpec, apply_overrides, emit_report, load_spec, run_experiment


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="base seed (replaces the seed list of a spec file)")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=FORMATS, default="table")
    p.add_argument("--workers", type=int, default=1, help="processes to fan seeds out over")
    p.add_argument("--timing", action="store_true", help="append wall-clock duration (breaks byte stability)")


def _axis(text: str) -> list[float]:
    try:
        parts = [float(x) for x in text.replace(" ", "").split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"axis must be three comma-separated numbers, got {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("axis needs exactly three components")
    return parts


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qdcsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run an experiment described by a JSON spec file")
    run.add_argument("spec_file")
    run.add_argument("--set", dest="overrides", action="append", default=[], metavar="FIELD.PATH=VALUE")
    run.add_argument("--transcript-dir", default=None, help="write one JSON-lines transcript per seed")
    _common(run)

    walk = sub.add_parser("walk-check", help="check step arc, right-angle turns and norms along a random walk")
    walk.add_argument("steps", type=int)
    walk.add_argument("--seeds", type=int, default=1, help="number of independent walks")
    _common(walk)

    tomo = sub.add_parser("tomography", help="estimate a Bloch vector from K samples per axis")
    tomo.add_argument("K", type=int)
    tomo.add_argument("axis", type=_axis, help="true axis, e.g. 0.5,0.5,0.7071067811865476")
    tomo.add_argument("--mode", choices=("bob", "eve"), default="bob")
    tomo.add_argument("--seeds", type=int, default=1, help="number of repetitions")
    _common(tomo)

    atk = sub.add_parser("attack", help="run sessions against an eavesdropping strategy")
    atk.add_argument("strategy", choices=sorted(STRATEGIES))
    atk.add_argument("seeds", type=int, help="number of seeds")
    atk.add_argument("--packages", type=int, default=200)
    atk.add_argument("--mismatch", type=float, default=None, help="fixed-axis strategies: arc from Alice's basis (rad)")
    atk.add_argument("--axis", type=_axis, default=None, help="fixed-axis strategies: explicit axis")
    atk.add_argument("--set", dest="overrides", action="append", default=[], metavar="FIELD.PATH=VALUE")
    _common(atk)
    return parser


def _seed_list(base: int | None, count: int) -> list[int]:
    if count < 1:
        raise ConfigError("seeds", "need at least one seed")
    start = 0 if base is None else base
    return list(range(start, start + count))


def _spec_from_args(args) -> tuple[ExperimentSpec, str | None]:
    if args.command == "run":
        spec = load_spec(args.spec_file, args.overrides)
        if args.seed is not None:
            spec.seeds = [args.seed]
        return spec, args.transcript_dir
    if args.command == "walk-check":
        data = {"name": "walk-check", "scenario": "walk_geometry", "seeds": _seed_list(args.seed, args.seeds),
                "walk": {"steps": args.steps}}
    elif args.command == "tomography":
        data = {"name": f"tomography-{args.mode}", "scenario": "tomography", "seeds": _seed_list(args.seed, args.seeds),
                "tomography": {"K": args.K, "axis": args.axis, "mode": args.mode}}
    else:
        strategy = {"kind": args.strategy}
        if args.strategy in ("fixed_axis", "intercept_resend"):
            if args.axis is not None:
                strategy["axis"] = args.axis
            else:
                strategy["mismatch"] = 0.5 if args.mismatch is None else args.mismatch
        kind = "clean_session" if args.strategy == "passive" else "attack_session"
        data = {"name": f"attack-{args.strategy}", "scenario": kind, "seeds": _seed_list(args.seed, args.seeds),
                "strategy": strategy if kind == "attack_session" else None, "message": {"packages": args.packages}}
        data = apply_overrides(data, args.overrides)
    return ExperimentSpec.from_dict(data), None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec, transcript_dir = _spec_from_args(args)
        report = run_experiment(spec, workers=args.workers, transcript_dir=transcript_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (QDCError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        text = emit_report(report, args.format, args.out, args.timing)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out is None:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
