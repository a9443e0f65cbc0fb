"""Command-line entry point: ``linfdc check | run <experiment> | export-dot <tree>``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import SpecError, load_spec
from .decomp import export_dot, load_tree
from .experiments import EXIT_FAIL, EXPERIMENTS, WORKERS_ENV, RunOptions, dump_report, run_experiment


def _scales(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None
    if not vals or any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("scales must be nonnegative integers")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="linfdc",
        description="Exact checks of length metrics, quotient families and decomposition witnesses.",
        epilog=f"Set {WORKERS_ENV}=N to fan experiments out to N worker processes.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="parse and validate a group spec")
    check.add_argument("--spec", required=True, type=Path)

    run = sub.add_parser("run", help="run one experiment and print a JSON report")
    run.add_argument("experiment", choices=sorted(EXPERIMENTS))
    run.add_argument("--spec", required=True, type=Path)
    run.add_argument("--radius", type=int, help="word radius of the window")
    run.add_argument("--scales", type=_scales, help="scale ladder, e.g. 1,2,4")
    run.add_argument("--cap", type=int, help="maximum points per window")
    run.add_argument("--out", type=Path, help="directory for the report and certificate files")
    run.add_argument("--seed", type=int, default=0, help="seed for randomized sample suites")

    dot = sub.add_parser("export-dot", help="render a decomposition tree file as DOT")
    dot.add_argument("tree", type=Path)
    dot.add_argument("--out", type=Path, help="write here instead of stdout")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "export-dot":
        try:
            tree = load_tree(args.tree.read_text())
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAIL
        text = export_dot(tree, args.tree.stem)
        if args.out:
            args.out.write_text(text)
        else:
            sys.stdout.write(text)
        return 0

    try:
        spec = load_spec(args.spec)
    except (OSError, SpecError) as exc:
        print(f"error: {args.spec}: {exc}", file=sys.stderr)
        return EXIT_FAIL

    if args.command == "check":
        print(f"p = {spec.p}, n = {spec.n}")
        print(f"generators: {', '.join(name for name, _ in spec.generators)}")
        print(f"norms: {', '.join(s.label() for s in spec.norms)}")
        for name, F in spec.subgroups:
            print(f"subgroup {name}: order {len(F)}, closed")
        for s in spec.series:
            print(f"series {s.name}: {len(s.factors)} factors")
        print(f"window: radius {spec.radius}, cap {spec.cap}; scales {spec.scales}")
        print(f"spec hash {spec.digest()}")
        return 0

    if args.cap is not None and args.cap <= 0:
        print("error: --cap must be positive", file=sys.stderr)
        return EXIT_FAIL
    opts = RunOptions(radius=args.radius, scales=args.scales, cap=args.cap, seed=args.seed, out=args.out)
    report, code = run_experiment(spec, args.experiment, opts)
    text = dump_report(report)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"report-{args.experiment}.json").write_text(text)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
