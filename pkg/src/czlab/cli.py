"""Command line entry point.

    czlab <suite> [--seed N] [--trials N] [--tol X] [--shape n1,n2,...]
                  [--grid K] [--max-modulus M] [--out PATH] [--format json|csv]
    czlab list
    czlab distance "<epset>" "<epset>"

Exit status is 0 exactly when every trial of the suite passes.
``CZLAB_SEED`` in the environment overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from .calkin import distance, parse_epset
from .errors import CzlabError
from .suites import SUITES, RunConfig, run_suite

__all__ = ["main", "parse_epset", "build_parser"]


def _shape(text: str) -> tuple[int, ...]:
    try:
        shape = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad shape {text!r}; expected e.g. 2,3") from None
    if not shape or min(shape) < 1:
        raise argparse.ArgumentTypeError("shape entries must be positive")
    return shape


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="czlab", description="Zero-divisor and projection experiments.")
    p.add_argument("suite", help="suite name, 'list', or 'distance'")
    p.add_argument("sets", nargs="*", help="two EPSet strings for 'distance'")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--shape", type=_shape, default=None)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--max-modulus", type=int, default=8)
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def _records_csv(records: list[dict]) -> str:
    keys: list[str] = []
    for r in records:
        keys.extend(k for k in r if k not in keys)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    seed = args.seed
    if os.environ.get("CZLAB_SEED"):
        seed = int(os.environ["CZLAB_SEED"])
    try:
        if args.suite == "list":
            for name, (contract, _) in SUITES.items():
                print(f"{name:18s} {contract}")
            return 0
        if args.suite == "distance":
            if len(args.sets) != 2:
                print("czlab distance needs exactly two EPSet strings", file=sys.stderr)
                return 2
            result = distance(parse_epset(args.sets[0]), parse_epset(args.sets[1]))
            _emit(json.dumps(result.to_json(), indent=2) + "\n", args.out)
            return 0
        config = RunConfig(seed=seed, trials=args.trials, tol=args.tol, shape=args.shape, grid=args.grid,
                           max_modulus=args.max_modulus, out=args.out, format=args.format)
        report = run_suite(args.suite, config)
    except CzlabError as exc:
        print(f"czlab: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return 2
    if args.format == "csv":
        text = _records_csv(report.records)
    else:
        text = json.dumps(report.to_json(), indent=2) + "\n"
    _emit(text, args.out)
    status = "PASS" if report.passed else "FAIL"
    agg = report.aggregate
    print(f"{report.suite}: {status} ({agg['pass_count']}/{agg['trials']})", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
