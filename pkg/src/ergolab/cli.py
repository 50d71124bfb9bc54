"""Command line entry point ``ergolab``."""
from __future__ import annotations

import argparse
import os
import re
import sys
from dataclasses import replace
from pathlib import Path

from .exceptions import ErgolabError
from .harness import EXPERIMENTS, ExperimentSpec, ResultStore, RunInterrupted, run

DEFAULT_CACHE = Path(os.environ.get("ERGOLAB_CACHE", Path.home() / ".cache" / "ergolab"))

_POWER = re.compile(r"^\s*(\d+)\s*(?:\^|\*\*)\s*(\d+)\s*$")


def parse_number(text: str):
    """``"1024"``, ``"2^10"``, ``"2**10"``, ``"1e5"`` or ``"0.001"``."""
    m = _POWER.match(text)
    if m:
        return int(m.group(1)) ** int(m.group(2))
    try:
        return int(text)
    except ValueError:
        value = float(text)
    return int(value) if value.is_integer() and "e" in text.lower() else value


def parse_int(text: str) -> int:
    value = parse_number(text)
    if not isinstance(value, int):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return value


def int_list(text: str) -> list:
    """Comma-separated integers; ``a..b`` expands to an inclusive range."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(parse_int(lo), parse_int(hi) + 1))
        else:
            out.append(parse_int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def str_list(text: str) -> list:
    return [s.strip() for s in text.split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ergolab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment and write its table")
    r.add_argument("experiment", choices=EXPERIMENTS)
    r.add_argument("--config", type=Path, help="JSON file with ExperimentSpec fields")
    r.add_argument("--n", type=int_list, help="grid orders, e.g. 2^10,2^12 or 1e5")
    r.add_argument("--kmax", type=parse_int)
    r.add_argument("--k-values", type=int_list)
    r.add_argument("--scheme", type=str_list, help="scheme names, comma separated")
    r.add_argument("--seeds", type=int_list, help="e.g. 0..4 or 1,5,9")
    r.add_argument("--resolution", type=parse_int)
    r.add_argument("--mmax", type=parse_int)
    r.add_argument("--window", type=parse_int)
    r.add_argument("--ensemble-step", type=float)
    r.add_argument("--band", type=float)
    r.add_argument("--no-predictions", action="store_true")
    r.add_argument("--out", type=Path, default=Path("results"))
    r.add_argument("--cache", type=Path, default=DEFAULT_CACHE)
    r.add_argument("--resume", action="store_true",
                   help="reuse cells already in the cache (otherwise recompute them)")
    r.add_argument("--max-cells", type=parse_int, help="stop after computing this many cells")
    r.add_argument("--jobs", type=parse_int, default=1)
    r.add_argument("-q", "--quiet", action="store_true")

    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("criteria", nargs="*", type=int, help="criterion numbers (default: all)")

    c = sub.add_parser("clean-cache", help="delete the result store")
    c.add_argument("--cache", type=Path, default=DEFAULT_CACHE)
    return parser


def spec_from_args(args) -> ExperimentSpec:
    spec = ExperimentSpec.from_json(args.config) if args.config else ExperimentSpec(args.experiment)
    if spec.experiment != args.experiment:
        spec = replace(spec, experiment=args.experiment)
    overrides = {
        "n": args.n, "kmax": args.kmax, "k_values": args.k_values, "schemes": args.scheme,
        "seeds": args.seeds, "resolution": args.resolution, "mmax": args.mmax, "window": args.window,
        "ensemble_step": args.ensemble_step, "band": args.band,
    }
    spec = replace(spec, **{k: v for k, v in overrides.items() if v is not None})
    if args.no_predictions:
        spec = replace(spec, predictions=False)
    return spec


def _cmd_run(args) -> int:
    spec = spec_from_args(args)
    log = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    try:
        result = run(spec, ResultStore(args.cache), args.out, resume=args.resume,
                     max_cells=args.max_cells, jobs=args.jobs, log=log)
    except RunInterrupted as exc:
        print(f"interrupted: {exc}", file=sys.stderr)
        return 3
    print(f"{result.csv_path} ({len(result.rows)} rows; {result.computed} cells computed, "
          f"{result.reused} reused)")
    return 0


def _cmd_verify(args) -> int:
    from .acceptance import run_all

    results = run_all(args.criteria or None)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def _cmd_clean(args) -> int:
    ResultStore(args.cache).clear()
    print(f"cleared {args.cache}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return {"run": _cmd_run, "verify": _cmd_verify, "clean-cache": _cmd_clean}[args.command](args)
    except ErgolabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
