"""Command line entry point: ``fallfourier {ingest,synth,run,grid,report}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import ingest, synth
from .errors import ConfigError, FallFourierError
from .evaluate import ExperimentReport, emit_table, read_ledger
from .experiment import GRID_AXES, ingest_datasets, load_config, run_experiment, run_grid

log = logging.getLogger("fallfourier")


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat key = value experiment file")
    p.add_argument("--collection", choices=["1", "2", "3", "all"])
    p.add_argument("--feature", choices=["raw", "energy", "fourier"])
    p.add_argument("--classifier", choices=["knn2", "knn1", "svm2", "svm1"])
    p.add_argument("--window", type=int, choices=[51, 128])
    p.add_argument("--k", type=int)
    p.add_argument("--threshold-rule", dest="threshold_rule", help="percentile:P or youden")
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--windows", action="append", help="canonical windows file (repeatable)")
    p.add_argument("--scale", type=float, help="shrink collection counts by this factor")
    p.add_argument("--normalize", action="store_const", const=True)
    p.add_argument("--standardize", action="store_const", const=True)
    p.add_argument("--holdout", action="store_const", const=True, help="also score the held-out test split")
    p.add_argument("--metric", choices=["euclidean", "manhattan"])
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=str)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fallfourier", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert raw datasets to canonical windows files")
    p.add_argument("--tfall", type=str)
    p.add_argument("--ucihar", type=str)
    p.add_argument("--window", type=int, choices=[51, 128], default=128)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=ingest.DEFAULT_TOLERANCE)
    p.add_argument("--out", type=str, default=".")

    p = sub.add_parser("synth", help="write synthetic labeled windows")
    p.add_argument("--profile", choices=synth.PROFILES, default="mixed")
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=int, choices=[51, 128], default=128)
    p.add_argument("--fall-fraction", dest="fall_fraction", type=float, default=0.1)
    p.add_argument("--out", type=str, required=True, help="output .jsonl file or directory")

    p = sub.add_parser("run", help="run one cross-validated experiment")
    _experiment_flags(p)

    p = sub.add_parser("grid", help="sweep experiment axes into a results ledger")
    _experiment_flags(p)
    p.add_argument("--axis", action="append", default=[], metavar="NAME=V1,V2", help=f"one of {', '.join(GRID_AXES)}")

    p = sub.add_parser("report", help="render a report.json or results ledger")
    p.add_argument("path", type=Path)
    p.add_argument("--style", choices=["csv", "markdown"], default="markdown")
    return parser


def _overrides(args) -> dict:
    keys = ("collection", "feature", "classifier", "window", "k", "threshold_rule", "folds", "seed", "scale", "normalize", "standardize", "holdout", "metric", "workers", "out")
    out = {k: getattr(args, k) for k in keys}
    out["windows"] = tuple(args.windows) if args.windows else None
    return out


def _parse_axes(items) -> dict:
    axes = {}
    for item in items:
        name, sep, values = item.partition("=")
        if not sep or not values:
            raise ConfigError(f"bad --axis {item!r}; expected NAME=V1,V2")
        axes[name.strip()] = [v.strip() for v in values.split(",") if v.strip()]
    return axes


def _cmd_ingest(args) -> int:
    summary = ingest_datasets(args.tfall, args.ucihar, n=args.window, seed=args.seed, out=args.out, tolerance=args.tolerance)
    for name, info in summary["datasets"].items():
        print(f"{name}: {info['windows']} windows ({info['adl']} ADL, {info['fall']} FALL) -> {info['path']}")
    return 0


def _cmd_synth(args) -> int:
    windows = synth.synthesize(args.profile, args.count, args.seed, n=args.window, fall_fraction=args.fall_fraction)
    out = Path(args.out)
    if out.suffix != ".jsonl":
        out.mkdir(parents=True, exist_ok=True)
        out = out / f"synthetic_{args.profile}_w{args.window}_s{args.seed}.jsonl"
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
    ingest.write_windows(out, windows)
    n_fall = sum(int(w.label) for w in windows)
    print(f"wrote {len(windows)} windows ({len(windows) - n_fall} ADL, {n_fall} FALL) to {out}")
    return 0


def _print_means(label: str, means: dict) -> None:
    print(label + "  " + "  ".join(f"mean_{m.upper()}: {100 * v:.2f}" for m, v in means.items()))


def _cmd_run(args) -> int:
    cfg = load_config(args.config, **_overrides(args))
    report = run_experiment(cfg)
    print(emit_table(report, "MARKDOWN"), end="")
    _print_means(f"[{cfg.cell_hash}]", report.means)
    return 0


def _cmd_grid(args) -> int:
    cfg = load_config(args.config, **_overrides(args))
    rows = run_grid(cfg, _parse_axes(args.axis))
    failed = [r for r in rows if r["status"] != "ok"]
    for r in rows:
        if r["status"] == "ok":
            _print_means(f"[{r['config_hash']}] ok", r["means"])
        else:
            print(f"[{r['config_hash']}] error: {r.get('error')}")
    print(f"{len(rows)} cell(s) run, {len(failed)} failed")
    return 2 if failed else 0


def _cmd_report(args) -> int:
    path = args.path
    if path.suffix == ".jsonl":
        for row in read_ledger(path):
            if row.get("means"):
                _print_means(f"[{row['config_hash']}] {row['config'].get('collection')} {row['config'].get('feature')} {row['config'].get('classifier')}", row["means"])
            else:
                print(f"[{row['config_hash']}] {row.get('status')}: {row.get('error', '')}")
        return 0
    report = ExperimentReport.from_dict(json.loads(path.read_text()))
    print(emit_table(report, args.style), end="")
    return 0


COMMANDS = {"ingest": _cmd_ingest, "synth": _cmd_synth, "run": _cmd_run, "grid": _cmd_grid, "report": _cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except FallFourierError as exc:
        print(f"fallfourier {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"fallfourier {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
