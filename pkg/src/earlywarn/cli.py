"""Command-line interface.

Subcommands: ingest, build, synth, train, sweep, baseline, report.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric error.
Artifact-producing commands also write a run_manifest.json capturing the
arguments, seed, library versions, and wall time.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__, ingest, series, sweep as sweep_mod
from .errors import DataError, NumericError, ParseError
from .metrics import baseline_report, f1_metrics
from .models import (
    MODEL_KINDS,
    KnnConfig,
    TrainConfig,
    default_model_config,
    save_model,
    train_model,
)

logger = logging.getLogger(__name__)

ENV_DATA_DIR = "EARLYWARN_OULAD_DIR"
MANIFEST_FILE = "run_manifest.json"


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this toolkit reserves 2 for
    data errors, so remap usage problems to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_horizon_list(value) -> list[int]:
    """Accept "start:end:step" (inclusive), "a,b,c", a single int, or a list."""
    if isinstance(value, (list, tuple)):
        out = sorted({int(v) for v in value})
    else:
        text = str(value).strip()
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError(
                    f"horizon range must be start:end:step, got {text!r}")
            start, end, step = (int(p) for p in parts)
            if step < 1 or end < start:
                raise ValueError(f"bad horizon range {text!r}")
            out = list(range(start, end + 1, step))
        else:
            out = sorted({int(p) for p in text.split(",") if p.strip()})
    if not out or any(h < 1 for h in out):
        raise ValueError(f"horizons must be positive, got {value!r}")
    return out


def _horizons_arg(text: str) -> list[int]:
    try:
        return parse_horizon_list(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def parse_model_list(value) -> list[str]:
    names = (list(value) if isinstance(value, (list, tuple))
             else [p.strip() for p in str(value).split(",") if p.strip()])
    for name in names:
        if name not in MODEL_KINDS:
            raise ValueError(f"unknown model {name!r}; choose from "
                             f"{', '.join(MODEL_KINDS)}")
    if not names:
        raise ValueError("need at least one model")
    return names


def _models_arg(text: str) -> list[str]:
    try:
        return parse_model_list(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def parse_scheme_list(value) -> list[str]:
    names = (list(value) if isinstance(value, (list, tuple))
             else [p.strip() for p in str(value).split(",") if p.strip()])
    for name in names:
        if name not in series.SCHEMES:
            raise ValueError(f"unknown scheme {name!r}; choose from "
                             f"{', '.join(series.SCHEMES)}")
    if not names:
        raise ValueError("need at least one scheme")
    return names


def _schemes_arg(text: str) -> list[str]:
    try:
        return parse_scheme_list(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _versions() -> dict[str, str]:
    versions = {
        "earlywarn": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "pandas": pd.__version__,
    }
    try:
        import numba
        versions["numba"] = numba.__version__
    except ImportError:
        pass
    return versions


def write_manifest(directory: Path, command: str, args: argparse.Namespace,
                   wall_s: float) -> None:
    arguments = {k: v for k, v in sorted(vars(args).items())
                 if k not in ("handler", "command")}
    doc = {
        "command": command,
        "arguments": arguments,
        "seed": getattr(args, "seed", None),
        "versions": _versions(),
        "wall_s": round(wall_s, 3),
    }
    (directory / MANIFEST_FILE).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _data_dir(args) -> Path:
    raw = args.oulad_dir or os.environ.get(ENV_DATA_DIR)
    if not raw:
        raise DataError(f"no data directory: pass --oulad-dir or set "
                        f"{ENV_DATA_DIR}")
    return Path(raw)


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.lr, batch_size=args.batch_size,
        max_epochs=args.max_epochs, patience=args.patience,
        validation_fraction=args.val_fraction, seed=args.seed,
        class_weights=args.class_weights, grad_clip=args.grad_clip,
        precision=args.precision)


def _model_config(args, kind: str):
    if kind in ("knn", "knn_dtw") and args.k is not None:
        base = default_model_config(kind)
        return KnnConfig(k=args.k, metric=base.metric)
    return default_model_config(kind)


# ---------------------------------------------------------------- handlers


def cmd_ingest(args) -> int:
    tables = ingest.load_tables(_data_dir(args))
    summary = ingest.ingestion_summary(tables)
    text = json.dumps(summary, indent=2, sort_keys=True)
    print(text)
    if args.out:
        start = time.perf_counter()
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ingest_summary.json").write_text(text + "\n")
        write_manifest(out, "ingest", args, time.perf_counter() - start)
    return 0


def cmd_build(args) -> int:
    start = time.perf_counter()
    tables = ingest.load_tables(_data_dir(args))
    ds = series.build_tensor(tables, args.course, n_weeks=args.n_weeks)
    out = Path(args.out)
    series.save_dataset(ds, out)
    write_manifest(out, "build", args, time.perf_counter() - start)
    print(f"built {ds.n_samples} learners x {ds.n_weeks} weeks x "
          f"{ds.n_channels} activity types -> {out}")
    return 0


def cmd_synth(args) -> int:
    start = time.perf_counter()
    ds = series.gen_synthetic(
        n_per_class=args.per_class, n_weeks=args.weeks,
        n_activities=args.channels, scheme=args.scheme, seed=args.seed,
        dropout_week=args.dropout_week)
    out = Path(args.out)
    series.save_dataset(ds, out)
    write_manifest(out, "synth", args, time.perf_counter() - start)
    print(f"generated {ds.n_samples} samples x {ds.n_weeks} weeks x "
          f"{ds.n_channels} channels ({args.scheme}) -> {out}")
    return 0


def cmd_train(args) -> int:
    start = time.perf_counter()
    ds = series.load_dataset(args.dataset)
    if args.horizon is not None:
        ds = series.truncate_horizon(ds, args.horizon)
    train_ds, test_ds = series.split_by_cohort(ds)
    y_train, class_names = series.labels_for_scheme(train_ds, args.scheme)
    y_test, _ = series.labels_for_scheme(test_ds, args.scheme)
    stats = series.fit_minmax(train_ds)
    train_ds = series.apply_minmax(train_ds, stats)
    test_ds = series.apply_minmax(test_ds, stats)

    tc = _train_config(args)
    state = train_model(args.model, train_ds.values, y_train, class_names,
                        model_config=_model_config(args, args.model),
                        train_config=tc)
    train_rep = f1_metrics(y_train, state.predict(train_ds.values),
                           class_names)
    test_rep = f1_metrics(y_test, state.predict(test_ds.values), class_names)

    out = Path(args.out)
    save_model(state, out, vocab_names=ds.vocab.names, horizon=args.horizon,
               fit_metrics={"train_weighted_f1": train_rep.weighted_f1,
                            "test_weighted_f1": test_rep.weighted_f1})
    (out / "fit_report.json").write_text(json.dumps({
        "train": train_rep.as_dict(),
        "test": test_rep.as_dict(),
        "normalization": {"mins": stats.mins.tolist(),
                          "maxs": stats.maxs.tolist()},
        "horizon": args.horizon,
        "scheme": args.scheme,
    }, indent=2, sort_keys=True) + "\n")
    write_manifest(out, "train", args, time.perf_counter() - start)
    print(f"{args.model} {args.scheme}"
          + (f" h{args.horizon}" if args.horizon else "")
          + f": train weighted_f1={train_rep.weighted_f1:.4f} "
          + f"test weighted_f1={test_rep.weighted_f1:.4f} -> {out}")
    return 0


def cmd_sweep(args) -> int:
    start = time.perf_counter()
    datasets: dict[str, series.LabeledDataset] = {}
    if args.course:
        tables = ingest.load_tables(_data_dir(args))
        for course in args.course:
            if course in datasets:
                raise DataError(f"duplicate course {course!r} in --course")
            datasets[course] = series.build_tensor(tables, course)
    else:
        for path in args.dataset:
            ds = series.load_dataset(path)
            course = ds.course or Path(path).name
            if course in datasets:
                raise DataError(f"duplicate course {course!r} in --dataset")
            datasets[course] = ds

    models = parse_model_list(args.models)
    horizons = parse_horizon_list(args.horizons)
    schemes = parse_scheme_list(args.schemes)
    result = sweep_mod.horizon_sweep(
        datasets, models, horizons, schemes, seed=args.seed,
        train_config=_train_config(args),
        model_configs={kind: _model_config(args, kind) for kind in models},
        workers=args.workers)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = sweep_mod.export_report(result, out)
    write_manifest(out, "sweep", args, time.perf_counter() - start)
    failed = [r for r in result.rows if not r.ok]
    print(f"swept {len(result.rows)} cells ({len(failed)} failed) -> "
          f"{paths['csv']}")
    for row in failed:
        print(f"  failed {row.course}/{row.model}/{row.scheme}/h{row.horizon}"
              f": {row.error}", file=sys.stderr)
    return 0


def cmd_baseline(args) -> int:
    start = time.perf_counter()
    ds = series.load_dataset(args.dataset)
    train_ds, test_ds = series.split_by_cohort(ds)
    schemes = parse_scheme_list(args.schemes)
    docs = {}
    for scheme in schemes:
        y_all, class_names = series.labels_for_scheme(ds, scheme)
        y_train, _ = series.labels_for_scheme(train_ds, scheme)
        y_test, _ = series.labels_for_scheme(test_ds, scheme)
        # whole-dataset view (comparable to published class shares) plus the
        # honest protocol view (majority fit on train, scored on held-out)
        overall = baseline_report(y_all, y_all, class_names, scheme)
        held_out = baseline_report(y_train, y_test, class_names, scheme)
        print(f"[{scheme}] whole dataset:")
        for line in overall.lines():
            print("  " + line)
        print(f"[{scheme}] train-majority on held-out cohorts:")
        for line in held_out.lines():
            print("  " + line)
        docs[scheme] = {
            "overall": overall.__dict__,
            "held_out": held_out.__dict__,
        }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "baseline.json").write_text(
            json.dumps(docs, indent=2, sort_keys=True) + "\n")
        write_manifest(out, "baseline", args, time.perf_counter() - start)
    return 0


def cmd_report(args) -> int:
    rows = sweep_mod.import_report(args.report)
    if not rows:
        raise DataError(f"no rows in {args.report}")
    models = list(dict.fromkeys(r["model"] for r in rows))
    by_key = {(r["course"], r["scheme"], r["horizon"], r["model"]): r
              for r in rows}
    courses = sorted({r["course"] for r in rows})
    schemes = sorted({r["scheme"] for r in rows})
    horizons = sorted({r["horizon"] for r in rows})
    width = max(len(m) for m in models) + 2
    for course in courses:
        for scheme in schemes:
            print(f"course={course} scheme={scheme} (weighted F1)")
            print("  horizon" + "".join(f"{m:>{width}}" for m in models))
            for horizon in horizons:
                cells = []
                for model in models:
                    row = by_key.get((course, scheme, horizon, model))
                    cells.append("-" if row is None
                                 else f"{row['weighted_f1']:.4f}")
                print(f"  {horizon:>7}"
                      + "".join(f"{c:>{width}}" for c in cells))
    return 0


# ------------------------------------------------------------------ parser


def _add_train_knobs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lr", type=float, default=1e-3,
                   help="Adam learning rate (default 1e-3)")
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--max-epochs", type=int, default=100)
    p.add_argument("--patience", type=int, default=10,
                   help="epochs without validation improvement before stopping")
    p.add_argument("--val-fraction", type=float, default=0.2,
                   help="fraction of train cohorts held out for early stopping")
    p.add_argument("--class-weights", action="store_true",
                   help="weight the loss by inverse class frequency")
    p.add_argument("--grad-clip", type=float, default=5.0)
    p.add_argument("--precision", choices=("float32", "float64"),
                   default="float64")
    p.add_argument("--k", type=int, default=None,
                   help="neighbour count for knn/knn_dtw (default 5)")


def build_parser() -> tuple[_Parser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(
        prog="earlywarn",
        description="Weekly click-series pipeline: ingest logs, build "
                    "tensors, train classifiers, sweep horizons.")
    parser.add_argument("--version", action="version",
                        version=f"earlywarn {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True,
                                       parser_class=_Parser)
    subs: dict[str, argparse.ArgumentParser] = {}

    def sub(name: str, handler, **kwargs):
        p = subparsers.add_parser(name, **kwargs)
        p.add_argument("--config", default=None,
                       help="JSON file of defaults; explicit flags win")
        p.add_argument("--verbose", action="store_true")
        p.set_defaults(handler=handler)
        subs[name] = p
        return p

    p = sub("ingest", cmd_ingest,
            help="validate raw CSVs and print an ingestion summary")
    p.add_argument("--oulad-dir", default=None,
                   help=f"directory of raw CSVs (default ${ENV_DATA_DIR})")
    p.add_argument("--out", default=None,
                   help="also write ingest_summary.json into this directory")

    p = sub("build", cmd_build,
            help="aggregate one course into a weekly click tensor")
    p.add_argument("--oulad-dir", default=None,
                   help=f"directory of raw CSVs (default ${ENV_DATA_DIR})")
    p.add_argument("--course", required=True, help="course code, e.g. BBB")
    p.add_argument("--n-weeks", type=int, default=None,
                   help="weeks to keep (default: course length, capped at 40)")
    p.add_argument("--out", required=True, help="output dataset directory")

    p = sub("synth", cmd_synth, help="generate a synthetic dataset")
    p.add_argument("--per-class", type=int, default=500)
    p.add_argument("--weeks", type=int, default=40)
    p.add_argument("--channels", type=int, default=10)
    p.add_argument("--scheme", choices=series.SCHEMES, default="binary")
    p.add_argument("--dropout-week", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output dataset directory")

    p = sub("train", cmd_train, help="train and score one model")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--model", choices=MODEL_KINDS, required=True)
    p.add_argument("--scheme", choices=series.SCHEMES, default="binary")
    p.add_argument("--horizon", type=int, default=None,
                   help="truncate to this many weeks before training")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model output directory")
    _add_train_knobs(p)

    p = sub("sweep", cmd_sweep,
            help="benchmark models across horizons and schemes")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--dataset", nargs="+",
                        help="one or more dataset directories")
    source.add_argument("--course", nargs="+",
                        help="course codes to build from the raw CSVs")
    p.add_argument("--oulad-dir", default=None,
                   help=f"raw CSVs for --course (default ${ENV_DATA_DIR})")
    p.add_argument("--models", type=_models_arg, default="fcn,mlp,lstm,knn",
                   help="comma list from: " + ", ".join(MODEL_KINDS))
    p.add_argument("--horizons", type=_horizons_arg, default="5:40:5",
                   help='"start:end:step" (inclusive) or comma list')
    p.add_argument("--schemes", "--scheme", type=_schemes_arg,
                   default="binary,multiclass")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="report output directory")
    _add_train_knobs(p)

    p = sub("baseline", cmd_baseline,
            help="majority-class scores under every F1 convention")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--schemes", "--scheme", type=_schemes_arg,
                   default="binary,multiclass")
    p.add_argument("--out", default=None,
                   help="also write baseline.json into this directory")

    p = sub("report", cmd_report, help="pretty-print a sweep report.csv")
    p.add_argument("--report", required=True, help="path to report.csv")

    return parser, subs


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            overrides = json.loads(Path(args.config).read_text())
        except FileNotFoundError:
            raise DataError(f"config file not found: {args.config}")
        except json.JSONDecodeError as exc:
            raise ParseError(f"config {args.config} is not valid JSON: {exc}")
        if not isinstance(overrides, dict):
            raise ParseError(f"config {args.config} must be a JSON object")
        sub = subs[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(overrides) - known
        if unknown:
            raise DataError(f"config keys not recognized by "
                            f"{args.command}: {sorted(unknown)}")
        sub.set_defaults(**overrides)
        args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False)
        else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    return args.handler(args)


def entrypoint() -> None:
    try:
        code = main()
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        code = 3
    sys.exit(code)


if __name__ == "__main__":
    entrypoint()
