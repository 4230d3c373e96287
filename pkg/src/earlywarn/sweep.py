"""Benchmark grid: (course, model, scheme, horizon) -> held-out F1 scores.

Each cell runs the same pipeline: truncate the weekly tensor to the horizon,
split train/test by cohort, derive labels for the scheme, fit min-max
normalization on the train split only, train the model, score the test split.
Failures in one cell are recorded as error strings and never abort the grid.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import DataError
from .metrics import f1_metrics
from .models import TrainConfig, default_model_config, train_model
from .series import (
    SCHEMES,
    LabeledDataset,
    SplitSpec,
    apply_minmax,
    fit_minmax,
    labels_for_scheme,
    split_by_cohort,
    truncate_horizon,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("model", "scheme", "horizon", "course",
               "macro_f1", "weighted_f1", "positive_f1", "seed")
REPORT_CSV = "report.csv"
REPORT_JSON = "report.json"
PLOT_DATA_CSV = "plot_data.csv"
DEFAULT_HORIZONS = (5, 10, 15, 20, 25, 30, 35, 40)


@dataclass
class SweepRow:
    """One grid cell: scores on success, an error string on failure."""

    model: str
    scheme: str
    horizon: int
    course: str
    seed: int
    macro_f1: float | None = None
    weighted_f1: float | None = None
    positive_f1: float | None = None
    wall_s: float | None = None
    n_train: int = 0
    n_test: int = 0
    metrics: dict | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class HorizonSweepResult:
    rows: list[SweepRow] = field(default_factory=list)
    models: tuple[str, ...] = ()
    schemes: tuple[str, ...] = ()
    horizons: tuple[int, ...] = ()
    courses: tuple[str, ...] = ()
    seed: int = 0

    @property
    def ok_rows(self) -> list[SweepRow]:
        return [r for r in self.rows if r.ok]


def run_cell(ds: LabeledDataset, course: str, model: str, scheme: str,
             horizon: int, split: SplitSpec, tc: TrainConfig,
             model_config=None) -> SweepRow:
    """Train and score one grid cell."""
    row = SweepRow(model=model, scheme=scheme, horizon=horizon,
                   course=course, seed=tc.seed)
    start = time.perf_counter()
    try:
        truncated = truncate_horizon(ds, horizon)
        train_ds, test_ds = split_by_cohort(truncated, split)
        y_train, class_names = labels_for_scheme(train_ds, scheme)
        y_test, _ = labels_for_scheme(test_ds, scheme)
        stats = fit_minmax(train_ds)
        train_ds = apply_minmax(train_ds, stats)
        test_ds = apply_minmax(test_ds, stats)
        if model_config is None:
            model_config = default_model_config(model)
        state = train_model(model, train_ds.values, y_train, class_names,
                            model_config=model_config, train_config=tc)
        rep = f1_metrics(y_test, state.predict(test_ds.values), class_names)
        row.macro_f1 = rep.macro_f1
        row.weighted_f1 = rep.weighted_f1
        row.positive_f1 = rep.positive_f1
        row.metrics = rep.as_dict()
        row.n_train = train_ds.n_samples
        row.n_test = test_ds.n_samples
    except Exception as exc:  # record, keep sweeping
        row.error = f"{type(exc).__name__}: {exc}"
        logger.warning("cell %s/%s/%s/h%d failed: %s", course, model, scheme,
                       horizon, row.error)
    row.wall_s = time.perf_counter() - start
    return row


_WORKER_STATE: dict = {}


def _init_worker(datasets, split, tc, model_configs):
    _WORKER_STATE["datasets"] = datasets
    _WORKER_STATE["split"] = split
    _WORKER_STATE["tc"] = tc
    _WORKER_STATE["model_configs"] = model_configs


def _run_cell_by_key(key):
    course, model, scheme, horizon = key
    return run_cell(
        _WORKER_STATE["datasets"][course], course, model, scheme, horizon,
        _WORKER_STATE["split"], _WORKER_STATE["tc"],
        _WORKER_STATE["model_configs"].get(model))


def horizon_sweep(datasets: dict[str, LabeledDataset],
                  models: list[str],
                  horizons: list[int] | None = None,
                  schemes: list[str] | None = None,
                  seed: int = 0,
                  split: SplitSpec | None = None,
                  train_config: TrainConfig | None = None,
                  model_configs: dict | None = None,
                  workers: int = 1) -> HorizonSweepResult:
    """Run the full grid. Row order is deterministic: course (sorted),
    then model (as given), then scheme, then horizon (ascending)."""
    horizons = list(DEFAULT_HORIZONS if horizons is None else horizons)
    schemes = list(schemes or SCHEMES)
    split = split or SplitSpec()
    tc = replace(train_config or TrainConfig(), seed=seed)
    model_configs = model_configs or {}
    if not datasets or not models or not horizons:
        raise DataError("sweep needs at least one course, model, and horizon")
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise DataError(f"unknown scheme {scheme!r}")

    courses = sorted(datasets)
    keys = [(course, model, scheme, horizon)
            for course in courses
            for model in models
            for scheme in schemes
            for horizon in sorted(horizons)]

    if workers > 1:
        with ProcessPoolExecutor(
                max_workers=workers, initializer=_init_worker,
                initargs=(datasets, split, tc, model_configs)) as pool:
            rows = list(pool.map(_run_cell_by_key, keys))
    else:
        rows = [run_cell(datasets[course], course, model, scheme, horizon,
                         split, tc, model_configs.get(model))
                for course, model, scheme, horizon in keys]

    return HorizonSweepResult(rows=rows, models=tuple(models),
                              schemes=tuple(schemes),
                              horizons=tuple(sorted(horizons)),
                              courses=tuple(courses), seed=seed)


def export_report(result: HorizonSweepResult,
                  directory: str | Path) -> dict[str, Path]:
    """Write report.csv, report.json, and plot_data.csv.

    The CSV carries only the deterministic score columns so repeated runs
    with the same seed are byte-identical; measured wall time lives in the
    JSON report.
    """
    if not result.rows:
        raise DataError("refusing to export an empty sweep result")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    csv_path = directory / REPORT_CSV
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in result.ok_rows:
            writer.writerow([
                row.model, row.scheme, row.horizon, row.course,
                f"{row.macro_f1:.6f}", f"{row.weighted_f1:.6f}",
                f"{row.positive_f1:.6f}", row.seed,
            ])

    json_path = directory / REPORT_JSON
    doc = {
        "models": list(result.models),
        "schemes": list(result.schemes),
        "horizons": list(result.horizons),
        "courses": list(result.courses),
        "seed": result.seed,
        "rows": [{
            "model": r.model, "scheme": r.scheme, "horizon": r.horizon,
            "course": r.course, "seed": r.seed,
            "macro_f1": r.macro_f1, "weighted_f1": r.weighted_f1,
            "positive_f1": r.positive_f1, "wall_s": r.wall_s,
            "n_train": r.n_train, "n_test": r.n_test,
            "metrics": r.metrics, "error": r.error,
        } for r in result.rows],
    }
    json_path.write_text(json.dumps(doc, indent=2) + "\n")

    plot_path = directory / PLOT_DATA_CSV
    write_plot_data(result, plot_path)
    return {"csv": csv_path, "json": json_path, "plot": plot_path}


def write_plot_data(result: HorizonSweepResult, path: str | Path) -> None:
    """Wide per-(course, scheme, horizon) table: one weighted-F1 column per
    model, blank where a cell failed."""
    by_key = {(r.course, r.scheme, r.horizon, r.model): r
              for r in result.ok_rows}
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["course", "scheme", "horizon", *result.models])
        for course in result.courses:
            for scheme in result.schemes:
                for horizon in result.horizons:
                    cells = []
                    for model in result.models:
                        row = by_key.get((course, scheme, horizon, model))
                        cells.append("" if row is None
                                     else f"{row.weighted_f1:.6f}")
                    writer.writerow([course, scheme, horizon, *cells])


def import_report(csv_path: str | Path) -> list[dict]:
    """Read report.csv back into typed dicts (inverse of export_report)."""
    csv_path = Path(csv_path)
    out = []
    with csv_path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"report is missing columns {sorted(missing)}")
        for rec in reader:
            out.append({
                "model": rec["model"], "scheme": rec["scheme"],
                "horizon": int(rec["horizon"]), "course": rec["course"],
                "macro_f1": float(rec["macro_f1"]),
                "weighted_f1": float(rec["weighted_f1"]),
                "positive_f1": float(rec["positive_f1"]),
                "seed": int(rec["seed"]),
            })
    return out
