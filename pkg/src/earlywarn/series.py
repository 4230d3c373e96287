"""Weekly click tensors: build, label, normalize, split, truncate, synthesize.

The core representation is a (n_samples, n_weeks, n_activities) array of
click counts; each activity type is one channel. All operations here are
pure functions on immutable inputs, and random generation always takes an
explicit seed.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from enum import IntEnum
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    EmptyCourseError,
    InvalidHorizonError,
    MissingFileError,
    ShapeMismatchError,
    UnassignedCohortError,
)
from .ingest import OuladTables, filter_participants

logger = logging.getLogger(__name__)

TENSOR_FILE = "tensor.bin"
META_FILE = "meta.json"
MAX_WEEKS = 40


class Outcome(IntEnum):
    DISTINCTION = 0
    PASS = 1
    FAIL = 2
    WITHDRAWN = 3


class BinaryLabel(IntEnum):
    NEGATIVE = 0
    POSITIVE = 1


OUTCOME_NAMES = ("Distinction", "Pass", "Fail", "Withdrawn")
BINARY_NAMES = ("Negative", "Positive")
SCHEMES = ("binary", "multiclass")


@dataclass(frozen=True)
class ActivityVocab:
    """Channel vocabulary: lexicographically sorted activity type names."""

    names: tuple[str, ...]

    def __post_init__(self):
        if list(self.names) != sorted(set(self.names)):
            raise ShapeMismatchError("vocab must be sorted and duplicate-free")

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)


@dataclass
class SeriesTensor:
    """(n_samples, n_weeks, n_activities) click array plus sample identities."""

    values: np.ndarray
    sample_ids: list[tuple[int, str]]

    def __post_init__(self):
        if self.values.ndim != 3:
            raise ShapeMismatchError(f"expected 3 axes, got {self.values.shape}")
        if len(self.sample_ids) != self.values.shape[0]:
            raise ShapeMismatchError("sample_ids length != n_samples")


@dataclass
class NormalizationStats:
    """Per-channel min/max fitted on a training split."""

    mins: np.ndarray
    maxs: np.ndarray
    vocab_names: tuple[str, ...]

    def __post_init__(self):
        if np.any(self.mins > self.maxs):
            raise ShapeMismatchError("per-channel min must be <= max")


@dataclass
class SplitSpec:
    """Cohort split; defaults to 2013 presentations for train, 2014 for test."""

    train_presentations: frozenset[str] = frozenset({"2013B", "2013J"})
    test_presentations: frozenset[str] = frozenset({"2014B", "2014J"})

    def __post_init__(self):
        if not self.train_presentations or not self.test_presentations:
            raise UnassignedCohortError("split sets must be non-empty")
        if self.train_presentations & self.test_presentations:
            raise UnassignedCohortError("train/test presentations overlap")

    @property
    def all_presentations(self) -> frozenset[str]:
        return self.train_presentations | self.test_presentations


@dataclass
class LabeledDataset:
    """Series tensor + per-sample outcome, cohort tag, and channel vocabulary."""

    tensor: SeriesTensor
    outcomes: np.ndarray  # Outcome codes, shape (n_samples,)
    cohorts: list[str]
    vocab: ActivityVocab
    normalization: NormalizationStats | None = None
    course: str | None = None

    def __post_init__(self):
        n = self.tensor.values.shape[0]
        if len(self.outcomes) != n or len(self.cohorts) != n:
            raise ShapeMismatchError("outcomes/cohorts length != n_samples")
        if self.tensor.values.shape[2] != len(self.vocab):
            raise ShapeMismatchError("channel count != vocab length")

    @property
    def values(self) -> np.ndarray:
        return self.tensor.values

    @property
    def n_samples(self) -> int:
        return self.tensor.values.shape[0]

    @property
    def n_weeks(self) -> int:
        return self.tensor.values.shape[1]

    @property
    def n_channels(self) -> int:
        return self.tensor.values.shape[2]


def assign_week(day_offset: int) -> int:
    """Map a day offset to its week index; pre-start days fold into week 0."""
    return max(0, day_offset // 7)


def default_n_weeks(length_days: int) -> int:
    return min(MAX_WEEKS, -(-length_days // 7))


def build_tensor(tables: OuladTables, course: str,
                 split: SplitSpec | None = None,
                 n_weeks: int | None = None) -> LabeledDataset:
    """Aggregate click counts into a labeled weekly tensor for one course.

    The channel vocabulary comes from the vle items of the *training*
    presentations; activity types seen only in test presentations are dropped
    with a warning so the model input width stays fixed. Interactions falling
    at or beyond ``n_weeks`` are dropped.
    """
    split = split or SplitSpec()
    presentations = sorted(split.all_presentations)

    if n_weeks is None:
        lengths = [tables.course_lengths[(course, p)]
                   for p in presentations if (course, p) in tables.course_lengths]
        if not lengths:
            raise EmptyCourseError(f"course {course} has no presentations "
                                   f"matching the split")
        n_weeks = default_n_weeks(max(lengths))
    if n_weeks < 1:
        raise InvalidHorizonError("n_weeks must be >= 1")

    sample_ids: list[tuple[int, str]] = []
    outcomes: list[int] = []
    cohorts: list[str] = []
    for pres in presentations:
        if (course, pres) not in tables.course_lengths:
            continue
        for rec in filter_participants(tables, course, pres):
            sample_ids.append((rec.student_id, pres))
            outcomes.append(int(Outcome[rec.final_result.upper()]))
            cohorts.append(pres)
    if not sample_ids:
        raise EmptyCourseError(f"no participating learners for course {course}")

    train_items = tables.items[
        (tables.items["course_code"] == course)
        & (tables.items["presentation_code"].isin(split.train_presentations))]
    vocab = ActivityVocab(tuple(sorted(set(train_items["activity_type"]))))

    rows = tables.interactions
    rows = rows[(rows["course_code"] == course)
                & (rows["presentation_code"].isin(presentations))]

    channel_of = {name: i for i, name in enumerate(vocab.names)}
    chan = rows["activity_type"].map(channel_of)
    unknown = int(chan.isna().sum())
    if unknown:
        logger.warning("dropping %d interactions with activity types absent "
                       "from the training vocabulary", unknown)
        rows = rows[chan.notna()]
        chan = chan[chan.notna()]

    sample_index = {sid: i for i, sid in enumerate(sample_ids)}
    keys = list(zip(rows["student_id"].to_numpy(),
                    rows["presentation_code"].to_numpy()))
    sidx = np.fromiter((sample_index[k] for k in keys), dtype=np.int64,
                       count=len(keys))
    widx = np.maximum(rows["day_offset"].to_numpy() // 7, 0)
    keep = widx < n_weeks
    dropped_late = int(len(keep) - keep.sum())
    if dropped_late:
        logger.info("dropping %d interactions at or beyond week %d",
                    dropped_late, n_weeks)

    values = np.zeros((len(sample_ids), n_weeks, len(vocab)), dtype=np.float64)
    np.add.at(values,
              (sidx[keep], widx[keep], chan.to_numpy(dtype=np.int64)[keep]),
              rows["click_count"].to_numpy(dtype=np.float64)[keep])

    return LabeledDataset(
        tensor=SeriesTensor(values=values, sample_ids=sample_ids),
        outcomes=np.array(outcomes, dtype=np.int8),
        cohorts=cohorts,
        vocab=vocab,
        course=course,
    )


def binarize_labels(outcomes: np.ndarray) -> np.ndarray:
    """Pass/Distinction -> Positive; Fail/Withdrawn -> Negative."""
    outcomes = np.asarray(outcomes)
    positive = ((outcomes == Outcome.PASS) | (outcomes == Outcome.DISTINCTION))
    return np.where(positive, BinaryLabel.POSITIVE, BinaryLabel.NEGATIVE
                    ).astype(np.int8)


def labels_for_scheme(ds: LabeledDataset, scheme: str):
    """Per-sample class indices and class names for a label scheme."""
    if scheme == "binary":
        return binarize_labels(ds.outcomes).astype(np.int64), BINARY_NAMES
    if scheme == "multiclass":
        return ds.outcomes.astype(np.int64), OUTCOME_NAMES
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def fit_minmax(train: LabeledDataset) -> NormalizationStats:
    """Per-channel min/max over all samples and weeks of the training split."""
    values = train.values
    return NormalizationStats(
        mins=values.min(axis=(0, 1)),
        maxs=values.max(axis=(0, 1)),
        vocab_names=train.vocab.names,
    )


def apply_minmax(ds: LabeledDataset, stats: NormalizationStats) -> LabeledDataset:
    """Scale each channel to [0, 1] with train statistics, clamping overshoot.

    Channels that were constant on the training split map to all zeros.
    """
    if stats.vocab_names != ds.vocab.names:
        raise ShapeMismatchError("normalization stats were fitted on a "
                                 "different channel vocabulary")
    span = stats.maxs - stats.mins
    safe = np.where(span > 0, span, 1.0)
    scaled = (ds.values - stats.mins) / safe
    scaled = np.where(span > 0, scaled, 0.0)
    scaled = np.clip(scaled, 0.0, 1.0)
    return replace(
        ds,
        tensor=SeriesTensor(values=scaled, sample_ids=list(ds.tensor.sample_ids)),
        normalization=stats,
    )


def truncate_horizon(ds: LabeledDataset, horizon_weeks: int) -> LabeledDataset:
    """Keep only the first ``horizon_weeks`` weeks; labels unchanged."""
    if horizon_weeks < 1:
        raise InvalidHorizonError("horizon must be >= 1 week")
    keep = min(horizon_weeks, ds.n_weeks)
    return replace(
        ds,
        tensor=SeriesTensor(values=ds.values[:, :keep, :].copy(),
                            sample_ids=list(ds.tensor.sample_ids)),
    )


def split_by_cohort(ds: LabeledDataset,
                    spec: SplitSpec | None = None
                    ) -> tuple[LabeledDataset, LabeledDataset]:
    """Partition samples into train/test by presentation code."""
    spec = spec or SplitSpec()
    cohorts = np.asarray(ds.cohorts)
    unknown = sorted(set(ds.cohorts) - set(spec.all_presentations))
    if unknown:
        raise UnassignedCohortError(
            f"cohorts {unknown} belong to neither split")

    def take(mask: np.ndarray) -> LabeledDataset:
        idx = np.flatnonzero(mask)
        return replace(
            ds,
            tensor=SeriesTensor(
                values=ds.values[idx].copy(),
                sample_ids=[ds.tensor.sample_ids[i] for i in idx]),
            outcomes=ds.outcomes[idx].copy(),
            cohorts=[ds.cohorts[i] for i in idx],
        )

    train_mask = np.isin(cohorts, sorted(spec.train_presentations))
    return take(train_mask), take(~train_mask)


def gen_synthetic(n_per_class: int, n_weeks: int, n_activities: int,
                  scheme: str = "binary", seed: int = 0,
                  dropout_week: int = 5) -> LabeledDataset:
    """Seeded synthetic click dataset with engagement archetypes.

    Pass learners keep stationary Poisson activity around per-channel base
    rates; Fail learners decay geometrically after a drawn dropout week
    (default centred on week 5); Distinction runs at 1.5x base; Withdrawn
    goes exactly silent after the dropout week. Cohorts cycle through the
    default four presentations so the standard split applies.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    if scheme == "binary":
        class_outcomes = (Outcome.PASS, Outcome.FAIL)
    elif scheme == "multiclass":
        class_outcomes = (Outcome.DISTINCTION, Outcome.PASS, Outcome.FAIL,
                          Outcome.WITHDRAWN)
    else:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")

    rng = np.random.default_rng(seed)
    base = rng.uniform(3.0, 12.0, size=n_activities)
    presentations = sorted(SplitSpec().all_presentations)
    decay = 0.6
    weeks = np.arange(n_weeks)

    values = np.zeros((n_per_class * len(class_outcomes), n_weeks, n_activities))
    outcomes = np.zeros(values.shape[0], dtype=np.int8)
    cohorts: list[str] = []
    sample_ids: list[tuple[int, str]] = []

    i = 0
    for outcome in class_outcomes:
        for _ in range(n_per_class):
            scale = rng.uniform(0.7, 1.3)
            rates = np.tile(base * scale, (n_weeks, 1))
            if outcome == Outcome.DISTINCTION:
                rates *= 1.5
            elif outcome in (Outcome.FAIL, Outcome.WITHDRAWN):
                d = int(rng.integers(max(1, dropout_week - 2), dropout_week + 3))
                if outcome == Outcome.FAIL:
                    factor = np.where(weeks >= d,
                                      decay ** (weeks - d + 1), 1.0)
                    rates *= factor[:, None]
                else:
                    rates[weeks >= d] = 0.0
            values[i] = rng.poisson(rates)
            outcomes[i] = int(outcome)
            cohort = presentations[i % len(presentations)]
            cohorts.append(cohort)
            sample_ids.append((i, cohort))
            i += 1

    return LabeledDataset(
        tensor=SeriesTensor(values=values, sample_ids=sample_ids),
        outcomes=outcomes,
        cohorts=cohorts,
        vocab=ActivityVocab(tuple(f"activity_{c:02d}"
                                  for c in range(n_activities))),
        course="synthetic",
    )


def save_dataset(ds: LabeledDataset, directory: str | Path) -> None:
    """Write tensor.bin (little-endian float64, row-major) plus meta.json."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / TENSOR_FILE).write_bytes(
        np.ascontiguousarray(ds.values, dtype="<f8").tobytes())
    meta = {
        "shape": list(ds.values.shape),
        "vocab": list(ds.vocab.names),
        "sample_ids": [[int(s), p] for s, p in ds.tensor.sample_ids],
        "cohorts": list(ds.cohorts),
        "outcomes": [OUTCOME_NAMES[o] for o in ds.outcomes],
        "normalization": None if ds.normalization is None else {
            "mins": ds.normalization.mins.tolist(),
            "maxs": ds.normalization.maxs.tolist(),
        },
        "course": ds.course,
        "builder_version": __version__,
    }
    (directory / META_FILE).write_text(json.dumps(meta, indent=2) + "\n")


def load_dataset(directory: str | Path) -> LabeledDataset:
    directory = Path(directory)
    for name in (META_FILE, TENSOR_FILE):
        if not (directory / name).is_file():
            raise MissingFileError(f"dataset file not found: {directory / name}")
    meta = json.loads((directory / META_FILE).read_text())
    shape = tuple(meta["shape"])
    values = np.frombuffer((directory / TENSOR_FILE).read_bytes(),
                           dtype="<f8").reshape(shape).astype(np.float64)
    vocab = ActivityVocab(tuple(meta["vocab"]))
    norm = None
    if meta["normalization"] is not None:
        norm = NormalizationStats(
            mins=np.array(meta["normalization"]["mins"]),
            maxs=np.array(meta["normalization"]["maxs"]),
            vocab_names=vocab.names,
        )
    outcome_codes = {name: int(code) for code, name in enumerate(OUTCOME_NAMES)}
    return LabeledDataset(
        tensor=SeriesTensor(
            values=values,
            sample_ids=[(int(s), p) for s, p in meta["sample_ids"]]),
        outcomes=np.array([outcome_codes[o] for o in meta["outcomes"]],
                          dtype=np.int8),
        cohorts=list(meta["cohorts"]),
        vocab=vocab,
        normalization=norm,
        course=meta.get("course"),
    )
