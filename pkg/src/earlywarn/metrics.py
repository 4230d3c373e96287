"""Confusion matrices and F1-family scores computed from first principles.

Conventions: the confusion matrix is counts[truth][prediction]; per-class
precision/recall/F1 use the one-vs-rest reduction and define 0/0 as 0.
``positive_f1`` is the F1 of the "Positive" class for binary labels and of
the "Pass" class for the four-way scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ClassOutOfRangeError, LengthMismatchError

# Published majority-class reference scores reported alongside our recomputed
# baselines. They match none of the macro/weighted/positive conventions on
# the full dataset, so baseline reports show all three next to the reference
# and flag the gap instead of silently adopting one.
PUBLISHED_MAJORITY_F1 = {"binary": 0.58, "multiclass": 0.48}


@dataclass
class ConfusionMatrix:
    """Square count matrix indexed [true class][predicted class]."""

    counts: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        k = len(self.class_names)
        if self.counts.shape != (k, k):
            raise LengthMismatchError(
                f"counts shape {self.counts.shape} != ({k}, {k})")

    @property
    def support(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class MetricsReport:
    """Per-class and aggregate classification scores."""

    class_names: tuple[str, ...]
    support: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    accuracy: float
    macro_f1: float
    weighted_f1: float
    micro_f1: float
    positive_f1: float
    confusion: ConfusionMatrix = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "class_names": list(self.class_names),
            "support": [int(s) for s in self.support],
            "precision": [float(p) for p in self.precision],
            "recall": [float(r) for r in self.recall],
            "f1": [float(f) for f in self.f1],
            "accuracy": float(self.accuracy),
            "macro_f1": float(self.macro_f1),
            "weighted_f1": float(self.weighted_f1),
            "micro_f1": float(self.micro_f1),
            "positive_f1": float(self.positive_f1),
            "confusion": self.confusion.counts.astype(int).tolist(),
        }


def confusion(y_true, y_pred, class_names: tuple[str, ...]) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise LengthMismatchError(
            f"label vectors must be 1-d and equal length, got "
            f"{y_true.shape} vs {y_pred.shape}")
    k = len(class_names)
    for name, vec in (("true", y_true), ("predicted", y_pred)):
        if vec.size and (vec.min() < 0 or vec.max() >= k):
            raise ClassOutOfRangeError(
                f"{name} labels must lie in [0, {k}), got range "
                f"[{vec.min()}, {vec.max()}]")
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    return ConfusionMatrix(counts=counts, class_names=class_names)


def _positive_class_index(class_names: tuple[str, ...]) -> int | None:
    for target in ("Positive", "Pass"):
        if target in class_names:
            return class_names.index(target)
    return None


def f1_metrics(y_true, y_pred, class_names: tuple[str, ...]) -> MetricsReport:
    """One-vs-rest precision/recall/F1 with macro, weighted, micro averages."""
    cm = confusion(y_true, y_pred, class_names)
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    pred_totals = counts.sum(axis=0)
    true_totals = counts.sum(axis=1)

    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(pred_totals > 0, tp / pred_totals, 0.0)
        recall = np.where(true_totals > 0, tp / true_totals, 0.0)
        pr = precision + recall
        f1 = np.where(pr > 0, 2.0 * precision * recall / pr, 0.0)

    total = counts.sum()
    accuracy = float(tp.sum() / total) if total else 0.0
    weighted = float((f1 * true_totals).sum() / total) if total else 0.0
    pos_idx = _positive_class_index(class_names)
    return MetricsReport(
        class_names=class_names,
        support=true_totals.astype(np.int64),
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=accuracy,
        macro_f1=float(f1.mean()),
        weighted_f1=weighted,
        micro_f1=accuracy,
        positive_f1=float(f1[pos_idx]) if pos_idx is not None else float("nan"),
        confusion=cm,
    )


@dataclass
class BaselineReport:
    """Majority-class scores for one scheme, next to the published reference."""

    scheme: str
    majority_class: str
    majority_share: float
    macro_f1: float
    weighted_f1: float
    positive_f1: float
    published_f1: float | None

    def lines(self) -> list[str]:
        out = [
            f"scheme={self.scheme} majority={self.majority_class} "
            f"train share={self.majority_share:.4f}",
            f"  macro_f1={self.macro_f1:.4f} weighted_f1={self.weighted_f1:.4f}"
            f" positive_f1={self.positive_f1:.4f}",
        ]
        if self.published_f1 is not None:
            nearest = min(
                ("macro", self.macro_f1), ("weighted", self.weighted_f1),
                ("positive", self.positive_f1),
                key=lambda kv: abs(kv[1] - self.published_f1))
            out.append(
                f"  published reference={self.published_f1:.2f} "
                f"(closest convention here: {nearest[0]}={nearest[1]:.4f}, "
                f"gap {abs(nearest[1] - self.published_f1):.4f})")
        return out


def baseline_report(y_train, y_test, class_names: tuple[str, ...],
                    scheme: str) -> BaselineReport:
    """Score always-predict-the-train-majority under every F1 convention.

    The averages run over the classes actually observed in the evaluated
    labels (truths plus the constant prediction), so a single-class test set
    matching the majority scores 1.0 under every convention instead of being
    dragged down by absent classes.
    """
    y_train = np.asarray(y_train, dtype=np.int64)
    y_test = np.asarray(y_test, dtype=np.int64)
    if y_train.size == 0 or y_test.size == 0:
        raise LengthMismatchError("baseline needs non-empty label vectors")
    counts = np.bincount(y_train, minlength=len(class_names))
    majority = int(np.argmax(counts))  # ties resolve to the smaller index
    y_pred = np.full_like(y_test, majority)

    observed = np.union1d(np.unique(y_test), [majority])
    remap = {int(old): new for new, old in enumerate(observed)}
    rep = f1_metrics(
        np.array([remap[int(v)] for v in y_test]),
        np.array([remap[int(v)] for v in y_pred]),
        tuple(class_names[int(old)] for old in observed))
    return BaselineReport(
        scheme=scheme,
        majority_class=class_names[majority],
        majority_share=float(counts[majority] / y_train.size),
        macro_f1=rep.macro_f1,
        weighted_f1=rep.weighted_f1,
        positive_f1=rep.positive_f1,
        published_f1=PUBLISHED_MAJORITY_F1.get(scheme),
    )
