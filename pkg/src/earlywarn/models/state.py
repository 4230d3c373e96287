"""Unified train/predict/save/load facade over every classifier family."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..errors import MissingFileError, ShapeMismatchError
from ..numkit.checkpoint import load_params, save_params
from .baseline import majority_class, majority_predict
from .config import (
    FcnConfig,
    KnnConfig,
    LstmConfig,
    MlpConfig,
    TrainConfig,
    default_model_config,
)
from .knn import KnnClassifier
from .network import build_network
from .training import TrainingHistory, fit_network, predict_classes

MODEL_FILE = "model.json"
NEURAL_KINDS = ("fcn", "mlp", "lstm")

_CONFIG_TYPES = {"fcn": FcnConfig, "mlp": MlpConfig, "lstm": LstmConfig,
                 "knn": KnnConfig, "knn_dtw": KnnConfig}


@dataclass
class ModelState:
    """A fitted classifier plus everything needed to reuse or persist it."""

    kind: str
    class_names: tuple[str, ...]
    n_weeks: int
    n_channels: int
    model_config: object | None
    train_config: TrainConfig | None
    net: object | None = None
    knn: KnnClassifier | None = None
    majority: int | None = None
    history: TrainingHistory | None = None

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 3 or x.shape[1:] != (self.n_weeks, self.n_channels):
            raise ShapeMismatchError(
                f"expected (n, {self.n_weeks}, {self.n_channels}), "
                f"got {x.shape}")
        if self.kind in NEURAL_KINDS:
            return predict_classes(
                self.net, x.astype(self.train_config.dtype))
        if self.kind in ("knn", "knn_dtw"):
            return self.knn.predict(x)
        return majority_predict(self.majority, x.shape[0])


def train_model(kind: str, x: np.ndarray, y: np.ndarray,
                class_names: tuple[str, ...],
                model_config=None,
                train_config: TrainConfig | None = None) -> ModelState:
    """Fit one classifier of the requested kind on (n, weeks, channels) data."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 3:
        raise ShapeMismatchError(f"expected (n, weeks, channels), got {x.shape}")
    if x.shape[0] != y.shape[0]:
        raise ShapeMismatchError("sample count != label count")
    if model_config is None:
        model_config = default_model_config(kind)
    tc = train_config or TrainConfig()
    n_classes = len(class_names)

    state = ModelState(kind=kind, class_names=tuple(class_names),
                       n_weeks=x.shape[1], n_channels=x.shape[2],
                       model_config=model_config, train_config=tc)
    if kind in NEURAL_KINDS:
        rng = np.random.default_rng(tc.seed)
        net = build_network(kind, x.shape[1], x.shape[2], n_classes,
                            model_config, rng, dtype=tc.dtype)
        state.history = fit_network(net, x.astype(tc.dtype), y, n_classes, tc)
        state.net = net
    elif kind in ("knn", "knn_dtw"):
        state.knn = KnnClassifier(model_config, n_classes).fit(x, y)
    elif kind == "majority":
        state.majority = majority_class(y, n_classes)
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return state


def _config_dict(config) -> dict | None:
    return None if config is None else asdict(config)


def vocab_hash(vocab_names) -> str:
    """Short digest of the channel vocabulary a model was trained against."""
    joined = "\n".join(vocab_names).encode()
    return hashlib.sha256(joined).hexdigest()[:16]


def save_model(state: ModelState, directory: str | Path,
               vocab_names: tuple[str, ...] | None = None,
               horizon: int | None = None,
               fit_metrics: dict | None = None) -> None:
    """Persist a fitted model: model.json plus a binary parameter blob."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if state.kind in NEURAL_KINDS:
        arrays = state.net.params() + state.net.buffers()
        precision = state.train_config.precision
    elif state.kind in ("knn", "knn_dtw"):
        arrays = [("train_x", state.knn.train_x),
                  ("train_y", state.knn.train_y.astype(np.float64))]
        precision = "float64"
    else:
        arrays = []
        precision = "float64"
    seed = state.train_config.seed if state.train_config else None
    save_params(directory, arrays, precision=precision, seed=seed)

    doc = {
        "kind": state.kind,
        "class_names": list(state.class_names),
        "n_weeks": state.n_weeks,
        "n_channels": state.n_channels,
        "model_config": _config_dict(state.model_config),
        "train_config": _config_dict(state.train_config),
        "majority": state.majority,
        "vocab_hash": None if vocab_names is None else vocab_hash(vocab_names),
        "horizon": horizon,
        "fit_metrics": fit_metrics,
        "history": None if state.history is None else {
            "train_loss": state.history.train_loss,
            "val_weighted_f1": state.history.val_weighted_f1,
            "best_epoch": state.history.best_epoch,
            "best_val_f1": state.history.best_val_f1,
        },
    }
    (directory / MODEL_FILE).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_model(directory: str | Path) -> ModelState:
    directory = Path(directory)
    if not (directory / MODEL_FILE).is_file():
        raise MissingFileError(f"model file not found: {directory / MODEL_FILE}")
    doc = json.loads((directory / MODEL_FILE).read_text())
    kind = doc["kind"]
    model_config = None
    if doc["model_config"] is not None:
        cfg_cls = _CONFIG_TYPES[kind]
        raw = dict(doc["model_config"])
        for key in ("blocks", "hidden_sizes"):
            if key in raw:
                raw[key] = tuple(tuple(v) if isinstance(v, list) else v
                                 for v in raw[key])
        model_config = cfg_cls(**raw)
    train_config = (TrainConfig(**doc["train_config"])
                    if doc["train_config"] else None)
    history = None
    if doc["history"]:
        history = TrainingHistory(
            train_loss=doc["history"]["train_loss"],
            val_weighted_f1=doc["history"]["val_weighted_f1"],
            best_epoch=doc["history"]["best_epoch"],
            best_val_f1=doc["history"]["best_val_f1"],
        )
    state = ModelState(kind=kind, class_names=tuple(doc["class_names"]),
                       n_weeks=doc["n_weeks"], n_channels=doc["n_channels"],
                       model_config=model_config, train_config=train_config,
                       majority=doc["majority"], history=history)

    arrays, _manifest = load_params(directory)
    if kind in NEURAL_KINDS:
        rng = np.random.default_rng(
            train_config.seed if train_config else 0)
        net = build_network(kind, state.n_weeks, state.n_channels,
                            state.n_classes, model_config, rng,
                            dtype=train_config.dtype)
        net.set_arrays(dict(arrays))
        state.net = net
    elif kind in ("knn", "knn_dtw"):
        named = dict(arrays)
        state.knn = KnnClassifier(model_config, state.n_classes).fit(
            named["train_x"], named["train_y"].astype(np.int64))
    return state
