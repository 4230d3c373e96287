"""Classifier families: FCN, MLP, LSTM, k-NN (Euclidean/DTW), and majority."""

from .baseline import majority_class, majority_predict
from .config import (
    MODEL_KINDS,
    FcnConfig,
    KnnConfig,
    LstmConfig,
    MlpConfig,
    TrainConfig,
    default_model_config,
)
from .dtw import dtw_cross_distances, dtw_distance
from .knn import KnnClassifier
from .lstm import LSTMLayer
from .network import build_fcn, build_lstm, build_mlp, build_network
from .state import ModelState, load_model, save_model, train_model, vocab_hash
from .training import (
    TrainingHistory,
    fit_network,
    inverse_frequency_weights,
    predict_classes,
    predict_logits,
    stratified_split,
)

__all__ = [
    "MODEL_KINDS",
    "FcnConfig",
    "KnnClassifier",
    "KnnConfig",
    "LSTMLayer",
    "LstmConfig",
    "MlpConfig",
    "ModelState",
    "TrainConfig",
    "TrainingHistory",
    "build_fcn",
    "build_lstm",
    "build_mlp",
    "build_network",
    "default_model_config",
    "dtw_cross_distances",
    "dtw_distance",
    "fit_network",
    "inverse_frequency_weights",
    "load_model",
    "majority_class",
    "majority_predict",
    "predict_classes",
    "predict_logits",
    "save_model",
    "stratified_split",
    "train_model",
    "vocab_hash",
]
