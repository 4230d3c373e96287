"""Classifier families: knn voting, lstm gradients, training loop, facade."""

import numpy as np
import pytest

from earlywarn.errors import (
    ShapeMismatchError,
    SingleClassTrainingSetError,
    TrainingFailedError,
)
from earlywarn.metrics import f1_metrics
from earlywarn.models import (
    FcnConfig,
    KnnClassifier,
    KnnConfig,
    LstmConfig,
    LSTMLayer,
    MlpConfig,
    TrainConfig,
    build_network,
    inverse_frequency_weights,
    load_model,
    majority_class,
    majority_predict,
    save_model,
    stratified_split,
    train_model,
)
from earlywarn.models.training import fit_network
from earlywarn.numkit import check_layer
from earlywarn.series import (
    apply_minmax,
    fit_minmax,
    gen_synthetic,
    labels_for_scheme,
    split_by_cohort,
    truncate_horizon,
)


def _series(rows):
    """(n, t) list -> (n, t, 1) array."""
    return np.asarray(rows, dtype=np.float64)[:, :, None]


FAST_TC = TrainConfig(max_epochs=25, patience=8, batch_size=16, seed=0)


def _prepared(n_per_class=40, weeks=12, channels=4, scheme="binary", seed=3):
    ds = gen_synthetic(n_per_class, weeks, channels, scheme=scheme, seed=seed)
    train, test = split_by_cohort(ds)
    y_train, names = labels_for_scheme(train, scheme)
    y_test, _ = labels_for_scheme(test, scheme)
    stats = fit_minmax(train)
    return (apply_minmax(train, stats).values, y_train,
            apply_minmax(test, stats).values, y_test, names)


# --------------------------------------------------------------------- knn


def test_knn_exact_match_k1():
    x = _series([[0, 0, 0], [5, 5, 5], [9, 9, 9]])
    y = np.array([0, 1, 2])
    knn = KnnClassifier(KnnConfig(k=1), 3).fit(x, y)
    assert knn.predict(_series([[5, 5, 5]])).tolist() == [1]
    assert knn.predict(x).tolist() == [0, 1, 2]


def test_knn_majority_vote():
    x = _series([[0, 0], [1, 1], [10, 10]])
    y = np.array([1, 1, 0])     # two Pass-ish, one Fail-ish
    knn = KnnClassifier(KnnConfig(k=3), 2).fit(x, y)
    assert knn.predict(_series([[0.5, 0.5]])).tolist() == [1]


def test_knn_tie_breaks_on_summed_distance():
    x = _series([[0.0, 0.0], [3.0, 3.0]])
    y = np.array([1, 0])
    knn = KnnClassifier(KnnConfig(k=2), 2).fit(x, y)
    # query nearer the class-1 sample: tie on votes, class 1 wins on distance
    assert knn.predict(_series([[1.0, 1.0]])).tolist() == [1]
    # equidistant: tie on votes and distance, smaller class index wins
    assert knn.predict(_series([[1.5, 1.5]])).tolist() == [0]


def test_knn_k_larger_than_train():
    x = _series([[0.0], [1.0]])
    knn = KnnClassifier(KnnConfig(k=10), 2).fit(x, np.array([0, 1]))
    assert knn.predict(_series([[0.1]])).shape == (1,)


def test_knn_dtw_mode_prefers_warped_shape():
    # class 0: early bump; class 1: late bump; query has a mid-shifted bump
    train = _series([[5, 0, 0, 0, 0, 0], [0, 0, 0, 0, 0, 5]])
    y = np.array([0, 1])
    query = _series([[0, 5, 0, 0, 0, 0]])
    dtw_knn = KnnClassifier(KnnConfig(k=1, metric="dtw"), 2).fit(train, y)
    assert dtw_knn.predict(query).tolist() == [0]


def test_knn_validation_errors():
    knn = KnnClassifier(KnnConfig(k=1), 2)
    with pytest.raises(ShapeMismatchError):
        knn.predict(_series([[1.0]]))          # not fitted
    knn.fit(_series([[1.0, 2.0]]), np.array([0]))
    with pytest.raises(ShapeMismatchError):
        knn.predict(np.zeros((1, 3, 1)))       # wrong length


# ---------------------------------------------------------------- majority


def test_majority_class_and_ties():
    assert majority_class(np.array([1, 1, 1, 0]), 2) == 1
    assert majority_class(np.array([0, 0, 1, 1]), 2) == 0   # tie: smaller
    assert majority_predict(1, 4).tolist() == [1, 1, 1, 1]
    assert majority_predict(0, 0).tolist() == []
    with pytest.raises(ValueError):
        majority_class(np.array([], dtype=int), 2)


# -------------------------------------------------------------------- lstm


def test_lstm_gradcheck_multi_step():
    rng = np.random.default_rng(0)
    lstm = LSTMLayer(3, 4, rng)
    x = rng.normal(size=(2, 3, 3))
    assert check_layer(lstm, x) < 1e-5


def test_lstm_gradcheck_single_step():
    rng = np.random.default_rng(1)
    lstm = LSTMLayer(2, 3, rng)
    x = rng.normal(size=(3, 1, 2))
    assert check_layer(lstm, x) < 1e-5


def test_lstm_forget_bias_init():
    rng = np.random.default_rng(0)
    lstm = LSTMLayer(2, 5, rng)
    assert lstm.bias[5:10].tolist() == [1.0] * 5
    assert lstm.bias[:5].tolist() == [0.0] * 5


def test_lstm_handles_any_sequence_length():
    rng = np.random.default_rng(2)
    lstm = LSTMLayer(3, 4, rng)
    assert lstm.forward(rng.normal(size=(2, 5, 3))).shape == (2, 4)
    assert lstm.forward(rng.normal(size=(2, 40, 3))).shape == (2, 4)


def test_lstm_extreme_inputs_stay_finite():
    rng = np.random.default_rng(3)
    lstm = LSTMLayer(2, 3, rng)
    x = np.full((2, 4, 2), 1e4)
    out = lstm.forward(x)
    assert np.isfinite(out).all()


# ----------------------------------------------------------- training loop


def test_stratified_split_properties():
    labels = np.array([0] * 10 + [1] * 40 + [2] * 2 + [3])
    fit_idx, val_idx = stratified_split(labels, 0.2, seed=0)
    assert len(fit_idx) + len(val_idx) == len(labels)
    assert not set(fit_idx) & set(val_idx)
    assert np.bincount(labels[val_idx], minlength=4).tolist() == [2, 8, 1, 0]
    # singleton class 3 stays on the fit side
    assert labels[fit_idx].tolist().count(3) == 1
    again_fit, again_val = stratified_split(labels, 0.2, seed=0)
    assert np.array_equal(fit_idx, again_fit)
    assert np.array_equal(val_idx, again_val)


def test_inverse_frequency_weights():
    w = inverse_frequency_weights(np.array([0, 0, 0, 1]), 2)
    assert w[1] == pytest.approx(3 * w[0])
    assert w.mean() == pytest.approx(1.0)
    w = inverse_frequency_weights(np.array([0, 0]), 2)   # absent class
    assert w[1] == 0.0


def test_fit_network_single_class_rejected():
    rng = np.random.default_rng(0)
    net = build_network("mlp", 4, 2, 2, MlpConfig((8,)), rng)
    x = rng.normal(size=(10, 4, 2))
    with pytest.raises(SingleClassTrainingSetError):
        fit_network(net, x, np.zeros(10, dtype=int), 2, FAST_TC)


def test_fit_network_nan_input_fails_loudly():
    rng = np.random.default_rng(0)
    net = build_network("mlp", 4, 2, 2, MlpConfig((8,)), rng)
    x = rng.normal(size=(12, 4, 2))
    x[0, 0, 0] = np.nan
    y = np.array([0, 1] * 6)
    with pytest.raises(TrainingFailedError):
        fit_network(net, x, y, 2, FAST_TC)


def test_fit_network_early_stop_keeps_best():
    x_train, y_train, _, _, names = _prepared()
    rng = np.random.default_rng(0)
    net = build_network("mlp", x_train.shape[1], x_train.shape[2], 2,
                        MlpConfig((16,)), rng)
    history = fit_network(net, x_train, y_train, 2, FAST_TC)
    assert history.epochs_run <= FAST_TC.max_epochs
    assert history.best_val_f1 == max(history.val_weighted_f1)
    assert history.best_epoch == int(np.argmax(history.val_weighted_f1))


def test_training_loss_decreases():
    x_train, y_train, _, _, _ = _prepared(n_per_class=60)
    rng = np.random.default_rng(1)
    net = build_network("fcn", x_train.shape[1], x_train.shape[2], 2,
                        FcnConfig(((16, 5), (16, 3))), rng)
    tc = TrainConfig(max_epochs=5, patience=5, batch_size=16, seed=1)
    history = fit_network(net, x_train, y_train, 2, tc)
    assert history.train_loss[4] < history.train_loss[0]


# ------------------------------------------------------------- train_model


@pytest.mark.parametrize("kind", ["fcn", "mlp", "lstm", "knn", "knn_dtw",
                                  "majority"])
def test_train_model_all_kinds(kind):
    x_train, y_train, x_test, y_test, names = _prepared()
    configs = {"fcn": FcnConfig(((8, 5), (8, 3))), "mlp": MlpConfig((16,)),
               "lstm": LstmConfig(8)}
    state = train_model(kind, x_train, y_train, names,
                        model_config=configs.get(kind), train_config=FAST_TC)
    preds = state.predict(x_test)
    assert preds.shape == (len(y_test),)
    assert preds.min() >= 0 and preds.max() < len(names)
    if kind not in ("majority",):
        rep = f1_metrics(y_test, preds, names)
        assert rep.weighted_f1 > 0.6


def test_train_model_deterministic():
    x_train, y_train, x_test, _, names = _prepared()
    kwargs = dict(model_config=MlpConfig((16,)), train_config=FAST_TC)
    a = train_model("mlp", x_train, y_train, names, **kwargs)
    b = train_model("mlp", x_train, y_train, names, **kwargs)
    assert np.array_equal(a.predict(x_test), b.predict(x_test))
    for (_, pa), (_, pb) in zip(a.net.params(), b.net.params()):
        assert np.array_equal(pa, pb)


def test_train_model_validates():
    with pytest.raises(ShapeMismatchError):
        train_model("mlp", np.zeros((4, 3)), np.zeros(4, dtype=int),
                    ("a", "b"))
    with pytest.raises(ValueError):
        train_model("boost", np.zeros((4, 3, 2)), np.zeros(4, dtype=int),
                    ("a", "b"))


def test_predict_shape_mismatch():
    x_train, y_train, _, _, names = _prepared()
    state = train_model("majority", x_train, y_train, names)
    with pytest.raises(ShapeMismatchError):
        state.predict(np.zeros((2, x_train.shape[1] + 1, x_train.shape[2])))


def test_config_validation():
    with pytest.raises(ValueError):
        MlpConfig(())
    with pytest.raises(ValueError):
        FcnConfig(())
    with pytest.raises(ValueError):
        KnnConfig(k=0)
    with pytest.raises(ValueError):
        KnnConfig(metric="cosine")
    with pytest.raises(ValueError):
        LstmConfig(0)
    with pytest.raises(ValueError):
        TrainConfig(batch_size=1)
    with pytest.raises(ValueError):
        TrainConfig(validation_fraction=1.0)
    with pytest.raises(ValueError):
        TrainConfig(precision="float16")


def test_horizon_truncated_input_trains():
    ds = gen_synthetic(30, 12, 3, scheme="binary", seed=5)
    short = truncate_horizon(ds, 5)
    train, test = split_by_cohort(short)
    y_train, names = labels_for_scheme(train, "binary")
    stats = fit_minmax(train)
    state = train_model("lstm", apply_minmax(train, stats).values, y_train,
                        names, model_config=LstmConfig(8),
                        train_config=FAST_TC)
    preds = state.predict(apply_minmax(test, stats).values)
    assert preds.shape == (test.n_samples,)


# ------------------------------------------------------------- save / load


@pytest.mark.parametrize("kind", ["fcn", "mlp", "lstm", "knn", "majority"])
def test_save_load_roundtrip(kind, tmp_path):
    x_train, y_train, x_test, _, names = _prepared()
    configs = {"fcn": FcnConfig(((8, 5), (8, 3))), "mlp": MlpConfig((16,)),
               "lstm": LstmConfig(8)}
    state = train_model(kind, x_train, y_train, names,
                        model_config=configs.get(kind), train_config=FAST_TC)
    save_model(state, tmp_path / kind, vocab_names=("a", "b", "c", "d"),
               horizon=12)
    back = load_model(tmp_path / kind)
    assert back.kind == kind
    assert back.class_names == state.class_names
    assert np.array_equal(back.predict(x_test), state.predict(x_test))


def test_checkpoint_bytes_reproducible(tmp_path):
    x_train, y_train, _, _, names = _prepared()
    for sub in ("a", "b"):
        state = train_model("mlp", x_train, y_train, names,
                            model_config=MlpConfig((16,)),
                            train_config=FAST_TC)
        save_model(state, tmp_path / sub)
    assert ((tmp_path / "a/params.bin").read_bytes()
            == (tmp_path / "b/params.bin").read_bytes())
    assert ((tmp_path / "a/model.json").read_text()
            == (tmp_path / "b/model.json").read_text())
