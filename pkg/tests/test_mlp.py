import numpy as np
import pytest

from ris_beamsel.mlp import (
    AdamState,
    EarlyStopper,
    MlpArchitecture,
    TrainingConfig,
    adam_step,
    architecture_for,
    backward,
    cross_entropy,
    forward,
    init_model,
    load_model,
    one_hot,
    predict_codeword,
    save_model,
    train,
)


def small_arch(n_in=6, n_out=2):
    return MlpArchitecture(layer_widths=(n_in, 4, 3, 3, n_out))


class TestOneHot:
    def test_basic(self):
        np.testing.assert_array_equal(one_hot(2, 4), [0, 0, 1, 0])

    def test_single_class(self):
        np.testing.assert_array_equal(one_hot(0, 1), [1])

    def test_sums_to_one(self):
        for label in range(5):
            assert one_hot(label, 5).sum() == 1.0

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            one_hot(4, 4)
        with pytest.raises(ValueError):
            one_hot(-1, 4)


class TestArchitecture:
    def test_halving_ladder(self):
        arch = architecture_for(1800, 45)
        assert arch.layer_widths == (1800, 900, 450, 225, 45)

    def test_production_shape_has_three_hidden_layers(self):
        assert architecture_for(720, 45).n_hidden == 3

    def test_requires_a_hidden_layer(self):
        with pytest.raises(ValueError):
            MlpArchitecture(layer_widths=(10, 2))

    def test_rejects_bad_momentum(self):
        with pytest.raises(ValueError):
            MlpArchitecture(layer_widths=(8, 4, 2, 2, 2), batchnorm_momentum=1.0)


class TestForward:
    def test_zero_weights_uniform_softmax(self):
        model = init_model(small_arch(n_out=5), np.random.default_rng(0))
        model.weights = [np.zeros_like(w) for w in model.weights]
        probs, _ = forward(model, np.zeros((3, 6)), mode="infer")
        np.testing.assert_allclose(probs, 1.0 / 5.0)

    def test_softmax_hand_value(self):
        # logits [ln 2, 0] -> probabilities [2/3, 1/3]
        model = init_model(small_arch(), np.random.default_rng(0))
        model.weights = [np.zeros_like(w) for w in model.weights]
        model.biases[-1] = np.array([np.log(2.0), 0.0])
        probs, _ = forward(model, np.zeros((1, 6)), mode="infer")
        np.testing.assert_allclose(probs[0], [2.0 / 3.0, 1.0 / 3.0], rtol=1e-12)

    def test_rows_sum_to_one(self, rng):
        model = init_model(small_arch(), np.random.default_rng(1))
        probs, _ = forward(model, rng.standard_normal((40, 6)), mode="infer")
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(probs > 0)

    def test_train_mode_normalizes_batch(self, rng):
        # before gain/shift each batch-norm output has mean 0 and variance 1
        model = init_model(small_arch(), np.random.default_rng(2))
        batch = rng.standard_normal((512, 6)) * 3.0 + 1.0
        _, cache = forward(model, batch, mode="train")
        for xhat in cache["xhat"]:
            assert np.abs(xhat.mean(axis=0)).max() < 1e-7
            np.testing.assert_allclose(xhat.var(axis=0), 1.0, atol=1e-3)

    def test_rejects_width_mismatch(self):
        model = init_model(small_arch(), np.random.default_rng(0))
        with pytest.raises(ValueError):
            forward(model, np.zeros((2, 7)), mode="infer")

    def test_rejects_unknown_mode(self):
        model = init_model(small_arch(), np.random.default_rng(0))
        with pytest.raises(ValueError):
            forward(model, np.zeros((2, 6)), mode="test")


class TestCrossEntropy:
    def test_perfect_prediction(self):
        probs = np.array([[1.0, 0.0], [0.0, 1.0]])
        targets = probs.copy()
        assert cross_entropy(probs, targets) == 0.0

    def test_uniform_over_45(self):
        probs = np.full((4, 45), 1.0 / 45.0)
        targets = np.zeros((4, 45))
        targets[:, 3] = 1.0
        assert cross_entropy(probs, targets) == pytest.approx(3.8066624897703196, rel=1e-12)

    def test_batch_mean(self):
        probs = np.array([[0.9, 0.1], [0.4, 0.6]])
        targets = np.array([[1.0, 0.0], [0.0, 1.0]])
        expected = (-np.log(0.9) - np.log(0.6)) / 2
        assert cross_entropy(probs, targets) == pytest.approx(expected, rel=1e-12)

    def test_zero_probability_is_floored(self):
        probs = np.array([[0.0, 1.0]])
        targets = np.array([[1.0, 0.0]])
        loss = cross_entropy(probs, targets)
        assert np.isfinite(loss)
        assert loss == pytest.approx(-np.log(1e-12))


def finite_difference_grads(model, batch, targets, step=1e-5):
    """Central finite differences through the full train-mode loss."""

    def loss_fn():
        probs, _ = forward(model, batch, mode="train")
        return cross_entropy(probs, targets)

    groups = {
        "weights": model.weights,
        "biases": model.biases,
        "bn_gain": model.bn_gain,
        "bn_shift": model.bn_shift,
    }
    fd = {name: [np.zeros_like(p) for p in plist] for name, plist in groups.items()}
    for name, plist in groups.items():
        for i, param in enumerate(plist):
            flat = param.reshape(-1)
            out = fd[name][i].reshape(-1)
            for k in range(flat.size):
                orig = flat[k]
                flat[k] = orig + step
                hi = loss_fn()
                flat[k] = orig - step
                lo = loss_fn()
                flat[k] = orig
                out[k] = (hi - lo) / (2 * step)
    return fd


class TestBackward:
    def test_gradients_match_finite_differences(self):
        arch = MlpArchitecture(layer_widths=(6, 4, 3, 3, 2))
        model = init_model(arch, np.random.default_rng(42))
        rng = np.random.default_rng(7)
        batch = rng.standard_normal((5, 6))
        targets = np.zeros((5, 2))
        targets[np.arange(5), rng.integers(2, size=5)] = 1.0

        probs, cache = forward(model, batch, mode="train")
        grads = backward(model, cache, targets)
        fd = finite_difference_grads(model, batch, targets)
        for name in grads:
            for got, want in zip(grads[name], fd[name]):
                scale = np.maximum(np.abs(want), 1e-6)
                assert np.max(np.abs(got - want) / scale) < 1e-4, name

    def test_duplicated_rows_get_identical_gradients(self):
        model = init_model(small_arch(), np.random.default_rng(3))
        row = np.random.default_rng(1).standard_normal(6)
        batch = np.stack([row, row, row, row])
        targets = np.tile(one_hot(1, 2), (4, 1))
        probs, cache = forward(model, batch, mode="train")
        # rows are indistinguishable so cached activations repeat
        np.testing.assert_allclose(cache["xhat"][0][0], cache["xhat"][0][1], atol=1e-12)
        np.testing.assert_allclose(probs[0], probs[3], atol=1e-12)

    def test_zero_gain_blocks_weight_gradient_below(self):
        # with gamma = 0 the batch-norm output ignores the affine path, so
        # the layer's weight gradient vanishes (finite differences agree)
        model = init_model(small_arch(), np.random.default_rng(4))
        model.bn_gain[0][:] = 0.0
        rng = np.random.default_rng(9)
        batch = rng.standard_normal((5, 6))
        targets = np.tile(one_hot(0, 2), (5, 1))
        _, cache = forward(model, batch, mode="train")
        grads = backward(model, cache, targets)
        np.testing.assert_allclose(grads["weights"][0], 0.0, atol=1e-12)
        fd = finite_difference_grads(model, batch, targets)
        np.testing.assert_allclose(fd["weights"][0], 0.0, atol=1e-6)


class TestAdam:
    def test_zero_gradient_keeps_parameters(self):
        model = init_model(small_arch(), np.random.default_rng(5))
        before = [w.copy() for w in model.weights]
        grads = {
            "weights": [np.zeros_like(w) for w in model.weights],
            "biases": [np.zeros_like(b) for b in model.biases],
            "bn_gain": [np.zeros_like(g) for g in model.bn_gain],
            "bn_shift": [np.zeros_like(s) for s in model.bn_shift],
        }
        adam_step(model, grads, AdamState.for_model(model), 1, TrainingConfig())
        for w, orig in zip(model.weights, before):
            np.testing.assert_array_equal(w, orig)

    def test_first_step_is_signed_learning_rate(self):
        # bias-corrected first step: m_hat / sqrt(v_hat) = g / |g| up to eps
        model = init_model(small_arch(), np.random.default_rng(5))
        cfg = TrainingConfig(learning_rate=1e-3)
        grads = {
            "weights": [np.full_like(w, 0.37) for w in model.weights],
            "biases": [np.full_like(b, -0.8) for b in model.biases],
            "bn_gain": [np.zeros_like(g) for g in model.bn_gain],
            "bn_shift": [np.zeros_like(s) for s in model.bn_shift],
        }
        before_w = [w.copy() for w in model.weights]
        before_b = [b.copy() for b in model.biases]
        adam_step(model, grads, AdamState.for_model(model), 1, cfg)
        for w, orig in zip(model.weights, before_w):
            np.testing.assert_allclose(orig - w, cfg.learning_rate, rtol=1e-6)
        for b, orig in zip(model.biases, before_b):
            np.testing.assert_allclose(orig - b, -cfg.learning_rate, rtol=1e-6)

    def test_identical_inputs_identical_updates(self):
        cfg = TrainingConfig()
        models = [init_model(small_arch(), np.random.default_rng(6)) for _ in range(2)]
        grads = {
            "weights": [np.full_like(w, 0.1) for w in models[0].weights],
            "biases": [np.full_like(b, 0.2) for b in models[0].biases],
            "bn_gain": [np.full_like(g, -0.3) for g in models[0].bn_gain],
            "bn_shift": [np.full_like(s, 0.4) for s in models[0].bn_shift],
        }
        for model in models:
            adam_step(model, grads, AdamState.for_model(model), 1, cfg)
        for a, b in zip(models[0].weights, models[1].weights):
            np.testing.assert_array_equal(a, b)


class TestEarlyStopper:
    def test_stops_after_patience_epochs_without_improvement(self):
        stopper = EarlyStopper(patience=2)
        losses = [3.0, 2.0, 2.5, 2.6]
        stops = [stopper.update(e, l) for e, l in enumerate(losses)]
        assert stops == [False, False, False, True]
        assert stopper.best_epoch == 1

    def test_improvement_resets_counter(self):
        stopper = EarlyStopper(patience=2)
        losses = [3.0, 2.9, 3.1, 2.5, 2.6, 2.7]
        stops = [stopper.update(e, l) for e, l in enumerate(losses)]
        assert stops == [False, False, False, False, False, True]
        assert stopper.best_epoch == 3


def separable_toy_dataset(n=600, seed=0):
    rng = np.random.default_rng(seed)
    labels = rng.integers(2, size=n)
    centers = np.array([[-2.0, -2.0], [2.0, 2.0]])
    feats = centers[labels] + rng.standard_normal((n, 2)) * 0.4
    return feats.astype(np.float32), labels


class TestTrain:
    def test_learns_linearly_separable_toy_problem(self):
        feats, labels = separable_toy_dataset()
        arch = MlpArchitecture(layer_widths=(2, 8, 8, 4, 2))
        model = init_model(arch, np.random.default_rng(0))
        cfg = TrainingConfig(batch_size=64, learning_rate=5e-3, max_epochs=50, seed=1)
        log = train(model, feats, labels, cfg)
        probs, _ = forward(model, feats.astype(np.float64), mode="infer")
        accuracy = np.mean(probs.argmax(axis=1) == labels)
        assert accuracy >= 0.99
        # loss decreases over the first epochs on a learnable problem
        assert log.epochs[-1].train_loss < log.epochs[0].train_loss

    def test_fixed_seed_reproduces_training_log(self):
        feats, labels = separable_toy_dataset()
        cfg = TrainingConfig(batch_size=64, learning_rate=5e-3, max_epochs=5, seed=3)
        logs = []
        for _ in range(2):
            model = init_model(MlpArchitecture(layer_widths=(2, 8, 8, 4, 2)), np.random.default_rng(0))
            logs.append(train(model, feats, labels, cfg))
        for a, b in zip(logs[0].epochs, logs[1].epochs):
            assert a == b

    def test_rejects_empty_dataset(self):
        model = init_model(small_arch(), np.random.default_rng(0))
        with pytest.raises(ValueError):
            train(model, np.zeros((0, 6), dtype=np.float32), np.zeros(0, dtype=int), TrainingConfig())

    def test_rejects_out_of_range_labels(self):
        model = init_model(small_arch(), np.random.default_rng(0))
        with pytest.raises(ValueError):
            train(model, np.zeros((4, 6), dtype=np.float32), np.array([0, 1, 2, 1]), TrainingConfig(batch_size=2))

    def test_restores_best_epoch_weights(self):
        feats, labels = separable_toy_dataset(n=400, seed=5)
        model = init_model(MlpArchitecture(layer_widths=(2, 8, 8, 4, 2)), np.random.default_rng(2))
        cfg = TrainingConfig(batch_size=64, learning_rate=5e-3, max_epochs=12, seed=4)
        log = train(model, feats, labels, cfg)
        assert log.best_epoch >= 0
        best = log.epochs[log.best_epoch].val_loss
        assert all(best <= e.val_loss + 1e-12 for e in log.epochs)


class TestPredict:
    def test_zero_weights_tie_break_lowest_index(self):
        model = init_model(small_arch(n_out=5), np.random.default_rng(0))
        model.weights = [np.zeros_like(w) for w in model.weights]
        label, probs = predict_codeword(model, np.zeros(6))
        assert label == 0
        np.testing.assert_allclose(probs.sum(), 1.0, atol=1e-12)

    def test_pure_function(self, rng):
        model = init_model(small_arch(), np.random.default_rng(1))
        feature = rng.standard_normal(6)
        a = predict_codeword(model, feature)
        b = predict_codeword(model, feature)
        assert a[0] == b[0]
        np.testing.assert_array_equal(a[1], b[1])

    def test_rejects_width_mismatch(self):
        model = init_model(small_arch(), np.random.default_rng(1))
        with pytest.raises(ValueError):
            predict_codeword(model, np.zeros(7))

    def test_applies_stored_feature_scale(self, rng):
        model = init_model(small_arch(), np.random.default_rng(1), feature_scale=1e6)
        feature = rng.standard_normal(6) * 1e-6
        label_scaled, probs_scaled = predict_codeword(model, feature)
        model_unit = init_model(small_arch(), np.random.default_rng(1), feature_scale=1.0)
        label_unit, probs_unit = predict_codeword(model_unit, feature * 1e6)
        assert label_scaled == label_unit
        np.testing.assert_allclose(probs_scaled, probs_unit, atol=1e-12)


class TestBatchNormInference:
    def test_running_statistics_converge_to_population(self):
        # after many identical-distribution batches, infer-mode outputs track
        # train-mode outputs on a large batch
        rng = np.random.default_rng(0)
        model = init_model(small_arch(), np.random.default_rng(1))
        cfg = TrainingConfig(batch_size=256, learning_rate=1e-3, max_epochs=8, seed=2)
        feats = rng.standard_normal((4000, 6)).astype(np.float32)
        labels = (feats[:, 0] > 0).astype(int)
        train(model, feats, labels, cfg)
        batch = rng.standard_normal((2000, 6))
        infer_probs, _ = forward(model, batch, mode="infer")
        train_probs, _ = forward(model, batch, mode="train")
        assert np.mean(np.abs(infer_probs - train_probs)) < 0.05


class TestSerialization:
    def test_round_trip(self, tmp_path, rng):
        arch = MlpArchitecture(layer_widths=(6, 4, 3, 3, 2), leaky_slope=0.02)
        model = init_model(arch, np.random.default_rng(8), feature_scale=123.5, label_layout_hash=0xDEADBEEF)
        model.bn_mean = [rng.standard_normal(len(m)) for m in model.bn_mean]
        path = tmp_path / "model.rism"
        save_model(model, path)
        back = load_model(path)
        assert back.arch == model.arch
        assert back.feature_scale == model.feature_scale
        assert back.label_layout_hash == model.label_layout_hash
        for a, b in zip(model.weights, back.weights):
            np.testing.assert_array_equal(a, b)
        for a, b in zip(model.bn_mean, back.bn_mean):
            np.testing.assert_array_equal(a, b)

    def test_load_validates_label_layout(self, tmp_path):
        model = init_model(small_arch(), np.random.default_rng(0), label_layout_hash=111)
        path = tmp_path / "model.rism"
        save_model(model, path)
        load_model(path, expected_label_layout_hash=111)
        with pytest.raises(ValueError):
            load_model(path, expected_label_layout_hash=222)

    def test_rejects_garbage_file(self, tmp_path):
        path = tmp_path / "bogus.rism"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(ValueError):
            load_model(path)
