import numpy as np
import pytest

from datagen import gen_dataset
from hierarchy import EdgeWeightScheme
from losses import LossConfig, LossKind, PixelBatch, batch_loss
from trainer import (
    CacheMismatchError,
    CheckpointError,
    DivergenceError,
    Gradients,
    Model,
    NoAnnotationsError,
    OptimizerState,
    TrainConfig,
    TrainConfigError,
    adam_step,
    backward,
    forward,
    l1_normalize,
    learning_rate,
    load_checkpoint,
    predict_probabilities,
    save_checkpoint,
    train,
)
from transport import DimensionMismatchError


def _separable(rng, n_images=4, size=8):
    """Two-band images: class 1 is bright in band 0, class 2 in band 1; every pixel annotated."""
    cubes, labels = [], []
    for _ in range(n_images):
        label = rng.integers(1, 3, size=(size, size)).astype(np.int32)
        cube = np.where(label[..., None] == 1, [1.0, 0.1], [0.1, 1.0])
        cube = cube + rng.uniform(0.0, 0.05, size=cube.shape)
        cubes.append(cube.astype(np.float32))
        labels.append(label)
    return cubes, labels


def _cfg(**kwargs) -> TrainConfig:
    defaults = dict(lr=0.01, epochs=3, batch_size=2, pixels_per_image=32, hidden_sizes=(8,), seed=11)
    defaults.update(kwargs)
    return TrainConfig(**defaults)


class TestNormalize:
    def test_examples(self):
        out, zeros = l1_normalize([[2.0, 2.0]])
        np.testing.assert_array_equal(out, [[0.5, 0.5]])
        out, _ = l1_normalize([0.0, 5.0, 0.0])
        np.testing.assert_array_equal(out, [0.0, 1.0, 0.0])
        assert zeros == 0

    def test_scale_invariant(self, rng):
        x = rng.uniform(0.0, 3.0, size=(10, 6))
        np.testing.assert_allclose(l1_normalize(x * 7.5)[0], l1_normalize(x)[0], atol=1e-15)

    def test_zero_pixel_flagged(self):
        out, zeros = l1_normalize([[0.0, 0.0], [1.0, 3.0]])
        assert zeros == 1
        np.testing.assert_array_equal(out[0], [0.0, 0.0])


class TestForwardBackward:
    def test_zero_weights_give_biases(self):
        model = Model(weights=[np.zeros((3, 4)), np.zeros((4, 2))], biases=[np.zeros(4), np.array([0.5, -1.0])])
        logits, _ = forward(model, [0.2, 0.3, 0.5])
        np.testing.assert_array_equal(logits, [0.5, -1.0])

    def test_single_layer_selects_row(self, rng):
        w, b = rng.normal(size=(3, 3)), rng.normal(size=3)
        logits, _ = forward(Model([w], [b]), [0.0, 1.0, 0.0])
        np.testing.assert_allclose(logits, w[1] + b, atol=1e-15)

    def test_matches_plain_loops(self, rng):
        model = Model.initialize((5, 7, 6, 3), rng)
        x = rng.uniform(size=(4, 5))
        logits, _ = forward(model, x)
        for n in range(4):
            a = list(x[n])
            for layer, (w, b) in enumerate(zip(model.weights, model.biases)):
                z = [sum(a[i] * w[i, j] for i in range(w.shape[0])) + b[j] for j in range(w.shape[1])]
                a = z if layer == len(model.weights) - 1 else [max(v, 0.0) for v in z]
            np.testing.assert_allclose(logits[n], a, atol=1e-12)

    def test_rejects_wrong_band_count(self, rng):
        with pytest.raises(DimensionMismatchError):
            forward(Model.initialize((4, 2), rng), np.ones(5))

    def test_zero_upstream(self, rng):
        model = Model.initialize((4, 5, 3), rng)
        _, cache = forward(model, rng.uniform(size=(6, 4)))
        grads = backward(model, cache, np.zeros((6, 3)))
        assert all(not np.any(p) for p in grads.parameters())

    def test_linear_layer_is_outer_product(self, rng):
        model = Model.initialize((4, 3), rng)
        x, upstream = rng.uniform(size=4), rng.normal(size=3)
        _, cache = forward(model, x)
        grads = backward(model, cache, upstream)
        np.testing.assert_allclose(grads.weights[0], np.outer(x, upstream), atol=1e-15)
        np.testing.assert_allclose(grads.biases[0], upstream, atol=1e-15)

    def test_cache_mismatch(self, rng):
        model = Model.initialize((4, 3), rng)
        _, cache = forward(Model.initialize((4, 5, 3), rng), np.ones(4))
        with pytest.raises(CacheMismatchError):
            backward(model, cache, np.zeros(3))

    def test_flat_round_trip(self, rng):
        model = Model.initialize((4, 5, 3), rng)
        restored = Model.from_flat(model.layer_sizes, model.flat())
        np.testing.assert_array_equal(restored.flat(), model.flat())
        with pytest.raises(DimensionMismatchError):
            Model.from_flat(model.layer_sizes, model.flat()[:-1])

    @pytest.mark.parametrize("scheme", ["leaf", "top", "equal", "hier"])
    @pytest.mark.parametrize("kind", ["ce", "w", "wce", "tce"])
    def test_end_to_end_finite_differences(self, rng, balanced_tree, kind, scheme):
        cfg = LossConfig(LossKind(kind), EdgeWeightScheme.from_name(scheme))
        n_pixels, h = 2, 1e-6
        mask = np.ones(n_pixels, dtype=bool)
        for _ in range(100):
            model = Model.initialize((3, 4, balanced_tree.C), rng)
            x = l1_normalize(rng.uniform(0.1, 1.0, size=(n_pixels, 3)))[0]
            y = rng.integers(0, balanced_tree.C, size=n_pixels)

            def value(flat):
                logits, _ = forward(Model.from_flat(model.layer_sizes, flat), x)
                return batch_loss(PixelBatch(logits, y, mask), cfg, balanced_tree).value

            logits, cache = forward(model, x)
            upstream = batch_loss(PixelBatch(logits, y, mask), cfg, balanced_tree).grad
            analytic = np.concatenate([p.reshape(-1) for p in backward(model, cache, upstream).parameters()])
            flat = model.flat()
            numeric = np.empty_like(flat)
            for i in range(flat.size):
                step = np.zeros_like(flat)
                step[i] = h
                numeric[i] = (value(flat + step) - value(flat - step)) / (2 * h)
            np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-6)


class TestAdam:
    def _model(self):
        return Model(weights=[np.array([[1.5, -2.0, 2.5], [-3.0, 1.75, -1.5]])], biases=[np.array([2.0, -2.25, 3.0])])

    def _grads(self, model):
        return Gradients(weights=[w.copy() for w in model.weights], biases=[b.copy() for b in model.biases])

    def test_zero_gradients(self):
        model = self._model()
        state = OptimizerState(
            first_moment=tuple(np.ones_like(p) for p in model.parameters()),
            second_moment=tuple(np.ones_like(p) for p in model.parameters()),
            step=0,
        )
        zeros = Gradients(weights=[np.zeros_like(model.weights[0])], biases=[np.zeros_like(model.biases[0])])
        _, after = adam_step(model, state, zeros, _cfg())
        np.testing.assert_allclose(after.first_moment[0], 0.9)
        assert after.step == 1

        fresh = OptimizerState.for_model(model)
        updated, _ = adam_step(model, fresh, zeros, _cfg())
        np.testing.assert_array_equal(updated.flat(), model.flat())

    def test_first_step(self):
        model = self._model()
        cfg = _cfg(lr=0.1)
        grads = self._grads(model)
        updated, state = adam_step(model, OptimizerState.for_model(model), grads, cfg)
        g = np.concatenate([p.reshape(-1) for p in grads.parameters()])
        expected = model.flat() - 0.1 * g / (np.abs(g) + cfg.adam_epsilon)
        np.testing.assert_allclose(updated.flat(), expected, atol=1e-12)
        assert state.step == 1

    def test_non_finite_gradient(self):
        model = self._model()
        grads = self._grads(model)
        grads.biases[0][1] = np.nan
        with pytest.raises(DivergenceError) as exc:
            adam_step(model, OptimizerState.for_model(model), grads, _cfg())
        assert exc.value.step == 1

    def test_quadratic_bowl(self):
        model, cfg = self._model(), _cfg(lr=0.01, lr_gamma=1.0)
        state = OptimizerState.for_model(model)
        values = []
        for _ in range(100):
            values.append(0.5 * float(np.sum(model.flat() ** 2)))
            model, state = adam_step(model, state, self._grads(model), cfg)
        assert np.all(np.diff(values) < 0)
        assert state.step == 100

    def test_schedule(self):
        cfg = _cfg(lr=0.003, lr_gamma=0.9)
        for epoch in range(5):
            assert learning_rate(cfg, epoch) == 0.003 * 0.9 ** epoch


class TestTrain:
    def test_separable_classes(self, rng, two_leaf_tree):
        cubes, labels = _separable(rng)
        result = train(cubes, labels, two_leaf_tree, _cfg(lr=0.02, epochs=150, pixels_per_image=64))
        correct = total = 0
        for cube, label in zip(cubes, labels):
            predicted = predict_probabilities(result.model, cube).argmax(axis=1) + 1
            correct += int(np.sum(predicted == label.reshape(-1)))
            total += label.size
        assert correct / total >= 0.99

    def test_zero_learning_rate_keeps_loss(self, rng, two_leaf_tree):
        cubes, labels = _separable(rng)
        # Every annotated pixel is drawn each epoch, so only the batch order varies
        result = train(cubes, labels, two_leaf_tree, _cfg(lr=0.0, epochs=4, pixels_per_image=64))
        assert result.losses == pytest.approx([result.losses[0]] * 4, rel=1e-12)

    def test_deterministic(self, small_spec, balanced_tree):
        dataset = gen_dataset(balanced_tree, small_spec)
        cubes, labels = dataset.cubes(range(4)), dataset.labels(range(4))
        first = train(cubes, labels, balanced_tree, _cfg(loss=LossConfig(LossKind.TREE_CE, EdgeWeightScheme.from_name("hier"))))
        second = train(cubes, labels, balanced_tree, _cfg(loss=LossConfig(LossKind.TREE_CE, EdgeWeightScheme.from_name("hier"))))
        np.testing.assert_array_equal(first.model.flat(), second.model.flat())
        assert first.losses == second.losses

    def test_only_annotated_pixels_reach_gradients(self, small_spec, balanced_tree):
        dataset = gen_dataset(balanced_tree, small_spec)
        result = train(dataset.cubes(range(8)), dataset.labels(range(8)), balanced_tree, _cfg())
        assert result.unannotated_seen == 0
        assert result.steps == 3 * 4
        assert [stats.epoch for stats in result.trace] == [0, 1, 2]

    def test_no_annotations(self, two_leaf_tree):
        cubes = [np.ones((4, 4, 2), dtype=np.float32)]
        labels = [np.full((4, 4), -1, dtype=np.int32)]
        with pytest.raises(NoAnnotationsError):
            train(cubes, labels, two_leaf_tree, _cfg())

    def test_leaf_tree_ce_trains_like_ce(self, small_spec, balanced_tree):
        dataset = gen_dataset(balanced_tree, small_spec)
        cubes, labels = dataset.cubes(range(4)), dataset.labels(range(4))
        ce = train(cubes, labels, balanced_tree, _cfg(loss=LossConfig(LossKind.CE)))
        tce = train(cubes, labels, balanced_tree, _cfg(loss=LossConfig(LossKind.TREE_CE, EdgeWeightScheme.from_name("leaf"))))
        np.testing.assert_array_equal(tce.model.flat(), ce.model.flat())
        assert tce.losses == ce.losses

    def test_zero_epochs_is_initialization(self, rng, two_leaf_tree):
        cubes, labels = _separable(rng)
        cfg = _cfg(epochs=0, hidden_sizes=(4, 3))
        result = train(cubes, labels, two_leaf_tree, cfg)
        expected = Model.initialize((2, 4, 3, 2), np.random.default_rng(cfg.seed))
        np.testing.assert_array_equal(result.model.flat(), expected.flat())
        assert result.trace == []


class TestTrainConfig:
    def test_validation(self):
        with pytest.raises(TrainConfigError) as exc:
            TrainConfig(lr_gamma=0.0)
        assert exc.value.field_name == "lr_gamma"
        with pytest.raises(TrainConfigError):
            TrainConfig(batch_size=0)
        with pytest.raises(TrainConfigError):
            TrainConfig(adam_beta1=1.0)

    def test_dict_round_trip(self):
        cfg = TrainConfig.from_dict({"lr": 0.005, "hidden_sizes": [16], "loss": "wce", "scheme": "hier"})
        assert cfg.loss.label == "wce-hier"
        assert TrainConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_key(self):
        with pytest.raises(TrainConfigError):
            TrainConfig.from_dict({"learning_rate": 0.1})

    def test_hash_tracks_values(self):
        assert TrainConfig().config_hash() == TrainConfig().config_hash()
        assert TrainConfig().config_hash() != TrainConfig(seed=1).config_hash()

    def test_overrides_skip_none(self):
        cfg = TrainConfig().with_overrides(epochs=3, lr=None)
        assert cfg.epochs == 3
        assert cfg.lr == TrainConfig().lr


class TestCheckpoint:
    def test_round_trip(self, tmp_path, rng, hier_tree):
        model = Model.initialize((8, 6, hier_tree.C), rng)
        cfg = _cfg()
        path = save_checkpoint(tmp_path / "model.ckpt", model, cfg, hier_tree.digest(), epochs_trained=3)
        restored, header = load_checkpoint(path)
        np.testing.assert_array_equal(restored.flat(), model.flat())
        assert header.layer_sizes == (8, 6, hier_tree.C)
        assert header.config_hash == cfg.config_hash()
        assert header.tree_digest == hier_tree.digest()
        assert TrainConfig.from_dict(header.config) == cfg

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bogus.ckpt"
        path.write_bytes(b"NOPE" + bytes(16))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    @pytest.mark.parametrize("cut", [3, 8])
    def test_truncated(self, tmp_path, rng, hier_tree, cut):
        path = save_checkpoint(tmp_path / "model.ckpt", Model.initialize((4, hier_tree.C), rng), _cfg(), "x", 0)
        path.write_bytes(path.read_bytes()[:-cut])
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_missing(self, tmp_path):
        with pytest.raises(CheckpointError) as exc:
            load_checkpoint(tmp_path / "absent.ckpt")
        assert isinstance(exc.value.original_error, OSError)
