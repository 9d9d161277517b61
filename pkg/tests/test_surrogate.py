import numpy as np
import pytest

from chanassign import scenario as sc, surrogate as sg
from chanassign.errors import (DecodingError, DimensionError, EncodingError,
                               ParameterError, TrainingError)


class TestLabelCodec:
    def test_identity_matrix_encodes_to_1_2(self):
        assert (sg.encode_labels(np.eye(2, dtype=np.int8)) == [1, 2]).all()

    def test_swap_matrix_encodes_to_2_1(self):
        x = np.array([[0, 1], [1, 0]], dtype=np.int8)
        assert (sg.encode_labels(x) == [2, 1]).all()

    def test_4x2_read_off(self):
        # users 0 and 2 on channel 1, users 1 and 3 on channel 2
        x = np.array([[1, 0], [0, 1], [1, 0], [0, 1]], dtype=np.int8)
        assert (sg.encode_labels(x) == [1, 2, 1, 2]).all()

    def test_decode_is_the_inverse(self):
        assert (sg.decode_labels([1, 2], (2, 2, 1)) == np.eye(2)).all()

    def test_roundtrip_on_random_labels(self):
        rng = np.random.default_rng(0)
        base = np.repeat(np.arange(1, 4), 2)  # (6,3,2)
        for _ in range(1000):
            lab = rng.permutation(base)
            x = sg.decode_labels(lab, (6, 3, 2))
            assert (sg.encode_labels(x) == lab).all()

    def test_quota_violation_rejected(self):
        with pytest.raises(DecodingError):
            sg.decode_labels([1, 1], (2, 2, 1))

    def test_bad_matrix_rejected(self):
        with pytest.raises(EncodingError):
            sg.encode_labels(np.ones((2, 2), dtype=np.int8))
        with pytest.raises(EncodingError):
            sg.encode_labels(np.array([[0.5, 0.5], [1, 0]]))


class TestMlpForward:
    def test_zero_network_outputs_zero(self):
        m = sg.init_mlp([3, 4, 2], seed=0)
        for w in m.weights:
            w[:] = 0.0
        out = sg.mlp_forward(m, np.ones(3))
        assert (out == 0.0).all()

    def test_zero_weights_keep_the_output_bias(self):
        m = sg.init_mlp([3, 4, 2], seed=0)
        for w in m.weights:
            w[:] = 0.0
        m.biases[-1][:] = [1.5, -2.0]
        assert (sg.mlp_forward(m, np.ones(3)) == [1.5, -2.0]).all()

    def test_single_linear_layer_is_wx_plus_b(self):
        m = sg.MlpModel(layer_sizes=[2, 2],
                        weights=[np.array([[1.0, 2.0], [3.0, 4.0]])],
                        biases=[np.array([0.5, -0.5])])
        out = sg.mlp_forward(m, np.array([1.0, 1.0]))
        assert out == pytest.approx([4.5, 5.5])

    def test_shape_mismatch(self):
        m = sg.init_mlp([3, 2], seed=0)
        with pytest.raises(DimensionError):
            sg.mlp_forward(m, np.ones(4))


class TestMlpGradient:
    def test_zero_gradient_at_the_optimum(self):
        m = sg.init_mlp([2, 3, 1], seed=1)
        x = np.array([[0.3, -0.2], [0.1, 0.5]])
        y = sg.mlp_forward(m, x)
        gw, gb, loss = sg.mlp_gradient(m, x, y)
        assert loss == 0.0
        assert all((g == 0).all() for g in gw + gb)

    def test_matches_central_finite_differences(self):
        rng = np.random.default_rng(2)
        m = sg.init_mlp([3, 5, 4, 2], seed=3)
        x = rng.normal(size=(8, 3))
        y = rng.normal(size=(8, 2))
        gw, gb, _ = sg.mlp_gradient(m, x, y)
        params = m.weights + m.biases
        grads = gw + gb
        step = 1e-5
        for _ in range(100):
            k = int(rng.integers(len(params)))
            idx = tuple(rng.integers(s) for s in params[k].shape)
            orig = params[k][idx]
            params[k][idx] = orig + step
            up = sg.mlp_loss(m, x, y)
            params[k][idx] = orig - step
            dn = sg.mlp_loss(m, x, y)
            params[k][idx] = orig
            fd = (up - dn) / (2 * step)
            assert grads[k][idx] == pytest.approx(fd, rel=1e-4, abs=1e-10)

    def test_gradient_scales_with_targets_at_zero_network(self):
        m = sg.init_mlp([2, 3, 2], seed=4)
        for w in m.weights:
            w[:] = 0.0
        for b in m.biases:
            b[:] = 0.0
        x = np.ones((4, 2))
        y = np.array([[1.0, -1.0]] * 4)
        _, gb1, _ = sg.mlp_gradient(m, x, y)
        _, gb2, _ = sg.mlp_gradient(m, x, 2 * y)
        assert np.allclose(gb2[-1], 2 * gb1[-1])


class TestTrain:
    def test_adam_descends_on_a_convex_toy(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(256, 1))
        y = 3.0 * x + 1.0
        model = sg.MlpModel(layer_sizes=[1, 1],
                            weights=[np.zeros((1, 1))],
                            biases=[np.zeros(1)])
        cfg = sg.TrainConfig(epochs=30, batch_size=32, optimizer="adam",
                             learning_rate=1e-2, seed=6)
        _, hist = sg.train(model, x, y, cfg)
        for a, b in zip(hist[5:], hist[6:]):
            assert b <= a + 1e-9

    def test_customize_switch_does_not_regress_at_the_switch(self):
        ds = sc.generate_dataset(31, 2000, (4, 4, 1))
        split = sc.split_dataset(ds, 31)
        transform = sg.fit_feature_transform(split.train.features)
        x = transform.apply(split.train.features)
        y = split.train.targets.astype(float) - split.train.targets.mean()
        model = sg.init_mlp([16, 20, 20, 20, 4], seed=7)
        cfg = sg.TrainConfig(epochs=20, optimizer="customize_switch",
                             learning_rate=3e-3, seed=8)
        _, hist = sg.train(model, x, y, cfg)
        switch = cfg.resolved_switch_epoch()
        assert hist[switch] <= hist[switch - 1] * 1.02

    def test_same_seed_gives_identical_weights(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(64, 2))
        y = rng.normal(size=(64, 1))
        model = sg.init_mlp([2, 4, 1], seed=10)
        cfg = sg.TrainConfig(epochs=5, batch_size=16, seed=11)
        m1, h1 = sg.train(model, x, y, cfg)
        m2, h2 = sg.train(model, x, y, cfg)
        assert h1 == h2
        assert all((a == b).all() for a, b in zip(m1.weights, m2.weights))

    def test_divergence_raises_with_history(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=(64, 2)) * 1e6
        y = rng.normal(size=(64, 1)) * 1e6
        model = sg.init_mlp([2, 4, 1], seed=13)
        cfg = sg.TrainConfig(epochs=200, optimizer="sgd_momentum",
                             sgd_learning_rate=10.0, seed=14)
        with pytest.raises(TrainingError) as err:
            sg.train(model, x, y, cfg)
        assert len(err.value.history) > 0

    def test_config_validation(self):
        with pytest.raises(ParameterError):
            sg.TrainConfig(epochs=0).validate()
        with pytest.raises(ParameterError):
            sg.TrainConfig(optimizer="rmsprop").validate()
        with pytest.raises(ParameterError):
            sg.TrainConfig(epochs=10, switch_epoch=11).validate()


class TestPermutationDecode:
    def test_worked_example(self):
        out = sg.permutation_decode([2.15, 0.76, 4.43, 1.55], (4, 4, 1))
        assert (out == [3, 1, 4, 2]).all()

    def test_integer_labels_pass_through(self):
        for lab in ([1, 2], [2, 1]):
            assert (sg.permutation_decode(lab, (2, 2, 1)) == lab).all()
        lab = [2, 1, 1, 2]
        assert (sg.permutation_decode(lab, (4, 2, 2)) == lab).all()

    def test_rank_then_group_for_shared_channels(self):
        out = sg.permutation_decode([1.9, 1.1, 0.4, 1.5], (4, 2, 2))
        assert (out == [2, 1, 1, 2]).all()

    def test_invariant_under_monotone_transforms(self):
        rng = np.random.default_rng(15)
        for _ in range(200):
            raw = rng.normal(size=6)
            base = sg.permutation_decode(raw, (6, 3, 2))
            assert (sg.permutation_decode(np.exp(raw), (6, 3, 2)) == base).all()
            assert (sg.permutation_decode(3.0 * raw + 7.0, (6, 3, 2)) == base).all()

    def test_output_is_always_feasible(self):
        rng = np.random.default_rng(16)
        raws = rng.normal(size=(2000, 6)) * 10.0 ** rng.integers(-3, 4, size=(2000, 1))
        labels = sg.permutation_decode(raws, (6, 2, 3))
        counts = (labels[:, :, None] == np.arange(1, 3)).sum(axis=1)
        assert (counts == 3).all()

    def test_ties_break_to_the_lowest_index(self):
        out = sg.permutation_decode([1.0, 1.0, 0.0, 2.0], (4, 4, 1))
        assert (out == [2, 3, 1, 4]).all()


def _synthetic_split(dims, n_train=300, n_val=120, n_test=60, seed=0):
    """Split dataset with random gains and random feasible labels."""
    m, n, a = dims
    rng = np.random.default_rng(seed)
    base = np.repeat(np.arange(1, n + 1), a)

    def part(count):
        feats = rng.lognormal(size=(count, m * n))
        labs = np.stack([rng.permutation(base) for _ in range(count)])
        return sc.Dataset(features=feats, targets=labs, dims=dims,
                          bandwidth=1.0, noise_density=1.0)

    split = sc.SplitDataset(train=part(n_train), validation=part(n_val),
                            test=part(n_test))
    stats = None
    return split


class TestStacking:
    def test_top_input_width_is_bases_times_users(self):
        # three bases and eight users -> the top model consumes width 24
        split = _synthetic_split((8, 4, 2))
        bases = [sg.init_mlp([32, 10, 8], seed=k) for k in range(3)]
        cfg = sg.TrainConfig(epochs=2, seed=1)
        ens = sg.stack_train(bases, split, cfg)
        assert ens.top_model.layer_sizes[0] == 24

        split4 = _synthetic_split((4, 4, 1))
        bases4 = [sg.init_mlp([16, 10, 4], seed=k) for k in range(3)]
        ens4 = sg.stack_train(bases4, split4, cfg)
        assert ens4.top_model.layer_sizes[0] == 12

    def test_bases_are_not_refit(self):
        split = _synthetic_split((4, 2, 2))
        bases = [sg.init_mlp([8, 10, 4], seed=k) for k in range(3)]
        before = [[w.copy() for w in b.weights] for b in bases]
        sg.stack_train(bases, split, sg.TrainConfig(epochs=2, seed=2))
        for b, snap in zip(bases, before):
            assert all((w == s).all() for w, s in zip(b.weights, snap))

    def test_identical_bases_still_train(self):
        split = _synthetic_split((4, 2, 2))
        base = sg.init_mlp([8, 10, 4], seed=5)
        ens = sg.stack_train([base, base.copy(), base.copy()], split,
                             sg.TrainConfig(epochs=2, seed=3))
        out = sg.mlp_forward(ens.top_model, np.zeros(12))
        assert np.isfinite(out).all()

    def test_needs_a_validation_split_and_two_bases(self):
        split = _synthetic_split((4, 2, 2))
        empty = sc.Dataset(features=np.empty((0, 8)),
                           targets=np.empty((0, 4), dtype=np.int64),
                           dims=(4, 2, 2), bandwidth=1.0, noise_density=1.0)
        broken = sc.SplitDataset(train=split.train, validation=empty,
                                 test=split.test)
        bases = [sg.init_mlp([8, 10, 4], seed=k) for k in range(3)]
        with pytest.raises(ParameterError):
            sg.stack_train(bases, broken)
        with pytest.raises(ParameterError):
            sg.stack_train(bases[:1], split)

    def test_stacking_never_consults_test_data(self):
        split = _synthetic_split((4, 2, 2), seed=21)
        bases = [sg.init_mlp([8, 10, 4], seed=k) for k in range(3)]
        cfg = sg.TrainConfig(epochs=3, seed=4)
        ens_a = sg.stack_train(bases, split, cfg)
        rng = np.random.default_rng(0)
        split.test.features[:] = rng.lognormal(size=split.test.features.shape)
        ens_b = sg.stack_train(bases, split, cfg)
        assert all((a == b).all() for a, b in
                   zip(ens_a.top_model.weights, ens_b.top_model.weights))


class TestPredictAndAccuracy:
    def test_predictions_are_always_feasible(self):
        split = _synthetic_split((4, 2, 2), seed=30)
        ens, _ = sg.train_ensemble(split, base_cfg=sg.TrainConfig(epochs=2),
                                   seed=1, augment_copies=0)
        labels = sg.predict(ens, split.test.features)
        counts = (labels[:, :, None] == np.arange(1, 3)).sum(axis=1)
        assert (counts == 2).all()

    def test_learns_a_constant_label(self):
        # degenerate task: every sample carries the same target
        dims = (4, 2, 2)
        rng = np.random.default_rng(31)
        feats = rng.lognormal(size=(600, 8))
        labs = np.tile([1, 2, 1, 2], (600, 1))
        ds = sc.Dataset(features=feats, targets=labs, dims=dims,
                        bandwidth=1.0, noise_density=1.0)
        split = sc.split_dataset(ds, 1)
        ens, _ = sg.train_ensemble(split,
                                   base_cfg=sg.TrainConfig(epochs=10),
                                   seed=2, augment_copies=0)
        preds = sg.predict(ens, split.test.features)
        assert sg.accuracy(preds, split.test.targets) >= 0.99

    def test_dimension_mismatch(self):
        split = _synthetic_split((4, 2, 2), seed=32)
        ens, _ = sg.train_ensemble(split, base_cfg=sg.TrainConfig(epochs=1),
                                   seed=3, augment_copies=0)
        with pytest.raises(DimensionError):
            sg.predict(ens, np.ones(9))

    def test_accuracy_examples(self):
        assert sg.accuracy([[3, 1, 4, 2]], [[3, 1, 4, 2]]) == 1.0
        assert sg.accuracy([[3, 1, 2, 4]], [[3, 1, 4, 2]]) == 0.5
        assert sg.accuracy([[1, 2]], [[2, 1]]) == 0.0
        with pytest.raises(DimensionError):
            sg.accuracy([[1, 2]], [[1, 2, 3]])


class TestAugmentation:
    def test_augmented_samples_stay_optimal(self):
        from chanassign import oracle
        ds = sc.generate_dataset(33, 12, (4, 2, 2))
        feats, labs = sg.augment_training_data(ds.features, ds.targets,
                                               (4, 2, 2), copies=3, seed=1)
        assert len(feats) == 4 * len(ds.features)
        for i in range(len(ds.features), len(feats), 7):
            r = feats[i].reshape(4, 2)
            want, _ = oracle.brute_force_rate(r, ds.noise_density * ds.bandwidth,
                                              ds.bandwidth, 2)
            got = sg.decode_labels(labs[i], (4, 2, 2))
            r_got = (r * got).sum(axis=0)
            r_want = (r * sg.decode_labels(want, (4, 2, 2))).sum(axis=0)
            assert np.log2(1 + r_got).sum() == pytest.approx(
                np.log2(1 + r_want).sum(), rel=1e-9)


class TestModelFiles:
    def test_mlp_roundtrip(self, tmp_path):
        m = sg.init_mlp([4, 10, 3], seed=40)
        p = tmp_path / "m.mlp"
        sg.save_mlp(m, p)
        loaded = sg.load_mlp(p)
        x = np.random.default_rng(0).normal(size=(5, 4))
        assert (sg.mlp_forward(loaded, x) == sg.mlp_forward(m, x)).all()
        header = p.read_text().splitlines()[0]
        assert header == "1,4x10x3,tanh"

    def test_ensemble_roundtrip(self, tmp_path):
        split = _synthetic_split((4, 2, 2), seed=41)
        ens, _ = sg.train_ensemble(split, base_cfg=sg.TrainConfig(epochs=1),
                                   seed=4, augment_copies=0)
        manifest = sg.save_ensemble(ens, str(tmp_path / "model"))
        loaded = sg.load_ensemble(manifest)
        x = split.test.features[:7]
        assert (sg.predict(loaded, x) == sg.predict(ens, x)).all()
        assert loaded.transform.kind == ens.transform.kind
        assert loaded.target_offset == ens.target_offset
