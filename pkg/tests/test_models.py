import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecbench import neural as nt
from ecbench.data import HOUR, DataError, LoadSeries, make_split, weekly_periodic
from ecbench.features import build_dataset
from ecbench.harness import nmae
from ecbench.models import (
    KNNForecaster,
    LSTMForecaster,
    PersistenceForecaster,
    TrainConfig,
    TrainingError,
    TransformerForecaster,
    make_forecaster,
    persistence_forecast,
    pretrain_finetune,
    train,
)
from ecbench.models.networks import build_network
from ecbench.models.presets import PRESETS, count_params, get_preset
from ecbench.models.training import fit_network
from oracles import knn_weighted


class TestPersistence:
    def test_constant_history(self):
        ts = np.arange(24 * 10) * HOUR + np.datetime64("2013-01-01T00", "h")
        s = LoadSeries("c", ts, np.full(ts.size, 5.0))
        assert persistence_forecast(s, "2013-01-09").tolist() == [5.0] * 24

    def test_tuesday_fixture(self):
        # 2013-01-01 is a Tuesday; its load is 1..24, everything else 0
        ts = np.arange(24 * 9) * HOUR + np.datetime64("2013-01-01T00", "h")
        vals = np.zeros(ts.size)
        vals[:24] = np.arange(1, 25)
        s = LoadSeries("t", ts, vals)
        assert persistence_forecast(s, "2013-01-08").tolist() == list(range(1, 25))

    def test_missing_history(self):
        ts = np.arange(24 * 3) * HOUR + np.datetime64("2013-01-01T00", "h")
        with pytest.raises(DataError):
            persistence_forecast(LoadSeries("x", ts, np.ones(ts.size)), "2013-01-03")

    def test_weekly_periodic_zero_error(self, weather):
        load = weekly_periodic("2012-07-01", 86)
        train, test = build_dataset(make_split(load, 4, 2013, 12), load, weather)
        est = PersistenceForecaster().fit(train.X, train.y)
        assert nmae(est.predict(test.X), test.y) == 0.0

    def test_matches_window_lag_column(self, pool, weather):
        train, test = build_dataset(make_split(pool[0], 4, 2013, 2), pool[0], weather)
        pred = PersistenceForecaster().fit(train.X).predict(test.X)
        for i in (0, 40, 91):
            np.testing.assert_array_equal(pred[i], persistence_forecast(pool[0], test.days[i]))

    def test_independent_of_train_months(self, pool, weather):
        scores = set()
        for months in (2, 4, 6, 9, 12, 15):
            train, test = build_dataset(make_split(pool[3], 4, 2013, months), pool[3], weather)
            scores.add(nmae(PersistenceForecaster().fit(train.X).predict(test.X), test.y))
        assert len(scores) == 1


def _knn_with_rows(rows, targets, k):
    est = KNNForecaster(n_neighbors=k)
    est.rows_ = np.asarray(rows, float)
    est.targets_ = np.asarray(targets, float)
    return est


class TestKNN:
    def test_toy_weighting(self):
        rows = np.zeros((2, 20))
        rows[0, 0], rows[1, 0] = 0.25, 0.75
        est = _knn_with_rows(rows, [0.0, 10.0], 2)
        got = est.predict_rows(np.zeros((1, 20)))[0]
        assert got == pytest.approx(knn_weighted([0.25, 0.75], [0.0, 10.0], 2))
        assert got == pytest.approx(2.5)

    def test_exact_match(self, rng):
        rows = rng.standard_normal((30, 20))
        est = _knn_with_rows(rows, np.arange(30.0), 1)
        assert est.predict_rows(rows[[7]])[0] == 7.0

    def test_duplicate_zero_distance_rows_averaged(self, rng):
        rows = rng.standard_normal((5, 20))
        rows[3] = rows[1]
        est = _knn_with_rows(rows, [0, 2, 0, 6, 0], 3)
        assert est.predict_rows(rows[[1]])[0] == 4.0

    def test_equidistant_unweighted(self):
        rows = np.zeros((4, 20))
        for i in range(4):
            rows[i, i] = 1.0
        est = _knn_with_rows(rows, [1, 2, 3, 6], 4)
        assert est.predict_rows(np.zeros((1, 20)))[0] == pytest.approx(3.0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 15))
    def test_convex_combination(self, seed, k):
        r = np.random.default_rng(seed)
        rows, y = r.standard_normal((40, 20)), r.random(40) * 10
        q = r.standard_normal((3, 20))
        est = _knn_with_rows(rows, y, k)
        pred = est.predict_rows(q)
        for qi, p in zip(q, pred):
            d = np.linalg.norm(rows - qi, axis=1)
            nb = y[np.argsort(d, kind="stable")[:k]]
            assert nb.min() - 1e-12 <= p <= nb.max() + 1e-12
            assert p == pytest.approx(knn_weighted(list(d), list(y), k), rel=1e-10)

    def test_too_few_rows(self, rng):
        with pytest.raises(ValueError, match="n_neighbors"):
            KNNForecaster(n_neighbors=40).fit(rng.random((1, 24, 20)), rng.random((1, 24)))

    def test_fit_predict_shapes(self, pool, weather):
        train, test = build_dataset(make_split(pool[0], 4, 2013, 2), pool[0], weather)
        assert KNNForecaster().fit(train.X, train.y).predict(test.X[:3]).shape == (3, 24)


class TestPresets:
    def test_nineteen_presets(self):
        assert len(PRESETS) == 19

    @pytest.mark.parametrize("key", sorted(PRESETS))
    def test_forward_shape_and_finite(self, key):
        rng = np.random.default_rng(0)
        net = build_network(PRESETS[key], rng)
        out = net(nt.Tensor(rng.standard_normal((3, 24, 20)))).data
        assert out.shape == (3, 24) and np.all(np.isfinite(out))

    @pytest.mark.parametrize("family", ["lstm", "transformer", "xlstm"])
    def test_zero_weights_zero_output(self, family):
        net = build_network(get_preset(family, "5k"), 0)
        for p in net.parameters():
            p.data[...] = 0.0
        out = net(nt.Tensor(np.random.default_rng(0).standard_normal((2, 24, 20)))).data
        assert np.all(out == 0)

    def test_comparable_5k(self):
        lstm, trf = count_params(get_preset("lstm", "5k")), count_params(get_preset("transformer", "5k"))
        assert abs(lstm - trf) <= 0.3 * 5000

    @pytest.mark.parametrize("key", sorted(PRESETS))
    def test_doubling_widths_increases_count(self, key):
        p = PRESETS[key]
        assert count_params(p.scaled(2)) > count_params(p)

    def test_unknown_preset(self):
        with pytest.raises(ValueError, match="available"):
            get_preset("xlstm", "0.1k")


class TestTraining:
    def test_stage_boundaries(self):
        cfg = TrainConfig()
        assert [cfg.lr_at(e) for e in (0, 24, 25, 49, 50, 74, 75, 99)] == [
            0.01, 0.01, 0.005, 0.005, 0.001, 0.001, 0.0005, 0.0005]  # fmt: skip

    def test_overfit_single_window(self, rng):
        X, y = rng.standard_normal((1, 24, 20)), 1 + rng.random((1, 24))
        est = LSTMForecaster(batch_size=1).fit(X, y)
        assert np.abs(est.predict(X) - y).mean() < 0.01 * y.mean()
        assert len(est.loss_curve_) == 100

    def test_zero_targets_stage_means_non_increasing(self, rng):
        est = LSTMForecaster(size_class="0.5k").fit(rng.standard_normal((8, 24, 20)), np.zeros((8, 24)))
        c = np.array(est.loss_curve_)
        stages = [c[i * 25 : (i + 1) * 25].mean() for i in range(4)]
        assert all(b <= a + 1e-6 for a, b in zip(stages, stages[1:]))

    def test_same_seed_identical_curves(self, rng):
        X, y = rng.standard_normal((20, 24, 20)), rng.random((20, 24))
        a = TransformerForecaster(size_class="0.5k", epochs=5, batch_size=8, random_state=3).fit(X, y)
        b = TransformerForecaster(size_class="0.5k", epochs=5, batch_size=8, random_state=3).fit(X, y)
        assert a.loss_curve_ == b.loss_curve_
        c = TransformerForecaster(size_class="0.5k", epochs=5, batch_size=8, random_state=4).fit(X, y)
        assert a.loss_curve_ != c.loss_curve_

    def test_nan_loss_aborts(self, rng):
        net = build_network(get_preset("lstm", "0.1k"), 0)
        X = rng.standard_normal((4, 24, 20))
        X[1, 3, 5] = np.nan
        with pytest.raises(TrainingError, match="epoch 0"):
            fit_network(net, X, np.zeros((4, 24)), TrainConfig(epochs=1, batch_size=2), rng)

    def test_train_function(self, rng):
        X, y = rng.standard_normal((6, 24, 20)), rng.random((6, 24))
        ds = type("D", (), {"X": X, "y": y})
        est, curve = train(LSTMForecaster(size_class="0.1k"), ds, TrainConfig(epochs=3, seed=9))
        assert len(curve) == 3 and est.random_state == 9
        with pytest.raises(TypeError):
            train(make_forecaster("knn"), ds, TrainConfig())

    def test_checkpoint_roundtrip(self, tmp_path, rng):
        X, y = rng.standard_normal((6, 24, 20)), rng.random((6, 24))
        est = make_forecaster("xlstm", size_class="0.5k", epochs=2).fit(X, y)
        est.save(tmp_path / "m.ckpt")
        back = type(est).load(tmp_path / "m.ckpt")
        np.testing.assert_array_equal(back.predict(X), est.predict(X))
        assert back.get_params() == est.get_params() | {"lr_stages": list(est.lr_stages)}


class TestTransfer:
    def test_schema_mismatch(self, rng):
        a = type("D", (), {"X": rng.random((3, 24, 20)), "y": rng.random((3, 24))})
        b = type("D", (), {"X": rng.random((3, 24, 19)), "y": rng.random((3, 24))})
        with pytest.raises(ValueError, match="schema"):
            pretrain_finetune(LSTMForecaster(), b, a, TrainConfig(epochs=1))

    def test_pretraining_curve_recorded(self, pool, weather):
        from ecbench.models import synthetic_pretraining_set

        train_ds, _ = build_dataset(make_split(pool[0], 4, 2013, 2), pool[0], weather)
        synth = synthetic_pretraining_set(train_ds, weather)
        assert synth.scaler is train_ds.scaler
        assert synth.days[0] == np.datetime64("2012-07-22")
        est = pretrain_finetune(LSTMForecaster(size_class="0.1k"), synth, train_ds, TrainConfig(epochs=2))
        assert len(est.pretrain_curve_) == 2 and len(est.loss_curve_) == 2

    def test_finetune_on_pretraining_set_no_worse(self, pool, weather):
        """Warm start on the same distribution: no worse than scratch (5 % slack)."""
        from ecbench.models import synthetic_pretraining_set

        target, _ = build_dataset(make_split(pool[0], 4, 2013, 12), pool[0], weather)
        synth = synthetic_pretraining_set(target, weather)
        cfg = TrainConfig(epochs=20, seed=1)
        tuned = pretrain_finetune(TransformerForecaster(size_class="0.5k"), synth, synth, cfg)
        scratch = TransformerForecaster(size_class="0.5k", epochs=20, random_state=1).fit(synth.X, synth.y)
        err_t = np.abs(tuned.predict(synth.X) - synth.y).mean()
        err_s = np.abs(scratch.predict(synth.X) - synth.y).mean()
        assert err_t <= 1.05 * err_s
