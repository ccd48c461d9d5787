import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecbench.data import make_split, sample_communities, synthetic_households
from ecbench.features import build_dataset
from ecbench.harness import (
    GridConfig,
    GridData,
    correlate,
    daily_nmae,
    emit_report,
    mean_sd,
    nmae,
    run_grid,
)
from ecbench.harness.grid import AXES, ResultRecord
from ecbench.models import PersistenceForecaster
from oracles import mean_and_sample_sd


class TestNmae:
    def test_perfect(self):
        assert nmae([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_half(self):
        assert nmae([1.0, 3.0], [2.0, 2.0]) == 50.0

    @settings(max_examples=50)
    @given(st.lists(st.floats(0.1, 100), min_size=1, max_size=30), st.floats(1e-3, 1e3), st.integers(0, 1000))
    def test_scale_invariant_and_non_negative(self, actual, c, seed):
        a = np.array(actual)
        f = a * np.random.default_rng(seed).uniform(0.5, 1.5, a.size)
        base = nmae(f, a)
        assert base >= 0
        assert nmae(c * f, c * a) == pytest.approx(base, rel=1e-9)

    def test_errors(self):
        with pytest.raises(ValueError):
            nmae([1.0], [0.0])
        with pytest.raises(ValueError):
            nmae([1.0, 2.0], [1.0])

    def test_daily_normalises_per_day(self):
        f = np.array([[1.0, 3.0], [0.0, 0.0], [1.0, 1.0]])
        a = np.array([[2.0, 2.0], [0.0, 0.0], [4.0, 4.0]])
        d = daily_nmae(f, a)
        assert d[0] == 50.0 and np.isnan(d[1]) and d[2] == 75.0


class TestCorrelate:
    def test_self_and_sign(self, rng):
        y = rng.random((10, 24))
        X = np.stack([y, -y, np.full_like(y, 3.0)], axis=-1)
        c = correlate(X, y)
        assert c.r[0] == pytest.approx(1.0) and c.r[1] == pytest.approx(-1.0)
        assert c.r[2] == 0.0 and c.constant.tolist() == [False, False, True]

    def test_temperature_negative(self, pool, weather):
        com = sample_communities(pool, 20, 1, seed=0)[0].aggregate
        train, _ = build_dataset(make_split(com, 4, 2013, 12), com, weather)
        assert correlate(train).r[14] < 0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            correlate(np.zeros((3, 24, 2)), np.zeros((3, 23)))


class TestMeanSd:
    def test_degenerate(self):
        m, sd = mean_sd([10.0] * 20)
        assert f"{m:.2f}" == "10.00" and f"{sd:.2f}" == "0.00"

    def test_pair(self):
        m, sd = mean_sd([8.0, 12.0])
        om, osd = mean_and_sample_sd([8.0, 12.0])
        assert (m, sd) == pytest.approx((om, osd))
        assert f"{m:.2f} {sd:.2f}" == "10.00 2.83"

    def test_single_and_empty(self):
        assert mean_sd([4.0]) == (4.0, 0.0)
        assert all(np.isnan(mean_sd([])))


class TestGridConfig:
    def test_default_cells(self):
        cfg = GridConfig()
        cells = cfg.cells()
        assert cells[0]["cell"] == "baseline"
        assert len(cells) == 1 + 4 + 5 + 6 + 1 + 3
        for c in cells[1:]:
            diff = [a for a in AXES if c[a] != cfg.baseline[a]]
            assert diff == [c["axis"]]

    def test_validation(self):
        with pytest.raises(ValueError):
            GridConfig(families=("prophet",))
        with pytest.raises(ValueError):
            GridConfig(baseline={"community_size": 1})


@pytest.fixture(scope="module")
def small_grid(weather):
    pool = synthetic_households(12, weather, seed=4)
    cfg = GridConfig(community_size=(2, 3), train_months=(2, 4, 12), size_class=("0.1k",),
                     transfer_learning=(False,), test_quarter=(4,), repetitions=2,
                     baseline={"community_size": 3, "train_months": 4, "size_class": "0.1k",
                               "transfer_learning": False, "test_quarter": 4},
                     families=("persistence", "knn", "xlstm", "lstm"), epochs=2)  # fmt: skip
    data = GridData(pool, weather)
    return cfg, data, run_grid(cfg, data, seed=11)


class TestRunGrid:
    def test_record_count_and_keys(self, small_grid):
        cfg, _, recs = small_grid
        assert len(recs) == len(cfg.cells()) * cfg.repetitions * len(cfg.families)
        assert len({r.key for r in recs}) == len(recs)
        base = [r for r in recs if r.cell == "baseline" and r.family == "knn"]
        assert len(base) == cfg.repetitions

    def test_unavailable_preset(self, small_grid):
        _, _, recs = small_grid
        x = [r for r in recs if r.family == "xlstm"]
        assert x and all(r.status == "unavailable" for r in x)
        assert all(r.status == "ok" and r.nmae >= 0 for r in recs if r.family != "xlstm")

    def test_persistence_ignores_train_months(self, small_grid):
        _, _, recs = small_grid
        for rep in range(2):
            vals = {r.nmae for r in recs if r.family == "persistence" and r.repetition == rep
                    and r.community_size == 3}  # fmt: skip
            assert len(vals) == 1

    def test_paired_communities_across_axes(self, small_grid):
        _, _, recs = small_grid
        ids = {(r.repetition, r.community_id) for r in recs if r.community_size == 3}
        assert len(ids) == 2

    def test_deterministic_and_worker_independent(self, small_grid):
        cfg, data, recs = small_grid
        again = run_grid(cfg, data, seed=11, workers=2)

        def view(rs):
            return [(r.key, repr(r.nmae), r.status) for r in rs]

        assert view(recs) == view(again)

    def test_failures_recorded(self, weather):
        pool = synthetic_households(4, weather, seed=4)
        cfg = GridConfig(community_size=(2,), train_months=(15,), size_class=("0.1k",), transfer_learning=(False,),
                         test_quarter=(1,), repetitions=1, families=("persistence",),
                         baseline={"community_size": 2, "train_months": 15, "size_class": "0.1k",
                                   "transfer_learning": False, "test_quarter": 1})  # fmt: skip
        (rec,) = run_grid(cfg, GridData(pool, weather))
        assert rec.status == "failed" and "month" in rec.error

    def test_report(self, small_grid, tmp_path):
        cfg, _, recs = small_grid
        paths = emit_report(recs, tmp_path, manifest={"seed": 11})
        with open(paths["results"]) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == len(recs)
        with open(paths["summary"]) as fh:
            summary = list(csv.DictReader(fh))
        assert len(summary) == len(cfg.cells()) * len(cfg.families)
        doc = json.loads(paths["json"].read_text())
        assert doc["manifest"] == {"seed": 11} and doc["n_unavailable"] == 2 * len(cfg.cells())
        table = (tmp_path / "grid_table_train_months.csv").read_text().splitlines()
        assert table[0].startswith("train_months,persistence_mean,persistence_sd")
        assert [line.split(",")[0] for line in table[1:]] == ["2", "4", "12"]


def test_report_degenerate_statistics(tmp_path):
    recs = [ResultRecord("baseline", "baseline", 50, 12, "5k", True, 4, i, f"c{i}", "knn", 0, nmae=10.0)
            for i in range(20)]  # fmt: skip
    paths = emit_report(recs, tmp_path)
    with open(paths["summary"]) as fh:
        (row,) = list(csv.DictReader(fh))
    assert float(row["mean_nmae"]) == 10.0 and float(row["sd_nmae"]) == 0.0 and row["n"] == "20"


def test_report_needs_records(tmp_path):
    with pytest.raises(ValueError):
        emit_report([], tmp_path)


def test_aggregation_reduces_error(weather):
    """Mean persistence nMAE falls as independent noisy households are pooled."""
    pool = synthetic_households(300, weather, seed=9)
    means = []
    for h in (1, 10, 100):
        scores = []
        for com in sample_communities(pool, h, 3, seed=h):
            train, test = build_dataset(make_split(com.aggregate, 4, 2013, 2), com.aggregate, weather)
            scores.append(nmae(PersistenceForecaster().fit(train.X).predict(test.X), test.y))
        means.append(np.mean(scores))
    assert means[0] > means[1] > means[2]
