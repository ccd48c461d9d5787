import csv
import json

import pytest

from ecbench.cli import DEFAULTS, main

SMALL = ["--synthetic-households", "12", "--community-size", "3", "--train-months", "2",
         "--data-start", "2013-06-01", "--data-stop", "2014-01-01"]  # fmt: skip


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _error_json(err):
    return json.loads(err.strip().splitlines()[-1])


class TestExitCodes:
    def test_no_command(self, capsys):
        code, _, err = run([], capsys)
        assert code == 1 and _error_json(err)["error"] == "usage"

    def test_bad_flag(self, capsys):
        code, _, err = run(["grid", "--nonsense"], capsys)
        assert code == 1 and _error_json(err)["exit_code"] == 1

    def test_bad_choice(self, capsys, tmp_path):
        assert run(["train", "--family", "prophet", "--out", str(tmp_path)], capsys)[0] == 1

    def test_missing_input_is_data_error(self, capsys, tmp_path):
        code, _, err = run(["evaluate", "--forecast", str(tmp_path / "nope.csv"), "--out", str(tmp_path)], capsys)
        assert code == 2 and _error_json(err)["type"] == "FileNotFoundError"

    def test_knn_in_train_is_usage(self, capsys, tmp_path):
        assert run(["train", "--family", "knn", "--out", str(tmp_path)], capsys)[0] == 1


class TestConfig:
    def test_unknown_key(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        code, _, err = run(["evaluate", "--config", str(cfg)], capsys)
        assert code == 1 and "bogus" in _error_json(err)["message"]

    def test_flags_override_config(self, capsys, tmp_path):
        fc = tmp_path / "f.csv"
        fc.write_text("day,hour,forecast_kW,actual_kW\n2013-10-01,0,1.0,2.0\n2013-10-01,1,3.0,2.0\n")
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"forecast": str(fc), "out": str(tmp_path / "from_config"), "seed": 5}))
        code, out, _ = run(["evaluate", "--config", str(cfg), "--out", str(tmp_path / "from_flag")], capsys)
        assert code == 0 and "nMAE 50.00%" in out
        written = json.loads((tmp_path / "from_flag" / "config.json").read_text())
        assert written["seed"] == 5 and written["out"].endswith("from_flag")
        assert set(written) == set(DEFAULTS["evaluate"])
        assert not (tmp_path / "from_config").exists()


def test_evaluate_identical_files(capsys, tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("day,hour,load_kW\n2013-10-01,0,1.5\n2013-10-01,1,2.5\n")
    code, out, _ = run(["evaluate", "--forecast", str(f), "--actual", str(f), "--out", str(tmp_path)], capsys)
    assert code == 0 and "nMAE 0.00%" in out
    assert json.loads((tmp_path / "evaluation.json").read_text())["nmae_pct"] == 0.0


def test_forecast_then_evaluate(capsys, tmp_path):
    code, out, _ = run(["forecast", *SMALL, "--family", "persistence", "--out", str(tmp_path)], capsys)
    assert code == 0 and "test nMAE" in out
    printed = out.split("test nMAE ")[1].split("%")[0]
    code, out, _ = run(["evaluate", "--forecast", str(tmp_path / "forecast.csv"), "--out", str(tmp_path / "e")],
                       capsys)  # fmt: skip
    assert code == 0 and out.strip() == f"nMAE {printed}%"


def test_dispatch_zero_capacity(capsys, tmp_path):
    code, out, _ = run(["dispatch", *SMALL, "--capacities", "0", "--families", "persistence", "--days", "3",
                        "--out", str(tmp_path)], capsys)  # fmt: skip
    assert code == 0
    assert out.count("savings 0.00%") == 2
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "dispatch" and "savings" in manifest["outputs"]


GRID = ["grid", *SMALL[:2], "--data-start", "2013-06-01", "--data-stop", "2014-01-01", "--repetitions", "2",
        "--families", "persistence", "knn", "--community-sizes", "2", "3", "--train-months", "2", "4",
        "--size-classes", "0.1k", "--transfer-learning", "off", "--test-quarters", "4"]  # fmt: skip


def test_grid_rerun_identical_and_report(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run([*GRID, "--out", str(a)], capsys)[0] == 0
    assert run([*GRID, "--out", str(b), "--threads", "2"], capsys)[0] == 0
    for name in ("grid_results.csv", "grid_summary.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ma = json.loads((a / "manifest.json").read_text())["outputs"]
    assert "timings" not in ma and ma["results"]["sha256"]

    code, out, _ = run(["report", "--inputs", str(a), "--out", str(tmp_path / "r")], capsys)
    assert code == 0
    with open(a / "grid_summary.csv") as fh, open(tmp_path / "r" / "report_summary.csv") as gh:
        assert list(csv.DictReader(fh)) == list(csv.DictReader(gh))


def test_report_rejects_foreign_csv(capsys, tmp_path):
    bad = tmp_path / "x_results.csv"
    bad.write_text("a,b\n1,2\n")
    assert run(["report", "--inputs", str(bad), "--out", str(tmp_path)], capsys)[0] == 2


@pytest.mark.parametrize("kind", ["profile", "dataset"])
def test_synth(capsys, tmp_path, kind):
    argv = ["synth", "--kind", kind, "--households", "3", "--start", "2013-01-01", "--stop", "2013-02-01",
            "--out", str(tmp_path)]  # fmt: skip
    assert run(argv, capsys)[0] == 0
    assert (tmp_path / "manifest.json").exists() and (tmp_path / "config.json").exists()
