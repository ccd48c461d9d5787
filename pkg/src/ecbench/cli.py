"""``ecbench`` command line.

Every subcommand accepts ``--seed``, ``--out``, ``--config`` (a JSON object
whose keys are the subcommand's option names with underscores) and
``--threads``. Explicit flags override the config file. Each run writes
``config.json`` (the fully resolved options, usable with ``--config``) and
``manifest.json`` (version, command, resolved options, output checksums) to
the output directory.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver or training failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import (
    DataError,
    HolidayCalendar,
    SyntheticSpot,
    build_tariff,
    common_range,
    load_holidays,
    load_prices,
    load_smart_meter,
    load_weather,
    make_split,
    sample_communities,
    synthetic_households,
    synthetic_weather,
    write_holidays,
    write_loads,
    write_prices,
    write_weather,
)
from .dispatch import (
    BatteryParams,
    DispatchError,
    InfeasibleError,
    NodeLimitError,
    PerfectForecast,
    TableForecast,
    build_battery,
    simulate_mpc,
)
from .dispatch.simplex import SimplexError
from .features import build_dataset
from .harness import GridConfig, GridData, GridInterrupted, emit_cost_reports, emit_report, nmae, run_grid
from .harness.grid import ALL_FAMILIES, ResultRecord
from .models import DEEP_FAMILIES, DeepForecaster, TrainConfig, TrainingError, make_forecaster, pretrain_finetune
from .models.transfer import synthetic_pretraining_set
from .neural.checkpoint import CheckpointError
from .synthgen import PROFILE_TYPES, SyntheticSpec, generate_profile

logger = logging.getLogger("ecbench")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FAILURE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- options

_COMMON = {"seed": 0, "out": "out", "threads": 1}

_DATA = {
    "loads": None,
    "weather": None,
    "holidays": None,
    "resolution": "60min",
    "synthetic_households": 120,
    "data_start": "2012-07-01",
    "data_stop": "2014-03-01",
}

_SETTING = {
    "community_size": 10,
    "repetition": 0,
    "test_quarter": 4,
    "test_year": 2013,
    "train_months": 12,
}

_TRAINING = {"size_class": "5k", "epochs": 100, "batch_size": 256, "transfer_learning": False, "n_neighbors": 40}

DEFAULTS = {
    "ingest": {**_COMMON, "loads": None, "weather": None, "holidays": None, "prices": None, "resolution": "30min",
               "region": ""},
    "synth": {**_COMMON, "kind": "dataset", "households": 120, "start": "2012-07-01", "stop": "2014-03-01",
              "profile_type": "household", "annual_energy": 3000.0, "spot_base": 0.10, "spot_amp": 0.05},
    "train": {**_COMMON, **_DATA, **_SETTING, **_TRAINING, "family": "lstm"},
    "forecast": {**_COMMON, **_DATA, **_SETTING, **_TRAINING, "family": "persistence", "checkpoint": None},
    "evaluate": {**_COMMON, "forecast": None, "actual": None, "column": None},
    "grid": {**_COMMON, **_DATA, "repetitions": 20, "epochs": 100, "families": list(ALL_FAMILIES),
             "community_sizes": None, "train_months": None, "size_classes": None, "transfer_learning": None,
             "test_quarters": None, "test_year": 2013},
    "dispatch": {**_COMMON, **_DATA, **_SETTING, **_TRAINING, "prices": None, "network_fee": 0.08, "tax_rate": 0.20,
                 "spot_base": 0.10, "spot_amp": 0.05, "capacities": None, "families": ["persistence", "knn"],
                 "days": None},
    "report": {**_COMMON, "inputs": []},
}  # fmt: skip

CHOICES = {
    "family": tuple(ALL_FAMILIES),
    "families": tuple(ALL_FAMILIES),
    "resolution": ("30min", "60min"),
    "kind": ("dataset", "profile"),
    "profile_type": tuple(PROFILE_TYPES),
    "test_quarter": (1, 2, 3, 4),
}

HELP = {
    "ingest": "validate and normalise raw smart-meter, weather, holiday and price CSVs",
    "synth": "write a synthetic dataset or a standard load profile",
    "train": "fit one deep model on one community and write a checkpoint",
    "forecast": "write day-ahead forecasts for the test quarter",
    "evaluate": "compute nMAE between forecast and actual CSVs",
    "grid": "run the sensitivity grid",
    "dispatch": "run the battery dispatch case study",
    "report": "aggregate grid result CSVs into summary tables",
}


def _add_option(p: argparse.ArgumentParser, name: str, default) -> None:
    flag = "--" + name.replace("_", "-")
    kw = {"dest": name, "default": argparse.SUPPRESS}
    if name in CHOICES:
        kw["choices"] = CHOICES[name]
    if isinstance(default, bool) or name == "transfer_learning":
        kw["type"] = _parse_bool
        kw["metavar"] = "{on,off}"
        if name == "transfer_learning" and p.prog.endswith("grid"):
            kw["nargs"] = "+"
    elif isinstance(default, list) or name in ("community_sizes", "size_classes", "test_quarters", "capacities",
                                               "inputs") or (name == "train_months" and p.prog.endswith("grid")):
        kw["nargs"] = "+"
        kw["type"] = _list_type(name)
    elif isinstance(default, int):
        kw["type"] = int
    elif isinstance(default, float):
        kw["type"] = float
    elif name in ("days",):
        kw["type"] = int
    p.add_argument(flag, **kw)


def _list_type(name):
    if name in ("community_sizes", "train_months", "test_quarters"):
        return int
    if name == "capacities":
        return float
    return str


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).lower()
    if t in ("on", "true", "1", "yes"):
        return True
    if t in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ecbench", description="Day-ahead load forecasting and battery dispatch benchmark")
    parser.add_argument("--version", action="version", version=f"ecbench {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for cmd, defaults in DEFAULTS.items():
        p = sub.add_parser(cmd, help=HELP[cmd], description=HELP[cmd])
        p.add_argument("--config", default=None, help="JSON file with option values")
        for name, default in defaults.items():
            _add_option(p, name, default)
    return parser


def resolve_options(command: str, ns: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    opts = dict(DEFAULTS[command])
    if ns.config:
        try:
            cfg = json.loads(Path(ns.config).read_text())
        except FileNotFoundError:
            raise UsageError(f"config file {ns.config} not found") from None
        except json.JSONDecodeError as e:
            raise UsageError(f"config file {ns.config} is not valid JSON: {e}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = sorted(set(cfg) - set(opts))
        if unknown:
            raise UsageError(f"unknown config keys for '{command}': {unknown}; allowed: {sorted(opts)}")
        opts.update(cfg)
    for name in DEFAULTS[command]:
        if hasattr(ns, name):
            opts[name] = getattr(ns, name)
    for name, allowed in CHOICES.items():
        if name in opts and opts[name] is not None:
            values = opts[name] if isinstance(opts[name], list) else [opts[name]]
            bad = [v for v in values if v not in allowed]
            if bad:
                raise UsageError(f"invalid {name} {bad}; choose from {list(allowed)}")
    if opts["threads"] < 1:
        raise UsageError("--threads must be >= 1")
    return opts


# ---------------------------------------------------------------- data helpers


def _calendar(opts) -> HolidayCalendar | None:
    return load_holidays(opts["holidays"]) if opts.get("holidays") else None


def _load_pool(opts):
    """(pool, weather, calendar): from files when ``loads`` is given, otherwise synthetic and seeded."""
    calendar = _calendar(opts)
    if opts.get("loads"):
        if not opts.get("weather"):
            raise UsageError("--weather is required together with --loads")
        pool = common_range(load_smart_meter(opts["loads"], opts["resolution"]))
        weather = load_weather(opts["weather"])
        return pool, weather, calendar
    weather = synthetic_weather(opts["data_start"], opts["data_stop"], seed=opts["seed"])
    pool = synthetic_households(opts["synthetic_households"], weather, calendar, seed=opts["seed"] + 1)
    return pool, weather, calendar


def _community(opts, pool):
    h, rep = opts["community_size"], opts["repetition"]
    return sample_communities(pool, h, rep + 1, seed=opts["seed"])[rep].aggregate


def _datasets(opts):
    pool, weather, calendar = _load_pool(opts)
    load = _community(opts, pool)
    split = make_split(load, opts["test_quarter"], opts["test_year"], opts["train_months"])
    train, test = build_dataset(split, load, weather, calendar)
    return load, weather, calendar, train, test


def _fit(opts, family, train, weather, calendar, seed):
    if family in DEEP_FAMILIES:
        est = make_forecaster(family, size_class=opts["size_class"])
        cfg = TrainConfig(opts["epochs"], opts["batch_size"], seed=seed)
        if opts["transfer_learning"]:
            pretrain_finetune(est, synthetic_pretraining_set(train, weather, calendar), train, cfg)
        else:
            est.set_params(epochs=cfg.epochs, batch_size=cfg.batch_size, random_state=seed).fit(train.X, train.y)
        return est
    if family == "knn":
        return make_forecaster("knn", n_neighbors=opts["n_neighbors"]).fit(train.X, train.y)
    return make_forecaster(family).fit(train.X, train.y)


# ---------------------------------------------------------------- commands


def cmd_ingest(opts, out: Path) -> dict:
    if not opts["loads"]:
        raise UsageError("ingest needs --loads")
    series = load_smart_meter(opts["loads"], opts["resolution"])
    paths = {"loads": out / "loads_hourly.csv"}
    write_loads(paths["loads"], series)
    if opts["weather"]:
        paths["weather"] = out / "weather.csv"
        write_weather(paths["weather"], load_weather(opts["weather"]))
    if opts["holidays"]:
        paths["holidays"] = out / "holidays.csv"
        write_holidays(paths["holidays"], load_holidays(opts["holidays"], opts["region"]))
    if opts["prices"]:
        paths["prices"] = out / "prices.csv"
        write_prices(paths["prices"], load_prices(opts["prices"]))
    print(f"ingested {len(series)} households")
    return paths


def cmd_synth(opts, out: Path) -> dict:
    if opts["kind"] == "profile":
        spec = SyntheticSpec(opts["profile_type"], opts["start"], opts["stop"], opts["annual_energy"],
                             load_holidays(opts["holidays"]) if opts.get("holidays") else HolidayCalendar())  # fmt: skip
        path = out / f"slp_{opts['profile_type']}.csv"
        write_loads(path, [generate_profile(spec)])
        print(f"wrote {path}")
        return {"profile": path}
    weather = synthetic_weather(opts["start"], opts["stop"], seed=opts["seed"])
    pool = synthetic_households(opts["households"], weather, seed=opts["seed"] + 1)
    spot = SyntheticSpot(str(weather.start), len(weather), base=opts["spot_base"], amp=opts["spot_amp"],
                         seed=opts["seed"] + 2).generate()  # fmt: skip
    paths = {"loads": out / "loads.csv", "weather": out / "weather.csv", "spot": out / "spot.csv"}
    write_loads(paths["loads"], pool)
    write_weather(paths["weather"], weather)
    write_prices(paths["spot"], spot)
    print(f"wrote {len(pool)} synthetic households to {out}")
    return paths


def cmd_train(opts, out: Path) -> dict:
    if opts["family"] not in DEEP_FAMILIES:
        raise UsageError(f"train fits deep families {sorted(DEEP_FAMILIES)}; {opts['family']} is fitted by 'forecast'")
    _, weather, calendar, train, _ = _datasets(opts)
    est = _fit(opts, opts["family"], train, weather, calendar, opts["seed"])
    paths = {"checkpoint": out / f"{opts['family']}_{opts['size_class']}.ckpt", "loss": out / "loss_curve.csv"}
    est.save(paths["checkpoint"])
    with open(paths["loss"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "mae_kw"])
        for i, v in enumerate(est.loss_curve_):
            w.writerow([i, f"{v:.6f}"])
    print(f"trained {opts['family']} {opts['size_class']} ({est.n_params()} parameters); "
          f"final train MAE {est.loss_curve_[-1]:.4f} kW")  # fmt: skip
    return paths


def cmd_forecast(opts, out: Path) -> dict:
    _, weather, calendar, train, test = _datasets(opts)
    if opts["checkpoint"]:
        est = DeepForecaster.load(opts["checkpoint"])
    else:
        est = _fit(opts, opts["family"], train, weather, calendar, opts["seed"])
    pred = est.predict(test.X)
    path = out / "forecast.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "hour", "forecast_kW", "actual_kW"])
        for day, f, a in zip(test.days, pred, test.y):
            for h in range(24):
                w.writerow([str(day), h, f"{f[h]:.6f}", f"{a[h]:.6f}"])
    print(f"{est.family}: test nMAE {nmae(pred, test.y):.2f}% over {len(test)} days")
    return {"forecast": path}


def _read_column(path, column):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = rows[0]
    idx = header.index(column) if column in header else None
    if idx is None:
        raise DataError(f"{path}: no column {column!r} (have {header})")
    try:
        return np.array([float(r[idx]) for r in rows[1:]])
    except (ValueError, IndexError) as e:
        raise DataError(f"{path}: bad value in column {column!r}: {e}") from None


def cmd_evaluate(opts, out: Path) -> dict:
    if not opts["forecast"]:
        raise UsageError("evaluate needs --forecast")
    if opts["actual"]:
        column = opts["column"]
        if column is None:
            with open(opts["forecast"], newline="") as fh:
                header = next(csv.reader(fh), [])
            if len(header) < 3:
                raise DataError(f"{opts['forecast']}: expected at least three columns")
            column = header[2]
        f = _read_column(opts["forecast"], column)
        a = _read_column(opts["actual"], column)
    else:
        f = _read_column(opts["forecast"], "forecast_kW")
        a = _read_column(opts["forecast"], "actual_kW")
    if f.shape != a.shape:
        raise DataError(f"forecast has {f.size} values, actual has {a.size}")
    score = nmae(f, a)
    path = out / "evaluation.json"
    path.write_text(json.dumps({"nmae_pct": round(score, 6), "n_values": int(f.size)}, indent=2) + "\n")
    print(f"nMAE {score:.2f}%")
    return {"evaluation": path}


def _grid_config(opts) -> GridConfig:
    kw = {"repetitions": opts["repetitions"], "epochs": opts["epochs"], "families": tuple(opts["families"]),
          "test_year": opts["test_year"]}  # fmt: skip
    mapping = {"community_sizes": "community_size", "train_months": "train_months", "size_classes": "size_class",
               "transfer_learning": "transfer_learning", "test_quarters": "test_quarter"}  # fmt: skip
    base = dict(GridConfig().baseline)
    for opt, axis in mapping.items():
        if opts[opt] is not None:
            values = opts[opt] if isinstance(opts[opt], list) else [opts[opt]]
            if axis == "transfer_learning":
                values = [_parse_bool(v) for v in values]
            kw[axis] = tuple(values)
            if base[axis] not in values:
                base[axis] = values[0]
    kw["baseline"] = base
    return GridConfig(**kw)


def cmd_grid(opts, out: Path) -> dict:
    config = _grid_config(opts)
    pool, weather, calendar = _load_pool(opts)
    data = GridData(pool, weather, calendar)

    def progress(i, n):
        logger.info("grid unit %d/%d", i, n)

    try:
        records = run_grid(config, data, seed=opts["seed"], workers=opts["threads"], progress=progress)
    except GridInterrupted as e:
        if e.records:
            emit_report(e.records, out, manifest={"grid": config.to_dict(), "partial": True})
        raise
    paths = emit_report(records, out, manifest={"grid": config.to_dict()})
    failed = sum(r.status == "failed" for r in records)
    print(f"grid: {len(config.cells())} cells x {config.repetitions} repetitions, {len(records)} records, "
          f"{failed} failed")  # fmt: skip
    return paths


def cmd_dispatch(opts, out: Path) -> dict:
    load, weather, calendar, train, test = _datasets(opts)
    if opts["prices"]:
        spot = load_prices(opts["prices"])
    else:
        spot = SyntheticSpot(str(weather.start), len(weather), base=opts["spot_base"], amp=opts["spot_amp"],
                             seed=opts["seed"] + 2)  # fmt: skip
    tariff = build_tariff(spot, opts["network_fee"], opts["tax_rate"])
    days = list(test.days if opts["days"] is None else test.days[: opts["days"]])
    forecasters = [PerfectForecast(load)]
    for fam in opts["families"]:
        est = _fit(opts, fam, train, weather, calendar, opts["seed"])
        forecasters.append(TableForecast(test.days, est.predict(test.X), name=fam))
    capacities = opts["capacities"]
    batteries = {}
    if capacities is None:
        batteries[f"{12 * opts['community_size']:g}kWh"] = build_battery("per_household", h=opts["community_size"])
    else:
        for c in capacities:
            batteries[f"{c:g}kWh"] = BatteryParams.none() if c == 0 else build_battery("capacity", capacity=c)
    reports = {}
    for label, battery in batteries.items():
        for fc in forecasters:
            reports[f"{fc.name}@{label}"] = simulate_mpc(fc, load, tariff, battery, days)
    for label, rep in reports.items():
        print(f"{label}: savings {rep.savings_pct:.2f}% ({rep.savings:.2f} EUR over {len(days)} days)")
    return emit_cost_reports(reports, out)


def _read_results(path) -> list[ResultRecord]:
    recs = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                recs.append(ResultRecord(
                    cell=row["cell"], axis=row["axis"], community_size=int(row["community_size"]),
                    train_months=int(row["train_months"]), size_class=row["size_class"],
                    transfer_learning=row["transfer_learning"] == "on", test_quarter=int(row["test_quarter"]),
                    repetition=int(row["repetition"]), community_id=row["community_id"], family=row["family"],
                    seed=int(row["seed"]), status=row["status"],
                    nmae=float(row["nmae"]) if row["nmae"] else float("nan"), error=row["error"],
                ))  # fmt: skip
            except (KeyError, ValueError) as e:
                raise DataError(f"{path}: not a grid results file ({e})") from None
    return recs


def cmd_report(opts, out: Path) -> dict:
    if not opts["inputs"]:
        raise UsageError("report needs --inputs (grid result CSVs or directories holding them)")
    records = []
    for item in opts["inputs"]:
        p = Path(item)
        files = sorted(p.glob("*_results.csv")) if p.is_dir() else [p]
        if not files:
            raise DataError(f"no *_results.csv in {p}")
        for f in files:
            records.extend(_read_results(f))
    paths = emit_report(records, out, prefix="report")
    print(f"report over {len(records)} records")
    return paths


COMMANDS = {
    "ingest": cmd_ingest,
    "synth": cmd_synth,
    "train": cmd_train,
    "forecast": cmd_forecast,
    "evaluate": cmd_evaluate,
    "grid": cmd_grid,
    "dispatch": cmd_dispatch,
    "report": cmd_report,
}


# ---------------------------------------------------------------- plumbing


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, command: str, opts: dict, outputs: dict) -> Path:
    (out / "config.json").write_text(json.dumps(opts, indent=2, sort_keys=True) + "\n")
    manifest = {
        "tool": "ecbench",
        "version": __version__,
        "command": command,
        "options": opts,
        "rerun": f"ecbench {command} --config {out / 'config.json'}",
        "outputs": {k: {"path": str(p), "sha256": _sha256(Path(p))} for k, p in sorted(outputs.items())
                    if "timings" not in k},
    }  # fmt: skip
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _fail(code: int, exc: BaseException) -> int:
    kind = {EXIT_USAGE: "usage", EXIT_DATA: "data", EXIT_FAILURE: "failure"}.get(code, "interrupted")
    print(f"error: {exc}", file=sys.stderr)
    print(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}),
          file=sys.stderr)  # fmt: skip
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        opts = resolve_options(ns.command, ns)
        out = Path(opts["out"])
        out.mkdir(parents=True, exist_ok=True)
        outputs = COMMANDS[ns.command](opts, out)
        write_manifest(out, ns.command, opts, outputs)
        return EXIT_OK
    except UsageError as e:
        return _fail(EXIT_USAGE, e)
    except (DataError, FileNotFoundError, CheckpointError, ValueError, KeyError) as e:
        return _fail(EXIT_DATA, e)
    except (TrainingError, DispatchError, InfeasibleError, NodeLimitError, SimplexError) as e:
        return _fail(EXIT_FAILURE, e)
    except KeyboardInterrupt as e:
        return _fail(130, e)


if __name__ == "__main__":
    sys.exit(main())
