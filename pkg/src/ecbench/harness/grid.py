"""One-axis-at-a-time sensitivity grid over community size, history, model size, transfer learning and quarter."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..data.community import sample_communities
from ..data.split import make_split
from ..data.types import DataError, HolidayCalendar, LoadSeries, WeatherSeries
from ..features import build_dataset
from ..models.estimators import DEEP_FAMILIES, make_forecaster, pretrain_finetune
from ..models.presets import PRESETS
from ..models.training import TrainConfig
from ..models.transfer import synthetic_pretraining_set
from .metrics import daily_nmae, nmae

logger = logging.getLogger(__name__)

AXES = ("community_size", "train_months", "size_class", "transfer_learning", "test_quarter")
ALL_FAMILIES = ("persistence", "knn", "lstm", "transformer", "xlstm")


@dataclass(frozen=True)
class GridConfig:
    community_size: tuple = (1, 2, 10, 50, 100)
    train_months: tuple = (2, 4, 6, 9, 12, 15)
    size_class: tuple = ("0.1k", "0.2k", "0.5k", "5k", "20k", "40k", "80k")
    transfer_learning: tuple = (True, False)
    test_quarter: tuple = (1, 2, 3, 4)
    baseline: dict = field(
        default_factory=lambda: {
            "community_size": 50,
            "train_months": 12,
            "size_class": "5k",
            "transfer_learning": True,
            "test_quarter": 4,
        }
    )
    test_year: int = 2013
    repetitions: int = 20
    families: tuple = ALL_FAMILIES
    epochs: int = 100
    batch_size: int = 256
    lr_stages: tuple = (0.01, 0.005, 0.001, 0.0005)
    n_neighbors: int = 40

    def __post_init__(self):
        if set(self.baseline) != set(AXES):
            raise ValueError(f"baseline must set exactly {AXES}, got {sorted(self.baseline)}")
        unknown = set(self.families) - set(ALL_FAMILIES)
        if unknown:
            raise ValueError(f"unknown families {sorted(unknown)}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")

    def cells(self) -> list[dict]:
        """Baseline first, then every non-baseline value of each axis in order."""
        out = [{"cell": "baseline", "axis": "baseline", **self.baseline}]
        for axis in AXES:
            for value in getattr(self, axis):
                if value == self.baseline[axis]:
                    continue
                cell = {**self.baseline, axis: value}
                out.append({"cell": f"{axis}={_fmt(value)}", "axis": axis, **cell})
        return out

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(self.epochs, self.batch_size, tuple(self.lr_stages), seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def _fmt(v) -> str:
    return ("on" if v else "off") if isinstance(v, bool) else str(v)


@dataclass(frozen=True, eq=False)
class GridData:
    pool: list  # LoadSeries on a shared hourly grid
    weather: WeatherSeries
    calendar: HolidayCalendar | None = None


@dataclass
class ResultRecord:
    cell: str
    axis: str
    community_size: int
    train_months: int
    size_class: str
    transfer_learning: bool
    test_quarter: int
    repetition: int
    community_id: str
    family: str
    seed: int
    status: str = "ok"  # ok | failed | unavailable
    nmae: float = float("nan")
    daily_nmae: list = field(default_factory=list)
    train_seconds: float = 0.0
    error: str = ""

    @property
    def key(self) -> tuple:
        return (self.cell, self.repetition, self.family)


def _derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def _run_unit(cell: dict, rep: int, community: LoadSeries, data: GridData, config: GridConfig, seed: int):
    """All families for one (cell, repetition)."""
    base = {k: cell[k] for k in ("cell", "axis", *AXES)}
    records = []
    unit_seed = _derive_seed(seed, rep, 1)

    def record(family, **kw):
        r = ResultRecord(**base, repetition=rep, community_id=community.id, family=family, seed=unit_seed, **kw)
        records.append(r)
        return r

    try:
        split = make_split(community, cell["test_quarter"], config.test_year, cell["train_months"])
        train, test = build_dataset(split, community, data.weather, data.calendar)
    except DataError as e:
        for fam in config.families:
            record(fam, status="failed", error=str(e))
        return records

    synth = None
    for fam in config.families:
        if fam in DEEP_FAMILIES and (fam, cell["size_class"]) not in PRESETS:
            record(fam, status="unavailable", error=f"no {cell['size_class']} preset for {fam}")
            continue
        t = time.perf_counter()
        try:
            if fam in DEEP_FAMILIES:
                est = make_forecaster(fam, size_class=cell["size_class"])
                tc = config.train_config(unit_seed)
                if cell["transfer_learning"]:
                    if synth is None:
                        synth = synthetic_pretraining_set(train, data.weather, data.calendar)
                    pretrain_finetune(est, synth, train, tc)
                else:
                    est.set_params(epochs=tc.epochs, batch_size=tc.batch_size, lr_stages=tc.lr_stages,
                                   random_state=tc.seed)  # fmt: skip
                    est.fit(train.X, train.y)
            elif fam == "knn":
                est = make_forecaster(fam, n_neighbors=config.n_neighbors).fit(train.X, train.y)
            else:
                est = make_forecaster(fam).fit(train.X, train.y)
            pred = est.predict(test.X)
            record(fam, nmae=nmae(pred, test.y), daily_nmae=[float(v) for v in daily_nmae(pred, test.y)],
                   train_seconds=time.perf_counter() - t)  # fmt: skip
        except Exception as e:  # recorded, the grid goes on
            logger.warning("cell %s rep %d %s failed: %s", cell["cell"], rep, fam, e)
            record(fam, status="failed", error=f"{type(e).__name__}: {e}", train_seconds=time.perf_counter() - t)
    return records


def _unit_args(config: GridConfig, data: GridData, seed: int):
    communities = {}
    for cell in config.cells():
        h = cell["community_size"]
        if h not in communities:
            communities[h] = [c.aggregate for c in sample_communities(data.pool, h, config.repetitions,
                                                                     _derive_seed(seed, h, 0))]  # fmt: skip
        for rep in range(config.repetitions):
            yield cell, rep, communities[h][rep]


class GridInterrupted(KeyboardInterrupt):
    def __init__(self, records):
        self.records = records
        super().__init__(f"grid interrupted after {len(records)} records")


def run_grid(config: GridConfig, data: GridData, seed: int = 0, workers: int = 1, progress=None) -> list[ResultRecord]:
    """Evaluate every family on every (cell, repetition); output order is fixed regardless of ``workers``."""
    units = list(_unit_args(config, data, seed))
    records: list[ResultRecord] = []
    try:
        if workers <= 1:
            for i, (cell, rep, com) in enumerate(units):
                records.extend(_run_unit(cell, rep, com, data, config, seed))
                if progress:
                    progress(i + 1, len(units))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_unit, cell, rep, com, data, config, seed) for cell, rep, com in units]
                try:
                    for i, fut in enumerate(futures):
                        records.extend(fut.result())
                        if progress:
                            progress(i + 1, len(units))
                except KeyboardInterrupt:
                    for f in futures:
                        f.cancel()
                    raise
    except KeyboardInterrupt:
        raise GridInterrupted(records) from None
    return records
