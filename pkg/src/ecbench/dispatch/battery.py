from __future__ import annotations

import math
from dataclasses import dataclass

KWH_PER_HOUSEHOLD = 12.0
C_RATE = 0.25
EFFICIENCY = 0.922  # one-way; round trip 0.922**2 ~ 0.85


@dataclass(frozen=True)
class BatteryParams:
    """Shared battery. ``E_max == 0`` with ``P_max == 0`` is the degenerate no-battery case."""

    E_max: float
    P_max: float
    eta_ch: float = EFFICIENCY
    eta_dis: float = EFFICIENCY
    E_min: float = 0.0
    E_start: float | None = None
    E_end: float | None = None

    def __post_init__(self):
        if self.E_start is None:
            object.__setattr__(self, "E_start", 0.5 * (self.E_min + self.E_max))
        if self.E_end is None:
            object.__setattr__(self, "E_end", self.E_start)
        values = (self.E_max, self.P_max, self.eta_ch, self.eta_dis, self.E_min, self.E_start, self.E_end)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"battery parameters must be finite: {self}")
        if not 0 <= self.E_min <= min(self.E_start, self.E_end) <= max(self.E_start, self.E_end) <= self.E_max:
            raise ValueError(
                f"need 0 <= E_min <= E_start, E_end <= E_max; got E_min={self.E_min}, "
                f"E_start={self.E_start}, E_end={self.E_end}, E_max={self.E_max}"
            )
        if not (0 < self.eta_ch <= 1 and 0 < self.eta_dis <= 1):
            raise ValueError(f"efficiencies must lie in (0, 1], got {self.eta_ch}, {self.eta_dis}")
        if self.P_max < 0 or (self.P_max == 0 and self.E_max > self.E_min):
            raise ValueError(f"P_max must be positive for a usable battery, got {self.P_max}")

    @property
    def round_trip(self) -> float:
        return self.eta_ch * self.eta_dis

    @classmethod
    def none(cls) -> "BatteryParams":
        return cls(E_max=0.0, P_max=0.0)


def build_battery(scheme: str | int, h: int | None = None, capacity: float | None = None) -> BatteryParams:
    """Scheme 1 (``"per_household"``): 12 kWh per household. Scheme 2 (``"capacity"``): given kWh."""
    if scheme in (1, "1", "per_household"):
        if h is None or h < 1:
            raise ValueError(f"per-household sizing needs h >= 1, got {h}")
        e_max = KWH_PER_HOUSEHOLD * h
    elif scheme in (2, "2", "capacity"):
        if capacity is None or not capacity > 0:
            raise ValueError(f"capacity must be positive, got {capacity}")
        e_max = float(capacity)
    else:
        raise ValueError(f"unknown sizing scheme {scheme!r}")
    return BatteryParams(E_max=e_max, P_max=C_RATE * e_max)
