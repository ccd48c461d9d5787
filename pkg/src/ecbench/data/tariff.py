"""Real-time tariff built from a spot index plus network fee and tax."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import HOUR, PriceSeries, to_hour


@dataclass(frozen=True)
class SyntheticSpot:
    """Daily-sinusoid spot price with seeded Gaussian noise (EUR/kWh).

    ``spot = base + amp * sin(2*pi*(hour - phase)/24) + noise``; with the
    default phase the peak falls at 18:00.
    """

    start: str
    n_hours: int
    base: float = 0.10
    amp: float = 0.05
    phase: float = 12.0
    noise: float = 0.01
    seed: int = 0

    def generate(self) -> PriceSeries:
        ts = np.arange(self.n_hours) * HOUR + to_hour(self.start)
        hour = (ts - ts.astype("datetime64[D]")).astype(int)
        rng = np.random.default_rng(self.seed)
        spot = (
            self.base
            + self.amp * np.sin(2 * np.pi * (hour - self.phase) / 24)
            + self.noise * rng.standard_normal(self.n_hours)
        )
        return PriceSeries(ts, spot)


def build_tariff(spot, network_fee: float, tax_rate: float) -> PriceSeries:
    """Compose the consumer price ``(spot + network_fee) * (1 + tax_rate)``."""
    if network_fee < 0 or tax_rate < 0:
        raise ValueError("network_fee and tax_rate must be non-negative")
    if isinstance(spot, SyntheticSpot):
        spot = spot.generate()
    return PriceSeries(spot.timestamps, (spot.prices + network_fee) * (1.0 + tax_rate))
