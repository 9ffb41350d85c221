"""Stochastic per-bus power profiles at 1-second resolution.

Wind profiles start from a 1-minute per-unit source series and are
resampled to 1 second: within each minute the per-second increments are
drawn from a Gaussian whose mean is the minute's average slope, and the
cumulative sum is anchored at the minute's starting value.  Load
profiles are per-unit multipliers around the forecast.  All randomness
is driven by explicit seeds, so profiles replay bit-identically.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class MinuteSeries:
    """Per-unit series at 60 s resolution, bounded to [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 1:
            raise ProfileError("minute series must be one-dimensional")
        if v.size and (v.min() < 0.0 or v.max() > 1.0):
            raise ProfileError("minute series values must lie in [0, 1]")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class NoiseParams:
    sigma: float = 0.002     # std of per-second increments, p.u.
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ProfileError("sigma must be nonnegative")


@dataclass(frozen=True)
class SecondSeries:
    """Power series at 1 s resolution."""

    values: np.ndarray
    kind: str = "wind"             # 'wind' | 'load' | 'battery'
    bus: int | None = None
    baseline_mw: float | None = None    # forecast W^b or L^b

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self) -> int:
        return len(self.values)

    def at(self, second: int) -> float:
        """Value at integer second, held at the last sample past the end."""
        i = min(int(second), len(self.values) - 1)
        return float(self.values[i])


def resample_wind(x: MinuteSeries, p: NoiseParams) -> SecondSeries:
    """Resample a minute series to 1 s with Gaussian increment noise.

    For minute t the 60 increments are N(mean_t, sigma^2) with
    mean_t = (x[t+1] - x[t])/60; the cumulative sum restarts from x[t]
    at each minute boundary, so a zero-sigma run interpolates the minute
    series exactly.  Output is clamped to [0, 1].
    """
    v = x.values
    if len(v) < 2:
        raise ProfileError("minute series needs at least 2 samples to resample")
    rng = np.random.default_rng(p.seed)
    nmin = len(v) - 1
    means = np.diff(v) / 60.0
    incr = rng.normal(means[:, None], p.sigma, size=(nmin, 60))
    blocks = v[:-1, None] + np.cumsum(incr, axis=1)
    out = np.empty(nmin * 60 + 1)
    out[0] = v[0]
    out[1:] = blocks.ravel()
    np.clip(out, 0.0, 1.0, out=out)
    return SecondSeries(values=out, kind="wind")


def scale_wind(omega: SecondSeries, rating_mw: float, bus: int | None = None) -> SecondSeries:
    """Scale a per-unit wind profile by the farm rating (Eq. W = W_b * omega)."""
    if rating_mw <= 0:
        raise ProfileError("wind rating must be positive")
    return SecondSeries(values=omega.values * rating_mw, kind="wind",
                        bus=bus, baseline_mw=rating_mw)


def make_load_profile(l: SecondSeries, forecast_mw: float,
                      bus: int | None = None) -> SecondSeries:
    """Scale a per-unit load multiplier profile by the bus forecast."""
    if forecast_mw <= 0:
        raise ProfileError("load forecast must be positive")
    return SecondSeries(values=l.values * forecast_mw, kind="load",
                        bus=bus, baseline_mw=forecast_mw)


# -- bundled synthetic sources ---------------------------------------------

def synthetic_minute_walk(n_minutes: int, start: float, sigma: float,
                          seed: int, lo: float = 0.0, hi: float = 1.0) -> MinuteSeries:
    """Bounded random walk at minute resolution (synthetic wind source)."""
    rng = np.random.default_rng(seed)
    steps = rng.normal(0.0, sigma, size=n_minutes)
    out = np.empty(n_minutes + 1)
    x = start
    out[0] = x
    for i, s in enumerate(steps):
        x = min(max(x + s, lo), hi)
        out[i + 1] = x
    return MinuteSeries(values=out)


def synthetic_second_multiplier(n_seconds: int, mean: float, sigma_slow: float,
                                sigma_fast: float, seed: int,
                                lo: float = 0.8, hi: float = 1.2) -> SecondSeries:
    """Per-unit multiplier around ``mean``: minute-scale walk plus fast noise.

    Used as the synthetic stand-in for measured 1-second demand data.
    """
    rng = np.random.default_rng(seed)
    n_min = n_seconds // 60 + 2
    walk = np.cumsum(rng.normal(0.0, sigma_slow, size=n_min))
    # linear interpolation of the slow component onto the 1 s grid
    t_min = np.arange(n_min) * 60.0
    t_sec = np.arange(n_seconds, dtype=float)
    slow = np.interp(t_sec, t_min, walk)
    fast = rng.normal(0.0, sigma_fast, size=n_seconds)
    vals = np.clip(mean + slow + fast, lo, hi)
    return SecondSeries(values=vals, kind="load")


# -- CSV I/O ---------------------------------------------------------------

def read_minute_csv(path: str | Path) -> MinuteSeries:
    """Read (timestamp, per-unit value) rows at 60 s resolution."""
    vals = []
    with open(path, newline="") as f:
        for lineno, row in enumerate(csv.reader(f), start=1):
            if not row or row[0].startswith("#"):
                continue
            if lineno == 1 and not _is_number(row[-1]):
                continue    # header row
            try:
                vals.append(float(row[-1]))
            except ValueError as exc:
                raise ProfileError(f"{path}:{lineno}: bad value {row[-1]!r}") from exc
    return MinuteSeries(values=np.array(vals))


def write_second_csv(series: SecondSeries, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["second", "value_mw" if series.baseline_mw else "value_pu"])
        for i, v in enumerate(series.values):
            w.writerow([i, f"{v:.10g}"])


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False
