"""Synthetic wind and power generators for tests and benchmarks.

Everything here is seeded and deterministic; nothing in the analysis
pipeline depends on this module.
"""

from __future__ import annotations

import datetime as dt
from pathlib import Path

import numpy as np

from .ingest import DAY_S, TowerSchema, WindSeries, _iso

__all__ = [
    "epoch",
    "make_series",
    "constant_series",
    "random_wind",
    "synthetic_year",
    "piecewise_power_day",
    "write_tower_csv",
]


def epoch(year: int, month: int = 1, day: int = 1, hour: int = 0,
          minute: int = 0) -> int:
    return int(dt.datetime(year, month, day, hour, minute,
                           tzinfo=dt.timezone.utc).timestamp())


def make_series(speed, site_id: str = "synth", t0: int | None = None,
                cadence_s: int = 60, direction=None, height_m: float = 20.0,
                gaps=()) -> WindSeries:
    speed = np.asarray(speed, dtype=np.float64)
    if t0 is None:
        t0 = epoch(2021)
    times = t0 + cadence_s * np.arange(speed.size, dtype=np.int64)
    if direction is None:
        direction = np.full(speed.size, np.nan)
    else:
        direction = np.broadcast_to(np.asarray(direction, dtype=np.float64),
                                    speed.shape).copy()
    return WindSeries(site_id=site_id, cadence_s=cadence_s, times=times,
                      speed=speed, direction=direction, height_m=height_m,
                      gaps=gaps)


def constant_series(speed: float, n: int, direction: float = 270.0,
                    **kw) -> WindSeries:
    return make_series(np.full(n, float(speed)),
                       direction=np.full(n, direction), **kw)


def random_wind(rng: np.random.Generator, n: int, missing: float = 0.0,
                with_direction: bool = True, cadence_s: int = 60,
                t0: int | None = None) -> WindSeries:
    """Uniform random speeds with optional isolated missing samples."""
    speed = rng.uniform(0.0, 25.0, n)
    if missing > 0:
        k = max(1, int(n * missing))
        speed[rng.choice(n, size=k, replace=False)] = np.nan
    direction = rng.uniform(0.0, 360.0, n) if with_direction else None
    return make_series(speed, cadence_s=cadence_s, direction=direction, t0=t0)


def synthetic_year(seed: int = 7, site_id: str = "synth", days: int = 365,
                   cadence_s: int = 60, height_m: float = 20.0,
                   start_year: int = 2021) -> WindSeries:
    """A structured year of minute wind data: diurnal swing, flat plateaus
    (which become stable power windows), isolated missing samples, and a
    handful of multi-hour holes."""
    rng = np.random.default_rng(seed)
    n = days * DAY_S // cadence_s
    per_day = DAY_S // cadence_s
    t = np.arange(n)
    day_frac = (t % per_day) / per_day
    season = 2.0 * np.sin(2 * np.pi * t / (per_day * 365.25))
    diurnal = 1.5 * np.sin(2 * np.pi * day_frac)
    walk = np.cumsum(rng.normal(0, 0.02, n))
    walk -= np.linspace(0, walk[-1], n)  # detrend so speeds stay bounded
    speed = np.clip(6.0 + season + diurnal + walk
                    + rng.normal(0, 0.35, n), 0.0, None)

    # Flat plateaus: a few per day, 25-55 minutes, at rated-range speeds.
    for d in range(days):
        for _ in range(int(rng.integers(1, 4))):
            start = d * per_day + int(rng.integers(0, per_day - 60))
            length = int(rng.integers(25, 56))
            level = rng.uniform(8.6, 12.0)
            speed[start:start + length] = level

    # Isolated short missing samples (imputable).
    n_missing = n // 400
    miss_idx = rng.choice(n, size=n_missing, replace=False)
    speed[miss_idx] = np.nan

    # Long holes of 2-30 hours.
    for _ in range(8):
        start = int(rng.integers(0, n - 2000))
        length = int(rng.integers(120, 1800))
        speed[start:start + length] = np.nan

    direction = (200.0 + 60.0 * np.sin(2 * np.pi * t / (per_day * 30))
                 + rng.normal(0, 8.0, n)) % 360.0
    return make_series(speed, site_id=site_id, t0=epoch(start_year),
                       cadence_s=cadence_s, direction=direction,
                       height_m=height_m)


def piecewise_power_day(rng: np.random.Generator, n: int, nominal: float,
                        p_missing: float = 0.05) -> np.ndarray:
    """Power values alternating flat, near-flat, and noisy segments plus NaN
    holes; flat stretches are what the stability filter should keep."""
    values = np.empty(n)
    i = 0
    while i < n:
        length = int(rng.integers(5, 60))
        kind = rng.random()
        if kind < 0.35:
            seg = np.full(length, rng.uniform(0, nominal))
        elif kind < 0.55:
            seg = rng.uniform(0, nominal) + rng.normal(0, 0.03, length)
        else:
            seg = rng.uniform(0, nominal, length)
        values[i:i + length] = seg[: n - i]
        i += length
    np.clip(values, 0.0, nominal, out=values)
    holes = rng.random(n) < p_missing
    values[holes] = np.nan
    return values


def write_tower_csv(series: WindSeries, path: str | Path,
                    sentinel: str = "-999", delimiter: str = ",",
                    shuffle_seed: int | None = None) -> TowerSchema:
    """Write a raw tower file for ``series`` and return the matching schema.

    Missing speeds are written as the sentinel; optionally shuffles row
    order (the parser must sort them back).
    """
    rows = []
    for ts, s, d in zip(series.times, series.speed, series.direction):
        s_txt = sentinel if np.isnan(s) else f"{s:.4f}"
        d_txt = sentinel if np.isnan(d) else f"{d:.2f}"
        rows.append(f"{_iso(int(ts))}{delimiter}{s_txt}{delimiter}{d_txt}\n")
    if shuffle_seed is not None:
        np.random.default_rng(shuffle_seed).shuffle(rows)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(delimiter.join(["timestamp", "speed", "direction"]) + "\n")
        fh.writelines(rows)
    return TowerSchema(timestamp_col="timestamp", speed_col="speed",
                       direction_col="direction", height_m=series.height_m,
                       delimiter=delimiter, timestamp_format="iso8601",
                       sentinels=("", sentinel), cadence_s=series.cadence_s,
                       site_id=series.site_id)
