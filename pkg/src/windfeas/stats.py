"""Descriptive wind statistics: Weibull fit, windrose tabulation, summaries.

Conventions: population (1/N) moments throughout; zero speeds are excluded
from Weibull fitting; windroses default to 16 sectors with 2 m/s speed bins
and an open-ended 20+ bin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ingest import WindSeries

__all__ = [
    "WeibullFit",
    "WindroseTable",
    "SummaryStats",
    "fit_weibull",
    "windrose",
    "summary_stats",
]

WEIBULL_MIN_SAMPLES = 100
WEIBULL_TOL = 1e-10
WEIBULL_MAX_ITER = 500

SPEED_BIN_EDGES = tuple(float(e) for e in range(0, 22, 2))  # last bin open


@dataclass(frozen=True)
class WeibullFit:
    """Two-parameter Weibull maximum-likelihood estimate."""

    scale: float  # m/s
    shape: float
    n_samples: int
    log_likelihood: float

    def __post_init__(self):
        if self.scale <= 0 or self.shape <= 0:
            raise ValueError("scale and shape must be positive")

    def to_dict(self) -> dict:
        return {"scale": self.scale, "shape": self.shape,
                "n_samples": self.n_samples,
                "log_likelihood": self.log_likelihood}


def fit_weibull(speeds: np.ndarray) -> WeibullFit:
    """Fit Weibull (scale, shape) by maximum likelihood.

    NaN and non-positive values are excluded; at least 100 strictly positive
    samples must remain. The shape solves the profile-likelihood equation by
    Newton iteration (converged when successive iterates differ by less than
    1e-10); the scale then follows in closed form.

    Raises
    ------
    ValueError
        On too few positive samples, an all-equal (degenerate) sample, or
        non-convergence after 500 iterations.
    """
    x = np.asarray(speeds, dtype=np.float64)
    x = x[~np.isnan(x)]
    x = x[x > 0]
    n = x.size
    if n < WEIBULL_MIN_SAMPLES:
        raise ValueError(f"need >= {WEIBULL_MIN_SAMPLES} strictly positive "
                         f"samples, got {n}")
    if np.all(x == x[0]):
        raise ValueError("degenerate sample: all values equal")

    # Condition by rescaling to unit mean; shape is scale-invariant.
    mu = x.mean()
    z = x / mu
    lz = np.log(z)
    c = lz.mean()

    k = (x.std() / mu) ** -1.086  # moment-based starting point
    k = min(max(k, 0.05), 50.0)
    converged = False
    for _ in range(WEIBULL_MAX_ITER):
        zk = z ** k
        b = zk.sum()
        a = (zk * lz).sum()
        a2 = (zk * lz * lz).sum()
        f = a / b - 1.0 / k - c
        fp = (a2 * b - a * a) / (b * b) + 1.0 / (k * k)
        step = f / fp
        k_new = k - step
        if k_new <= 0:
            k_new = k / 2.0
        if abs(k_new - k) < WEIBULL_TOL:
            k = k_new
            converged = True
            break
        k = k_new
    if not converged:
        raise ValueError(f"Weibull shape iteration did not converge in "
                         f"{WEIBULL_MAX_ITER} steps")

    lam = mu * (np.mean(z ** k)) ** (1.0 / k)
    loglik = float(n * math.log(k) - n * k * math.log(lam)
                   + (k - 1.0) * np.log(x).sum() - ((x / lam) ** k).sum())
    return WeibullFit(scale=float(lam), shape=float(k), n_samples=n,
                      log_likelihood=loglik)


@dataclass(frozen=True)
class WindroseTable:
    """Sector frequencies and per-sector speed-bin counts.

    Sector 0 is centred on north; sectors advance clockwise. The last speed
    bin is open-ended (everything at or above the final edge). An all-missing
    direction record yields the empty-table marker (``n_samples == 0``).
    """

    n_sectors: int
    frequencies: np.ndarray
    speed_bin_edges: tuple[float, ...]
    counts: np.ndarray
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "n_sectors": self.n_sectors,
            "frequencies": [float(f) for f in self.frequencies],
            "speed_bin_edges": list(self.speed_bin_edges),
            "counts": [[int(c) for c in row] for row in self.counts],
            "n_samples": self.n_samples,
        }

    @property
    def is_empty(self) -> bool:
        return self.n_samples == 0


def windrose(series: WindSeries, n_sectors: int = 16) -> WindroseTable:
    """Tabulate direction-sector frequencies with speed-bin histograms.

    Each sample with both speed and direction present lands in exactly one
    sector: ``floor(((direction + half_width) mod 360) / width)``, so sector
    boundaries straddle the compass points.
    """
    if n_sectors < 1:
        raise ValueError("n_sectors must be >= 1")
    ok = ~np.isnan(series.speed) & ~np.isnan(series.direction)
    n_bins = len(SPEED_BIN_EDGES)
    if not ok.any():
        return WindroseTable(n_sectors=n_sectors,
                             frequencies=np.zeros(n_sectors),
                             speed_bin_edges=SPEED_BIN_EDGES,
                             counts=np.zeros((n_sectors, n_bins), dtype=np.int64),
                             n_samples=0)
    speed = series.speed[ok]
    direction = series.direction[ok]
    width = 360.0 / n_sectors
    sectors = np.floor(((direction + width / 2.0) % 360.0) / width).astype(np.int64)
    np.clip(sectors, 0, n_sectors - 1, out=sectors)
    bins = np.searchsorted(SPEED_BIN_EDGES, speed, side="right") - 1
    np.clip(bins, 0, n_bins - 1, out=bins)
    counts = np.zeros((n_sectors, n_bins), dtype=np.int64)
    np.add.at(counts, (sectors, bins), 1)
    return WindroseTable(n_sectors=n_sectors,
                         frequencies=counts.sum(axis=1) / ok.sum(),
                         speed_bin_edges=SPEED_BIN_EDGES,
                         counts=counts,
                         n_samples=int(ok.sum()))


@dataclass(frozen=True)
class SummaryStats:
    """Mean, population std, and quartiles over non-missing speeds."""

    mean: float
    std: float
    q1: float
    median: float
    q3: float
    n_samples: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "q1": self.q1,
                "median": self.median, "q3": self.q3,
                "n_samples": self.n_samples}


def summary_stats(series: WindSeries) -> SummaryStats:
    """Moments and quartiles of the non-missing speed samples."""
    x = series.speed[~np.isnan(series.speed)]
    if x.size == 0:
        raise ValueError(f"series {series.site_id!r} is entirely missing")
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    return SummaryStats(mean=float(x.mean()), std=float(x.std()),
                        q1=float(q1), median=float(med), q3=float(q3),
                        n_samples=int(x.size))
