"""Hub-height wind speed extrapolation via the Hellmann power law."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ingest import WindSeries

__all__ = ["ShearParams", "extrapolate", "extrapolate_series", "DEFAULT_ALPHA"]

DEFAULT_ALPHA = 0.143  # conventional 1/7 open-land exponent


@dataclass(frozen=True)
class ShearParams:
    """Power-law exponent and the reference measurement height (m)."""

    alpha: float = DEFAULT_ALPHA
    reference_height: float = 10.0

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        if self.reference_height <= 0:
            raise ValueError("reference_height must be positive")


def extrapolate(v0, z0: float, z: float, alpha: float = DEFAULT_ALPHA):
    """Speed at height ``z`` from speed ``v0`` measured at ``z0``: v0 * (z/z0)^alpha.

    ``v0`` may be a scalar or array; NaN (missing) passes through unchanged.
    """
    if z0 <= 0 or z <= 0:
        raise ValueError(f"heights must be positive, got z0={z0}, z={z}")
    factor = (z / z0) ** alpha
    if np.isscalar(v0):
        return v0 * factor
    return np.asarray(v0, dtype=np.float64) * factor


def extrapolate_series(series: WindSeries, hub_height: float,
                       alpha: float = DEFAULT_ALPHA) -> WindSeries:
    """Return a copy of ``series`` with speeds extrapolated to ``hub_height``."""
    speed = extrapolate(series.speed, series.height_m, hub_height, alpha)
    return series.replace(speed=speed, height_m=float(hub_height))
