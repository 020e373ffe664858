"""Turbine power-curve library: loading, 0.5 m/s rebinning, wind-to-power conversion.

A turbine's output is 0 at or below cut-in, linearly interpolated on the
rebinned curve between cut-in and rated speed, the nominal power from rated
speed up to (but excluding) cut-out, and 0 at or above cut-out.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import cached_property
from importlib.resources import files
from pathlib import Path

import numpy as np

from .ingest import WindSeries, day_slices

__all__ = [
    "TurbineSpec",
    "PowerSeries",
    "TurbineLibrary",
    "load_turbine_library",
    "rebin_curve",
    "power_at",
    "power_series",
    "bundled_library_path",
]

DEFAULT_BIN_WIDTH = 0.5  # m/s, the conventional power-curve bin


@dataclass(frozen=True)
class TurbineSpec:
    """Turbine identity, operating speeds, and tabulated power curve.

    Parameters
    ----------
    id : str
        Library identifier, e.g. ``"no16"``.
    hub_height_m : float
        Hub height above ground (m).
    cut_in, rated_speed, cut_out : float
        Operating speeds (m/s); must satisfy 0 < cut_in < rated < cut_out.
    nominal_power_kw : float
        Rated electrical output (kW).
    curve_speeds, curve_powers : ndarray
        Tabulated curve; speeds strictly increasing, powers within
        [0, nominal], and exactly nominal at tabulated speeds >= rated.
    """

    id: str
    hub_height_m: float
    cut_in: float
    rated_speed: float
    cut_out: float
    nominal_power_kw: float
    curve_speeds: np.ndarray
    curve_powers: np.ndarray

    def __post_init__(self):
        speeds = np.ascontiguousarray(self.curve_speeds, dtype=np.float64)
        powers = np.ascontiguousarray(self.curve_powers, dtype=np.float64)
        if not 0 < self.cut_in < self.rated_speed < self.cut_out:
            raise ValueError(
                f"{self.id}: need 0 < cut_in < rated < cut_out, got "
                f"{self.cut_in}/{self.rated_speed}/{self.cut_out}")
        if self.hub_height_m <= 0:
            raise ValueError(f"{self.id}: hub height must be positive")
        if self.nominal_power_kw <= 0:
            raise ValueError(f"{self.id}: nominal power must be positive")
        if speeds.size != powers.size or speeds.size < 2:
            raise ValueError(f"{self.id}: curve needs >= 2 (speed, power) points")
        if np.any(np.diff(speeds) <= 0):
            raise ValueError(f"{self.id}: curve speeds must be strictly increasing")
        if np.any(powers < 0) or np.any(powers > self.nominal_power_kw):
            raise ValueError(f"{self.id}: curve powers must lie in "
                             f"[0, {self.nominal_power_kw}]")
        at_or_above_rated = speeds >= self.rated_speed
        if np.any(powers[at_or_above_rated] != self.nominal_power_kw):
            raise ValueError(f"{self.id}: curve power at speeds >= rated must "
                             "equal the nominal power")
        for arr in (speeds, powers):
            arr.setflags(write=False)
        object.__setattr__(self, "curve_speeds", speeds)
        object.__setattr__(self, "curve_powers", powers)

    @cached_property
    def rebinned(self) -> tuple[np.ndarray, np.ndarray]:
        return rebin_curve(self.curve_speeds, self.curve_powers,
                           DEFAULT_BIN_WIDTH)


@dataclass(frozen=True)
class PowerSeries:
    """Per-sample turbine output (kW, NaN = missing) on the wind series grid."""

    turbine_id: str
    cadence_s: int
    times: np.ndarray
    values: np.ndarray
    nominal_kw: float
    gaps: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=np.int64)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if times.shape != values.shape or times.ndim != 1 or times.size == 0:
            raise ValueError("times and values must be matching 1-D arrays")
        if times.size > 1 and not np.all(np.diff(times) == self.cadence_s):
            raise ValueError("times must have constant cadence spacing")
        with np.errstate(invalid="ignore"):
            if np.any(values < 0) or np.any(values > self.nominal_kw * (1 + 1e-12)):
                raise ValueError("power values must lie in [0, nominal]")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "gaps", tuple((int(a), int(b))
                                               for a, b in self.gaps))

    def __len__(self) -> int:
        return self.times.size

    def iter_days(self):
        """Yield (date, PowerSeries) for each UTC calendar day touched."""
        for date, sl in day_slices(self.times):
            yield date, PowerSeries(self.turbine_id, self.cadence_s,
                                    self.times[sl], self.values[sl],
                                    self.nominal_kw, self._gaps_within(sl))

    def _gaps_within(self, sl: slice):
        lo = int(self.times[sl.start])
        hi = int(self.times[sl.stop - 1]) + self.cadence_s
        return tuple((max(a, lo), min(b, hi)) for a, b in self.gaps
                     if a < hi and b > lo)


def rebin_curve(speeds: np.ndarray, powers: np.ndarray,
                bin_width: float = DEFAULT_BIN_WIDTH):
    """Resample a power curve onto the {first, first+bin, ...} speed grid.

    Grid-point powers come from linear interpolation of the input curve; the
    exact last input point is appended when it does not land on the grid.
    Idempotent for curves already on the grid.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    speeds = np.asarray(speeds, dtype=np.float64)
    powers = np.asarray(powers, dtype=np.float64)
    if speeds.size < 2:
        raise ValueError("curve needs at least 2 points to rebin")
    span = speeds[-1] - speeds[0]
    n = int(np.floor(span / bin_width + 1e-9))
    grid = speeds[0] + bin_width * np.arange(n + 1)
    if grid[-1] < speeds[-1] - 1e-9 * max(1.0, abs(speeds[-1])):
        grid = np.append(grid, speeds[-1])
    else:
        grid[-1] = speeds[-1]  # endpoint preserved exactly
    return grid, np.interp(grid, speeds, powers)


def _powers_for(spec: TurbineSpec, v: np.ndarray) -> np.ndarray:
    out = np.zeros(v.shape, dtype=np.float64)
    rs, rp = spec.rebinned
    partial = (v > spec.cut_in) & (v < spec.rated_speed)
    out[partial] = np.interp(v[partial], rs, rp)
    out[(v >= spec.rated_speed) & (v < spec.cut_out)] = spec.nominal_power_kw
    np.clip(out, 0.0, spec.nominal_power_kw, out=out)
    out[np.isnan(v)] = np.nan
    return out


def power_at(spec: TurbineSpec, v: float) -> float:
    """Instantaneous output power (kW) for hub-height speed ``v`` (m/s)."""
    return float(_powers_for(spec, np.array([v], dtype=np.float64))[0])


def power_series(spec: TurbineSpec, wind: WindSeries,
                 uplift: float = 1.0) -> PowerSeries:
    """Convert a hub-height wind series to output power, sample by sample.

    ``wind`` must already be extrapolated to ``spec.hub_height_m``.
    ``uplift`` optionally scales the theoretical curve output (blade-momentum
    correction; default 1.0 = none).
    """
    if abs(wind.height_m - spec.hub_height_m) > 1e-6:
        raise ValueError(
            f"wind series height {wind.height_m} m does not match hub height "
            f"{spec.hub_height_m} m of turbine {spec.id}; extrapolate first")
    values = _powers_for(spec, wind.speed) * uplift
    return PowerSeries(turbine_id=spec.id, cadence_s=wind.cadence_s,
                       times=wind.times, values=values,
                       nominal_kw=spec.nominal_power_kw * uplift,
                       gaps=wind.gaps)


@dataclass
class TurbineLibrary:
    """Validated turbines plus per-entry rejection reasons."""

    turbines: list[TurbineSpec] = field(default_factory=list)
    errors: list[tuple[str, str]] = field(default_factory=list)

    def get(self, turbine_id: str) -> TurbineSpec:
        for t in self.turbines:
            if t.id == turbine_id:
                return t
        raise KeyError(f"turbine {turbine_id!r} not in library")

    def ids(self) -> list[str]:
        return [t.id for t in self.turbines]


_FIELDS = ("id", "hub_height_m", "cut_in_ms", "rated_ms", "cut_out_ms",
           "nominal_kw", "curve")


def _entry_to_spec(entry: dict) -> TurbineSpec:
    missing = [f for f in _FIELDS if f not in entry]
    if missing:
        raise ValueError(f"missing required field(s): {missing}")
    curve = np.asarray(entry["curve"], dtype=np.float64)
    if curve.ndim != 2 or curve.shape[1] != 2:
        raise ValueError("curve must be a list of [speed, power] pairs")
    return TurbineSpec(
        id=str(entry["id"]),
        hub_height_m=float(entry["hub_height_m"]),
        cut_in=float(entry["cut_in_ms"]),
        rated_speed=float(entry["rated_ms"]),
        cut_out=float(entry["cut_out_ms"]),
        nominal_power_kw=float(entry["nominal_kw"]),
        curve_speeds=curve[:, 0],
        curve_powers=curve[:, 1],
    )


def _parse_curve_cell(cell: str) -> list[list[float]]:
    pairs = []
    for token in cell.split(";"):
        token = token.strip()
        if not token:
            continue
        v, p = token.split(":")
        pairs.append([float(v), float(p)])
    return pairs


def load_turbine_library(path: str | Path) -> TurbineLibrary:
    """Load a JSON (or CSV) turbine library, validating every entry.

    JSON: an array of objects with fields ``id``, ``hub_height_m``,
    ``cut_in_ms``, ``rated_ms``, ``cut_out_ms``, ``nominal_kw`` and
    ``curve`` = [[speed, kw], ...]. CSV: the same columns with the curve
    encoded as ``speed:kw`` pairs joined by ``;``. Entries failing
    validation are returned in ``errors`` with their reason, never silently
    dropped.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    entries: list[dict] = []
    if path.suffix.lower() == ".csv":
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                row = {k.strip(): v for k, v in row.items() if k is not None}
                if "curve" in row:
                    row["curve"] = _parse_curve_cell(row["curve"])
                entries.append(row)
    else:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, list):
            raise ValueError("turbine library JSON must be an array of entries")
        entries = doc

    lib = TurbineLibrary()
    for i, entry in enumerate(entries):
        label = str(entry.get("id", f"entry #{i}"))
        try:
            lib.turbines.append(_entry_to_spec(entry))
        except (ValueError, TypeError) as exc:
            lib.errors.append((label, str(exc)))
    return lib


def bundled_library_path(name: str = "turbines_table2.json") -> Path:
    """Path to a turbine library shipped with the package."""
    return Path(str(files("windfeas").joinpath(f"data/{name}")))
