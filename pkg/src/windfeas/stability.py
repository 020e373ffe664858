"""Stable charging-window detection over turbine power series.

For one calendar day of power data: enumerate overlapping windows of the
EV charge duration, keep the ones whose power is near-constant (population
std within the stability threshold) and whose energy clears the charging
floor, pick a non-overlapping subset greedily by earliest start, and sum
window energies into a daily total and an EV count.
"""

from __future__ import annotations

import datetime as dt
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._kernels import sliding_mean_std
from .ev import ChargingProfile, energy_per_charge
from .ingest import DAY_S, _iso
from .turbine import PowerSeries

__all__ = [
    "WindowParams",
    "CandidateWindows",
    "StableWindow",
    "DailyResult",
    "enumerate_windows",
    "filter_stable",
    "select_nonoverlapping",
    "daily_energy",
    "ev_count",
    "analyze_day",
]

DEFAULT_SIGMA_MAX_KW = 0.1

ENERGY_FLOOR_MODES = ("full-charge", "partial-charge")


@dataclass(frozen=True)
class WindowParams:
    """Window length, overlap, stability threshold, and energy-floor mode.

    Consecutive candidate windows start ``t_charge_min - t_ov_min`` minutes
    apart. ``sigma_max_kw`` bounds the population standard deviation of
    power inside a window. ``min_energy_mode`` selects the energy floor:
    ``"full-charge"`` requires one full charge worth of energy,
    ``"partial-charge"`` requires the charger energy per minute.
    """

    t_charge_min: int
    t_ov_min: float
    sigma_max_kw: float = DEFAULT_SIGMA_MAX_KW
    min_energy_mode: str = "full-charge"

    def __post_init__(self):
        if self.t_charge_min < 1:
            raise ValueError("t_charge_min must be >= 1")
        if not 0 <= self.t_ov_min < self.t_charge_min:
            raise ValueError("need 0 <= t_ov_min < t_charge_min")
        if self.sigma_max_kw <= 0:
            raise ValueError("sigma_max_kw must be positive")
        if self.min_energy_mode not in ENERGY_FLOOR_MODES:
            raise ValueError(f"min_energy_mode must be one of "
                             f"{ENERGY_FLOOR_MODES}")

    @classmethod
    def slide_one_sample(cls, t_charge_min: int, cadence_s: int,
                         sigma_max_kw: float = DEFAULT_SIGMA_MAX_KW,
                         min_energy_mode: str = "full-charge") -> "WindowParams":
        """Maximal-coverage params: consecutive windows one sample apart."""
        return cls(t_charge_min=t_charge_min,
                   t_ov_min=t_charge_min - cadence_s / 60.0,
                   sigma_max_kw=sigma_max_kw,
                   min_energy_mode=min_energy_mode)

    def sample_counts(self, cadence_s: int) -> tuple[int, int]:
        """(window, stride) lengths in samples; both must be whole."""
        w_s = self.t_charge_min * 60
        stride_s = (self.t_charge_min - self.t_ov_min) * 60
        if w_s % cadence_s != 0:
            raise ValueError(f"t_charge ({self.t_charge_min} min) is not a "
                             f"whole number of {cadence_s}-second samples")
        stride = stride_s / cadence_s
        if abs(stride - round(stride)) > 1e-9 or round(stride) < 1:
            raise ValueError(f"window stride ({stride_s} s) is not a whole "
                             f"number of {cadence_s}-second samples")
        return w_s // cadence_s, int(round(stride))


@dataclass(frozen=True)
class CandidateWindows:
    """Every overlapping candidate window of one day, with per-window stats.

    Windows containing a missing power sample are flagged invalid and carry
    NaN statistics.
    """

    turbine_id: str
    date: dt.date
    cadence_s: int
    t_charge_min: int
    window_samples: int
    stride_samples: int
    start_times: np.ndarray
    start_indices: np.ndarray
    mean_kw: np.ndarray
    std_kw: np.ndarray
    valid: np.ndarray

    def __len__(self) -> int:
        return self.start_times.size

    @property
    def n_valid(self) -> int:
        return int(np.count_nonzero(self.valid))


@dataclass(frozen=True)
class StableWindow:
    """A candidate that passed the stability and energy constraints."""

    start_time: int  # epoch seconds
    start_index: int
    t_charge_min: int
    mean_power_kw: float
    power_std_kw: float
    energy_kwh: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "energy_kwh",
                           self.mean_power_kw * self.t_charge_min / 60.0)

    @property
    def end_time(self) -> int:
        return self.start_time + self.t_charge_min * 60

    def to_dict(self) -> dict:
        return {
            "start": _iso(self.start_time),
            "mean_power_kw": self.mean_power_kw,
            "power_std_kw": self.power_std_kw,
            "energy_kwh": self.energy_kwh,
        }


@dataclass(frozen=True)
class DailyResult:
    """One day's selected windows, energy total, and EV count."""

    date: dt.date
    turbine_id: str
    n_windows: int
    total_energy_kwh: float
    ev_count: int
    windows: tuple[StableWindow, ...]
    n_candidates: int
    n_valid: int
    n_stable: int

    def to_dict(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "turbine_id": self.turbine_id,
            "n_windows": self.n_windows,
            "total_energy_kwh": self.total_energy_kwh,
            "ev_count": self.ev_count,
            "n_candidates": self.n_candidates,
            "n_valid": self.n_valid,
            "n_stable": self.n_stable,
            "windows": [w.to_dict() for w in self.windows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True,
                          separators=(",", ":"))


def enumerate_windows(power: PowerSeries,
                      params: WindowParams) -> CandidateWindows:
    """All candidate windows of one day at stride (t_charge - t_ov).

    Candidates start at the day's first sample and advance by the stride;
    each lies fully inside the day. A day shorter than the window yields an
    empty result (with a warning).
    """
    dates = np.unique(power.times // DAY_S)
    if dates.size > 1:
        raise ValueError("enumerate_windows expects a single-day power slice")
    date = dt.datetime.fromtimestamp(int(power.times[0]),
                                     tz=dt.timezone.utc).date()
    w, stride = params.sample_counts(power.cadence_s)
    means, stds, valid = sliding_mean_std(power.values, w, stride)
    if means.size == 0:
        warnings.warn(f"day {date} has {len(power)} samples, shorter than the "
                      f"{w}-sample charge window; no candidates")
    n = means.size
    start_indices = stride * np.arange(n, dtype=np.int64)
    return CandidateWindows(
        turbine_id=power.turbine_id,
        date=date,
        cadence_s=power.cadence_s,
        t_charge_min=params.t_charge_min,
        window_samples=w,
        stride_samples=stride,
        start_times=power.times[0] + start_indices * power.cadence_s,
        start_indices=start_indices,
        mean_kw=means,
        std_kw=stds,
        valid=valid,
    )


def energy_floor_kwh(params: WindowParams, profile: ChargingProfile) -> float:
    """Minimum window energy: one full charge, or charger energy per minute."""
    if params.min_energy_mode == "full-charge":
        return energy_per_charge(profile)
    return profile.charger_power_kw / 60.0


def filter_stable(candidates: CandidateWindows, params: WindowParams,
                  profile: ChargingProfile) -> list[StableWindow]:
    """Keep candidates with no missing samples, std within the threshold,
    and energy at or above the floor; sorted by start time."""
    floor = energy_floor_kwh(params, profile)
    hours = params.t_charge_min / 60.0
    keep = (candidates.valid
            & (candidates.std_kw <= params.sigma_max_kw)
            & (candidates.mean_kw * hours >= floor))
    return [
        StableWindow(start_time=int(candidates.start_times[i]),
                     start_index=int(candidates.start_indices[i]),
                     t_charge_min=candidates.t_charge_min,
                     mean_power_kw=float(candidates.mean_kw[i]),
                     power_std_kw=float(candidates.std_kw[i]))
        for i in np.flatnonzero(keep)
    ]


def select_nonoverlapping(stable: list[StableWindow]) -> list[StableWindow]:
    """Earliest-start greedy scan keeping pairwise disjoint windows."""
    selected: list[StableWindow] = []
    last_end = None
    prev_start = None
    for win in stable:
        if prev_start is not None and win.start_time < prev_start:
            raise ValueError("stable windows must be sorted by start time")
        prev_start = win.start_time
        if last_end is None or win.start_time >= last_end:
            selected.append(win)
            last_end = win.end_time
    return selected


def daily_energy(selected: list[StableWindow]) -> float:
    """Total energy (kWh) of the selected disjoint windows."""
    return float(sum(w.energy_kwh for w in selected))


def ev_count(energy_kwh: float, profile: ChargingProfile) -> int:
    """Whole EV charges covered by ``energy_kwh``."""
    if energy_kwh < 0:
        raise ValueError("energy must be non-negative")
    return int(math.floor(energy_kwh / energy_per_charge(profile)))


def analyze_day(power: PowerSeries, params: WindowParams,
                profile: ChargingProfile) -> DailyResult:
    """Run the full window pipeline on one calendar day of power data."""
    candidates = enumerate_windows(power, params)
    stable = filter_stable(candidates, params, profile)
    selected = select_nonoverlapping(stable)
    energy = daily_energy(selected)
    return DailyResult(
        date=candidates.date,
        turbine_id=power.turbine_id,
        n_windows=len(selected),
        total_energy_kwh=energy,
        ev_count=ev_count(energy, profile),
        windows=tuple(selected),
        n_candidates=len(candidates),
        n_valid=candidates.n_valid,
        n_stable=len(stable),
    )
