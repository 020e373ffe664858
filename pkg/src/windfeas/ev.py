"""EV battery/charger characteristics and derived charge duration."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib.resources import files
from pathlib import Path

__all__ = [
    "ChargingProfile",
    "charge_time_minutes",
    "charge_time_minutes_exact",
    "energy_per_charge",
    "load_charging_profile",
    "default_profile_path",
]


@dataclass(frozen=True)
class ChargingProfile:
    """Battery capacity, state-of-charge window, and charger power.

    ``t_charge_min`` may be supplied (manufacturer figure) or derived; when
    supplied it must agree with capacity * soc span / power to within one
    minute of rounding.
    """

    name: str
    battery_capacity_kwh: float
    charger_power_kw: float
    soc_start: float = 0.0
    soc_end: float = 1.0
    t_charge_min: int | None = None

    def __post_init__(self):
        if self.battery_capacity_kwh <= 0:
            raise ValueError("battery_capacity_kwh must be positive")
        if self.charger_power_kw <= 0:
            raise ValueError("charger_power_kw must be positive")
        if not 0 <= self.soc_start < 1:
            raise ValueError("soc_start must lie in [0, 1)")
        if not 0 < self.soc_end <= 1:
            raise ValueError("soc_end must lie in (0, 1]")
        if self.soc_start >= self.soc_end:
            raise ValueError("soc_start must be below soc_end")
        derived = charge_time_minutes_exact(self)
        if derived <= 0:
            raise ValueError("charge duration must be positive")
        if self.t_charge_min is not None:
            if abs(self.t_charge_min - derived) > 1.0:
                raise ValueError(
                    f"supplied t_charge_min={self.t_charge_min} disagrees with "
                    f"derived {derived:.2f} min by more than one minute")
        else:
            object.__setattr__(self, "t_charge_min",
                               charge_time_minutes(self))


def charge_time_minutes_exact(profile: ChargingProfile) -> float:
    """Unrounded charge duration: 60 * capacity * (soc_end - soc_start) / power."""
    span = profile.soc_end - profile.soc_start
    return 60.0 * profile.battery_capacity_kwh * span / profile.charger_power_kw


def charge_time_minutes(profile: ChargingProfile) -> int:
    """Charge duration rounded half-up to whole minutes (the window length)."""
    if profile.charger_power_kw <= 0:
        raise ValueError("charger power must be positive")
    return int(math.floor(charge_time_minutes_exact(profile) + 0.5))


def energy_per_charge(profile: ChargingProfile) -> float:
    """Energy delivered in one charging session (kWh): capacity * soc span."""
    return profile.battery_capacity_kwh * (profile.soc_end - profile.soc_start)


def load_charging_profile(path: str | Path) -> ChargingProfile:
    """Load a profile from a JSON config file (see data/tesla_model3.json)."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    known = {"name", "battery_capacity_kwh", "charger_power_kw",
             "soc_start", "soc_end", "t_charge_min"}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown EV profile fields: {sorted(unknown)}")
    return ChargingProfile(**doc)


def default_profile_path() -> Path:
    """Bundled reference profile (50 kWh pack, 10-80% fast charge, 100 kW)."""
    return Path(str(files("windfeas").joinpath("data/tesla_model3.json")))
