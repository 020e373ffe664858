"""Pipeline orchestration: ingest through daily analysis to emitted artifacts.

For every (dataset, interval) pair the run writes one directory holding
``report.json``, ``table2_stability.csv``, ``fig7_monthly_evs.csv``,
``fig8_speed_matrix.csv``, ``fig8_power_matrix.csv`` and
``daily_results.csv``, plus a normalized series CSV and gap manifest per
dataset and a run-level ``failures.json``. Outputs are deterministic:
fixed ordering, fixed 6-significant-digit float formatting, no wall-clock
timestamps.
"""

from __future__ import annotations

import datetime as dt
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import sliding_mean_std
from .config import ConfigError, RunConfig
from .ev import ChargingProfile, energy_per_charge, load_charging_profile
from .ingest import (DAY_S, WindSeries, day_slices, detect_long_gaps,
                     impute_short_gaps, missing_fraction_by_month,
                     parse_tower_file, resample_average, write_gap_manifest,
                     write_series_csv, _iso)
from .shear import extrapolate_series
from .stability import WindowParams, analyze_day
from .stats import fit_weibull, summary_stats, windrose
from .turbine import TurbineSpec, load_turbine_library, power_series

__all__ = ["FeasibilityReport", "run", "emit_heatmap_matrix"]


@dataclass
class FeasibilityReport:
    """In-memory view of everything the run emitted."""

    sections: dict[tuple[str, int], dict] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)
    output_dir: Path | None = None

    def section(self, site_id: str, interval_min: int) -> dict:
        return self.sections[(site_id, interval_min)]


def _fmt(value) -> str:
    """Fixed CSV cell formatting: 6 significant digits, NaN/None empty."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return f"{value:.6g}"
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(c) for c in row) + "\n")


def _write_json(path: Path, doc) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit_heatmap_matrix(path: str | Path,
                        daily_windows: list[tuple[dt.date, np.ndarray]],
                        n_cols: int) -> None:
    """Write a days x candidate-window CSV matrix of window means.

    Rows are calendar days; column ``win_k`` holds the k-th candidate
    window's mean (power or speed). Missing or absent windows are empty
    cells; short days are right-padded.
    """
    header = ["date"] + [f"win_{k:04d}" for k in range(n_cols)]
    rows = []
    for date, means in daily_windows:
        cells: list = [date.isoformat()]
        vals = list(means[:n_cols])
        vals += [math.nan] * (n_cols - len(vals))
        cells.extend(float(v) for v in vals)
        rows.append(cells)
    _write_csv(Path(path), header, rows)


def _day_window_means(times: np.ndarray, values: np.ndarray,
                      w: int, stride: int) -> list[tuple[dt.date, np.ndarray]]:
    out = []
    for date, sl in day_slices(times):
        means, _, _ = sliding_mean_std(values[sl], w, stride)
        out.append((date, means))
    return out


def _window_params_for(config: RunConfig, profile: ChargingProfile,
                       cadence_s: int) -> WindowParams:
    t_charge = config.t_charge_min
    if t_charge is None:
        t_charge = profile.t_charge_min
    if config.t_ov_min is not None:
        return WindowParams(t_charge_min=t_charge, t_ov_min=config.t_ov_min,
                            sigma_max_kw=config.sigma_max_kw,
                            min_energy_mode=config.energy_floor_mode)
    return WindowParams.slide_one_sample(t_charge, cadence_s,
                                         sigma_max_kw=config.sigma_max_kw,
                                         min_energy_mode=config.energy_floor_mode)


def _day_overlaps_gap(date: dt.date, gaps) -> bool:
    d0 = int(dt.datetime(date.year, date.month, date.day,
                         tzinfo=dt.timezone.utc).timestamp())
    d1 = d0 + DAY_S
    return any(a < d1 and b > d0 for a, b in gaps)


def _analyze_turbine(spec: TurbineSpec, resampled: WindSeries,
                     config: RunConfig, profile: ChargingProfile,
                     params: WindowParams) -> dict:
    hub = extrapolate_series(resampled, spec.hub_height_m, config.alpha)
    pseries = power_series(spec, hub, config.power_uplift)

    dailies = []
    for date, day_ps in pseries.iter_days():
        result = analyze_day(day_ps, params, profile)
        excluded = _day_overlaps_gap(date, resampled.gaps)
        dailies.append((result, excluded))

    n_cand = sum(r.n_candidates for r, _ in dailies)
    n_valid = sum(r.n_valid for r, _ in dailies)
    n_stable = sum(r.n_stable for r, _ in dailies)

    monthly: dict[str, dict] = {}
    for result, excluded in dailies:
        key = f"{result.date.year:04d}-{result.date.month:02d}"
        m = monthly.setdefault(key, {"energy_kwh": 0.0, "ev_count": 0,
                                     "n_days": 0, "excluded_days": []})
        if excluded:
            m["excluded_days"].append(result.date.isoformat())
        else:
            m["energy_kwh"] += result.total_energy_kwh
            m["ev_count"] += result.ev_count
            m["n_days"] += 1

    return {
        "turbine_id": spec.id,
        "hub_height_m": spec.hub_height_m,
        "cut_in_ms": spec.cut_in,
        "rated_ms": spec.rated_speed,
        "cut_out_ms": spec.cut_out,
        "nominal_kw": spec.nominal_power_kw,
        "n_candidates": n_cand,
        "n_valid": n_valid,
        "n_stable": n_stable,
        "stability_pct_all": 100.0 * n_stable / n_cand if n_cand else 0.0,
        "stability_pct_valid": 100.0 * n_stable / n_valid if n_valid else 0.0,
        "monthly": monthly,
        "daily": [dict(r.to_dict(), excluded=excluded)
                  for r, excluded in dailies],
    }


def _interval_stats(resampled: WindSeries) -> dict:
    stats: dict = {"summary": summary_stats(resampled).to_dict(),
                   "windrose": windrose(resampled).to_dict()}
    try:
        stats["weibull"] = fit_weibull(resampled.speed).to_dict()
        stats["weibull_error"] = None
    except ValueError as exc:
        stats["weibull"] = None
        stats["weibull_error"] = str(exc)
    return stats


def _emit_section(section_dir: Path, section: dict,
                  heatmaps: dict[str, list]) -> None:
    section_dir.mkdir(parents=True, exist_ok=True)
    _write_json(section_dir / "report.json", section)

    turbines = section["turbines"]
    tids = list(turbines)
    _write_csv(
        section_dir / "table2_stability.csv",
        ["turbine_id", "hub_height_m", "cut_in_ms", "rated_ms", "cut_out_ms",
         "nominal_kw", "n_candidates", "n_valid", "n_stable",
         "stability_pct_all", "stability_pct_valid"],
        [[t["turbine_id"], t["hub_height_m"], t["cut_in_ms"], t["rated_ms"],
          t["cut_out_ms"], t["nominal_kw"], t["n_candidates"], t["n_valid"],
          t["n_stable"], t["stability_pct_all"], t["stability_pct_valid"]]
         for t in turbines.values()],
    )

    months = sorted({m for t in turbines.values() for m in t["monthly"]})
    _write_csv(
        section_dir / "fig7_monthly_evs.csv",
        ["month"] + tids,
        [[m] + [turbines[tid]["monthly"].get(m, {}).get("ev_count", 0)
                for tid in tids] for m in months],
    )

    daily_rows = []
    for tid in tids:
        for d in turbines[tid]["daily"]:
            daily_rows.append([d["date"], tid, d["n_candidates"], d["n_valid"],
                               d["n_stable"], d["n_windows"],
                               d["total_energy_kwh"], d["ev_count"],
                               int(d["excluded"])])
    _write_csv(
        section_dir / "daily_results.csv",
        ["date", "turbine_id", "n_candidates", "n_valid", "n_stable",
         "n_selected", "energy_kwh", "ev_count", "excluded"],
        daily_rows,
    )

    for name, (rows, n_cols) in heatmaps.items():
        emit_heatmap_matrix(section_dir / name, rows, n_cols)


def run(config: RunConfig) -> FeasibilityReport:
    """Execute the full pipeline and write all artifacts.

    Per-cell errors (a dataset, interval, or turbine that fails) are
    recorded in ``failures.json`` while the remaining cells still emit.
    """
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = FeasibilityReport(output_dir=out_dir)

    profile = load_charging_profile(config.ev_profile)
    library = load_turbine_library(config.turbine_library)
    if config.turbine_ids is not None:
        missing = [t for t in config.turbine_ids
                   if t not in {s.id for s in library.turbines}]
        if missing:
            raise ConfigError(f"turbines not in library: {missing} "
                              f"(library errors: {library.errors})")
        turbines = [library.get(t) for t in config.turbine_ids]
    else:
        turbines = list(library.turbines)
    if not turbines:
        raise ConfigError(f"no valid turbines in {config.turbine_library}: "
                          f"{library.errors}")
    site_ids = [ds.schema.site_id or Path(ds.path).stem
                for ds in config.datasets]
    if len(set(site_ids)) != len(site_ids):
        raise ConfigError(f"dataset site ids must be unique, got {site_ids}")

    heat_tid = config.heatmap_turbine or turbines[0].id
    if heat_tid not in {t.id for t in turbines}:
        raise ConfigError(f"heatmap_turbine {heat_tid!r} not among the "
                          "selected turbines")

    config_echo = {
        "version": __version__,
        "intervals_min": list(config.intervals_min),
        "alpha": config.alpha,
        "sigma_max_kw": config.sigma_max_kw,
        "energy_floor_mode": config.energy_floor_mode,
        "impute_max_run": config.impute_max_run,
        "power_uplift": config.power_uplift,
        "turbine_library": Path(config.turbine_library).name,
        "ev_profile": {
            "name": profile.name,
            "battery_capacity_kwh": profile.battery_capacity_kwh,
            "charger_power_kw": profile.charger_power_kw,
            "soc_start": profile.soc_start,
            "soc_end": profile.soc_end,
            "t_charge_min": profile.t_charge_min,
            "energy_per_charge_kwh": energy_per_charge(profile),
        },
        "seed": config.seed,
    }

    for ds in config.datasets:
        site = ds.schema.site_id or Path(ds.path).stem
        try:
            raw = parse_tower_file(ds.path, ds.schema)
            series = impute_short_gaps(raw, config.impute_max_run)
        except (OSError, ValueError) as exc:
            report.failures.append({"dataset": site, "stage": "ingest",
                                    "error": str(exc)})
            continue
        write_series_csv(series, out_dir / f"{site}_normalized.csv")
        write_gap_manifest(series, out_dir / f"{site}_gaps.json")
        raw_missing_by_month = missing_fraction_by_month(series)

        for interval in config.intervals_min:
            try:
                resampled = resample_average(series, interval * 60)
                params = _window_params_for(config, profile,
                                            resampled.cadence_s)
                w, stride = params.sample_counts(resampled.cadence_s)
            except ValueError as exc:
                report.failures.append({"dataset": site,
                                        "interval_min": interval,
                                        "stage": "resample",
                                        "error": str(exc)})
                continue

            section: dict = {
                "site_id": site,
                "interval_min": interval,
                "measurement_height_m": series.height_m,
                "config": config_echo,
                "window_params": {
                    "t_charge_min": params.t_charge_min,
                    "t_ov_min": params.t_ov_min,
                    "sigma_max_kw": params.sigma_max_kw,
                    "min_energy_mode": params.min_energy_mode,
                },
                "n_samples": len(resampled),
                "n_missing": int(resampled.missing_mask.sum()),
                "missing_fraction_by_month_raw": raw_missing_by_month,
                "gaps": [{"start": _iso(a), "end": _iso(b)}
                         for a, b in resampled.gaps],
                "stats": _interval_stats(resampled),
                "turbines": {},
            }

            def cell(spec: TurbineSpec):
                try:
                    return spec.id, _analyze_turbine(spec, resampled, config,
                                                     profile, params), None
                except (ValueError, ArithmeticError) as exc:
                    return spec.id, None, str(exc)

            if config.threads > 1:
                with ThreadPoolExecutor(max_workers=config.threads) as pool:
                    results = list(pool.map(cell, turbines))
            else:
                results = [cell(spec) for spec in turbines]
            for tid, payload, error in results:
                if error is not None:
                    report.failures.append({"dataset": site,
                                            "interval_min": interval,
                                            "turbine": tid,
                                            "stage": "analyze",
                                            "error": error})
                else:
                    section["turbines"][tid] = payload

            heat_spec = next(t for t in turbines if t.id == heat_tid)
            hub = extrapolate_series(resampled, heat_spec.hub_height_m,
                                     config.alpha)
            pseries = power_series(heat_spec, hub, config.power_uplift)
            n_cols = (DAY_S // resampled.cadence_s - w) // stride + 1
            heatmaps = {
                "fig8_speed_matrix.csv":
                    (_day_window_means(hub.times, hub.speed, w, stride),
                     n_cols),
                "fig8_power_matrix.csv":
                    (_day_window_means(pseries.times, pseries.values, w,
                                       stride), n_cols),
            }

            section_dir = out_dir / f"{site}_{interval}min"
            _emit_section(section_dir, section, heatmaps)
            report.sections[(site, interval)] = section

    _write_json(out_dir / "failures.json", report.failures)
    return report
