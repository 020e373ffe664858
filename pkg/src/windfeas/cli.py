"""Command line interface: run, validate-turbines, stats."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import ConfigError, load_run_config
from .ingest import TowerSchema, parse_tower_file, read_series_csv, \
    resample_average
from .report import run as run_pipeline
from .stats import fit_weibull, summary_stats, windrose
from .turbine import load_turbine_library


def _cmd_run(args) -> int:
    config = load_run_config(args.config)
    overrides = {}
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        config = dataclasses.replace(config, **overrides)
    report = run_pipeline(config)
    for (site, interval), section in report.sections.items():
        n_turb = len(section["turbines"])
        print(f"{site} @ {interval} min: {n_turb} turbine(s), "
              f"{section['n_samples']} samples "
              f"({section['n_missing']} missing)")
    if report.failures:
        print(f"{len(report.failures)} cell(s) failed; see failures.json",
              file=sys.stderr)
        return 1
    print(f"wrote {report.output_dir}")
    return 0


def _cmd_validate_turbines(args) -> int:
    lib = load_turbine_library(args.library)
    for spec in lib.turbines:
        print(f"OK   {spec.id}: hub {spec.hub_height_m} m, "
              f"cut-in/rated/cut-out {spec.cut_in}/{spec.rated_speed}/"
              f"{spec.cut_out} m/s, {spec.nominal_power_kw} kW, "
              f"{spec.curve_speeds.size} curve points")
    for label, reason in lib.errors:
        print(f"FAIL {label}: {reason}")
    print(f"{len(lib.turbines)} valid, {len(lib.errors)} rejected")
    return 1 if lib.errors else 0


def _cmd_stats(args) -> int:
    if args.schema:
        with open(args.schema, encoding="utf-8") as fh:
            schema = TowerSchema.from_dict(json.load(fh))
        series = parse_tower_file(args.wind, schema)
    else:
        series = read_series_csv(args.wind)
    resampled = resample_average(series, args.interval * 60)
    doc = {
        "site_id": resampled.site_id,
        "interval_min": args.interval,
        "n_samples": len(resampled),
        "n_missing": int(resampled.missing_mask.sum()),
        "summary": summary_stats(resampled).to_dict(),
        "windrose": windrose(resampled).to_dict(),
    }
    try:
        doc["weibull"] = fit_weibull(resampled.speed).to_dict()
    except ValueError as exc:
        doc["weibull"] = None
        doc["weibull_error"] = str(exc)
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="windfeas",
        description="Off-grid wind-to-EV fast charging feasibility analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a full analysis run")
    p_run.add_argument("--config", required=True, help="YAML/JSON run config")
    p_run.add_argument("--threads", type=int, default=None,
                       help="parallel turbine analysis threads")
    p_run.add_argument("--seed", type=int, default=None,
                       help="seed recorded in the report; only synthetic "
                            "generators in the test harness consume it")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate-turbines",
                           help="validate a turbine library file")
    p_val.add_argument("library", help="JSON or CSV turbine library")
    p_val.set_defaults(func=_cmd_validate_turbines)

    p_stats = sub.add_parser("stats",
                             help="summary/Weibull/windrose statistics")
    p_stats.add_argument("--wind", required=True,
                         help="normalized series CSV, or a raw tower file "
                              "when --schema is given")
    p_stats.add_argument("--interval", type=int, required=True,
                         help="averaging interval in minutes")
    p_stats.add_argument("--schema", default=None,
                         help="JSON schema descriptor for raw tower files")
    p_stats.add_argument("--out", default=None, help="write JSON here "
                         "instead of stdout")
    p_stats.set_defaults(func=_cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
