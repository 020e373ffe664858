"""Run configuration: declarative YAML/JSON document mirroring the pipeline."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .ev import default_profile_path
from .ingest import TowerSchema
from .turbine import bundled_library_path

__all__ = ["ConfigError", "DatasetConfig", "RunConfig", "load_run_config"]


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class DatasetConfig:
    path: Path
    schema: TowerSchema


@dataclass(frozen=True)
class RunConfig:
    """Everything one analysis run needs; see README for the file schema."""

    datasets: tuple[DatasetConfig, ...]
    output_dir: Path
    intervals_min: tuple[int, ...] = (1, 2, 3)
    alpha: float = 0.143
    turbine_library: Path = field(default_factory=bundled_library_path)
    turbine_ids: tuple[str, ...] | None = None
    ev_profile: Path = field(default_factory=default_profile_path)
    t_charge_min: int | None = None  # None: derived from the EV profile
    t_ov_min: float | None = None  # None: slide one sample per interval
    sigma_max_kw: float = 0.1
    energy_floor_mode: str = "full-charge"
    impute_max_run: int = 5
    power_uplift: float = 1.0
    heatmap_turbine: str | None = None
    threads: int = 1
    seed: int | None = None  # recorded in report metadata; synthetic use only

    def __post_init__(self):
        if not self.datasets:
            raise ConfigError("at least one dataset is required")
        if not self.intervals_min:
            raise ConfigError("at least one averaging interval is required")
        if any(i <= 0 for i in self.intervals_min):
            raise ConfigError("averaging intervals must be positive minutes")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.power_uplift <= 0:
            raise ConfigError("power_uplift must be positive")


def _resolve(base: Path, value: str) -> Path:
    if value.startswith("bundled:"):
        name = value[len("bundled:"):]
        if name == "tesla_model3":
            return default_profile_path()
        return bundled_library_path(f"turbines_{name}.json")
    p = Path(value)
    return p if p.is_absolute() else (base / p)


def load_run_config(path: str | Path) -> RunConfig:
    """Load a YAML or JSON run configuration; relative paths resolve
    against the config file's directory."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        if path.suffix.lower() in (".yaml", ".yml"):
            doc = yaml.safe_load(fh)
        else:
            doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("run config must be a mapping")
    base = path.parent

    try:
        datasets = []
        for entry in doc.get("datasets", []):
            schema = TowerSchema.from_dict(entry["schema"])
            datasets.append(DatasetConfig(path=_resolve(base, entry["path"]),
                                          schema=schema))
        turbines = doc.get("turbines", {}) or {}
        window = doc.get("window", {}) or {}
        kwargs = dict(
            datasets=tuple(datasets),
            output_dir=_resolve(base, doc["output_dir"]),
            intervals_min=tuple(int(i) for i in doc.get("intervals_min",
                                                        (1, 2, 3))),
            alpha=float(doc.get("alpha", 0.143)),
            impute_max_run=int(doc.get("impute_max_run", 5)),
            power_uplift=float(doc.get("power_uplift", 1.0)),
            heatmap_turbine=doc.get("heatmap_turbine"),
            threads=int(doc.get("threads", 1)),
            seed=doc.get("seed"),
        )
        if "library" in turbines:
            kwargs["turbine_library"] = _resolve(base, turbines["library"])
        if turbines.get("ids"):
            kwargs["turbine_ids"] = tuple(str(t) for t in turbines["ids"])
        if "ev_profile" in doc:
            kwargs["ev_profile"] = _resolve(base, doc["ev_profile"])
        if window.get("t_charge_min") is not None:
            kwargs["t_charge_min"] = int(window["t_charge_min"])
        if window.get("t_ov_min") is not None:
            kwargs["t_ov_min"] = float(window["t_ov_min"])
        if "sigma_max_kw" in window:
            kwargs["sigma_max_kw"] = float(window["sigma_max_kw"])
        if "energy_floor_mode" in window:
            kwargs["energy_floor_mode"] = str(window["energy_floor_mode"])
        return RunConfig(**kwargs)
    except KeyError as exc:
        raise ConfigError(f"missing config key: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
