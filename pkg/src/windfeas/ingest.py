"""Tower-file ingestion and gap-aware wind series handling.

Normalizes delimiter-separated tower data onto a regular time grid
(missing rows and sentinel values become NaN samples), imputes short
missing runs with a cascading 4-point neighbour average, records long
runs as gaps, and produces midnight-aligned interval averages that never
mix observed data with missing segments.

All timestamps are UTC epoch seconds; naive input timestamps are treated
as UTC.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._kernels import impute_cascade

__all__ = [
    "ParseError",
    "WindSample",
    "WindSeries",
    "TowerSchema",
    "parse_tower_file",
    "impute_short_gaps",
    "detect_long_gaps",
    "resample_average",
    "missing_fraction_by_month",
    "circular_mean_deg",
    "day_slices",
    "write_series_csv",
    "read_series_csv",
    "write_gap_manifest",
]

DAY_S = 86400

DEFAULT_SENTINELS = ("", "NA", "NaN", "nan", "-999", "-999.0")


class ParseError(ValueError):
    """Structural problem in an input file; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _utc(ts: int) -> dt.datetime:
    return dt.datetime.fromtimestamp(int(ts), tz=dt.timezone.utc)


def _iso(ts: int) -> str:
    return _utc(ts).strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_iso(text: str) -> int:
    s = text.strip()
    if s.endswith("Z"):
        s = s[:-1] + "+00:00"
    d = dt.datetime.fromisoformat(s)
    if d.tzinfo is None:
        d = d.replace(tzinfo=dt.timezone.utc)
    return int(d.timestamp())


@dataclass(frozen=True)
class WindSample:
    """One observation: UTC timestamp, speed (m/s), optional direction (deg)."""

    timestamp: dt.datetime
    speed: float  # NaN = missing
    direction: float = math.nan  # NaN = missing
    measurement_height: float = math.nan

    def __post_init__(self):
        if not math.isnan(self.speed) and self.speed < 0:
            raise ValueError(f"speed must be missing or >= 0, got {self.speed}")
        if not math.isnan(self.direction) and not 0 <= self.direction < 360:
            raise ValueError(f"direction must lie in [0, 360), got {self.direction}")


@dataclass(frozen=True)
class WindSeries:
    """Regular-cadence wind observations with explicit gap ranges.

    ``times`` is a strictly increasing int64 epoch-second grid with constant
    spacing ``cadence_s``; ``speed`` and ``direction`` are float64 with NaN
    marking missing values. ``gaps`` is a sorted tuple of disjoint
    ``[start, end)`` epoch ranges whose samples are all missing.
    """

    site_id: str
    cadence_s: int
    times: np.ndarray
    speed: np.ndarray
    direction: np.ndarray
    height_m: float
    gaps: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=np.int64)
        speed = np.ascontiguousarray(self.speed, dtype=np.float64)
        direction = np.ascontiguousarray(self.direction, dtype=np.float64)
        if times.ndim != 1 or times.size == 0:
            raise ValueError("times must be a non-empty 1-D array")
        if speed.shape != times.shape or direction.shape != times.shape:
            raise ValueError("speed/direction must match times in shape")
        if self.cadence_s <= 0:
            raise ValueError("cadence_s must be positive")
        if times.size > 1:
            diffs = np.diff(times)
            if not np.all(diffs == self.cadence_s):
                raise ValueError("timestamps must be strictly increasing with "
                                 f"constant spacing {self.cadence_s} s")
        with np.errstate(invalid="ignore"):
            if np.any(speed < 0):
                raise ValueError("speeds must be missing or >= 0")
            if np.any((direction < 0) | (direction >= 360)):
                raise ValueError("directions must lie in [0, 360)")
        gaps = tuple((int(a), int(b)) for a, b in self.gaps)
        prev_end = None
        for a, b in gaps:
            if b <= a:
                raise ValueError(f"empty gap range [{a}, {b})")
            if prev_end is not None and a < prev_end:
                raise ValueError("gap ranges must be disjoint and sorted")
            prev_end = b
            inside = (times >= a) & (times < b)
            if not np.all(np.isnan(speed[inside])):
                raise ValueError("every sample inside a gap must be missing")
        for arr in (times, speed, direction):
            arr.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "speed", speed)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "gaps", gaps)

    def __len__(self) -> int:
        return self.times.size

    @property
    def start_time(self) -> int:
        return int(self.times[0])

    @property
    def end_time(self) -> int:
        """Exclusive end of the covered span (epoch seconds)."""
        return int(self.times[-1]) + self.cadence_s

    @property
    def missing_mask(self) -> np.ndarray:
        return np.isnan(self.speed)

    @property
    def samples(self) -> list[WindSample]:
        """Materialized per-sample view; intended for small series."""
        return [
            WindSample(_utc(t), float(s), float(d), self.height_m)
            for t, s, d in zip(self.times, self.speed, self.direction)
        ]

    def replace(self, **kw) -> "WindSeries":
        data = {
            "site_id": self.site_id,
            "cadence_s": self.cadence_s,
            "times": self.times,
            "speed": self.speed,
            "direction": self.direction,
            "height_m": self.height_m,
            "gaps": self.gaps,
        }
        data.update(kw)
        return WindSeries(**data)


@dataclass(frozen=True)
class TowerSchema:
    """Column mapping and value conventions for one tower file format.

    ``timestamp_col`` may be a single column name or a list of columns whose
    text is joined with a space before parsing (for split date/time files).
    ``timestamp_format`` is a ``strptime`` pattern, ``"iso8601"``, or
    ``"epoch"`` (seconds). ``sentinels`` are raw strings denoting missing
    values; unparseable or negative speeds also become missing.
    """

    timestamp_col: str | tuple[str, ...]
    speed_col: str
    height_m: float
    direction_col: str | None = None
    delimiter: str = ","
    timestamp_format: str = "iso8601"
    sentinels: tuple[str, ...] = DEFAULT_SENTINELS
    cadence_s: int | None = None
    site_id: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "TowerSchema":
        d = dict(d)
        ts = d.get("timestamp_col")
        if isinstance(ts, (list, tuple)):
            d["timestamp_col"] = tuple(ts)
        if "sentinels" in d and d["sentinels"] is not None:
            d["sentinels"] = tuple(str(s) for s in d["sentinels"])
        known = {
            "timestamp_col", "speed_col", "height_m", "direction_col",
            "delimiter", "timestamp_format", "sentinels", "cadence_s",
            "site_id",
        }
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown schema fields: {sorted(unknown)}")
        return cls(**d)

    @property
    def timestamp_cols(self) -> tuple[str, ...]:
        if isinstance(self.timestamp_col, tuple):
            return self.timestamp_col
        return (self.timestamp_col,)


def _make_timestamp_parser(fmt: str):
    if fmt == "iso8601":
        return _parse_iso
    if fmt == "epoch":
        return lambda s: int(float(s))

    def parse(s: str) -> int:
        d = dt.datetime.strptime(s.strip(), fmt)
        if d.tzinfo is None:
            d = d.replace(tzinfo=dt.timezone.utc)
        return int(d.timestamp())

    return parse


def _parse_value(raw: str, sentinels: tuple[str, ...]) -> float:
    text = raw.strip()
    if text in sentinels:
        return math.nan
    try:
        return float(text)
    except ValueError:
        return math.nan


def parse_tower_file(path: str | Path, schema: TowerSchema) -> WindSeries:
    """Parse a delimiter-separated tower file into a normalized WindSeries.

    Rows are sorted by timestamp and reindexed onto the file's native
    cadence (declared in the schema or inferred as the smallest timestamp
    difference); absent rows become missing samples. Sentinel-encoded or
    unparseable speed/direction values become missing. Duplicate
    timestamps and off-grid timestamps raise :class:`ParseError` with the
    offending line number.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    parse_ts = _make_timestamp_parser(schema.timestamp_format)

    rows: list[tuple[int, float, float, int]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        header = [h.strip() for h in header]
        col_index: dict[str, int] = {}
        needed = list(schema.timestamp_cols) + [schema.speed_col]
        if schema.direction_col:
            needed.append(schema.direction_col)
        for name in needed:
            if name not in header:
                raise ParseError(f"malformed header: column {name!r} not found "
                                 f"(have {header})", line=1)
            col_index[name] = header.index(name)

        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(header):
                raise ParseError(f"row has {len(row)} fields, header has "
                                 f"{len(header)}", line=lineno)
            ts_text = " ".join(row[col_index[c]] for c in schema.timestamp_cols)
            try:
                ts = parse_ts(ts_text)
            except (ValueError, OverflowError):
                raise ParseError(f"unparseable timestamp {ts_text!r}",
                                 line=lineno) from None
            speed = _parse_value(row[col_index[schema.speed_col]],
                                 schema.sentinels)
            if speed < 0:
                speed = math.nan
            direction = math.nan
            if schema.direction_col:
                direction = _parse_value(row[col_index[schema.direction_col]],
                                         schema.sentinels)
                if not math.isnan(direction):
                    direction = direction % 360.0
            rows.append((ts, speed, direction, lineno))

    if not rows:
        raise ParseError("file contains no data rows", line=1)

    rows.sort(key=lambda r: r[0])
    ts_arr = np.array([r[0] for r in rows], dtype=np.int64)
    dup = np.nonzero(np.diff(ts_arr) == 0)[0]
    if dup.size:
        i = int(dup[0]) + 1
        raise ParseError(f"duplicate timestamp {_iso(int(ts_arr[i]))}",
                         line=rows[i][3])

    cadence = schema.cadence_s
    if cadence is None:
        if len(rows) < 2:
            raise ParseError("cannot infer cadence from a single row; "
                             "declare cadence_s in the schema", line=2)
        cadence = int(np.diff(ts_arr).min())
    off_grid = np.nonzero((ts_arr - ts_arr[0]) % cadence != 0)[0]
    if off_grid.size:
        i = int(off_grid[0])
        raise ParseError(f"timestamp {_iso(int(ts_arr[i]))} is not on the "
                         f"{cadence}-second grid", line=rows[i][3])

    n = int((ts_arr[-1] - ts_arr[0]) // cadence) + 1
    times = ts_arr[0] + cadence * np.arange(n, dtype=np.int64)
    speed = np.full(n, np.nan)
    direction = np.full(n, np.nan)
    idx = (ts_arr - ts_arr[0]) // cadence
    speed[idx] = [r[1] for r in rows]
    direction[idx] = [r[2] for r in rows]

    site = schema.site_id or path.stem
    return WindSeries(site_id=site, cadence_s=int(cadence), times=times,
                      speed=speed, direction=direction,
                      height_m=schema.height_m)


def _missing_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True as (start_index, length)."""
    if not mask.any():
        return []
    padded = np.concatenate(([False], mask, [False]))
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    starts, ends = edges[0::2], edges[1::2]
    return [(int(s), int(e - s)) for s, e in zip(starts, ends)]


def impute_short_gaps(series: WindSeries, max_run: int = 5) -> WindSeries:
    """Fill missing runs of length <= ``max_run``; record longer runs as gaps.

    Each missing sample takes the mean of the available values at offsets
    {-2, -1, +1, +2}, swept left to right so earlier imputations feed later
    ones; the sweep repeats until no fillable sample remains (runs at the
    head of the series need the extra passes). Direction is left untouched.
    """
    if max_run < 1:
        raise ValueError("max_run must be >= 1")
    mask = series.missing_mask
    if mask.all():
        raise ValueError(f"series {series.site_id!r} has no non-missing samples")
    runs = _missing_runs(mask)
    targets = np.concatenate(
        [np.arange(s, s + ln, dtype=np.int64) for s, ln in runs if ln <= max_run]
    ) if any(ln <= max_run for _, ln in runs) else np.empty(0, dtype=np.int64)

    speed = series.speed
    pending = targets
    while pending.size:
        speed = impute_cascade(speed, pending)
        nxt = pending[np.isnan(speed[pending])]
        if nxt.size == pending.size:
            break
        pending = nxt

    gaps = tuple(
        (int(series.times[s]), int(series.times[s + ln - 1]) + series.cadence_s)
        for s, ln in runs if ln > max_run
    )
    return series.replace(speed=speed, gaps=gaps)


def detect_long_gaps(series: WindSeries, min_gap_s: int) -> list[tuple[int, int]]:
    """Return maximal missing runs lasting at least ``min_gap_s`` as [start, end)."""
    if min_gap_s < series.cadence_s:
        raise ValueError("min_gap_s must be >= the series cadence")
    out = []
    for s, ln in _missing_runs(series.missing_mask):
        if ln * series.cadence_s >= min_gap_s:
            start = int(series.times[s])
            out.append((start, start + ln * series.cadence_s))
    return out


def circular_mean_deg(directions: Iterable[float]) -> float:
    """Vector mean of directions in degrees, NaN-ignoring, result in [0, 360)."""
    d = np.asarray(list(directions) if not isinstance(directions, np.ndarray)
                   else directions, dtype=np.float64)
    d = d[~np.isnan(d)]
    if d.size == 0:
        return math.nan
    rad = np.radians(d)
    ang = math.degrees(math.atan2(np.sin(rad).mean(), np.cos(rad).mean())) % 360.0
    return 0.0 if ang >= 360.0 else ang


def resample_average(series: WindSeries, interval_s: int) -> WindSeries:
    """Average speeds into midnight-aligned windows of ``interval_s`` seconds.

    Output cadence equals the interval; a window yields a value only when
    every one of its ``interval_s / cadence_s`` samples is present and
    non-missing (so no averaged value ever spans a gap). Direction is the
    circular mean of the directions available inside valid windows. Gust
    factors are not applied.
    """
    cad = series.cadence_s
    if interval_s <= 0 or interval_s % cad != 0:
        raise ValueError(f"interval ({interval_s} s) must be a positive "
                         f"multiple of the cadence ({cad} s)")
    if DAY_S % interval_s != 0:
        raise ValueError(f"interval ({interval_s} s) must divide one day so "
                         "windows align to midnight")
    k = interval_s // cad
    t0, t_last = series.start_time, int(series.times[-1])
    w0 = t0 - (t0 % interval_s)
    w_last = t_last - (t_last % interval_s)
    out_times = np.arange(w0, w_last + 1, interval_s, dtype=np.int64)

    idx_start = np.searchsorted(series.times, out_times, side="left")
    idx_end = np.searchsorted(series.times, out_times + interval_s, side="left")
    counts = idx_end - idx_start
    sums = np.add.reduceat(series.speed, idx_start)
    # reduceat repeats the element when start == next start; impossible here
    # because every aligned window in the span holds at least one grid point.
    with np.errstate(invalid="ignore"):
        means = np.where(counts == k, sums / k, np.nan)

    rad = np.radians(series.direction)
    has_dir = ~np.isnan(series.direction)
    sin_sum = np.add.reduceat(np.where(has_dir, np.sin(rad), 0.0), idx_start)
    cos_sum = np.add.reduceat(np.where(has_dir, np.cos(rad), 0.0), idx_start)
    dir_counts = np.add.reduceat(has_dir.astype(np.float64), idx_start)
    out_dir = np.degrees(np.arctan2(sin_sum, cos_sum)) % 360.0
    out_dir[out_dir >= 360.0] = 0.0
    out_dir[(dir_counts == 0) | np.isnan(means)] = np.nan

    gaps = _align_gaps(series.gaps, interval_s, w0, w_last + interval_s)
    return WindSeries(site_id=series.site_id, cadence_s=interval_s,
                      times=out_times, speed=means, direction=out_dir,
                      height_m=series.height_m, gaps=gaps)


def _align_gaps(gaps, interval_s: int, lo: int, hi: int):
    """Expand gap ranges outward to interval boundaries, merge, clip to [lo, hi)."""
    aligned = []
    for a, b in gaps:
        a2 = a - (a % interval_s)
        b2 = -(-b // interval_s) * interval_s
        a2, b2 = max(a2, lo), min(b2, hi)
        if b2 <= a2:
            continue
        if aligned and a2 <= aligned[-1][1]:
            aligned[-1] = (aligned[-1][0], max(aligned[-1][1], b2))
        else:
            aligned.append((a2, b2))
    return tuple(aligned)


def missing_fraction_by_month(series: WindSeries) -> dict[str, float]:
    """Missing fraction per calendar month touched by the series.

    The denominator is the count of cadence grid points in the full calendar
    month; grid points before the series start or after its end count as
    missing, so partially covered months report high fractions.
    """
    cad = series.cadence_s
    t0 = series.start_time
    first = _utc(series.start_time)
    last = _utc(int(series.times[-1]))
    out: dict[str, float] = {}
    year, month = first.year, first.month
    while (year, month) <= (last.year, last.month):
        m_start = int(dt.datetime(year, month, 1, tzinfo=dt.timezone.utc).timestamp())
        ny, nm = (year + 1, 1) if month == 12 else (year, month + 1)
        m_end = int(dt.datetime(ny, nm, 1, tzinfo=dt.timezone.utc).timestamp())
        # grid instants t = t0 + j*cad inside [m_start, m_end); j may be
        # negative for the part of the first month before the series starts
        j_lo = -((t0 - m_start) // cad)
        j_hi = (m_end - 1 - t0) // cad
        expected = j_hi - j_lo + 1
        sel = (series.times >= m_start) & (series.times < m_end)
        observed = int(np.count_nonzero(~np.isnan(series.speed[sel])))
        out[f"{year:04d}-{month:02d}"] = (expected - observed) / expected
        year, month = ny, nm
    return out


def day_slices(times: np.ndarray) -> list[tuple[dt.date, slice]]:
    """Split a sorted epoch-second array into per-UTC-day slices."""
    days = times // DAY_S
    change = np.flatnonzero(np.diff(days)) + 1
    bounds = np.concatenate(([0], change, [times.size]))
    out = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        date = _utc(int(times[a])).date()
        out.append((date, slice(int(a), int(b))))
    return out


def write_series_csv(series: WindSeries, path: str | Path) -> None:
    """Serialize to columnar CSV: ISO-8601 UTC timestamp, speed, direction, missing."""
    meta = {"site_id": series.site_id, "cadence_s": series.cadence_s,
            "height_m": series.height_m}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# windfeas-series {json.dumps(meta, sort_keys=True)}\n")
        fh.write("timestamp,speed_ms,direction_deg,missing\n")
        for t, s, d in zip(series.times, series.speed, series.direction):
            s_txt = "" if math.isnan(s) else repr(float(s))
            d_txt = "" if math.isnan(d) else repr(float(d))
            miss = 1 if math.isnan(s) else 0
            fh.write(f"{_iso(int(t))},{s_txt},{d_txt},{miss}\n")


def read_series_csv(path: str | Path,
                    manifest_path: str | Path | None = None) -> WindSeries:
    """Read a series written by :func:`write_series_csv`.

    Gap ranges are restored from ``manifest_path`` when given, otherwise the
    series carries no declared gaps.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith("# windfeas-series "):
            raise ParseError("missing '# windfeas-series' metadata line", line=1)
        meta = json.loads(first[len("# windfeas-series "):])
        reader = csv.reader(fh)
        header = next(reader)
        if header[:4] != ["timestamp", "speed_ms", "direction_deg", "missing"]:
            raise ParseError(f"unexpected header {header}", line=2)
        times, speeds, dirs = [], [], []
        for row in reader:
            if not row:
                continue
            times.append(_parse_iso(row[0]))
            speeds.append(float(row[1]) if row[1] else math.nan)
            dirs.append(float(row[2]) if row[2] else math.nan)
    gaps: tuple[tuple[int, int], ...] = ()
    if manifest_path is not None:
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        gaps = tuple((_parse_iso(g["start"]), _parse_iso(g["end"]))
                     for g in manifest["gaps"])
    return WindSeries(site_id=meta["site_id"], cadence_s=int(meta["cadence_s"]),
                      times=np.array(times, dtype=np.int64),
                      speed=np.array(speeds), direction=np.array(dirs),
                      height_m=float(meta["height_m"]), gaps=gaps)


def write_gap_manifest(series: WindSeries, path: str | Path) -> None:
    """Write the gap ranges and missingness summary as JSON."""
    doc = {
        "site_id": series.site_id,
        "cadence_s": series.cadence_s,
        "n_samples": int(len(series)),
        "n_missing": int(series.missing_mask.sum()),
        "gaps": [{"start": _iso(a), "end": _iso(b),
                  "duration_s": b - a} for a, b in series.gaps],
        "missing_fraction_by_month": missing_fraction_by_month(series),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
