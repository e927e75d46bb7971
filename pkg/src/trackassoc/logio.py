"""Sensor log container and the CSV file formats used by the harness.

A log directory holds one file per stream::

    camera.csv  t_s,target_id,px_m,py_m,rel_heading_deg,rel_speed_mps,length_m,width_m
    v2v.csv     t_s,vehicle_id,lat_deg,lon_deg,heading_deg,speed_mps,length_m,width_m
    host.csv    t_s,lat_deg,lon_deg,heading_deg,speed_mps

and optionally ``truth.csv`` (``tick_s,vehicle_id,camera_id``) with the ground
truth pairing per sync tick. All timestamps share one clock.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from .geodesy import GeodesyError, GeoPoint
from .metrics import GroundTruthMap
from .records import BsmRecord, CameraRecord, HostState

# decimals written per column kind; in-memory logs are rounded the same way
DECIMALS = {"tick": 6, "t": 4, "xy": 6, "deg": 12, "angle": 4, "speed": 4, "dim": 3}

CAMERA_COLUMNS = ("t_s", "target_id", "px_m", "py_m", "rel_heading_deg", "rel_speed_mps", "length_m", "width_m")
V2V_COLUMNS = ("t_s", "vehicle_id", "lat_deg", "lon_deg", "heading_deg", "speed_mps", "length_m", "width_m")
HOST_COLUMNS = ("t_s", "lat_deg", "lon_deg", "heading_deg", "speed_mps")
TRUTH_COLUMNS = ("tick_s", "vehicle_id", "camera_id")

_KINDS = {
    "t_s": "t", "px_m": "xy", "py_m": "xy", "lat_deg": "deg", "lon_deg": "deg",
    "rel_heading_deg": "angle", "heading_deg": "angle", "rel_speed_mps": "speed",
    "speed_mps": "speed", "length_m": "dim", "width_m": "dim",
}


class LogFormatError(ValueError):
    def __init__(self, path, row, column, message):
        where = f"{Path(path).name}"
        if row is not None:
            where += f" row {row}"
        if column is not None:
            where += f" column {column!r}"
        super().__init__(f"{where}: {message}")
        self.path, self.row, self.column = path, row, column


class LogOrderError(LogFormatError):
    pass


@dataclass
class SensorLog:
    """Timestamp-ordered camera, V2V and host streams.

    ``camera_owner`` maps camera target ids to the true vehicle id when the
    log comes from the simulator; it is not part of the file format.
    """

    camera: list = field(default_factory=list)
    v2v: list = field(default_factory=list)
    host: list = field(default_factory=list)
    camera_owner: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.camera) + len(self.v2v) + len(self.host)

    def time_span(self):
        times = [r.t for stream in (self.camera, self.v2v, self.host) for r in stream[:1] + stream[-1:]]
        if not times:
            return None
        return min(times), max(times)


def rnd(value: float, kind: str) -> float:
    return round(float(value), DECIMALS[kind])


def _fmt(value, column):
    kind = _KINDS.get(column)
    if kind is None:
        return str(value)
    return f"{value:.{DECIMALS[kind]}f}"


def _write(path: Path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v, c) for v, c in zip(row, columns)])


def write_log(log: SensorLog, directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    _write(d / "camera.csv", CAMERA_COLUMNS,
           ((r.t, r.target_id, r.px, r.py, r.rel_heading, r.rel_speed, r.length, r.width) for r in log.camera))
    _write(d / "v2v.csv", V2V_COLUMNS,
           ((r.t, r.vehicle_id, r.lat, r.lon, r.heading, r.speed, r.length, r.width) for r in log.v2v))
    _write(d / "host.csv", HOST_COLUMNS, ((r.t, r.lat, r.lon, r.heading, r.speed) for r in log.host))


def _read(path: Path, columns):
    if not path.exists():
        raise LogFormatError(path, None, None, "file not found")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise LogFormatError(path, None, None, "empty file, header missing") from None
        missing = [c for c in columns if c not in header]
        if missing:
            raise LogFormatError(path, 0, None, f"missing required column(s): {', '.join(missing)}")
        idx = [header.index(c) for c in columns]
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise LogFormatError(path, lineno, None, f"expected {len(header)} fields, got {len(row)}")
            yield lineno, {c: row[i].strip() for c, i in zip(columns, idx)}


def _num(path, lineno, rec, column):
    raw = rec[column]
    try:
        v = float(raw)
    except ValueError:
        raise LogFormatError(path, lineno, column, f"not a number: {raw!r}") from None
    if not math.isfinite(v):
        raise LogFormatError(path, lineno, column, f"non-finite value {raw!r}")
    return v


def _geo(path, lineno, rec):
    lat = _num(path, lineno, rec, "lat_deg")
    lon = _num(path, lineno, rec, "lon_deg")
    try:
        GeoPoint(lat, lon)
    except GeodesyError as exc:
        column = "lat_deg" if str(exc).startswith("lat") else "lon_deg"
        raise LogFormatError(path, lineno, column, str(exc)) from None
    return lat, lon


def _check_order(path, records, key):
    last = {}
    for lineno, r in records:
        k = key(r)
        if k in last and r.t < last[k]:
            raise LogOrderError(path, lineno, "t_s", f"timestamp {r.t} goes backwards in stream {k!r} (after {last[k]})")
        last[k] = r.t


def ingest_log(directory) -> SensorLog:
    """Read and validate a log directory."""
    d = Path(directory)
    camera, v2v, host = [], [], []
    p = d / "camera.csv"
    for lineno, rec in _read(p, CAMERA_COLUMNS):
        camera.append((lineno, CameraRecord(
            t=_num(p, lineno, rec, "t_s"), target_id=rec["target_id"],
            px=_num(p, lineno, rec, "px_m"), py=_num(p, lineno, rec, "py_m"),
            rel_heading=_num(p, lineno, rec, "rel_heading_deg"), rel_speed=_num(p, lineno, rec, "rel_speed_mps"),
            length=_num(p, lineno, rec, "length_m"), width=_num(p, lineno, rec, "width_m"),
        )))
    p = d / "v2v.csv"
    for lineno, rec in _read(p, V2V_COLUMNS):
        lat, lon = _geo(p, lineno, rec)
        v2v.append((lineno, BsmRecord(
            t=_num(p, lineno, rec, "t_s"), vehicle_id=rec["vehicle_id"], lat=lat, lon=lon,
            heading=_num(p, lineno, rec, "heading_deg"), speed=_num(p, lineno, rec, "speed_mps"),
            length=_num(p, lineno, rec, "length_m"), width=_num(p, lineno, rec, "width_m"),
        )))
    p = d / "host.csv"
    for lineno, rec in _read(p, HOST_COLUMNS):
        lat, lon = _geo(p, lineno, rec)
        host.append((lineno, HostState(
            t=_num(p, lineno, rec, "t_s"), lat=lat, lon=lon,
            heading=_num(p, lineno, rec, "heading_deg"), speed=_num(p, lineno, rec, "speed_mps"),
        )))
    _check_order(d / "camera.csv", camera, lambda r: r.target_id)
    _check_order(d / "v2v.csv", v2v, lambda r: r.vehicle_id)
    _check_order(d / "host.csv", host, lambda r: "host")
    # stable sort: equal timestamps keep file order
    return SensorLog(
        camera=sorted((r for _, r in camera), key=lambda r: r.t),
        v2v=sorted((r for _, r in v2v), key=lambda r: r.t),
        host=sorted((r for _, r in host), key=lambda r: r.t),
    )


def write_truth(truth: GroundTruthMap, path) -> None:
    rows = []
    for t in sorted(truth.ticks):
        t_txt = f"{t:.{DECIMALS['tick']}f}"
        if not truth[t]:
            rows.append((t_txt, "", ""))
        for vid, cam in sorted(truth[t].items()):
            rows.append((t_txt, vid, "" if cam is None else cam))
    _write(Path(path), TRUTH_COLUMNS, rows)


def read_truth(path) -> GroundTruthMap:
    p = Path(path)
    ticks: dict = {}
    for lineno, rec in _read(p, TRUTH_COLUMNS):
        mapping = ticks.setdefault(_num(p, lineno, rec, "tick_s"), {})
        if rec["vehicle_id"]:
            mapping[rec["vehicle_id"]] = rec["camera_id"] or None
    return GroundTruthMap(ticks)


def age_within(t: float, t_last: float, window: float) -> bool:
    """``t - t_last <= window`` at tick precision, immune to float round-off."""
    return round(t - t_last, DECIMALS["tick"]) <= window


def sync_ticks(log: SensorLog, rate: float) -> list[float]:
    """Free-running trigger times starting at the first event of the log.

    ``ceil(duration * rate)`` ticks are issued; times are rounded to the
    tick precision used in ``truth.csv``.
    """
    span = log.time_span()
    if span is None:
        return []
    t0, t1 = span
    n = math.ceil(round((t1 - t0) * rate, 6))
    return [round(t0 + k / rate, DECIMALS["tick"]) for k in range(n)]
