"""Log replay: sensor tracking, the sync trigger, association and scoring."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from .association import AssociationResult, TrackHistory, associate_tick
from .config import RunConfig
from .geodesy import StaleHostPoseError, bsm_to_detection
from .logio import DECIMALS, SensorLog, age_within, ingest_log, read_truth, sync_ticks
from .metrics import GroundTruthMap, TmaReport, tma
from .records import Sensor
from .sim.scenarios import SCENARIOS
from .state_estimation import TrackStore, sync_estimate

logger = logging.getLogger(__name__)

# replay order for events sharing a timestamp
_HOST, _V2V, _CAMERA = 0, 1, 2


@dataclass
class RunReport:
    ticks: list
    results: list
    counters: dict
    tma: TmaReport | None = None
    config: dict = field(default_factory=dict)

    def timeline(self) -> list[dict]:
        """Per tick, V2V id -> (camera id or None, confidence or None)."""
        return [r.pairs() for r in self.results]

    def vehicles(self) -> list[str]:
        return sorted({v for r in self.results for v in r.pairs()})

    def confidences(self, vehicle_id: str) -> list[float]:
        """Confidence of every tick on which the vehicle was paired with a camera track."""
        out = []
        for pairs in self.timeline():
            cam, conf = pairs.get(vehicle_id, (None, None))
            if cam is not None:
                out.append(conf)
        return out

    def summary(self) -> dict:
        return {
            "ticks": len(self.ticks),
            "counters": dict(self.counters),
            "tma": None if self.tma is None else self.tma.to_dict(),
            "config": self.config,
        }


def _events(log: SensorLog):
    events = [(r.t, _HOST, i, r) for i, r in enumerate(log.host)]
    events += [(r.t, _V2V, i, r) for i, r in enumerate(log.v2v)]
    events += [(r.t, _CAMERA, i, r) for i, r in enumerate(log.camera)]
    events.sort(key=lambda e: e[:3])
    return events


def associate_log(log: SensorLog, cfg: RunConfig, truth: GroundTruthMap | None = None) -> RunReport:
    """Replay a sensor log through tracking and association at the sync rate."""
    store = TrackStore(cfg.models(), staleness=cfg.staleness, velocity_var=cfg.velocity_var)
    histories: dict = {}
    counters = {
        "camera_detections": len(log.camera),
        "v2v_messages": len(log.v2v),
        "host_poses": len(log.host),
        "dropped_no_host_pose": 0,
        "dropped_stale_host_pose": 0,
        "gate_rejections": 0,
        "singleton_ticks": 0,
    }
    ticks = sync_ticks(log, cfg.sync_rate)
    events = _events(log)
    host = None
    results: list[AssociationResult] = []
    k = 0

    def consume(ev):
        nonlocal host
        _, kind, _, rec = ev
        if kind == _HOST:
            host = rec
            return
        if kind == _CAMERA:
            store.process_detection(rec.to_detection())
            return
        if host is None:
            counters["dropped_no_host_pose"] += 1
            return
        try:
            det = bsm_to_detection(host, rec, cfg.host_max_age)
        except StaleHostPoseError as exc:
            counters["dropped_stale_host_pose"] += 1
            logger.warning("dropping BSM: %s", exc)
            return
        store.process_detection(det)

    for t in ticks:
        while k < len(events) and events[k][0] <= t:
            consume(events[k])
            k += 1
        for tr in store.retire_stale(t):
            histories.pop(tr.key, None)
        eligible = []
        for tr in store.live():
            h = histories.get(tr.key)
            if h is None:
                h = histories[tr.key] = TrackHistory(tr.key, cfg.buffer_size)
            h.push(sync_estimate(tr, t), tr.speed, tr.relative_heading)
            # coasting tracks keep their history but sit out association
            if age_within(t, tr.last_update, cfg.coast):
                eligible.append(h)
        result = associate_tick(eligible, t, cfg.threshold, cfg.gates, cfg.confidence_th)
        counters["gate_rejections"] += len(result.rejected)
        counters["singleton_ticks"] += sum(
            1 for c in result.clusters if c.is_singleton and c.members[0][0] == Sensor.V2V
        )
        results.append(result)
    for ev in events[k:]:
        consume(ev)

    counters.update(
        tracks_created=store.created,
        track_updates=store.updates,
        tracks_retired=store.retired,
        dropped_out_of_order=store.dropped,
    )
    report_tma = None
    if truth is not None:
        report_tma = tma(results, truth)
    return RunReport(ticks, results, counters, report_tma)


def run_pipeline(cfg: RunConfig) -> RunReport:
    """Generate or ingest the input log named by ``cfg`` and associate it."""
    if cfg.scenario is not None:
        scenario = SCENARIOS[cfg.scenario](cfg.scenario_config())
        log, truth = scenario.log, scenario.truth
    else:
        log = ingest_log(cfg.input_dir)
        truth_path = Path(cfg.input_dir) / "truth.csv"
        truth = read_truth(truth_path) if truth_path.exists() else None
    report = associate_log(log, cfg, truth)
    report.config = {k: v for k, v in cfg.to_dict().items() if k not in ("output_dir", "input_dir")}
    return report


def _num(x, digits=4):
    return "" if x is None else f"{x:.{digits}f}"


def emit_report(report: RunReport, directory) -> list[Path]:
    """Write ``report.json``, ``timeline.csv`` (one row per tick) and ``confidence.csv``."""
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
        paths = [d / "report.json", d / "timeline.csv", d / "confidence.csv"]
        paths[0].write_text(json.dumps(report.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

        vehicles = report.vehicles()
        tick_fmt = f".{DECIMALS['tick']}f"
        with open(paths[1], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["tick_s"] + [f"{v}_{col}" for v in vehicles for col in ("camera_id", "confidence")])
            for t, pairs in zip(report.ticks, report.timeline()):
                row = [format(t, tick_fmt)]
                for v in vehicles:
                    cam, conf = pairs.get(v, (None, None))
                    row += ["" if cam is None else cam, _num(conf, 2)]
                w.writerow(row)

        with open(paths[2], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["tick_s", "vehicle_id", "camera_id", "distance", "confidence"])
            for r in report.results:
                for c in r.clusters:
                    if c.distance is None:
                        continue
                    v2v = [m[1] for m in c.members if m[0] == Sensor.V2V]
                    cams = [m[1] for m in c.members if m[0] == Sensor.CAMERA]
                    for v in v2v:
                        w.writerow([format(r.t, tick_fmt), v, cams[0], _num(c.distance), _num(c.confidence, 2)])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report: {exc.strerror}", exc.filename) from None
    return paths


def tick_count(duration: float, rate: float) -> int:
    return math.ceil(round(duration * rate, 6))
