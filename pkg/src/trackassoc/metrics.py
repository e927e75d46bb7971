"""Association confidence and Track Matching Accuracy (TMA)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


NO_DECISIONS = "no decisions"


class CoverageError(ValueError):
    def __init__(self, missing):
        self.missing = sorted(missing)
        shown = ", ".join(f"{t:.3f}" for t in self.missing[:10])
        more = "" if len(self.missing) <= 10 else f" (+{len(self.missing) - 10} more)"
        super().__init__(f"ground truth and results disagree on ticks: {shown}{more}")


def confidence(D: float, th: float) -> float:
    """Linear confidence in percent: 100 at D = 0, 0 for D >= th."""
    if not th > 0:
        raise ValueError(f"confidence threshold must be positive, got {th!r}")
    if D < 0 or math.isnan(D):
        raise ValueError(f"distance must be non-negative, got {D!r}")
    if D >= th:
        return 0.0
    # 1 - D/th keeps the D = 0 endpoint exact
    return min(100.0, max(0.0, 100.0 * (1.0 - D / th)))


@dataclass
class GroundTruthMap:
    """Per sync tick, V2V id -> correct camera id (``None`` if the camera has no match)."""

    ticks: dict = field(default_factory=dict)

    def __post_init__(self):
        for t, mapping in self.ticks.items():
            cams = [c for c in mapping.values() if c is not None]
            if len(cams) != len(set(cams)):
                raise ValueError(f"ground truth at t={t} maps two vehicles to one camera id")

    def __len__(self):
        return len(self.ticks)

    def __getitem__(self, t):
        return self.ticks[t]

    def set(self, t: float, mapping: dict) -> None:
        self.ticks[t] = dict(mapping)

    def vehicles(self) -> list[str]:
        return sorted({v for m in self.ticks.values() for v in m})


@dataclass
class VehicleTma:
    correct: int = 0
    total: int = 0
    no_decision: int = 0

    @property
    def tma(self) -> float | None:
        return None if self.total == 0 else 100.0 * self.correct / self.total


@dataclass
class TmaReport:
    per_vehicle: dict
    mismatches: list = field(default_factory=list)

    @property
    def correct(self) -> int:
        return sum(v.correct for v in self.per_vehicle.values())

    @property
    def total(self) -> int:
        return sum(v.total for v in self.per_vehicle.values())

    @property
    def aggregate(self) -> float | None:
        return None if self.total == 0 else 100.0 * self.correct / self.total

    def to_dict(self) -> dict:
        def fmt(x):
            return NO_DECISIONS if x is None else round(x, 1)

        return {
            "aggregate_tma": fmt(self.aggregate),
            "correct": self.correct,
            "total": self.total,
            "per_vehicle": {
                vid: {
                    "tma": fmt(v.tma),
                    "correct": v.correct,
                    "total": v.total,
                    "no_decision": v.no_decision,
                }
                for vid, v in sorted(self.per_vehicle.items())
            },
        }


def _decision(result, v2v_id, truth_cam):
    """Return True/False for a scored decision, None when no decision is possible."""
    from .records import Sensor

    v2v_key = (Sensor.V2V, v2v_id)
    cluster = result.cluster_of(v2v_key)
    if cluster is None:
        return None
    cams = {m[1] for m in cluster.members if m[0] == Sensor.CAMERA}
    if truth_cam is None:
        return not cams
    if not result.is_live((Sensor.CAMERA, truth_cam)):
        return None
    return cams == {truth_cam}


def tma(results, truth: GroundTruthMap) -> TmaReport:
    """Score association results against ground truth.

    A decision is correct when the cluster holding the V2V track contains
    exactly the true camera track, or nothing else when truth has no camera
    match. Ticks where the V2V track or the true camera track is not live
    are counted as no-decision and left out of the denominator.
    """
    results = list(results)
    by_t = {r.t: r for r in results}
    missing = set(by_t) ^ set(truth.ticks)
    if missing:
        raise CoverageError(missing)

    per_vehicle = {v: VehicleTma() for v in truth.vehicles()}
    mismatches = []
    for t in sorted(by_t):
        result = by_t[t]
        for v2v_id, cam_id in truth[t].items():
            verdict = _decision(result, v2v_id, cam_id)
            stats = per_vehicle[v2v_id]
            if verdict is None:
                stats.no_decision += 1
                continue
            stats.total += 1
            if verdict:
                stats.correct += 1
            else:
                mismatches.append((t, v2v_id, cam_id))
    return TmaReport(per_vehicle, mismatches)
