"""Buffered Mahalanobis track-to-track association with greedy clustering.

Each live track keeps a ring buffer of its synchronized estimates. Pairs of
tracks from different sensors are compared by the mean per-tick Mahalanobis
distance over the aligned part of their buffers, pairs failing the speed or
heading gate are excluded, and clusters are extracted greedily from the
lower-triangular track-to-track distance (TTD) matrix.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .metrics import confidence as _confidence
from .records import Sensor

INF = math.inf


class SingularCovarianceError(ArithmeticError):
    def __init__(self, cond: float):
        super().__init__(f"sum of covariances is singular (condition number {cond:.3g})")
        self.cond = cond


class NoOverlapError(ValueError):
    """Two track histories share no synchronized tick."""


@dataclass(frozen=True)
class Gates:
    """Kinematic gates; ``None`` disables a gate."""

    speed: float | None = 3.0
    heading: float | None = 45.0


NO_GATES = Gates(speed=None, heading=None)


class TrackHistory:
    """Ring buffer of the last ``n`` synchronized states of one track."""

    def __init__(self, owner, n: int = 10):
        if n < 1:
            raise ValueError(f"buffer size must be >= 1, got {n!r}")
        self.owner = owner
        self.n = n
        self.buffer = deque(maxlen=n)
        self.speed = 0.0
        self.relative_heading = 0.0

    @property
    def sensor(self) -> Sensor:
        return self.owner[0]

    @property
    def latest(self):
        return self.buffer[-1] if self.buffer else None

    def __len__(self):
        return len(self.buffer)

    def __repr__(self):
        return f"TrackHistory({self.owner!r}, len={len(self)}, n={self.n})"

    def push(self, state, speed: float | None = None, relative_heading: float | None = None):
        if self.buffer and state.t <= self.buffer[-1].t:
            raise ValueError(
                f"history of {self.owner!r} must be strictly increasing in time "
                f"(got t={state.t!r} after t={self.buffer[-1].t!r})"
            )
        self.buffer.append(state)
        if speed is not None:
            self.speed = speed
        if relative_heading is not None:
            self.relative_heading = relative_heading

    def times(self) -> list[float]:
        return [s.t for s in self.buffer]


def mahalanobis_step(a, b) -> float:
    """Mahalanobis distance between two state estimates at the same tick."""
    delta = a.x - b.x
    S = a.P + b.P
    try:
        w = np.linalg.solve(S, delta)
    except np.linalg.LinAlgError:
        raise SingularCovarianceError(np.linalg.cond(S)) from None
    return math.sqrt(max(float(delta @ w), 0.0))


def _aligned(a: TrackHistory, b: TrackHistory):
    index = {s.t: s for s in b.buffer}
    return [(s, index[s.t]) for s in a.buffer if s.t in index]


def track_distance(a: TrackHistory, b: TrackHistory) -> float:
    """Mean per-tick Mahalanobis distance over the ticks both buffers hold."""
    pairs = _aligned(a, b)
    if not pairs:
        raise NoOverlapError(f"{a.owner!r} and {b.owner!r} share no synchronized tick")
    delta = np.array([sa.x - sb.x for sa, sb in pairs])
    S = np.array([sa.P + sb.P for sa, sb in pairs])
    try:
        w = np.linalg.solve(S, delta[..., None])[..., 0]
    except np.linalg.LinAlgError:
        conds = np.linalg.cond(S)
        raise SingularCovarianceError(float(np.max(conds))) from None
    d2 = np.einsum("ij,ij->i", delta, w)
    return float(np.mean(np.sqrt(np.maximum(d2, 0.0))))


def _angle_diff(a: float, b: float) -> float:
    d = math.fmod(a - b, 360.0)
    if d > 180.0:
        d -= 360.0
    elif d <= -180.0:
        d += 360.0
    return abs(d)


def gate_check(a: TrackHistory, b: TrackHistory, gates: Gates = Gates()):
    """Return ``(passed, reason)``; reason is ``"speed"`` or ``"heading"`` on failure."""
    if gates.speed is not None and abs(a.speed - b.speed) > gates.speed:
        return False, "speed"
    if gates.heading is not None and _angle_diff(a.relative_heading, b.relative_heading) > gates.heading:
        return False, "heading"
    return True, None


@dataclass
class TtdMatrix:
    """Lower-triangular TTD matrix; rows and columns follow ``labels``."""

    values: np.ndarray
    labels: list
    rejected: list = field(default_factory=list)

    def __len__(self):
        return len(self.labels)

    def sensor_of(self, i: int):
        return self.labels[i][0]

    def copy(self) -> "TtdMatrix":
        return TtdMatrix(self.values.copy(), list(self.labels), list(self.rejected))

    def finite_cells(self) -> dict:
        rows, cols = np.nonzero(np.isfinite(self.values))
        return {(self.labels[r], self.labels[c]): float(self.values[r, c]) for r, c in zip(rows, cols)}


@dataclass
class Cluster:
    members: list
    distance: float | None = None
    confidence: float | None = None

    @property
    def is_singleton(self) -> bool:
        return len(self.members) == 1

    def sensors(self) -> set:
        return {m[0] for m in self.members}


@dataclass
class AssociationResult:
    t: float
    clusters: list
    rejected: list = field(default_factory=list)

    def __post_init__(self):
        self._index = {m: c for c in self.clusters for m in c.members}

    def cluster_of(self, key) -> Cluster | None:
        return self._index.get(key)

    def is_live(self, key) -> bool:
        return key in self._index

    def pairs(self) -> dict:
        """Map V2V id -> (camera id or None, confidence)."""
        out = {}
        for c in self.clusters:
            v2v = [m[1] for m in c.members if m[0] == Sensor.V2V]
            cams = [m[1] for m in c.members if m[0] == Sensor.CAMERA]
            for v in v2v:
                out[v] = (cams[0] if cams else None, c.confidence)
        return out


def order_histories(histories) -> list:
    """V2V tracks first, then camera tracks; input order is kept within a sensor."""
    return sorted(histories, key=lambda h: h.sensor)


def build_ttd_matrix(tracks, threshold: float = 8.0, gates: Gates = Gates()) -> TtdMatrix:
    """TTD matrix over ``tracks`` (TrackHistory objects, ordered as given)."""
    tracks = list(tracks)
    n = len(tracks)
    values = np.full((n, n), INF)
    rejected = []
    for i in range(n):
        for j in range(i):
            a, b = tracks[i], tracks[j]
            if a.sensor == b.sensor:
                continue
            ok, reason = gate_check(a, b, gates)
            if not ok:
                rejected.append((b.owner, a.owner, reason))
                continue
            try:
                d = track_distance(a, b)
            except NoOverlapError:
                continue
            if d <= threshold:
                values[i, j] = d
    return TtdMatrix(values, [t.owner for t in tracks], rejected)


def cluster_tracks(m: TtdMatrix) -> list[Cluster]:
    """Greedy cluster extraction; pair clusters in pick order, then singletons."""
    values = m.values.copy()
    n = len(m.labels)
    sensors = np.array([int(lbl[0]) for lbl in m.labels])
    member_of = [None] * n
    clusters: list[list[int]] = []
    distances: list[float] = []

    while n and np.isfinite(values).any():
        # argmin over the row-major flattening gives the lowest (row, col) on ties
        flat = int(np.argmin(values))
        r, c = divmod(flat, n)
        d = float(values[r, c])
        values[r, c] = INF
        cr, cc = member_of[r], member_of[c]
        if cr is None and cc is None:
            member_of[r] = member_of[c] = len(clusters)
            clusters.append([c, r])
            distances.append(d)
        elif (cr is None) != (cc is None):
            k = cr if cr is not None else cc
            new = r if cr is None else c
            if sensors[new] not in {sensors[i] for i in clusters[k]}:
                member_of[new] = k
                clusters[k].append(new)
        k = member_of[r] if member_of[r] is not None else member_of[c]
        if k is None:
            continue
        # no sensor may contribute twice to one cluster
        present = {sensors[i] for i in clusters[k]}
        blocked = np.isin(sensors, list(present))
        for i in clusters[k]:
            values[i, blocked] = INF
            values[blocked, i] = INF

    out = [
        Cluster(sorted((m.labels[i] for i in members), key=_label_order(m)), distance=d)
        for members, d in zip(clusters, distances)
    ]
    out.extend(Cluster([m.labels[i]]) for i in range(n) if member_of[i] is None)
    return out


def _label_order(m: TtdMatrix):
    pos = {lbl: i for i, lbl in enumerate(m.labels)}
    return lambda lbl: pos[lbl]


def associate_tick(
    histories,
    t: float,
    threshold: float = 8.0,
    gates: Gates = Gates(),
    confidence_th: float = 8.0,
) -> AssociationResult:
    """Run gating, TTD construction and clustering for one sync tick."""
    ordered = order_histories(histories)
    if not ordered:
        return AssociationResult(t, [])
    ttd = build_ttd_matrix(ordered, threshold, gates)
    clusters = cluster_tracks(ttd)
    for c in clusters:
        if c.distance is not None:
            c.confidence = _confidence(c.distance, confidence_th)
    return AssociationResult(t, clusters, ttd.rejected)
