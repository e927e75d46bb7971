"""Constant-velocity Kalman filtering of host-frame target tracks.

One filter runs per (sensor, target id). Measurements drive the usual
predict/update cycle; the synchronization trigger asks every track for a
prediction-only estimate at the trigger time without touching the filter.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_covariance, check_state_vector
from .records import Sensor, SensorDetection

logger = logging.getLogger(__name__)

H = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])


class OrderingError(ValueError):
    """A time step went backwards."""


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class TrackState:
    """Filtered state ``x = (px, py, vx, vy)`` with covariance ``P`` at time ``t``."""

    x: np.ndarray
    P: np.ndarray
    t: float

    def __post_init__(self):
        x = check_state_vector(self.x)
        P = check_covariance(self.P, name="P")
        x.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "P", P)


@dataclass(frozen=True)
class KfModel:
    """Constant-velocity model with continuous white-noise acceleration.

    ``q`` is the acceleration noise spectral density per axis (m^2/s^3) and
    ``R`` the 2x2 position measurement covariance.
    """

    q: float
    R: np.ndarray

    def __post_init__(self):
        if not self.q >= 0:
            raise ConfigurationError(f"q must be non-negative, got {self.q!r}")
        R = np.array(self.R, dtype=float)
        if R.shape != (2, 2):
            raise ConfigurationError(f"R must be 2x2, got shape {R.shape}")
        if not np.allclose(R, R.T, atol=1e-12) or np.linalg.eigvalsh(R).min() <= 0:
            raise ConfigurationError("R must be symmetric positive definite")
        R.setflags(write=False)
        object.__setattr__(self, "R", R)

    @classmethod
    def isotropic(cls, q: float, r: float) -> "KfModel":
        return cls(q=q, R=np.diag([r, r]))

    @property
    def H(self) -> np.ndarray:
        return H

    @staticmethod
    def F(dt: float) -> np.ndarray:
        F = np.eye(4)
        F[0, 2] = F[1, 3] = dt
        return F

    def Q(self, dt: float) -> np.ndarray:
        q = self.q
        d3, d2 = dt**3 / 3.0, dt**2 / 2.0
        return q * np.array(
            [
                [d3, 0.0, d2, 0.0],
                [0.0, d3, 0.0, d2],
                [d2, 0.0, dt, 0.0],
                [0.0, d2, 0.0, dt],
            ]
        )


def _symmetrize(P):
    return 0.5 * (P + P.T)


def kf_predict(s: TrackState, model: KfModel, dt: float) -> TrackState:
    return kf_predict_to(s, model, s.t + dt, dt)


def kf_predict_to(s: TrackState, model: KfModel, t: float, dt: float | None = None) -> TrackState:
    """Predict to time ``t``; the result is stamped with ``t`` exactly."""
    dt = t - s.t if dt is None else dt
    if dt < 0:
        raise OrderingError(f"cannot predict backwards in time (dt={dt!r})")
    if dt == 0:
        return s if s.t == t else TrackState(s.x, s.P, t)
    F = model.F(dt)
    x = F @ s.x
    P = _symmetrize(F @ s.P @ F.T + model.Q(dt))
    return TrackState(x, P, t)


def kf_update(s: TrackState, model: KfModel, z) -> TrackState:
    return kf_update_with_innovation(s, model, z)[0]


def kf_update_with_innovation(s: TrackState, model: KfModel, z):
    """Measurement update, also returning the innovation and its covariance."""
    z = np.asarray(z, dtype=float)
    y = z - H @ s.x
    S = H @ s.P @ H.T + model.R
    K = np.linalg.solve(S, H @ s.P).T  # P H^T S^-1, S symmetric
    x = s.x + K @ y
    I_KH = np.eye(4) - K @ H
    # Joseph form keeps P symmetric PSD; algebraically equal to (I - KH) P
    P = _symmetrize(I_KH @ s.P @ I_KH.T + K @ model.R @ K.T)
    return TrackState(x, P, s.t), y, S


@dataclass
class Track:
    """Kalman track for one sensor-reported target."""

    sensor: Sensor
    target_id: str
    state: TrackState
    model: KfModel
    n_updates: int = 1
    relative_heading: float = 0.0
    speed: float = 0.0

    @property
    def key(self) -> tuple[Sensor, str]:
        return (self.sensor, self.target_id)

    @property
    def last_update(self) -> float:
        return self.state.t

    def label(self) -> str:
        return f"{self.sensor.label}:{self.target_id}"


def sync_estimate(track: Track, t_trigger: float) -> TrackState:
    """Prediction-only estimate at the trigger time; the track is not modified."""
    if t_trigger < track.state.t:
        raise OrderingError(
            f"trigger t={t_trigger!r} precedes last update t={track.state.t!r} of {track.label()}"
        )
    return kf_predict_to(track.state, track.model, t_trigger)


def initial_state(d: SensorDetection, model: KfModel, velocity_var: float = 100.0) -> TrackState:
    P = np.diag([model.R[0, 0], model.R[1, 1], velocity_var, velocity_var])
    P[0, 1] = P[1, 0] = model.R[0, 1]
    return TrackState(np.array([d.px, d.py, 0.0, 0.0]), P, d.t)


@dataclass
class TrackStore:
    """Live tracks keyed by (sensor, target id).

    Tracks that have not been updated for ``staleness`` seconds are retired.
    """

    models: dict
    staleness: float = 1.0
    velocity_var: float = 100.0
    tracks: dict = field(default_factory=dict)
    dropped: int = 0
    retired: int = 0
    updates: int = 0
    created: int = 0

    def __len__(self):
        return len(self.tracks)

    def live(self) -> list[Track]:
        return list(self.tracks.values())

    def retire_stale(self, now: float) -> list[Track]:
        gone = [tr for tr in self.tracks.values() if now - tr.last_update > self.staleness]
        for tr in gone:
            del self.tracks[tr.key]
        self.retired += len(gone)
        return gone

    def process_detection(self, d: SensorDetection) -> Track | None:
        """Fold one detection into its track; ``None`` if it was dropped."""
        self.retire_stale(d.t)
        key = (d.sensor, d.target_id)
        model = self.models[d.sensor]
        track = self.tracks.get(key)
        if track is None:
            track = Track(d.sensor, d.target_id, initial_state(d, model, self.velocity_var), model)
            track.relative_heading, track.speed = d.relative_heading, d.speed
            self.tracks[key] = track
            self.created += 1
            return track
        if d.t < track.last_update:
            self.dropped += 1
            logger.warning(
                "dropping out-of-order %s detection t=%.3f (track at t=%.3f)",
                track.label(), d.t, track.last_update,
            )
            return None
        predicted = kf_predict_to(track.state, model, d.t)
        track.state = kf_update(predicted, model, (d.px, d.py))
        track.relative_heading, track.speed = d.relative_heading, d.speed
        track.n_updates += 1
        self.updates += 1
        return track
