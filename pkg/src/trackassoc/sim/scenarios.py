"""Synthetic car-following and intersection scenarios with ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from ..association import TrackHistory
from ..logio import SensorLog, age_within, sync_ticks
from ..metrics import GroundTruthMap
from ..records import Sensor
from ..state_estimation import TrackState
from .sensors import emulate_sensors
from .trajectories import (
    Origin,
    Road,
    Role,
    VehicleTrajectory,
    combine,
    constant,
    sinusoid,
    smooth_step,
    speed_knots,
)


@dataclass(frozen=True)
class ScenarioConfig:
    """Sensor emulation settings. Rates in Hz, noise in metres / degrees / m/s."""

    seed: int = 0
    duration: float | None = None
    camera_rate: float = 40.0
    camera_fov: float = 100.0
    camera_range: float = 100.0
    camera_sigma: float = 0.3
    camera_heading_sigma: float = 2.0
    camera_speed_sigma: float = 0.3
    occlusion_bias: float = 0.10
    occlusion_sigma_factor: float = 3.0
    partial_occlusion_upper: float = 0.85
    full_occlusion_cutoff: float = 0.15
    v2v_rate: float = 10.0
    gps_sigma: float = 1.0
    bsm_heading_sigma: float = 1.0
    bsm_speed_sigma: float = 0.1
    id_churn: bool = True
    id_churn_gap: float = 0.5
    sync_rate: float = 10.0
    truth_coast: float = 0.3

    def __post_init__(self):
        for name in ("camera_rate", "v2v_rate", "sync_rate", "camera_fov", "camera_range"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("camera_sigma", "camera_heading_sigma", "camera_speed_sigma", "gps_sigma",
                     "bsm_heading_sigma", "bsm_speed_sigma", "occlusion_bias", "id_churn_gap", "truth_coast"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)!r}")
        if self.occlusion_sigma_factor < 1:
            raise ValueError("occlusion_sigma_factor must be >= 1")
        if not 0 <= self.full_occlusion_cutoff <= self.partial_occlusion_upper <= 1:
            raise ValueError("need 0 <= full_occlusion_cutoff <= partial_occlusion_upper <= 1")
        if self.duration is not None and not self.duration > 0:
            raise ValueError("duration must be positive")

    @classmethod
    def field_names(cls) -> set:
        return {f.name for f in fields(cls)}

    def noiseless(self) -> "ScenarioConfig":
        return replace(self, camera_sigma=0.0, camera_heading_sigma=0.0, camera_speed_sigma=0.0,
                       gps_sigma=0.0, bsm_heading_sigma=0.0, bsm_speed_sigma=0.0, occlusion_bias=0.0,
                       occlusion_sigma_factor=1.0)


@dataclass
class Scenario:
    name: str
    trajectories: list
    log: SensorLog
    truth: GroundTruthMap
    visibility: dict = field(default_factory=dict)

    def trajectory(self, vehicle_id: str) -> VehicleTrajectory:
        return next(tr for tr in self.trajectories if tr.vehicle_id == vehicle_id)

    def camera_ids(self, vehicle_id: str) -> list[str]:
        """Camera ids of a vehicle in order of first appearance."""
        out = []
        for rec in self.log.camera:
            if self.log.camera_owner.get(rec.target_id) == vehicle_id and rec.target_id not in out:
                out.append(rec.target_id)
        return out

    def windows(self, vehicle_id: str, status: str) -> list[tuple[float, float]]:
        """Maximal time intervals during which a vehicle had a visibility status."""
        out, start, prev = [], None, None
        for t, st in self.visibility.get(vehicle_id, []):
            if st == status and start is None:
                start = t
            elif st != status and start is not None:
                out.append((start, prev))
                start = None
            prev = t
        if start is not None:
            out.append((start, prev))
        return out


def export_ground_truth(trajectories, log: SensorLog, sync_rate: float = 10.0, coast: float = 0.3) -> GroundTruthMap:
    """Correct V2V -> camera id pairing at every sync tick.

    A remote vehicle maps to the camera id under which it was most recently
    detected, provided that detection is at most ``coast`` seconds old;
    otherwise (occluded, outside the field of view) it maps to ``None``.
    Vehicles enter the map once their first BSM has been sent.
    """
    remotes = [tr.vehicle_id for tr in trajectories if tr.role is Role.REMOTE]
    first_bsm = {}
    for r in log.v2v:
        first_bsm.setdefault(r.vehicle_id, r.t)
    by_vehicle: dict = {v: [] for v in remotes}
    for rec in log.camera:
        vid = log.camera_owner.get(rec.target_id)
        if vid in by_vehicle:
            by_vehicle[vid].append((rec.t, rec.target_id))

    truth = GroundTruthMap()
    cursor = {v: 0 for v in remotes}
    latest: dict = {v: None for v in remotes}
    for t in sync_ticks(log, sync_rate):
        mapping = {}
        for v in remotes:
            dets = by_vehicle[v]
            while cursor[v] < len(dets) and dets[cursor[v]][0] <= t:
                latest[v] = dets[cursor[v]]
                cursor[v] += 1
            if v not in first_bsm or first_bsm[v] > t:
                continue
            seen = latest[v]
            mapping[v] = seen[1] if seen is not None and age_within(t, seen[0], coast) else None
        truth.set(t, mapping)
    return truth


def _build(name, trajectories, cfg, duration):
    visibility: dict = {}
    log = emulate_sensors(trajectories, cfg, duration, visibility)
    truth = export_ground_truth(trajectories, log, cfg.sync_rate, cfg.truth_coast)
    return Scenario(name, trajectories, log, truth, visibility)


def car_following_trajectories(origin: Origin | None = None) -> list[VehicleTrajectory]:
    origin = origin or Origin()
    road = (
        Road(0.0, 0.0, azimuth=60.0)
        .straight(200).arc(220, 25).straight(120).arc(260, -40)
        .straight(150).arc(240, 20).straight(400)
    )
    host_s = speed_knots([(0, 11.0), (20, 12.5), (40, 10.5), (60, 11.0)], s0=30.0)
    gap1 = combine(constant(18.0), sinusoid(4.0, 25.0))
    # RV2: staggered behind RV1, moves alongside between 15 s and 40 s
    gap2 = combine(gap1, constant(8.0), smooth_step(15, 6, -8.0), smooth_step(34, 6, 8.0))
    off2 = combine(constant(1.6), smooth_step(11, 3, 1.9), smooth_step(42, 3, -1.9))
    zero = constant(0.0)

    def ahead(gap):
        return combine(host_s, gap)

    trajs = [
        VehicleTrajectory("HV", Role.HOST, road, host_s, zero, origin),
        VehicleTrajectory("RV1", Role.REMOTE, road, ahead(gap1), zero, origin),
        VehicleTrajectory("RV2", Role.REMOTE, road, ahead(gap2), off2, origin),
    ]
    for i, (s, off) in enumerate([(250.0, -4.2), (520.0, -4.2), (640.0, -4.4)], start=1):
        trajs.append(VehicleTrajectory(f"PV{i}", Role.PARKED, road, constant(s), constant(off), origin, 4.6, 1.8))
    return trajs


def gen_car_following(cfg: ScenarioConfig = ScenarioConfig()) -> Scenario:
    """Host following two remote vehicles along a gently curved road with parked cars."""
    duration = cfg.duration or 60.0
    return _build("car_following", car_following_trajectories(), cfg, duration)


def _crossing_profile(t_cross, s_cross, cruise=8.0, slow=1.5, hold=5.0, ramp=4.0, t_end=30.0):
    knots = [
        (0.0, cruise), (t_cross - hold - ramp, cruise), (t_cross - hold, slow),
        (t_cross + hold, slow), (t_cross + hold + ramp, cruise), (t_end, cruise),
    ]
    s_at_cross = speed_knots(knots)(t_cross)[0]
    return speed_knots(knots, s0=s_cross - s_at_cross)


def ima_trajectories(origin: Origin | None = None) -> list[VehicleTrajectory]:
    origin = origin or Origin()
    zero = constant(0.0)
    # intersection centre at the origin; host comes up from the south and stops
    host_road = Road(1.75, -80.0, azimuth=0.0).straight(200)
    host_s = speed_knots([(0, 8.0), (5.625, 8.0), (11.875, 0.0), (30.0, 0.0)])
    t_cross = 16.0
    east_road = Road(-200.0, -1.75, azimuth=90.0).straight(400)
    west_road = Road(200.0, 1.75, azimuth=270.0).straight(400)
    return [
        VehicleTrajectory("HV", Role.HOST, host_road, host_s, zero, origin),
        VehicleTrajectory("RV1", Role.REMOTE, east_road, _crossing_profile(t_cross, 201.75), zero, origin),
        VehicleTrajectory("RV2", Role.REMOTE, west_road, _crossing_profile(t_cross, 198.25), zero, origin),
    ]


def gen_ima(cfg: ScenarioConfig = ScenarioConfig()) -> Scenario:
    """Intersection: RV1 eastbound and RV2 westbound cross in front of the stopped host."""
    duration = cfg.duration or 30.0
    return _build("ima", ima_trajectories(), cfg, duration)


SCENARIOS = {"car_following": gen_car_following, "ima": gen_ima}


# -- crossing targets: buffered association fixture -------------------------


@dataclass
class CrossingFixture:
    """Per-tick synchronized states of two targets seen by both sensors."""

    ticks: list  # [(t, {key: (TrackState, speed, rel_heading)})]
    truth: GroundTruthMap
    crossing_time: float


def gen_crossing_targets(
    seed: int,
    duration: float = 6.0,
    rate: float = 10.0,
    lateral_speed: float = 1.0,
    sigma_pos: float = 0.5,
    sigma_vel: float = 0.8,
) -> CrossingFixture:
    """Two targets at the same range drifting laterally through each other.

    Each sensor's per-tick estimate is the true state plus Gaussian error
    drawn from the covariance it reports, so the only information that
    separates the targets near the crossing is their history.
    """
    rng = np.random.default_rng(seed)
    t_cross = duration / 2
    P = np.diag([sigma_pos**2, sigma_pos**2, sigma_vel**2, sigma_vel**2])
    L = np.linalg.cholesky(P)
    ticks = []
    truth = GroundTruthMap()
    n = int(round(duration * rate))
    for k in range(n + 1):
        t = round(k / rate, 6)
        states = {}
        for target, sign in (("A", 1.0), ("B", -1.0)):
            x_true = np.array([25.0, sign * lateral_speed * (t - t_cross), 0.0, sign * lateral_speed])
            for sensor, tid in ((Sensor.V2V, target), (Sensor.CAMERA, f"c{target}")):
                x = x_true + L @ rng.standard_normal(4)
                states[(sensor, tid)] = (TrackState(x, P, t), 0.0, 0.0)
        ticks.append((t, states))
        truth.set(t, {"A": "cA", "B": "cB"})
    return CrossingFixture(ticks, truth, t_cross)


def replay_fixture(fixture: CrossingFixture, n: int, **assoc_kw):
    """Associate a crossing fixture with buffer size ``n``; returns results per tick."""
    from ..association import associate_tick

    histories: dict = {}
    results = []
    for t, states in fixture.ticks:
        for key, (state, speed, heading) in states.items():
            histories.setdefault(key, TrackHistory(key, n)).push(state, speed, heading)
        results.append(associate_tick(list(histories.values()), t, **assoc_kw))
    return results
