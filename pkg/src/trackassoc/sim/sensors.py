"""Camera and V2V sensor emulation, including a planar occlusion model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geodesy import UtmCoord, bsm_to_detection, utm2deg
from ..logio import SensorLog, rnd
from ..records import BsmRecord, CameraRecord, HostState
from .trajectories import Role


@dataclass(frozen=True)
class Footprint:
    """Oriented rectangle in the host frame (x forward, y left)."""

    px: float
    py: float
    yaw: float  # radians, counter-clockwise from the host x axis
    length: float
    width: float

    @property
    def range(self) -> float:
        return math.hypot(self.px, self.py)

    def corners(self):
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        hl, hw = self.length / 2, self.width / 2
        return [
            (self.px + c * dx - s * dy, self.py + s * dx + c * dy)
            for dx, dy in ((hl, hw), (hl, -hw), (-hl, -hw), (-hl, hw))
        ]


def angular_interval(fp: Footprint):
    """Bearing interval ``(lo, hi)`` in radians subtended at the camera, or None.

    Only footprints entirely in front of the camera are handled; anything
    reaching behind it is ignored.
    """
    corners = fp.corners()
    if any(x <= 0 for x, _ in corners):
        return None
    angles = [math.atan2(y, x) for x, y in corners]
    return min(angles), max(angles)


def visible_fraction(target: Footprint, occluders) -> float:
    """Share of the target's bearing interval not hidden by nearer footprints."""
    span = angular_interval(target)
    if span is None:
        return 0.0
    lo, hi = span
    hidden = []
    for occ in occluders:
        if occ.range >= target.range:
            continue
        iv = angular_interval(occ)
        if iv is None:
            continue
        a, b = max(lo, iv[0]), min(hi, iv[1])
        if b > a:
            hidden.append((a, b))
    hidden.sort()
    covered, end = 0.0, lo
    for a, b in hidden:
        if b <= end:
            continue
        covered += b - max(a, end)
        end = b
    return max(0.0, 1.0 - covered / (hi - lo))


def in_fov(px: float, py: float, fov_deg: float, max_range: float) -> bool:
    if px <= 0:
        return False
    return abs(math.degrees(math.atan2(py, px))) <= fov_deg / 2 and math.hypot(px, py) <= max_range


def _host_state(pose) -> HostState:
    return HostState(
        t=pose.t, lat=rnd(pose.geo.lat, "deg"), lon=rnd(pose.geo.lon, "deg"),
        heading=rnd(pose.heading, "angle"), speed=rnd(pose.speed, "speed"),
    )


def _bsm(pose, traj) -> BsmRecord:
    return BsmRecord(
        t=pose.t, vehicle_id=traj.vehicle_id, lat=rnd(pose.geo.lat, "deg"), lon=rnd(pose.geo.lon, "deg"),
        heading=rnd(pose.heading, "angle"), speed=rnd(pose.speed, "speed"),
        length=traj.length, width=traj.width,
    )


def _noisy_geo(pose, traj, sigma, rng):
    """Pose position with isotropic grid-plane GPS noise (metres)."""
    if sigma <= 0:
        return pose.geo
    u = traj.origin.utm
    de, dn = rng.normal(0.0, sigma, size=2)
    return utm2deg(UtmCoord(pose.easting + de, pose.northing + dn, u.zone, u.northern))


def _times(rate, t_end, offset=0.0):
    n = int(math.floor((t_end - offset) * rate + 1e-9)) + 1
    return [rnd(offset + k / rate, "t") for k in range(n)]


def truth_detection(host_pose, target_pose, traj):
    """Noise-free host-frame geometry of a target, via the V2V transform path."""
    return bsm_to_detection(_host_state(host_pose), _bsm(target_pose, traj))


def emulate_sensors(trajectories, cfg, duration: float | None = None, visibility: dict | None = None) -> SensorLog:
    """Emit camera detections, BSMs and host poses for a set of trajectories.

    If ``visibility`` is given it is filled with ``vehicle_id -> [(t, status)]``
    per camera frame, status being one of ``"outside"``, ``"occluded"``,
    ``"partial"`` or ``"clear"``.
    """
    status = visibility if visibility is not None else {}
    rng = np.random.default_rng(cfg.seed)
    duration = cfg.duration if duration is None else duration
    host = next(tr for tr in trajectories if tr.role is Role.HOST)
    remotes = [tr for tr in trajectories if tr.role is Role.REMOTE]
    targets = [tr for tr in trajectories if tr.role is not Role.HOST]

    # host GNSS, sampled with the camera clock
    cam_times = _times(cfg.camera_rate, duration)
    host_poses = {t: host.pose(t) for t in cam_times}
    host_log = []
    for t in cam_times:
        pose = host_poses[t]
        geo = _noisy_geo(pose, host, cfg.gps_sigma, rng)
        host_log.append(HostState(
            t=t, lat=rnd(geo.lat, "deg"), lon=rnd(geo.lon, "deg"),
            heading=rnd((pose.heading + rng.normal(0, cfg.bsm_heading_sigma)) % 360.0, "angle"),
            speed=rnd(max(0.0, pose.speed + rng.normal(0, cfg.bsm_speed_sigma)), "speed"),
        ))

    # BSMs with a per-vehicle transmit phase
    v2v = []
    for tr in remotes:
        phase = int(rng.integers(0, round(1000 / cfg.v2v_rate))) / 1000.0
        for t in _times(cfg.v2v_rate, duration, phase):
            pose = tr.pose(t)
            geo = _noisy_geo(pose, tr, cfg.gps_sigma, rng)
            v2v.append(BsmRecord(
                t=t, vehicle_id=tr.vehicle_id, lat=rnd(geo.lat, "deg"), lon=rnd(geo.lon, "deg"),
                heading=rnd((pose.heading + rng.normal(0, cfg.bsm_heading_sigma)) % 360.0, "angle"),
                speed=rnd(max(0.0, pose.speed + rng.normal(0, cfg.bsm_speed_sigma)), "speed"),
                length=tr.length, width=tr.width,
            ))
    v2v.sort(key=lambda r: r.t)

    # camera object list
    camera, owner = [], {}
    last_seen: dict = {}
    current_id: dict = {}
    used_ids: set = set()

    def fresh_id():
        while True:
            cid = str(int(rng.integers(1, 256)))
            if cid not in used_ids:
                used_ids.add(cid)
                return cid

    for t in cam_times:
        hp = host_poses[t]
        geom = {}
        for tr in targets:
            det = truth_detection(hp, tr.pose(t), tr)
            fp = Footprint(det.px, det.py, -math.radians(det.relative_heading), tr.length, tr.width)
            geom[tr.vehicle_id] = (det, fp)
        for tr in targets:
            det, fp = geom[tr.vehicle_id]
            vid = tr.vehicle_id
            seen = status.setdefault(vid, [])
            if not in_fov(det.px, det.py, cfg.camera_fov, cfg.camera_range):
                seen.append((t, "outside"))
                continue
            others = [g[1] for other, g in geom.items() if other != vid]
            vis = visible_fraction(fp, others)
            if vis < cfg.full_occlusion_cutoff:
                seen.append((t, "occluded"))
                continue
            seen.append((t, "partial" if vis < cfg.partial_occlusion_upper else "clear"))
            gap = t - last_seen.get(vid, -math.inf)
            if vid not in current_id or (cfg.id_churn and gap > cfg.id_churn_gap):
                current_id[vid] = fresh_id()
                owner[current_id[vid]] = vid
            last_seen[vid] = t

            sigma, bias = cfg.camera_sigma, 0.0
            if vis < cfg.partial_occlusion_upper:
                sigma *= cfg.occlusion_sigma_factor
                bias = cfg.occlusion_bias * fp.range
            nx, ny, nh, ns = rng.normal(size=4)
            camera.append(CameraRecord(
                t=t, target_id=current_id[vid],
                px=rnd(det.px + bias + sigma * nx, "xy"), py=rnd(det.py + sigma * ny, "xy"),
                rel_heading=rnd(det.relative_heading + cfg.camera_heading_sigma * nh, "angle"),
                rel_speed=rnd(max(0.0, det.speed + cfg.camera_speed_sigma * ns), "speed"),
                length=tr.length, width=tr.width,
            ))

    return SensorLog(camera=camera, v2v=v2v, host=host_log, camera_owner=owner)
