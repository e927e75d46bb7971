"""Vehicle trajectories authored on a UTM grid around a scenario origin.

Roads are chains of straight and circular-arc segments. A vehicle moves
along a road with a longitudinal profile ``s(t)`` and a lateral offset
profile ``o(t)`` (left positive), both smooth closed-form functions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from ..geodesy import GeoPoint, UtmCoord, deg2utm, grid_convergence, utm2deg


class Role(enum.Enum):
    HOST = "host"
    REMOTE = "remote"
    PARKED = "parked"


def _left(az):
    return -math.cos(az), math.sin(az)


def _fwd(az):
    return math.sin(az), math.cos(az)


@dataclass
class _Segment:
    s0: float
    length: float
    x0: float
    y0: float
    az0: float  # radians, grid azimuth
    turn: int = 0  # +1 left, -1 right, 0 straight
    radius: float = math.inf

    def at(self, u):
        if self.turn == 0:
            fx, fy = _fwd(self.az0)
            return self.x0 + u * fx, self.y0 + u * fy, self.az0, 0.0
        sgn, r = self.turn, self.radius
        lx, ly = _left(self.az0)
        cx, cy = self.x0 + sgn * r * lx, self.y0 + sgn * r * ly
        az = self.az0 - sgn * u / r
        lx, ly = _left(az)
        return cx - sgn * r * lx, cy - sgn * r * ly, az, sgn / r


class Road:
    """Centerline built from straight and arc segments, in local grid metres."""

    def __init__(self, x: float = 0.0, y: float = 0.0, azimuth: float = 0.0):
        self._segments: list[_Segment] = []
        self._end = (x, y, math.radians(azimuth))
        self.length = 0.0

    def straight(self, length: float) -> "Road":
        return self._add(_Segment(self.length, length, *self._end))

    def arc(self, radius: float, angle: float) -> "Road":
        """Circular arc; positive ``angle`` (degrees) turns left."""
        turn = 1 if angle > 0 else -1
        length = radius * math.radians(abs(angle))
        return self._add(_Segment(self.length, length, *self._end, turn=turn, radius=radius))

    def _add(self, seg):
        self._segments.append(seg)
        x, y, az, _ = seg.at(seg.length)
        self._end = (x, y, az)
        self.length += seg.length
        return self

    def at(self, s: float):
        """``(x, y, azimuth_rad, curvature)`` at arc length ``s``; straight beyond the ends."""
        if not self._segments:
            x, y, az = self._end
            fx, fy = _fwd(az)
            return x + s * fx, y + s * fy, az, 0.0
        if s < 0:
            seg = self._segments[0]
            x, y, az, _ = seg.at(0.0)
            fx, fy = _fwd(az)
            return x + s * fx, y + s * fy, az, 0.0
        for seg in self._segments:
            if s <= seg.s0 + seg.length:
                return seg.at(s - seg.s0)
        seg = self._segments[-1]
        x, y, az, _ = seg.at(seg.length)
        extra = s - seg.s0 - seg.length
        fx, fy = _fwd(az)
        return x + extra * fx, y + extra * fy, az, 0.0


# -- profiles: callables t -> (value, rate) ---------------------------------


def constant(c: float):
    return lambda t: (c, 0.0)


def speed_knots(knots, s0: float = 0.0):
    """Distance travelled under a piecewise-linear speed profile ``[(t, v), ...]``."""
    knots = sorted(knots)

    def f(t):
        s = s0
        if t <= knots[0][0]:
            return s0 + knots[0][1] * (t - knots[0][0]), knots[0][1]
        for (ta, va), (tb, vb) in zip(knots, knots[1:]):
            if t <= tb:
                v = va + (vb - va) * (t - ta) / (tb - ta)
                return s + 0.5 * (va + v) * (t - ta), v
            s += 0.5 * (va + vb) * (tb - ta)
        t_last, v_last = knots[-1]
        return s + v_last * (t - t_last), v_last

    return f


def sinusoid(amplitude: float, period: float, phase: float = 0.0):
    w = 2 * math.pi / period

    def f(t):
        return amplitude * math.sin(w * t + phase), amplitude * w * math.cos(w * t + phase)

    return f


def smooth_step(t0: float, duration: float, delta: float):
    """Cosine ramp adding ``delta`` between ``t0`` and ``t0 + duration``."""

    def f(t):
        if t <= t0:
            return 0.0, 0.0
        if t >= t0 + duration:
            return delta, 0.0
        u = (t - t0) / duration
        return 0.5 * delta * (1 - math.cos(math.pi * u)), 0.5 * delta * math.pi / duration * math.sin(math.pi * u)

    return f


def combine(*terms):
    def f(t):
        v = r = 0.0
        for term in terms:
            a, b = term(t)
            v += a
            r += b
        return v, r

    return f


@dataclass(frozen=True)
class Pose:
    t: float
    geo: GeoPoint
    heading: float  # degrees clockwise from true North
    speed: float
    easting: float
    northing: float


@dataclass
class Origin:
    lat: float = 40.0
    lon: float = -83.0
    utm: UtmCoord = field(init=False)

    def __post_init__(self):
        self.utm = deg2utm(GeoPoint(self.lat, self.lon))


@dataclass
class VehicleTrajectory:
    vehicle_id: str
    role: Role
    road: Road
    s: object  # profile
    offset: object  # profile
    origin: Origin
    length: float = 4.8
    width: float = 1.9

    def grid_state(self, t: float):
        """``(easting, northing, grid azimuth deg, speed)``."""
        s, ds = self.s(t)
        o, do = self.offset(t)
        x, y, az, kappa = self.road.at(s)
        lx, ly = _left(az)
        east = self.origin.utm.easting + x + o * lx
        north = self.origin.utm.northing + y + o * ly
        along = ds * (1.0 - o * kappa)
        speed = math.hypot(along, do)
        drift = math.atan2(do, along) if speed > 1e-9 else 0.0
        return east, north, math.degrees(az - drift) % 360.0, speed

    def pose(self, t: float) -> Pose:
        east, north, grid_az, speed = self.grid_state(t)
        u = self.origin.utm
        geo = utm2deg(UtmCoord(east, north, u.zone, u.northern))
        convergence, scale = grid_convergence(geo, u.zone, u.northern)
        return Pose(t, geo, (grid_az - convergence) % 360.0, speed / scale, east, north)

    def poses(self, times) -> list[Pose]:
        return [self.pose(t) for t in times]
