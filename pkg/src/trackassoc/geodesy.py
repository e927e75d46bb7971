"""WGS84 <-> UTM conversion and host-frame transforms for V2V positions.

The transverse Mercator projection uses the Krueger series to sixth order in
the third flattening, which is accurate to well below a millimetre inside a
zone and stays usable a few degrees outside it (needed when a remote vehicle
is re-projected into the host's zone).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .records import BsmRecord, HostState, Sensor, SensorDetection

# WGS84
_A = 6378137.0
_F = 1 / 298.257223563
_K0 = 0.9996
_FALSE_EASTING = 500000.0
_FALSE_NORTHING_SOUTH = 10000000.0

_N = _F / (2 - _F)
_E = 2 * math.sqrt(_N) / (1 + _N)  # first eccentricity
_RECT_A = _A / (1 + _N) * (1 + _N**2 / 4 + _N**4 / 64 + _N**6 / 256)


def _series(n):
    n2, n3, n4, n5, n6 = n**2, n**3, n**4, n**5, n**6
    alpha = (
        n / 2 - 2 * n2 / 3 + 5 * n3 / 16 + 41 * n4 / 180 - 127 * n5 / 288 + 7891 * n6 / 37800,
        13 * n2 / 48 - 3 * n3 / 5 + 557 * n4 / 1440 + 281 * n5 / 630 - 1983433 * n6 / 1935360,
        61 * n3 / 240 - 103 * n4 / 140 + 15061 * n5 / 26880 + 167603 * n6 / 181440,
        49561 * n4 / 161280 - 179 * n5 / 168 + 6601661 * n6 / 7257600,
        34729 * n5 / 80640 - 3418889 * n6 / 1995840,
        212378941 * n6 / 319334400,
    )
    beta = (
        n / 2 - 2 * n2 / 3 + 37 * n3 / 96 - n4 / 360 - 81 * n5 / 512 + 96199 * n6 / 604800,
        n2 / 48 + n3 / 15 - 437 * n4 / 1440 + 46 * n5 / 105 - 1118711 * n6 / 3870720,
        17 * n3 / 480 - 37 * n4 / 840 - 209 * n5 / 4480 + 5569 * n6 / 90720,
        4397 * n4 / 161280 - 11 * n5 / 504 - 830251 * n6 / 7257600,
        4583 * n5 / 161280 - 108847 * n6 / 3991680,
        20648693 * n6 / 638668800,
    )
    return alpha, beta


_ALPHA, _BETA = _series(_N)


class GeodesyError(ValueError):
    """Coordinate outside the domain of a conversion."""


class ZoneMismatchError(GeodesyError):
    pass


class StaleHostPoseError(ValueError):
    def __init__(self, host_t: float, bsm_t: float, max_age: float):
        super().__init__(
            f"host pose at t={host_t:.3f}s is stale for BSM at t={bsm_t:.3f}s "
            f"(max age {max_age:.3f}s)"
        )
        self.host_t = host_t
        self.bsm_t = bsm_t


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0 or math.isnan(self.lat):
            raise GeodesyError(f"lat={self.lat!r} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0 or math.isnan(self.lon):
            raise GeodesyError(f"lon={self.lon!r} outside [-180, 180]")


@dataclass(frozen=True)
class UtmCoord:
    easting: float
    northing: float
    zone: int
    northern: bool = True

    def __post_init__(self):
        if not 1 <= self.zone <= 60:
            raise GeodesyError(f"zone={self.zone!r} outside [1, 60]")

    @property
    def designator(self) -> str:
        return f"{self.zone}{'N' if self.northern else 'S'}"


@dataclass(frozen=True)
class HostPose:
    position: UtmCoord
    heading: float  # degrees clockwise from true North

    def __post_init__(self):
        if not 0.0 <= self.heading < 360.0:
            object.__setattr__(self, "heading", self.heading % 360.0)


@dataclass(frozen=True)
class VehicleFramePoint:
    px: float
    py: float
    d_r: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "d_r", math.hypot(self.px, self.py))


def wrap_degrees(angle: float) -> float:
    """Wrap an angle in degrees to (-180, 180]."""
    wrapped = math.fmod(angle, 360.0)
    if wrapped <= -180.0:
        wrapped += 360.0
    elif wrapped > 180.0:
        wrapped -= 360.0
    return wrapped


def zone_for(lon: float) -> int:
    return min(int((lon + 180.0) // 6.0) + 1, 60)


def central_meridian(zone: int) -> float:
    return (zone - 1) * 6.0 - 180.0 + 3.0


def deg2utm(p: GeoPoint, zone: int | None = None, northern: bool | None = None) -> UtmCoord:
    """Project a WGS84 point to UTM.

    ``zone`` and ``northern`` force the projection into a given zone and
    hemisphere (extended transverse Mercator); by default they follow from
    the point itself.
    """
    if not -80.0 <= p.lat <= 84.0:
        raise GeodesyError(f"lat={p.lat!r} outside the UTM latitude band [-80, 84]")
    if zone is None:
        zone = zone_for(p.lon)
    if northern is None:
        northern = p.lat >= 0.0

    phi = math.radians(p.lat)
    lam = math.radians(wrap_degrees(p.lon - central_meridian(zone)))
    if abs(lam) > math.radians(30.0):
        raise GeodesyError(f"lon={p.lon!r} too far from zone {zone} central meridian")

    sin_phi = math.sin(phi)
    t = math.sinh(math.atanh(sin_phi) - _E * math.atanh(_E * sin_phi))
    xi_p = math.atan2(t, math.cos(lam))
    eta_p = math.atanh(math.sin(lam) / math.sqrt(1 + t * t))

    xi, eta = xi_p, eta_p
    for j, a in enumerate(_ALPHA, start=1):
        xi += a * math.sin(2 * j * xi_p) * math.cosh(2 * j * eta_p)
        eta += a * math.cos(2 * j * xi_p) * math.sinh(2 * j * eta_p)

    easting = _FALSE_EASTING + _K0 * _RECT_A * eta
    northing = _K0 * _RECT_A * xi
    if not northern:
        northing += _FALSE_NORTHING_SOUTH
    return UtmCoord(easting, northing, zone, northern)


def utm2deg(c: UtmCoord) -> GeoPoint:
    """Inverse of :func:`deg2utm`."""
    northing = c.northing - (0.0 if c.northern else _FALSE_NORTHING_SOUTH)
    xi = northing / (_K0 * _RECT_A)
    eta = (c.easting - _FALSE_EASTING) / (_K0 * _RECT_A)

    xi_p, eta_p = xi, eta
    for j, b in enumerate(_BETA, start=1):
        xi_p -= b * math.sin(2 * j * xi) * math.cosh(2 * j * eta)
        eta_p -= b * math.cos(2 * j * xi) * math.sinh(2 * j * eta)

    sinh_eta = math.sinh(eta_p)
    cos_xi = math.cos(xi_p)
    tau_p = math.sin(xi_p) / math.hypot(sinh_eta, cos_xi)
    lam = math.atan2(sinh_eta, cos_xi)

    e2 = _E * _E
    tau = tau_p
    for _ in range(8):
        sigma = math.sinh(_E * math.atanh(_E * tau / math.sqrt(1 + tau * tau)))
        tau_i = tau * math.sqrt(1 + sigma * sigma) - sigma * math.sqrt(1 + tau * tau)
        step = (tau_p - tau_i) / math.sqrt(1 + tau_i * tau_i) * (
            (1 + (1 - e2) * tau * tau) / ((1 - e2) * math.sqrt(1 + tau * tau))
        )
        tau += step
        if abs(step) < 1e-14:
            break

    lat = math.degrees(math.atan(tau))
    lon = wrap_degrees(central_meridian(c.zone) + math.degrees(lam))
    return GeoPoint(lat, lon)


def grid_convergence(p: GeoPoint, zone: int | None = None, northern: bool | None = None):
    """Grid azimuth of true North (degrees) and point scale factor at ``p``.

    A true heading ``h`` corresponds to the grid azimuth ``h + convergence``,
    and grid distances are true distances times ``scale``.
    """
    if zone is None:
        zone = zone_for(p.lon)
    if northern is None:
        northern = p.lat >= 0.0
    lo_lat, hi_lat = max(p.lat - 1e-5, -80.0), min(p.lat + 1e-5, 84.0)
    lo = deg2utm(GeoPoint(lo_lat, p.lon), zone, northern)
    hi = deg2utm(GeoPoint(hi_lat, p.lon), zone, northern)
    d_east, d_north = hi.easting - lo.easting, hi.northing - lo.northing
    e2 = _E * _E
    sin_phi = math.sin(math.radians(p.lat))
    meridian_radius = _A * (1 - e2) / (1 - e2 * sin_phi**2) ** 1.5
    true_len = meridian_radius * math.radians(hi_lat - lo_lat)
    return math.degrees(math.atan2(d_east, d_north)), math.hypot(d_east, d_north) / true_len


def relative_displacement(hv: UtmCoord, rv: UtmCoord) -> tuple[float, float]:
    """Remote minus host, (dE, dN) in metres."""
    if hv.zone != rv.zone or hv.northern != rv.northern:
        raise ZoneMismatchError(
            f"remote position is in zone {rv.designator} but host is in {hv.designator}; "
            f"re-project the remote point with deg2utm(..., zone={hv.zone}, northern={hv.northern})"
        )
    return rv.easting - hv.easting, rv.northing - hv.northing


def global_to_vehicle(d_east: float, d_north: float, pose: HostPose | float) -> VehicleFramePoint:
    """Rotate an East/North displacement into the host frame.

    Heading is clockwise from North, so the host's forward axis in ENU is
    (sin h, cos h) and its left axis is (-cos h, sin h).
    """
    heading = pose.heading if isinstance(pose, HostPose) else pose
    h = math.radians(heading)
    s, c = math.sin(h), math.cos(h)
    return VehicleFramePoint(s * d_east + c * d_north, -c * d_east + s * d_north)


def vehicle_to_global(px: float, py: float, pose: HostPose | float) -> tuple[float, float]:
    """Inverse rotation of :func:`global_to_vehicle`."""
    heading = pose.heading if isinstance(pose, HostPose) else pose
    h = math.radians(heading)
    s, c = math.sin(h), math.cos(h)
    return s * px - c * py, c * px + s * py


def relative_velocity(
    host_speed: float, host_heading: float, target_speed: float, target_heading: float
) -> tuple[float, float]:
    """Target velocity relative to the host, in host-frame axes (m/s).

    Ignores the host yaw rate.
    """
    rel = math.radians(target_heading - host_heading)
    # clockwise heading offset turns to the right, i.e. negative lateral
    return target_speed * math.cos(rel) - host_speed, -target_speed * math.sin(rel)


def bsm_to_detection(host: HostState, bsm: BsmRecord, max_age: float = 0.1) -> SensorDetection:
    """Express a remote vehicle's BSM as a host-frame detection.

    The host pose is dead-reckoned along its heading to the BSM timestamp.
    Remote points in another UTM zone are projected into the host's zone.
    The UTM displacement is corrected for grid convergence and point scale
    at the host so that headings can stay relative to true North.
    """
    dt = bsm.t - host.t
    if abs(dt) > max_age + 1e-9:
        raise StaleHostPoseError(host.t, bsm.t, max_age)

    host_geo = GeoPoint(host.lat, host.lon)
    hv = deg2utm(host_geo)
    rv = deg2utm(GeoPoint(bsm.lat, bsm.lon), zone=hv.zone, northern=hv.northern)
    d_east, d_north = relative_displacement(hv, rv)
    convergence, scale = grid_convergence(host_geo, hv.zone, hv.northern)
    grid_heading = host.heading + convergence
    d_east, d_north = d_east / scale, d_north / scale
    if dt:
        h = math.radians(grid_heading)
        d_east -= host.speed * dt * math.sin(h)
        d_north -= host.speed * dt * math.cos(h)

    point = global_to_vehicle(d_east, d_north, grid_heading)
    vx, vy = relative_velocity(host.speed, host.heading, bsm.speed, bsm.heading)
    return SensorDetection(
        sensor=Sensor.V2V,
        target_id=bsm.vehicle_id,
        t=bsm.t,
        px=point.px,
        py=point.py,
        relative_heading=wrap_degrees(bsm.heading - host.heading),
        speed=math.hypot(vx, vy),
        length=bsm.length,
        width=bsm.width,
    )
