"""Sensor record types shared by the estimation, association and I/O layers."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Sensor(enum.IntEnum):
    """Sensor identifiers. The integer value orders tracks in the TTD matrix."""

    V2V = 1
    CAMERA = 2

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class SensorDetection:
    """One time-stamped target observation in the host-vehicle frame.

    ``px`` is longitudinal (forward positive) and ``py`` lateral (left
    positive). ``speed`` is the magnitude of the target velocity relative to
    the host, ``relative_heading`` is target heading minus host heading in
    degrees wrapped to (-180, 180]. Length and width are carried along but
    never used for association.
    """

    sensor: Sensor
    target_id: str
    t: float
    px: float
    py: float
    relative_heading: float = 0.0
    speed: float = 0.0
    length: float = 0.0
    width: float = 0.0


@dataclass(frozen=True)
class BsmRecord:
    """Simplified Basic Safety Message (the J2735 fields the pipeline uses)."""

    t: float
    vehicle_id: str
    lat: float
    lon: float
    heading: float
    speed: float
    length: float = 4.8
    width: float = 1.9


@dataclass(frozen=True)
class HostState:
    """Host-vehicle GNSS pose and kinematics."""

    t: float
    lat: float
    lon: float
    heading: float
    speed: float


@dataclass(frozen=True)
class CameraRecord:
    """A raw camera object-list row, already in the host frame."""

    t: float
    target_id: str
    px: float
    py: float
    rel_heading: float
    rel_speed: float
    length: float = 0.0
    width: float = 0.0

    def to_detection(self) -> SensorDetection:
        return SensorDetection(
            sensor=Sensor.CAMERA,
            target_id=self.target_id,
            t=self.t,
            px=self.px,
            py=self.py,
            relative_heading=self.rel_heading,
            speed=self.rel_speed,
            length=self.length,
            width=self.width,
        )
