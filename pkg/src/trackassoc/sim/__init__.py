"""Synthetic scenario generation and sensor emulation."""

from .scenarios import (
    SCENARIOS,
    Scenario,
    ScenarioConfig,
    export_ground_truth,
    gen_car_following,
    gen_crossing_targets,
    gen_ima,
)
from .sensors import emulate_sensors, visible_fraction
from .trajectories import Role, VehicleTrajectory

__all__ = [
    "SCENARIOS", "Scenario", "ScenarioConfig", "export_ground_truth", "gen_car_following",
    "gen_crossing_targets", "gen_ima", "emulate_sensors", "visible_fraction", "Role", "VehicleTrajectory",
]
