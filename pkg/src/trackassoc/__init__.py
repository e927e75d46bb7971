"""Camera and V2V track-to-track association for connected vehicles."""

from .association import (
    Gates,
    TrackHistory,
    associate_tick,
    build_ttd_matrix,
    cluster_tracks,
    mahalanobis_step,
    track_distance,
)
from .config import ConfigError, RunConfig
from .estimator import TrackAssociator
from .geodesy import GeoPoint, UtmCoord, bsm_to_detection, deg2utm, utm2deg
from .logio import SensorLog, ingest_log, write_log
from .metrics import GroundTruthMap, confidence, tma
from .pipeline import RunReport, associate_log, emit_report, run_pipeline
from .records import BsmRecord, CameraRecord, HostState, Sensor, SensorDetection
from .state_estimation import KfModel, TrackState, TrackStore

__version__ = "0.1.0"

__all__ = [
    "Gates", "TrackHistory", "associate_tick", "build_ttd_matrix", "cluster_tracks", "mahalanobis_step",
    "track_distance", "ConfigError", "RunConfig", "TrackAssociator", "GeoPoint", "UtmCoord",
    "bsm_to_detection", "deg2utm", "utm2deg", "SensorLog", "ingest_log", "write_log", "GroundTruthMap",
    "confidence", "tma", "RunReport", "associate_log", "emit_report", "run_pipeline", "BsmRecord",
    "CameraRecord", "HostState", "Sensor", "SensorDetection", "KfModel", "TrackState", "TrackStore",
]
