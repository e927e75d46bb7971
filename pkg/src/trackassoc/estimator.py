"""scikit-learn style front end to the association pipeline."""

from __future__ import annotations

from pathlib import Path

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .config import IN_MEMORY, ConfigError, RunConfig
from .logio import SensorLog, ingest_log, read_truth
from .metrics import GroundTruthMap, tma


def _as_log(X) -> SensorLog:
    if isinstance(X, SensorLog):
        return X
    if isinstance(X, (str, Path)):
        return ingest_log(X)
    raise TypeError(f"expected a SensorLog or a log directory, got {type(X).__name__}")


def _as_truth(y) -> GroundTruthMap:
    if isinstance(y, GroundTruthMap):
        return y
    if isinstance(y, (str, Path)):
        return read_truth(y)
    raise TypeError(f"expected a GroundTruthMap or a truth.csv path, got {type(y).__name__}")


class TrackAssociator(BaseEstimator):
    """Camera / V2V track-to-track associator.

    Nothing is learned: ``fit`` only validates the hyperparameters. ``X`` is
    a :class:`SensorLog` (or a log directory) and ``predict`` returns, per
    sync tick, a mapping ``V2V id -> (camera id or None, confidence)``.
    """

    def __init__(
        self,
        threshold=8.0,
        buffer_size=10,
        speed_gate=3.0,
        heading_gate=45.0,
        confidence_th=8.0,
        sync_rate=10.0,
        q=0.5,
        r_camera=0.25,
        r_v2v=2.25,
        velocity_var=100.0,
        staleness=1.0,
        coast=0.3,
        host_max_age=0.1,
    ):
        self.threshold = threshold
        self.buffer_size = buffer_size
        self.speed_gate = speed_gate
        self.heading_gate = heading_gate
        self.confidence_th = confidence_th
        self.sync_rate = sync_rate
        self.q = q
        self.r_camera = r_camera
        self.r_v2v = r_v2v
        self.velocity_var = velocity_var
        self.staleness = staleness
        self.coast = coast
        self.host_max_age = host_max_age

    def fit(self, X=None, y=None):
        self.config_ = RunConfig(input_dir=IN_MEMORY, **self.get_params())
        return self

    def _check_fitted(self):
        if not hasattr(self, "config_"):
            raise NotFittedError("TrackAssociator is not fitted yet; call fit() first")

    def transform(self, X) -> list:
        """Per-tick :class:`AssociationResult` objects."""
        return self.run(X).results

    def predict(self, X) -> list[dict]:
        return self.run(X).timeline()

    def run(self, X, y=None):
        """Full :class:`RunReport`; scored when ground truth ``y`` is given."""
        from .pipeline import associate_log

        self._check_fitted()
        truth = None if y is None else _as_truth(y)
        return associate_log(_as_log(X), self.config_, truth)

    def score(self, X, y) -> float:
        """Aggregate track matching accuracy as a fraction in [0, 1]."""
        report = tma(self.transform(X), _as_truth(y))
        if report.total == 0:
            raise ValueError("no scored decisions: the log and ground truth share no decision ticks")
        return report.correct / report.total


__all__ = ["TrackAssociator", "ConfigError"]
