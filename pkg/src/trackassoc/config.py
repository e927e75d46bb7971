"""Run configuration: one flat JSON document, every key optional."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .association import Gates
from .sim.scenarios import SCENARIOS, ScenarioConfig
from .state_estimation import KfModel
from .records import Sensor


class ConfigError(ValueError):
    """Invalid run configuration; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"config key {key!r}: {message}")
        self.key = key


# placeholder input for logs handed over in memory
IN_MEMORY = "<memory>"

# scenario keys that the run config supplies itself
_SHARED = {"seed", "sync_rate", "truth_coast"}
SCENARIO_KEYS = ScenarioConfig.field_names() - _SHARED


@dataclass(frozen=True)
class RunConfig:
    sync_rate: float = 10.0
    q: float = 0.5
    r_camera: float = 0.25
    r_v2v: float = 2.25
    velocity_var: float = 100.0
    staleness: float = 1.0
    coast: float = 0.3
    threshold: float = 8.0
    buffer_size: int = 10
    speed_gate: float | None = 3.0
    heading_gate: float | None = 45.0
    confidence_th: float = 8.0
    host_max_age: float = 0.1
    scenario: str | None = None
    input_dir: str | None = None
    seed: int = 0
    output_dir: str | None = None
    scenario_params: dict = field(default_factory=dict)

    def __post_init__(self):
        for key in ("sync_rate", "q", "r_camera", "r_v2v", "velocity_var", "staleness", "threshold",
                    "confidence_th", "host_max_age"):
            v = getattr(self, key)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or math.isnan(v) or not v > 0:
                raise ConfigError(key, f"must be a positive number, got {v!r}")
        if isinstance(self.coast, bool) or not isinstance(self.coast, (int, float)) or not self.coast >= 0:
            raise ConfigError("coast", f"must be a non-negative number, got {self.coast!r}")
        for key in ("speed_gate", "heading_gate"):
            v = getattr(self, key)
            if v is not None and (isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0):
                raise ConfigError(key, f"must be a positive number or null, got {v!r}")
        if isinstance(self.buffer_size, bool) or not isinstance(self.buffer_size, int) or self.buffer_size < 1:
            raise ConfigError("buffer_size", f"must be an integer >= 1, got {self.buffer_size!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed", f"must be a non-negative integer, got {self.seed!r}")
        if (self.scenario is None) == (self.input_dir is None):
            raise ConfigError("scenario", "exactly one of 'scenario' and 'input_dir' must be given")
        if self.scenario is not None and self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"unknown scenario {self.scenario!r}; choose from {sorted(SCENARIOS)}")
        for key in self.scenario_params:
            if key not in SCENARIO_KEYS:
                raise ConfigError(key, "unknown key")
        if self.scenario_params:
            try:
                self.scenario_config()
            except (TypeError, ValueError) as exc:
                raise ConfigError(_first_key(str(exc), self.scenario_params), str(exc)) from None

    @property
    def gates(self) -> Gates:
        return Gates(speed=self.speed_gate, heading=self.heading_gate)

    def models(self) -> dict:
        return {
            Sensor.CAMERA: KfModel.isotropic(self.q, self.r_camera),
            Sensor.V2V: KfModel.isotropic(self.q, self.r_v2v),
        }

    def scenario_config(self) -> ScenarioConfig:
        return ScenarioConfig(seed=self.seed, sync_rate=self.sync_rate, truth_coast=self.coast,
                              **self.scenario_params)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        own = {f.name for f in fields(cls)} - {"scenario_params"}
        kwargs, scenario = {}, {}
        for key, value in doc.items():
            if key in own:
                kwargs[key] = value
            elif key in SCENARIO_KEYS:
                scenario[key] = value
            else:
                raise ConfigError(key, "unknown key")
        return cls(**kwargs, scenario_params=scenario)

    @classmethod
    def load(cls, path, **overrides) -> "RunConfig":
        p = Path(path)
        try:
            doc = json.loads(p.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError("<file>", f"cannot read {p}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"{p} is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        doc.update({k: v for k, v in overrides.items() if v is not None})
        if doc.get("input_dir") is not None and not Path(doc["input_dir"]).is_absolute():
            doc["input_dir"] = str((p.parent / doc["input_dir"]).resolve())
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(d.pop("scenario_params"))
        return d


def _first_key(message: str, params: dict) -> str:
    for key in params:
        if key in message:
            return key
    return next(iter(params))
