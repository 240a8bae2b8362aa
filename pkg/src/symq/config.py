"""Run configuration, algorithm presets and validation."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .envs import ENVS
from .errors import ConfigError

# (N, M, G, correction) per algorithm. Desk scale shrinks the REDQ ensembles.
PRESETS = {
    "sac": dict(N=1, M=1, G=1, correction=False),
    "symsac": dict(N=1, M=1, G=1, correction=True),
    "redq": dict(N=5, M=2, G=5, correction=False),
    "symredq": dict(N=5, M=2, G=5, correction=True),
}
PAPER_SCALE = {
    "sac": dict(N=1, M=1, G=1),
    "symsac": dict(N=1, M=1, G=1),
    "redq": dict(N=10, M=2, G=20),
    "symredq": dict(N=20, M=2, G=20),
}


@dataclass
class AgentConfig:
    env: str = "pendulum"
    preset: str = "symredq"
    N: int = 5
    M: int = 2
    G: int = 5
    correction: bool = True
    k: int = 1
    clusters: int = 10
    gamma: float = 0.99
    rho: float = 0.005
    lr: float = 3e-4
    batch_size: int = 256
    hidden: list = field(default_factory=lambda: [256, 256])
    buffer_capacity: int = 100_000
    total_steps: int = 30_000
    warmup_steps: int = 5000
    eval_interval: int = 1000
    eval_episodes: int = 10
    snapshot_interval: int = 500
    seed: int = 0
    paper_scale: bool = False
    name: str = ""

    @property
    def label(self) -> str:
        return self.name or self.preset

    def validate(self) -> "AgentConfig":
        if self.env not in ENVS:
            raise ConfigError(f"unknown environment {self.env!r}", field="env")
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}", field="preset")
        positive = ("N", "G", "k", "clusters", "batch_size", "buffer_capacity", "eval_interval", "eval_episodes", "snapshot_interval")
        for name in positive:
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"must be >= 1, got {getattr(self, name)}", field=name)
        if not 1 <= self.M <= self.N:
            raise ConfigError(f"need 1 <= M <= N, got M={self.M}, N={self.N}", field="M")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"must lie in (0, 1], got {self.gamma}", field="gamma")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError(f"must lie in [0, 1], got {self.rho}", field="rho")
        if not self.lr > 0:
            raise ConfigError(f"must be positive, got {self.lr}", field="lr")
        if self.total_steps < 0 or self.warmup_steps < 0:
            field_name = "total_steps" if self.total_steps < 0 else "warmup_steps"
            raise ConfigError("must be non-negative", field=field_name)
        if not self.hidden or any(int(h) < 1 for h in self.hidden):
            raise ConfigError(f"hidden sizes must be positive, got {self.hidden}", field="hidden")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("must be an unsigned 64-bit integer", field="seed")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


FIELD_NAMES = tuple(f.name for f in dataclasses.fields(AgentConfig))


def make_config(preset: str = "symredq", paper_scale: bool = False, **overrides) -> AgentConfig:
    """Preset values first, then the paper-scale table, then explicit overrides."""
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}", field="preset")
    values = dict(PRESETS[preset])
    if paper_scale:
        values.update(PAPER_SCALE[preset])
        values["buffer_capacity"] = 1_000_000
    unknown = set(overrides) - set(FIELD_NAMES)
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)}", field=sorted(unknown)[0])
    values.update({k: v for k, v in overrides.items() if v is not None})
    values["preset"] = preset
    values["paper_scale"] = paper_scale
    return AgentConfig(**values).validate()


def config_from_dict(data: dict) -> AgentConfig:
    data = dict(data)
    preset = data.pop("preset", "symredq")
    paper_scale = bool(data.pop("paper_scale", False))
    return make_config(preset, paper_scale, **data)


def load_config(path, **overrides) -> AgentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}", field="config") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object", field="config")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(data)
