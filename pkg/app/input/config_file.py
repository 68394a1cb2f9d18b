"""
Experiment configuration: a validated pydantic model plus the flat
`key = value` file format the command line accepts.
"""
from math import ceil
from pathlib import Path
from typing import Dict, Literal, Mapping, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.config import config
from app.errors import ConfigError

# file keys that differ from field names
KEY_ALIASES = {
    "B": "b_mode",
    "b-mode": "b_mode",
    "B-mode": "b_mode",
    "v-mode": "v_mode",
    "V-mode": "v_mode",
    "f-mode": "f_mode",
    "d-cap": "d_cap",
}


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int = Field(ge=3, le=64)
    m: int = Field(ge=2)
    t: Optional[int] = None
    k: Optional[int] = None
    b_mode: Literal["one", "random"] = "one"
    trials: int = Field(default_factory=lambda: config.get("experiment.trials", 100), ge=1)
    seed: int = 0
    d_cap: int = Field(default_factory=lambda: config.get("solver.d_cap", 4), ge=1)
    schedule: Literal["t=m", "escalate"] = "t=m"
    v_mode: Literal["low-degree", "random"] = "low-degree"
    f_mode: Literal["default", "random"] = "default"
    workers: int = Field(default_factory=lambda: config.get("experiment.workers", 1), ge=1)

    @field_validator("b_mode", "v_mode", "f_mode", "schedule", mode="before")
    @classmethod
    def _lower(cls, value):
        return value.lower() if isinstance(value, str) else value

    @model_validator(mode="after")
    def _defaults(self) -> "ExperimentConfig":
        if self.m >= self.n:
            raise ValueError(f"m = {self.m} must be below n = {self.n}")
        t = self.t if self.t is not None else self.m
        k = self.k if self.k is not None else ceil(self.n / self.m)
        if not 2 <= t <= self.m:
            raise ValueError(f"t = {t} must satisfy 2 <= t <= m = {self.m}")
        if not 1 <= k <= self.n:
            raise ValueError(f"k = {k} must satisfy 1 <= k <= n = {self.n}")
        self.t = t
        self.k = k
        return self

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "ExperimentConfig":
        normalized = {KEY_ALIASES.get(key, key.replace("-", "_")): value for key, value in values.items()}
        try:
            return cls(**normalized)
        except ValidationError as exc:
            raise ConfigError(f"invalid experiment configuration: {exc}") from exc


def parse_key_values(text: str) -> Dict[str, str]:
    """`key = value` per line; `#` starts a comment; blank lines are ignored."""
    values: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def load_experiment_config(source: Union[str, Path], **overrides) -> ExperimentConfig:
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values: Dict[str, object] = dict(parse_key_values(path.read_text(encoding="utf-8")))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_mapping(values)
