"""Run configuration: a flat key = value file and derived random seeds."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, fields
from pathlib import Path

ALPHABET_LEVELS = ("A1", "A2", "A3")


class ConfigError(ValueError):
    """Configuration file or value rejected."""


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters shared by the training and evaluation commands."""

    alphabet: str = "A1"
    seed: int = 0
    learning_rate: float = 1e-4
    batch_size: int = 128
    max_epochs: int = 200
    patience: int = 15
    dropout: float = 0.5
    beam_width: int = 100

    def __post_init__(self):
        if self.alphabet not in ALPHABET_LEVELS:
            raise ConfigError(f"unknown alphabet {self.alphabet!r}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be at least 1")
        if self.patience < 0:
            raise ConfigError("patience must not be negative")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must lie in [0, 1)")
        if self.beam_width < 1:
            raise ConfigError("beam_width must be at least 1")

    def to_mapping(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "TrainConfig":
        """Build from string or typed values; unknown keys are rejected."""
        types = {f.name: f.type for f in fields(cls)}
        coerce = {"alphabet": str, "seed": int, "learning_rate": float,
                  "batch_size": int, "max_epochs": int, "patience": int,
                  "dropout": float, "beam_width": int}
        kwargs = {}
        for key, value in mapping.items():
            if key not in types:
                raise ConfigError(f"unknown configuration key {key!r}")
            try:
                kwargs[key] = coerce[key](value)
            except (TypeError, ValueError) as err:
                raise ConfigError(f"bad value for {key}: {value!r}") from err
        return cls(**kwargs)


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` lines; blank lines and # comments skipped."""
    mapping: dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {number}: expected key = value")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {number}: expected key = value")
        if key in mapping:
            raise ConfigError(f"line {number}: duplicate key {key!r}")
        mapping[key] = value
    return mapping


def load_config(path) -> TrainConfig:
    return TrainConfig.from_mapping(parse_config_text(Path(path).read_text()))


def write_config(path, mapping: dict) -> None:
    """Write a resolved configuration, keys sorted, one per line."""
    lines = [f"{key} = {mapping[key]}" for key in sorted(mapping)]
    Path(path).write_text("\n".join(lines) + "\n")


def seed_stream(seed: int, purpose: str) -> int:
    """A stable derived seed for one named consumer of the run seed."""
    digest = hashlib.sha256(f"{seed}:{purpose}".encode()).digest()
    return int.from_bytes(digest[:8], "big")
