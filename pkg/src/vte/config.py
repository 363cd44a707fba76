"""Training configuration: defaults, `key = value` file parsing, overrides."""

from __future__ import annotations

from dataclasses import dataclass, fields

from .errors import ConfigError, ParseError


@dataclass
class TrainConfig:
    batch_size: int = 128
    tau_text: float = 0.1
    tau_proto: float = 0.1
    k: int = 1024
    d: int = 256            # shared head dimension; equals the prototype dimension e
    d_z: int = 128
    ema_alpha: float = 0.999
    ema_eps: float = 0.001
    lr: float = 5e-5
    optimizer: str = "adamw"
    weight_decay: float = 0.01
    epochs: int = 10
    seed: int = 0
    negative_ratio: int = 1
    threshold: float = 0.5
    detector_hidden: int = 0

    def validate(self) -> "TrainConfig":
        if self.batch_size < 2:
            raise ConfigError("batch_size must be at least 2")
        for name in ("tau_text", "tau_proto", "ema_eps", "lr"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 0.0 < self.ema_alpha < 1.0:
            raise ConfigError("ema_alpha must lie in (0, 1)")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError("threshold must lie in (0, 1)")
        if self.optimizer not in ("adamw", "adam"):
            raise ConfigError("optimizer must be 'adamw' or 'adam'")
        for name in ("k", "d", "d_z", "epochs", "negative_ratio", "seed", "detector_hidden"):
            value = getattr(self, name)
            if value < 0 or (name in ("k", "d", "d_z") and value == 0):
                raise ConfigError(f"{name} must be non-negative" if value < 0
                                  else f"{name} must be positive")
        if self.k < 2:
            raise ConfigError("k must be at least 2")
        if self.weight_decay < 0:
            raise ConfigError("weight_decay must be non-negative")
        if self.negative_ratio < 1:
            raise ConfigError("negative_ratio must be at least 1")
        if self.epochs < 0:
            raise ConfigError("epochs must be non-negative")
        return self

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data).validate()


def _coerce(name: str, text: str):
    kinds = {f.name: type(getattr(TrainConfig(), f.name)) for f in fields(TrainConfig)}
    if name not in kinds:
        raise ConfigError(f"unknown config key {name!r}")
    kind = kinds[name]
    try:
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"cannot parse {name}={text!r} as {kind.__name__}") from exc


def load_config(path) -> TrainConfig:
    """Parse a `key = value` config file; '#' lines are comments."""
    data = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"expected 'key = value', got {line!r}", line=lineno)
            name, _, text = line.partition("=")
            data[name.strip()] = _coerce(name.strip(), text.strip())
    return TrainConfig.from_dict(data)


def save_config(config: TrainConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for name, value in config.to_dict().items():
            fh.write(f"{name} = {value}\n")


def apply_overrides(config: TrainConfig, overrides) -> TrainConfig:
    """Apply `key=value` strings on top of an existing config."""
    data = config.to_dict()
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        name, _, text = item.partition("=")
        data[name.strip()] = _coerce(name.strip(), text.strip())
    return TrainConfig.from_dict(data)
