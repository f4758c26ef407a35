"""Run configuration: JSON file plus command-line overrides."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from datetime import date
from typing import Sequence

from .errors import ConfigError
from .evaluation import DEFAULT_RELEVANCE_CAP, SIGNALS
from .events import DEFAULT_HORIZON
from .ranking import POLICIES
from .states import DEFAULT_NOVELTY_LIMITS, DEFAULT_POPULARITY_BINS
from .synth import GeneratorConfig
from .transitions import DEFAULT_BETA, DEFAULT_EPSILON

_EPOCH = date(1970, 1, 1)
MINUTES_PER_DAY = 1440


def parse_minute(value) -> int:
    """A window endpoint: a minute index or an ISO date (UTC midnight)."""
    if isinstance(value, bool):
        raise ConfigError(f"invalid window endpoint {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return int(value)
        except ValueError:
            pass
        try:
            return (date.fromisoformat(value) - _EPOCH).days * MINUTES_PER_DAY
        except ValueError:
            raise ConfigError(
                f"window endpoint {value!r} is neither a minute index nor an ISO date"
            ) from None
    raise ConfigError(f"invalid window endpoint {value!r}")


def parse_window(value, name: str) -> tuple[int, int]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{name} must be a [start, end) pair")
    start, end = (parse_minute(v) for v in value)
    if end <= start:
        raise ConfigError(f"{name} [{start}, {end}) is empty")
    return start, end


def parse_window_flag(text: str, name: str) -> tuple[int, int]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"{name} must look like START:END")
    return parse_window(parts, name)


def parse_hours(value) -> tuple[int, ...]:
    """Hour set from a list of ints or a string like '12-1' or '12,13,0'.

    Ranges wrap past midnight, so '12-1' covers 12:00 through 01:59.
    """
    if isinstance(value, (list, tuple)):
        hours = [int(h) for h in value]
    elif isinstance(value, str):
        hours = []
        for token in value.split(","):
            token = token.strip()
            if "-" in token:
                a_text, _, b_text = token.partition("-")
                a, b = int(a_text), int(b_text)
                h = a
                hours.append(h)
                while h != b:
                    h = (h + 1) % 24
                    hours.append(h)
            elif token:
                hours.append(int(token))
    else:
        raise ConfigError(f"invalid hour set {value!r}")
    if not hours:
        raise ConfigError("hour set is empty")
    if any(h < 0 or h > 23 for h in hours):
        raise ConfigError("hours must lie in 0..23")
    return tuple(sorted(set(hours)))


@dataclass
class RunConfig:
    """Everything a CLI run needs; flags override file values."""

    events_path: str | None = None
    model_path: str | None = None
    report_dir: str | None = None
    train_window: tuple[int, int] | None = None
    eval_window: tuple[int, int] | None = None
    beta: float = DEFAULT_BETA
    epsilon: float = DEFAULT_EPSILON
    horizon: int = DEFAULT_HORIZON
    decision_interval: int = 1
    novelty_limits: tuple[int, ...] = DEFAULT_NOVELTY_LIMITS
    n_popularity_bins: int = DEFAULT_POPULARITY_BINS
    peak_hours: tuple[int, ...] | None = None
    policies: tuple[str, ...] = POLICIES
    signals: tuple[str, ...] = SIGNALS
    relevance_cap: int = DEFAULT_RELEVANCE_CAP
    smoothing: float = 0.0
    dump_snapshots: bool = False
    generator: GeneratorConfig | None = None

    def validate(self) -> None:
        if not 0 < self.beta <= 1:
            raise ConfigError("beta must lie in (0, 1]")
        if not 0 <= self.epsilon <= 1:
            raise ConfigError("epsilon must lie in [0, 1]")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.decision_interval < 1:
            raise ConfigError("decision_interval must be >= 1")
        if self.relevance_cap < 1:
            raise ConfigError("relevance_cap must be >= 1")
        if self.smoothing < 0:
            raise ConfigError("smoothing must be >= 0")
        for p in self.policies:
            if p not in POLICIES:
                raise ConfigError(f"unknown policy {p!r}")
        for s in self.signals:
            if s not in SIGNALS:
                raise ConfigError(f"unknown signal {s!r}")
        if self.generator is not None:
            self.generator.validate()


_GENERATOR_FIELDS = {f.name for f in dataclasses.fields(GeneratorConfig)}
_TUPLE_GENERATOR_FIELDS = {
    "weekday_factors", "diurnal_weights", "early_weights", "boost_hours",
}


def generator_from_dict(data: dict) -> GeneratorConfig:
    if not isinstance(data, dict):
        raise ConfigError("generator config must be an object")
    unknown = set(data) - _GENERATOR_FIELDS
    if unknown:
        raise ConfigError(f"unknown generator key(s): {', '.join(sorted(unknown))}")
    kwargs = dict(data)
    for key in _TUPLE_GENERATOR_FIELDS & set(kwargs):
        kwargs[key] = tuple(kwargs[key])
    cfg = GeneratorConfig(**kwargs)
    cfg.validate()
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")

    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")

    cfg = RunConfig()
    for key, value in data.items():
        if value is None:
            continue
        if key in ("train_window", "eval_window"):
            setattr(cfg, key, parse_window(value, key))
        elif key == "peak_hours":
            cfg.peak_hours = parse_hours(value)
        elif key == "novelty_limits":
            cfg.novelty_limits = tuple(int(v) for v in value)
        elif key in ("policies", "signals"):
            setattr(cfg, key, tuple(str(v) for v in value))
        elif key == "generator":
            cfg.generator = generator_from_dict(value)
        else:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg
