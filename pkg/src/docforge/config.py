"""Run configuration: INI-style file, then flags, over built-in defaults.

Sections and keys::

    [backend]  kind, endpoint, model_name, timeout_ms, max_retries,
               backoff_ms, fixture_path, api_key_env
    [run]      concurrency, output_dir
    [reward]   lambda_rep, repetition_threshold, missing_field,
               duplicate_key, malformed, kie_penalty_cap
    [layout]   min_gap
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

from docforge.layout import DEFAULT_MIN_GAP
from docforge.recognize import BackendConfig, BackendKind
from docforge.reward.rewards import RewardWeights

ENV_VAR = "DOCFORGE_CONFIG"

_RANGES = {
    "concurrency": (1, 256),
    "min_gap": (0, 10_000),
    "lambda_rep": (0.0, 10.0),
    "repetition_threshold": (0.0, 1.0),
    "missing_field": (0.0, 1.0),
    "duplicate_key": (0.0, 1.0),
    "malformed": (0.0, 1.0),
    "kie_penalty_cap": (0.0, 1.0),
    "timeout_ms": (1, 3_600_000),
    "max_retries": (0, 10),
    "backoff_ms": (0, 60_000),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    backend: Optional[BackendConfig] = None
    concurrency: int = 4
    output_dir: str = "."
    reward: RewardWeights = field(default_factory=RewardWeights)
    min_gap: int = DEFAULT_MIN_GAP


def _number(section: str, key: str, raw: str, typ: type) -> Any:
    try:
        value = typ(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: expected {typ.__name__}, got {raw!r}") from exc
    lo, hi = _RANGES[key]
    if not lo <= value <= hi:
        raise ConfigError(f"[{section}] {key}={value} outside [{lo}, {hi}]")
    return value


def _read_file(path: Optional[str]) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return parser
    if not Path(path).is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parser


def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Build a :class:`RunConfig`; ``overrides`` holds flag values (None = unset)."""
    parser = _read_file(path)
    flat: dict[str, tuple[str, str]] = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            flat[f"{section}.{key}"] = (section, value)
    for key, value in (overrides or {}).items():
        if value is not None:
            flat[key] = (key.split(".")[0], str(value))

    def get(key: str, typ: type = str, default: Any = None) -> Any:
        if key not in flat:
            return default
        section, raw = flat[key]
        name = key.split(".", 1)[1]
        if typ is str:
            return raw
        return _number(section, name, raw, typ)

    cfg = RunConfig()
    cfg.concurrency = get("run.concurrency", int, cfg.concurrency)
    cfg.output_dir = get("run.output_dir", str, cfg.output_dir)
    cfg.min_gap = get("layout.min_gap", int, cfg.min_gap)

    weights = {}
    for f in dataclasses.fields(RewardWeights):
        value = get(f"reward.{f.name}", float)
        if value is not None:
            weights[f.name] = value
    cfg.reward = RewardWeights(**weights)

    kind = get("backend.kind")
    if kind is not None:
        try:
            backend_kind = BackendKind(kind)
        except ValueError as exc:
            raise ConfigError(f"[backend] kind: expected mock or remote, got {kind!r}") from exc
        key_env = get("backend.api_key_env")
        try:
            cfg.backend = BackendConfig(
                kind=backend_kind,
                endpoint=get("backend.endpoint"),
                model_name=get("backend.model_name"),
                timeout_ms=get("backend.timeout_ms", int, 60_000),
                max_retries=get("backend.max_retries", int, 2),
                backoff_ms=get("backend.backoff_ms", int, 200),
                fixture_path=get("backend.fixture_path"),
                api_key=os.environ.get(key_env) if key_env else None,
            )
        except ValueError as exc:
            raise ConfigError(f"[backend] {exc}") from exc
    return cfg
