"""Declarative configuration: one YAML document holds every tunable.

Clinicians adjust thresholds, windows, and even gesture templates here;
nothing requires a rebuild. CLI flags override file values, and the
IMIGAME_LISTEN / IMIGAME_STORE environment variables override the
listen endpoint and store path. dump()/load round-trips reproduce
identical behavior.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .engine import RubricConfig
from .errors import ConfigError
from .gestures import (
    Constraint, GestureTemplate, KeyframeSpec, MatchConfig, builtin_templates,
)

ENV_LISTEN = "IMIGAME_LISTEN"
ENV_STORE = "IMIGAME_STORE"


@dataclass(frozen=True)
class FilterConfig:
    min_height_ratio: float = 0.30
    min_coverage: float = 0.25


@dataclass(frozen=True)
class TrackConfig:
    max_jump: float = 1.5          # torso lengths between frames
    track_ttl_ms: int = 1000


@dataclass(frozen=True)
class RoleConfig:
    policy: str = "by_side"
    model_on: str = "left"


@dataclass(frozen=True)
class AppConfig:
    conf_min: float = 0.10
    filter: FilterConfig = field(default_factory=FilterConfig)
    tracking: TrackConfig = field(default_factory=TrackConfig)
    match: MatchConfig = field(default_factory=MatchConfig)
    rubric: RubricConfig = field(default_factory=RubricConfig)
    role: RoleConfig = field(default_factory=RoleConfig)
    listen: str = "127.0.0.1:8787"
    store_path: str = "imigame-store"
    broadcast_max_fps: float = 20.0
    templates: tuple = ()          # raw template dicts; empty = built-ins

    def gesture_templates(self) -> list:
        if not self.templates:
            return builtin_templates(self.match)
        return [template_from_dict(t) for t in self.templates]


def template_from_dict(doc: dict) -> GestureTemplate:
    try:
        keyframes = []
        for kf in doc["keyframes"]:
            constraints = tuple(
                Constraint(c["feature"], float(c["target"]),
                           float(c["tolerance"]))
                for c in kf.get("constraints", ()))
            bools = tuple((b["feature"], bool(b["value"]))
                          for b in kf.get("bools", ()))
            keyframes.append(KeyframeSpec(
                constraints=constraints,
                required_bools=bools,
                hold_ms=int(kf.get("hold_ms", 500)),
                required_limbs=tuple(kf.get("required_limbs", ())),
            ))
        return GestureTemplate(
            name=doc["name"],
            keyframes=tuple(keyframes),
            timeout_ms=int(doc.get("timeout_ms", 20000)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad template definition: {exc}") from exc


def _build_section(cls, doc: dict, path: str):
    known = {f.name for f in fields(cls)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown keys in {path}: {sorted(unknown)}")
    try:
        return cls(**doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad values in {path}: {exc}") from exc


def config_from_dict(doc: dict) -> AppConfig:
    doc = dict(doc or {})
    sections = {
        "filter": FilterConfig, "tracking": TrackConfig,
        "match": MatchConfig, "rubric": RubricConfig, "role": RoleConfig,
    }
    kwargs = {}
    for key, cls in sections.items():
        if key in doc:
            kwargs[key] = _build_section(cls, doc.pop(key) or {}, key)
    if "templates" in doc:
        kwargs["templates"] = tuple(doc.pop("templates") or ())
    top = {f.name for f in fields(AppConfig)}
    unknown = set(doc) - top
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    kwargs.update(doc)
    return AppConfig(**kwargs)


def load_config(path=None, **overrides) -> AppConfig:
    """Build the effective config: file -> env -> explicit overrides."""
    doc = {}
    if path is not None:
        try:
            doc = yaml.safe_load(Path(path).read_text()) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
    cfg = config_from_dict(doc)
    env_listen = os.environ.get(ENV_LISTEN)
    env_store = os.environ.get(ENV_STORE)
    updates = {}
    if env_listen:
        updates["listen"] = env_listen
    if env_store:
        updates["store_path"] = env_store
    updates.update({k: v for k, v in overrides.items() if v is not None})
    if updates:
        merged = asdict(cfg)
        merged.update(updates)
        cfg = config_from_dict(merged)
    return cfg


def _listify(value):
    if isinstance(value, tuple):
        return [_listify(v) for v in value]
    if isinstance(value, dict):
        return {k: _listify(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_listify(v) for v in value]
    return value


def dump_config(cfg: AppConfig) -> str:
    return yaml.safe_dump(_listify(asdict(cfg)), sort_keys=False)
