"""Run configuration: one JSON document with `synth`, `reward` and `grpo`
sections, plus dotted-path flag overrides (e.g. synth.min_visibility=0.5).
Unknown keys are rejected so typos fail loudly instead of silently running
with defaults."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .grpo import GrpoConfig
from .rewards import RewardConfig
from .synth import SynthConfig


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    synth: SynthConfig
    reward: RewardConfig
    grpo: GrpoConfig


_SECTIONS = {"synth": SynthConfig, "reward": RewardConfig, "grpo": GrpoConfig}


def _field_names(cls) -> set[str]:
    return {f.name for f in dataclasses.fields(cls)}


def _coerce_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _apply_overrides(doc: dict, overrides) -> None:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form section.key=value")
        path, raw_value = item.split("=", 1)
        parts = path.split(".")
        if len(parts) != 2:
            raise ConfigError(f"override path '{path}' must be section.key")
        section, key = parts
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section '{section}'")
        doc.setdefault(section, {})[key] = _coerce_value(raw_value)


def load_run_config(
    path: str | Path | None = None,
    overrides=(),
    seed: int | None = None,
) -> RunConfig:
    doc: dict = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
    unknown = set(doc) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    _apply_overrides(doc, overrides)
    if seed is not None:
        doc.setdefault("synth", {})["seed"] = seed

    built = {}
    for name, cls in _SECTIONS.items():
        section = doc.get(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"section '{name}' must be a JSON object")
        unknown_keys = set(section) - _field_names(cls)
        if unknown_keys:
            raise ConfigError(f"unknown keys in section '{name}': {sorted(unknown_keys)}")
        coerced = dict(section)
        if name == "synth":
            if "size_range_cm" in coerced:
                coerced["size_range_cm"] = tuple(coerced["size_range_cm"])
            if "category_blacklist" in coerced:
                coerced["category_blacklist"] = frozenset(coerced["category_blacklist"])
        if name == "reward" and "thresholds" in coerced:
            coerced["thresholds"] = tuple(coerced["thresholds"])
        try:
            built[name] = cls(**coerced)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid section '{name}': {exc}") from exc
    return RunConfig(synth=built["synth"], reward=built["reward"], grpo=built["grpo"])
