"""Flat ``key = value`` pipeline configuration.

Keys are namespaced by stage (``nmf.max_iters``, ``preprocess.ma_window``,
``actuator.dt``); ``alpha``, ``vaf_threshold``, ``seed`` and
``selection_method`` are top level. Lines starting with ``#`` are comments.
When no file is given explicitly, ``$KINOSYN_CONFIG`` is used if set.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataParseError, ParameterError
from .nmf import NmfOptions
from .preprocess import PreprocessConfig
from .simulator import ActuatorModel
from .synergy import DEFAULT_ALPHA

ENV_VAR = "KINOSYN_CONFIG"

_SECTIONS = {
    "preprocess": PreprocessConfig,
    "nmf": NmfOptions,
    "actuator": ActuatorModel,
}


@dataclass(frozen=True)
class PipelineConfig:
    alpha: float = DEFAULT_ALPHA
    vaf_threshold: float = 0.9
    seed: int = 0
    selection_method: str = "projection"
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    nmf: NmfOptions = field(default_factory=NmfOptions)
    actuator: ActuatorModel = field(default_factory=ActuatorModel)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")
        if not 0 < self.vaf_threshold < 1:
            raise ParameterError(f"vaf_threshold must be in (0, 1), got {self.vaf_threshold}")
        if self.selection_method not in ("projection", "correlation"):
            raise ParameterError(f"unknown selection_method {self.selection_method!r}")

    @classmethod
    def from_mapping(cls, values: dict) -> "PipelineConfig":
        """Build from flat string keys; ``seed`` also seeds NMF unless
        ``nmf.seed`` is given."""
        groups = {name: {} for name in ("", *_SECTIONS)}
        for key, raw in values.items():
            section, _, name = key.rpartition(".")
            if section not in groups:
                raise ParameterError(f"unknown config section in {key!r}")
            groups[section][name] = raw

        top_types = _field_types(cls)
        kwargs = {}
        for name, raw in groups[""].items():
            if name not in top_types or name in _SECTIONS:
                raise ParameterError(f"unknown config key {name!r}")
            kwargs[name] = _coerce(name, raw, top_types[name])
        if "seed" in kwargs:
            groups["nmf"].setdefault("seed", kwargs["seed"])
        for section, klass in _SECTIONS.items():
            types = _field_types(klass)
            sub = {}
            for name, raw in groups[section].items():
                if name not in types:
                    raise ParameterError(f"unknown config key {section}.{name!r}")
                sub[name] = _coerce(f"{section}.{name}", raw, types[name])
            kwargs[section] = klass(**sub)
        return cls(**kwargs)


def _field_types(klass) -> dict:
    return {f.name: str(f.type) for f in dataclasses.fields(klass)}


def _coerce(key: str, raw, type_name):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    t = type_name
    try:
        if t.startswith("int | None"):
            return None if text.lower() in ("", "none") else int(text)
        if t == "int":
            return int(text)
        if t == "float":
            return float(text)
        if t == "bool":
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
    except ValueError:
        raise ParameterError(f"bad value for {key}: {raw!r}") from None
    return text


def parse_config_text(text: str, source="<config>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise DataParseError(f"expected key = value, got {line!r}", path=source, row=lineno)
        values[key.strip()] = value.strip()
    return values


def load_config(path=None, overrides: dict | None = None) -> PipelineConfig:
    """Defaults, then the config file (explicit or ``$KINOSYN_CONFIG``), then
    ``overrides``."""
    values = {}
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise DataParseError(f"cannot read config: {exc.strerror}", path=path) from exc
        values.update(parse_config_text(text, path))
    values.update(overrides or {})
    return PipelineConfig.from_mapping(values)


def dump_config(cfg: PipelineConfig) -> str:
    lines = [
        f"alpha = {cfg.alpha!r}",
        f"vaf_threshold = {cfg.vaf_threshold!r}",
        f"seed = {cfg.seed}",
        f"selection_method = {cfg.selection_method}",
    ]
    for section in _SECTIONS:
        obj = getattr(cfg, section)
        for f in dataclasses.fields(obj):
            lines.append(f"{section}.{f.name} = {getattr(obj, f.name)!r}")
    return "\n".join(lines) + "\n"
