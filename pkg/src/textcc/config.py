"""Pipeline configuration stored as an INI file.

Example (all keys optional; these are the defaults)::

    [proposal]
    connectivity = eight
    word_threshold = 0.5
    centerline_threshold = 0.5
    orphan_attach_max_dist = 20
    drop_seedless = false

    [verification]
    min_confidence = 0.7
    support_ratio = 0.3

    [loss]
    tau = 0.5
    min_confidence = 0.7

    [evaluation]
    protocol = iou
    iou_threshold = 0.5

``loss.min_confidence`` falls back to ``verification.min_confidence`` when
absent. An optional ``[paths]`` section may name ``word_map``,
``centerline_map``, ``chars`` and ``output``.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .loss import LossConfig
from .proposals import ProposalConfig
from .raster import Connectivity
from .verification import VerificationConfig

__all__ = ["ConfigError", "EvaluationConfig", "PipelineConfig", "load_config", "loads_config", "dumps_config",
           "save_config"]

PATH_KEYS = ("word_map", "centerline_map", "chars", "output")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EvaluationConfig:
    protocol: str = "iou"
    iou_threshold: float = 0.5

    def __post_init__(self):
        if self.protocol not in ("iou", "deteval"):
            raise ValueError(f"protocol must be 'iou' or 'deteval', got {self.protocol!r}")
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValueError(f"iou_threshold must lie in (0, 1], got {self.iou_threshold}")


@dataclass(frozen=True)
class PipelineConfig:
    proposal: ProposalConfig = ProposalConfig()
    verification: VerificationConfig = VerificationConfig()
    loss: LossConfig = LossConfig()
    evaluation: EvaluationConfig = EvaluationConfig()
    paths: dict = field(default_factory=dict)

    def __post_init__(self):
        for k, v in self.paths.items():
            if k not in PATH_KEYS:
                raise ValueError(f"unknown path key {k!r}")
            if not str(v).strip():
                raise ValueError(f"path {k!r} must be non-empty")


_SCHEMA = {
    "proposal": {
        "connectivity": Connectivity.parse,
        "word_threshold": float,
        "centerline_threshold": float,
        "orphan_attach_max_dist": float,
        "drop_seedless": "bool",
    },
    "verification": {"min_confidence": float, "support_ratio": float},
    "loss": {"tau": float, "min_confidence": float},
    "evaluation": {"protocol": str, "iou_threshold": float},
}


def _line_of(text: str, section: str, key: str):
    current = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
        elif current == section and line.split("=", 1)[0].split(":", 1)[0].strip().lower() == key:
            return no
    return None


def _where(text, source, section, key=None):
    no = _line_of(text, section, key) if key else None
    loc = f"{source}:{no}" if no else source
    return f"{loc}: [{section}]" + (f" {key}" if key else "")


def loads_config(text: str, source: str = "<config>") -> PipelineConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as e:
        raise ConfigError(f"{source}: parse error: {e}") from None

    values: dict[str, dict] = {s: {} for s in _SCHEMA}
    for section in cp.sections():
        if section == "paths":
            continue
        if section not in _SCHEMA:
            raise ConfigError(f"{_where(text, source, section)}: unknown section")
        for key, raw in cp.items(section):
            conv = _SCHEMA[section].get(key)
            if conv is None:
                raise ConfigError(f"{_where(text, source, section, key)}: unknown field")
            try:
                values[section][key] = cp.getboolean(section, key) if conv == "bool" else conv(raw)
            except ValueError as e:
                raise ConfigError(f"{_where(text, source, section, key)}: cannot parse {raw!r}: {e}") from None

    if "min_confidence" not in values["loss"] and "min_confidence" in values["verification"]:
        values["loss"]["min_confidence"] = values["verification"]["min_confidence"]

    built = {}
    for section, cls in (("proposal", ProposalConfig), ("verification", VerificationConfig),
                         ("loss", LossConfig), ("evaluation", EvaluationConfig)):
        try:
            built[section] = cls(**values[section])
        except ValueError as e:
            key = str(e).split()[0] if values[section] else None
            raise ConfigError(f"{_where(text, source, section, key)}: out of range: {e}") from None
    paths = dict(cp.items("paths")) if cp.has_section("paths") else {}
    try:
        return PipelineConfig(paths=paths, **built)
    except ValueError as e:
        raise ConfigError(f"{source}: [paths]: {e}") from None


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config: {e.strerror}") from None
    return loads_config(text, str(path))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Connectivity):
        return v.value
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def dumps_config(cfg: PipelineConfig) -> str:
    out = []
    for section, obj in (("proposal", cfg.proposal), ("verification", cfg.verification),
                         ("loss", cfg.loss), ("evaluation", cfg.evaluation)):
        out.append(f"[{section}]")
        out += [f"{k} = {_fmt(getattr(obj, k))}" for k in _SCHEMA[section]]
        out.append("")
    if cfg.paths:
        out.append("[paths]")
        out += [f"{k} = {cfg.paths[k]}" for k in PATH_KEYS if k in cfg.paths]
        out.append("")
    return "\n".join(out)


def save_config(cfg: PipelineConfig, path) -> None:
    Path(path).write_text(dumps_config(cfg))


def with_overrides(cfg: PipelineConfig, **overrides) -> PipelineConfig:
    """Apply ``section__key=value`` overrides, skipping ``None`` values."""
    sections = {}
    for name, value in overrides.items():
        if value is None:
            continue
        section, key = name.split("__", 1)
        sections.setdefault(section, {})[key] = value
    kw = {s: replace(getattr(cfg, s), **kv) for s, kv in sections.items()}
    return replace(cfg, **kw)
