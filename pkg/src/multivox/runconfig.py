"""Layered run configuration.

A run is fully determined by one YAML tree with sections model / train /
data / frontend / context. Precedence: built-in defaults < config file <
MULTIVOX_* environment variables < command-line overrides. Unknown keys are
rejected everywhere, so typos fail before any work starts.

Environment variables use MULTIVOX_<SECTION>__<KEY>=<yaml-scalar>, e.g.
MULTIVOX_TRAIN__LEARNING_RATE=1e-4.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

import yaml

from .errors import ConfigError
from .model.config import ModelConfig

ENV_PREFIX = "MULTIVOX_"
PRESETS = ("desk", "track1", "track2")


@dataclass
class TrainSection:
    learning_rate: float = 2e-4
    adam_betas: tuple[float, float] = (0.8, 0.99)
    adam_eps: float = 1e-9
    weight_decay: float = 0.01
    batch_size: int = 16
    max_iterations: int = 136000
    lr_decay: float = 0.999875
    seed: int = 1234
    segment_frames: int = 32
    checkpoint_interval: int = 1000
    log_interval: int = 10
    mel_weight: float = 45.0
    kl_weight: float = 1.0
    duration_weight: float = 1.0
    adversarial_weight: float = 1.0
    feature_matching_weight: float = 2.0
    grad_accumulation: int = 1
    replay_base_speakers: bool = False

    def validate(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        for name in (
            "mel_weight",
            "kl_weight",
            "duration_weight",
            "adversarial_weight",
            "feature_matching_weight",
        ):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if not (0 < self.lr_decay <= 1):
            raise ConfigError("lr_decay must be in (0, 1]")
        if self.segment_frames < 1:
            raise ConfigError("segment_frames must be >= 1")


@dataclass
class DataSection:
    manifest: str = ""
    cache_dir: str = ""

    def validate(self):
        pass


@dataclass
class FrontendSection:
    backend: str = "lexicon"
    insert_word_boundaries: bool = False
    keep_punctuation: bool = False

    def validate(self):
        if self.backend not in ("lexicon", "espeak"):
            raise ConfigError(f"unknown frontend backend {self.backend!r}")


@dataclass
class ContextSection:
    kind: str = "stub"
    dim: int = 8
    identifier: str = "42"

    def validate(self):
        if self.kind not in ("stub", "pretrained"):
            raise ConfigError(f"unknown context extractor kind {self.kind!r}")
        if self.dim <= 0:
            raise ConfigError("context dim must be positive")
        if self.kind == "pretrained" and not self.identifier:
            raise ConfigError("pretrained context extractor needs an identifier")


_SECTIONS = {
    "model": ModelConfig,
    "train": TrainSection,
    "data": DataSection,
    "frontend": FrontendSection,
    "context": ContextSection,
}


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainSection = field(default_factory=TrainSection)
    data: DataSection = field(default_factory=DataSection)
    frontend: FrontendSection = field(default_factory=FrontendSection)
    context: ContextSection = field(default_factory=ContextSection)

    def validate(self) -> "RunConfig":
        self.model.validate()
        for name in ("train", "data", "frontend", "context"):
            getattr(self, name).validate()
        if self.model.use_context and self.model.context_dim != self.context.dim:
            raise ConfigError(
                f"model.context_dim ({self.model.context_dim}) must match "
                f"context.dim ({self.context.dim})"
            )
        return self

    def to_dict(self) -> dict:
        out = {name: asdict(getattr(self, name)) for name in _SECTIONS}
        out["model"] = self.model.to_dict()
        return _tuples_to_lists(out)

    @classmethod
    def from_dict(cls, tree: dict) -> "RunConfig":
        unknown = set(tree) - set(_SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        kwargs = {}
        for name, section_cls in _SECTIONS.items():
            data = tree.get(name, {})
            if not isinstance(data, dict):
                raise ConfigError(f"section {name!r} must be a mapping")
            if section_cls is ModelConfig:
                kwargs[name] = ModelConfig.from_dict(data)
            else:
                kwargs[name] = _strict_section(section_cls, name, data)
        return cls(**kwargs).validate()


def _strict_section(section_cls, name: str, data: dict):
    known = {f.name for f in fields(section_cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in section {name!r}: {sorted(unknown)}")
    coerced = {
        k: tuple(v) if isinstance(v, list) else v for k, v in data.items()
    }
    return section_cls(**coerced)


def _tuples_to_lists(value):
    if isinstance(value, dict):
        return {k: _tuples_to_lists(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_tuples_to_lists(v) for v in value]
    return value


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def _env_overrides(environ) -> dict:
    tree: dict = {}
    for key, raw in sorted(environ.items()):
        if not key.startswith(ENV_PREFIX):
            continue
        rest = key[len(ENV_PREFIX) :]
        if "__" not in rest:
            continue
        section, _, option = rest.partition("__")
        section = section.lower()
        option = option.lower()
        if section not in _SECTIONS:
            raise ConfigError(f"environment variable {key} names unknown section")
        tree.setdefault(section, {})[option] = yaml.safe_load(raw)
    return tree


def parse_override(spec: str) -> dict:
    """'section.key=value' -> nested dict with a YAML-parsed scalar."""
    if "=" not in spec or "." not in spec.split("=", 1)[0]:
        raise ConfigError(f"override must look like section.key=value, got {spec!r}")
    dotted, raw = spec.split("=", 1)
    section, _, option = dotted.partition(".")
    return {section: {option: yaml.safe_load(raw)}}


def preset_path(name: str):
    """Filesystem path of a shipped preset config."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
    return resources.files("multivox").joinpath("configs", f"{name}.cfg")


def load_config(
    path: str | Path | None = None,
    overrides: list[str] | None = None,
    environ=None,
) -> RunConfig:
    """Merge defaults, file, environment and overrides into a RunConfig."""
    tree: dict = {}
    if path is not None:
        candidate = Path(path)
        if candidate.exists():
            text = candidate.read_text(encoding="utf-8")
        elif str(path) in PRESETS:
            text = preset_path(str(path)).read_text(encoding="utf-8")
        else:
            raise ConfigError(f"config file not found: {path}")
        loaded = yaml.safe_load(text) or {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"config root must be a mapping: {path}")
        tree = _deep_merge(tree, loaded)
    tree = _deep_merge(tree, _env_overrides(environ if environ is not None else os.environ))
    for spec in overrides or []:
        tree = _deep_merge(tree, parse_override(spec))
    return RunConfig.from_dict(tree)
