"""Model hyperparameters. All audio and architecture constants live here."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from ..errors import ConfigError
from ..frontend import SUPPORTED_LANGUAGES


@dataclass
class ModelConfig:
    n_languages: int = 7
    n_speakers: int = 14
    hidden_dim: int = 192
    filter_dim: int = 768
    n_heads: int = 2
    n_encoder_blocks: int = 6
    encoder_kernel_size: int = 3
    dropout: float = 0.1

    flow_layers: int = 4  # must be even so flips compose to identity
    flow_wn_layers: int = 4
    flow_kernel_size: int = 5
    posterior_wn_layers: int = 8
    posterior_kernel_size: int = 5
    duration_flow_layers: int = 4
    duration_filter_dim: int = 64

    mel_channels: int = 80
    sample_rate: int = 16000
    fft_size: int = 1024
    hop_size: int = 256
    win_size: int = 1024
    mel_fmin: float = 0.0
    mel_fmax: float | None = None

    upsample_rates: tuple[int, ...] = (8, 8, 4)
    upsample_kernel_sizes: tuple[int, ...] = (16, 16, 8)
    upsample_initial_channel: int = 128
    resblock_kernel_sizes: tuple[int, ...] = (3, 7)
    resblock_dilations: tuple[tuple[int, ...], ...] = ((1, 3), (1, 3))
    disc_scales: int = 3
    disc_layers: int = 4
    disc_channels: int = 16

    use_context: bool = False
    context_dim: int = 8

    logvar_min: float = -9.0
    logvar_max: float = 4.0

    # Inference defaults; backbone-family conventions, tunable per call.
    noise_scale: float = 0.667
    duration_noise_scale: float = 0.8

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.n_languages != len(SUPPORTED_LANGUAGES):
            raise ConfigError(
                f"n_languages must be {len(SUPPORTED_LANGUAGES)}, got {self.n_languages}"
            )
        positive = (
            "n_speakers", "hidden_dim", "filter_dim", "n_heads",
            "n_encoder_blocks", "flow_layers", "flow_wn_layers",
            "posterior_wn_layers", "duration_flow_layers", "duration_filter_dim",
            "mel_channels", "sample_rate", "fft_size", "hop_size", "win_size",
            "upsample_initial_channel", "disc_scales", "disc_layers",
            "disc_channels", "context_dim",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.hidden_dim % 2 != 0:
            raise ConfigError("hidden_dim must be even (coupling splits it in half)")
        if self.hidden_dim % self.n_heads != 0:
            raise ConfigError("hidden_dim must be divisible by n_heads")
        if self.flow_layers % 2 != 0:
            raise ConfigError("flow_layers must be even")
        if math.prod(self.upsample_rates) != self.hop_size:
            raise ConfigError(
                f"upsample rates {self.upsample_rates} must multiply to "
                f"hop_size {self.hop_size}"
            )
        if len(self.upsample_rates) != len(self.upsample_kernel_sizes):
            raise ConfigError("upsample rates and kernel sizes differ in length")
        if len(self.resblock_kernel_sizes) != len(self.resblock_dilations):
            raise ConfigError("resblock kernels and dilations differ in length")
        if self.win_size > self.fft_size:
            raise ConfigError("win_size cannot exceed fft_size")
        if self.logvar_min >= self.logvar_max:
            raise ConfigError("logvar clamp bounds are inverted")

    @property
    def spec_channels(self) -> int:
        return self.fft_size // 2 + 1

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = _tuple_to_list(value)
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        kwargs = {}
        for f in fields(cls):
            if f.name not in data:
                continue
            value = data[f.name]
            if isinstance(value, list):
                value = _list_to_tuple(value)
            kwargs[f.name] = value
        return cls(**kwargs)


def _tuple_to_list(value):
    return [_tuple_to_list(v) if isinstance(v, tuple) else v for v in value]


def _list_to_tuple(value):
    return tuple(_list_to_tuple(v) if isinstance(v, list) else v for v in value)
