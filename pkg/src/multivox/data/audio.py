"""Audio I/O and spectrogram extraction.

Convention: waveforms are padded with zeros to a hop-size multiple, then
reflect-padded by (fft - hop) / 2 on both sides and analyzed without
centering, so an utterance of N samples yields exactly ceil(N / hop)
frames. The mel banks are triangular on the HTK mel scale with area
normalization; log-mel applies a fixed floor so silence maps to
log(MEL_FLOOR) exactly.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from ..errors import AudioError, SampleRateMismatchError
from ..model.config import ModelConfig

MEL_FLOOR = 1e-5


def read_wav(path: str | Path, expected_rate: int) -> np.ndarray:
    """Load mono 16-bit PCM as float32 in [-1, 1]. No silent resampling."""
    path = Path(path)
    if not path.exists():
        raise AudioError(f"audio file not found: {path}")
    with wave.open(str(path), "rb") as wf:
        if wf.getnchannels() != 1:
            raise AudioError(f"{path} is not mono")
        if wf.getsampwidth() != 2:
            raise AudioError(f"{path} is not 16-bit PCM")
        rate = wf.getframerate()
        if rate != expected_rate:
            raise SampleRateMismatchError(
                f"{path} is {rate} Hz, config expects {expected_rate} Hz"
            )
        frames = wf.readframes(wf.getnframes())
    samples = np.frombuffer(frames, dtype="<i2").astype(np.float32) / 32768.0
    if samples.size == 0:
        raise AudioError(f"{path} contains no samples")
    return samples


def write_wav(path: str | Path, samples: np.ndarray, rate: int) -> None:
    samples = np.asarray(samples, dtype=np.float32).reshape(-1)
    pcm = (np.clip(samples, -1.0, 1.0) * 32767.0).round().astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(pcm.tobytes())


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(cfg: ModelConfig) -> np.ndarray:
    """(mel_channels, fft_size // 2 + 1) triangular weights, area-normalized."""
    fmax = cfg.mel_fmax if cfg.mel_fmax is not None else cfg.sample_rate / 2
    mel_points = np.linspace(
        _hz_to_mel(cfg.mel_fmin), _hz_to_mel(fmax), cfg.mel_channels + 2
    )
    hz_points = _mel_to_hz(mel_points)
    bin_freqs = np.linspace(0, cfg.sample_rate / 2, cfg.spec_channels)
    weights = np.zeros((cfg.mel_channels, cfg.spec_channels), dtype=np.float64)
    for m in range(cfg.mel_channels):
        lo, center, hi = hz_points[m : m + 3]
        up = (bin_freqs - lo) / max(center - lo, 1e-9)
        down = (hi - bin_freqs) / max(hi - center, 1e-9)
        weights[m] = np.maximum(0.0, np.minimum(up, down))
        weights[m] *= 2.0 / (hi - lo)
    return weights.astype(np.float32)


def _pad_to_hop(wave_t: torch.Tensor, hop: int) -> torch.Tensor:
    remainder = wave_t.shape[-1] % hop
    if remainder:
        wave_t = torch.nn.functional.pad(wave_t, (0, hop - remainder))
    return wave_t


def linear_spectrogram(
    wave_t: torch.Tensor, cfg: ModelConfig, grad_safe_eps: float = 0.0
) -> torch.Tensor:
    """Magnitude STFT, (B, spec_channels, frames) with frames = ceil(N/hop).

    ``grad_safe_eps`` keeps gradients finite at exact silence; the data
    pipeline uses 0 so silence stays exactly zero.
    """
    if wave_t.dim() == 1:
        wave_t = wave_t.unsqueeze(0)
    wave_t = _pad_to_hop(wave_t, cfg.hop_size)
    pad = (cfg.fft_size - cfg.hop_size) // 2
    wave_t = torch.nn.functional.pad(
        wave_t.unsqueeze(1), (pad, pad), mode="reflect"
    ).squeeze(1)
    window = torch.hann_window(cfg.win_size, device=wave_t.device, dtype=wave_t.dtype)
    spec = torch.stft(
        wave_t,
        n_fft=cfg.fft_size,
        hop_length=cfg.hop_size,
        win_length=cfg.win_size,
        window=window,
        center=False,
        return_complex=True,
    )
    power = spec.real.pow(2) + spec.imag.pow(2)
    return torch.sqrt(power + grad_safe_eps)


def mel_from_linear(linear: torch.Tensor, fb: torch.Tensor) -> torch.Tensor:
    mel = torch.matmul(fb, linear)
    return torch.log(torch.clamp(mel, min=MEL_FLOOR))


def mel_spectrogram(
    wave_t: torch.Tensor,
    cfg: ModelConfig,
    fb: torch.Tensor,
    grad_safe_eps: float = 0.0,
) -> torch.Tensor:
    return mel_from_linear(linear_spectrogram(wave_t, cfg, grad_safe_eps), fb)


@dataclass
class SpectrogramPair:
    """Frame-major spectrograms: linear (F, S) magnitude, mel (F, M) log."""

    linear: np.ndarray
    mel: np.ndarray

    @property
    def frame_count(self) -> int:
        return int(self.linear.shape[0])

    def validate(self) -> None:
        assert self.linear.shape[0] == self.mel.shape[0]
        assert np.all(np.isfinite(self.mel))


def compute_spectrograms(audio: np.ndarray, cfg: ModelConfig) -> SpectrogramPair:
    """Linear magnitude plus floored log-mel for one mono utterance."""
    if audio.ndim != 1 or audio.size == 0:
        raise AudioError("expected non-empty mono audio")
    with torch.no_grad():
        wave_t = torch.from_numpy(np.ascontiguousarray(audio, dtype=np.float32))
        linear = linear_spectrogram(wave_t, cfg)
        fb = torch.from_numpy(mel_filterbank(cfg))
        mel = mel_from_linear(linear, fb)
    pair = SpectrogramPair(
        linear=linear[0].transpose(0, 1).numpy(),
        mel=mel[0].transpose(0, 1).numpy(),
    )
    pair.validate()
    return pair
