"""Synthetic multilingual corpus for desk-scale runs.

Each speaker gets a fixed harmonic timbre derived from a hash of the label
(fundamental plus two formant-like resonances), each utterance a short
pseudo-text sampled from the built-in lexicon of its language. Everything
is keyed off the seed, so regeneration is byte-identical. Durations scale
with phoneme count so every utterance has comfortably more frames than
phonemes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from ..frontend import BACKEND_ALIASES, SUPPORTED_LANGUAGES
from ..frontend.lexicon import LEXICONS
from .audio import write_wav

DEFAULT_SPEAKERS = tuple(f"spk{i:02d}" for i in range(14))


def _speaker_timbre(label: str) -> dict:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    return {
        "f0": float(rng.uniform(85.0, 255.0)),
        "formant1": float(rng.uniform(320.0, 900.0)),
        "formant2": float(rng.uniform(950.0, 2400.0)),
        "rhythm_hz": float(rng.uniform(2.5, 4.5)),
    }


def _render_tone(
    timbre: dict, duration_sec: float, sample_rate: int, rng: np.random.Generator
) -> np.ndarray:
    n = int(round(duration_sec * sample_rate))
    t = np.arange(n, dtype=np.float64) / sample_rate
    signal = np.zeros(n, dtype=np.float64)
    for harmonic in range(1, 5):
        freq = harmonic * timbre["f0"]
        if freq >= sample_rate / 2:
            break
        gain = (
            np.exp(-(((freq - timbre["formant1"]) / 300.0) ** 2))
            + 0.7 * np.exp(-(((freq - timbre["formant2"]) / 400.0) ** 2))
            + 0.1
        )
        phase = rng.uniform(0.0, 2 * np.pi)
        signal += gain * np.sin(2 * np.pi * freq * t + phase)
    envelope = 0.6 + 0.4 * np.sin(2 * np.pi * timbre["rhythm_hz"] * t)
    fade = np.minimum(1.0, np.minimum(t, duration_sec - t) / 0.04)
    signal *= envelope * fade
    signal += rng.normal(0.0, 0.003, n)
    peak = np.max(np.abs(signal))
    return (0.5 * signal / peak).astype(np.float32)


def generate_synthetic_corpus(
    out_dir: str | Path,
    seed: int = 1234,
    speakers: tuple[str, ...] = DEFAULT_SPEAKERS,
    languages: tuple[str, ...] = SUPPORTED_LANGUAGES,
    utterances_per_pair: int = 1,
    sample_rate: int = 16000,
    hop_size: int = 256,
) -> Path:
    """Write WAVs plus manifest.jsonl; returns the manifest path."""
    out_dir = Path(out_dir)
    wav_dir = out_dir / "wavs"
    wav_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for si, speaker in enumerate(speakers):
        timbre = _speaker_timbre(speaker)
        for li, language in enumerate(languages):
            backend_code = BACKEND_ALIASES.get(language, language)
            inventory = sorted(LEXICONS[backend_code])
            for k in range(utterances_per_pair):
                rng = np.random.default_rng([seed, si, li, k])
                n_words = int(rng.integers(2, 7))
                words = [
                    inventory[int(rng.integers(0, len(inventory)))]
                    for _ in range(n_words)
                ]
                text = " ".join(words)
                n_phonemes = sum(
                    len(LEXICONS[backend_code][w]) for w in words
                )
                duration = float(
                    np.clip(0.055 * n_phonemes + rng.uniform(0.25, 0.55), 0.5, 2.0)
                )
                min_duration = (n_phonemes + 6) * hop_size / sample_rate
                duration = max(duration, min_duration)
                samples = _render_tone(timbre, duration, sample_rate, rng)
                utt_id = f"{language}_{speaker}_{k:03d}"
                wav_path = wav_dir / f"{utt_id}.wav"
                write_wav(wav_path, samples, sample_rate)
                lines.append(
                    json.dumps(
                        {
                            "id": utt_id,
                            "audio": f"wavs/{utt_id}.wav",
                            "text": text,
                            "language": language,
                            "speaker": speaker,
                            "duration_sec": round(len(samples) / sample_rate, 6),
                        },
                        ensure_ascii=False,
                    )
                )
    manifest_path = out_dir / "manifest.jsonl"
    manifest_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest_path
