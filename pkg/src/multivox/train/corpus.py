"""Prepared corpus: phonemized, encoded, feature-extracted utterances.

Spectrograms and audio load lazily with an in-memory memo and an optional
on-disk cache (one .npz per utterance inside a directory versioned by the
audio configuration), so repeated epochs over a desk corpus stay cheap.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from ..context import (
    ContextExtractorSpec,
    extract_word_features,
    make_extractor,
    replicate_to_phonemes,
)
from ..data.audio import SpectrogramPair, compute_spectrograms, read_wav
from ..data.manifest import Utterance, speaker_id_map
from ..errors import UnknownSpeakerError
from ..frontend import (
    PhonemeVocabulary,
    build_vocabulary,
    encode,
    language_id,
    make_backend,
    phonemize,
    resolve_backend,
)
from ..runconfig import RunConfig


def audio_config_key(cfg: RunConfig) -> str:
    m = cfg.model
    raw = f"{m.sample_rate}|{m.fft_size}|{m.hop_size}|{m.win_size}|{m.mel_channels}|{m.mel_fmin}|{m.mel_fmax}"
    return hashlib.sha256(raw.encode()).hexdigest()[:12]


class PreparedCorpus:
    def __init__(
        self,
        utterances: list[Utterance],
        cfg: RunConfig,
        vocab: PhonemeVocabulary | None = None,
        speaker_map: dict[str, int] | None = None,
        extractor=None,
        cache_dir: str | Path | None = None,
    ):
        self.cfg = cfg
        self.utterances = utterances
        backend = make_backend(cfg.frontend.backend)
        raw_sequences = [
            phonemize(
                u.text,
                resolve_backend(u.language),
                backend,
                insert_word_boundaries=cfg.frontend.insert_word_boundaries,
                keep_punctuation=cfg.frontend.keep_punctuation,
            )
            for u in utterances
        ]
        self.vocab = vocab if vocab is not None else build_vocabulary(raw_sequences)
        self.sequences = [encode(seq, self.vocab)[0] for seq in raw_sequences]
        self.speaker_map = (
            dict(speaker_map) if speaker_map is not None else speaker_id_map(utterances)
        )
        for u in utterances:
            if u.speaker not in self.speaker_map:
                raise UnknownSpeakerError(f"speaker {u.speaker!r} not in speaker map")
        self.speaker_ids = [self.speaker_map[u.speaker] for u in utterances]
        self.lang_ids = [language_id(u.language) for u in utterances]

        self.context: list[np.ndarray] | None = None
        if cfg.model.use_context:
            if extractor is None:
                extractor = make_extractor(
                    ContextExtractorSpec(
                        kind=cfg.context.kind,
                        dim=cfg.context.dim,
                        identifier=cfg.context.identifier,
                    )
                )
            self.context = []
            for u, seq in zip(utterances, self.sequences):
                tag = resolve_backend(u.language)
                words = extract_word_features(u.text, tag, extractor)
                self.context.append(replicate_to_phonemes(words, seq).matrix)

        self._spec_memo: dict[int, SpectrogramPair] = {}
        self._audio_memo: dict[int, np.ndarray] = {}
        self.cache_dir: Path | None = None
        if cache_dir:
            self.cache_dir = Path(cache_dir) / f"spec-{audio_config_key(cfg)}"

    def __len__(self) -> int:
        return len(self.utterances)

    @property
    def speakers(self) -> list[str]:
        """Speaker labels in ID order."""
        return [s for s, _ in sorted(self.speaker_map.items(), key=lambda kv: kv[1])]

    def audio(self, index: int) -> np.ndarray:
        """Waveform zero-padded to a hop multiple, matching the frame grid."""
        memo = self._audio_memo.get(index)
        if memo is not None:
            return memo
        hop = self.cfg.model.hop_size
        wave = read_wav(self.utterances[index].audio_path, self.cfg.model.sample_rate)
        remainder = len(wave) % hop
        if remainder:
            wave = np.pad(wave, (0, hop - remainder))
        self._audio_memo[index] = wave
        return wave

    def spectrogram(self, index: int) -> SpectrogramPair:
        memo = self._spec_memo.get(index)
        if memo is not None:
            return memo
        pair = None
        cache_file = None
        if self.cache_dir is not None:
            cache_file = self.cache_dir / f"{self.utterances[index].id}.npz"
            if cache_file.exists():
                data = np.load(cache_file)
                pair = SpectrogramPair(linear=data["linear"], mel=data["mel"])
        if pair is None:
            pair = compute_spectrograms(self.audio(index), self.cfg.model)
            if cache_file is not None:
                self.cache_dir.mkdir(parents=True, exist_ok=True)
                np.savez(cache_file, linear=pair.linear, mel=pair.mel)
        self._spec_memo[index] = pair
        return pair

    def precompute(self) -> int:
        """Fill the spectrogram cache; returns the number of utterances."""
        for i in range(len(self)):
            self.spectrogram(i)
        return len(self)

    def index_of(self, utterance: Utterance) -> int:
        return self.utterances.index(utterance)
