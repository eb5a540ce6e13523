"""End-to-end synthesis: text -> phonemes -> context -> model -> waveform.

A Synthesizer owns everything inference needs (frontend backend, optional
context extractor, vocabulary, model weights) and is reconstructable from a
checkpoint alone. Parameters are read-shared; concurrent synthesize calls
are safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .context import (
    ContextExtractorSpec,
    extract_word_features,
    make_extractor,
    replicate_to_phonemes,
)
from .errors import UnknownSpeakerError
from .frontend import (
    PhonemeVocabulary,
    encode,
    language_id,
    make_backend,
    phonemize,
    resolve_backend,
)
from .model import SynthesisModel
from .runconfig import RunConfig
from .train.checkpoint import load_checkpoint


@dataclass
class SynthesisResult:
    wave: np.ndarray  # float32 samples in [-1, 1]
    sample_rate: int
    durations: list[int]  # frames per phoneme
    phonemes: list[str]
    language: str
    backend_code: str
    speaker: str
    unknown_symbols: int

    @property
    def total_frames(self) -> int:
        return int(sum(self.durations))


class Synthesizer:
    def __init__(
        self,
        cfg: RunConfig,
        model: SynthesisModel,
        vocab: PhonemeVocabulary,
        speakers: list[str],
        extractor=None,
    ):
        self.cfg = cfg
        self.model = model
        self.model.eval()
        self.vocab = vocab
        self.speakers = list(speakers)
        self.backend = make_backend(cfg.frontend.backend)
        self.extractor = extractor
        if cfg.model.use_context and self.extractor is None:
            self.extractor = make_extractor(
                ContextExtractorSpec(
                    kind=cfg.context.kind,
                    dim=cfg.context.dim,
                    identifier=cfg.context.identifier,
                )
            )

    @classmethod
    def from_checkpoint(cls, path: str | Path) -> "Synthesizer":
        payload = load_checkpoint(path)
        cfg = RunConfig.from_dict(payload["run_config"])
        vocab = PhonemeVocabulary.from_text(payload["vocab_text"])
        model = SynthesisModel(cfg.model, vocab.size)
        model.load_state_dict(payload["model_state"])
        return cls(cfg, model, vocab, payload["speakers"])

    def speaker_id(self, speaker: str | int) -> int:
        if isinstance(speaker, int) or (isinstance(speaker, str) and speaker.isdigit()):
            idx = int(speaker)
            if 0 <= idx < len(self.speakers):
                return idx
            raise UnknownSpeakerError(
                f"speaker index {idx} out of range (have {len(self.speakers)})"
            )
        try:
            return self.speakers.index(speaker)
        except ValueError:
            raise UnknownSpeakerError(
                f"unknown speaker {speaker!r}; known: {', '.join(self.speakers)}"
            )

    def synthesize(
        self,
        text: str,
        language: str,
        speaker: str | int,
        noise_scale: float | None = None,
        duration_noise_scale: float | None = None,
        length_scale: float = 1.0,
        seed: int = 1234,
    ) -> SynthesisResult:
        """Cross-lingual by construction: any (language, speaker) pair is
        accepted regardless of the speaker's own data."""
        cfg = self.cfg.model
        if noise_scale is None:
            noise_scale = cfg.noise_scale
        if duration_noise_scale is None:
            duration_noise_scale = cfg.duration_noise_scale
        tag = resolve_backend(language)
        spk_id = self.speaker_id(speaker)
        seq = phonemize(
            text,
            tag,
            self.backend,
            insert_word_boundaries=self.cfg.frontend.insert_word_boundaries,
            keep_punctuation=self.cfg.frontend.keep_punctuation,
        )
        encoded, unknown = encode(seq, self.vocab)

        context_t = None
        if cfg.use_context:
            words = extract_word_features(text, tag, self.extractor)
            phoneme_feats = replicate_to_phonemes(words, encoded)
            context_t = torch.from_numpy(phoneme_feats.matrix).unsqueeze(0)

        ids = torch.tensor(encoded.ids, dtype=torch.long).unsqueeze(0)
        lengths = torch.tensor([ids.shape[1]], dtype=torch.long)
        lang = torch.tensor([language_id(language)], dtype=torch.long)
        spk = torch.tensor([spk_id], dtype=torch.long)
        generator = None
        if noise_scale > 0 or duration_noise_scale > 0:
            generator = torch.Generator()
            generator.manual_seed(seed)
        with torch.no_grad():
            wave, durations, _ = self.model.infer(
                ids,
                lengths,
                context_t,
                lang,
                spk,
                noise_scale=noise_scale,
                duration_noise_scale=duration_noise_scale,
                length_scale=length_scale,
                generator=generator,
            )
        return SynthesisResult(
            wave=wave[0, 0].numpy(),
            sample_rate=cfg.sample_rate,
            durations=[int(d) for d in durations[0]],
            phonemes=list(encoded.phonemes),
            language=language,
            backend_code=tag.backend_code,
            speaker=self.speakers[spk_id],
            unknown_symbols=unknown,
        )
