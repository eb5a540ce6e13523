"""Word-level contextual features: extraction, replication, fusion.

Features are produced per whitespace word, replicated to phoneme length
using the frontend's word spans, and added to phoneme embeddings through a
zero-initialized projection so an untrained fusion changes nothing.

The default extractor is a deterministic stub keyed by a seed identifier;
a pretrained transformer adapter is available as an optional plugin and
mean-pools subword vectors per whitespace word.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .errors import (
    DimensionMismatchError,
    EmptyTextError,
    ExtractorUnavailableError,
    WordCountMismatchError,
)
from .frontend import LanguageTag, PhonemeSequence, segment_words


@dataclass
class ContextFeatures:
    """Feature matrix at word or phoneme granularity."""

    level: str  # "word" | "phoneme"
    matrix: np.ndarray  # rows x feature_dim, float32

    @property
    def feature_dim(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def rows(self) -> int:
        return int(self.matrix.shape[0])


@dataclass(frozen=True)
class ContextExtractorSpec:
    kind: str  # "stub" | "pretrained"
    dim: int
    identifier: str  # stub seed or pretrained model name

    def __post_init__(self):
        if self.dim <= 0:
            raise DimensionMismatchError("context feature dim must be positive")
        if self.kind not in ("stub", "pretrained"):
            raise ExtractorUnavailableError(f"unknown extractor kind {self.kind!r}")


class WordFeatureExtractor:
    def extract(self, text: str, tag: LanguageTag) -> ContextFeatures:
        raise NotImplementedError


class StubExtractor(WordFeatureExtractor):
    """Deterministic pseudo-random features for tests and desk runs.

    A word at position i contributes the unit-normalized vector drawn from
    a generator seeded by hash(identifier, position, word). Results are
    memoized per text in memory only.
    """

    def __init__(self, spec: ContextExtractorSpec):
        self.spec = spec
        self._cache: dict[str, np.ndarray] = {}

    def _word_vector(self, word: str, position: int) -> np.ndarray:
        key = f"{self.spec.identifier}|{position}|{word}".encode("utf-8")
        seed = int.from_bytes(hashlib.sha256(key).digest()[:8], "little")
        vec = np.random.default_rng(seed).standard_normal(self.spec.dim)
        return (vec / np.linalg.norm(vec)).astype(np.float32)

    def extract(self, text: str, tag: LanguageTag) -> ContextFeatures:
        cached = self._cache.get(text)
        if cached is not None:
            return ContextFeatures(level="word", matrix=cached)
        words = segment_words(text)
        if not words:
            raise EmptyTextError(f"cannot extract word features from {text!r}")
        matrix = np.stack([self._word_vector(w, i) for i, w in enumerate(words)])
        self._cache[text] = matrix
        return ContextFeatures(level="word", matrix=matrix)


class PretrainedExtractor(WordFeatureExtractor):
    """Adapter over a pretrained transformer encoder.

    Subword vectors are mean-pooled per whitespace word using the
    tokenizer's offset mapping. The model pair can be injected for tests;
    otherwise it is loaded lazily by identifier.
    """

    def __init__(self, spec: ContextExtractorSpec, tokenizer=None, model=None):
        self.spec = spec
        self._tokenizer = tokenizer
        self._model = model

    def _ensure_loaded(self):
        if self._tokenizer is not None and self._model is not None:
            return
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as err:
            raise ExtractorUnavailableError(
                f"pretrained extractor needs the transformers package: {err}"
            )
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(self.spec.identifier)
            self._model = AutoModel.from_pretrained(self.spec.identifier)
        except Exception as err:
            raise ExtractorUnavailableError(
                f"could not load pretrained model {self.spec.identifier!r}: {err}"
            )
        self._model.eval()

    def extract(self, text: str, tag: LanguageTag) -> ContextFeatures:
        self._ensure_loaded()
        words = segment_words(text)
        if not words:
            raise EmptyTextError(f"cannot extract word features from {text!r}")
        # Character spans of the whitespace words within the raw text.
        spans = []
        cursor = 0
        for word in text.split():
            start = text.index(word, cursor)
            spans.append((start, start + len(word)))
            cursor = start + len(word)

        enc = self._tokenizer(
            text, return_offsets_mapping=True, return_tensors="pt", truncation=True
        )
        offsets = enc.pop("offset_mapping")[0].tolist()
        with torch.no_grad():
            hidden = self._model(**enc).last_hidden_state[0]
        if hidden.shape[-1] != self.spec.dim:
            raise DimensionMismatchError(
                f"extractor emits dim {hidden.shape[-1]}, spec expects {self.spec.dim}"
            )

        rows = []
        for start, end in spans[: len(words)]:
            member = [
                i
                for i, (ts, te) in enumerate(offsets)
                if te > ts and ts < end and te > start
            ]
            if member:
                rows.append(hidden[member].mean(dim=0))
            else:
                rows.append(hidden.mean(dim=0))
        matrix = torch.stack(rows).cpu().numpy().astype(np.float32)
        return ContextFeatures(level="word", matrix=matrix)


def make_extractor(spec: ContextExtractorSpec) -> WordFeatureExtractor:
    if spec.kind == "stub":
        return StubExtractor(spec)
    return PretrainedExtractor(spec)


def extract_word_features(
    text: str, tag: LanguageTag, extractor: WordFeatureExtractor
) -> ContextFeatures:
    feats = extractor.extract(text, tag)
    if not np.all(np.isfinite(feats.matrix)):
        raise DimensionMismatchError("extractor produced non-finite features")
    return feats


def replicate_to_phonemes(
    words: ContextFeatures, seq: PhonemeSequence
) -> ContextFeatures:
    """Repeat each word's feature row across the phonemes of its span."""
    if words.level != "word":
        raise WordCountMismatchError("replication expects word-level features")
    if words.rows != seq.word_count:
        raise WordCountMismatchError(
            f"{words.rows} feature rows for {seq.word_count} words"
        )
    matrix = np.repeat(words.matrix, seq.span_lengths(), axis=0)
    assert matrix.shape[0] == len(seq.phonemes)
    return ContextFeatures(level="phoneme", matrix=matrix)


class ContextFusion(nn.Module):
    """Additive fusion through a zero-initialized linear projection.

    With untrained weights the output equals the phoneme embeddings
    bit for bit, so enabling fusion never perturbs a pretrained stack.
    """

    def __init__(self, context_dim: int, hidden_dim: int):
        super().__init__()
        self.proj = nn.Linear(context_dim, hidden_dim)
        nn.init.zeros_(self.proj.weight)
        nn.init.zeros_(self.proj.bias)

    def forward(self, embeddings: torch.Tensor, context: torch.Tensor) -> torch.Tensor:
        # embeddings: (..., T, H); context: (..., T, context_dim)
        if embeddings.shape[-2] != context.shape[-2]:
            raise WordCountMismatchError(
                f"context rows {context.shape[-2]} != sequence length "
                f"{embeddings.shape[-2]}"
            )
        return embeddings + self.proj(context)


def fuse(
    phoneme_embeddings: torch.Tensor,
    context: torch.Tensor | None,
    fusion: ContextFusion | None,
) -> torch.Tensor:
    """Apply fusion when enabled; identity pass-through otherwise."""
    if fusion is None or context is None:
        return phoneme_embeddings
    return fusion(phoneme_embeddings, context)
