"""Text to phoneme sequences with exact word-span bookkeeping."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

from ..errors import EmptyTextError
from .backends import PhonemizerBackend
from .languages import LanguageTag

# Structural token optionally inserted between words; encoded to the
# reserved boundary ID, never part of the learned symbol inventory.
WORD_BOUNDARY_SYMBOL = "<wb>"


@dataclass
class PhonemeSequence:
    """IPA symbols, their vocabulary IDs and per-word span bookkeeping.

    ``word_spans`` partitions ``phonemes`` exactly: entry i is
    ``(word_index, span_length)`` with word indices contiguous from 0.
    ``ids`` stays empty until the sequence is encoded against a vocabulary.
    """

    phonemes: list[str]
    word_spans: list[tuple[int, int]]
    ids: list[int] = field(default_factory=list)

    def validate(self) -> None:
        assert len(self.phonemes) > 0
        assert sum(n for _, n in self.word_spans) == len(self.phonemes)
        assert [w for w, _ in self.word_spans] == list(range(len(self.word_spans)))
        assert all(n >= 1 for _, n in self.word_spans)
        if self.ids:
            assert len(self.ids) == len(self.phonemes)

    @property
    def word_count(self) -> int:
        return len(self.word_spans)

    def span_lengths(self) -> list[int]:
        return [n for _, n in self.word_spans]


def segment_words(text: str, keep_punctuation: bool = False) -> list[str]:
    """Whitespace word segmentation shared by phonemization and the
    contextual extractor, so word counts agree by construction.

    Punctuation is stripped after segmentation; words reduced to nothing
    are dropped.
    """
    words = []
    for token in unicodedata.normalize("NFC", text).split():
        if not keep_punctuation:
            token = "".join(
                ch for ch in token if not unicodedata.category(ch).startswith("P")
            )
        if token:
            words.append(token)
    return words


def phonemize(
    text: str,
    tag: LanguageTag,
    backend: PhonemizerBackend,
    insert_word_boundaries: bool = False,
    keep_punctuation: bool = False,
) -> PhonemeSequence:
    """Convert text to a PhonemeSequence via per-word backend calls.

    Per-word phonemization keeps the word spans exact. A trailing boundary
    token, when enabled, is attached to the preceding word's span.
    """
    words = segment_words(text, keep_punctuation=keep_punctuation)
    if not words:
        raise EmptyTextError(
            f"no words left after normalization of {text!r} "
            f"(language {tag.code})"
        )
    phonemes: list[str] = []
    spans: list[tuple[int, int]] = []
    for index, word in enumerate(words):
        symbols = backend.phonemize_word(word, tag.backend_code)
        length = len(symbols)
        phonemes.extend(symbols)
        if insert_word_boundaries and index < len(words) - 1:
            phonemes.append(WORD_BOUNDARY_SYMBOL)
            length += 1
        spans.append((index, length))
    seq = PhonemeSequence(phonemes=phonemes, word_spans=spans)
    seq.validate()
    return seq
