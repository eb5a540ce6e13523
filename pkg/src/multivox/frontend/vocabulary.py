"""Phoneme vocabulary: symbol/ID bijection with reserved slots."""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Iterable

from ..errors import EmptyCorpusError, ManifestError
from .phonemize import PhonemeSequence, WORD_BOUNDARY_SYMBOL

PAD_ID = 0
UNKNOWN_ID = 1
BOUNDARY_ID = 2
RESERVED_COUNT = 3

_RESERVED_NAMES = {PAD_ID: "<pad>", UNKNOWN_ID: "<unk>", BOUNDARY_ID: WORD_BOUNDARY_SYMBOL}


class PhonemeVocabulary:
    """Bijection from IPA symbols onto a contiguous ID range starting at 3."""

    def __init__(self, symbol_to_id: dict[str, int]):
        ids = sorted(symbol_to_id.values())
        if ids != list(range(RESERVED_COUNT, RESERVED_COUNT + len(ids))):
            raise ManifestError("vocabulary IDs must be contiguous from 3")
        self.symbol_to_id = dict(symbol_to_id)
        self.id_to_symbol = {i: s for s, i in symbol_to_id.items()}

    @property
    def size(self) -> int:
        """Total ID count including the reserved slots."""
        return RESERVED_COUNT + len(self.symbol_to_id)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.symbol_to_id

    def serialize(self) -> str:
        lines = [f"{_RESERVED_NAMES[i]}\t{i}" for i in range(RESERVED_COUNT)]
        for symbol, idx in sorted(self.symbol_to_id.items(), key=lambda kv: kv[1]):
            lines.append(f"{symbol}\t{idx}")
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.serialize(), encoding="utf-8")

    def content_hash(self) -> str:
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()

    @classmethod
    def from_text(cls, text: str) -> "PhonemeVocabulary":
        mapping: dict[str, int] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                symbol, idx_str = line.split("\t")
                idx = int(idx_str)
            except ValueError:
                raise ManifestError(f"vocabulary line {lineno} is malformed: {line!r}")
            if idx < RESERVED_COUNT:
                if symbol != _RESERVED_NAMES[idx]:
                    raise ManifestError(
                        f"vocabulary line {lineno}: reserved ID {idx} must be "
                        f"{_RESERVED_NAMES[idx]!r}"
                    )
                continue
            mapping[symbol] = idx
        return cls(mapping)

    @classmethod
    def load(cls, path: str | Path) -> "PhonemeVocabulary":
        path = Path(path)
        if not path.exists():
            raise ManifestError(f"vocabulary file not found: {path}")
        return cls.from_text(path.read_text(encoding="utf-8"))


def build_vocabulary(sequences: Iterable[PhonemeSequence]) -> PhonemeVocabulary:
    """Collect every symbol in the corpus into a reproducible mapping.

    IDs are assigned in sorted symbol order, so rebuilding from the same
    corpus always yields the identical vocabulary.
    """
    symbols: set[str] = set()
    count = 0
    for seq in sequences:
        count += 1
        symbols.update(s for s in seq.phonemes if s != WORD_BOUNDARY_SYMBOL)
    if count == 0 or not symbols:
        raise EmptyCorpusError("cannot build a vocabulary from an empty corpus")
    mapping = {s: RESERVED_COUNT + i for i, s in enumerate(sorted(symbols))}
    return PhonemeVocabulary(mapping)


def encode(
    seq: PhonemeSequence, vocab: PhonemeVocabulary
) -> tuple[PhonemeSequence, int]:
    """Populate vocabulary IDs; unknown symbols map to the reserved ID.

    Returns the encoded sequence and the unknown-symbol tally. Length is
    always preserved and real symbols never receive the pad ID.
    """
    ids = []
    unknown = 0
    for symbol in seq.phonemes:
        if symbol == WORD_BOUNDARY_SYMBOL:
            ids.append(BOUNDARY_ID)
        elif symbol in vocab.symbol_to_id:
            ids.append(vocab.symbol_to_id[symbol])
        else:
            ids.append(UNKNOWN_ID)
            unknown += 1
    encoded = PhonemeSequence(
        phonemes=list(seq.phonemes), word_spans=list(seq.word_spans), ids=ids
    )
    encoded.validate()
    return encoded, unknown
