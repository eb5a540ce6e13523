"""Text frontend: language routing, phonemization, vocabulary."""

from .backends import EspeakBackend, LexiconBackend, PhonemizerBackend, make_backend
from .languages import (
    BACKEND_ALIASES,
    SUPPORTED_LANGUAGES,
    LanguageTag,
    language_id,
    resolve_backend,
)
from .phonemize import (
    WORD_BOUNDARY_SYMBOL,
    PhonemeSequence,
    phonemize,
    segment_words,
)
from .vocabulary import (
    BOUNDARY_ID,
    PAD_ID,
    RESERVED_COUNT,
    UNKNOWN_ID,
    PhonemeVocabulary,
    build_vocabulary,
    encode,
)

__all__ = [
    "BACKEND_ALIASES",
    "BOUNDARY_ID",
    "EspeakBackend",
    "LanguageTag",
    "LexiconBackend",
    "PAD_ID",
    "PhonemeSequence",
    "PhonemeVocabulary",
    "PhonemizerBackend",
    "RESERVED_COUNT",
    "SUPPORTED_LANGUAGES",
    "UNKNOWN_ID",
    "WORD_BOUNDARY_SYMBOL",
    "build_vocabulary",
    "encode",
    "language_id",
    "make_backend",
    "phonemize",
    "resolve_backend",
    "segment_words",
]
