"""Phonemizer backends behind a single per-word interface.

Two implementations ship:

* ``LexiconBackend``: built-in inventories plus letter fallback. Fully
  deterministic, no external processes; the default for tests and the
  bundled synthetic corpus.
* ``EspeakBackend``: adapter around an espeak-compatible executable,
  invoked word by word so word spans stay exact. Access to the subprocess
  is serialized per instance.
"""

from __future__ import annotations

import re
import shutil
import subprocess
import threading

from ..errors import BackendFailureError, UnsupportedLanguageError
from . import lexicon

# Voice names used by espeak-compatible tools for the backend languages.
ESPEAK_VOICES = {
    "bengali": "bn",
    "english": "en-us",
    "hindi": "hi",
    "kannada": "kn",
    "marathi": "mr",
    "telugu": "te",
}

_STRESS_MARKS = "ˈˌ"
# (en-us) style annotations and zero-width junk some espeak builds emit.
_JUNK_RE = re.compile(r"\([^)]*\)|[​-‏⁠﻿]")


class PhonemizerBackend:
    """Per-word phonemization interface."""

    name = "abstract"

    def supports(self, backend_code: str) -> bool:
        raise NotImplementedError

    def phonemize_word(self, word: str, backend_code: str) -> list[str]:
        """Return the IPA symbols of one word. Never returns an empty list."""
        raise NotImplementedError


class LexiconBackend(PhonemizerBackend):
    name = "lexicon"

    def supports(self, backend_code: str) -> bool:
        return backend_code in lexicon.LEXICONS

    def phonemize_word(self, word: str, backend_code: str) -> list[str]:
        if not self.supports(backend_code):
            raise UnsupportedLanguageError(
                f"lexicon backend has no inventory for {backend_code!r}"
            )
        return list(lexicon.lookup(word, backend_code))


class EspeakBackend(PhonemizerBackend):
    """Adapter invoking an external espeak-compatible executable.

    Uses ``--ipa=3`` so phonemes arrive underscore-separated, then strips
    stress marks and annotation junk. One subprocess call per word.
    """

    name = "espeak"

    def __init__(self, executable: str | None = None):
        self.executable = executable or self._find_executable()
        self._lock = threading.Lock()

    @staticmethod
    def _find_executable() -> str | None:
        for candidate in ("espeak-ng", "espeak"):
            path = shutil.which(candidate)
            if path:
                return path
        return None

    @property
    def available(self) -> bool:
        return self.executable is not None

    def supports(self, backend_code: str) -> bool:
        return self.available and backend_code in ESPEAK_VOICES

    def phonemize_word(self, word: str, backend_code: str) -> list[str]:
        if not self.available:
            raise BackendFailureError(self.name, word, "no espeak executable found")
        voice = ESPEAK_VOICES.get(backend_code)
        if voice is None:
            raise UnsupportedLanguageError(
                f"espeak backend has no voice for {backend_code!r}"
            )
        with self._lock:
            proc = subprocess.run(
                [self.executable, "-q", "--ipa=3", "-v", voice, word],
                capture_output=True,
                text=True,
            )
        if proc.returncode != 0:
            raise BackendFailureError(self.name, word, proc.stderr.strip())
        symbols = _parse_ipa(proc.stdout)
        if not symbols:
            raise BackendFailureError(self.name, word, "empty phonemization")
        return symbols


def _parse_ipa(raw: str) -> list[str]:
    text = _JUNK_RE.sub("", raw)
    for mark in _STRESS_MARKS:
        text = text.replace(mark, "")
    symbols = []
    for chunk in text.replace("\n", " ").split():
        symbols.extend(s for s in chunk.split("_") if s)
    return symbols


def make_backend(name: str) -> PhonemizerBackend:
    if name == "lexicon":
        return LexiconBackend()
    if name == "espeak":
        return EspeakBackend()
    raise UnsupportedLanguageError(f"unknown phonemizer backend {name!r}")
