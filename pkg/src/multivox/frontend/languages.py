"""Supported languages and phonemizer-backend routing.

The system covers a closed set of seven languages. One of them
(chhattisgarhi) has no phonemizer backend of its own and is routed through
the hindi backend, a closely related language; the alias applies to
phonemization only, never to language IDs or contextual features.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import UnsupportedLanguageError

SUPPORTED_LANGUAGES = (
    "bengali",
    "chhattisgarhi",
    "english",
    "hindi",
    "kannada",
    "marathi",
    "telugu",
)

# Languages without a backend of their own, phonemized via a relative.
BACKEND_ALIASES = {
    "chhattisgarhi": "hindi",
}


@dataclass(frozen=True)
class LanguageTag:
    """A validated language code plus the phonemizer language actually used."""

    code: str
    backend_code: str


def resolve_backend(code: str) -> LanguageTag:
    """Validate ``code`` and apply the backend alias table.

    Pure function; raises UnsupportedLanguageError for codes outside the
    supported set.
    """
    if code not in SUPPORTED_LANGUAGES:
        raise UnsupportedLanguageError(
            f"language {code!r} is not supported; expected one of "
            f"{', '.join(SUPPORTED_LANGUAGES)}"
        )
    return LanguageTag(code=code, backend_code=BACKEND_ALIASES.get(code, code))


def language_id(code: str) -> int:
    """Dense integer ID of a supported language (alphabetical order)."""
    tag = resolve_backend(code)
    return SUPPORTED_LANGUAGES.index(tag.code)
