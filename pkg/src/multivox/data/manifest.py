"""Corpus manifests: one JSON object per line.

Fields: id, audio (path relative to the manifest), text, language, speaker
and optionally duration_sec (read from the WAV header when absent).
Speaker labels map to dense integer IDs in sorted label order, so the
mapping is reproducible from the manifest alone.
"""

from __future__ import annotations

import json
import wave
from dataclasses import dataclass
from pathlib import Path

from ..errors import ManifestError
from ..frontend import SUPPORTED_LANGUAGES

_REQUIRED = ("id", "audio", "text", "language", "speaker")


@dataclass
class Utterance:
    id: str
    audio_path: Path
    text: str
    language: str
    speaker: str
    duration_sec: float

    def validate(self) -> None:
        assert self.language in SUPPORTED_LANGUAGES
        assert self.duration_sec > 0


def load_manifest(path: str | Path, check_audio: bool = True) -> list[Utterance]:
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    utterances = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as err:
            raise ManifestError(f"{path}:{lineno}: invalid JSON ({err.msg})")
        missing = [k for k in _REQUIRED if k not in record]
        if missing:
            raise ManifestError(f"{path}:{lineno}: missing fields {missing}")
        if record["language"] not in SUPPORTED_LANGUAGES:
            raise ManifestError(
                f"{path}:{lineno}: unsupported language {record['language']!r}"
            )
        if not str(record["text"]).strip():
            raise ManifestError(f"{path}:{lineno}: empty text")
        audio_path = (path.parent / record["audio"]).resolve()
        if check_audio and not audio_path.exists():
            raise ManifestError(f"{path}:{lineno}: audio missing at {audio_path}")
        duration = record.get("duration_sec")
        if duration is None:
            if not check_audio:
                raise ManifestError(
                    f"{path}:{lineno}: duration_sec required when audio is not read"
                )
            with wave.open(str(audio_path), "rb") as wf:
                duration = wf.getnframes() / wf.getframerate()
        if duration <= 0:
            raise ManifestError(f"{path}:{lineno}: non-positive duration")
        utterances.append(
            Utterance(
                id=str(record["id"]),
                audio_path=audio_path,
                text=str(record["text"]),
                language=record["language"],
                speaker=str(record["speaker"]),
                duration_sec=float(duration),
            )
        )
    if not utterances:
        raise ManifestError(f"{path}: manifest has no records")
    return utterances


def save_manifest(path: str | Path, utterances: list[Utterance]) -> None:
    path = Path(path)
    lines = []
    for utt in utterances:
        record = {
            "id": utt.id,
            "audio": str(
                utt.audio_path.relative_to(path.parent)
                if utt.audio_path.is_absolute()
                else utt.audio_path
            ),
            "text": utt.text,
            "language": utt.language,
            "speaker": utt.speaker,
            "duration_sec": utt.duration_sec,
        }
        lines.append(json.dumps(record, ensure_ascii=False))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def speaker_id_map(utterances: list[Utterance]) -> dict[str, int]:
    """Dense speaker IDs in sorted label order."""
    labels = sorted({u.speaker for u in utterances})
    return {label: i for i, label in enumerate(labels)}
