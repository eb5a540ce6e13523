from .audio import (
    MEL_FLOOR,
    SpectrogramPair,
    compute_spectrograms,
    linear_spectrogram,
    mel_filterbank,
    mel_from_linear,
    mel_spectrogram,
    read_wav,
    write_wav,
)
from .batching import make_batches
from .manifest import Utterance, load_manifest, save_manifest, speaker_id_map
from .synthetic import DEFAULT_SPEAKERS, generate_synthetic_corpus

__all__ = [
    "DEFAULT_SPEAKERS",
    "MEL_FLOOR",
    "SpectrogramPair",
    "Utterance",
    "compute_spectrograms",
    "generate_synthetic_corpus",
    "linear_spectrogram",
    "load_manifest",
    "make_batches",
    "mel_filterbank",
    "mel_from_linear",
    "mel_spectrogram",
    "read_wav",
    "save_manifest",
    "speaker_id_map",
    "write_wav",
]
