"""Request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str
    model_loaded: bool


class LanguageInfo(BaseModel):
    code: str
    backend_code: str


class LanguagesResponse(BaseModel):
    languages: list[LanguageInfo]


class PhonemizeRequest(BaseModel):
    text: str
    language: str


class PhonemizeResponse(BaseModel):
    phonemes: list[str]
    ids: list[int]
    word_spans: list[tuple[int, int]]
    backend_code: str
    unknown_count: int


class MasItem(BaseModel):
    loglik: list[list[float]] = Field(description="phonemes x frames log-likelihoods")
    valid_p: int | None = None
    valid_f: int | None = None


class MasResponse(BaseModel):
    assignment: list[int]
    durations: list[int]
    total: float


class MasBatchRequest(BaseModel):
    items: list[MasItem]


class MasBatchResponse(BaseModel):
    items: list[MasResponse]


class LoadModelRequest(BaseModel):
    checkpoint: str


class ModelInfoResponse(BaseModel):
    checkpoint: str
    speakers: list[str]
    languages: list[str]
    sample_rate: int
    hidden_dim: int
    use_context: bool
    vocab_size: int


class SynthesizeRequest(BaseModel):
    text: str
    language: str
    speaker: str
    noise_scale: float | None = None
    duration_noise_scale: float | None = None
    length_scale: float = 1.0
    seed: int = 1234


class VerifyCheck(BaseModel):
    name: str
    passed: bool
    detail: str


class VerifyResponse(BaseModel):
    suite: str
    passed: bool
    checks: list[VerifyCheck]


class ErrorBody(BaseModel):
    kind: str
    message: str
