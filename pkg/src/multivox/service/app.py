"""HTTP service wrapping the synthesis stack.

The service is the long-running face of the system: load a checkpoint once,
serve many phonemize/synthesize calls. Alignment and verification endpoints
work without a loaded model; synthesis requires one (load at startup via the
MULTIVOX_CHECKPOINT environment variable or later through POST /model/load).

Domain errors surface as HTTP 4xx with a machine-readable {kind, message}
body, mirroring the CLI's stderr JSON.
"""

from __future__ import annotations

import io
import os
import wave as wave_module

import numpy as np
from fastapi import FastAPI, HTTPException, Response

from .. import __version__, align
from ..errors import MultivoxError, UsageError
from ..frontend import (
    SUPPORTED_LANGUAGES,
    make_backend,
    phonemize,
    resolve_backend,
    encode,
)
from ..pipeline import Synthesizer
from ..verify import run_suite
from . import schemas


def _wav_bytes(samples: np.ndarray, rate: int) -> bytes:
    buf = io.BytesIO()
    pcm = (np.clip(samples, -1.0, 1.0) * 32767.0).round().astype("<i2")
    with wave_module.open(buf, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(pcm.tobytes())
    return buf.getvalue()


def _http_error(err: MultivoxError) -> HTTPException:
    status = 400 if isinstance(err, UsageError) else 422
    return HTTPException(status_code=status, detail=err.to_json())


def create_app(checkpoint: str | None = None) -> FastAPI:
    app = FastAPI(title="multivox", version=__version__)
    state = {"synthesizer": None, "checkpoint": ""}

    def load(path: str) -> None:
        state["synthesizer"] = Synthesizer.from_checkpoint(path)
        state["checkpoint"] = path

    startup_path = checkpoint or os.environ.get("MULTIVOX_CHECKPOINT", "")
    if startup_path:
        load(startup_path)

    def require_model() -> Synthesizer:
        synth = state["synthesizer"]
        if synth is None:
            raise HTTPException(
                status_code=409,
                detail={"kind": "no-model", "message": "no checkpoint loaded"},
            )
        return synth

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(
            status="ok",
            version=__version__,
            model_loaded=state["synthesizer"] is not None,
        )

    @app.get("/languages", response_model=schemas.LanguagesResponse)
    def languages():
        return schemas.LanguagesResponse(
            languages=[
                schemas.LanguageInfo(
                    code=code, backend_code=resolve_backend(code).backend_code
                )
                for code in SUPPORTED_LANGUAGES
            ]
        )

    @app.post("/phonemize", response_model=schemas.PhonemizeResponse)
    def phonemize_endpoint(req: schemas.PhonemizeRequest):
        try:
            tag = resolve_backend(req.language)
            synth = state["synthesizer"]
            if synth is not None:
                backend = synth.backend
            else:
                backend = make_backend("lexicon")
            seq = phonemize(req.text, tag, backend)
            ids: list[int] = []
            unknown = 0
            if synth is not None:
                seq, unknown = encode(seq, synth.vocab)
                ids = seq.ids
            return schemas.PhonemizeResponse(
                phonemes=seq.phonemes,
                ids=ids,
                word_spans=seq.word_spans,
                backend_code=tag.backend_code,
                unknown_count=unknown,
            )
        except MultivoxError as err:
            raise _http_error(err)

    def _run_mas(item: schemas.MasItem) -> schemas.MasResponse:
        loglik = np.asarray(item.loglik, dtype=np.float64)
        path = align.mas(loglik, item.valid_p, item.valid_f)
        return schemas.MasResponse(
            assignment=[int(x) for x in path.assignment],
            durations=[int(x) for x in path.durations],
            total=path.total,
        )

    @app.post("/align/mas", response_model=schemas.MasResponse)
    def mas_endpoint(req: schemas.MasItem):
        try:
            return _run_mas(req)
        except MultivoxError as err:
            raise _http_error(err)

    @app.post("/align/mas/batch", response_model=schemas.MasBatchResponse)
    def mas_batch_endpoint(req: schemas.MasBatchRequest):
        results = []
        for index, item in enumerate(req.items):
            try:
                results.append(_run_mas(item))
            except MultivoxError as err:
                raise HTTPException(
                    status_code=422,
                    detail={
                        "kind": err.kind,
                        "message": f"item {index}: {err.message}",
                    },
                )
        return schemas.MasBatchResponse(items=results)

    @app.post("/model/load", response_model=schemas.ModelInfoResponse)
    def model_load(req: schemas.LoadModelRequest):
        try:
            load(req.checkpoint)
        except MultivoxError as err:
            raise _http_error(err)
        return model_info()

    @app.get("/model/info", response_model=schemas.ModelInfoResponse)
    def model_info():
        synth = require_model()
        return schemas.ModelInfoResponse(
            checkpoint=state["checkpoint"],
            speakers=synth.speakers,
            languages=list(SUPPORTED_LANGUAGES),
            sample_rate=synth.cfg.model.sample_rate,
            hidden_dim=synth.cfg.model.hidden_dim,
            use_context=synth.cfg.model.use_context,
            vocab_size=synth.vocab.size,
        )

    @app.post("/synthesize")
    def synthesize(req: schemas.SynthesizeRequest):
        synth = require_model()
        try:
            result = synth.synthesize(
                req.text,
                req.language,
                req.speaker,
                noise_scale=req.noise_scale,
                duration_noise_scale=req.duration_noise_scale,
                length_scale=req.length_scale,
                seed=req.seed,
            )
        except MultivoxError as err:
            raise _http_error(err)
        return Response(
            content=_wav_bytes(result.wave, result.sample_rate),
            media_type="audio/wav",
            headers={
                "X-Sample-Rate": str(result.sample_rate),
                "X-Total-Frames": str(result.total_frames),
                "X-Backend-Code": result.backend_code,
                "X-Speaker": result.speaker,
            },
        )

    @app.get("/verify/{suite}", response_model=schemas.VerifyResponse)
    def verify(suite: str, quick: bool = False):
        try:
            checks = run_suite(suite, quick=quick)
        except MultivoxError as err:
            raise _http_error(err)
        return schemas.VerifyResponse(
            suite=suite,
            passed=all(c.passed for c in checks),
            checks=[
                schemas.VerifyCheck(name=c.name, passed=c.passed, detail=c.detail)
                for c in checks
            ],
        )

    return app


app = create_app()
