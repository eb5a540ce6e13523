"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with the measured value against its frozen tolerance."""

import json
import subprocess
import sys
import time
import wave

import numpy as np
import pytest

from conftest import tiny_run_config
from multivox.data import generate_synthetic_corpus, load_manifest
from multivox.frontend import SUPPORTED_LANGUAGES
from multivox.pipeline import Synthesizer
from multivox.runconfig import load_config
from multivox.train.checkpoint import load_checkpoint
from multivox.train.corpus import PreparedCorpus
from multivox.train.loop import Trainer, finetune
from multivox.verify import (
    verify_flow,
    verify_fusion,
    verify_gradients,
    verify_mas,
    verify_mas_shift,
    verify_padding,
    verify_replication,
)

CLI = [sys.executable, "-m", "multivox.cli"]


def _report(name: str, passed: bool, detail: str):
    print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    assert passed, f"{name}: {detail}"


def _checks_pass(name, checks, extra=""):
    ok = all(c.passed for c in checks)
    detail = "; ".join(c.detail for c in checks)
    if extra:
        detail = f"{detail}; {extra}"
    _report(name, ok, detail)


def test_criterion_mas_oracle_equivalence():
    start = time.monotonic()
    checks = verify_mas(seeds=100, max_p=5, max_f=8)
    elapsed = time.monotonic() - start
    ok = all(c.passed for c in checks) and elapsed < 10.0
    _report(
        "mas-oracle-equivalence",
        ok,
        f"{checks[0].detail}; {elapsed:.2f}s (< 10 s)",
    )


def test_criterion_mas_shift_invariance():
    _checks_pass("mas-shift-invariance", verify_mas_shift(seeds=100))


def test_criterion_flow_invertibility():
    start = time.monotonic()
    checks = verify_flow(n=100, frames=40, channels=16)
    elapsed = time.monotonic() - start
    ok = all(c.passed for c in checks) and elapsed < 30.0
    _report(
        "flow-invertibility",
        ok,
        f"{checks[0].detail}; {elapsed:.2f}s (< 30 s)",
    )


def test_criterion_replication_exactness():
    _checks_pass("replication-exactness", verify_replication(cases=1000))


def test_criterion_fusion_identity():
    _checks_pass("fusion-identity", verify_fusion())


def test_criterion_conditioning_liveness(small_utterances, tmp_path):
    # The bundled small corpus is exactly 2 languages x 2 speakers.
    cfg = tiny_run_config()
    cfg.train.batch_size = len(small_utterances)
    corpus = PreparedCorpus(small_utterances, cfg)
    trainer = Trainer(cfg, corpus, tmp_path)
    batch = trainer._batch_at(0)
    trainer.train_step(batch)
    lang_grad = trainer.model.lang_emb.weight.grad
    spk_grad = trainer.model.spk_emb.weight.grad
    present_langs = set(batch.lang_ids.tolist())
    present_spks = set(batch.spk_ids.tolist())
    ok = True
    for row in range(lang_grad.shape[0]):
        ok &= (float(lang_grad[row].abs().max()) > 0) == (row in present_langs)
    for row in range(spk_grad.shape[0]):
        ok &= (float(spk_grad[row].abs().max()) > 0) == (row in present_spks)
    _report(
        "conditioning-liveness",
        ok,
        f"languages {sorted(present_langs)} and speakers {sorted(present_spks)} "
        "are exactly the rows with nonzero gradients",
    )


def test_criterion_gradient_check():
    _checks_pass("gradient-check", verify_gradients(n_probe=16))


def test_criterion_padding_invariance():
    _checks_pass("padding-invariance", verify_padding())


@pytest.mark.slow
def test_criterion_overfit_smoke(tmp_path):
    start = time.monotonic()
    corpus_dir = tmp_path / "corpus"
    generate_synthetic_corpus(
        corpus_dir,
        seed=17,
        speakers=("spk00", "spk01"),
        languages=("english", "hindi"),
    )
    utterances = load_manifest(corpus_dir / "manifest.jsonl")[:4]
    cfg = load_config("desk")
    assert cfg.model.hidden_dim == 64
    cfg.train.max_iterations = 300
    cfg.train.checkpoint_interval = 0
    cfg.train.log_interval = 100
    corpus = PreparedCorpus(utterances, cfg)
    trainer = Trainer(cfg, corpus, tmp_path / "run")
    reports = trainer.train()
    elapsed = time.monotonic() - start
    mel10 = [r.mel for r in reports if r.iteration == 10][0]
    mel300 = [r.mel for r in reports if r.iteration == 300][0]
    ok = mel300 <= 0.5 * mel10 and elapsed < 600
    _report(
        "overfit-smoke",
        ok,
        f"mel@10 = {mel10:.3f}, mel@300 = {mel300:.3f} "
        f"(ratio {mel300 / mel10:.2f} <= 0.50), {elapsed:.0f}s (< 600 s)",
    )


@pytest.mark.slow
def test_criterion_finetune_contract(tmp_path):
    # Base model over the full 14-speaker, 7-language corpus.
    base_dir = tmp_path / "base_corpus"
    generate_synthetic_corpus(base_dir, seed=23)
    base_utts = load_manifest(base_dir / "manifest.jsonl")
    cfg = tiny_run_config()
    cfg.train.max_iterations = 1
    corpus = PreparedCorpus(base_utts, cfg)
    trainer = Trainer(cfg, corpus, tmp_path / "base_run")
    trainer.train()
    base_ckpt = tmp_path / "base_run" / "checkpoint_latest.ckpt"
    assert len(corpus.speakers) == 14

    # Nine cloning targets with few-shot data in one language each.
    target_labels = tuple(f"tgt{i:02d}" for i in range(9))
    tgt_dir = tmp_path / "tgt_corpus"
    generate_synthetic_corpus(
        tgt_dir, seed=29, speakers=target_labels, languages=("marathi",)
    )
    final = finetune(
        base_ckpt,
        load_manifest(tgt_dir / "manifest.jsonl"),
        tmp_path / "ft_run",
        max_iterations=2,
    )
    payload = load_checkpoint(final)
    rows = payload["model_state"]["spk_emb.weight"].shape[0]
    table_ok = rows == 23 and len(payload["speakers"]) == 23

    synth = Synthesizer.from_checkpoint(final)
    synth_ok = True
    cgh_routed = False
    for label in target_labels:
        for language in SUPPORTED_LANGUAGES:
            result = synth.synthesize(
                "pani suraj",
                language,
                label,
                noise_scale=0.0,
                duration_noise_scale=0.0,
            )
            synth_ok &= len(result.wave) == result.total_frames * 64
            if language == "chhattisgarhi":
                cgh_routed |= result.backend_code == "hindi"
    _report(
        "finetune-contract",
        table_ok and synth_ok and cgh_routed,
        f"speaker table 14 -> {rows} rows; synthesized 9 targets x 7 languages; "
        f"chhattisgarhi routed via hindi: {cgh_routed}",
    )


@pytest.mark.slow
def test_criterion_end_to_end_cli(tmp_path):
    def one_run(root):
        root.mkdir()
        corpus = root / "corpus"
        run = subprocess.run
        proc = run(
            [*CLI, "make-corpus", "--out", str(corpus), "--seed", "77",
             "--speakers", "2"],
            capture_output=True, text=True, timeout=600,
        )
        assert proc.returncode == 0, proc.stderr
        proc = run(
            [*CLI, "prepare", "--config", "desk",
             "--manifest", str(corpus / "manifest.jsonl"),
             "--cache-dir", str(root / "cache")],
            capture_output=True, text=True, timeout=600,
        )
        assert proc.returncode == 0, proc.stderr
        assert json.loads(proc.stdout)["errors"] == 0
        proc = run(
            [*CLI, "train", "--config", "desk",
             "--manifest", str(corpus / "manifest.jsonl"),
             "--workdir", str(root / "run"),
             "--iterations", "50", "--seed", "11"],
            capture_output=True, text=True, timeout=600,
        )
        assert proc.returncode == 0, proc.stderr
        out_wav = root / "out.wav"
        proc = run(
            [*CLI, "synth",
             "--checkpoint", str(root / "run" / "checkpoint_latest.ckpt"),
             "--text", "hello water sun",
             "--lang", "english", "--speaker", "spk01",
             "--out", str(out_wav),
             "--noise-scale", "0", "--duration-noise-scale", "0"],
            capture_output=True, text=True, timeout=600,
        )
        assert proc.returncode == 0, proc.stderr
        return out_wav.read_bytes(), proc.stdout

    bytes_a, stdout_a = one_run(tmp_path / "a")
    bytes_b, _ = one_run(tmp_path / "b")

    with wave.open(str(tmp_path / "a" / "out.wav"), "rb") as wf:
        n = wf.getnframes()
        pcm = np.frombuffer(wf.readframes(n), dtype="<i2").astype(np.float64)
    rms = float(np.sqrt(np.mean((pcm / 32768.0) ** 2)))
    frames_reported = int(stdout_a.split("(")[1].split(" frames")[0])
    count_ok = n == frames_reported * 256
    _report(
        "end-to-end-cli",
        count_ok and rms > 0 and bytes_a == bytes_b,
        f"{n} samples == {frames_reported} frames x 256, RMS {rms:.4f} > 0, "
        f"two seeded runs byte-identical: {bytes_a == bytes_b}",
    )
