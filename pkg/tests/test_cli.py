import json
import subprocess
import sys
import wave

CLI = [sys.executable, "-m", "multivox.cli"]


def run_cli(*args, **kw):
    return subprocess.run(
        [*CLI, *args], capture_output=True, text=True, timeout=600, **kw
    )


class TestPhonemizeCommand:
    def test_plain_output(self):
        proc = run_cli("phonemize", "--lang", "english", "--text", "hello")
        assert proc.returncode == 0
        assert proc.stdout.strip() == "h ə l oʊ"

    def test_json_output(self):
        proc = run_cli("phonemize", "--lang", "english", "--text", "hello water", "--json")
        record = json.loads(proc.stdout)
        assert record["word_spans"] == [[0, 4], [1, 4]]
        assert record["backend_code"] == "english"

    def test_chhattisgarhi_routing_visible(self):
        proc = run_cli(
            "phonemize", "--lang", "chhattisgarhi", "--text", "pani", "--json"
        )
        assert json.loads(proc.stdout)["backend_code"] == "hindi"

    def test_unsupported_language_exit_2(self):
        proc = run_cli("phonemize", "--lang", "french", "--text", "bonjour")
        assert proc.returncode == 2
        err = json.loads(proc.stderr)
        assert err["kind"] == "unsupported-language"


class TestVerifyCommand:
    def test_replication_quick_passes(self):
        proc = run_cli("verify", "replication", "--quick")
        assert proc.returncode == 0
        assert "PASS" in proc.stdout

    def test_unknown_suite_usage_error(self):
        proc = run_cli("verify", "nosuch")
        assert proc.returncode == 64
        assert json.loads(proc.stderr)["kind"] == "usage"


class TestUsageErrors:
    def test_finetune_without_base_checkpoint(self):
        proc = run_cli("finetune", "--manifest", "x.jsonl", "--workdir", "w")
        assert proc.returncode == 64

    def test_no_command(self):
        proc = run_cli()
        assert proc.returncode == 64


class TestSynthCommand:
    def test_synthesizes_wav(self, mini_checkpoint, tmp_path):
        out = tmp_path / "out.wav"
        proc = run_cli(
            "synth",
            "--checkpoint", str(mini_checkpoint),
            "--text", "hello water",
            "--lang", "english",
            "--speaker", "spk00",
            "--out", str(out),
            "--noise-scale", "0",
            "--duration-noise-scale", "0",
        )
        assert proc.returncode == 0, proc.stderr
        with wave.open(str(out), "rb") as wf:
            assert wf.getframerate() == 16000
            assert wf.getnframes() > 0
            # Sample count is frames x hop.
            assert wf.getnframes() % 64 == 0

    def test_unknown_speaker_kind(self, mini_checkpoint, tmp_path):
        proc = run_cli(
            "synth",
            "--checkpoint", str(mini_checkpoint),
            "--text", "hello",
            "--lang", "english",
            "--speaker", "nobody",
            "--out", str(tmp_path / "x.wav"),
        )
        assert proc.returncode == 2
        assert json.loads(proc.stderr)["kind"] == "unknown-speaker"

    def test_chhattisgarhi_logs_route(self, mini_checkpoint, tmp_path):
        proc = run_cli(
            "synth",
            "--checkpoint", str(mini_checkpoint),
            "--text", "pani",
            "--lang", "chhattisgarhi",
            "--speaker", "spk00",
            "--out", str(tmp_path / "c.wav"),
            "--noise-scale", "0",
            "--duration-noise-scale", "0",
        )
        assert proc.returncode == 0, proc.stderr
        assert "hindi" in proc.stdout


class TestPrepareCommand:
    def test_reports_zero_errors(self, small_corpus_dir, tmp_path):
        proc = run_cli(
            "prepare",
            "--config", "desk",
            "--manifest", str(small_corpus_dir / "manifest.jsonl"),
            "--cache-dir", str(tmp_path / "cache"),
        )
        assert proc.returncode == 0, proc.stderr
        report = json.loads(proc.stdout)
        assert report["errors"] == 0
        assert report["utterances"] == 8
        cache = tmp_path / "cache"
        assert any(cache.rglob("*.npz"))


class TestTrainCommand:
    def test_writes_checkpoint_and_log(self, small_corpus_dir, tmp_path):
        workdir = tmp_path / "run"
        proc = run_cli(
            "train",
            "--config", "desk",
            "--manifest", str(small_corpus_dir / "manifest.jsonl"),
            "--workdir", str(workdir),
            "--iterations", "3",
            "--seed", "5",
        )
        assert proc.returncode == 0, proc.stderr
        assert (workdir / "checkpoint_latest.ckpt").exists()
        lines = (workdir / "train_log.jsonl").read_text().strip().splitlines()
        assert len(lines) == 3
        for line in lines:
            json.loads(line)


def test_verify_mas_seeds_flag():
    proc = run_cli("verify", "mas", "--seeds", "10")
    assert proc.returncode == 0
    assert "10/10" in proc.stdout
