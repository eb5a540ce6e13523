"""CLI-as-thin-client against a live service instance."""

import json
import subprocess
import sys
import time
import wave

import httpx
import pytest

PORT = 8911
BASE = f"http://127.0.0.1:{PORT}"


@pytest.fixture(scope="module")
def live_server(mini_checkpoint):
    proc = subprocess.Popen(
        [
            sys.executable, "-m", "multivox.cli", "serve",
            "--port", str(PORT), "--checkpoint", str(mini_checkpoint),
        ],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    deadline = time.monotonic() + 90
    while time.monotonic() < deadline:
        try:
            if httpx.get(f"{BASE}/health", timeout=2).status_code == 200:
                break
        except httpx.HTTPError:
            time.sleep(0.5)
    else:
        proc.terminate()
        pytest.fail("service did not start")
    yield BASE
    proc.terminate()
    proc.wait(timeout=10)


def test_phonemize_via_server(live_server):
    proc = subprocess.run(
        [
            sys.executable, "-m", "multivox.cli", "phonemize",
            "--lang", "english", "--text", "hello",
            "--server", live_server, "--json",
        ],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    record = json.loads(proc.stdout)
    assert record["phonemes"] == ["h", "ə", "l", "oʊ"]
    assert record["ids"]  # model loaded, so ids come back


def test_synth_via_server(live_server, tmp_path):
    out = tmp_path / "remote.wav"
    proc = subprocess.run(
        [
            sys.executable, "-m", "multivox.cli", "synth",
            "--text", "hello water", "--lang", "english",
            "--speaker", "spk00", "--out", str(out),
            "--noise-scale", "0", "--duration-noise-scale", "0",
            "--server", live_server,
        ],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    with wave.open(str(out), "rb") as wf:
        assert wf.getnframes() > 0
        assert wf.getframerate() == 16000


def test_synth_error_propagates_kind(live_server, tmp_path):
    proc = subprocess.run(
        [
            sys.executable, "-m", "multivox.cli", "synth",
            "--text", "x", "--lang", "english",
            "--speaker", "nobody", "--out", str(tmp_path / "x.wav"),
            "--server", live_server,
        ],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 2
    assert json.loads(proc.stderr)["kind"] == "unknown-speaker"
