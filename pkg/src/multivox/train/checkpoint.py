"""Checkpoint archive: one ZIP with numpy payloads and a JSON manifest.

The format is deliberately deterministic: entries are stored uncompressed
in sorted name order with a fixed timestamp, JSON is written with sorted
keys, arrays in .npy form. Saving, loading and saving again therefore
yields a byte-identical file. Writes go to a temp file in the target
directory followed by an atomic rename.

Layout:
    meta.json                iteration, run config, vocab hash, speakers
    vocab.txt                the phoneme vocabulary the model was built on
    model/<param>.npy        generator state dict
    disc/<param>.npy         discriminator state dict
    opt_g.json, opt_d.json   optimizer param groups and state scaffolding
    opt_g/<i>/<k>.npy        per-parameter optimizer tensors
    rng/<stream>.npy         torch global and trainer generator states
"""

from __future__ import annotations

import io
import json
import os
import tempfile
import zipfile
from pathlib import Path

import numpy as np
import torch

from ..errors import CheckpointError

_FIXED_DATE = (1980, 1, 1, 0, 0, 0)
FORMAT_VERSION = 1


def _npy_bytes(array: np.ndarray) -> bytes:
    buf = io.BytesIO()
    np.save(buf, array, allow_pickle=False)
    return buf.getvalue()


def _tensor_entries(prefix: str, state_dict: dict) -> dict[str, bytes]:
    entries = {}
    for key, tensor in state_dict.items():
        entries[f"{prefix}/{key}.npy"] = _npy_bytes(tensor.detach().cpu().numpy())
    return entries


def _optimizer_entries(prefix: str, opt_state: dict) -> tuple[dict[str, bytes], dict]:
    entries = {}
    scaffold = {"param_groups": opt_state["param_groups"], "state_keys": {}}
    for idx, slots in opt_state["state"].items():
        names = []
        for name, value in slots.items():
            names.append(name)
            tensor = value if torch.is_tensor(value) else torch.tensor(value)
            entries[f"{prefix}/{idx}/{name}.npy"] = _npy_bytes(
                tensor.detach().cpu().numpy()
            )
        scaffold["state_keys"][str(idx)] = sorted(names)
    return entries, scaffold


def save_checkpoint(
    path: str | Path,
    *,
    iteration: int,
    run_config: dict,
    vocab_text: str,
    vocab_hash: str,
    speakers: list[str],
    model_state: dict,
    disc_state: dict,
    opt_g_state: dict,
    opt_d_state: dict,
    rng_states: dict[str, torch.Tensor],
) -> None:
    path = Path(path)
    entries: dict[str, bytes] = {}
    entries.update(_tensor_entries("model", model_state))
    entries.update(_tensor_entries("disc", disc_state))
    opt_g_entries, opt_g_meta = _optimizer_entries("opt_g", opt_g_state)
    opt_d_entries, opt_d_meta = _optimizer_entries("opt_d", opt_d_state)
    entries.update(opt_g_entries)
    entries.update(opt_d_entries)
    entries["opt_g.json"] = json.dumps(opt_g_meta, sort_keys=True).encode()
    entries["opt_d.json"] = json.dumps(opt_d_meta, sort_keys=True).encode()
    for name, state in rng_states.items():
        entries[f"rng/{name}.npy"] = _npy_bytes(state.cpu().numpy())
    entries["vocab.txt"] = vocab_text.encode("utf-8")
    entries["meta.json"] = json.dumps(
        {
            "format": FORMAT_VERSION,
            "iteration": iteration,
            "run_config": run_config,
            "vocab_sha256": vocab_hash,
            "speakers": speakers,
        },
        sort_keys=True,
    ).encode()

    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            with zipfile.ZipFile(fh, "w", compression=zipfile.ZIP_STORED) as zf:
                for name in sorted(entries):
                    info = zipfile.ZipInfo(name, date_time=_FIXED_DATE)
                    zf.writestr(info, entries[name])
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def load_checkpoint(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        with zipfile.ZipFile(path, "r") as zf:
            names = set(zf.namelist())
            meta = json.loads(zf.read("meta.json"))
            if meta.get("format") != FORMAT_VERSION:
                raise CheckpointError(
                    f"unsupported checkpoint format {meta.get('format')!r}"
                )
            vocab_text = zf.read("vocab.txt").decode("utf-8")

            def read_array(name):
                return np.load(io.BytesIO(zf.read(name)), allow_pickle=False)

            def read_tree(prefix):
                state = {}
                for name in names:
                    if name.startswith(prefix + "/") and name.endswith(".npy"):
                        key = name[len(prefix) + 1 : -4]
                        state[key] = torch.from_numpy(read_array(name).copy())
                return state

            def read_optimizer(prefix):
                scaffold = json.loads(zf.read(f"{prefix}.json"))
                state = {}
                for idx, keys in scaffold["state_keys"].items():
                    slots = {}
                    for key in keys:
                        arr = read_array(f"{prefix}/{idx}/{key}.npy")
                        slots[key] = torch.from_numpy(arr.copy())
                    state[int(idx)] = slots
                return {"param_groups": scaffold["param_groups"], "state": state}

            rng_states = {}
            for name in names:
                if name.startswith("rng/"):
                    arr = read_array(name)
                    rng_states[name[4:-4]] = torch.from_numpy(arr.copy())

            return {
                "iteration": meta["iteration"],
                "run_config": meta["run_config"],
                "vocab_sha256": meta["vocab_sha256"],
                "speakers": meta["speakers"],
                "vocab_text": vocab_text,
                "model_state": read_tree("model"),
                "disc_state": read_tree("disc"),
                "opt_g_state": read_optimizer("opt_g"),
                "opt_d_state": read_optimizer("opt_d"),
                "rng_states": rng_states,
            }
    except (zipfile.BadZipFile, KeyError, json.JSONDecodeError) as err:
        raise CheckpointError(f"cannot read checkpoint {path}: {err}")
