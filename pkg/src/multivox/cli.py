"""Command-line interface.

One command per process. Human-readable text goes to stdout; errors are
emitted as one JSON object {kind, message} on stderr. Exit codes: 0 ok,
2 domain error, 64 usage error, 70 internal error.

The synth and phonemize commands can also act as thin clients of a running
service instance via --server.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import (
    EXIT_INTERNAL,
    EXIT_OK,
    EXIT_USAGE,
    MultivoxError,
    UsageError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multivox", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phonemize", help="convert text to IPA phonemes")
    p.add_argument("--lang", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--json", action="store_true", dest="as_json")
    p.add_argument("--vocab", help="vocabulary file for ID output")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--server", help="route through a running service")
    p.set_defaults(func=cmd_phonemize)

    p = sub.add_parser("make-corpus", help="generate the synthetic desk corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--speakers", type=int, default=14)
    p.add_argument("--speaker-prefix", default="spk")
    p.add_argument("--utterances-per-pair", type=int, default=1)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_make_corpus)

    p = sub.add_parser("prepare", help="validate a manifest and cache spectrograms")
    p.add_argument("--config", default=None)
    p.add_argument("--manifest", default=None)
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--set", action="append", default=[], dest="overrides")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="pretrain on a multilingual corpus")
    p.add_argument("--config", default=None)
    p.add_argument("--manifest", default=None)
    p.add_argument("--workdir", required=True)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--resume", default=None, help="checkpoint to continue from")
    p.add_argument("--set", action="append", default=[], dest="overrides")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("finetune", help="few-shot fine-tune for new speakers")
    p.add_argument("--base-checkpoint", required=True)
    p.add_argument("--manifest", required=True, help="few-shot target data")
    p.add_argument("--workdir", required=True)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--targets", default=None, help="comma-separated speaker labels")
    p.add_argument("--replay-manifest", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("synth", help="synthesize speech from a checkpoint")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--text", required=True)
    p.add_argument("--lang", required=True)
    p.add_argument("--speaker", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--noise-scale", type=float, default=None)
    p.add_argument("--duration-noise-scale", type=float, default=None)
    p.add_argument("--length-scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--config", default=None)
    p.add_argument("--server", help="route through a running service")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("suite", help="mas|shift|flow|replication|fusion|padding|gradients|all")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--seeds", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def _load_cfg(args, overrides=None):
    from .runconfig import load_config

    specs = list(getattr(args, "overrides", []) or [])
    if overrides:
        specs.extend(overrides)
    if getattr(args, "seed", None) is not None:
        specs.append(f"train.seed={args.seed}")
    return load_config(args.config, specs)


# -- commands ----------------------------------------------------------------


def cmd_phonemize(args) -> int:
    if args.server:
        import httpx

        resp = httpx.post(
            f"{args.server}/phonemize",
            json={"text": args.text, "language": args.lang},
            timeout=60,
        )
        if resp.status_code != 200:
            detail = resp.json().get("detail", {})
            raise MultivoxError(detail.get("message", resp.text))
        record = resp.json()
    else:
        from .frontend import (
            PhonemeVocabulary,
            encode,
            make_backend,
            phonemize,
            resolve_backend,
        )

        cfg = _load_cfg(args)
        tag = resolve_backend(args.lang)
        seq = phonemize(
            args.text,
            tag,
            make_backend(cfg.frontend.backend),
            insert_word_boundaries=cfg.frontend.insert_word_boundaries,
            keep_punctuation=cfg.frontend.keep_punctuation,
        )
        unknown = 0
        if args.vocab:
            seq, unknown = encode(seq, PhonemeVocabulary.load(args.vocab))
        record = {
            "phonemes": seq.phonemes,
            "ids": seq.ids,
            "word_spans": seq.word_spans,
            "backend_code": tag.backend_code,
            "unknown_count": unknown,
        }
    if args.as_json:
        print(json.dumps(record, ensure_ascii=False))
    else:
        print(" ".join(record["phonemes"]))
    return EXIT_OK


def cmd_make_corpus(args) -> int:
    from .data import generate_synthetic_corpus

    speakers = tuple(f"{args.speaker_prefix}{i:02d}" for i in range(args.speakers))
    manifest = generate_synthetic_corpus(
        args.out,
        seed=args.seed,
        speakers=speakers,
        utterances_per_pair=args.utterances_per_pair,
    )
    print(f"wrote {manifest}")
    return EXIT_OK


def cmd_prepare(args) -> int:
    from .data import load_manifest
    from .train.corpus import PreparedCorpus

    cfg = _load_cfg(args)
    manifest = args.manifest or cfg.data.manifest
    if not manifest:
        raise UsageError("prepare needs --manifest or data.manifest in the config")
    cache_dir = args.cache_dir or cfg.data.cache_dir or None
    utterances = load_manifest(manifest)
    errors = 0
    corpus = PreparedCorpus(utterances, cfg, cache_dir=cache_dir)
    corpus.precompute()
    report = {
        "utterances": len(utterances),
        "errors": errors,
        "languages": sorted({u.language for u in utterances}),
        "speakers": len({u.speaker for u in utterances}),
        "cache_dir": str(corpus.cache_dir) if corpus.cache_dir else None,
        "vocab_size": corpus.vocab.size,
    }
    print(json.dumps(report))
    return EXIT_OK


def cmd_train(args) -> int:
    from .data import load_manifest
    from .train.corpus import PreparedCorpus
    from .train.loop import Trainer, resume

    if args.resume:
        cfg_iters = args.iterations
        manifest = args.manifest
        if not manifest:
            raise UsageError("train --resume needs --manifest")
        trainer = resume(args.resume, load_manifest(manifest), args.workdir)
        trainer.train(cfg_iters or trainer.cfg.train.max_iterations)
    else:
        cfg = _load_cfg(args)
        if args.iterations is not None:
            cfg.train.max_iterations = args.iterations
        manifest = args.manifest or cfg.data.manifest
        if not manifest:
            raise UsageError("train needs --manifest or data.manifest in the config")
        utterances = load_manifest(manifest)
        corpus = PreparedCorpus(
            utterances, cfg, cache_dir=cfg.data.cache_dir or None
        )
        trainer = Trainer(cfg, corpus, args.workdir)
        trainer.train()
    final = Path(args.workdir) / "checkpoint_latest.ckpt"
    print(f"checkpoint: {final}")
    return EXIT_OK


def cmd_finetune(args) -> int:
    from .data import load_manifest
    from .train.loop import finetune

    targets = args.targets.split(",") if args.targets else None
    replay = load_manifest(args.replay_manifest) if args.replay_manifest else None
    final = finetune(
        args.base_checkpoint,
        load_manifest(args.manifest),
        args.workdir,
        max_iterations=args.iterations,
        target_speakers=targets,
        replay_utterances=replay,
        use_replay=True if replay is not None else None,
        seed=args.seed,
    )
    print(f"checkpoint: {final}")
    return EXIT_OK


def cmd_synth(args) -> int:
    out = Path(args.out)
    if args.server:
        import httpx

        payload = {
            "text": args.text,
            "language": args.lang,
            "speaker": args.speaker,
            "length_scale": args.length_scale,
            "seed": args.seed,
        }
        if args.noise_scale is not None:
            payload["noise_scale"] = args.noise_scale
        if args.duration_noise_scale is not None:
            payload["duration_noise_scale"] = args.duration_noise_scale
        resp = httpx.post(f"{args.server}/synthesize", json=payload, timeout=300)
        if resp.status_code != 200:
            detail = resp.json().get("detail", {})
            err = MultivoxError(detail.get("message", resp.text))
            err.kind = detail.get("kind", "error")
            raise err
        out.write_bytes(resp.content)
        backend_code = resp.headers.get("X-Backend-Code", args.lang)
        if backend_code != args.lang:
            print(f"language {args.lang} routed through {backend_code} phonemizer")
        print(f"wrote {out}")
        return EXIT_OK

    if not args.checkpoint:
        raise UsageError("synth needs --checkpoint (or --server)")
    from .data.audio import write_wav
    from .pipeline import Synthesizer

    synth = Synthesizer.from_checkpoint(args.checkpoint)
    result = synth.synthesize(
        args.text,
        args.lang,
        args.speaker,
        noise_scale=args.noise_scale,
        duration_noise_scale=args.duration_noise_scale,
        length_scale=args.length_scale,
        seed=args.seed,
    )
    write_wav(out, result.wave, result.sample_rate)
    if result.backend_code != result.language:
        print(f"language {result.language} routed through {result.backend_code} phonemizer")
    print(
        f"wrote {out}: {len(result.wave)} samples at {result.sample_rate} Hz "
        f"({result.total_frames} frames, speaker {result.speaker})"
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite, verify_mas

    if args.suite == "mas" and args.seeds:
        checks = verify_mas(seeds=args.seeds)
    else:
        checks = run_suite(args.suite, quick=args.quick)
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status} {check.name}: {check.detail}")
    return EXIT_OK if all(c.passed for c in checks) else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    app = create_app(checkpoint=args.checkpoint)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as err:
        print(json.dumps(err.to_json()), file=sys.stderr)
        return EXIT_USAGE
    except MultivoxError as err:
        print(json.dumps(err.to_json()), file=sys.stderr)
        return err.exit_code
    except KeyboardInterrupt:
        return EXIT_INTERNAL
    except Exception as err:  # pragma: no cover - last resort
        print(
            json.dumps({"kind": "internal", "message": f"{type(err).__name__}: {err}"}),
            file=sys.stderr,
        )
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
