"""Training: alternating discriminator/generator steps, checkpointing,
bit-exact resume, and the pretrain -> few-shot fine-tune regime.

Every random draw a step consumes comes either from the trainer's own
generator (posterior noise, duration noise, segment starts) or from the
torch global stream (dropout); both states live in the checkpoint, and
batch composition is a pure function of (seed, epoch), so restoring a
checkpoint continues the exact run.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .. import align
from ..data.audio import mel_filterbank, mel_spectrogram
from ..data.batching import make_batches
from ..errors import (
    CheckpointError,
    EmptyCorpusError,
    MissingSpeakerDataError,
    NonFiniteError,
)
from ..frontend import PhonemeVocabulary
from ..model import SynthesisModel, build_discriminator, expand_by_durations
from ..runconfig import RunConfig
from .checkpoint import load_checkpoint, save_checkpoint
from .corpus import PreparedCorpus
from .losses import (
    LossReport,
    LossWeights,
    discriminator_loss,
    duration_loss,
    feature_matching_loss,
    generator_adversarial_loss,
    kl_divergence,
    mel_loss,
)

_LOG2PI = math.log(2 * math.pi)


@dataclass
class Batch:
    ids: torch.Tensor  # (B, P) int64
    p_lengths: torch.Tensor  # (B,)
    context: torch.Tensor | None  # (B, P, D)
    lang_ids: torch.Tensor  # (B,)
    spk_ids: torch.Tensor  # (B,)
    spec: torch.Tensor  # (B, S, F)
    f_lengths: torch.Tensor  # (B,)
    audio: torch.Tensor  # (B, F * hop)


def collate(corpus: PreparedCorpus, indices: list[int]) -> Batch:
    cfg = corpus.cfg.model
    seqs = [corpus.sequences[i] for i in indices]
    p_lengths = torch.tensor([len(s.ids) for s in seqs], dtype=torch.long)
    p_max = int(p_lengths.max())
    ids = torch.zeros(len(indices), p_max, dtype=torch.long)
    for row, seq in enumerate(seqs):
        ids[row, : len(seq.ids)] = torch.tensor(seq.ids, dtype=torch.long)

    context = None
    if corpus.context is not None:
        context = torch.zeros(len(indices), p_max, corpus.cfg.context.dim)
        for row, i in enumerate(indices):
            feats = torch.from_numpy(corpus.context[i])
            context[row, : feats.shape[0]] = feats

    pairs = [corpus.spectrogram(i) for i in indices]
    f_lengths = torch.tensor([p.frame_count for p in pairs], dtype=torch.long)
    f_max = int(f_lengths.max())
    spec = torch.zeros(len(indices), cfg.spec_channels, f_max)
    audio = torch.zeros(len(indices), f_max * cfg.hop_size)
    for row, (i, pair) in enumerate(zip(indices, pairs)):
        spec[row, :, : pair.frame_count] = torch.from_numpy(pair.linear.T.copy())
        wave = torch.from_numpy(corpus.audio(i))
        audio[row, : wave.shape[0]] = wave

    return Batch(
        ids=ids,
        p_lengths=p_lengths,
        context=context,
        lang_ids=torch.tensor([corpus.lang_ids[i] for i in indices], dtype=torch.long),
        spk_ids=torch.tensor([corpus.speaker_ids[i] for i in indices], dtype=torch.long),
        spec=spec,
        f_lengths=f_lengths,
        audio=audio,
    )


def alignment_loglik(z_p, mu_p, logvar_p):
    """(B, P, F) per-cell Gaussian log-likelihood of each frame under each
    phoneme's prior, computed without gradients for the alignment search."""
    with torch.no_grad():
        prec = torch.exp(-logvar_p)  # (B, H, P)
        part_const = torch.sum(-0.5 * _LOG2PI - 0.5 * logvar_p, dim=1, keepdim=True)
        part_zsq = torch.matmul(-0.5 * (z_p**2).transpose(1, 2), prec)
        part_cross = torch.matmul(z_p.transpose(1, 2), mu_p * prec)
        part_musq = torch.sum(-0.5 * (mu_p**2) * prec, dim=1, keepdim=True)
        neg_cent = part_const + part_zsq + part_cross + part_musq  # (B, F, P)
        return neg_cent.transpose(1, 2).contiguous()


class Trainer:
    def __init__(
        self,
        cfg: RunConfig,
        corpus: PreparedCorpus,
        workdir: str | Path,
        log_name: str = "train_log.jsonl",
        n_speaker_rows: int | None = None,
    ):
        if len(corpus) == 0:
            raise EmptyCorpusError("training corpus is empty")
        self.cfg = cfg
        self.corpus = corpus
        self.workdir = Path(workdir)
        self.workdir.mkdir(parents=True, exist_ok=True)
        self.log_path = self.workdir / log_name

        # The speaker table is sized by the corpus (one row per labeled
        # speaker) so checkpointed labels and embedding rows stay aligned;
        # fine-tuning pins the base row count before extending.
        rows = n_speaker_rows if n_speaker_rows is not None else len(corpus.speaker_map)
        if cfg.model.n_speakers != rows:
            cfg.model.n_speakers = rows

        torch.manual_seed(cfg.train.seed)
        self.model = SynthesisModel(cfg.model, corpus.vocab.size)
        self.disc = build_discriminator(cfg.model)
        self.gen = torch.Generator()
        self.gen.manual_seed(cfg.train.seed + 1)
        self.fb = torch.from_numpy(mel_filterbank(cfg.model))
        self.weights = LossWeights(
            mel=cfg.train.mel_weight,
            kl=cfg.train.kl_weight,
            duration=cfg.train.duration_weight,
            adversarial=cfg.train.adversarial_weight,
            feature_matching=cfg.train.feature_matching_weight,
        )
        self.iteration = 0
        self._make_optimizers()

    def _make_optimizers(self):
        t = self.cfg.train
        self.opt_g = torch.optim.AdamW(
            self.model.parameters(),
            lr=t.learning_rate,
            betas=tuple(t.adam_betas),
            eps=t.adam_eps,
            weight_decay=t.weight_decay,
        )
        self.opt_d = torch.optim.AdamW(
            self.disc.parameters(),
            lr=t.learning_rate,
            betas=tuple(t.adam_betas),
            eps=t.adam_eps,
            weight_decay=t.weight_decay,
        )

    # -- schedule -----------------------------------------------------------

    def _apply_lr(self):
        lr = self.cfg.train.learning_rate * (self.cfg.train.lr_decay**self.iteration)
        for opt in (self.opt_g, self.opt_d):
            for group in opt.param_groups:
                group["lr"] = lr

    def _batches_per_epoch(self) -> int:
        return math.ceil(len(self.corpus) / self.cfg.train.batch_size)

    def _batch_at(self, position: int) -> Batch:
        bpe = self._batches_per_epoch()
        epoch, index = divmod(position, bpe)
        batches = make_batches(
            self.corpus.utterances,
            self.cfg.train.batch_size,
            self.cfg.train.seed,
            epoch=epoch,
        )
        indices = [self.corpus.index_of(u) for u in batches[index]]
        return collate(self.corpus, indices)

    # -- single step --------------------------------------------------------

    def _generator_forward(self, batch: Batch):
        cfg = self.cfg
        model = self.model
        mu_p, logvar_p, hidden, p_mask = model.encode_text(
            batch.ids, batch.p_lengths, batch.context, batch.lang_ids, batch.spk_ids
        )
        z_q, mu_q, logvar_q, eps_q, f_mask = model.encode_posterior(
            batch.spec, batch.f_lengths, batch.spk_ids, generator=self.gen
        )
        z_p = model.flow_forward(z_q, f_mask, batch.spk_ids)

        loglik = alignment_loglik(z_p, mu_p, logvar_p).numpy().astype(np.float64)
        durations = torch.zeros_like(batch.ids)
        for b in range(loglik.shape[0]):
            path = align.mas(
                loglik[b], int(batch.p_lengths[b]), int(batch.f_lengths[b])
            )
            durations[b, : path.durations.shape[0]] = torch.from_numpy(path.durations)

        nll = model.duration_nll(
            hidden, p_mask, durations, batch.lang_ids, batch.spk_ids, generator=self.gen
        )
        dur = duration_loss(nll, p_mask)

        mu_f, logvar_f, _ = expand_by_durations(
            mu_p, logvar_p, durations, batch.f_lengths
        )
        kl = kl_divergence(z_p, logvar_q, mu_f, logvar_f, eps_q, f_mask)

        seg = min(cfg.train.segment_frames, int(batch.f_lengths.min()))
        hop = cfg.model.hop_size
        starts = torch.stack(
            [
                torch.randint(
                    0, int(batch.f_lengths[b]) - seg + 1, (1,), generator=self.gen
                )[0]
                for b in range(batch.ids.shape[0])
            ]
        )
        z_seg = torch.stack(
            [z_q[b, :, starts[b] : starts[b] + seg] for b in range(z_q.shape[0])]
        )
        y_seg = torch.stack(
            [
                batch.audio[b, starts[b] * hop : (starts[b] + seg) * hop]
                for b in range(z_q.shape[0])
            ]
        ).unsqueeze(1)
        y_hat = self.model.decode_waveform(z_seg, batch.spk_ids)
        return y_seg, y_hat, kl, dur

    def train_step(self, batch: Batch) -> LossReport:
        t_start = time.perf_counter()
        self._apply_lr()
        self.model.train()
        self.disc.train()

        y_seg, y_hat, kl, dur = self._generator_forward(batch)

        real_scores, _ = self.disc(y_seg)
        fake_scores_d, _ = self.disc(y_hat.detach())
        loss_d = discriminator_loss(real_scores, fake_scores_d)
        if not torch.isfinite(loss_d):
            raise NonFiniteError("discriminator loss is non-finite")
        self.opt_d.zero_grad()
        loss_d.backward()
        self.opt_d.step()

        real_scores2, real_fmaps = self.disc(y_seg)
        fake_scores, fake_fmaps = self.disc(y_hat)
        with torch.no_grad():
            mel_real = mel_spectrogram(y_seg.squeeze(1), self.cfg.model, self.fb)
        mel_fake = mel_spectrogram(
            y_hat.squeeze(1), self.cfg.model, self.fb, grad_safe_eps=1e-9
        )
        loss_mel = mel_loss(mel_fake, mel_real)
        loss_adv = generator_adversarial_loss(fake_scores)
        loss_fm = feature_matching_loss(real_fmaps, fake_fmaps)
        w = self.weights
        loss_g = (
            w.mel * loss_mel
            + w.kl * kl
            + w.duration * dur
            + w.adversarial * loss_adv
            + w.feature_matching * loss_fm
        )
        if not torch.isfinite(loss_g):
            raise NonFiniteError("generator loss is non-finite")
        self.opt_g.zero_grad()
        loss_g.backward()
        self.opt_g.step()

        self.iteration += 1
        report = LossReport(
            iteration=self.iteration,
            total=float(loss_g.detach()),
            mel=float(loss_mel.detach()),
            kl=float(kl.detach()),
            duration=float(dur.detach()),
            adversarial_g=float(loss_adv.detach()),
            adversarial_d=float(loss_d.detach()),
            feature_matching=float(loss_fm.detach()),
            wall_time=time.perf_counter() - t_start,
        )
        report.validate(self.weights)
        return report

    # -- full runs -----------------------------------------------------------

    def train(self, max_iterations: int | None = None) -> list[LossReport]:
        """Advance to ``max_iterations`` total steps, appending one JSON
        report line per iteration and checkpointing at the configured
        interval. On a non-finite loss the current state is saved under
        abort.ckpt and the error re-raised."""
        target = max_iterations or self.cfg.train.max_iterations
        accum = max(1, self.cfg.train.grad_accumulation)
        reports = []
        with self.log_path.open("a", encoding="utf-8") as log:
            while self.iteration < target:
                position = self.iteration * accum
                try:
                    if accum == 1:
                        report = self.train_step(self._batch_at(position))
                    else:
                        report = self._accumulated_step(position, accum)
                except NonFiniteError:
                    self.save(self.workdir / "abort.ckpt")
                    raise
                reports.append(report)
                log.write(report.to_json() + "\n")
                if self.iteration % self.cfg.train.log_interval == 0:
                    print(
                        f"iter {report.iteration}: total={report.total:.3f} "
                        f"mel={report.mel:.3f} kl={report.kl:.3f} "
                        f"dur={report.duration:.3f}",
                        flush=True,
                    )
                if (
                    self.cfg.train.checkpoint_interval > 0
                    and self.iteration % self.cfg.train.checkpoint_interval == 0
                ):
                    self.save(self.workdir / f"checkpoint_{self.iteration:06d}.ckpt")
                    self.save(self.workdir / "checkpoint_latest.ckpt")
        self.save(self.workdir / "checkpoint_latest.ckpt")
        return reports

    def _accumulated_step(self, position: int, accum: int) -> LossReport:
        """Gradient accumulation over consecutive micro-batches."""
        t_start = time.perf_counter()
        self._apply_lr()
        self.model.train()
        self.disc.train()
        micro = [self._batch_at(position + j) for j in range(accum)]

        forwards = [self._generator_forward(b) for b in micro]
        self.opt_d.zero_grad()
        loss_d_total = 0.0
        for y_seg, y_hat, _, _ in forwards:
            real_scores, _ = self.disc(y_seg)
            fake_scores, _ = self.disc(y_hat.detach())
            loss_d = discriminator_loss(real_scores, fake_scores) / accum
            loss_d.backward()
            loss_d_total += float(loss_d.detach())
        self.opt_d.step()

        self.opt_g.zero_grad()
        sums = {"mel": 0.0, "kl": 0.0, "dur": 0.0, "adv": 0.0, "fm": 0.0, "total": 0.0}
        w = self.weights
        for y_seg, y_hat, kl, dur in forwards:
            _, real_fmaps = self.disc(y_seg)
            fake_scores, fake_fmaps = self.disc(y_hat)
            with torch.no_grad():
                mel_real = mel_spectrogram(y_seg.squeeze(1), self.cfg.model, self.fb)
            mel_fake = mel_spectrogram(
                y_hat.squeeze(1), self.cfg.model, self.fb, grad_safe_eps=1e-9
            )
            loss_mel = mel_loss(mel_fake, mel_real)
            loss_adv = generator_adversarial_loss(fake_scores)
            loss_fm = feature_matching_loss(real_fmaps, fake_fmaps)
            loss_g = (
                w.mel * loss_mel
                + w.kl * kl
                + w.duration * dur
                + w.adversarial * loss_adv
                + w.feature_matching * loss_fm
            ) / accum
            if not torch.isfinite(loss_g):
                raise NonFiniteError("generator loss is non-finite")
            loss_g.backward()
            sums["mel"] += float(loss_mel.detach()) / accum
            sums["kl"] += float(kl.detach()) / accum
            sums["dur"] += float(dur.detach()) / accum
            sums["adv"] += float(loss_adv.detach()) / accum
            sums["fm"] += float(loss_fm.detach()) / accum
            sums["total"] += float(loss_g.detach())
        self.opt_g.step()

        self.iteration += 1
        report = LossReport(
            iteration=self.iteration,
            total=sums["total"],
            mel=sums["mel"],
            kl=sums["kl"],
            duration=sums["dur"],
            adversarial_g=sums["adv"],
            adversarial_d=loss_d_total,
            feature_matching=sums["fm"],
            wall_time=time.perf_counter() - t_start,
        )
        report.validate(self.weights)
        return report

    # -- persistence ---------------------------------------------------------

    def save(self, path: str | Path) -> None:
        save_checkpoint(
            path,
            iteration=self.iteration,
            run_config=self.cfg.to_dict(),
            vocab_text=self.corpus.vocab.serialize(),
            vocab_hash=self.corpus.vocab.content_hash(),
            speakers=self.corpus.speakers,
            model_state=self.model.state_dict(),
            disc_state=self.disc.state_dict(),
            opt_g_state=self.opt_g.state_dict(),
            opt_d_state=self.opt_d.state_dict(),
            rng_states={
                "torch_global": torch.get_rng_state(),
                "trainer": self.gen.get_state(),
            },
        )

    def restore(self, payload: dict) -> None:
        """Resume an interrupted run: parameters, optimizers, RNG streams."""
        if payload["vocab_sha256"] != self.corpus.vocab.content_hash():
            raise CheckpointError("checkpoint vocabulary differs from corpus vocabulary")
        if payload["run_config"]["model"] != self.cfg.to_dict()["model"]:
            raise CheckpointError("checkpoint model config differs from run config")
        self.model.load_state_dict(payload["model_state"])
        self.disc.load_state_dict(payload["disc_state"])
        self.opt_g.load_state_dict(payload["opt_g_state"])
        self.opt_d.load_state_dict(payload["opt_d_state"])
        torch.set_rng_state(payload["rng_states"]["torch_global"].to(torch.uint8))
        self.gen.set_state(payload["rng_states"]["trainer"].to(torch.uint8))
        self.iteration = payload["iteration"]

    def load_parameters(self, payload: dict) -> None:
        """Warm-start from a base checkpoint (fine-tuning): parameters only."""
        self.model.load_state_dict(payload["model_state"])
        self.disc.load_state_dict(payload["disc_state"])


def pretrain(cfg: RunConfig, corpus: PreparedCorpus, workdir: str | Path) -> Path:
    """Train from scratch; returns the final checkpoint path."""
    present = {u.language for u in corpus.utterances}
    if not present:
        raise EmptyCorpusError("pretraining corpus has no utterances")
    trainer = Trainer(cfg, corpus, workdir)
    trainer.train()
    return Path(workdir) / "checkpoint_latest.ckpt"


def resume(checkpoint_path: str | Path, manifest_utterances, workdir: str | Path) -> Trainer:
    """Rebuild a trainer from a checkpoint, bit-exactly continuing its run."""
    payload = load_checkpoint(checkpoint_path)
    cfg = RunConfig.from_dict(payload["run_config"])
    vocab = PhonemeVocabulary.from_text(payload["vocab_text"])
    speaker_map = {label: i for i, label in enumerate(payload["speakers"])}
    corpus = PreparedCorpus(manifest_utterances, cfg, vocab=vocab, speaker_map=speaker_map)
    trainer = Trainer(cfg, corpus, workdir)
    trainer.restore(payload)
    return trainer


def finetune(
    base_checkpoint: str | Path,
    fewshot_utterances,
    workdir: str | Path,
    max_iterations: int | None = None,
    target_speakers: list[str] | None = None,
    replay_utterances=None,
    use_replay: bool | None = None,
    seed: int | None = None,
) -> Path:
    """Few-shot voice cloning: extend the speaker table and fine-tune all
    weights on the target data. Returns the final checkpoint path.

    Every declared target speaker must have at least one utterance. The
    language table is left untouched, so any target speaker can synthesize
    any supported language afterwards.
    """
    payload = load_checkpoint(base_checkpoint)
    cfg = RunConfig.from_dict(payload["run_config"])
    if max_iterations is not None:
        cfg.train.max_iterations = max_iterations
    if seed is not None:
        cfg.train.seed = seed
    vocab = PhonemeVocabulary.from_text(payload["vocab_text"])
    base_speakers = list(payload["speakers"])

    fewshot = list(fewshot_utterances)
    if use_replay is not None:
        cfg.train.replay_base_speakers = use_replay
    if cfg.train.replay_base_speakers and replay_utterances:
        fewshot.extend(replay_utterances)
    present = {u.speaker for u in fewshot}
    new_labels = (
        sorted(set(target_speakers))
        if target_speakers is not None
        else sorted(present - set(base_speakers))
    )
    missing = [label for label in new_labels if label not in present]
    if missing:
        raise MissingSpeakerDataError(
            f"no utterances for declared target speakers: {missing}"
        )
    if not new_labels:
        raise MissingSpeakerDataError("fine-tuning requires at least one new speaker")

    speaker_map = {label: i for i, label in enumerate(base_speakers)}
    for j, label in enumerate(new_labels):
        speaker_map[label] = len(base_speakers) + j

    corpus = PreparedCorpus(fewshot, cfg, vocab=vocab, speaker_map=speaker_map)
    trainer = Trainer(
        cfg,
        corpus,
        workdir,
        log_name="finetune_log.jsonl",
        n_speaker_rows=len(base_speakers),
    )
    trainer.load_parameters(payload)
    trainer.model.extend_speakers(len(new_labels))
    trainer._make_optimizers()
    trainer.train()
    return Path(workdir) / "checkpoint_latest.ckpt"
