"""Conditional VAE synthesis model.

Text side: phoneme embeddings, optionally fused with replicated contextual
features, are conditioned on language and speaker IDs (projected, added)
and encoded by transformer blocks into a phoneme-level Gaussian prior.
Audio side: a gated convolution stack infers posterior latents from the
linear spectrogram. A coupling flow bridges the two; a stochastic duration
predictor and an upsampling decoder complete the synthesis path. Speaker
identity additionally conditions posterior, flow, duration predictor and
decoder; language identity additionally conditions the duration predictor.
"""

from __future__ import annotations

import math

import torch
from torch import nn

from ..errors import ConfigError, NonFiniteError, OutOfRangeIdError
from .config import ModelConfig
from .duration import StochasticDurationPredictor
from .flow import ResidualCouplingBlock
from .modules import WN, TransformerEncoder, sequence_mask
from .vocoder import MultiScaleDiscriminator, WaveformDecoder


class TextEncoder(nn.Module):
    def __init__(self, vocab_size: int, cfg: ModelConfig):
        super().__init__()
        h = cfg.hidden_dim
        self.hidden_dim = h
        self.emb = nn.Embedding(vocab_size, h, padding_idx=0)
        nn.init.normal_(self.emb.weight, 0.0, h**-0.5)
        with torch.no_grad():
            self.emb.weight[0].zero_()
        self.lang_proj = nn.Linear(h, h)
        self.spk_proj = nn.Linear(h, h)
        if cfg.use_context:
            # Zero-initialized projection: untrained fusion is the identity.
            self.ctx_proj = nn.Linear(cfg.context_dim, h)
            nn.init.zeros_(self.ctx_proj.weight)
            nn.init.zeros_(self.ctx_proj.bias)
        self.encoder = TransformerEncoder(
            h,
            cfg.filter_dim,
            cfg.n_heads,
            cfg.n_encoder_blocks,
            cfg.encoder_kernel_size,
            cfg.dropout,
        )
        self.proj_stats = nn.Conv1d(h, 2 * h, 1)

    def forward(self, ids, lengths, context, lang_emb, spk_emb, logvar_bounds):
        x = self.emb(ids) * math.sqrt(self.hidden_dim)  # (B, P, H)
        if context is not None:
            x = x + self.ctx_proj(context)
        x = x + self.lang_proj(lang_emb).unsqueeze(1) + self.spk_proj(spk_emb).unsqueeze(1)
        x = x.transpose(1, 2)  # (B, H, P)
        x_mask = sequence_mask(lengths, ids.shape[1]).to(x.dtype)
        hidden = self.encoder(x * x_mask, x_mask)
        stats = self.proj_stats(hidden) * x_mask
        mu, logvar = torch.split(stats, self.hidden_dim, dim=1)
        logvar = torch.clamp(logvar, *logvar_bounds) * x_mask
        return mu, logvar, hidden, x_mask


class PosteriorEncoder(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        h = cfg.hidden_dim
        self.hidden_dim = h
        self.pre = nn.Conv1d(cfg.spec_channels, h, 1)
        self.enc = WN(
            h,
            cfg.posterior_kernel_size,
            cfg.posterior_wn_layers,
            gin_channels=h,
        )
        self.proj_stats = nn.Conv1d(h, 2 * h, 1)

    def forward(self, spec, lengths, g, logvar_bounds):
        x_mask = sequence_mask(lengths, spec.shape[2]).to(spec.dtype)
        x = self.pre(spec) * x_mask
        x = self.enc(x, x_mask, g=g)
        stats = self.proj_stats(x) * x_mask
        mu, logvar = torch.split(stats, self.hidden_dim, dim=1)
        logvar = torch.clamp(logvar, *logvar_bounds) * x_mask
        return mu, logvar, x_mask


class SynthesisModel(nn.Module):
    def __init__(self, cfg: ModelConfig, vocab_size: int):
        super().__init__()
        self.cfg = cfg
        self.vocab_size = vocab_size
        h = cfg.hidden_dim
        self.lang_emb = nn.Embedding(cfg.n_languages, h)
        self.spk_emb = nn.Embedding(cfg.n_speakers, h)
        self.text_encoder = TextEncoder(vocab_size, cfg)
        self.posterior_encoder = PosteriorEncoder(cfg)
        self.flow = ResidualCouplingBlock(
            h, cfg.flow_kernel_size, cfg.flow_wn_layers, cfg.flow_layers, gin_channels=h
        )
        self.duration_predictor = StochasticDurationPredictor(
            h,
            cfg.duration_filter_dim,
            cfg.encoder_kernel_size,
            cfg.duration_flow_layers,
            gin_channels=h,
        )
        self.dur_lang_proj = nn.Linear(h, h)
        self.decoder = WaveformDecoder(
            h,
            cfg.upsample_initial_channel,
            cfg.upsample_rates,
            cfg.upsample_kernel_sizes,
            cfg.resblock_kernel_sizes,
            cfg.resblock_dilations,
            gin_channels=h,
        )

    # -- ID handling ------------------------------------------------------

    def _check_ids(self, lang_ids: torch.Tensor, spk_ids: torch.Tensor) -> None:
        if lang_ids.numel() and int(lang_ids.max()) >= self.cfg.n_languages:
            raise OutOfRangeIdError(
                f"language id {int(lang_ids.max())} out of range "
                f"(n_languages={self.cfg.n_languages})"
            )
        if spk_ids.numel() and int(spk_ids.max()) >= self.cfg.n_speakers:
            raise OutOfRangeIdError(
                f"speaker id {int(spk_ids.max())} out of range "
                f"(n_speakers={self.cfg.n_speakers})"
            )
        if (lang_ids.numel() and int(lang_ids.min()) < 0) or (
            spk_ids.numel() and int(spk_ids.min()) < 0
        ):
            raise OutOfRangeIdError("negative conditioning id")

    def extend_speakers(self, n_new: int) -> None:
        """Append speaker rows initialized to the mean of existing rows."""
        if n_new <= 0:
            return
        old = self.spk_emb.weight.data
        mean = old.mean(dim=0, keepdim=True)
        new_rows = mean.repeat(n_new, 1)
        emb = nn.Embedding(old.shape[0] + n_new, old.shape[1])
        with torch.no_grad():
            emb.weight[: old.shape[0]] = old
            emb.weight[old.shape[0] :] = new_rows
        self.spk_emb = emb
        self.cfg.n_speakers += n_new

    # -- Core operations ------------------------------------------------------

    def encode_text(self, ids, lengths, context, lang_ids, spk_ids):
        """Phoneme-level prior stats. ``context`` present iff use_context."""
        self._check_ids(lang_ids, spk_ids)
        if self.cfg.use_context and context is None:
            raise ConfigError("context features required: model runs with fusion on")
        if not self.cfg.use_context and context is not None:
            raise ConfigError("context features supplied but fusion is off")
        bounds = (self.cfg.logvar_min, self.cfg.logvar_max)
        return self.text_encoder(
            ids, lengths, context, self.lang_emb(lang_ids), self.spk_emb(spk_ids), bounds
        )

    def encode_posterior(self, spec, lengths, spk_ids, generator=None):
        """Latent frames from the linear spectrogram.

        Training mode samples z = mu + exp(0.5 logvar) * eps; eval mode
        returns the mean. The drawn eps is returned for the exact
        one-sample divergence estimate.
        """
        if not torch.isfinite(spec).all():
            raise NonFiniteError("posterior input contains non-finite values")
        self._check_ids(torch.zeros_like(spk_ids), spk_ids)
        g = self.spk_emb(spk_ids).unsqueeze(-1)
        bounds = (self.cfg.logvar_min, self.cfg.logvar_max)
        mu, logvar, mask = self.posterior_encoder(spec, lengths, g, bounds)
        if self.training:
            eps = torch.randn(
                mu.shape, generator=generator, device=mu.device, dtype=mu.dtype
            )
            z = (mu + torch.exp(0.5 * logvar) * eps) * mask
        else:
            eps = torch.zeros_like(mu)
            z = mu * mask
        return z, mu, logvar, eps, mask

    def flow_forward(self, z, mask, spk_ids):
        g = self.spk_emb(spk_ids).unsqueeze(-1)
        return self.flow(z, mask, g=g, reverse=False)

    def flow_inverse(self, y, mask, spk_ids):
        g = self.spk_emb(spk_ids).unsqueeze(-1)
        return self.flow(y, mask, g=g, reverse=True)

    def _duration_condition(self, lang_ids, spk_ids):
        g = self.spk_emb(spk_ids) + self.dur_lang_proj(self.lang_emb(lang_ids))
        return g.unsqueeze(-1)

    def predict_durations(
        self, hidden, mask, lang_ids, spk_ids, noise_scale, generator=None
    ):
        """Positive per-phoneme durations; ceil gives frame counts."""
        if noise_scale < 0:
            raise ConfigError("duration noise scale must be >= 0")
        self._check_ids(lang_ids, spk_ids)
        g = self._duration_condition(lang_ids, spk_ids)
        w = self.duration_predictor.sample(
            hidden.detach(), mask, g=g, noise_scale=noise_scale, generator=generator
        )
        if not torch.isfinite(w).all():
            raise NonFiniteError("duration predictor emitted non-finite values")
        return w

    def duration_nll(self, hidden, mask, durations, lang_ids, spk_ids, noise=None, generator=None):
        g = self._duration_condition(lang_ids, spk_ids)
        return self.duration_predictor.nll(
            hidden.detach(), mask, durations, g=g, noise=noise, generator=generator
        )

    def decode_waveform(self, z_slice, spk_ids):
        """F latent frames -> F * hop bounded waveform samples."""
        g = self.spk_emb(spk_ids).unsqueeze(-1)
        return self.decoder(z_slice, g=g)

    def infer(
        self,
        ids,
        lengths,
        context,
        lang_ids,
        spk_ids,
        noise_scale: float = 0.667,
        duration_noise_scale: float = 0.8,
        length_scale: float = 1.0,
        generator: torch.Generator | None = None,
    ):
        """Full text-to-waveform path for a batch of encoded sequences.

        Returns (waveform (B, 1, T), frame durations (B, P), frame lengths).
        Deterministic whenever both noise scales are zero.
        """
        mu_p, logvar_p, hidden, p_mask = self.encode_text(
            ids, lengths, context, lang_ids, spk_ids
        )
        w = self.predict_durations(
            hidden, p_mask, lang_ids, spk_ids, duration_noise_scale, generator
        )
        durations = torch.ceil(w * length_scale) * p_mask.squeeze(1)
        durations = durations.long()
        frame_lengths = durations.sum(dim=1)
        mu_f, logvar_f, f_mask = expand_by_durations(
            mu_p, logvar_p, durations, frame_lengths
        )
        if noise_scale == 0.0:
            z_p = mu_f * f_mask
        else:
            eps = torch.randn(
                mu_f.shape, generator=generator, device=mu_f.device, dtype=mu_f.dtype
            )
            z_p = (mu_f + torch.exp(0.5 * logvar_f) * eps * noise_scale) * f_mask
        z = self.flow_inverse(z_p, f_mask, spk_ids)
        wave = self.decode_waveform(z * f_mask, spk_ids)
        return wave, durations, frame_lengths


def expand_by_durations(mu, logvar, durations, frame_lengths):
    """Repeat phoneme-level stats along time by integer durations."""
    b, h, _ = mu.shape
    f_max = int(frame_lengths.max())
    mu_f = mu.new_zeros(b, h, f_max)
    logvar_f = logvar.new_zeros(b, h, f_max)
    for i in range(b):
        d = durations[i]
        keep = d > 0
        idx = torch.repeat_interleave(torch.arange(d.shape[0], device=d.device)[keep], d[keep])
        mu_f[i, :, : idx.shape[0]] = mu[i, :, idx]
        logvar_f[i, :, : idx.shape[0]] = logvar[i, :, idx]
    f_mask = sequence_mask(frame_lengths, f_max).to(mu.dtype)
    return mu_f, logvar_f, f_mask


def build_discriminator(cfg: ModelConfig) -> MultiScaleDiscriminator:
    return MultiScaleDiscriminator(cfg.disc_scales, cfg.disc_channels, cfg.disc_layers)
