"""Loss terms. All masked terms ignore padding exactly."""

from __future__ import annotations

import json
from dataclasses import dataclass

import torch
import torch.nn.functional as F

from ..errors import NonFiniteError


@dataclass(frozen=True)
class LossWeights:
    mel: float = 45.0
    kl: float = 1.0
    duration: float = 1.0
    adversarial: float = 1.0
    feature_matching: float = 2.0


@dataclass
class LossReport:
    iteration: int
    total: float
    mel: float
    kl: float
    duration: float
    adversarial_g: float
    adversarial_d: float
    feature_matching: float
    wall_time: float

    def validate(self, weights: LossWeights) -> None:
        expected = (
            weights.mel * self.mel
            + weights.kl * self.kl
            + weights.duration * self.duration
            + weights.adversarial * self.adversarial_g
            + weights.feature_matching * self.feature_matching
        )
        assert abs(expected - self.total) <= 1e-6 * max(1.0, abs(expected))
        for name in (
            "total", "mel", "kl", "duration",
            "adversarial_g", "adversarial_d", "feature_matching",
        ):
            value = getattr(self, name)
            if value != value or value in (float("inf"), float("-inf")):
                raise NonFiniteError(f"loss term {name} is non-finite")

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)


def mel_loss(mel_fake: torch.Tensor, mel_real: torch.Tensor) -> torch.Tensor:
    return F.l1_loss(mel_fake, mel_real)


def kl_divergence(z_p, logvar_q, mu_p, logvar_p, eps, mask) -> torch.Tensor:
    """Exact one-sample divergence between the posterior and the
    flow-mapped prior (volume-preserving flow, so no log-det term).

    Uses the noise actually drawn for the posterior sample, which makes the
    estimate vanish identically when the two distributions coincide and the
    flow is the identity, in both eval and sampling modes.
    """
    kl = 0.5 * (logvar_p - logvar_q)
    kl = kl + 0.5 * ((z_p - mu_p) ** 2 * torch.exp(-logvar_p) - eps**2)
    total = torch.sum(kl * mask)
    denom = torch.sum(mask) * z_p.shape[1]
    return total / denom


def duration_loss(nll: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Masked mean of the per-phoneme negative log-likelihood."""
    return torch.sum(nll) / torch.sum(mask)


def discriminator_loss(real_scores, fake_scores) -> torch.Tensor:
    loss = 0.0
    for real, fake in zip(real_scores, fake_scores):
        loss = loss + torch.mean((1 - real) ** 2) + torch.mean(fake**2)
    return loss


def generator_adversarial_loss(fake_scores) -> torch.Tensor:
    loss = 0.0
    for fake in fake_scores:
        loss = loss + torch.mean((1 - fake) ** 2)
    return loss


def feature_matching_loss(real_fmaps, fake_fmaps) -> torch.Tensor:
    loss = 0.0
    for real_stack, fake_stack in zip(real_fmaps, fake_fmaps):
        for real, fake in zip(real_stack, fake_stack):
            loss = loss + torch.mean(torch.abs(real.detach() - fake))
    return loss
