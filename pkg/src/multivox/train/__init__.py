from .checkpoint import load_checkpoint, save_checkpoint
from .corpus import PreparedCorpus
from .loop import Batch, Trainer, alignment_loglik, collate, finetune, pretrain, resume
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

__all__ = [
    "Batch",
    "LossReport",
    "LossWeights",
    "PreparedCorpus",
    "Trainer",
    "alignment_loglik",
    "collate",
    "discriminator_loss",
    "duration_loss",
    "feature_matching_loss",
    "finetune",
    "generator_adversarial_loss",
    "kl_divergence",
    "load_checkpoint",
    "mel_loss",
    "pretrain",
    "resume",
    "save_checkpoint",
]
