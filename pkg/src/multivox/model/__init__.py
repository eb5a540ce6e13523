from .config import ModelConfig
from .duration import StochasticDurationPredictor
from .flow import ResidualCouplingBlock, ResidualCouplingLayer
from .model import (
    PosteriorEncoder,
    SynthesisModel,
    TextEncoder,
    build_discriminator,
    expand_by_durations,
)
from .modules import sequence_mask
from .vocoder import MultiScaleDiscriminator, WaveformDecoder

__all__ = [
    "ModelConfig",
    "MultiScaleDiscriminator",
    "PosteriorEncoder",
    "ResidualCouplingBlock",
    "ResidualCouplingLayer",
    "StochasticDurationPredictor",
    "SynthesisModel",
    "TextEncoder",
    "WaveformDecoder",
    "build_discriminator",
    "expand_by_durations",
    "sequence_mask",
]
