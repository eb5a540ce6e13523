"""Waveform decoder (upsampling generator) and multi-scale discriminators."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from .modules import get_padding

LRELU_SLOPE = 0.1


def _init_conv(m: nn.Module, std: float = 0.01) -> None:
    if isinstance(m, (nn.Conv1d, nn.ConvTranspose1d)):
        nn.init.normal_(m.weight, 0.0, std)
        if m.bias is not None:
            nn.init.zeros_(m.bias)


class ResBlock(nn.Module):
    def __init__(self, channels: int, kernel_size: int, dilations: tuple[int, ...]):
        super().__init__()
        self.convs = nn.ModuleList(
            nn.Conv1d(
                channels,
                channels,
                kernel_size,
                dilation=d,
                padding=get_padding(kernel_size, d),
            )
            for d in dilations
        )
        self.convs.apply(_init_conv)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        for conv in self.convs:
            x = x + conv(F.leaky_relu(x, LRELU_SLOPE))
        return x


class WaveformDecoder(nn.Module):
    """Upsamples latent frames to waveform samples.

    Each transposed convolution multiplies the time axis by its rate; the
    rates multiply to the hop size, so F frames decode to exactly F * hop
    samples. Output passes through tanh and stays within [-1, 1].
    """

    def __init__(
        self,
        in_channels: int,
        upsample_initial_channel: int,
        upsample_rates: tuple[int, ...],
        upsample_kernel_sizes: tuple[int, ...],
        resblock_kernel_sizes: tuple[int, ...],
        resblock_dilations: tuple[tuple[int, ...], ...],
        gin_channels: int = 0,
    ):
        super().__init__()
        self.num_kernels = len(resblock_kernel_sizes)
        self.conv_pre = nn.Conv1d(in_channels, upsample_initial_channel, 7, padding=3)
        self.ups = nn.ModuleList()
        for i, (rate, kernel) in enumerate(zip(upsample_rates, upsample_kernel_sizes)):
            self.ups.append(
                nn.ConvTranspose1d(
                    upsample_initial_channel // (2**i),
                    upsample_initial_channel // (2 ** (i + 1)),
                    kernel,
                    stride=rate,
                    padding=(kernel - rate) // 2,
                )
            )
        self.resblocks = nn.ModuleList()
        for i in range(len(self.ups)):
            channels = upsample_initial_channel // (2 ** (i + 1))
            for kernel, dilations in zip(resblock_kernel_sizes, resblock_dilations):
                self.resblocks.append(ResBlock(channels, kernel, dilations))
        self.conv_post = nn.Conv1d(channels, 1, 7, padding=3, bias=False)
        if gin_channels > 0:
            self.cond = nn.Conv1d(gin_channels, upsample_initial_channel, 1)
        self.ups.apply(_init_conv)
        _init_conv(self.conv_post)

    def forward(self, x: torch.Tensor, g: torch.Tensor | None = None) -> torch.Tensor:
        x = self.conv_pre(x)
        if g is not None:
            x = x + self.cond(g)
        for i, up in enumerate(self.ups):
            x = up(F.leaky_relu(x, LRELU_SLOPE))
            xs = None
            for j in range(self.num_kernels):
                block = self.resblocks[i * self.num_kernels + j]
                xs = block(x) if xs is None else xs + block(x)
            x = xs / self.num_kernels
        x = F.leaky_relu(x)
        x = self.conv_post(x)
        return torch.tanh(x)


class ScaleDiscriminator(nn.Module):
    """Strided convolution stack over (possibly pooled) raw waveform."""

    def __init__(self, channels: int, n_layers: int):
        super().__init__()
        convs = []
        in_ch = 1
        out_ch = channels
        for i in range(n_layers):
            stride = 2 if i < n_layers - 1 else 1
            convs.append(nn.Conv1d(in_ch, out_ch, 15, stride=stride, padding=7))
            in_ch = out_ch
            out_ch = min(out_ch * 2, 256)
        self.convs = nn.ModuleList(convs)
        self.conv_post = nn.Conv1d(in_ch, 1, 3, padding=1)
        self.convs.apply(_init_conv)
        _init_conv(self.conv_post)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, list[torch.Tensor]]:
        fmaps = []
        for conv in self.convs:
            x = F.leaky_relu(conv(x), LRELU_SLOPE)
            fmaps.append(x)
        score = self.conv_post(x)
        return score.flatten(1), fmaps


class MultiScaleDiscriminator(nn.Module):
    """Identical discriminators applied at successively pooled scales.

    Each sub-discriminator exposes one feature map per configured layer for
    the feature-matching loss.
    """

    def __init__(self, n_scales: int, channels: int, n_layers: int):
        super().__init__()
        self.n_layers = n_layers
        self.discriminators = nn.ModuleList(
            ScaleDiscriminator(channels, n_layers) for _ in range(n_scales)
        )
        self.pool = nn.AvgPool1d(4, stride=2, padding=2)

    def forward(
        self, y: torch.Tensor
    ) -> tuple[list[torch.Tensor], list[list[torch.Tensor]]]:
        scores, fmaps = [], []
        for i, disc in enumerate(self.discriminators):
            if i > 0:
                y = self.pool(y)
            score, fmap = disc(y)
            scores.append(score)
            fmaps.append(fmap)
        return scores, fmaps
