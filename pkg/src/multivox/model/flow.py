"""Invertible coupling flow between posterior latents and the prior space.

Mean-only residual couplings (zero log-determinant) interleaved with channel
flips. The post projection of every coupling starts at zero, so a freshly
built flow is the identity; an even number of layers keeps the flips
self-cancelling.
"""

from __future__ import annotations

import torch
from torch import nn

from .modules import WN


class ResidualCouplingLayer(nn.Module):
    """Transforms the second half of the channels conditioned on the first."""

    def __init__(
        self,
        channels: int,
        kernel_size: int,
        n_layers: int,
        gin_channels: int = 0,
    ):
        super().__init__()
        assert channels % 2 == 0
        self.half_channels = channels // 2
        self.pre = nn.Conv1d(self.half_channels, self.half_channels, 1)
        self.enc = WN(
            self.half_channels,
            kernel_size,
            n_layers,
            gin_channels=gin_channels,
        )
        self.post = nn.Conv1d(self.half_channels, self.half_channels, 1)
        nn.init.zeros_(self.post.weight)
        nn.init.zeros_(self.post.bias)

    def _shift(
        self, x0: torch.Tensor, x_mask: torch.Tensor, g: torch.Tensor | None
    ) -> torch.Tensor:
        h = self.pre(x0) * x_mask
        h = self.enc(h, x_mask, g=g)
        return self.post(h) * x_mask

    def forward(self, x, x_mask, g=None, reverse: bool = False):
        x0, x1 = torch.split(x, [self.half_channels] * 2, dim=1)
        m = self._shift(x0, x_mask, g)
        x1 = (x1 - m) * x_mask if reverse else (x1 + m) * x_mask
        return torch.cat([x0, x1], dim=1)


class Flip(nn.Module):
    def forward(self, x, x_mask, g=None, reverse: bool = False):
        return torch.flip(x, dims=(1,))


class ResidualCouplingBlock(nn.Module):
    """Stack of coupling layers; forward maps posterior latents toward the
    prior, ``reverse=True`` inverts the map for synthesis."""

    def __init__(
        self,
        channels: int,
        kernel_size: int,
        wn_layers: int,
        n_couplings: int,
        gin_channels: int = 0,
    ):
        super().__init__()
        assert n_couplings % 2 == 0, "even coupling count keeps flips neutral"
        self.flows = nn.ModuleList()
        for _ in range(n_couplings):
            self.flows.append(
                ResidualCouplingLayer(
                    channels, kernel_size, wn_layers, gin_channels=gin_channels
                )
            )
            self.flows.append(Flip())

    def forward(
        self,
        x: torch.Tensor,
        x_mask: torch.Tensor,
        g: torch.Tensor | None = None,
        reverse: bool = False,
    ) -> torch.Tensor:
        flows = reversed(self.flows) if reverse else self.flows
        for flow in flows:
            x = flow(x, x_mask, g=g, reverse=reverse)
        return x

    def logdet(self) -> float:
        """Mean-only couplings and flips are volume preserving."""
        return 0.0
