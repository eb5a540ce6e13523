"""Flow-based stochastic duration predictor.

Per phoneme, the log of the dequantized duration is paired with an
auxiliary noise channel and mapped through conditional affine couplings to
a standard normal. Training minimizes the exact negative log-likelihood of
that two-channel variable; sampling inverts the flow from scaled Gaussian
noise, with noise scale zero giving the deterministic mode.

Integer frame counts are recovered as ceil(exp(log-duration)), which is
consistent with the dequantization used during training.
"""

from __future__ import annotations

import math

import torch
from torch import nn

from .modules import LayerNorm, get_padding

# Dequantization offset stays below 1 so ceil(exp(x)) recovers the integer.
_MAX_DEQUANT = 0.98


class _AffineCoupling(nn.Module):
    """Transforms the second channel given the first plus the condition."""

    def __init__(self, filter_channels: int, kernel_size: int):
        super().__init__()
        self.conv_1 = nn.Conv1d(
            1 + filter_channels,
            filter_channels,
            kernel_size,
            padding=get_padding(kernel_size),
        )
        self.norm = LayerNorm(filter_channels)
        self.out = nn.Conv1d(filter_channels, 2, 1)
        nn.init.zeros_(self.out.weight)
        nn.init.zeros_(self.out.bias)

    def _params(self, xa: torch.Tensor, c: torch.Tensor, x_mask: torch.Tensor):
        h = self.conv_1(torch.cat([xa, c], dim=1) * x_mask)
        h = self.norm(torch.relu(h)) * x_mask
        logs, t = torch.split(self.out(h), 1, dim=1)
        logs = torch.tanh(logs)
        return logs, t

    def forward(self, x, c, x_mask, reverse: bool = False):
        xa, xb = torch.split(x, 1, dim=1)
        logs, t = self._params(xa, c, x_mask)
        if reverse:
            xb = (xb - t) * torch.exp(-logs) * x_mask
            logdet = None
        else:
            xb = (xb * torch.exp(logs) + t) * x_mask
            logdet = (logs * x_mask).squeeze(1)
        return torch.cat([xa, xb], dim=1), logdet


class StochasticDurationPredictor(nn.Module):
    def __init__(
        self,
        in_channels: int,
        filter_channels: int,
        kernel_size: int,
        n_flows: int,
        gin_channels: int = 0,
    ):
        super().__init__()
        self.filter_channels = filter_channels
        self.pre = nn.Conv1d(in_channels, filter_channels, 1)
        self.conv_1 = nn.Conv1d(
            filter_channels, filter_channels, kernel_size, padding=get_padding(kernel_size)
        )
        self.norm_1 = LayerNorm(filter_channels)
        self.conv_2 = nn.Conv1d(
            filter_channels, filter_channels, kernel_size, padding=get_padding(kernel_size)
        )
        self.norm_2 = LayerNorm(filter_channels)
        if gin_channels > 0:
            self.cond = nn.Conv1d(gin_channels, filter_channels, 1)
        self.flows = nn.ModuleList(
            _AffineCoupling(filter_channels, kernel_size) for _ in range(n_flows)
        )

    @property
    def head(self) -> nn.Conv1d:
        """Final projection of the last coupling; the gradient-check target."""
        return self.flows[-1].out

    def _condition(
        self, x: torch.Tensor, x_mask: torch.Tensor, g: torch.Tensor | None
    ) -> torch.Tensor:
        h = self.pre(x * x_mask)
        if g is not None:
            h = h + self.cond(g)
        h = self.norm_1(torch.relu(self.conv_1(h * x_mask))) * x_mask
        h = self.norm_2(torch.relu(self.conv_2(h * x_mask))) * x_mask
        return h

    def nll(
        self,
        x: torch.Tensor,
        x_mask: torch.Tensor,
        durations: torch.Tensor,
        g: torch.Tensor | None = None,
        noise: tuple[torch.Tensor, torch.Tensor] | None = None,
        generator: torch.Generator | None = None,
    ) -> torch.Tensor:
        """Per-phoneme negative log-likelihood, zero at padded positions.

        ``durations`` holds integer frame counts (B, P). ``noise`` supplies
        the dequantization and auxiliary draws (u, v) explicitly; when
        absent they are drawn from ``generator``.
        """
        c = self._condition(x, x_mask, g)
        if noise is None:
            u = torch.rand(
                durations.shape, generator=generator, device=x.device
            )
            v = torch.randn(
                durations.shape, generator=generator, device=x.device
            )
        else:
            u, v = noise
        u = u.clamp(0.0, _MAX_DEQUANT)
        # Padded positions may carry zero durations; clamp keeps the log
        # finite there, the mask removes their contribution afterwards.
        logdur = torch.log(durations.to(x.dtype).clamp(min=1.0) - u.to(x.dtype))
        z = torch.stack([logdur, v.to(x.dtype)], dim=1) * x_mask

        logdet_total = torch.zeros_like(logdur)
        for i, flow in enumerate(self.flows):
            z, logdet = flow(z, c, x_mask, reverse=False)
            logdet_total = logdet_total + logdet
            if i < len(self.flows) - 1:
                z = torch.flip(z, dims=(1,))

        nll = 0.5 * z.pow(2).sum(dim=1) + math.log(2 * math.pi) - logdet_total
        return nll * x_mask.squeeze(1)

    def sample(
        self,
        x: torch.Tensor,
        x_mask: torch.Tensor,
        g: torch.Tensor | None = None,
        noise_scale: float = 1.0,
        generator: torch.Generator | None = None,
    ) -> torch.Tensor:
        """Positive continuous durations (B, P); deterministic at scale 0."""
        c = self._condition(x, x_mask, g)
        b, _, p = c.shape
        if noise_scale == 0.0:
            eps = torch.zeros(b, 2, p, device=x.device, dtype=x.dtype)
        else:
            eps = (
                torch.randn(b, 2, p, generator=generator, device=x.device)
                .to(x.dtype)
                * noise_scale
            )
        z = eps * x_mask
        for i, flow in enumerate(reversed(self.flows)):
            if i > 0:
                z = torch.flip(z, dims=(1,))
            z, _ = flow(z, c, x_mask, reverse=True)
        logdur = z[:, 0]
        return torch.exp(logdur) * x_mask.squeeze(1)
