"""Shared neural blocks. Tensors are channel-first: (batch, channels, time).

Every block masks padded positions between layers, not just at the output,
so a padded batch and the same items processed alone agree on all valid
positions.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn


def sequence_mask(lengths: torch.Tensor, max_length: int | None = None) -> torch.Tensor:
    """(B,) lengths -> (B, 1, T) float mask."""
    if max_length is None:
        max_length = int(lengths.max())
    pos = torch.arange(max_length, device=lengths.device)
    return (pos.unsqueeze(0) < lengths.unsqueeze(1)).unsqueeze(1).to(torch.float32)


def get_padding(kernel_size: int, dilation: int = 1) -> int:
    return (kernel_size * dilation - dilation) // 2


class LayerNorm(nn.Module):
    """Layer norm over the channel axis of (B, C, T) tensors."""

    def __init__(self, channels: int, eps: float = 1e-5):
        super().__init__()
        self.channels = channels
        self.eps = eps
        self.gamma = nn.Parameter(torch.ones(channels))
        self.beta = nn.Parameter(torch.zeros(channels))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = x.transpose(1, -1)
        x = F.layer_norm(x, (self.channels,), self.gamma, self.beta, self.eps)
        return x.transpose(1, -1)


class WN(nn.Module):
    """Dilated gated convolution stack with optional global conditioning."""

    def __init__(
        self,
        hidden_channels: int,
        kernel_size: int,
        n_layers: int,
        gin_channels: int = 0,
        dilation_rate: int = 1,
        dropout: float = 0.0,
    ):
        super().__init__()
        self.hidden_channels = hidden_channels
        self.n_layers = n_layers
        self.in_layers = nn.ModuleList()
        self.res_skip_layers = nn.ModuleList()
        self.drop = nn.Dropout(dropout)

        for i in range(n_layers):
            dilation = dilation_rate**i if dilation_rate > 1 else 1
            self.in_layers.append(
                nn.Conv1d(
                    hidden_channels,
                    2 * hidden_channels,
                    kernel_size,
                    dilation=dilation,
                    padding=get_padding(kernel_size, dilation),
                )
            )
            res_skip_channels = (
                2 * hidden_channels if i < n_layers - 1 else hidden_channels
            )
            self.res_skip_layers.append(
                nn.Conv1d(hidden_channels, res_skip_channels, 1)
            )
        if gin_channels > 0:
            self.cond_layer = nn.Conv1d(gin_channels, 2 * hidden_channels * n_layers, 1)

    def forward(
        self,
        x: torch.Tensor,
        x_mask: torch.Tensor,
        g: torch.Tensor | None = None,
    ) -> torch.Tensor:
        output = torch.zeros_like(x)
        if g is not None:
            g = self.cond_layer(g)
        for i in range(self.n_layers):
            x_in = self.in_layers[i](x * x_mask)
            if g is not None:
                offset = i * 2 * self.hidden_channels
                x_in = x_in + g[:, offset : offset + 2 * self.hidden_channels]
            acts = torch.tanh(x_in[:, : self.hidden_channels]) * torch.sigmoid(
                x_in[:, self.hidden_channels :]
            )
            acts = self.drop(acts)
            res_skip = self.res_skip_layers[i](acts)
            if i < self.n_layers - 1:
                x = (x + res_skip[:, : self.hidden_channels]) * x_mask
                output = output + res_skip[:, self.hidden_channels :]
            else:
                output = output + res_skip
        return output * x_mask


class MultiHeadAttention(nn.Module):
    def __init__(self, channels: int, n_heads: int, dropout: float = 0.0):
        super().__init__()
        assert channels % n_heads == 0
        self.n_heads = n_heads
        self.k_channels = channels // n_heads
        self.conv_q = nn.Conv1d(channels, channels, 1)
        self.conv_k = nn.Conv1d(channels, channels, 1)
        self.conv_v = nn.Conv1d(channels, channels, 1)
        self.conv_o = nn.Conv1d(channels, channels, 1)
        self.drop = nn.Dropout(dropout)
        nn.init.xavier_uniform_(self.conv_q.weight)
        nn.init.xavier_uniform_(self.conv_k.weight)
        nn.init.xavier_uniform_(self.conv_v.weight)

    def forward(self, x: torch.Tensor, attn_mask: torch.Tensor) -> torch.Tensor:
        # attn_mask: (B, 1, T_q, T_k), 1 where attendable
        b, c, t = x.shape
        q = self.conv_q(x).view(b, self.n_heads, self.k_channels, t).transpose(2, 3)
        k = self.conv_k(x).view(b, self.n_heads, self.k_channels, t).transpose(2, 3)
        v = self.conv_v(x).view(b, self.n_heads, self.k_channels, t).transpose(2, 3)
        scores = torch.matmul(q, k.transpose(-2, -1)) / self.k_channels**0.5
        scores = scores.masked_fill(attn_mask == 0, -1e4)
        attn = self.drop(F.softmax(scores, dim=-1))
        out = torch.matmul(attn, v)
        out = out.transpose(2, 3).contiguous().view(b, c, t)
        return self.conv_o(out)


class FFN(nn.Module):
    def __init__(
        self,
        channels: int,
        filter_channels: int,
        kernel_size: int,
        dropout: float = 0.0,
    ):
        super().__init__()
        self.conv_1 = nn.Conv1d(
            channels, filter_channels, kernel_size, padding=kernel_size // 2
        )
        self.conv_2 = nn.Conv1d(
            filter_channels, channels, kernel_size, padding=kernel_size // 2
        )
        self.drop = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor, x_mask: torch.Tensor) -> torch.Tensor:
        x = self.conv_1(x * x_mask)
        x = F.relu(x)
        x = self.drop(x)
        x = self.conv_2(x * x_mask)
        return x * x_mask


class TransformerEncoder(nn.Module):
    """Stack of self-attention blocks with pre-masked convolutions."""

    def __init__(
        self,
        channels: int,
        filter_channels: int,
        n_heads: int,
        n_layers: int,
        kernel_size: int,
        dropout: float = 0.0,
    ):
        super().__init__()
        self.attn_layers = nn.ModuleList()
        self.norm_layers_1 = nn.ModuleList()
        self.ffn_layers = nn.ModuleList()
        self.norm_layers_2 = nn.ModuleList()
        self.drop = nn.Dropout(dropout)
        for _ in range(n_layers):
            self.attn_layers.append(MultiHeadAttention(channels, n_heads, dropout))
            self.norm_layers_1.append(LayerNorm(channels))
            self.ffn_layers.append(FFN(channels, filter_channels, kernel_size, dropout))
            self.norm_layers_2.append(LayerNorm(channels))

    def forward(self, x: torch.Tensor, x_mask: torch.Tensor) -> torch.Tensor:
        attn_mask = x_mask.unsqueeze(2) * x_mask.unsqueeze(-1)
        x = x * x_mask
        for attn, norm1, ffn, norm2 in zip(
            self.attn_layers, self.norm_layers_1, self.ffn_layers, self.norm_layers_2
        ):
            y = self.drop(attn(x, attn_mask))
            x = norm1(x + y)
            y = ffn(x, x_mask)
            x = norm2(x + y)
            x = x * x_mask
        return x
