"""Convolutional BiLSTM baseline predicting mel spectra from trajectories.

Four 1-D conv layers with max-pooling after the second and third halve the
frame rate twice; a bidirectional LSTM models the pooled sequence and a
linear head emits mel bins. A final nearest-neighbor temporal upsample
restores frame synchrony so the output is [80 x T] for a T-frame input.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..errors import ConfigurationError, ShapeError

LRELU_SLOPE = 0.1


@dataclass(eq=False)
class CblConfig:
    input_dim: int = 230
    conv_channels: int = 384
    kernel_size: int = 5
    lstm_hidden: int = 384
    output_dim: int = 80

    def __post_init__(self):
        if self.input_dim <= 0 or self.conv_channels <= 0 or self.lstm_hidden <= 0:
            raise ConfigurationError("CBL dimensions must be positive")
        if self.kernel_size % 2 != 1:
            raise ConfigurationError(f"kernel_size must be odd, got {self.kernel_size}")

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "conv_channels": self.conv_channels,
            "kernel_size": self.kernel_size,
            "lstm_hidden": self.lstm_hidden,
            "output_dim": self.output_dim,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CblConfig":
        return cls(**d)


class CblModel(nn.Module):
    def __init__(self, config: CblConfig):
        super().__init__()
        self.config = config
        c, k = config.conv_channels, config.kernel_size
        pad = (k - 1) // 2
        self.conv1 = nn.Conv1d(config.input_dim, c, k, padding=pad)
        self.conv2 = nn.Conv1d(c, c, k, padding=pad)
        self.conv3 = nn.Conv1d(c, c, k, padding=pad)
        self.conv4 = nn.Conv1d(c, c, k, padding=pad)
        # ceil_mode keeps odd lengths alive (T=1 stays 1 frame)
        self.pool = nn.MaxPool1d(2, ceil_mode=True)
        self.lstm = nn.LSTM(c, config.lstm_hidden, batch_first=True, bidirectional=True)
        self.proj = nn.Linear(2 * config.lstm_hidden, config.output_dim)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        """features [B x D x T] -> mel [B x 80 x T]."""
        if features.dim() != 3 or features.size(1) != self.config.input_dim:
            raise ShapeError(
                f"expected features [B x {self.config.input_dim} x T], got {tuple(features.shape)}"
            )
        t = features.size(2)
        if t < 1:
            raise ShapeError("empty feature sequence")
        x = F.leaky_relu(self.conv1(features), LRELU_SLOPE)
        x = self.pool(F.leaky_relu(self.conv2(x), LRELU_SLOPE))
        x = self.pool(F.leaky_relu(self.conv3(x), LRELU_SLOPE))
        x = F.leaky_relu(self.conv4(x), LRELU_SLOPE)
        x, _ = self.lstm(x.transpose(1, 2))
        x = self.proj(x).transpose(1, 2)  # [B x 80 x T//4]
        return F.interpolate(x, size=t, mode="nearest")


def full_cbl_config(input_dim: int = 230) -> CblConfig:
    return CblConfig(input_dim=input_dim, conv_channels=384, lstm_hidden=384)


def toy_cbl_config(input_dim: int = 230) -> CblConfig:
    return CblConfig(input_dim=input_dim, conv_channels=24, kernel_size=3, lstm_hidden=16)
