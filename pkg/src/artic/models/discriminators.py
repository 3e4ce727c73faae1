"""Multi-period and multi-scale waveform discriminators for GAN training.

Each sub-discriminator returns per-layer feature maps alongside its logits so
the generator can be trained with a feature-matching loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F
from torch.nn.utils.parametrizations import spectral_norm, weight_norm

LRELU_SLOPE = 0.1

PERIODS = (2, 3, 5, 7, 11)


@dataclass(eq=False)
class DiscriminatorConfig:
    """Channel widths for both discriminator families.

    period_base/scale_base set the narrowest layer; deeper layers scale by
    fixed multipliers. Defaults follow the reference GAN vocoder recipe; toy
    runs shrink the bases.
    """

    periods: tuple = PERIODS
    period_base: int = 32
    scale_base: int = 128
    num_scales: int = 3

    def __post_init__(self):
        self.periods = tuple(int(p) for p in self.periods)


class PeriodDiscriminator(nn.Module):
    """Views the waveform as a [T/p x p] image and convolves along time."""

    def __init__(self, period: int, base: int = 32):
        super().__init__()
        self.period = period
        widths = (1, base, base * 4, base * 16, base * 32, base * 32)
        self.convs = nn.ModuleList(
            weight_norm(
                nn.Conv2d(
                    widths[i],
                    widths[i + 1],
                    kernel_size=(5, 1),
                    stride=(3, 1) if i < 4 else (1, 1),
                    padding=(2, 0),
                )
            )
            for i in range(5)
        )
        self.conv_post = weight_norm(nn.Conv2d(widths[-1], 1, (3, 1), padding=(1, 0)))

    def forward(self, x: torch.Tensor):
        # x: [B x 1 x T]
        b, c, t = x.shape
        if t % self.period != 0:
            pad = self.period - t % self.period
            x = F.pad(x, (0, pad), mode="reflect")
            t = t + pad
        x = x.view(b, c, t // self.period, self.period)
        fmap = []
        for conv in self.convs:
            x = F.leaky_relu(conv(x), LRELU_SLOPE)
            fmap.append(x)
        x = self.conv_post(x)
        fmap.append(x)
        return x.flatten(1, -1), fmap


class ScaleDiscriminator(nn.Module):
    """Plain 1-D conv stack; the first (full-resolution) copy is spectral-normed."""

    def __init__(self, base: int = 128, use_spectral_norm: bool = False):
        super().__init__()
        norm = spectral_norm if use_spectral_norm else weight_norm
        b = base
        self.convs = nn.ModuleList(
            [
                norm(nn.Conv1d(1, b, 15, stride=1, padding=7)),
                norm(nn.Conv1d(b, b, 41, stride=2, groups=4, padding=20)),
                norm(nn.Conv1d(b, b * 2, 41, stride=2, groups=16, padding=20)),
                norm(nn.Conv1d(b * 2, b * 4, 41, stride=4, groups=16, padding=20)),
                norm(nn.Conv1d(b * 4, b * 8, 41, stride=4, groups=16, padding=20)),
                norm(nn.Conv1d(b * 8, b * 8, 41, stride=1, groups=16, padding=20)),
                norm(nn.Conv1d(b * 8, b * 8, 5, stride=1, padding=2)),
            ]
        )
        self.conv_post = norm(nn.Conv1d(b * 8, 1, 3, stride=1, padding=1))

    def forward(self, x: torch.Tensor):
        fmap = []
        for conv in self.convs:
            x = F.leaky_relu(conv(x), LRELU_SLOPE)
            fmap.append(x)
        x = self.conv_post(x)
        fmap.append(x)
        return x.flatten(1, -1), fmap


class MultiPeriodDiscriminator(nn.Module):
    def __init__(self, config: DiscriminatorConfig | None = None):
        super().__init__()
        config = config or DiscriminatorConfig()
        self.discriminators = nn.ModuleList(
            PeriodDiscriminator(p, base=config.period_base) for p in config.periods
        )

    def forward(self, x: torch.Tensor):
        logits, fmaps = [], []
        for disc in self.discriminators:
            score, fmap = disc(x)
            logits.append(score)
            fmaps.append(fmap)
        return logits, fmaps


class MultiScaleDiscriminator(nn.Module):
    def __init__(self, config: DiscriminatorConfig | None = None):
        super().__init__()
        config = config or DiscriminatorConfig()
        self.discriminators = nn.ModuleList(
            ScaleDiscriminator(base=config.scale_base, use_spectral_norm=(i == 0))
            for i in range(config.num_scales)
        )
        self.pools = nn.ModuleList(
            nn.AvgPool1d(4, stride=2, padding=2) for _ in range(config.num_scales - 1)
        )

    def forward(self, x: torch.Tensor):
        logits, fmaps = [], []
        for i, disc in enumerate(self.discriminators):
            if i > 0:
                x = self.pools[i - 1](x)
            score, fmap = disc(x)
            logits.append(score)
            fmaps.append(fmap)
        return logits, fmaps


def toy_discriminator_config() -> DiscriminatorConfig:
    return DiscriminatorConfig(periods=(2, 3, 5), period_base=4, scale_base=16, num_scales=2)
