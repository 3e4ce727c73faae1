"""Autoregressive GAN waveform generator conditioned on articulatory features.

The backbone is a transposed-convolution upsampling stack with multi-receptive
-field fusion residual blocks, mapping a [B x D x T] feature sequence to a
[B x 1 x T*240] waveform. Autoregression comes from a small strided conv
encoder that summarizes the previous ar_context synthesized samples into one
conditioning vector, broadcast along time and concatenated to the features.

Free-running generation is chunked: each chunk of frames is synthesized
conditioned on the tail of what was already generated, so causality holds at
chunk granularity. With ar_context = 0 the history path disappears entirely
and chunking is bypassed, making generate() coincide with a single forward().
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F
from torch.nn.utils.parametrizations import weight_norm

from .. import audio
from ..errors import ConfigurationError, ShapeError

LRELU_SLOPE = 0.1

UPSAMPLE_FACTORS = (8, 6, 5)
AR_CONTEXT = 240


@dataclass(eq=False)
class GeneratorConfig:
    """Architecture hyperparameters for the waveform generator.

    upsample_factors must multiply to 240 (samples per feature frame).
    ar_context is the number of previous output samples the history encoder
    sees; 0 disables autoregression. chunk_frames is the free-running
    generation granularity.
    """

    input_dim: int = 230
    upsample_factors: tuple = UPSAMPLE_FACTORS
    initial_channels: int = 512
    resblock_kernel_sizes: tuple = (3, 7, 11)
    resblock_dilations: tuple = ((1, 3, 5), (1, 3, 5), (1, 3, 5))
    ar_context: int = AR_CONTEXT
    history_channels: int = 64
    chunk_frames: int = 8
    use_weight_norm: bool = True

    def __post_init__(self):
        self.upsample_factors = tuple(int(f) for f in self.upsample_factors)
        if self.input_dim <= 0:
            raise ConfigurationError(f"input_dim must be positive, got {self.input_dim}")
        product = math.prod(self.upsample_factors)
        if product != audio.HOP:
            raise ConfigurationError(
                f"upsample factors {self.upsample_factors} multiply to {product}, need {audio.HOP}"
            )
        if self.ar_context < 0:
            raise ConfigurationError(f"ar_context must be >= 0, got {self.ar_context}")
        if self.chunk_frames < 1:
            raise ConfigurationError(f"chunk_frames must be >= 1, got {self.chunk_frames}")
        if len(self.resblock_kernel_sizes) != len(self.resblock_dilations):
            raise ConfigurationError("one dilation tuple is needed per resblock kernel size")

    @property
    def samples_per_frame(self) -> int:
        return math.prod(self.upsample_factors)

    def receptive_field_samples(self) -> int:
        """Estimated samples of input context influencing one output sample.

        Walks the stack backwards; transposed convolutions divide the span by
        their stride. An estimate for documentation and chunk sizing, not a
        behavioral contract.
        """
        rf = 1
        rf += 7 - 1  # output conv
        for k, dils in zip(
            reversed(self.resblock_kernel_sizes), reversed(self.resblock_dilations)
        ):
            for d in reversed(dils):
                rf += (k - 1) * d + (k - 1)
        for s in reversed(self.upsample_factors):
            k = 2 * s
            rf = (rf - 1) // s + -(-k // s)
        rf += 7 - 1  # input conv
        return rf * self.samples_per_frame

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "upsample_factors": list(self.upsample_factors),
            "initial_channels": self.initial_channels,
            "resblock_kernel_sizes": list(self.resblock_kernel_sizes),
            "resblock_dilations": [list(d) for d in self.resblock_dilations],
            "ar_context": self.ar_context,
            "history_channels": self.history_channels,
            "chunk_frames": self.chunk_frames,
            "use_weight_norm": self.use_weight_norm,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        d = dict(d)
        d["upsample_factors"] = tuple(d.get("upsample_factors", UPSAMPLE_FACTORS))
        d["resblock_kernel_sizes"] = tuple(d.get("resblock_kernel_sizes", (3, 7, 11)))
        d["resblock_dilations"] = tuple(
            tuple(x) for x in d.get("resblock_dilations", ((1, 3, 5),) * 3)
        )
        return cls(**d)


def _maybe_norm(module: nn.Module, enabled: bool) -> nn.Module:
    return weight_norm(module) if enabled else module


class ResidualBlock(nn.Module):
    """Two-layer dilated residual stack (one per dilation value)."""

    def __init__(self, channels: int, kernel_size: int, dilations, use_weight_norm: bool = True):
        super().__init__()
        self.convs1 = nn.ModuleList()
        self.convs2 = nn.ModuleList()
        for d in dilations:
            self.convs1.append(
                _maybe_norm(
                    nn.Conv1d(
                        channels,
                        channels,
                        kernel_size,
                        dilation=d,
                        padding=(kernel_size - 1) * d // 2,
                    ),
                    use_weight_norm,
                )
            )
            self.convs2.append(
                _maybe_norm(
                    nn.Conv1d(channels, channels, kernel_size, padding=(kernel_size - 1) // 2),
                    use_weight_norm,
                )
            )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        for c1, c2 in zip(self.convs1, self.convs2):
            xt = c1(F.leaky_relu(x, LRELU_SLOPE))
            xt = c2(F.leaky_relu(xt, LRELU_SLOPE))
            x = x + xt
        return x


class HistoryEncoder(nn.Module):
    """Summarize the previous ar_context samples into one conditioning vector.

    Strided conv stack followed by a global average, so any positive context
    length maps to a fixed-size embedding.
    """

    def __init__(self, out_channels: int, use_weight_norm: bool = True):
        super().__init__()
        widths = (1, max(out_channels // 2, 8), max(out_channels // 2, 8), out_channels)
        self.convs = nn.ModuleList(
            _maybe_norm(
                nn.Conv1d(widths[i], widths[i + 1], kernel_size=9, stride=4, padding=4),
                use_weight_norm,
            )
            for i in range(3)
        )

    def forward(self, history: torch.Tensor) -> torch.Tensor:
        # history: [B x context] -> [B x C]
        x = history.unsqueeze(1)
        for conv in self.convs:
            x = F.leaky_relu(conv(x), LRELU_SLOPE)
        return x.mean(dim=2)


class HifiCarGenerator(nn.Module):
    """Feature-to-waveform generator with optional sample-history conditioning."""

    def __init__(self, config: GeneratorConfig):
        super().__init__()
        self.config = config
        wn = config.use_weight_norm
        in_channels = config.input_dim + (config.history_channels if config.ar_context > 0 else 0)

        self.history_encoder = (
            HistoryEncoder(config.history_channels, use_weight_norm=wn)
            if config.ar_context > 0
            else None
        )
        self.conv_pre = _maybe_norm(
            nn.Conv1d(in_channels, config.initial_channels, 7, padding=3), wn
        )

        self.ups = nn.ModuleList()
        self.resblocks = nn.ModuleList()
        ch = config.initial_channels
        for s in config.upsample_factors:
            self.ups.append(
                _maybe_norm(
                    nn.ConvTranspose1d(
                        ch,
                        ch // 2,
                        kernel_size=2 * s,
                        stride=s,
                        padding=s // 2 + s % 2,
                        output_padding=s % 2,
                    ),
                    wn,
                )
            )
            ch //= 2
            for k, dils in zip(config.resblock_kernel_sizes, config.resblock_dilations):
                self.resblocks.append(ResidualBlock(ch, k, dils, use_weight_norm=wn))
        self.num_kernels = len(config.resblock_kernel_sizes)
        self.conv_post = _maybe_norm(nn.Conv1d(ch, 1, 7, padding=3), wn)

    def forward(self, features: torch.Tensor, history: torch.Tensor | None = None) -> torch.Tensor:
        """features [B x D x T], history [B x ar_context] -> audio [B x 1 x T*240].

        history defaults to zeros (utterance start). With ar_context = 0 any
        provided history must be empty.
        """
        if features.dim() != 3 or features.size(1) != self.config.input_dim:
            raise ShapeError(
                f"expected features [B x {self.config.input_dim} x T], got {tuple(features.shape)}"
            )
        b, _, t = features.shape
        x = features
        if self.config.ar_context > 0:
            if history is None:
                history = features.new_zeros(b, self.config.ar_context)
            if history.dim() != 2 or history.size(1) != self.config.ar_context:
                raise ShapeError(
                    f"expected history [B x {self.config.ar_context}], got {tuple(history.shape)}"
                )
            cond = self.history_encoder(history)
            x = torch.cat([x, cond.unsqueeze(2).expand(b, cond.size(1), t)], dim=1)
        elif history is not None and history.numel() > 0:
            raise ShapeError("history given but ar_context is 0")

        x = self.conv_pre(x)
        for i, up in enumerate(self.ups):
            x = up(F.leaky_relu(x, LRELU_SLOPE))
            acc = None
            for j in range(self.num_kernels):
                out = self.resblocks[i * self.num_kernels + j](x)
                acc = out if acc is None else acc + out
            x = acc / self.num_kernels
        x = self.conv_post(F.leaky_relu(x, LRELU_SLOPE))
        return torch.tanh(x)

    @torch.no_grad()
    def generate(self, features, chunk_frames: int | None = None) -> np.ndarray:
        """Free-running chunked synthesis; returns float32 samples [T*240].

        features: [T x D] array or tensor (single utterance). Each chunk is
        conditioned on the last ar_context samples it has itself produced
        (zeros before the first chunk). With ar_context = 0 this is a single
        non-autoregressive forward pass.
        """
        was_training = self.training
        self.eval()
        try:
            feats = torch.as_tensor(np.asarray(features, dtype=np.float32))
            if feats.dim() != 2 or feats.size(1) != self.config.input_dim:
                raise ShapeError(
                    f"expected features [T x {self.config.input_dim}], got {tuple(feats.shape)}"
                )
            device = next(self.parameters()).device
            feats = feats.t().unsqueeze(0).to(device)  # [1 x D x T]
            t = feats.size(2)
            if self.config.ar_context == 0:
                out = self.forward(feats)
                return out.squeeze(0).squeeze(0).cpu().numpy().astype(np.float32)

            chunk = int(chunk_frames or self.config.chunk_frames)
            if chunk < 1:
                raise ConfigurationError(f"chunk_frames must be >= 1, got {chunk}")
            ctx = self.config.ar_context
            pieces = []
            tail = feats.new_zeros(1, ctx)
            for start in range(0, t, chunk):
                seg = feats[:, :, start : start + chunk]
                y = self.forward(seg, history=tail).squeeze(1)  # [1 x n]
                pieces.append(y)
                joined = torch.cat([tail, y], dim=1)
                tail = joined[:, -ctx:]
            out = torch.cat(pieces, dim=1)
            return out.squeeze(0).cpu().numpy().astype(np.float32)
        finally:
            self.train(was_training)


def synthesize_utterance(model: HifiCarGenerator, traj, chunk_frames: int | None = None) -> audio.Waveform:
    """Run free-running generation on a trajectory, wrapped as a Waveform."""
    data = traj.data if hasattr(traj, "data") else traj
    samples = model.generate(data, chunk_frames=chunk_frames)
    return audio.Waveform(samples=samples, sample_rate=audio.SAMPLE_RATE, provenance="synthesized")


def count_params(model: nn.Module) -> int:
    """Total trainable scalar parameters."""
    return sum(p.numel() for p in model.parameters() if p.requires_grad)


def full_generator_config(input_dim: int = 230) -> GeneratorConfig:
    """Full-scale configuration (order 1.5e7 parameters at 230-dim input)."""
    return GeneratorConfig(input_dim=input_dim, initial_channels=512, history_channels=64)


def toy_generator_config(input_dim: int = 230, ar_context: int = AR_CONTEXT) -> GeneratorConfig:
    """Minutes-not-hours configuration for tests and desk runs."""
    return GeneratorConfig(
        input_dim=input_dim,
        initial_channels=32,
        resblock_kernel_sizes=(3, 7),
        resblock_dilations=((1, 3), (1, 3)),
        ar_context=ar_context,
        history_channels=16,
        chunk_frames=4,
    )
