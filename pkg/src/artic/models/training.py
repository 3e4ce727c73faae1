"""Adversarial and supervised training loops.

The GAN recipe: least-squares adversarial losses against multi-period and
multi-scale discriminators, feature matching (weight 2.0), and an L1 mel
reconstruction term (weight 45.0). Optimizers are Adam (lr 2e-4, betas
0.8/0.99) with per-step exponential decay.

Training is teacher-forced: each batch crops a random frame window from a
(trajectory, target) pair, and the history fed to the generator is the slice
of *ground-truth* target audio immediately before the window (zeros at
utterance start). Free-running generation only happens at inference.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .. import audio
from ..errors import ConfigurationError, TrainingDivergedError
from .cbl import CblConfig, CblModel
from .discriminators import (
    DiscriminatorConfig,
    MultiPeriodDiscriminator,
    MultiScaleDiscriminator,
)
from .generator import GeneratorConfig, HifiCarGenerator

ADAM_BETAS = (0.8, 0.99)
LEARNING_RATE = 2e-4
LR_DECAY = 0.999
FM_WEIGHT = 2.0
MEL_WEIGHT = 45.0


class TorchMel(nn.Module):
    """Differentiable log-mel spectrogram matching the numpy extractor.

    Same framing convention: F = ceil(N / hop), tail zero-padded to whole
    blocks, reflect-padded (n_fft - hop) // 2 per side, periodic Hann window,
    magnitude-squared spectrum, unit-peak triangular mel weights, log floor
    1e-10.
    """

    def __init__(
        self,
        hop: int = audio.HOP,
        n_fft: int = audio.N_FFT,
        n_mels: int = audio.N_MELS,
        sample_rate: int = audio.SAMPLE_RATE,
    ):
        super().__init__()
        self.hop = hop
        self.n_fft = n_fft
        window = np.hanning(n_fft + 1)[:-1]
        fbank = audio.mel_filterbank(n_mels=n_mels, n_fft=n_fft, sample_rate=sample_rate)
        self.register_buffer("window", torch.tensor(window, dtype=torch.float32))
        self.register_buffer("fbank", torch.tensor(fbank, dtype=torch.float32))

    def forward(self, wav: torch.Tensor) -> torch.Tensor:
        # wav: [B x N] -> [B x n_mels x F]
        if wav.dim() == 3:
            wav = wav.squeeze(1)
        n = wav.size(1)
        num_frames = -(-n // self.hop)
        tail = num_frames * self.hop - n
        if tail:
            wav = F.pad(wav, (0, tail))
        side = (self.n_fft - self.hop) // 2
        odd = (self.n_fft - self.hop) % 2
        mode = "reflect" if wav.size(1) > side else "constant"
        wav = F.pad(wav.unsqueeze(1), (side, side + odd), mode=mode).squeeze(1)
        frames = wav.unfold(1, self.n_fft, self.hop)  # [B x F x n_fft]
        spec = torch.fft.rfft(frames * self.window.to(frames.dtype), dim=2)
        power = spec.real**2 + spec.imag**2
        mel = torch.matmul(power, self.fbank.to(power.dtype).t())  # [B x F x n_mels]
        return torch.log(torch.clamp(mel, min=audio.LOG_FLOOR)).transpose(1, 2)


def discriminator_loss(real_logits, fake_logits) -> torch.Tensor:
    """Least-squares loss: real pushed to 1, (detached) fake pushed to 0."""
    loss = 0.0
    for real, fake in zip(real_logits, fake_logits):
        loss = loss + torch.mean((real - 1.0) ** 2) + torch.mean(fake**2)
    return loss


def adversarial_loss(fake_logits) -> torch.Tensor:
    """Least-squares generator loss: fake pushed to 1."""
    loss = 0.0
    for fake in fake_logits:
        loss = loss + torch.mean((fake - 1.0) ** 2)
    return loss


def feature_matching_loss(real_fmaps, fake_fmaps) -> torch.Tensor:
    loss = 0.0
    for real_list, fake_list in zip(real_fmaps, fake_fmaps):
        for real, fake in zip(real_list, fake_list):
            loss = loss + F.l1_loss(fake, real.detach())
    return loss


@dataclass(eq=False)
class TrainConfig:
    steps: int = 1000
    batch_size: int = 2
    segment_frames: int = 32
    learning_rate: float = LEARNING_RATE
    adam_betas: tuple = ADAM_BETAS
    lr_decay: float = LR_DECAY
    fm_weight: float = FM_WEIGHT
    mel_weight: float = MEL_WEIGHT
    checkpoint_every: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.steps < 0:
            raise ConfigurationError(f"steps must be >= 0, got {self.steps}")
        if self.batch_size < 1 or self.segment_frames < 1:
            raise ConfigurationError("batch_size and segment_frames must be >= 1")
        if self.checkpoint_every < 1:
            raise ConfigurationError("checkpoint_every must be >= 1")

    def to_dict(self) -> dict:
        return {
            "steps": self.steps,
            "batch_size": self.batch_size,
            "segment_frames": self.segment_frames,
            "learning_rate": self.learning_rate,
            "adam_betas": list(self.adam_betas),
            "lr_decay": self.lr_decay,
            "fm_weight": self.fm_weight,
            "mel_weight": self.mel_weight,
            "checkpoint_every": self.checkpoint_every,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        if "adam_betas" in d:
            d["adam_betas"] = tuple(d["adam_betas"])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigurationError(f"bad training config: {exc}") from exc


@dataclass(eq=False)
class TrainState:
    """Everything the GAN loop owns: models, optimizers, schedulers, step."""

    step: int
    generator: HifiCarGenerator
    mpd: MultiPeriodDiscriminator
    msd: MultiScaleDiscriminator
    optim_g: torch.optim.Optimizer
    optim_d: torch.optim.Optimizer
    sched_g: torch.optim.lr_scheduler.LRScheduler
    sched_d: torch.optim.lr_scheduler.LRScheduler
    config: TrainConfig
    mel: TorchMel = field(default_factory=TorchMel)
    loss_rows: list = field(default_factory=list)


def make_train_state(
    gen_config: GeneratorConfig,
    disc_config: DiscriminatorConfig | None = None,
    train_config: TrainConfig | None = None,
) -> TrainState:
    """Deterministically initialize models and optimizers from the seed."""
    train_config = train_config or TrainConfig()
    torch.manual_seed(train_config.seed)
    generator = HifiCarGenerator(gen_config)
    mpd = MultiPeriodDiscriminator(disc_config)
    msd = MultiScaleDiscriminator(disc_config)
    optim_g = torch.optim.Adam(
        generator.parameters(), lr=train_config.learning_rate, betas=train_config.adam_betas
    )
    optim_d = torch.optim.Adam(
        list(mpd.parameters()) + list(msd.parameters()),
        lr=train_config.learning_rate,
        betas=train_config.adam_betas,
    )
    sched_g = torch.optim.lr_scheduler.ExponentialLR(optim_g, gamma=train_config.lr_decay)
    sched_d = torch.optim.lr_scheduler.ExponentialLR(optim_d, gamma=train_config.lr_decay)
    return TrainState(
        step=0,
        generator=generator,
        mpd=mpd,
        msd=msd,
        optim_g=optim_g,
        optim_d=optim_d,
        sched_g=sched_g,
        sched_d=sched_d,
        config=train_config,
    )


def _check_finite(value: torch.Tensor, term: str, step: int):
    if not torch.isfinite(value).all():
        raise TrainingDivergedError(f"{term} loss is non-finite at step {step}")


def _check_params_finite(module: nn.Module, name: str, step: int):
    for pname, p in module.named_parameters():
        if not torch.isfinite(p).all():
            raise TrainingDivergedError(
                f"parameter {name}.{pname} became non-finite after step {step}"
            )


def _sample_batch(dataset, rng, batch_size: int, segment_frames: int, ar_context: int):
    """Crop aligned (features, target, history) windows from random utterances.

    The window length is clamped to the shortest utterance drawn; history is
    target audio preceding the window, zero-padded at utterance start.
    """
    picks = [dataset[int(i)] for i in rng.integers(0, len(dataset), size=batch_size)]
    usable = [min(traj.num_frames, len(wav.samples) // audio.HOP) for traj, wav in picks]
    if min(usable) < 1:
        raise ConfigurationError("an utterance is shorter than one frame of audio")
    seg = min(segment_frames, min(usable))
    feats, targets, histories = [], [], []
    for (traj, wav), t in zip(picks, usable):
        start = int(rng.integers(0, t - seg + 1))
        feats.append(traj.data[start : start + seg].T)
        s0 = start * audio.HOP
        targets.append(wav.samples[s0 : s0 + seg * audio.HOP])
        if ar_context > 0:
            hist = wav.samples[max(0, s0 - ar_context) : s0]
            if len(hist) < ar_context:
                hist = np.concatenate([np.zeros(ar_context - len(hist), dtype=np.float32), hist])
            histories.append(hist)
    features = torch.tensor(np.stack(feats), dtype=torch.float32)
    target = torch.tensor(np.stack(targets), dtype=torch.float32).unsqueeze(1)
    history = (
        torch.tensor(np.stack(histories), dtype=torch.float32) if ar_context > 0 else None
    )
    return features, target, history


class LossLog:
    """CSV loss log: one row per step, one column per term."""

    COLUMNS = ("step", "loss_disc", "loss_gen_adv", "loss_fm", "loss_mel", "loss_gen_total")

    def __init__(self, path=None):
        self.path = Path(path) if path else None
        self.rows = []
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.path, "w", newline="", encoding="utf-8")
            self._writer = csv.writer(self._fh)
            self._writer.writerow(self.COLUMNS)
        else:
            self._fh = None

    def append(self, step, **terms):
        row = [step] + [float(terms[c]) for c in self.COLUMNS[1:]]
        self.rows.append(row)
        if self._fh:
            self._writer.writerow([f"{v:.8g}" if isinstance(v, float) else v for v in row])
            self._fh.flush()

    def close(self):
        if self._fh:
            self._fh.close()
            self._fh = None


def train_gan(
    dataset,
    state: TrainState,
    steps: int | None = None,
    log_path=None,
    checkpoint_dir=None,
) -> TrainState:
    """Run the adversarial loop for `steps` optimizer steps.

    dataset: sequence of (ArticulatoryTrajectory, Waveform) pairs; targets
    should come from mix_targets. Deterministic given the config seed: each
    step reseeds its own crop and torch RNG from (seed, step), so resumed and
    straight-through runs produce identical losses. Raises
    TrainingDivergedError naming the term and step on any non-finite loss.
    """
    if not dataset:
        raise ConfigurationError("training dataset is empty")
    cfg = state.config
    steps = cfg.steps if steps is None else steps
    ar_context = state.generator.config.ar_context
    device = next(state.generator.parameters()).device
    state.mel.to(device)
    state.mpd.to(device)
    state.msd.to(device)
    log = LossLog(log_path)
    ckpt_dir = Path(checkpoint_dir) if checkpoint_dir else None

    try:
        for _ in range(steps):
            step = state.step + 1
            rng = np.random.default_rng((cfg.seed, step))
            torch.manual_seed((cfg.seed * 1_000_003 + step) % (2**63))
            features, target, history = _sample_batch(
                dataset, rng, cfg.batch_size, cfg.segment_frames, ar_context
            )
            features = features.to(device)
            target = target.to(device)
            history = history.to(device) if history is not None else None

            fake = state.generator(features, history=history)

            # discriminator step sees the generator output as a constant
            state.optim_d.zero_grad()
            fake_detached = fake.detach()
            real_logits_p, _ = state.mpd(target)
            fake_logits_p, _ = state.mpd(fake_detached)
            real_logits_s, _ = state.msd(target)
            fake_logits_s, _ = state.msd(fake_detached)
            loss_d = discriminator_loss(real_logits_p, fake_logits_p) + discriminator_loss(
                real_logits_s, fake_logits_s
            )
            _check_finite(loss_d, "discriminator", step)
            loss_d.backward()
            state.optim_d.step()

            state.optim_g.zero_grad()
            real_logits_p, real_fmaps_p = state.mpd(target)
            fake_logits_p, fake_fmaps_p = state.mpd(fake)
            real_logits_s, real_fmaps_s = state.msd(target)
            fake_logits_s, fake_fmaps_s = state.msd(fake)
            loss_adv = adversarial_loss(fake_logits_p) + adversarial_loss(fake_logits_s)
            loss_fm = feature_matching_loss(real_fmaps_p, fake_fmaps_p) + feature_matching_loss(
                real_fmaps_s, fake_fmaps_s
            )
            loss_mel = F.l1_loss(state.mel(fake), state.mel(target))
            _check_finite(loss_adv, "adversarial", step)
            _check_finite(loss_fm, "feature-matching", step)
            _check_finite(loss_mel, "mel-reconstruction", step)
            loss_g = loss_adv + cfg.fm_weight * loss_fm + cfg.mel_weight * loss_mel
            loss_g.backward()
            state.optim_g.step()
            state.sched_g.step()
            state.sched_d.step()

            _check_params_finite(state.generator, "generator", step)
            state.step = step
            log.append(
                step,
                loss_disc=loss_d.item(),
                loss_gen_adv=loss_adv.item(),
                loss_fm=loss_fm.item(),
                loss_mel=loss_mel.item(),
                loss_gen_total=loss_g.item(),
            )

            if ckpt_dir and step % cfg.checkpoint_every == 0:
                save_train_checkpoint(state, ckpt_dir / f"step-{step:06d}.ckpt")
    finally:
        log.close()
    state.loss_rows = state.loss_rows + log.rows
    return state


def save_train_checkpoint(state: TrainState, path, meta: dict | None = None) -> None:
    from .checkpoint import save_checkpoint

    tensors = {}
    for prefix, module in (
        ("generator", state.generator),
        ("mpd", state.mpd),
        ("msd", state.msd),
    ):
        for name, tensor in module.state_dict().items():
            tensors[f"{prefix}.{name}"] = tensor
    full_meta = {
        "step": state.step,
        "generator_config": state.generator.config.to_dict(),
        "train_config": state.config.to_dict(),
    }
    full_meta.update(meta or {})
    save_checkpoint(tensors, path, meta=full_meta)


def load_generator(path) -> tuple:
    """Rebuild a generator from a training checkpoint; returns (model, meta)."""
    from .checkpoint import load_checkpoint

    tensors, meta = load_checkpoint(path)
    if "generator_config" not in meta:
        raise ConfigurationError(f"{path}: checkpoint meta lacks generator_config")
    model = HifiCarGenerator(GeneratorConfig.from_dict(meta["generator_config"]))
    state = {
        name[len("generator.") :]: torch.as_tensor(arr)
        for name, arr in tensors.items()
        if name.startswith("generator.")
    }
    model.load_state_dict(state)
    model.eval()
    return model, meta


def train_cbl(
    dataset,
    config: CblConfig,
    train_config: TrainConfig | None = None,
    log_path=None,
) -> CblModel:
    """Supervised L1 training of the conv-BiLSTM mel predictor."""
    if not dataset:
        raise ConfigurationError("training dataset is empty")
    cfg = train_config or TrainConfig()
    torch.manual_seed(cfg.seed)
    model = CblModel(config)
    optim = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate, betas=cfg.adam_betas)
    sched = torch.optim.lr_scheduler.ExponentialLR(optim, gamma=cfg.lr_decay)
    mel = TorchMel()

    log = LossLog(log_path)
    try:
        for i in range(cfg.steps):
            step = i + 1
            rng = np.random.default_rng((cfg.seed, step))
            torch.manual_seed((cfg.seed * 1_000_003 + step) % (2**63))
            features, target, _ = _sample_batch(
                dataset, rng, cfg.batch_size, cfg.segment_frames, ar_context=0
            )
            pred = model(features)
            loss = F.l1_loss(pred, mel(target))
            _check_finite(loss, "mel-regression", step)
            optim.zero_grad()
            loss.backward()
            optim.step()
            sched.step()
            _check_params_finite(model, "cbl", step)
            log.append(
                step,
                loss_disc=math.nan,
                loss_gen_adv=math.nan,
                loss_fm=math.nan,
                loss_mel=loss.item(),
                loss_gen_total=loss.item(),
            )
    finally:
        log.close()
    model.loss_rows = log.rows
    return model
