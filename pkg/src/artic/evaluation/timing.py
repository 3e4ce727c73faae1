"""Wall-clock benchmarking of synthesis inference.

The headline protocol: five trials, each measuring the mean time to
synthesize one utterance over the whole test set, reported as mean +/- std
across trials. A warm-up call runs first and is never counted, so one-time
costs (lazy allocations, first-use compilation, fake model loads) stay out of
the numbers. Results are hardware-dependent by nature; the harness must run
serially on an otherwise idle device.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, DeviceError

TRIALS = 5


@dataclass(eq=False)
class TimingResult:
    """Per-trial mean seconds per utterance, plus device and model size."""

    trial_means: list
    device: str = "cpu"
    param_count: int = 0
    warmup_seconds: float = 0.0

    @property
    def mean(self) -> float:
        return float(np.mean(self.trial_means))

    @property
    def std(self) -> float:
        return float(np.std(self.trial_means))

    def to_dict(self) -> dict:
        return {
            "trial_mean_seconds": [float(t) for t in self.trial_means],
            "mean_seconds": self.mean,
            "std_seconds": self.std,
            "device": self.device,
            "param_count": int(self.param_count),
            "warmup_seconds": float(self.warmup_seconds),
            "trials": len(self.trial_means),
        }


def _resolve_synthesis(model):
    if callable(getattr(model, "generate", None)):
        return model.generate
    if callable(model):
        return model
    raise ConfigurationError("model must be callable or expose generate()")


def benchmark_inference(model, test_set, device: str = "cpu", trials: int = TRIALS) -> TimingResult:
    """Time model inference over the test set, `trials` times.

    test_set: sequence of per-utterance inputs (trajectories or arrays).
    Each trial's record is the mean wall-clock seconds per utterance. One
    warm-up call on the first utterance precedes timing and is excluded.
    """
    inputs = list(test_set)
    if not inputs:
        raise ConfigurationError("benchmark needs a non-empty test set")
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")

    param_count = 0
    try:
        import torch

        if isinstance(model, torch.nn.Module):
            if device.startswith("cuda") and not torch.cuda.is_available():
                raise DeviceError(f"device {device!r} requested but CUDA is unavailable")
            model = model.to(device)
            param_count = sum(p.numel() for p in model.parameters() if p.requires_grad)
    except ImportError:  # pragma: no cover - torch is a hard dependency
        pass

    fn = _resolve_synthesis(model)
    data = [x.data if hasattr(x, "data") else x for x in inputs]

    t0 = time.perf_counter()
    fn(data[0])
    warmup = time.perf_counter() - t0

    trial_means = []
    for _ in range(trials):
        t0 = time.perf_counter()
        for x in data:
            fn(x)
        trial_means.append((time.perf_counter() - t0) / len(data))
    return TimingResult(
        trial_means=trial_means, device=device, param_count=param_count, warmup_seconds=warmup
    )


@dataclass(eq=False)
class TimingReport:
    """Low-level per-call timings with warm-up excluded (helper for tools)."""

    seconds: list
    warmup_seconds: list = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.seconds))

    @property
    def std(self) -> float:
        return float(np.std(self.seconds))


def benchmark(fn, inputs, warmup: int = 1) -> TimingReport:
    """Time fn(x) per input, excluding the first `warmup` calls from stats."""
    inputs = list(inputs)
    if warmup < 0:
        raise ConfigurationError(f"warmup must be >= 0, got {warmup}")
    if not inputs:
        raise ConfigurationError("benchmark needs at least one input")
    warm_times = []
    for i in range(warmup):
        x = inputs[i % len(inputs)]
        t0 = time.perf_counter()
        fn(x)
        warm_times.append(time.perf_counter() - t0)
    times = []
    for x in inputs:
        t0 = time.perf_counter()
        fn(x)
        times.append(time.perf_counter() - t0)
    return TimingReport(seconds=times, warmup_seconds=warm_times)
