"""Procedurally generated miniature corpus for desk-scale end-to-end runs.

Ten-ish short utterances of harmonic tones paired with smoothly oscillating
contour sequences, written in the same manifest/contour/WAV layout as real
data. The "enhanced" track is the clean tone; the "original" track adds
noise, so target mixing has something to do.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import audio
from .features import ContourSequence, default_feature_config
from .ingest import write_contours

_WORDS = (
    "low", "high", "rising", "falling", "steady", "bright",
    "soft", "long", "short", "double", "tone", "sweep",
)


def _contour_frames(rng: np.random.Generator, t: int, n_points: int) -> np.ndarray:
    """Smooth per-point oscillation around a fixed layout, inside the grid."""
    base = rng.uniform(12.0, 72.0, size=(n_points, 2))
    amp = rng.uniform(0.5, 3.0, size=(n_points, 2))
    freq = rng.uniform(0.5, 3.0, size=(n_points, 2))
    phase = rng.uniform(0.0, 2 * np.pi, size=(n_points, 2))
    times = np.arange(t)[:, None, None] / audio.FRAME_RATE
    frames = base + amp * np.sin(2 * np.pi * freq * times + phase)
    return np.clip(frames, 0.0, float(84))


def _tone(rng: np.random.Generator, n_samples: int, sample_rate: int) -> np.ndarray:
    """Two-harmonic tone with a wandering pitch and a fade envelope."""
    t = np.arange(n_samples) / sample_rate
    f0 = rng.uniform(110.0, 220.0)
    sweep = rng.uniform(-40.0, 40.0)
    phase = 2 * np.pi * (f0 * t + 0.5 * sweep * t**2 / t[-1] if n_samples > 1 else f0 * t)
    wave = 0.6 * np.sin(phase) + 0.25 * np.sin(2 * phase + rng.uniform(0, np.pi))
    edge = min(int(0.02 * sample_rate), max(n_samples // 4, 1))
    env = np.ones(n_samples)
    ramp = np.linspace(0.0, 1.0, edge)
    env[:edge] = ramp
    env[-edge:] = ramp[::-1]
    return (0.45 * wave * env).astype(np.float32)


def make_synthetic_corpus(
    root,
    n_utterances: int = 10,
    seed: int = 0,
    duration_range: tuple = (1.0, 2.0),
    n_points: int = 170,
) -> Path:
    """Write contours, WAVs, and a manifest under root; returns manifest path."""
    root = Path(root)
    (root / "contours").mkdir(parents=True, exist_ok=True)
    (root / "wav").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    labels = list(default_feature_config().segment_labels)[:n_points]

    entries = []
    for i in range(n_utterances):
        uid = f"synth-{i:03d}"
        duration = float(rng.uniform(*duration_range))
        t = max(int(np.rint(duration * audio.FRAME_RATE)), 9)
        n_samples = t * audio.HOP  # exact frame alignment, zero duration drift

        seq = ContourSequence(
            utterance_id=uid,
            frames=_contour_frames(rng, t, n_points),
            segment_labels=labels,
        )
        contour_rel = f"contours/{uid}.artj"
        write_contours(seq, root / contour_rel)

        clean = _tone(rng, n_samples, audio.SAMPLE_RATE)
        noisy = clean + rng.normal(0.0, 0.02, size=n_samples).astype(np.float32)
        enhanced_rel = f"wav/{uid}-enhanced.wav"
        original_rel = f"wav/{uid}-original.wav"
        audio.write_wav(
            audio.Waveform(clean, audio.SAMPLE_RATE, provenance="enhanced"),
            root / enhanced_rel,
        )
        audio.write_wav(
            audio.Waveform(np.clip(noisy, -1.0, 1.0), audio.SAMPLE_RATE, provenance="original"),
            root / original_rel,
        )

        transcript = " ".join(rng.choice(_WORDS, size=4).tolist())
        entries.append(
            {
                "id": uid,
                "contours": contour_rel,
                "original_wav": original_rel,
                "enhanced_wav": enhanced_rel,
                "transcript": transcript,
            }
        )

    manifest = {
        "frame_rate": audio.FRAME_RATE,
        "num_points": n_points,
        "segment_labels": labels,
        "utterances": entries,
    }
    manifest_path = root / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest_path
