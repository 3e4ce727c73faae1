"""Deep-feature extraction boundary and rate alignment.

Self-supervised speech encoders run at their own frame rates; the pipeline
needs features frame-synchronous with the 83 Hz articulatory stream. The
extractor is a pluggable client (keeping multi-GB pretrained models out of
the test path); alignment is linear interpolation with preserved endpoints.
"""

from __future__ import annotations

import json
import subprocess
import tempfile
from pathlib import Path

import numpy as np

from .. import audio
from ..errors import ShapeError, TransportError


class DeepFeatureClient:
    """Interface: waveform -> ([T' x D'] float array, source frame rate Hz)."""

    def extract(self, wav: audio.Waveform):
        raise NotImplementedError


class StubDeepFeatureClient(DeepFeatureClient):
    """Deterministic stand-in: a seeded random projection of the mel spectrum.

    Emits every other mel frame, so the source rate (41.5 Hz) genuinely
    differs from the articulatory rate and exercises interpolation.
    """

    def __init__(self, dim: int = 64, seed: int = 0):
        self.dim = dim
        rng = np.random.default_rng(seed)
        self._projection = rng.standard_normal((audio.N_MELS, dim)) / np.sqrt(audio.N_MELS)

    def extract(self, wav: audio.Waveform):
        mel = audio.melspectrogram(wav)
        feats = mel.values.T @ self._projection  # [F x dim]
        return feats[::2].astype(np.float32), audio.FRAME_RATE / 2.0


class SubprocessDeepFeatureClient(DeepFeatureClient):
    """Runs `cmd <in.wav> <out-file>`; the command writes the feature matrix
    to out-file in the trajectory container format and prints a JSON object
    {"source_rate": <Hz>} on stdout.
    """

    def __init__(self, command, timeout: float = 600.0):
        if isinstance(command, str):
            command = [command]
        self.command = list(command)
        self.timeout = timeout

    def extract(self, wav: audio.Waveform):
        from ..ingest import read_trajectory

        with tempfile.TemporaryDirectory(prefix="deepfeat-") as tmp:
            wav_path = Path(tmp) / "in.wav"
            out_path = Path(tmp) / "out.artj"
            audio.write_wav(wav, wav_path)
            try:
                proc = subprocess.run(
                    self.command + [str(wav_path), str(out_path)],
                    capture_output=True,
                    text=True,
                    timeout=self.timeout,
                )
            except FileNotFoundError as exc:
                raise TransportError(f"extractor command not found: {self.command[0]}") from exc
            except subprocess.TimeoutExpired as exc:
                raise TransportError(f"extractor timed out after {self.timeout}s") from exc
            if proc.returncode != 0:
                raise TransportError(
                    f"extractor exited {proc.returncode}: {proc.stderr.strip()[:500]}"
                )
            try:
                rate = float(json.loads(proc.stdout)["source_rate"])
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise TransportError(
                    f"extractor stdout is not a source_rate object: {proc.stdout[:200]!r}"
                ) from exc
            traj = read_trajectory(out_path)
        return traj.data.astype(np.float32), rate


def deep_feature_interpolate(
    features: np.ndarray,
    source_rate: float,
    target_rate: float = audio.FRAME_RATE,
    num_frames: int | None = None,
) -> np.ndarray:
    """Linearly resample [T' x D'] features in time, preserving endpoints.

    The output grid spans exactly the source time range [0, (T'-1)/rate] with
    round((T'-1) * target/source) + 1 uniformly spaced frames (or num_frames
    when given), so the first and last source frames pass through unchanged.
    Equal rates reduce to the identity.
    """
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 2:
        raise ShapeError(f"features must be [T x D], got shape {feats.shape}")
    t_src = feats.shape[0]
    if t_src < 2:
        raise ShapeError(f"need at least 2 source frames to interpolate, got {t_src}")
    if num_frames is None:
        num_frames = int(np.rint((t_src - 1) * target_rate / source_rate)) + 1
    if num_frames < 1:
        raise ShapeError(f"num_frames must be >= 1, got {num_frames}")
    positions = np.linspace(0.0, t_src - 1, num_frames)
    src_grid = np.arange(t_src, dtype=np.float64)
    out = np.empty((num_frames, feats.shape[1]))
    for d in range(feats.shape[1]):
        out[:, d] = np.interp(positions, src_grid, feats[:, d])
    return out.astype(np.float32)
