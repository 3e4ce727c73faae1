"""Waveform handling: PCM I/O, resampling, target mixing, mel spectrograms.

All model-facing audio is mono at 20 kHz. Articulatory features arrive at
83 frames/s; the toolkit pins the frame-to-sample ratio to exactly 240
samples per frame (the mel hop), absorbing the ~0.4% drift against the true
20000/83 ratio by tail-trimming per utterance (see ``reconcile_lengths``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .errors import AlignmentError, FormatError, LoadError, SchemaError, ShapeError

SAMPLE_RATE = 20_000
FRAME_RATE = 83.0
HOP = 240
N_FFT = 1024
N_MELS = 80
FMIN = 0.0
FMAX = 8_000.0
LOG_FLOOR = 1e-10

# Target waveforms mix the studio-enhanced track with the raw recording;
# the small original share smooths enhancement artifacts into learnable
# targets.
ENHANCED_WEIGHT = 0.9
ORIGINAL_WEIGHT = 0.1

PROVENANCES = ("original", "enhanced", "mixed", "synthesized")


@dataclass(eq=False)
class Waveform:
    """Mono PCM sample sequence with a provenance tag.

    samples are float32 in [-1, 1] (soft expectation; hard-clipped only on
    file write).
    """

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE
    provenance: str = "original"

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float32)
        if self.samples.ndim != 1:
            raise ShapeError(f"waveform must be 1-D, got shape {self.samples.shape}")
        if not np.all(np.isfinite(self.samples)):
            raise ShapeError("waveform contains non-finite samples")
        if self.sample_rate <= 0:
            raise ShapeError(f"sample rate must be positive, got {self.sample_rate}")
        if self.provenance not in PROVENANCES:
            raise SchemaError(f"unknown provenance {self.provenance!r}")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(eq=False)
class MelSpectrogram:
    """Log-magnitude mel energies, shape [n_mels x F], F = ceil(N / hop)."""

    values: np.ndarray
    hop: int = HOP
    n_fft: int = N_FFT
    sample_rate: int = SAMPLE_RATE

    @property
    def num_frames(self) -> int:
        return self.values.shape[1]


def read_wav(path, expected_rate: int | None = None, provenance: str = "original") -> Waveform:
    """Read a 16-bit PCM mono WAV file as float32 in [-1, 1]."""
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError as exc:
        raise LoadError(f"audio file not found: {path}") from exc
    except ValueError as exc:
        raise FormatError(f"unreadable WAV file {path}: {exc}") from exc
    if data.ndim != 1:
        raise FormatError(f"{path}: expected mono audio, got {data.ndim} channels")
    if data.dtype != np.int16:
        raise FormatError(f"{path}: expected 16-bit PCM, got dtype {data.dtype}")
    if expected_rate is not None and rate != expected_rate:
        raise FormatError(f"{path}: expected {expected_rate} Hz, file is {rate} Hz")
    samples = data.astype(np.float32) / 32768.0
    return Waveform(samples, sample_rate=rate, provenance=provenance)


def write_wav(wav: Waveform, path) -> None:
    """Write as 16-bit PCM mono, hard-clipping to the int16 range.

    The scale mirrors read_wav (1/32768) so a read-write cycle is idempotent.
    """
    pcm = np.round(np.asarray(wav.samples, np.float64) * 32768.0)
    pcm = np.clip(pcm, -32768, 32767).astype(np.int16)
    wavfile.write(path, wav.sample_rate, pcm)


def resample(wav: Waveform, target_rate: int) -> Waveform:
    """Band-limited polyphase resampling.

    Output length is round(N * target_rate / source_rate); duration is
    preserved within one sample. Resampling at the identity rate returns the
    samples unchanged.
    """
    if target_rate <= 0:
        raise ShapeError(f"target rate must be positive, got {target_rate}")
    if target_rate == wav.sample_rate:
        return Waveform(wav.samples.copy(), sample_rate=wav.sample_rate, provenance=wav.provenance)
    g = math.gcd(int(target_rate), int(wav.sample_rate))
    up, down = target_rate // g, wav.sample_rate // g
    # padtype="line" extends edges along a fitted line so constant (DC)
    # signals survive the filter without edge roll-off.
    out = resample_poly(wav.samples.astype(np.float64), up, down, padtype="line")
    n_out = int(np.rint(len(wav.samples) * target_rate / wav.sample_rate))
    out = out[:n_out]  # polyphase yields ceil(); pin length to round()
    return Waveform(out.astype(np.float32), sample_rate=target_rate, provenance=wav.provenance)


def mix_targets(enhanced: Waveform, original: Waveform) -> Waveform:
    """Blend enhanced and original tracks into the training target.

    out[i] = 0.9 * enhanced[i] + 0.1 * original[i]. Inputs must already share
    length and rate (the ingest step resamples and trims). The convex weights
    keep |out| <= 1 whenever both inputs are in range.
    """
    if enhanced.sample_rate != original.sample_rate:
        raise AlignmentError(
            f"rate mismatch: enhanced {enhanced.sample_rate} Hz vs original {original.sample_rate} Hz"
        )
    if len(enhanced) != len(original):
        raise AlignmentError(
            f"length mismatch: enhanced {len(enhanced)} vs original {len(original)} samples"
        )
    mixed = ENHANCED_WEIGHT * enhanced.samples + ORIGINAL_WEIGHT * original.samples
    return Waveform(mixed.astype(np.float32), sample_rate=enhanced.sample_rate, provenance="mixed")


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(
    n_mels: int = N_MELS,
    n_fft: int = N_FFT,
    sample_rate: int = SAMPLE_RATE,
    fmin: float = FMIN,
    fmax: float = FMAX,
) -> np.ndarray:
    """Triangular mel filterbank, shape [n_mels x (n_fft // 2 + 1)].

    Band edges are spaced uniformly on the mel scale between fmin and fmax.
    Triangles are unit-peak (no area normalization).
    """
    n_bins = n_fft // 2 + 1
    fft_freqs = np.linspace(0.0, sample_rate / 2.0, n_bins)
    mel_edges = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2)
    hz_edges = mel_to_hz(mel_edges)

    fb = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        left, center, right = hz_edges[m], hz_edges[m + 1], hz_edges[m + 2]
        rising = (fft_freqs - left) / max(center - left, 1e-12)
        falling = (right - fft_freqs) / max(right - center, 1e-12)
        fb[m] = np.maximum(0.0, np.minimum(rising, falling))
    return fb


def frame_signal(samples: np.ndarray, hop: int = HOP, n_fft: int = N_FFT) -> np.ndarray:
    """Slice a signal into F = ceil(N / hop) centered frames of n_fft samples.

    The signal is zero-padded at the tail to whole hop blocks, then
    reflect-padded by (n_fft - hop) // 2 on both sides so frame t is centered
    on block t. Signals too short for reflection fall back to zero padding.
    """
    x = np.asarray(samples, dtype=np.float64)
    n = len(x)
    if n == 0:
        raise ShapeError("cannot frame an empty signal")
    num_frames = -(-n // hop)  # ceil
    x = np.pad(x, (0, num_frames * hop - n))
    side = (n_fft - hop) // 2
    mode = "reflect" if len(x) > side else "constant"
    x = np.pad(x, (side, side + (n_fft - hop) % 2), mode=mode)
    strides = (x.strides[0] * hop, x.strides[0])
    frames = np.lib.stride_tricks.as_strided(x, shape=(num_frames, n_fft), strides=strides)
    return frames.copy()


def power_spectra(samples: np.ndarray, hop: int = HOP, n_fft: int = N_FFT) -> np.ndarray:
    """Per-frame power spectra [F x (n_fft // 2 + 1)] under the toolkit framing."""
    frames = frame_signal(samples, hop=hop, n_fft=n_fft)
    window = np.hanning(n_fft + 1)[:-1]  # periodic Hann
    spectra = np.fft.rfft(frames * window, n=n_fft, axis=1)
    return np.abs(spectra) ** 2


def melspectrogram(
    wav: Waveform,
    n_mels: int = N_MELS,
    hop: int = HOP,
    n_fft: int = N_FFT,
    fmin: float = FMIN,
    fmax: float = FMAX,
) -> MelSpectrogram:
    """Log-mel magnitudes [n_mels x F] with F = ceil(len(wav) / hop).

    Values are log(max(mel_power, 1e-10)); an all-zero signal therefore sits
    exactly at the log floor.
    """
    if len(wav) == 0:
        raise ShapeError("cannot compute a mel spectrogram of an empty waveform")
    power = power_spectra(wav.samples, hop=hop, n_fft=n_fft)
    fb = mel_filterbank(n_mels, n_fft, wav.sample_rate, fmin, fmax)
    mel_power = power @ fb.T
    values = np.log(np.maximum(mel_power, LOG_FLOOR)).T
    return MelSpectrogram(values, hop=hop, n_fft=n_fft, sample_rate=wav.sample_rate)


def reconcile_lengths(traj, wav: Waveform, upsample: int = HOP):
    """Tail-trim a trajectory and waveform to a consistent length.

    T' = min(T, floor(len / upsample)); the waveform is trimmed to exactly
    T' * upsample samples. Alignment at the utterance start is fixed by
    segmentation, so only tails are cut.
    """
    t_out = min(traj.data.shape[0], len(wav.samples) // upsample)
    new_traj = traj if traj.data.shape[0] == t_out else replace(traj, data=traj.data[:t_out])
    n_samples = t_out * upsample
    if len(wav.samples) == n_samples:
        new_wav = wav
    else:
        new_wav = Waveform(wav.samples[:n_samples], sample_rate=wav.sample_rate, provenance=wav.provenance)
    return new_traj, new_wav
