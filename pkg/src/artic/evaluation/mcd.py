"""Mel-cepstral distortion between a reference and a synthesized waveform.

Pipeline: frame both signals, take log-amplitude spectra, invert to real
cepstra, warp to the mel axis with the all-pass recursion (alpha = 0.42),
keep coefficients 1..13 (the zeroth is excluded, which makes the metric
invariant to overall gain), align frames with symmetric DTW, and average
Euclidean distances along the path:

    MCD = (10 * sqrt(2) / ln 10) * mean_(i,j) ||c_ref[i] - c_syn[j]||

Reported in dB.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import audio
from ..errors import AlignmentError, ShapeError

MCD_ORDER = 13
MCD_ALPHA = 0.42
MCD_SCALE = 10.0 * np.sqrt(2.0) / np.log(10.0)

# Guards log() against exactly-zero spectrum bins only. Kept far below the
# float64 FFT rounding floor (~1e-14 for unit-scale signals) so a pure gain
# change still maps to an exact zeroth-cepstrum shift at every live bin.
LOG_EPS = 1e-20


def freqt(cepstra: np.ndarray, order: int, alpha: float) -> np.ndarray:
    """All-pass frequency transform of cepstra, vectorized over rows.

    cepstra: [F x n] linear-frequency cepstra. Returns [F x (order + 1)]
    warped cepstra. alpha = 0 is the identity (truncation/padding aside).
    """
    c = np.atleast_2d(np.asarray(cepstra, dtype=np.float64))
    f, n = c.shape
    g = np.zeros((f, order + 1))
    d = np.zeros_like(g)
    beta = 1.0 - alpha * alpha
    for i in range(n - 1, -1, -1):
        d, g = g, d
        g[:, 0] = c[:, i] + alpha * d[:, 0]
        if order >= 1:
            g[:, 1] = beta * d[:, 0] + alpha * d[:, 1]
        for j in range(2, order + 1):
            g[:, j] = d[:, j - 1] + alpha * (d[:, j] - g[:, j - 1])
    return g


def mel_cepstra(
    wav: audio.Waveform,
    order: int = MCD_ORDER,
    alpha: float = MCD_ALPHA,
    hop: int = audio.HOP,
    n_fft: int = audio.N_FFT,
) -> np.ndarray:
    """[F x order] mel-cepstra (coefficients 1..order, zeroth dropped)."""
    frames = audio.frame_signal(wav.samples.astype(np.float64), hop=hop, n_fft=n_fft)
    window = np.hanning(n_fft + 1)[:-1]
    spectra = np.abs(np.fft.rfft(frames * window, axis=1))
    log_mag = np.log(np.maximum(spectra, LOG_EPS))
    cepstra = np.fft.irfft(log_mag, n=n_fft, axis=1)[:, : n_fft // 2 + 1]
    warped = freqt(cepstra, order=order, alpha=alpha)
    return warped[:, 1:]


def dtw_path(ref: np.ndarray, syn: np.ndarray) -> list:
    """Symmetric DTW alignment path between two [F x D] sequences.

    Local steps are diagonal, vertical, horizontal with equal weight; cost is
    frame-pair Euclidean distance. Returns [(i, j)] from (0, 0) to the final
    pair, monotone in both indices.
    """
    ref = np.asarray(ref, dtype=np.float64)
    syn = np.asarray(syn, dtype=np.float64)
    if ref.ndim != 2 or syn.ndim != 2 or ref.shape[1] != syn.shape[1]:
        raise ShapeError(f"DTW inputs must share width: {ref.shape} vs {syn.shape}")
    n, m = ref.shape[0], syn.shape[0]
    if n == 0 or m == 0:
        raise ShapeError("DTW inputs must be non-empty")

    diff = ref[:, None, :] - syn[None, :, :]
    cost = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    acc = np.full((n, m), np.inf)
    acc[0, 0] = cost[0, 0]
    for j in range(1, m):
        acc[0, j] = acc[0, j - 1] + cost[0, j]
    for i in range(1, n):
        acc[i, 0] = acc[i - 1, 0] + cost[i, 0]
        row_prev = acc[i - 1]
        row = acc[i]
        for j in range(1, m):
            row[j] = cost[i, j] + min(row_prev[j - 1], row_prev[j], row[j - 1])

    path = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            candidates = (acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1])
            k = int(np.argmin(candidates))  # prefers diagonal on ties
            if k == 0:
                i, j = i - 1, j - 1
            elif k == 1:
                i -= 1
            else:
                j -= 1
        path.append((i, j))
    path.reverse()
    return path


def mcd_from_cepstra(ref_cep: np.ndarray, syn_cep: np.ndarray) -> float:
    """MCD in dB from precomputed cepstra, DTW-aligned."""
    path = dtw_path(ref_cep, syn_cep)
    ref_cep = np.asarray(ref_cep, dtype=np.float64)
    syn_cep = np.asarray(syn_cep, dtype=np.float64)
    ii = np.fromiter((p[0] for p in path), dtype=np.int64)
    jj = np.fromiter((p[1] for p in path), dtype=np.int64)
    dists = np.linalg.norm(ref_cep[ii] - syn_cep[jj], axis=1)
    return float(MCD_SCALE * dists.mean())


def mcd(ref: audio.Waveform, syn: audio.Waveform, order: int = MCD_ORDER, alpha: float = MCD_ALPHA) -> float:
    """Mel-cepstral distortion (dB) between reference and synthesized audio."""
    if ref.sample_rate != syn.sample_rate:
        raise AlignmentError(
            f"sample rates differ: reference {ref.sample_rate} Hz vs synthesized {syn.sample_rate} Hz"
        )
    return mcd_from_cepstra(
        mel_cepstra(ref, order=order, alpha=alpha),
        mel_cepstra(syn, order=order, alpha=alpha),
    )


def summarize(values) -> tuple:
    """(mean, std) over per-utterance metric values; std is ddof=0."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise ShapeError("no metric values to summarize")
    return float(arr.mean()), float(arr.std())


@dataclass(eq=False)
class McdResult:
    """Per-utterance MCDs (dB) with corpus mean and std."""

    per_utterance: dict

    @property
    def mean(self) -> float:
        return summarize(self.per_utterance.values())[0]

    @property
    def std(self) -> float:
        return summarize(self.per_utterance.values())[1]

    def to_dict(self) -> dict:
        return {
            "per_utterance_db": {k: float(v) for k, v in self.per_utterance.items()},
            "mean_db": self.mean,
            "std_db": self.std,
        }


@dataclass(eq=False)
class CerResult:
    """Per-utterance character error rates with corpus mean and std."""

    per_utterance: dict

    @property
    def mean(self) -> float:
        return summarize(self.per_utterance.values())[0]

    @property
    def std(self) -> float:
        return summarize(self.per_utterance.values())[1]

    def to_dict(self) -> dict:
        return {
            "per_utterance": {k: float(v) for k, v in self.per_utterance.items()},
            "mean": self.mean,
            "std": self.std,
        }
