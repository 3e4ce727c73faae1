"""
Scoring synthesized speech: MCD and character error rate
=========================================================

Mel-cepstral distortion measures spectral distance in dB after aligning
the two utterances with dynamic time warping; character error rate runs
an ASR client over the audio and compares transcripts. Both come with
small, checkable properties demonstrated here.
"""

import numpy as np

from artic import audio
from artic.evaluation import StubAsrClient, cer, mcd, summarize, transcribe
from artic.evaluation.mcd import mel_cepstra


def tone(freq, n, gain=0.3):
    t = np.arange(n) / audio.SAMPLE_RATE
    return audio.Waveform(
        (gain * np.sin(2 * np.pi * freq * t)).astype(np.float32), audio.SAMPLE_RATE
    )


# --- MCD ---------------------------------------------------------------
# Identical signals score exactly zero.
a = tone(220.0, 9600)
print(f"mcd(x, x)          = {mcd(a, a):.6f} dB")

# Loudness is invisible to the metric: the overall gain lands entirely in
# the zeroth cepstral coefficient, which is excluded.
print(f"mcd(x, 0.5x)       = {mcd(a, audio.Waveform(0.5 * a.samples, a.sample_rate)):.2e} dB")

# Different spectra score well above zero.
b = tone(330.0, 9600)
print(f"mcd(220Hz, 330Hz)  = {mcd(a, b):.2f} dB")

# DTW absorbs timing differences: a stretched copy of the same spectrum
# stays much closer than a genuinely different sound.
stretched = tone(220.0, 12000)
print(f"mcd(x, stretched x) = {mcd(a, stretched):.2f} dB")

# The underlying representation is a 13-dim mel-cepstral vector per frame.
print(f"cepstra shape for 9600 samples: {mel_cepstra(a).shape}")

# --- CER ---------------------------------------------------------------
# Edit distance over characters after normalization (lowercase, punctuation
# stripped, whitespace collapsed), divided by the reference length.
print()
print(f"cer exact match     = {cer('the vocal tract', 'The vocal tract!'):.3f}")
print(f"cer one substitution = {cer('abcdef', 'abXdef'):.3f}")
print(f"cer empty hypothesis = {cer('abcd', ''):.3f}")
print(f"cer can exceed 1     = {cer('ab', 'wxyz'):.3f}")

# ASR clients share one interface; the stub cycles canned transcripts and
# stands in for a real recognizer in tests and demos.
asr = StubAsrClient(["the first utterance", "the second utterance"])
hyp = transcribe(a, asr, utterance_id="demo-000")
print(f"stub transcript      = {hyp!r}")

# summarize() aggregates either metric over a test set.
scores = [mcd(tone(220.0, 9600), tone(220.0 + d, 9600)) for d in (0.0, 5.0, 10.0)]
mean, std = summarize(scores)
print(f"mcd over 3 utterances: mean {mean:.3f} dB, std {std:.3f}")
