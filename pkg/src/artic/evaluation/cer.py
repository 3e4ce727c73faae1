"""Character error rate between reference transcripts and ASR output."""

from __future__ import annotations

import re
import string

import numpy as np

from ..errors import StatisticsError

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
_WS = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Lowercase, strip ASCII punctuation, collapse runs of whitespace."""
    text = text.lower().translate(_PUNCT_TABLE)
    return _WS.sub(" ", text).strip()


def edit_distance(ref: str, hyp: str) -> int:
    """Levenshtein distance over characters (unit insert/delete/substitute)."""
    n, m = len(ref), len(hyp)
    if n == 0:
        return m
    if m == 0:
        return n
    # single rolling row keeps memory at O(m)
    prev = np.arange(m + 1, dtype=np.int64)
    cur = np.empty(m + 1, dtype=np.int64)
    hyp_arr = np.frombuffer(hyp.encode("utf-32-le"), dtype=np.uint32)
    for i, ch in enumerate(ref, start=1):
        cur[0] = i
        sub = prev[:-1] + (hyp_arr != ord(ch))
        dele = prev[1:] + 1
        best = np.minimum(sub, dele)
        # insertion chains left-to-right, so this stays a scan
        run = cur[0]
        for j in range(1, m + 1):
            run = min(best[j - 1], run + 1)
            cur[j] = run
        prev, cur = cur, prev
    return int(prev[m])


def cer(reference: str, hypothesis: str, normalize: bool = True) -> float:
    """edit_distance / len(reference), after normalization of both sides.

    A reference that normalizes to the empty string has no defined rate.
    """
    if normalize:
        reference = normalize_text(reference)
        hypothesis = normalize_text(hypothesis)
    if len(reference) == 0:
        raise StatisticsError("reference transcript is empty after normalization")
    return edit_distance(reference, hypothesis) / len(reference)
