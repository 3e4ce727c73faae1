"""Corpus ingest: manifests, deterministic splits, and trajectory files.

A corpus is described by a JSON manifest listing utterances with contour,
original-audio, and enhanced-audio paths plus transcripts. Contours and
processed feature matrices share one binary container (see write_trajectory).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import audio
from .errors import AlignmentError, ConfigurationError, FormatError, LoadError, SchemaError
from .features import (
    FRAME_RATE,
    FULL_POINTS,
    ArticulatoryTrajectory,
    ContourSequence,
    default_feature_map,
    validate_raw_contours,
)

SPLITS = ("train", "val", "test")
SPLIT_RATIOS = (0.85, 0.05, 0.10)
DURATION_TOLERANCE = 0.05

MAGIC = b"ARTJ"
VERSION = 1


@dataclass(eq=False)
class UtteranceRecord:
    """One corpus entry: contours, audio paths, transcript, split assignment."""

    utterance_id: str
    contours: ContourSequence
    original_wav_path: Path
    enhanced_wav_path: Path
    transcript: str
    split: str = "train"

    def __post_init__(self):
        if self.split not in SPLITS:
            raise SchemaError(f"{self.utterance_id}: unknown split {self.split!r}")


def write_trajectory(traj: ArticulatoryTrajectory, path) -> None:
    """Serialize a [T x D] float32 matrix to the trajectory container.

    Layout: magic "ARTJ", u32 version (1), u32 T, u32 D, then T*D float32
    values, all little-endian, rows contiguous. Values pass through bit-exact.
    """
    data = np.ascontiguousarray(traj.data, dtype="<f4")
    t, d = data.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, t, d))
        fh.write(data.tobytes())


def read_trajectory(path, utterance_id: str | None = None) -> ArticulatoryTrajectory:
    """Read a trajectory container written by write_trajectory.

    The container stores only the matrix; for even D the feature map defaults
    to consecutive (point, axis) pairs, otherwise it is left unset.
    """
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise LoadError(f"cannot read trajectory file {path}: {exc}") from exc
    if len(blob) < 16:
        raise FormatError(f"{path}: truncated header ({len(blob)} bytes)")
    if blob[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:4]!r}, expected {MAGIC!r}")
    version, t, d = struct.unpack("<III", blob[4:16])
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    expected = 16 + 4 * t * d
    if len(blob) != expected:
        raise FormatError(f"{path}: payload is {len(blob)} bytes, expected {expected}")
    data = np.frombuffer(blob, dtype="<f4", offset=16).reshape(t, d)
    fmap = default_feature_map(d) if d % 2 == 0 else None
    return ArticulatoryTrajectory(
        utterance_id=utterance_id or path.stem,
        data=data.copy(),
        feature_index_map=fmap,
    )


def write_contours(seq: ContourSequence, path) -> None:
    """Store a contour sequence as a [T x 2P] trajectory container."""
    flat = seq.frames.reshape(seq.num_frames, 2 * seq.num_points).astype(np.float32)
    traj = ArticulatoryTrajectory(
        utterance_id=seq.utterance_id, data=flat, feature_rate=seq.frame_rate
    )
    write_trajectory(traj, path)


def read_contours(path, utterance_id=None, segment_labels=(), frame_rate=FRAME_RATE) -> ContourSequence:
    traj = read_trajectory(path, utterance_id=utterance_id)
    if traj.dim % 2 != 0:
        raise FormatError(f"{path}: width {traj.dim} is not an (x, y) point list")
    frames = traj.data.astype(np.float64).reshape(traj.num_frames, traj.dim // 2, 2)
    return ContourSequence(
        utterance_id=traj.utterance_id,
        frames=frames,
        frame_rate=frame_rate,
        segment_labels=segment_labels,
    )


def _require(entry: dict, key: str, where: str):
    if key not in entry:
        raise SchemaError(f"{where}: missing required field {key!r}")
    return entry[key]


def load_manifest(path, validate_audio: bool = True) -> list:
    """Load a corpus manifest into UtteranceRecords.

    Schema (paths relative to the manifest's directory):

        {"frame_rate": 83, "segment_labels": [... per-point labels ...],
         "utterances": [{"id": ..., "contours": ..., "original_wav": ...,
                         "enhanced_wav": ..., "transcript": ...,
                         "split": "train"|"val"|"test" (optional)}]}

    Validates point counts, coordinate bounds, and (when validate_audio)
    that the original recording and the contour sequence agree in duration
    within 0.05 s.
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise LoadError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "utterances" not in doc:
        raise SchemaError(f"{path}: manifest must be an object with an 'utterances' list")
    entries = doc["utterances"]
    if not isinstance(entries, list):
        raise SchemaError(f"{path}: 'utterances' must be a list")

    root = path.parent
    frame_rate = float(doc.get("frame_rate", FRAME_RATE))
    labels = tuple(doc.get("segment_labels", ()))
    n_points = int(doc.get("num_points", FULL_POINTS))
    if labels and len(labels) != n_points:
        raise SchemaError(f"{path}: {len(labels)} segment labels for {n_points} points")

    records = []
    seen = set()
    for i, entry in enumerate(entries):
        where = f"{path} utterance #{i}"
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}: entry must be an object")
        uid = str(_require(entry, "id", where))
        if uid in seen:
            raise SchemaError(f"{path}: duplicate utterance id {uid!r}")
        seen.add(uid)
        contour_path = root / str(_require(entry, "contours", where))
        original = root / str(_require(entry, "original_wav", where))
        enhanced = root / str(_require(entry, "enhanced_wav", where))
        transcript = str(_require(entry, "transcript", where))
        split = str(entry.get("split", "train"))

        seq = read_contours(contour_path, utterance_id=uid, segment_labels=labels, frame_rate=frame_rate)
        validate_raw_contours(seq, n_points=n_points)

        if validate_audio:
            for p in (original, enhanced):
                if not p.exists():
                    raise LoadError(f"{uid}: audio file not found: {p}")
            wav = audio.read_wav(original, expected_rate=audio.SAMPLE_RATE)
            drift = abs(wav.duration - seq.num_frames / frame_rate)
            if drift > DURATION_TOLERANCE:
                raise AlignmentError(
                    f"{uid}: audio is {wav.duration:.3f} s but contours span "
                    f"{seq.num_frames / frame_rate:.3f} s (drift {drift:.3f} s > {DURATION_TOLERANCE} s)"
                )

        records.append(
            UtteranceRecord(
                utterance_id=uid,
                contours=seq,
                original_wav_path=original,
                enhanced_wav_path=enhanced,
                transcript=transcript,
                split=split,
            )
        )
    return records


def make_split(records, ratios=SPLIT_RATIOS, seed: int = 0) -> list:
    """Assign train/val/test splits by seeded shuffle of sorted utterance ids.

    Sizes: round(N * ratio) for val and test, remainder to train. The same
    (records, ratios, seed) always yields the same assignment regardless of
    input order.
    """
    if len(ratios) != 3:
        raise ConfigurationError(f"expected 3 split ratios, got {len(ratios)}")
    total = float(sum(ratios))
    if abs(total - 1.0) > 1e-9:
        raise ConfigurationError(f"split ratios sum to {total}, expected 1.0")
    if any(r < 0 for r in ratios):
        raise ConfigurationError(f"split ratios must be non-negative: {ratios}")

    ids = sorted(r.utterance_id for r in records)
    if len(set(ids)) != len(ids):
        raise SchemaError("duplicate utterance ids in split input")
    n = len(ids)
    n_val = int(np.rint(n * ratios[1]))
    n_test = int(np.rint(n * ratios[2]))
    n_train = n - n_val - n_test
    if n_train < 0:
        raise ConfigurationError(f"ratios {ratios} leave no room for train at N={n}")

    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    assignment = {}
    for rank, idx in enumerate(order):
        if rank < n_train:
            assignment[ids[idx]] = "train"
        elif rank < n_train + n_val:
            assignment[ids[idx]] = "val"
        else:
            assignment[ids[idx]] = "test"
    return [replace(r, split=assignment[r.utterance_id]) for r in records]


def split_sizes(n: int, ratios=SPLIT_RATIOS) -> tuple:
    """(train, val, test) counts for N utterances under the rounding rule."""
    n_val = int(np.rint(n * ratios[1]))
    n_test = int(np.rint(n * ratios[2]))
    return n - n_val - n_test, n_val, n_test


def save_split(records, path) -> None:
    doc = {s: sorted(r.utterance_id for r in records if r.split == s) for s in SPLITS}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_split(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    missing = [s for s in SPLITS if s not in doc]
    if missing:
        raise SchemaError(f"{path}: split file missing keys {missing}")
    return {s: list(doc[s]) for s in SPLITS}
