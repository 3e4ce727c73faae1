"""Articulatory feature extraction from vocal-tract contour sequences.

The raw representation is a per-frame set of 170 (x, y) contour points on an
84 x 84 pixel grid (2.4 mm/pixel) at 83 frames/s. The model-ready form is a
[T x 230] trajectory: 115 retained points, centered per frame at the most
stable point of the full set, flattened as interleaved (x, y) pairs.

Head position drifts within recordings, so centering subtracts the center
point's *per-frame* position rather than a global constant. Center statistics
are always fitted on the full 170-point set; the chosen point is tracked from
the unpruned sequence even when it is not among the retained 115.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, SchemaError, ShapeError, StatisticsError

FULL_POINTS = 170
RETAINED_POINTS = 115
FEATURE_DIM = 2 * RETAINED_POINTS
GRID_SIZE = 84
MM_PER_PIXEL = 2.4
FRAME_RATE = 83.0

EMA_LOCATIONS = (
    "upper-lip",
    "lower-lip",
    "lower-incisor",
    "tongue-tip",
    "tongue-body",
    "tongue-dorsum",
)

AXES = ("x", "y")


@dataclass(eq=False)
class ContourSequence:
    """Per-utterance time series of (x, y) contour points.

    frames: [T x P x 2] float coordinates in pixel units.
    segment_labels: anatomical label per point, identical across frames.
    point_indices: each point's index in the original full point set; defaults
        to 0..P-1 and is subset by pruning so downstream maps stay addressable.
    """

    utterance_id: str
    frames: np.ndarray
    frame_rate: float = FRAME_RATE
    segment_labels: tuple = ()
    point_indices: tuple = ()

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 3 or self.frames.shape[2] != 2:
            raise ShapeError(
                f"{self.utterance_id}: contour frames must be [T x P x 2], got {self.frames.shape}"
            )
        n_points = self.frames.shape[1]
        if not self.segment_labels:
            self.segment_labels = tuple(f"point-{i}" for i in range(n_points))
        self.segment_labels = tuple(self.segment_labels)
        if len(self.segment_labels) != n_points:
            raise SchemaError(
                f"{self.utterance_id}: {len(self.segment_labels)} labels for {n_points} points"
            )
        if not self.point_indices:
            self.point_indices = tuple(range(n_points))
        self.point_indices = tuple(int(i) for i in self.point_indices)
        if len(self.point_indices) != n_points:
            raise SchemaError(
                f"{self.utterance_id}: {len(self.point_indices)} point indices for {n_points} points"
            )

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def num_points(self) -> int:
        return self.frames.shape[1]


def validate_raw_contours(seq: ContourSequence, n_points: int = FULL_POINTS, grid: float = GRID_SIZE):
    """Enforce the raw-ingest invariants: point count, finiteness, grid bounds.

    Raises SchemaError naming the utterance and first offending frame.
    """
    if seq.num_frames < 1:
        raise SchemaError(f"{seq.utterance_id}: contour sequence has no frames")
    if seq.num_points != n_points:
        raise SchemaError(
            f"{seq.utterance_id}: frame 0 has {seq.num_points} points (expected {n_points})"
        )
    finite = np.isfinite(seq.frames).all(axis=(1, 2))
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise SchemaError(f"{seq.utterance_id}: frame {bad} has non-finite coordinates")
    in_grid = ((seq.frames >= 0.0) & (seq.frames <= grid)).all(axis=(1, 2))
    if not in_grid.all():
        bad = int(np.flatnonzero(~in_grid)[0])
        raise SchemaError(
            f"{seq.utterance_id}: frame {bad} has coordinates outside [0, {grid}]"
        )


@dataclass(eq=False)
class CenterSpec:
    """Per-point positional spread over the training set and the chosen center.

    point_index is the argmin of sqrt(std_x^2 + std_y^2); ties break toward
    the lowest index.
    """

    point_index: int
    stds: np.ndarray

    def __post_init__(self):
        self.stds = np.asarray(self.stds, dtype=np.float64)
        if self.stds.ndim != 2 or self.stds.shape[1] != 2:
            raise ShapeError(f"center stds must be [P x 2], got {self.stds.shape}")
        if not 0 <= self.point_index < self.stds.shape[0]:
            raise ShapeError(
                f"center point {self.point_index} out of range for {self.stds.shape[0]} points"
            )

    @property
    def combined(self) -> np.ndarray:
        return np.hypot(self.stds[:, 0], self.stds[:, 1])

    def to_dict(self) -> dict:
        return {"point_index": int(self.point_index), "stds": self.stds.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "CenterSpec":
        return cls(point_index=int(d["point_index"]), stds=np.asarray(d["stds"]))


@dataclass(eq=False)
class ArticulatoryTrajectory:
    """Model-ready [T x D] feature matrix at 83 Hz.

    Columns interleave per-point coordinates: (x of point 0, y of point 0,
    x of point 1, ...). feature_index_map records (point_index, axis) for each
    column; it must be a bijection onto {retained points} x {x, y}. A value of
    None marks matrices without per-column articulatory identity (e.g. deep
    feature matrices read back from disk).
    """

    utterance_id: str
    data: np.ndarray
    feature_rate: float = FRAME_RATE
    feature_index_map: tuple | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.data.ndim != 2:
            raise ShapeError(f"{self.utterance_id}: trajectory must be [T x D], got {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ShapeError(f"{self.utterance_id}: trajectory contains non-finite values")
        if self.feature_index_map is not None:
            fmap = tuple((int(p), str(a)) for p, a in self.feature_index_map)
            if len(fmap) != self.data.shape[1]:
                raise ShapeError(
                    f"{self.utterance_id}: feature map has {len(fmap)} entries for D={self.data.shape[1]}"
                )
            if len(set(fmap)) != len(fmap):
                raise SchemaError(f"{self.utterance_id}: duplicate feature map entries")
            points = {p for p, _ in fmap}
            expected = {(p, a) for p in points for a in AXES}
            if set(fmap) != expected:
                raise SchemaError(
                    f"{self.utterance_id}: feature map is not a bijection onto points x (x, y)"
                )
            self.feature_index_map = fmap

    @property
    def num_frames(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def column_of(self, point_index: int, axis: str) -> int:
        if self.feature_index_map is None:
            raise ConfigurationError(f"{self.utterance_id}: trajectory carries no feature map")
        try:
            return self.feature_index_map.index((int(point_index), axis))
        except ValueError:
            raise ConfigurationError(
                f"{self.utterance_id}: point {point_index} axis {axis!r} not among retained features"
            ) from None


def default_feature_map(dim: int) -> tuple:
    """Consecutive (point, axis) map for an even-width matrix."""
    if dim % 2 != 0:
        raise ShapeError(f"cannot build an (x, y) feature map for odd D={dim}")
    return tuple((p, a) for p in range(dim // 2) for a in AXES)


def prune(contours: ContourSequence, keep_labels, n_keep: int = RETAINED_POINTS) -> ContourSequence:
    """Drop low-information segments, keeping exactly n_keep points.

    keep_labels is a set of anatomical labels; the retained points preserve
    their original order and indices. Selecting any other count than n_keep is
    a configuration error.
    """
    keep_labels = set(keep_labels)
    unknown = keep_labels - set(contours.segment_labels)
    if unknown:
        raise ConfigurationError(f"keep labels not present in sequence: {sorted(unknown)}")
    mask = np.array([lab in keep_labels for lab in contours.segment_labels])
    n_selected = int(mask.sum())
    if n_selected != n_keep:
        raise ConfigurationError(
            f"keep set selects {n_selected} points, expected exactly {n_keep}"
        )
    sel = np.flatnonzero(mask)
    return ContourSequence(
        utterance_id=contours.utterance_id,
        frames=contours.frames[:, sel, :],
        frame_rate=contours.frame_rate,
        segment_labels=tuple(contours.segment_labels[i] for i in sel),
        point_indices=tuple(contours.point_indices[i] for i in sel),
    )


def fit_center(train_contours) -> CenterSpec:
    """Fit per-point position spread on training contours and pick the center.

    Statistics pool every frame of every training utterance (full point set).
    Sequences are pooled in utterance-id order, so the result is independent
    of input ordering.
    """
    seqs = sorted(train_contours, key=lambda s: s.utterance_id)
    if not seqs:
        raise StatisticsError("cannot fit a center on an empty training set")
    n_points = seqs[0].num_points
    for s in seqs:
        if s.num_points != n_points:
            raise SchemaError(
                f"{s.utterance_id}: {s.num_points} points, expected {n_points} as in {seqs[0].utterance_id}"
            )
    pooled = np.concatenate([s.frames for s in seqs], axis=0)
    if pooled.shape[0] < 2:
        raise StatisticsError(
            f"need at least 2 frames to fit a center, got {pooled.shape[0]}"
        )
    stds = pooled.std(axis=0, ddof=0)
    combined = np.hypot(stds[:, 0], stds[:, 1])
    point_index = int(np.argmin(combined))  # argmin returns the first minimum
    return CenterSpec(point_index=point_index, stds=stds)


def center_track(contours: ContourSequence, spec: CenterSpec) -> np.ndarray:
    """Per-frame coordinates of the center point, [T x 2].

    Must be called on a sequence that still contains the center point
    (normally the unpruned 170-point input).
    """
    try:
        col = contours.point_indices.index(spec.point_index)
    except ValueError:
        raise ConfigurationError(
            f"{contours.utterance_id}: center point {spec.point_index} not present in sequence"
        ) from None
    return contours.frames[:, col, :].copy()


def center_and_flatten(
    contours: ContourSequence,
    spec: CenterSpec,
    center: np.ndarray | None = None,
) -> ArticulatoryTrajectory:
    """Subtract the per-frame center and flatten to [T x 2P].

    center is the [T x 2] track of the center point, extracted from the
    unpruned sequence via center_track(); when omitted, the center point must
    still be present in this sequence. Output columns interleave (x, y) per
    retained point.
    """
    if center is None:
        center = center_track(contours, spec)
    center = np.asarray(center, dtype=np.float64)
    if center.shape != (contours.num_frames, 2):
        raise ShapeError(
            f"{contours.utterance_id}: center track shape {center.shape}, expected ({contours.num_frames}, 2)"
        )
    centered = contours.frames - center[:, None, :]
    flat = centered.reshape(contours.num_frames, 2 * contours.num_points)
    fmap = tuple((p, a) for p in contours.point_indices for a in AXES)
    return ArticulatoryTrajectory(
        utterance_id=contours.utterance_id,
        data=flat.astype(np.float32),
        feature_rate=contours.frame_rate,
        feature_index_map=fmap,
    )


@dataclass(eq=False)
class EmaEstimate:
    """Six-location (x, y) trajectory selected from MRI points, [T x 12]."""

    utterance_id: str
    data: np.ndarray
    locations: tuple = EMA_LOCATIONS
    point_map: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.data.ndim != 2 or self.data.shape[1] != 2 * len(self.locations):
            raise ShapeError(
                f"{self.utterance_id}: EMA estimate must be [T x {2 * len(self.locations)}], got {self.data.shape}"
            )


def estimate_ema(traj: ArticulatoryTrajectory, point_map: dict) -> EmaEstimate:
    """Approximate sensor-style articulography by selecting one MRI point per location.

    point_map maps each of the six locations to an original point index that
    must be among the trajectory's retained points. Pure column selection, no
    arithmetic; output column order follows EMA_LOCATIONS with (x, y) pairs.
    """
    missing = [loc for loc in EMA_LOCATIONS if loc not in point_map]
    if missing:
        raise ConfigurationError(f"EMA point map is missing locations: {missing}")
    cols = []
    for loc in EMA_LOCATIONS:
        p = int(point_map[loc])
        cols.append(traj.column_of(p, "x"))
        cols.append(traj.column_of(p, "y"))
    data = traj.data[:, cols]
    return EmaEstimate(
        utterance_id=traj.utterance_id,
        data=data,
        point_map={loc: int(point_map[loc]) for loc in EMA_LOCATIONS},
    )


def mask_features(traj: ArticulatoryTrajectory, keep) -> ArticulatoryTrajectory:
    """Zero every column not in the keep set; kept columns pass through.

    Masking happens after centering, so 0.0 corresponds to the center-point
    position.
    """
    keep_idx = np.asarray(sorted(int(i) for i in keep), dtype=np.int64)
    if keep_idx.size and (keep_idx[0] < 0 or keep_idx[-1] >= traj.dim):
        bad = keep_idx[0] if keep_idx[0] < 0 else keep_idx[-1]
        raise ConfigurationError(f"keep index {bad} out of range for D={traj.dim}")
    masked = np.zeros_like(traj.data)
    if keep_idx.size:
        masked[:, keep_idx] = traj.data[:, keep_idx]
    return replace(traj, data=masked)


@dataclass(eq=False)
class FeatureConfig:
    """Serializable feature-pipeline configuration.

    Holds the anatomical labeling of the full point set, the retained-label
    set, the EMA point map, and (once fitted) the CenterSpec so val/test
    processing reuses the training-set center. The shipped defaults are
    approximations: the exact discarded points and EMA point choices are
    documented per-label and overridable.
    """

    segment_labels: tuple
    keep_labels: tuple
    ema_point_map: dict
    center_spec: CenterSpec | None = None

    def __post_init__(self):
        self.segment_labels = tuple(self.segment_labels)
        self.keep_labels = tuple(self.keep_labels)
        self.ema_point_map = {str(k): int(v) for k, v in self.ema_point_map.items()}

    def keep_point_indices(self) -> list:
        keep = set(self.keep_labels)
        return [i for i, lab in enumerate(self.segment_labels) if lab in keep]

    def to_dict(self) -> dict:
        d = {
            "segment_labels": list(self.segment_labels),
            "keep_labels": list(self.keep_labels),
            "ema_point_map": dict(self.ema_point_map),
        }
        if self.center_spec is not None:
            d["center_spec"] = self.center_spec.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureConfig":
        spec = d.get("center_spec")
        return cls(
            segment_labels=d["segment_labels"],
            keep_labels=d["keep_labels"],
            ema_point_map=d["ema_point_map"],
            center_spec=CenterSpec.from_dict(spec) if spec else None,
        )


def load_feature_config(path) -> FeatureConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return FeatureConfig.from_dict(json.load(fh))


def save_feature_config(config: FeatureConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")


def default_feature_config() -> FeatureConfig:
    """The shipped default labeling, keep set, and EMA map."""
    from importlib import resources

    with resources.files("artic.data").joinpath("default_feature_config.json").open(
        "r", encoding="utf-8"
    ) as fh:
        return FeatureConfig.from_dict(json.load(fh))
