"""
From traced contours to model-ready trajectories
=================================================

Walks the preprocessing path end to end on a small synthetic corpus:
load a manifest, validate the raw 170-point contours, prune to the
115 informative points, subtract the per-frame reference point, and
serialize the flattened trajectories.
"""

from pathlib import Path

import numpy as np

from artic import features, ingest, synthetic

out = Path(__file__).parent / "out" / "contours"
out.mkdir(parents=True, exist_ok=True)

# Build a tiny corpus of procedurally generated utterances. Each one has
# a contour file (170 tracked points per frame on an 84x84 grid, 83 fps),
# an original and an enhanced wav, and a transcript.
corpus = out / "corpus"
synthetic.make_synthetic_corpus(corpus, n_utterances=4, seed=7)
records = ingest.load_manifest(corpus / "manifest.json")
print(f"loaded {len(records)} utterances")

first = records[0]
print(f"{first.utterance_id}: contours {first.contours.frames.shape}, "
      f"transcript {first.transcript!r}")

# The point labeling and the keep set ship with the package. 55 of the 170
# points sit on segments that barely move during speech; pruning drops them.
cfg = features.default_feature_config()
kept = features.prune(first.contours, cfg.keep_labels)
print(f"pruned {first.contours.num_points} -> {kept.num_points} points")

# The reference point for centering is fitted on training data only: the
# point whose position varies least across all training frames. Subtracting
# its per-frame position removes head motion without touching articulation.
spec = features.fit_center([r.contours for r in records])
print(f"center point index {spec.point_index}, "
      f"spread {spec.combined[spec.point_index]:.3f} px")

traj = features.center_and_flatten(
    kept, spec, center=features.center_track(first.contours, spec)
)
print(f"trajectory {traj.data.shape} {traj.data.dtype}")  # [T x 230] float32

# Trajectories round-trip bit-exactly through the binary container.
path = out / f"{first.utterance_id}.artj"
ingest.write_trajectory(traj, path)
back = ingest.read_trajectory(path, utterance_id=first.utterance_id)
assert back.data.tobytes() == traj.data.tobytes()
print(f"wrote {path} ({path.stat().st_size} bytes), round trip bit-exact")

# A rigid shift of the whole tract leaves the features untouched; that is
# the point of centering.
shifted = features.ContourSequence(
    first.utterance_id,
    first.contours.frames + np.array([1.5, -2.0]),
    segment_labels=first.contours.segment_labels,
)
traj2 = features.center_and_flatten(
    features.prune(shifted, cfg.keep_labels),
    spec,
    center=features.center_track(shifted, spec),
)
print(f"max feature change under a rigid shift: "
      f"{np.abs(traj2.data - traj.data).max():.2e}")
