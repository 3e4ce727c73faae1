"""
Training the vocoder at desk scale
===================================

Runs a short adversarial training loop on synthetic data and plots the
loss curves. The model here is the toy configuration; the full-size one
has 14.5M parameters and needs hours, not seconds.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from artic import audio, features, ingest, synthetic
from artic.models import (
    TrainConfig,
    make_train_state,
    toy_discriminator_config,
    toy_generator_config,
    train_gan,
)

out = Path(__file__).parent / "out" / "train"
out.mkdir(parents=True, exist_ok=True)

corpus = out / "corpus"
synthetic.make_synthetic_corpus(corpus, n_utterances=4, seed=11)
records = ingest.load_manifest(corpus / "manifest.json")

# Preprocess into (trajectory, target) pairs. The target waveform mixes the
# enhanced and original tracks 0.9/0.1, which smooths enhancement artifacts
# while keeping the natural recording in the loss.
cfg = features.default_feature_config()
spec = features.fit_center([r.contours for r in records])
dataset = []
for rec in records:
    kept = features.prune(rec.contours, cfg.keep_labels)
    traj = features.center_and_flatten(
        kept, spec, center=features.center_track(rec.contours, spec)
    )
    original = audio.read_wav(rec.original_wav_path, provenance="original")
    enhanced = audio.read_wav(rec.enhanced_wav_path, provenance="enhanced")
    traj, mixed = audio.reconcile_lengths(traj, audio.mix_targets(enhanced, original))
    dataset.append((traj, mixed))

# Every step crops a fresh random segment from a random utterance, runs the
# discriminators, and updates both sides. The loop is deterministic in
# (config, seed): rerunning this script reproduces the numbers below.
train_cfg = TrainConfig(
    steps=80, batch_size=2, segment_frames=8, checkpoint_every=1000, seed=1
)
state = make_train_state(toy_generator_config(), toy_discriminator_config(), train_cfg)
state = train_gan(dataset, state, log_path=out / "loss_log.csv")

rows = np.asarray(state.loss_rows)
print(f"step   1: mel {rows[0, 4]:.3f}  gen total {rows[0, 5]:.3f}")
print(f"step {len(rows):3d}: mel {rows[-1, 4]:.3f}  gen total {rows[-1, 5]:.3f}")

fig, ax = plt.subplots(figsize=(7, 4))
ax.plot(rows[:, 0], rows[:, 4], label="mel reconstruction")
ax.plot(rows[:, 0], rows[:, 1], label="discriminator")
ax.plot(rows[:, 0], rows[:, 2], label="generator adversarial")
ax.set_xlabel("step")
ax.set_ylabel("loss")
ax.legend()
fig.tight_layout()
fig.savefig(out / "losses.png", dpi=110)
print(f"loss curves -> {out / 'losses.png'}")
