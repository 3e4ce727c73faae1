"""
MRI contours versus EMA-style point tracking
=============================================

EMA rigs track six fleshpoints (lips, incisor, three tongue points);
MRI contours cover the whole midsagittal tract, including the velum
and pharynx that EMA cannot see. The toolkit estimates EMA-like
trajectories from the MRI points so the two feature sets can be
compared on the same utterances with the same models.
"""

from pathlib import Path

from artic import audio, features, ingest, synthetic
from artic.ablation import EvalItem, compare_ema
from artic.evaluation import StubAsrClient
from artic.models import (
    TrainConfig,
    make_train_state,
    toy_discriminator_config,
    toy_generator_config,
    train_gan,
)

out = Path(__file__).parent / "out" / "ema"
out.mkdir(parents=True, exist_ok=True)

corpus = out / "corpus"
synthetic.make_synthetic_corpus(corpus, n_utterances=4, seed=19)
records = ingest.load_manifest(corpus / "manifest.json")

cfg = features.default_feature_config()
spec = features.fit_center([r.contours for r in records])

# Build both feature sets for every utterance: the full 230-dim MRI
# trajectory and the 12-dim EMA estimate picked from the same points.
mri_set, ema_set = [], []
for rec in records:
    kept = features.prune(rec.contours, cfg.keep_labels)
    center = features.center_track(rec.contours, spec)
    traj = features.center_and_flatten(kept, spec, center=center)
    ema = features.estimate_ema(traj, cfg.ema_point_map)
    target = audio.mix_targets(
        audio.read_wav(rec.enhanced_wav_path, provenance="enhanced"),
        audio.read_wav(rec.original_wav_path, provenance="original"),
    )
    traj, target = audio.reconcile_lengths(traj, target)
    ema_traj = features.ArticulatoryTrajectory(rec.utterance_id, ema.data[: traj.data.shape[0]])
    mri_set.append((rec, traj, target))
    ema_set.append((rec, ema_traj, target))

print(f"mri features: {mri_set[0][1].data.shape[1]} dims, "
      f"ema features: {ema_set[0][1].data.shape[1]} dims")

# Train one tiny model per feature set, same budget, same seed.
models = {}
for name, items in (("mri", mri_set), ("ema", ema_set)):
    dim = items[0][1].data.shape[1]
    train_cfg = TrainConfig(
        steps=40, batch_size=2, segment_frames=8, checkpoint_every=1000, seed=2
    )
    state = make_train_state(
        toy_generator_config(input_dim=dim), toy_discriminator_config(), train_cfg
    )
    state = train_gan([(traj, target) for _, traj, target in items], state)
    models[name] = state.generator.eval()
    print(f"{name}: trained {train_cfg.steps} steps, final mel "
          f"{state.loss_rows[-1][4]:.3f}")

# compare_ema synthesizes the held-out items with each model and scores
# both sides with the same metrics. The stub ASR keeps the demo offline.
asr = StubAsrClient(["tone one", "tone two"])
items_mri = [
    EvalItem(rec.utterance_id, traj, target, rec.transcript)
    for rec, traj, target in mri_set[:2]
]
items_ema = [
    EvalItem(rec.utterance_id, traj, target, rec.transcript)
    for rec, traj, target in ema_set[:2]
]
verdict = compare_ema(
    models["mri"], items_mri, models["ema"], items_ema, asr_client=asr, chunk_frames=4
)
print(f"mcd  mri {verdict['mri']['mcd']['mean_db']:.3f} dB  "
      f"ema {verdict['ema']['mcd']['mean_db']:.3f} dB")
print(f"winner by mcd: {verdict['winner']['mcd']}")
if "cer" in verdict["mri"]:
    print(f"winner by cer: {verdict['winner']['cer']}")
