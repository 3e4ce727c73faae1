"""Command-line pipeline driver.

Subcommands: preprocess, train, synthesize, evaluate, benchmark, ablate,
compare-ema. Every run is driven by a JSON config file; command-line flags
override config values. Outputs land in a fixed layout under the configured
output directory:

    out_dir/preprocessed/   trajectories, targets, EMA tracks, split, configs
    out_dir/checkpoints/    training checkpoints, loss log, init report
    out_dir/synth/          synthesized waveforms
    out_dir/reports/        JSON/CSV/PNG evaluation artifacts

Exit codes: 0 success, 1 configuration or input error, 2 runtime failure.
Device selection: --device flag, else the ARTIC_DEVICE environment variable,
else cpu.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, audio, reporting
from .ablation import (
    EvalItem,
    compare_ema,
    load_plan,
    make_plan,
    render_importance_map,
    run_ablation,
    save_plan,
)
from .errors import (
    AlignmentError,
    ArticError,
    ConfigurationError,
    DeviceError,
    FormatError,
    LoadError,
    SchemaError,
    ShapeError,
    StatisticsError,
    TrainingDivergedError,
    TransportError,
)
from .evaluation import (
    CerResult,
    McdResult,
    benchmark_inference,
    cer,
    make_asr_client,
    mcd,
    transcribe,
)
from .features import (
    ArticulatoryTrajectory,
    FeatureConfig,
    center_and_flatten,
    center_track,
    default_feature_config,
    estimate_ema,
    fit_center,
    load_feature_config,
    prune,
    save_feature_config,
)
from .ingest import (
    load_manifest,
    load_split,
    make_split,
    read_trajectory,
    save_split,
    write_trajectory,
)

USER_ERRORS = (
    ConfigurationError,
    SchemaError,
    LoadError,
    FormatError,
    AlignmentError,
    StatisticsError,
    ShapeError,
)


class RunConfig:
    """Config file wrapper: raw dict for lossless round-trips, typed access.

    Relative paths resolve against the config file's directory.
    """

    def __init__(self, raw: dict, base_dir: Path):
        if not isinstance(raw, dict):
            raise ConfigurationError("config root must be a JSON object")
        self.raw = raw
        self.base_dir = Path(base_dir)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise LoadError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: config is not valid JSON: {exc}") from exc
        return cls(raw, path.parent)

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.raw, fh, indent=2)
            fh.write("\n")

    def section(self, name: str) -> dict:
        value = self.raw.get(name, {})
        if not isinstance(value, dict):
            raise ConfigurationError(f"config section {name!r} must be an object")
        return value

    def path(self, key: str, default=None) -> Path | None:
        value = self.raw.get(key, default)
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def out_dir(self) -> Path:
        p = self.path("out_dir")
        if p is None:
            raise ConfigurationError("config must set out_dir")
        return p

    @property
    def seed(self) -> int:
        value = self.raw.get("seed", 0)
        if not isinstance(value, int):
            raise ConfigurationError(f"seed must be an integer, got {value!r}")
        return value


def resolve_device(flag_value: str | None) -> str:
    device = flag_value or os.environ.get("ARTIC_DEVICE") or "cpu"
    if device.startswith("cuda"):
        import torch

        if not torch.cuda.is_available():
            raise DeviceError(f"device {device!r} requested but CUDA is unavailable")
    elif device != "cpu":
        raise DeviceError(f"unknown device {device!r}; use cpu or cuda[:N]")
    return device


def _feature_config(config: RunConfig) -> FeatureConfig:
    path = config.path("feature_config")
    if path is not None:
        if not path.exists():
            raise LoadError(f"feature config not found: {path}")
        return load_feature_config(path)
    return default_feature_config()


def _dirs(config: RunConfig) -> dict:
    out = config.out_dir
    return {
        "out": out,
        "pre": out / "preprocessed",
        "traj": out / "preprocessed" / "traj",
        "ema": out / "preprocessed" / "ema",
        "targets": out / "preprocessed" / "targets",
        "ckpt": out / "checkpoints",
        "synth": out / "synth",
        "reports": out / "reports",
    }


# ---------------------------------------------------------------- preprocess


def cmd_preprocess(config: RunConfig, args) -> int:
    manifest_path = config.path("manifest")
    if manifest_path is None or not manifest_path.exists():
        raise ConfigurationError(f"manifest not found: {manifest_path}")
    feature_config = _feature_config(config)
    dirs = _dirs(config)

    records = load_manifest(manifest_path)
    if not records:
        print("warning: manifest lists no utterances; nothing to do", file=sys.stderr)
        return 0

    if dirs["pre"].exists() and any(dirs["pre"].iterdir()) and not args.force:
        raise ConfigurationError(
            f"{dirs['pre']} already has outputs; pass --force to overwrite"
        )

    split_cfg = config.section("split")
    ratios = tuple(split_cfg.get("ratios", (0.85, 0.05, 0.10)))
    split_seed = int(split_cfg.get("seed", config.seed))
    records = make_split(records, ratios=ratios, seed=split_seed)

    train_records = [r for r in records if r.split == "train"]
    if not train_records:
        raise ConfigurationError("split produced an empty training set")
    center_spec = fit_center([r.contours for r in train_records])
    feature_config.center_spec = center_spec

    for d in ("traj", "ema", "targets"):
        dirs[d].mkdir(parents=True, exist_ok=True)

    keep = set(feature_config.keep_labels)
    transcripts = {}
    reference_frame = None
    for record in records:
        full = record.contours
        pruned = prune(full, keep)
        traj = center_and_flatten(pruned, center_spec, center=center_track(full, center_spec))
        write_trajectory(traj, dirs["traj"] / f"{record.utterance_id}.artj")

        ema = estimate_ema(traj, feature_config.ema_point_map)
        write_trajectory(
            ArticulatoryTrajectory(record.utterance_id, ema.data),
            dirs["ema"] / f"{record.utterance_id}.artj",
        )

        original = audio.read_wav(record.original_wav_path, provenance="original")
        if original.sample_rate != audio.SAMPLE_RATE:
            original = audio.resample(original, audio.SAMPLE_RATE)
        enhanced = audio.read_wav(record.enhanced_wav_path, provenance="enhanced")
        if enhanced.sample_rate != audio.SAMPLE_RATE:
            enhanced = audio.resample(enhanced, audio.SAMPLE_RATE)
        n = min(len(original), len(enhanced))
        original = audio.Waveform(original.samples[:n], audio.SAMPLE_RATE, "original")
        enhanced = audio.Waveform(enhanced.samples[:n], audio.SAMPLE_RATE, "enhanced")
        mixed = audio.mix_targets(enhanced, original)
        traj, mixed = audio.reconcile_lengths(traj, mixed)
        audio.write_wav(mixed, dirs["targets"] / f"{record.utterance_id}.wav")

        transcripts[record.utterance_id] = record.transcript
        if record.split == "train" and reference_frame is None:
            reference_frame = pruned.frames[0].tolist()

    save_split(records, dirs["pre"] / "split.json")
    save_feature_config(feature_config, dirs["pre"] / "feature_config.json")
    with open(dirs["pre"] / "transcripts.json", "w", encoding="utf-8") as fh:
        json.dump(transcripts, fh, indent=2)
        fh.write("\n")
    with open(dirs["pre"] / "reference_frame.json", "w", encoding="utf-8") as fh:
        json.dump(reference_frame, fh)
        fh.write("\n")

    counts = {s: sum(1 for r in records if r.split == s) for s in ("train", "val", "test")}
    print(
        f"preprocessed {len(records)} utterances "
        f"(train {counts['train']} / val {counts['val']} / test {counts['test']}); "
        f"center point {center_spec.point_index}"
    )
    return 0


# --------------------------------------------------------------------- train


def _require_preprocessed(config: RunConfig) -> dict:
    dirs = _dirs(config)
    if not (dirs["pre"] / "split.json").exists():
        raise ConfigurationError(
            f"no preprocessing outputs under {dirs['pre']}; run `artic preprocess` first"
        )
    return dirs


def _load_dataset(dirs: dict, ids, kind: str = "mri") -> list:
    traj_dir = dirs["traj"] if kind == "mri" else dirs["ema"]
    dataset = []
    for uid in ids:
        traj = read_trajectory(traj_dir / f"{uid}.artj", utterance_id=uid)
        wav = audio.read_wav(dirs["targets"] / f"{uid}.wav", provenance="mixed")
        dataset.append((traj, wav))
    return dataset


def _model_sections(config: RunConfig, args):
    model_cfg = config.section("model")
    kind = getattr(args, "features", None) or model_cfg.get("features", "mri")
    if kind not in ("mri", "ema"):
        raise ConfigurationError(f"model.features must be mri or ema, got {kind!r}")
    return model_cfg, kind


def _build_generator_config(model_cfg: dict, input_dim: int):
    from .models import GeneratorConfig, full_generator_config, toy_generator_config

    if "generator" in model_cfg:
        d = dict(model_cfg["generator"])
        d["input_dim"] = input_dim
        return GeneratorConfig.from_dict(d)
    scale = model_cfg.get("scale", "toy")
    if scale == "full":
        cfg = full_generator_config(input_dim)
    elif scale == "toy":
        cfg = toy_generator_config(input_dim)
    else:
        raise ConfigurationError(f"model.scale must be toy or full, got {scale!r}")
    return cfg


def _build_disc_config(model_cfg: dict):
    from .models import DiscriminatorConfig, toy_discriminator_config

    if "discriminator" in model_cfg:
        return DiscriminatorConfig(**model_cfg["discriminator"])
    if model_cfg.get("scale", "toy") == "toy":
        return toy_discriminator_config()
    return DiscriminatorConfig()


def cmd_train(config: RunConfig, args) -> int:
    from .models import (
        TrainConfig,
        init_from_pretrained,
        load_checkpoint,
        make_train_state,
        save_train_checkpoint,
        train_gan,
    )

    dirs = _require_preprocessed(config)
    device = resolve_device(args.device)
    model_cfg, kind = _model_sections(config, args)

    split = load_split(dirs["pre"] / "split.json")
    train_ids = split["train"]
    if not train_ids:
        raise ConfigurationError("training split is empty")
    dataset = _load_dataset(dirs, train_ids, kind)
    input_dim = dataset[0][0].dim

    train_dict = dict(config.section("training"))
    if args.steps is not None:
        train_dict["steps"] = args.steps
    if args.seed is not None:
        train_dict["seed"] = args.seed
    train_dict.setdefault("seed", config.seed)
    init_from = args.init_from or train_dict.pop("init_from", None)
    train_config = TrainConfig.from_dict(train_dict)

    gen_config = _build_generator_config(model_cfg, input_dim)
    disc_config = _build_disc_config(model_cfg)
    state = make_train_state(gen_config, disc_config, train_config)

    dirs["ckpt"].mkdir(parents=True, exist_ok=True)
    if init_from:
        init_path = Path(init_from)
        if not init_path.is_absolute():
            init_path = config.base_dir / init_path
        # training checkpoints bundle generator + discriminators under
        # name prefixes; plain generator exports carry bare names
        tensors, _ = load_checkpoint(init_path)
        prefix = "generator." if any(n.startswith("generator.") for n in tensors) else ""
        report = init_from_pretrained(state.generator, init_path, prefix=prefix)
        reporting.write_report(
            report.to_dict(), dirs["ckpt"] / "init_report.json", config=config.raw,
            seeds={"train": train_config.seed},
        )
        print(f"warm start from {init_path}:\n{report}")

    if device != "cpu":
        state.generator.to(device)

    meta = {"features": kind, "split_test_ids": split["test"], "device": device}
    train_gan(
        dataset,
        state,
        log_path=dirs["ckpt"] / "loss_log.csv",
        checkpoint_dir=dirs["ckpt"],
    )
    final = dirs["ckpt"] / f"step-{state.step:06d}.ckpt"
    save_train_checkpoint(state, final, meta=meta)
    last = state.loss_rows[-1] if state.loss_rows else None
    tail = f"; final mel loss {last[4]:.4f}" if last else ""
    print(f"trained {state.step} steps on {len(dataset)} utterances -> {final}{tail}")
    return 0


# ------------------------------------------------------------------ helpers


def _latest_checkpoint(ckpt_dir: Path) -> Path:
    candidates = sorted(ckpt_dir.glob("step-*.ckpt"))
    if not candidates:
        raise LoadError(f"no checkpoints under {ckpt_dir}")
    return candidates[-1]


def _load_model(config: RunConfig, args, dirs: dict):
    from .models import load_generator

    if args.checkpoint:
        path = Path(args.checkpoint)
        if not path.is_absolute():
            path = config.base_dir / path
    else:
        path = _latest_checkpoint(dirs["ckpt"])
    if not path.exists():
        raise LoadError(f"checkpoint not found: {path}")
    model, meta = load_generator(path)
    return model, meta, path


def _test_items(config: RunConfig, dirs: dict, kind: str) -> list:
    """EvalItems for the test split: trajectory, denoised reference, transcript."""
    manifest_path = config.path("manifest")
    if manifest_path is None or not manifest_path.exists():
        raise ConfigurationError(f"manifest not found: {manifest_path}")
    records = {r.utterance_id: r for r in load_manifest(manifest_path, validate_audio=False)}
    split = load_split(dirs["pre"] / "split.json")
    with open(dirs["pre"] / "transcripts.json", "r", encoding="utf-8") as fh:
        transcripts = json.load(fh)

    traj_dir = dirs["traj"] if kind == "mri" else dirs["ema"]
    items = []
    for uid in split["test"]:
        traj = read_trajectory(traj_dir / f"{uid}.artj", utterance_id=uid)
        reference = audio.read_wav(records[uid].enhanced_wav_path, provenance="enhanced")
        if reference.sample_rate != audio.SAMPLE_RATE:
            reference = audio.resample(reference, audio.SAMPLE_RATE)
        items.append(
            EvalItem(
                utterance_id=uid,
                trajectory=traj,
                reference=reference,
                transcript=transcripts.get(uid, ""),
            )
        )
    if not items:
        raise ConfigurationError("test split is empty")
    return items


def _asr_from_config(config: RunConfig):
    eval_cfg = config.section("evaluation")
    asr_cfg = dict(eval_cfg.get("asr", {"kind": "stub"}))
    kind = asr_cfg.pop("kind", "stub")
    return make_asr_client(kind, **asr_cfg)


# --------------------------------------------------------------- synthesize


def cmd_synthesize(config: RunConfig, args) -> int:
    from .models import synthesize_utterance

    dirs = _require_preprocessed(config)
    device = resolve_device(args.device)
    model, meta, ckpt_path = _load_model(config, args, dirs)
    if device != "cpu":
        model.to(device)
    kind = meta.get("features", "mri")

    split = load_split(dirs["pre"] / "split.json")
    which = args.split or "test"
    if which not in split:
        raise ConfigurationError(f"unknown split {which!r}")
    ids = split[which]
    if not ids:
        print(f"warning: split {which!r} is empty; nothing to synthesize")
        return 0

    traj_dir = dirs["traj"] if kind == "mri" else dirs["ema"]
    dirs["synth"].mkdir(parents=True, exist_ok=True)
    eval_cfg = config.section("evaluation")
    chunk = eval_cfg.get("chunk_frames")
    for uid in ids:
        traj = read_trajectory(traj_dir / f"{uid}.artj", utterance_id=uid)
        wav = synthesize_utterance(model, traj, chunk_frames=chunk)
        audio.write_wav(wav, dirs["synth"] / f"{uid}.wav")
    print(f"synthesized {len(ids)} utterances from {ckpt_path.name} -> {dirs['synth']}")
    return 0


# ----------------------------------------------------------------- evaluate


def cmd_evaluate(config: RunConfig, args) -> int:
    from .models import synthesize_utterance

    dirs = _require_preprocessed(config)
    device = resolve_device(args.device)
    model, meta, ckpt_path = _load_model(config, args, dirs)
    if device != "cpu":
        model.to(device)
    kind = meta.get("features", "mri")
    items = _test_items(config, dirs, kind)
    asr = _asr_from_config(config)
    chunk = config.section("evaluation").get("chunk_frames")

    mcds, cers = {}, {}
    for item in items:
        synthesized = synthesize_utterance(model, item.trajectory, chunk_frames=chunk)
        mcds[item.utterance_id] = mcd(item.reference, synthesized)
        hypothesis = transcribe(synthesized, asr, utterance_id=item.utterance_id)
        cers[item.utterance_id] = cer(item.transcript, hypothesis)

    mcd_result = McdResult(mcds)
    cer_result = CerResult(cers)
    doc = {
        "checkpoint": ckpt_path.name,
        "features": kind,
        "mcd": mcd_result.to_dict(),
        "cer": cer_result.to_dict(),
        "mcd_settings": {"order": 13, "alpha": 0.42, "c0_excluded": True, "alignment": "dtw"},
    }
    dirs["reports"].mkdir(parents=True, exist_ok=True)
    reporting.write_report(
        doc, dirs["reports"] / "evaluate.json", config=config.raw, seeds={"seed": config.seed}
    )
    rows = [
        ["MCD (dB)", f"{mcd_result.mean:.3f}", f"{mcd_result.std:.3f}"],
        ["CER", f"{cer_result.mean:.3f}", f"{cer_result.std:.3f}"],
    ]
    print(reporting.format_metric_table(rows, ["metric", "mean", "std"]))
    print(f"report -> {dirs['reports'] / 'evaluate.json'}")
    return 0


# ---------------------------------------------------------------- benchmark


def cmd_benchmark(config: RunConfig, args) -> int:
    dirs = _require_preprocessed(config)
    device = resolve_device(args.device)
    model, meta, ckpt_path = _load_model(config, args, dirs)
    kind = meta.get("features", "mri")

    split = load_split(dirs["pre"] / "split.json")
    traj_dir = dirs["traj"] if kind == "mri" else dirs["ema"]
    trajs = [read_trajectory(traj_dir / f"{uid}.artj", utterance_id=uid) for uid in split["test"]]
    if not trajs:
        raise ConfigurationError("test split is empty")

    trials = args.trials or int(config.section("benchmark").get("trials", 5))
    result = benchmark_inference(model, trajs, device=device, trials=trials)
    doc = {"checkpoint": ckpt_path.name, "features": kind, "timing": result.to_dict()}
    dirs["reports"].mkdir(parents=True, exist_ok=True)
    reporting.write_report(
        doc, dirs["reports"] / "benchmark.json", config=config.raw, seeds={"seed": config.seed}
    )
    rows = [
        [
            "synthesis time (s/utt)",
            f"{result.mean:.4f}",
            f"{result.std:.4f}",
            result.device,
            f"{result.param_count:,}",
        ]
    ]
    print(reporting.format_metric_table(rows, ["metric", "mean", "std", "device", "params"]))
    print(f"report -> {dirs['reports'] / 'benchmark.json'}")
    return 0


# ------------------------------------------------------------------- ablate


def cmd_ablate(config: RunConfig, args) -> int:
    dirs = _require_preprocessed(config)
    device = resolve_device(args.device)
    model, meta, ckpt_path = _load_model(config, args, dirs)
    if device != "cpu":
        model.to(device)
    kind = meta.get("features", "mri")
    if kind != "mri":
        raise ConfigurationError("ablation is defined for the 230-dim MRI features")
    items = _test_items(config, dirs, kind)

    abl_cfg = config.section("ablation")
    n_subsets = args.n_subsets or int(abl_cfg.get("n_subsets", 50))
    keep_fraction = float(abl_cfg.get("keep_fraction", 0.9))
    plan_seed = int(abl_cfg.get("seed", config.seed))
    n_features = items[0].trajectory.dim
    plan = make_plan(
        plan_seed, n_subsets=n_subsets, n_features=n_features, keep_fraction=keep_fraction
    )

    chunk = config.section("evaluation").get("chunk_frames")
    report = run_ablation(
        model,
        [(it.trajectory, it.reference) for it in items],
        plan,
        chunk_frames=chunk,
    )

    dirs["reports"].mkdir(parents=True, exist_ok=True)
    save_plan(plan, dirs["reports"] / "ablation_plan.json")
    reporting.write_report(
        {"checkpoint": ckpt_path.name, **report.to_dict()},
        dirs["reports"] / "ablation.json",
        config=config.raw,
        seeds={"plan": plan_seed},
    )

    feature_config = load_feature_config(dirs["pre"] / "feature_config.json")
    keep_points = feature_config.keep_point_indices()
    fmap = tuple((p, a) for p in keep_points for a in ("x", "y"))
    with open(dirs["pre"] / "reference_frame.json", "r", encoding="utf-8") as fh:
        reference_frame = np.asarray(json.load(fh))
    render_importance_map(
        report,
        fmap,
        reference_frame,
        dirs["reports"] / "ablation.png",
        dirs["reports"] / "ablation.csv",
    )

    best = np.argsort(report.ranks)[:5]
    print(f"ablation over {plan.n_subsets} subsets ({len(report.failed_subsets)} failed)")
    rows = [[int(f), fmap[f][0], fmap[f][1], f"{report.scores[f]:.3f}", int(report.ranks[f])] for f in best]
    print(reporting.format_metric_table(rows, ["feature", "point", "axis", "score", "rank"]))
    print(f"reports -> {dirs['reports'] / 'ablation.json'} (+ .csv, .png)")
    return 0


# -------------------------------------------------------------- compare-ema


def cmd_compare_ema(config: RunConfig, args) -> int:
    from .models import load_generator

    dirs = _require_preprocessed(config)
    device = resolve_device(args.device)

    cmp_cfg = config.section("compare_ema")
    mri_path = args.checkpoint or cmp_cfg.get("mri_checkpoint")
    ema_path = args.ema_checkpoint or cmp_cfg.get("ema_checkpoint")
    if not mri_path or not ema_path:
        raise ConfigurationError(
            "compare-ema needs both checkpoints (config compare_ema.mri_checkpoint/"
            "ema_checkpoint or --checkpoint/--ema-checkpoint)"
        )

    def load(path_str):
        path = Path(path_str)
        if not path.is_absolute():
            path = config.base_dir / path
        if not path.exists():
            raise LoadError(f"checkpoint not found: {path}")
        model, meta = load_generator(path)
        if device != "cpu":
            model.to(device)
        return model, meta

    model_mri, meta_mri = load(mri_path)
    model_ema, meta_ema = load(ema_path)
    if meta_mri.get("features", "mri") != "mri" or meta_ema.get("features") != "ema":
        raise ConfigurationError(
            "compare-ema expects an MRI-features checkpoint and an EMA-features checkpoint"
        )
    split_a = meta_mri.get("split_test_ids")
    split_b = meta_ema.get("split_test_ids")
    if split_a is not None and split_b is not None and sorted(split_a) != sorted(split_b):
        raise ConfigurationError("checkpoints were trained against different test splits")

    items_mri = _test_items(config, dirs, "mri")
    items_ema = _test_items(config, dirs, "ema")
    asr = _asr_from_config(config)
    chunk = config.section("evaluation").get("chunk_frames")

    report = compare_ema(
        model_mri, items_mri, model_ema, items_ema, asr_client=asr, chunk_frames=chunk
    )
    dirs["reports"].mkdir(parents=True, exist_ok=True)
    reporting.write_report(
        report,
        dirs["reports"] / "compare_ema.json",
        config=config.raw,
        seeds={"seed": config.seed},
    )
    rows = []
    for name in ("mri", "ema"):
        entry = report[name]
        row = [name, f"{entry['mcd']['mean_db']:.3f} ± {entry['mcd']['std_db']:.3f}"]
        if "cer" in entry:
            row.append(f"{entry['cer']['mean']:.3f} ± {entry['cer']['std']:.3f}")
        rows.append(row)
    headers = ["features", "MCD (dB)"] + (["CER"] if "cer" in report["mri"] else [])
    print(reporting.format_metric_table(rows, headers))
    print(f"winner: {report['winner']}")
    print(f"report -> {dirs['reports'] / 'compare_ema.json'}")
    return 0


# --------------------------------------------------------------------- main


class _Parser(argparse.ArgumentParser):
    # argument mistakes are user errors: exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="artic",
        description="Vocal-tract contour to speech synthesis pipeline",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, **extra_flags):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run config")
        p.add_argument("--out-dir", default=None, help="override config out_dir")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--device", default=None, help="cpu or cuda[:N] (or ARTIC_DEVICE)")
        for flag, kwargs in extra_flags.items():
            p.add_argument(flag, **kwargs)
        p.set_defaults(fn=fn)
        return p

    add("preprocess", cmd_preprocess, **{"--force": dict(action="store_true")})
    add(
        "train",
        cmd_train,
        **{
            "--steps": dict(type=int, default=None),
            "--init-from": dict(dest="init_from", default=None),
            "--features": dict(choices=("mri", "ema"), default=None),
        },
    )
    add(
        "synthesize",
        cmd_synthesize,
        **{
            "--checkpoint": dict(default=None),
            "--split": dict(choices=("train", "val", "test"), default=None),
        },
    )
    add("evaluate", cmd_evaluate, **{"--checkpoint": dict(default=None)})
    add(
        "benchmark",
        cmd_benchmark,
        **{
            "--checkpoint": dict(default=None),
            "--trials": dict(type=int, default=None),
        },
    )
    add(
        "ablate",
        cmd_ablate,
        **{
            "--checkpoint": dict(default=None),
            "--n-subsets": dict(dest="n_subsets", type=int, default=None),
        },
    )
    add(
        "compare-ema",
        cmd_compare_ema,
        **{
            "--checkpoint": dict(default=None, help="MRI-features checkpoint"),
            "--ema-checkpoint": dict(dest="ema_checkpoint", default=None),
        },
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits (bad args, --help); keep testable
        code = exc.code
        return code if isinstance(code, int) else 1
    try:
        config = RunConfig.from_file(args.config)
        if args.out_dir:
            config.raw["out_dir"] = str(Path(args.out_dir).resolve())
        if args.seed is not None:
            config.raw["seed"] = args.seed
        return args.fn(config, args)
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (TrainingDivergedError, TransportError, DeviceError, ArticError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary maps crashes to exit 2
        import traceback

        traceback.print_exc()
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
