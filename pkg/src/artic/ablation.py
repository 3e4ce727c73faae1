"""Feature-importance ablation by random subset masking.

Protocol: draw random subsets keeping 90% of the feature columns, zero the
complement at model input (after centering), synthesize the test set per
subset, and score each subset by its mean MCD against the references. A
feature's importance score is the mean MCD of the subsets that kept it
unmasked: lower score = the metric stayed better while the feature was
present = more important. Ranks order features by ascending score (1 = most
important), ties broken by ascending feature index.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, SchemaError
from .features import FEATURE_DIM, mask_features

N_SUBSETS = 50
KEEP_FRACTION = 0.9


@dataclass(eq=False)
class SubsetPlan:
    """Reproducible list of kept-index subsets over [0, n_features)."""

    n_features: int
    keep_fraction: float
    seed: int
    subsets: list

    def __post_init__(self):
        keep_size = self.keep_size
        cleaned = []
        for i, subset in enumerate(self.subsets):
            idx = tuple(sorted(int(j) for j in subset))
            if len(set(idx)) != len(idx):
                raise SchemaError(f"subset {i} repeats indices")
            if len(idx) != keep_size:
                raise SchemaError(f"subset {i} has {len(idx)} indices, expected {keep_size}")
            if idx and (idx[0] < 0 or idx[-1] >= self.n_features):
                raise SchemaError(f"subset {i} has out-of-range indices")
            cleaned.append(idx)
        self.subsets = cleaned

    @property
    def n_subsets(self) -> int:
        return len(self.subsets)

    @property
    def keep_size(self) -> int:
        return round(self.keep_fraction * self.n_features)

    def to_dict(self) -> dict:
        return {
            "n_features": self.n_features,
            "keep_fraction": self.keep_fraction,
            "seed": self.seed,
            "subsets": [list(s) for s in self.subsets],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SubsetPlan":
        return cls(
            n_features=int(d["n_features"]),
            keep_fraction=float(d["keep_fraction"]),
            seed=int(d["seed"]),
            subsets=d["subsets"],
        )


def make_plan(
    seed: int,
    n_subsets: int = N_SUBSETS,
    n_features: int = FEATURE_DIM,
    keep_fraction: float = KEEP_FRACTION,
) -> SubsetPlan:
    """Draw n_subsets uniform random subsets keeping round(fraction * n) features."""
    if not 0.0 < keep_fraction <= 1.0:
        raise ConfigurationError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    if n_subsets < 1:
        raise ConfigurationError(f"n_subsets must be >= 1, got {n_subsets}")
    keep_size = round(keep_fraction * n_features)
    if keep_size < 1:
        raise ConfigurationError(
            f"keep_fraction {keep_fraction} keeps 0 of {n_features} features"
        )
    rng = np.random.default_rng(seed)
    subsets = [
        tuple(sorted(rng.choice(n_features, size=keep_size, replace=False).tolist()))
        for _ in range(n_subsets)
    ]
    return SubsetPlan(
        n_features=n_features, keep_fraction=keep_fraction, seed=seed, subsets=subsets
    )


def save_plan(plan: SubsetPlan, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(plan.to_dict(), fh)
        fh.write("\n")


def load_plan(path) -> SubsetPlan:
    with open(path, "r", encoding="utf-8") as fh:
        return SubsetPlan.from_dict(json.load(fh))


@dataclass(eq=False)
class FeatureImportanceReport:
    """Per-feature scores/ranks plus the per-subset evidence behind them."""

    scores: np.ndarray
    ranks: np.ndarray
    per_subset_mcd: list
    inclusion_counts: np.ndarray
    failed_subsets: dict = field(default_factory=dict)
    plan_seed: int = 0

    @property
    def has_failures(self) -> bool:
        return bool(self.failed_subsets)

    def to_dict(self) -> dict:
        return {
            "scores": [float(s) if np.isfinite(s) else None for s in self.scores],
            "ranks": [int(r) for r in self.ranks],
            "per_subset_mcd": [
                float(v) if v is not None and np.isfinite(v) else None
                for v in self.per_subset_mcd
            ],
            "inclusion_counts": [int(c) for c in self.inclusion_counts],
            "failed_subsets": {str(k): v for k, v in self.failed_subsets.items()},
            "warning": "some subsets failed and were excluded" if self.has_failures else None,
            "plan_seed": self.plan_seed,
        }


def aggregate_scores(plan: SubsetPlan, subset_mcds, failed=()) -> FeatureImportanceReport:
    """Pure aggregation: subset MCDs -> per-feature scores, ranks, counts.

    Failed subset indices are excluded everywhere. A feature appearing in no
    usable subset scores +inf and lands at the worst ranks (index-ordered).
    """
    subset_mcds = list(subset_mcds)
    if len(subset_mcds) != plan.n_subsets:
        raise ConfigurationError(
            f"{len(subset_mcds)} subset scores for {plan.n_subsets} subsets"
        )
    failed = set(int(i) for i in failed)
    n = plan.n_features
    totals = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    for i, subset in enumerate(plan.subsets):
        if i in failed:
            continue
        idx = np.asarray(subset, dtype=np.int64)
        totals[idx] += float(subset_mcds[i])
        counts[idx] += 1
    scores = np.full(n, np.inf)
    seen = counts > 0
    scores[seen] = totals[seen] / counts[seen]
    order = np.lexsort((np.arange(n), scores))
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.arange(1, n + 1)
    return FeatureImportanceReport(
        scores=scores,
        ranks=ranks,
        per_subset_mcd=[None if i in failed else float(subset_mcds[i]) for i in range(plan.n_subsets)],
        inclusion_counts=counts,
        failed_subsets={},
        plan_seed=plan.seed,
    )


def run_ablation(
    model,
    test_set,
    plan: SubsetPlan,
    synthesize_fn=None,
    mcd_fn=None,
    chunk_frames: int | None = None,
) -> FeatureImportanceReport:
    """Mask, synthesize, and score every subset; aggregate per-feature.

    test_set: sequence of (trajectory, reference Waveform) pairs. Synthesis
    uses the free-running generation path. synthesize_fn and mcd_fn are
    injectable so oracle tests can run below the waveform layer. A subset
    whose synthesis or scoring raises is marked failed, excluded from
    aggregation, and recorded with its reason.
    """
    test_set = list(test_set)
    if not test_set:
        raise ConfigurationError("ablation needs a non-empty test set")
    if synthesize_fn is None:
        from .models.generator import synthesize_utterance

        def synthesize_fn(traj):
            return synthesize_utterance(model, traj, chunk_frames=chunk_frames)

    if mcd_fn is None:
        from .evaluation.mcd import mcd as mcd_fn

    subset_means = [np.nan] * plan.n_subsets
    failures = {}
    for i, subset in enumerate(plan.subsets):
        try:
            values = []
            for traj, reference in test_set:
                masked = mask_features(traj, subset)
                synthesized = synthesize_fn(masked)
                values.append(float(mcd_fn(reference, synthesized)))
            subset_means[i] = float(np.mean(values))
        except Exception as exc:  # noqa: BLE001 - failed subsets are data, not crashes
            failures[i] = f"{type(exc).__name__}: {exc}"

    report = aggregate_scores(
        plan, [0.0 if i in failures else subset_means[i] for i in range(plan.n_subsets)],
        failed=failures.keys(),
    )
    report.failed_subsets = failures
    return report


@dataclass(eq=False)
class EvalItem:
    """One test utterance ready for metric computation."""

    utterance_id: str
    trajectory: object
    reference: object
    transcript: str = ""


def compare_ema(
    model_mri,
    items_mri,
    model_ema,
    items_ema,
    asr_client=None,
    chunk_frames: int | None = None,
) -> dict:
    """Evaluate two representations on the same test split, side by side.

    items_mri and items_ema must cover the same utterance ids (same split);
    anything else is a configuration error. Returns a report with MCD (and
    CER when a recognizer is supplied) for both, plus the winner per metric
    ("tie" on exact equality of means).
    """
    from .evaluation.asr import transcribe
    from .evaluation.cer import cer
    from .evaluation.mcd import CerResult, McdResult, mcd
    from .models.generator import synthesize_utterance

    items_mri = list(items_mri)
    items_ema = list(items_ema)
    ids_mri = [it.utterance_id for it in items_mri]
    ids_ema = [it.utterance_id for it in items_ema]
    if sorted(ids_mri) != sorted(ids_ema):
        raise ConfigurationError(
            f"test splits differ: {sorted(set(ids_mri) ^ set(ids_ema))}"
        )

    def evaluate(model, items):
        mcds = {}
        cers = {}
        for item in items:
            synthesized = synthesize_utterance(model, item.trajectory, chunk_frames=chunk_frames)
            mcds[item.utterance_id] = mcd(item.reference, synthesized)
            if asr_client is not None:
                hypothesis = transcribe(synthesized, asr_client, utterance_id=item.utterance_id)
                cers[item.utterance_id] = cer(item.transcript, hypothesis)
        out = {"mcd": McdResult(mcds).to_dict()}
        if cers:
            out["cer"] = CerResult(cers).to_dict()
        return out

    report = {"mri": evaluate(model_mri, items_mri), "ema": evaluate(model_ema, items_ema)}

    def winner(metric, key):
        a = report["mri"].get(metric)
        b = report["ema"].get(metric)
        if a is None or b is None:
            return None
        if a[key] == b[key]:
            return "tie"
        return "mri" if a[key] < b[key] else "ema"

    report["winner"] = {"mcd": winner("mcd", "mean_db")}
    if "cer" in report["mri"]:
        report["winner"]["cer"] = winner("cer", "mean")
    return report


def render_importance_map(
    report: FeatureImportanceReport,
    feature_index_map,
    reference_frame: np.ndarray,
    png_path,
    csv_path,
) -> None:
    """Plot per-point importance at reference locations; dump per-feature CSV.

    reference_frame holds one [P x 2] contour frame whose rows follow the
    map's point order (first appearance). Each plotted point is shaded by its
    better (lower) rank across the x and y columns; darker = more important.
    The CSV has one row per feature: point, axis, score, rank.
    """
    feature_index_map = tuple(feature_index_map)
    if len(feature_index_map) != len(report.scores):
        raise ConfigurationError(
            f"feature map has {len(feature_index_map)} entries for {len(report.scores)} scores"
        )

    point_order = []
    for p, _axis in feature_index_map:
        if p not in point_order:
            point_order.append(p)
    reference_frame = np.asarray(reference_frame, dtype=np.float64)
    if reference_frame.shape != (len(point_order), 2):
        raise ConfigurationError(
            f"reference frame shape {reference_frame.shape}, expected ({len(point_order)}, 2)"
        )

    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["point", "axis", "score", "rank"])
        for col, (p, axis) in enumerate(feature_index_map):
            score = report.scores[col]
            writer.writerow(
                [p, axis, f"{score:.6f}" if np.isfinite(score) else "inf", int(report.ranks[col])]
            )

    best_rank = {}
    for col, (p, _axis) in enumerate(feature_index_map):
        r = int(report.ranks[col])
        best_rank[p] = min(best_rank.get(p, r), r)

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    n = len(report.ranks)
    shades = np.array(
        [(best_rank[p] - 1) / max(n - 1, 1) for p in point_order]
    )
    fig, ax = plt.subplots(figsize=(6, 6))
    sc = ax.scatter(
        reference_frame[:, 0],
        reference_frame[:, 1],
        c=shades,
        cmap="gray",
        vmin=0.0,
        vmax=1.0,
        s=36,
        edgecolors="black",
        linewidths=0.3,
    )
    ax.set_xlabel("x (pixels)")
    ax.set_ylabel("y (pixels)")
    ax.set_title("Feature importance by contour point (darker = more important)")
    ax.set_aspect("equal")
    ax.invert_yaxis()
    fig.colorbar(sc, ax=ax, label="normalized rank")
    png_path = Path(png_path)
    png_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
