"""Speech synthesis from vocal-tract MRI contour trajectories.

Pipeline: ingest contour/audio corpora, extract centered 230-dim articulatory
trajectories, train a direct autoregressive GAN vocoder (plus intermediate-
representation baselines), and evaluate with MCD, character error rate, and
inference timing, including random-subset feature-importance ablation.
"""

__version__ = "0.1.0"

from . import ablation, audio, errors, evaluation, features, ingest, reporting, synthetic
from .audio import MelSpectrogram, Waveform, melspectrogram, mix_targets, read_wav, write_wav
from .errors import ArticError
from .features import (
    ArticulatoryTrajectory,
    CenterSpec,
    ContourSequence,
    FeatureConfig,
    center_and_flatten,
    default_feature_config,
    estimate_ema,
    fit_center,
    mask_features,
    prune,
)
from .ingest import UtteranceRecord, load_manifest, make_split, read_trajectory, write_trajectory

__all__ = [
    "__version__",
    "ablation",
    "audio",
    "errors",
    "evaluation",
    "features",
    "ingest",
    "reporting",
    "synthetic",
    "MelSpectrogram",
    "Waveform",
    "melspectrogram",
    "mix_targets",
    "read_wav",
    "write_wav",
    "ArticError",
    "ArticulatoryTrajectory",
    "CenterSpec",
    "ContourSequence",
    "FeatureConfig",
    "center_and_flatten",
    "default_feature_config",
    "estimate_ema",
    "fit_center",
    "mask_features",
    "prune",
    "UtteranceRecord",
    "load_manifest",
    "make_split",
    "read_trajectory",
    "write_trajectory",
]
