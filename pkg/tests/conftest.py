"""Shared fixtures: tiny corpora, toy models, and tempdir plumbing."""

import json
import pathlib

import numpy as np
import pytest
import torch

from artic import audio, features
from artic.models.generator import (
    GeneratorConfig,
    HifiCarGenerator,
    toy_generator_config,
)
from artic.synthetic import make_synthetic_corpus


def make_contours(utterance_id="utt", t=6, p=170, seed=0, frame_rate=83.0):
    rng = np.random.default_rng(seed)
    frames = rng.uniform(10.0, 74.0, size=(t, p, 2))
    return features.ContourSequence(
        utterance_id=utterance_id, frames=frames, frame_rate=frame_rate
    )


def tiny_generator_config(**overrides) -> GeneratorConfig:
    """Smallest config that still exercises every architectural piece."""
    base = dict(
        input_dim=6,
        initial_channels=8,
        upsample_factors=(8, 6, 5),
        resblock_kernel_sizes=(3,),
        resblock_dilations=((1, 2),),
        history_channels=4,
        ar_context=240,
        chunk_frames=4,
    )
    base.update(overrides)
    return GeneratorConfig(**base)


def tiny_generator(seed=0, **overrides) -> HifiCarGenerator:
    torch.manual_seed(seed)
    return HifiCarGenerator(tiny_generator_config(**overrides))


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory) -> pathlib.Path:
    """A 6-utterance synthetic corpus shared by slow integration tests."""
    root = tmp_path_factory.mktemp("corpus")
    make_synthetic_corpus(root, n_utterances=6, seed=21)
    return root


@pytest.fixture(scope="session")
def run_dir(tmp_path_factory, corpus_dir) -> pathlib.Path:
    """Workspace with a ready-to-run CLI config next to the shared corpus."""
    root = tmp_path_factory.mktemp("run")
    cfg = {
        "manifest": str(corpus_dir / "manifest.json"),
        "out_dir": str(root / "out"),
        "seed": 3,
        "split": {"ratios": [0.7, 0.15, 0.15], "seed": 3},
        "model": {"scale": "toy", "features": "mri"},
        "training": {
            "steps": 4,
            "batch_size": 2,
            "segment_frames": 8,
            "checkpoint_every": 1000,
            "seed": 5,
        },
        "evaluation": {
            "asr": {"kind": "stub", "transcripts": ["tone one", "tone two"]},
            "chunk_frames": 4,
        },
        "ablation": {"seed": 11, "n_subsets": 2, "keep_fraction": 0.9},
        "benchmark": {"trials": 2},
    }
    (root / "run.json").write_text(json.dumps(cfg, indent=2))
    return root


def read_reference_wavs(corpus_dir, utterance_id):
    orig = audio.read_wav(corpus_dir / "wav" / f"{utterance_id}-original.wav")
    enh = audio.read_wav(
        corpus_dir / "wav" / f"{utterance_id}-enhanced.wav", provenance="enhanced"
    )
    return orig, enh
