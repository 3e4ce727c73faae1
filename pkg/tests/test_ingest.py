"""Trajectory container round-trips, manifest validation, and splits."""

import json
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artic import ingest
from artic.errors import AlignmentError, FormatError, LoadError, SchemaError
from artic.features import ArticulatoryTrajectory, default_feature_map
from artic.synthetic import make_synthetic_corpus
from conftest import make_contours


def random_trajectory(rng, t=12, d=8, uid="u0"):
    data = rng.standard_normal((t, d)).astype(np.float32)
    return ArticulatoryTrajectory(uid, data, feature_index_map=default_feature_map(d))


class TestTrajectoryContainer:
    def test_round_trip_bit_exact(self, tmp_path, rng):
        traj = random_trajectory(rng)
        path = tmp_path / "t.artj"
        ingest.write_trajectory(traj, path)
        back = ingest.read_trajectory(path, utterance_id="u0")
        assert back.data.dtype == np.float32
        assert back.data.tobytes() == traj.data.tobytes()
        assert back.utterance_id == "u0"

    @settings(max_examples=25, deadline=None)
    @given(t=st.integers(1, 40), half_d=st.integers(1, 120), seed=st.integers(0, 2**31))
    def test_round_trip_property(self, tmp_path_factory, t, half_d, seed):
        rng = np.random.default_rng(seed)
        traj = random_trajectory(rng, t=t, d=2 * half_d)
        path = tmp_path_factory.mktemp("artj") / "t.artj"
        ingest.write_trajectory(traj, path)
        back = ingest.read_trajectory(path)
        assert back.data.shape == (t, 2 * half_d)
        assert back.data.tobytes() == traj.data.tobytes()

    def test_header_layout(self, tmp_path, rng):
        traj = random_trajectory(rng, t=3, d=4)
        path = tmp_path / "t.artj"
        ingest.write_trajectory(traj, path)
        blob = path.read_bytes()
        assert blob[:4] == b"ARTJ"
        version, t, d = struct.unpack("<III", blob[4:16])
        assert (version, t, d) == (1, 3, 4)
        assert len(blob) == 16 + 3 * 4 * 4

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "t.artj"
        path.write_bytes(b"NOPE" + b"\x00" * 28)
        with pytest.raises(FormatError):
            ingest.read_trajectory(path)

    def test_bad_version_rejected(self, tmp_path, rng):
        traj = random_trajectory(rng, t=2, d=2)
        path = tmp_path / "t.artj"
        ingest.write_trajectory(traj, path)
        blob = bytearray(path.read_bytes())
        blob[4:8] = struct.pack("<I", 99)
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError):
            ingest.read_trajectory(path)

    def test_truncated_payload_rejected(self, tmp_path, rng):
        traj = random_trajectory(rng, t=4, d=4)
        path = tmp_path / "t.artj"
        ingest.write_trajectory(traj, path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(FormatError):
            ingest.read_trajectory(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(LoadError):
            ingest.read_trajectory(tmp_path / "absent.artj")

    def test_contours_round_trip(self, tmp_path):
        seq = make_contours(t=5, p=20, seed=3)
        path = tmp_path / "c.artj"
        ingest.write_contours(seq, path)
        back = ingest.read_contours(path, utterance_id=seq.utterance_id)
        assert back.frames.shape == (5, 20, 2)
        np.testing.assert_array_equal(
            back.frames.astype(np.float32), seq.frames.astype(np.float32)
        )


class TestManifest:
    def test_synthetic_manifest_loads(self, corpus_dir):
        records = ingest.load_manifest(corpus_dir / "manifest.json")
        assert len(records) == 6
        ids = [r.utterance_id for r in records]
        assert len(set(ids)) == 6
        for r in records:
            assert r.contours.num_points == 170
            assert r.transcript

    def test_missing_key_raises(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"frame_rate": 83.0, "num_points": 170}))
        with pytest.raises(SchemaError):
            ingest.load_manifest(path)

    def test_duplicate_id_raises(self, tmp_path):
        corpus = tmp_path / "corpus"
        manifest = make_synthetic_corpus(corpus, n_utterances=2, seed=0)
        doc = json.loads(manifest.read_text())
        doc["utterances"][1]["id"] = doc["utterances"][0]["id"]
        manifest.write_text(json.dumps(doc))
        with pytest.raises(SchemaError, match="duplicate"):
            ingest.load_manifest(manifest)

    def test_wrong_point_count_raises(self, tmp_path):
        corpus = tmp_path / "corpus"
        manifest = make_synthetic_corpus(corpus, n_utterances=1, seed=0)
        doc = json.loads(manifest.read_text())
        doc["num_points"] = 115
        manifest.write_text(json.dumps(doc))
        with pytest.raises(SchemaError):
            ingest.load_manifest(manifest)

    def test_duration_drift_raises(self, tmp_path):
        from artic import audio

        corpus = tmp_path / "corpus"
        manifest = make_synthetic_corpus(corpus, n_utterances=1, seed=0)
        doc = json.loads(manifest.read_text())
        wav_rel = doc["utterances"][0]["original_wav"]
        wav = audio.read_wav(corpus / wav_rel)
        # lop 0.2 s off the audio: contour and waveform clocks now disagree
        short = audio.Waveform(wav.samples[: len(wav.samples) - 4000], wav.sample_rate)
        audio.write_wav(short, corpus / wav_rel)
        with pytest.raises(AlignmentError):
            ingest.load_manifest(manifest)

    def test_skip_audio_validation(self, tmp_path):
        corpus = tmp_path / "corpus"
        manifest = make_synthetic_corpus(corpus, n_utterances=1, seed=0)
        doc = json.loads(manifest.read_text())
        (corpus / doc["utterances"][0]["original_wav"]).unlink()
        records = ingest.load_manifest(manifest, validate_audio=False)
        assert len(records) == 1


class TestSplit:
    def _records(self, n):
        return [
            ingest.UtteranceRecord(
                utterance_id=f"u{i:03d}",
                contours=make_contours(f"u{i:03d}", t=3, p=4, seed=i),
                original_wav_path=None,
                enhanced_wav_path=None,
                transcript="",
            )
            for i in range(n)
        ]

    def test_sizes_follow_rounding_contract(self):
        # val and test sizes round to nearest; train absorbs the remainder
        assert ingest.split_sizes(236) == (200, 12, 24)
        assert ingest.split_sizes(20) == (17, 1, 2)
        assert ingest.split_sizes(10, ratios=(0.8, 0.1, 0.1)) == (8, 1, 1)

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(3, 400))
    def test_sizes_partition_everything(self, n):
        train, val, test = ingest.split_sizes(n)
        assert train + val + test == n
        assert train > 0

    def test_assignment_deterministic_and_order_free(self):
        records = self._records(23)
        a = ingest.make_split(records, seed=9)
        b = ingest.make_split(list(reversed(records)), seed=9)
        by_id_a = {r.utterance_id: r.split for r in a}
        by_id_b = {r.utterance_id: r.split for r in b}
        assert by_id_a == by_id_b

    def test_seed_changes_assignment(self):
        records = self._records(40)
        a = {r.utterance_id: r.split for r in ingest.make_split(records, seed=1)}
        b = {r.utterance_id: r.split for r in ingest.make_split(records, seed=2)}
        assert a != b

    def test_split_round_trip(self, tmp_path):
        records = ingest.make_split(self._records(12), seed=4)
        path = tmp_path / "split.json"
        ingest.save_split(records, path)
        loaded = ingest.load_split(path)
        assert set(loaded) == {"train", "val", "test"}
        flat = [uid for ids in loaded.values() for uid in ids]
        assert sorted(flat) == sorted(r.utterance_id for r in records)
        for r in records:
            assert r.utterance_id in loaded[r.split]
