"""Checkpoint archive format and warm-start tensor matching."""

import json
import zipfile

import numpy as np
import pytest
import torch

from artic.errors import FormatError, LoadError
from artic.models.checkpoint import (
    init_from_pretrained,
    load_checkpoint,
    save_checkpoint,
    save_model,
)
from conftest import tiny_generator


class TestArchiveFormat:
    def test_round_trip_exact(self, tmp_path, rng):
        tensors = {
            "a.weight": rng.standard_normal((3, 4)).astype(np.float32),
            "a.bias": rng.standard_normal(4),  # float64 stays float64
            "steps": np.array(7, dtype=np.int64),
            "table": rng.integers(0, 100, (2, 5)).astype(np.int32),
        }
        path = tmp_path / "m.ckpt"
        save_checkpoint(tensors, path, meta={"note": "x"})
        back, meta = load_checkpoint(path)
        assert meta == {"note": "x"}
        assert set(back) == set(tensors)
        for name, arr in tensors.items():
            assert back[name].dtype == arr.dtype
            np.testing.assert_array_equal(back[name], arr)

    def test_is_a_plain_zip_with_manifest(self, tmp_path, rng):
        path = tmp_path / "m.ckpt"
        save_checkpoint({"w": rng.standard_normal(6).astype(np.float32)}, path)
        with zipfile.ZipFile(path) as zf:
            names = zf.namelist()
            assert "manifest.json" in names
            manifest = json.loads(zf.read("manifest.json"))
        assert manifest["format"] == "artic-checkpoint"
        assert manifest["version"] == 1
        entry = manifest["tensors"][0]
        assert entry["name"] == "w"
        assert entry["dtype"] == "float32"
        assert entry["file"] in names

    def test_same_content_same_bytes(self, tmp_path, rng):
        # archives carry no wall-clock state, so rewrites are bit-identical
        tensors = {"w": rng.standard_normal((4, 4)).astype(np.float32)}
        p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        save_checkpoint(tensors, p1, meta={"step": 3})
        save_checkpoint(tensors, p2, meta={"step": 3})
        assert p1.read_bytes() == p2.read_bytes()

    def test_missing_file(self, tmp_path):
        with pytest.raises(LoadError):
            load_checkpoint(tmp_path / "nope.ckpt")

    def test_not_a_zip(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"this is not an archive")
        with pytest.raises(FormatError):
            load_checkpoint(path)

    def test_missing_manifest(self, tmp_path):
        path = tmp_path / "m.ckpt"
        with zipfile.ZipFile(path, "w") as zf:
            zf.writestr("tensors/000000.bin", b"\x00" * 8)
        with pytest.raises(FormatError):
            load_checkpoint(path)

    def test_wrong_version(self, tmp_path, rng):
        path = tmp_path / "m.ckpt"
        save_checkpoint({"w": rng.standard_normal(3).astype(np.float32)}, path)
        with zipfile.ZipFile(path) as zf:
            manifest = json.loads(zf.read("manifest.json"))
            blob = zf.read(manifest["tensors"][0]["file"])
        manifest["version"] = 9
        with zipfile.ZipFile(path, "w") as zf:
            zf.writestr("manifest.json", json.dumps(manifest))
            zf.writestr("tensors/000000.bin", blob)
        with pytest.raises(FormatError):
            load_checkpoint(path)

    def test_truncated_tensor_payload(self, tmp_path, rng):
        path = tmp_path / "m.ckpt"
        save_checkpoint({"w": rng.standard_normal(8).astype(np.float32)}, path)
        with zipfile.ZipFile(path) as zf:
            manifest = zf.read("manifest.json")
        with zipfile.ZipFile(path, "w") as zf:
            zf.writestr("manifest.json", manifest)
            zf.writestr("tensors/000000.bin", b"\x00" * 12)  # 3 floats, not 8
        with pytest.raises(FormatError):
            load_checkpoint(path)


class TestWarmStart:
    def test_self_init_copies_everything(self, tmp_path):
        model = tiny_generator(seed=0)
        path = tmp_path / "self.ckpt"
        save_model(model, path)
        report = init_from_pretrained(tiny_generator(seed=1), path)
        assert len(report.skipped) == 0
        assert len(report.copied) == len(list(model.state_dict()))
        assert report.warning is None

    def test_copied_values_actually_land(self, tmp_path):
        source = tiny_generator(seed=2)
        path = tmp_path / "src.ckpt"
        save_model(source, path)
        target = tiny_generator(seed=3)
        init_from_pretrained(target, path)
        for (_, a), (_, b) in zip(source.state_dict().items(), target.state_dict().items()):
            torch.testing.assert_close(a, b, rtol=0, atol=0)

    def test_input_width_mismatch_skips_only_entry_conv(self, tmp_path):
        # a model trained on 12 input features warm-starts one built for 6:
        # every tensor matches except the entry convolution
        wide = tiny_generator(seed=4, input_dim=12)
        path = tmp_path / "wide.ckpt"
        save_model(wide, path)
        narrow = tiny_generator(seed=5, input_dim=6)
        report = init_from_pretrained(narrow, path)
        skipped_names = {name for name, _ in report.skipped}
        assert any("conv_pre" in n for n in skipped_names)
        for name, reason in report.skipped:
            if "conv_pre" in name and "weight" in name:
                assert "shape" in reason
        assert len(report.copied) > 0
        assert report.warning is None

    def test_empty_checkpoint_warns(self, tmp_path):
        path = tmp_path / "empty.ckpt"
        save_checkpoint({}, path)
        model = tiny_generator()
        before = {k: v.clone() for k, v in model.state_dict().items()}
        report = init_from_pretrained(model, path)
        assert report.copied == []
        assert report.warning is not None
        assert "warning" in report.to_dict()
        for k, v in model.state_dict().items():
            torch.testing.assert_close(v, before[k], rtol=0, atol=0)

    def test_extra_checkpoint_tensors_reported(self, tmp_path, rng):
        model = tiny_generator(seed=6)
        tensors = dict(model.state_dict())
        tensors["optimizer.exp_avg"] = rng.standard_normal(4).astype(np.float32)
        path = tmp_path / "extra.ckpt"
        save_checkpoint(tensors, path)
        report = init_from_pretrained(tiny_generator(seed=7), path)
        reasons = {name: reason for name, reason in report.skipped}
        assert reasons.get("optimizer.exp_avg") == "not in model"
