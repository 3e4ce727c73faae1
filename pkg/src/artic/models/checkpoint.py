"""Named-tensor checkpoint archive and warm-start loading.

A checkpoint is a zip file holding manifest.json plus one raw binary per
tensor. The manifest lists every tensor's name, shape, dtype, and member
file; payloads are little-endian row-major with no framing, so any language
with a zip reader can consume them.
"""

from __future__ import annotations

import json
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from ..errors import FormatError, LoadError

FORMAT_NAME = "artic-checkpoint"
FORMAT_VERSION = 1

_DTYPES = {"float32": "<f4", "float64": "<f8", "int64": "<i8", "int32": "<i4"}

# Fixed entry timestamp (zip epoch) so identical tensors give identical bytes.
_ZIP_DATE = (1980, 1, 1, 0, 0, 0)


def _write_member(zf: zipfile.ZipFile, member: str, payload) -> None:
    info = zipfile.ZipInfo(member, date_time=_ZIP_DATE)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.external_attr = 0o644 << 16
    zf.writestr(info, payload)


def _to_numpy(value) -> np.ndarray:
    if isinstance(value, torch.Tensor):
        return value.detach().cpu().numpy()
    return np.asarray(value)


def save_checkpoint(tensors: dict, path, meta: dict | None = None) -> None:
    """Write name -> tensor/array mapping as a checkpoint archive."""
    entries = []
    blobs = []
    for i, (name, value) in enumerate(tensors.items()):
        arr = _to_numpy(value)
        dtype = str(arr.dtype)
        if dtype not in _DTYPES:
            arr = arr.astype(np.float32)
            dtype = "float32"
        member = f"tensors/{i:06d}.bin"
        entries.append(
            {"name": str(name), "file": member, "shape": list(arr.shape), "dtype": dtype}
        )
        blobs.append((member, np.ascontiguousarray(arr.astype(_DTYPES[dtype])).tobytes()))
    manifest = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "tensors": entries,
        "meta": meta or {},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(path, "w") as zf:
        _write_member(zf, "manifest.json", json.dumps(manifest, indent=2))
        for member, blob in blobs:
            _write_member(zf, member, blob)


def load_checkpoint(path):
    """Read a checkpoint archive; returns (tensors: dict[str, ndarray], meta)."""
    path = Path(path)
    if not path.exists():
        raise LoadError(f"checkpoint not found: {path}")
    try:
        zf = zipfile.ZipFile(path)
    except (zipfile.BadZipFile, OSError) as exc:
        raise FormatError(f"{path}: not a checkpoint archive: {exc}") from exc
    with zf:
        try:
            manifest = json.loads(zf.read("manifest.json"))
        except KeyError as exc:
            raise FormatError(f"{path}: archive has no manifest.json") from exc
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: manifest is not valid JSON: {exc}") from exc
        if manifest.get("format") != FORMAT_NAME:
            raise FormatError(f"{path}: unexpected format {manifest.get('format')!r}")
        if manifest.get("version") != FORMAT_VERSION:
            raise FormatError(f"{path}: unsupported version {manifest.get('version')!r}")
        tensors = {}
        for entry in manifest["tensors"]:
            dtype = entry["dtype"]
            if dtype not in _DTYPES:
                raise FormatError(f"{path}: tensor {entry['name']} has unknown dtype {dtype}")
            blob = zf.read(entry["file"])
            arr = np.frombuffer(blob, dtype=_DTYPES[dtype])
            expected = int(np.prod(entry["shape"], dtype=np.int64)) if entry["shape"] else 1
            if arr.size != expected:
                raise FormatError(
                    f"{path}: tensor {entry['name']} payload has {arr.size} values, expected {expected}"
                )
            tensors[entry["name"]] = arr.reshape(entry["shape"]).copy()
    return tensors, manifest.get("meta", {})


def save_model(model: torch.nn.Module, path, meta: dict | None = None) -> None:
    save_checkpoint(dict(model.state_dict()), path, meta=meta)


@dataclass(eq=False)
class InitReport:
    """Which tensors a warm start copied and which it left at fresh init."""

    copied: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (name, reason) pairs

    @property
    def warning(self) -> str | None:
        if not self.copied:
            return "no tensors copied; model keeps its fresh initialization"
        return None

    def to_dict(self) -> dict:
        d = {
            "copied": list(self.copied),
            "skipped": [{"name": n, "reason": r} for n, r in self.skipped],
        }
        if self.warning:
            d["warning"] = self.warning
        return d

    def __str__(self) -> str:
        lines = [f"copied={len(self.copied)} skipped={len(self.skipped)}"]
        for name, reason in self.skipped:
            lines.append(f"  skipped {name}: {reason}")
        if self.warning:
            lines.append(f"  WARNING: {self.warning}")
        return "\n".join(lines)


def init_from_pretrained(model: torch.nn.Module, checkpoint_path, prefix: str = "") -> InitReport:
    """Copy name-and-shape-matching tensors from a checkpoint into the model.

    prefix, when given, is stripped from checkpoint tensor names before
    matching (training checkpoints store the generator under "generator.").
    Mismatched shapes (e.g. an input projection built for a different feature
    dimension) and names absent on either side are skipped with a reason; no
    tensor ever changes shape. An empty intersection is reported as a warning
    rather than an error.
    """
    tensors, _ = load_checkpoint(checkpoint_path)
    if prefix:
        tensors = {
            (name[len(prefix):] if name.startswith(prefix) else name): value
            for name, value in tensors.items()
        }
    report = InitReport()
    state = model.state_dict()
    new_state = {}
    for name, current in state.items():
        if name not in tensors:
            report.skipped.append((name, "not in checkpoint"))
            new_state[name] = current
            continue
        incoming = tensors[name]
        if tuple(incoming.shape) != tuple(current.shape):
            report.skipped.append(
                (name, f"shape {tuple(incoming.shape)} != model shape {tuple(current.shape)}")
            )
            new_state[name] = current
            continue
        new_state[name] = torch.as_tensor(incoming, dtype=current.dtype)
        report.copied.append(name)
    for name in tensors:
        if name not in state:
            report.skipped.append((name, "not in model"))
    model.load_state_dict(new_state)
    return report
