"""Report serialization with a reproducibility provenance block.

Reports never embed wall-clock timestamps: given a config and seeds, reruns
must produce byte-identical JSON.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical JSON encoding of a config mapping."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def provenance(config: dict, seeds: dict | None = None) -> dict:
    from . import __version__

    return {
        "config_sha256": config_hash(config),
        "seeds": {k: int(v) for k, v in (seeds or {}).items()},
        "toolkit_version": __version__,
    }


def write_report(doc: dict, path, config: dict | None = None, seeds: dict | None = None) -> None:
    """Write a JSON report, attaching provenance when a config is given."""
    doc = dict(doc)
    if config is not None:
        doc["provenance"] = provenance(config, seeds)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def format_metric_table(rows, headers) -> str:
    """Plain-text table: rows of cells, padded per column."""
    rows = [[str(c) for c in row] for row in rows]
    headers = [str(h) for h in headers]
    widths = [
        max(len(headers[i]), *(len(r[i]) for r in rows)) if rows else len(headers[i])
        for i in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)
