"""Run manifests: full provenance of one simulation run as JSON.

A manifest carries the resolved configuration (every default materialized,
derived quantities included), the run statistics, and a content digest for
every output file.  Re-running the embedded configuration with the same
binary reproduces the CSV bodies byte for byte; the digests make silent
drift detectable.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

from . import __version__

__all__ = ["build_manifest", "write_manifest", "read_manifest"]


def build_manifest(
    resolved: dict[str, str],
    run_info: dict,
    outputs: list[dict],
    notes: dict | None = None,
) -> dict:
    return {
        "artifact_version": __version__,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "config": dict(sorted(resolved.items())),
        "run": run_info,
        "outputs": outputs,
        **({"notes": notes} if notes else {}),
    }


def write_manifest(path, manifest: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=False) + "\n")
    return path


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
