"""Run manifest: config/case fingerprints, timings, exclusions, output hashes."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    return sha256_bytes(Path(path).read_bytes())


def sha256_json(obj) -> str:
    return sha256_bytes(json.dumps(obj, sort_keys=True,
                                   separators=(",", ":")).encode())


def build_manifest(config_doc: dict, case_fingerprint: str,
                   library_fingerprint: str, timings: dict[str, float],
                   exclusions: list[dict], output_dir: Path,
                   output_files: list[str]) -> dict:
    outputs = {name: sha256_file(output_dir / name)
               for name in sorted(output_files)}
    return {
        "tool_version": __version__,
        "config_hash": sha256_json(config_doc),
        "config": config_doc,
        "case_fingerprint": case_fingerprint,
        "library_fingerprint": library_fingerprint,
        "timings_s": {k: round(v, 3) for k, v in timings.items()},
        "exclusions": exclusions,
        "outputs": outputs,
    }


def write_manifest(manifest: dict, output_dir: Path) -> Path:
    path = output_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return path


def manifest_comparable(manifest: dict) -> dict:
    """Manifest with volatile fields (timings) removed, for reproducibility checks."""
    doc = dict(manifest)
    doc.pop("timings_s", None)
    return doc
