"""Run manifests: artifact inventory, parameter record, stable hashing.

Each run directory holds the four-way artifact set (chart render, composed
outline, background, generated output; optionally an upscaled variant) plus
the legibility report, and one manifest.json tying them together: relative
paths, sha256 of the exact bytes on disk, every effective parameter, and
the backend identity.

``stable_hash`` covers everything that determines the pixels and nothing
that doesn't: run_id, created_at and timing are excluded, so two runs of
the same work hash identically while any parameter change shows up.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import SitblendError

MANIFEST_NAME = "manifest.json"

# excluded from stable_hash: identity and wall-clock, not work
_VOLATILE = ("run_id", "created_at", "timing_ms")


def hash_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def hash_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass(frozen=True)
class RunManifest:
    run_id: str
    created_at: str          # ISO-8601 UTC
    config: dict             # every effective parameter
    chart_spec: dict         # the chart document as run
    artifacts: dict          # name -> path relative to the run dir
    hashes: dict             # name -> sha256 of the artifact bytes
    backend: dict            # url/model/mock flag
    timing_ms: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)  # placement, sizes, flags

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "created_at": self.created_at,
            "config": self.config,
            "chart_spec": self.chart_spec,
            "artifacts": dict(self.artifacts),
            "hashes": dict(self.hashes),
            "backend": dict(self.backend),
            "timing_ms": dict(self.timing_ms),
            "extra": dict(self.extra),
        }


def now_utc() -> str:
    return datetime.now(timezone.utc).isoformat()


def stable_hash(manifest) -> str:
    """sha256 over the canonical manifest with volatile fields removed.

    The backend url is dropped along with run_id/created_at/timing: where a
    backend listens does not change the work, only which model ran does.
    """
    doc = manifest.to_dict() if isinstance(manifest, RunManifest) else dict(manifest)
    doc = {k: v for k, v in doc.items() if k not in _VOLATILE}
    backend = dict(doc.get("backend") or {})
    backend.pop("url", None)
    doc["backend"] = backend
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hash_bytes(canonical.encode("utf-8"))


def write_manifest(manifest: RunManifest, path) -> None:
    text = json.dumps(manifest.to_dict(), sort_keys=True, indent=2) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def read_manifest(path) -> RunManifest:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    missing = {"run_id", "created_at", "config", "chart_spec",
               "artifacts", "hashes", "backend"} - set(doc)
    if missing:
        raise SitblendError(f"manifest at {path} missing fields: {sorted(missing)}")
    return RunManifest(
        run_id=doc["run_id"],
        created_at=doc["created_at"],
        config=doc["config"],
        chart_spec=doc["chart_spec"],
        artifacts=doc["artifacts"],
        hashes=doc["hashes"],
        backend=doc["backend"],
        timing_ms=doc.get("timing_ms", {}),
        extra=doc.get("extra", {}),
    )
