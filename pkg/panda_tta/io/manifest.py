"""
panda_tta.io.manifest - Run manifests and canonical hashing

Every CLI run writes ``manifest.json`` next to its outputs. The manifest
records the subcommand, every argument with its resolved default, the seed,
the tool version, input/output paths and wall time, which is enough to
re-execute the run with ``panda rerun``.

The run hash is computed over the canonical JSON of
``{"subcommand": ..., "arguments": ..., "seed": ...}`` only, so wall time and
creation time never change it.

Canonical JSON rules:
    - keys sorted
    - no whitespace separators
    - UTF-8 encoded
    - NaN / +Inf / -Inf are not allowed (raise ValueError)
"""

from __future__ import annotations

import datetime
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List

from panda_tta.config import __version__
from panda_tta.core import ManifestError

SCHEMA_VERSION = "1"
MANIFEST_FILE = "manifest.json"


def canonical_json(payload: Any) -> str:
    """Return the canonical JSON string for ``payload``."""
    return json.dumps(
        payload,
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    )


def canonical_hash(payload: Any) -> str:
    """SHA-256 hex digest of the canonical JSON of ``payload``."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def run_hash(subcommand: str, arguments: Dict[str, Any], seed: int) -> str:
    return canonical_hash({"subcommand": subcommand, "arguments": arguments, "seed": int(seed)})


@dataclass
class RunManifest:
    """One executed CLI run, the unit of reproducibility."""

    subcommand: str
    arguments: Dict[str, Any]
    seed: int
    run_hash: str
    tool_version: str = __version__
    schema_version: str = SCHEMA_VERSION
    inputs: List[str] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)
    wall_time_s: float = 0.0
    created_at: str = ""

    @classmethod
    def build(
        cls,
        subcommand: str,
        arguments: Dict[str, Any],
        seed: int,
        *,
        inputs: List[str] | None = None,
        outputs: List[str] | None = None,
        wall_time_s: float = 0.0,
    ) -> "RunManifest":
        created_at = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        return cls(
            subcommand=subcommand,
            arguments=dict(arguments),
            seed=int(seed),
            run_hash=run_hash(subcommand, arguments, seed),
            inputs=list(inputs or []),
            outputs=list(outputs or []),
            wall_time_s=float(wall_time_s),
            created_at=created_at,
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        try:
            manifest = cls(
                subcommand=str(data["subcommand"]),
                arguments=dict(data["arguments"]),
                seed=int(data["seed"]),
                run_hash=str(data["run_hash"]),
                tool_version=str(data.get("tool_version", __version__)),
                schema_version=str(data.get("schema_version", SCHEMA_VERSION)),
                inputs=list(data.get("inputs", [])),
                outputs=list(data.get("outputs", [])),
                wall_time_s=float(data.get("wall_time_s", 0.0)),
                created_at=str(data.get("created_at", "")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"Manifest is missing or has a malformed field: {exc}") from exc
        expected = run_hash(manifest.subcommand, manifest.arguments, manifest.seed)
        if expected != manifest.run_hash:
            raise ManifestError(
                f"Manifest hash {manifest.run_hash[:12]} does not match its contents ({expected[:12]}); "
                "the file was edited after the run"
            )
        return manifest

    def write(self, directory: os.PathLike | str) -> Path:
        """Write ``directory/manifest.json`` atomically."""
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        path = out / MANIFEST_FILE
        tmp_path = path.with_suffix(".json.tmp")
        tmp_path.write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n",
            encoding="utf-8",
        )
        os.replace(tmp_path, path)
        return path

    @classmethod
    def load(cls, path: os.PathLike | str) -> "RunManifest":
        path = Path(path)
        if path.is_dir():
            path = path / MANIFEST_FILE
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ManifestError(f"{path}: no such manifest") from exc
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
        if not isinstance(data, dict):
            raise ManifestError(f"{path}: expected a JSON object")
        return cls.from_dict(data)
