"""Project directory layout and durable persistence.

A project lives in one directory:

    manifest.json       identity, config, audit trail
    surveys.log         JSON lines, append-only
    experts.log         JSON lines, append-only
    audits.log          JSON lines, append-only
    weights.json        derived artifact (frozen baseline)
    iterations.json     derived artifact
    segments.json       derived artifact
    explanations.json   derived artifact

Input logs are only ever appended to, one JSON object per line, flushed
and fsynced per batch; a torn final line (crash mid-append) is tolerated
on read and reported as truncation. Derived artifacts are rewritten
whole via a temp file and atomic rename, and each records the log
offsets (line counts) it was computed from, so staleness is detectable.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path

from .ahp import DEFAULT_CR_THRESHOLD, DEFAULT_CRITERIA
from .errors import ValidationError, WuiqError
from .scoring import DEFAULT_GRADE_EDGES

MANIFEST_VERSION = 1

LOG_NAMES = ("surveys", "experts", "audits")
ARTIFACT_NAMES = ("weights", "iterations", "segments", "explanations")


class StoreError(WuiqError):
    """Project directory is missing, incompatible, or corrupt."""

    code = "store"


class FrozenWeightsError(WuiqError):
    """Baseline weights already exist; recomputation needs an explicit override."""

    code = "weights_frozen"


@dataclass(frozen=True)
class ProjectConfig:
    """Tunables persisted with the project so reruns stay reproducible."""

    cr_threshold: float = DEFAULT_CR_THRESHOLD
    seed: int = 0
    scorer: str = "lexicon"
    grade_edges: tuple[float, float, float] = DEFAULT_GRADE_EDGES
    cluster_features: str = "default"
    restarts: int = 8
    auth_token: str | None = None

    def __post_init__(self):
        if not self.cr_threshold > 0:
            raise ValidationError("cr_threshold must be positive")
        if len(self.grade_edges) != 3 or not (
            0 < self.grade_edges[0] < self.grade_edges[1] < self.grade_edges[2] <= 1
        ):
            raise ValidationError(
                "grade_edges must be three ascending values within (0, 1]"
            )
        if self.cluster_features not in ("default", "full"):
            raise ValidationError(
                f"cluster_features must be 'default' or 'full', got {self.cluster_features!r}"
            )
        if self.restarts < 1:
            raise ValidationError("restarts must be at least 1")

    def to_dict(self) -> dict:
        return {
            "cr_threshold": self.cr_threshold,
            "seed": self.seed,
            "scorer": self.scorer,
            "grade_edges": list(self.grade_edges),
            "cluster_features": self.cluster_features,
            "restarts": self.restarts,
            "auth_token": self.auth_token,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProjectConfig":
        known = {f: data[f] for f in (
            "cr_threshold", "seed", "scorer", "cluster_features", "restarts", "auth_token",
        ) if f in data}
        if "grade_edges" in data:
            known["grade_edges"] = tuple(data["grade_edges"])
        return cls(**known)


@dataclass(frozen=True)
class LogView:
    """Records read back from one append-only log."""

    records: tuple[dict, ...]
    offset: int
    truncated: bool = False


@dataclass
class Manifest:
    project_id: str
    criteria: tuple[str, ...] = DEFAULT_CRITERIA
    config: ProjectConfig = field(default_factory=ProjectConfig)
    created_at: str = ""
    version: int = MANIFEST_VERSION
    audit_trail: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "project_id": self.project_id,
            "criteria": list(self.criteria),
            "config": self.config.to_dict(),
            "created_at": self.created_at,
            "audit_trail": self.audit_trail,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Manifest":
        return cls(
            project_id=data["project_id"],
            criteria=tuple(data["criteria"]),
            config=ProjectConfig.from_dict(data.get("config", {})),
            created_at=data.get("created_at", ""),
            version=data.get("version", MANIFEST_VERSION),
            audit_trail=list(data.get("audit_trail", [])),
        )


def _dump(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ": "), indent=2)


def _write_atomic(path: Path, text: str):
    """Write via a sibling temp file and rename, fsyncing both file and directory."""
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    dir_fd = os.open(path.parent, os.O_RDONLY)
    try:
        os.fsync(dir_fd)
    finally:
        os.close(dir_fd)


class ProjectStore:
    """All file access for one project directory."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        manifest_path = self.root / "manifest.json"
        if not manifest_path.exists():
            raise StoreError(
                f"{self.root} is not a project directory (no manifest.json); "
                "run init first"
            )
        try:
            raw = json.loads(manifest_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise StoreError(f"manifest.json is corrupt: {exc}") from exc
        if raw.get("version") != MANIFEST_VERSION:
            raise StoreError(
                f"manifest version {raw.get('version')!r} is not supported "
                f"(expected {MANIFEST_VERSION})"
            )
        self.manifest = Manifest.from_dict(raw)

    @classmethod
    def init(
        cls,
        root: Path | str,
        project_id: str,
        criteria: tuple[str, ...] = DEFAULT_CRITERIA,
        config: ProjectConfig | None = None,
        now: str = "",
    ) -> "ProjectStore":
        root = Path(root)
        if (root / "manifest.json").exists():
            raise StoreError(f"{root} already holds a project")
        root.mkdir(parents=True, exist_ok=True)
        manifest = Manifest(
            project_id=project_id,
            criteria=tuple(criteria),
            config=config or ProjectConfig(),
            created_at=now,
        )
        _write_atomic(root / "manifest.json", _dump(manifest.to_dict()) + "\n")
        for name in LOG_NAMES:
            (root / f"{name}.log").touch()
        store = cls(root)
        store.record_event("init", now, project_id=project_id)
        return store

    # -- manifest -----------------------------------------------------------

    def save_manifest(self):
        _write_atomic(self.root / "manifest.json", _dump(self.manifest.to_dict()) + "\n")

    def record_event(self, event: str, at: str = "", **details):
        """Append an entry to the manifest's audit trail and persist it."""
        entry = {"event": event, "at": at}
        entry.update(details)
        self.manifest.audit_trail.append(entry)
        self.save_manifest()

    def update_config(self, **changes):
        self.manifest.config = replace(self.manifest.config, **changes)
        self.save_manifest()

    # -- append-only logs ---------------------------------------------------

    def _log_path(self, log: str) -> Path:
        if log not in LOG_NAMES:
            raise StoreError(f"unknown log {log!r}")
        return self.root / f"{log}.log"

    def append_records(self, log: str, records: list[dict]) -> int:
        """Append records as JSON lines; one fsync per batch. Returns new offset.

        A torn tail left by an interrupted append is trimmed back to the
        last complete record before the new batch goes in.
        """
        path = self._log_path(log)
        if self.read_log(log).truncated:
            data = path.read_bytes()
            keep = data.rfind(b"\n") + 1
            with open(path, "r+b") as fh:
                fh.truncate(keep)
                fh.flush()
                os.fsync(fh.fileno())
        lines = "".join(
            json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"
            for record in records
        )
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(lines)
            fh.flush()
            os.fsync(fh.fileno())
        return self.read_log(log).offset

    def read_log(self, log: str) -> LogView:
        """All complete records in a log.

        A torn final line is dropped and flagged as truncation; malformed
        content anywhere earlier means real corruption and raises.
        """
        path = self._log_path(log)
        if not path.exists():
            return LogView(records=(), offset=0)
        data = path.read_bytes()
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError:
            # A tear can cut a multibyte character; the mangled tail then
            # fails JSON parsing below and is handled as truncation.
            text = data.decode("utf-8", errors="replace")
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        records = []
        truncated = False
        for i, line in enumerate(lines):
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError:
                if i == len(lines) - 1 and not text.endswith("\n"):
                    truncated = True
                    break
                raise StoreError(
                    f"{path.name} is corrupt at line {i + 1}; "
                    "restore from a copy before continuing"
                )
        return LogView(records=tuple(records), offset=len(records), truncated=truncated)

    def log_offsets(self) -> dict:
        return {name: self.read_log(name).offset for name in LOG_NAMES}

    # -- derived artifacts --------------------------------------------------

    def _artifact_path(self, name: str) -> Path:
        if name not in ARTIFACT_NAMES:
            raise StoreError(f"unknown artifact {name!r}")
        return self.root / f"{name}.json"

    def write_artifact(self, name: str, payload: dict):
        """Replace a derived artifact atomically (write temp, rename over)."""
        _write_atomic(self._artifact_path(name), _dump(payload) + "\n")

    def read_artifact(self, name: str) -> dict | None:
        path = self._artifact_path(name)
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise StoreError(f"{path.name} is corrupt: {exc}") from exc

    def require_artifact(self, name: str) -> dict:
        payload = self.read_artifact(name)
        if payload is None:
            raise ValidationError(
                f"no {name} artifact yet; run the producing step first"
            )
        return payload
