"""JSON-lines run log for ``heislab verify``.

Each suite run appends a ``started`` record and exactly one closing record
(``passed``, ``failed`` or ``config-error``); a run whose configuration fails to
load writes only the ``config-error`` record.  The log is append-only, so
several runs may share one file.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

STATUSES = ("started", "passed", "failed", "config-error")
DEFAULT_TELEMETRY_DIR = Path("artifacts") / "telemetry"


@dataclass
class TelemetryRecord:
    """One suite event as stored on disk."""

    suite: str
    entry: str | None
    status: str
    timestamp: str
    runtime_s: float | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ValueError(
                f"Unknown telemetry status '{self.status}'; expected one of {STATUSES}"
            )

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> TelemetryRecord:
        return cls(
            suite=data["suite"],
            entry=data.get("entry"),
            status=data["status"],
            timestamp=data.get("timestamp", ""),
            runtime_s=data.get("runtime_s"),
            details=data.get("details") or {},
        )


def now_iso() -> str:
    """Current UTC time, ISO-8601 with offset."""

    return datetime.now(UTC).isoformat()


def log_telemetry(record: TelemetryRecord, out_path: Path) -> None:
    """Append ``record`` to ``out_path`` as one JSON line (parents are created)."""

    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(asdict(record), sort_keys=True, default=str) + "\n")


def default_log_path(
    suite: str,
    *,
    base_dir: Path | None = None,
    timestamp: str | None = None,
) -> Path:
    """Run-specific log path ``<base_dir>/<suite-slug>_<UTC stamp>.jsonl``.

    Parameters
    ----------
    suite
        Suite name; spaces and slashes become underscores.
    base_dir
        Telemetry directory, ``artifacts/telemetry`` by default.
    timestamp
        Fixed stamp for deterministic paths in tests.
    """

    slug = suite.replace(" ", "_").replace("/", "_")
    stamp = timestamp or datetime.now(UTC).strftime("%Y%m%dT%H%M%SZ")
    return (base_dir or DEFAULT_TELEMETRY_DIR) / f"{slug}_{stamp}.jsonl"


def latest_log(directory: Path = DEFAULT_TELEMETRY_DIR) -> Path | None:
    """Most recently modified ``*.jsonl`` in ``directory``, if any."""

    logs = sorted(directory.glob("*.jsonl"), key=lambda path: path.stat().st_mtime)
    return logs[-1] if logs else None


def load_telemetry(path: Path, *, suite: str | None = None) -> list[TelemetryRecord]:
    """Records of ``path`` in file order, optionally only those of ``suite``.

    A missing file yields an empty list; blank lines are skipped.
    """

    if not path.exists():
        return []
    records = [
        TelemetryRecord.from_json(json.loads(line))
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if suite is not None:
        records = [record for record in records if record.suite == suite]
    return records


@dataclass
class RunLog:
    """Start/finish bookkeeping for one suite run."""

    suite: str
    path: Path

    def _emit(self, status: str, runtime_s: float | None, details: dict[str, Any]) -> None:
        log_telemetry(
            TelemetryRecord(
                suite=self.suite,
                entry=None,
                status=status,
                timestamp=now_iso(),
                runtime_s=runtime_s,
                details=details,
            ),
            self.path,
        )

    def started(self, seed: int) -> None:
        self._emit("started", None, {"seed": seed})

    def finished(self, ok: bool, runtime_s: float, summary: dict[str, int], report: Path) -> None:
        self._emit("passed" if ok else "failed", runtime_s, {**summary, "report": str(report)})

    def config_error(self, runtime_s: float, error: str) -> None:
        self._emit("config-error", runtime_s, {"error": error})
