"""Verification reports shared by every suite, with deterministic CSV/JSON writers."""

from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import pandas as pd

from heislab.sublap import HALF_NORM, SMOOTH_REGION_R, SMOOTH_REGION_S
from heislab.telemetry import now_iso

REPORT_FORMATS = ("csv", "json")
FLOAT_FORMAT = "%.16e"
COLUMNS = ["suite", "name", "value", "bound", "passed", "note"]


def default_conventions() -> dict[str, Any]:
    stamps: dict[str, Any] = HALF_NORM.as_dict()
    stamps.update({"exclusion_s": SMOOTH_REGION_S, "exclusion_r": SMOOTH_REGION_R})
    return stamps


@dataclass(frozen=True, slots=True)
class ReportEntry:
    """One named residual or bound with its pass flag."""

    name: str
    value: float
    bound: float
    passed: bool
    note: str = ""


def _number(value: float) -> float | str:
    """JSON-safe float: shortest round-trip repr for finite values, tokens otherwise."""

    value = float(value)
    if math.isfinite(value):
        return value
    return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")


@dataclass
class VerificationReport:
    """Named residuals/bounds with pass/fail against declared tolerances.

    The timestamp is kept outside :meth:`body`, so identical configurations give
    identical :meth:`body_digest` values.
    """

    suite: str
    entries: list[ReportEntry] = field(default_factory=list)
    config_echo: dict[str, Any] = field(default_factory=dict)
    conventions: dict[str, Any] = field(default_factory=default_conventions)
    catalog_version: str = ""
    timestamp: str = field(default_factory=now_iso)

    def add(
        self,
        name: str,
        value: float,
        bound: float,
        passed: bool | None = None,
        note: str = "",
    ) -> ReportEntry:
        """Append an entry; ``passed`` defaults to ``value ≤ bound`` (NaN fails)."""

        value = float(value)
        bound = float(bound)
        if passed is None:
            passed = bool(value <= bound)
        entry = ReportEntry(name=name, value=value, bound=bound, passed=bool(passed), note=note)
        self.entries.append(entry)
        return entry

    def fail(self, name: str, note: str) -> ReportEntry:
        """Record a failed entry for a numeric error raised while evaluating ``name``."""

        return self.add(name, math.nan, math.nan, passed=False, note=note)

    def extend(self, other: VerificationReport, prefix: str = "") -> None:
        for entry in other.entries:
            self.entries.append(
                ReportEntry(
                    name=f"{prefix}{entry.name}",
                    value=entry.value,
                    bound=entry.bound,
                    passed=entry.passed,
                    note=entry.note,
                )
            )

    @property
    def summary(self) -> dict[str, int]:
        passed = sum(1 for entry in self.entries if entry.passed)
        return {"passed": passed, "failed": len(self.entries) - passed}

    @property
    def ok(self) -> bool:
        return bool(self.entries) and self.summary["failed"] == 0

    def to_frame(self) -> pd.DataFrame:
        rows = [{"suite": self.suite, **asdict(entry)} for entry in self.entries]
        return pd.DataFrame(rows, columns=COLUMNS)

    def body(self) -> dict[str, Any]:
        """Timestamp-free report content."""

        return {
            "suite": self.suite,
            "catalog_version": self.catalog_version,
            "config": self.config_echo,
            "conventions": self.conventions,
            "summary": self.summary,
            "entries": [
                {
                    "name": entry.name,
                    "value": _number(entry.value),
                    "bound": _number(entry.bound),
                    "passed": entry.passed,
                    "note": entry.note,
                }
                for entry in self.entries
            ],
        }

    def _csv_body(self) -> str:
        header = [
            f"# suite: {self.suite}",
            f"# catalog_version: {self.catalog_version}",
            f"# config: {json.dumps(self.config_echo, sort_keys=True, default=str)}",
            f"# conventions: {json.dumps(self.conventions, sort_keys=True)}",
            f"# summary: passed={self.summary['passed']} failed={self.summary['failed']}",
        ]
        buffer = io.StringIO()
        self.to_frame().to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return "\n".join(header) + "\n" + buffer.getvalue()

    def body_digest(self, fmt: str = "csv") -> str:
        """SHA-256 of the rendered body (``csv``) or of the canonical JSON body."""

        if fmt == "csv":
            payload = self._csv_body()
        else:
            payload = json.dumps(self.body(), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def write_csv(self, path: Path) -> Path:
        """Write the CSV report: timestamp and digest lines, then the hashed body."""

        body = self._csv_body()
        digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            f"# timestamp: {self.timestamp}\n# body-sha256: {digest}\n{body}", encoding="utf-8"
        )
        return path

    def write_json(self, path: Path) -> Path:
        body = self.body()
        payload = {
            "timestamp": self.timestamp,
            "body_sha256": self.body_digest("json"),
            "body": body,
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
        return path

    def write(self, path: Path, fmt: str = "csv") -> Path:
        if fmt not in REPORT_FORMATS:
            raise ValueError(f"Unknown report format '{fmt}'; expected one of {REPORT_FORMATS}")
        return self.write_csv(path) if fmt == "csv" else self.write_json(path)


def read_report_body(path: Path) -> str:
    """Return the hashed region of a CSV report (drops timestamp and digest lines)."""

    lines = path.read_text(encoding="utf-8").splitlines(keepends=True)
    return "".join(
        line for line in lines if not line.startswith(("# timestamp:", "# body-sha256:"))
    )
