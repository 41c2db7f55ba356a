"""Diagnostic series and report serialization (JSON reports, CSV series)."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .manifest import MANIFEST, manifest_hash

__all__ = ["DiagnosticSeries", "VerificationReport", "format_float", "write_csv"]

SCHEMA_VERSION = 1

# Verdict severity, worst wins when aggregating.
_VERDICT_ORDER = {"PASS": 0, "DIAGNOSTIC": 0, "INCONCLUSIVE": 1, "FAIL": 2}


def format_float(x: float) -> str:
    """Shortest round-trip decimal form; keeps CSV output bit-stable."""
    return f"{float(x):.17g}"


@dataclass
class DiagnosticSeries:
    """Time-stamped scalar records with provenance metadata.

    columns maps a name to an array aligned with ``times``.
    """

    times: np.ndarray
    columns: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        for name, col in list(self.columns.items()):
            col = np.asarray(col, dtype=float)
            if col.shape != self.times.shape:
                raise ValueError(f"column {name!r} has shape {col.shape}, times {self.times.shape}")
            self.columns[name] = col

    def write_csv(self, path: str) -> None:
        names = ["t"] + list(self.columns)
        rows = np.column_stack([self.times] + [self.columns[n] for n in names[1:]])
        write_csv(path, names, rows, header_meta=self.meta)


def write_csv(path: str, names: list[str], rows: np.ndarray, header_meta: dict | None = None) -> None:
    lines = []
    for key, val in (header_meta or {}).items():
        lines.append(f"# {key}={val}")
    lines.append(",".join(names))
    for row in np.atleast_2d(rows):
        lines.append(",".join(format_float(x) for x in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass
class VerificationReport:
    """Outcome of one verification or diagnostic experiment."""

    experiment: str
    params: dict
    verdict: str
    tolerances: dict
    runtime_s: float
    series: DiagnosticSeries | None = None
    convergence: list[dict] | None = None
    summary: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.verdict not in _VERDICT_ORDER:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @property
    def manifest_hash(self) -> str:
        return manifest_hash()

    def exit_code(self) -> int:
        if self.verdict == "FAIL":
            return 1
        if self.verdict == "INCONCLUSIVE":
            return 4
        return 0

    def to_dict(self) -> dict:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "params": _plain(self.params),
            "verdict": self.verdict,
            "tolerances": _plain(self.tolerances),
            "summary": _plain(self.summary),
            "runtime_s": round(self.runtime_s, 3),
            "manifest_hash": self.manifest_hash,
            "manifest_version": MANIFEST["version"],
            "notes": list(self.notes),
        }
        if self.convergence is not None:
            doc["convergence"] = _plain(self.convergence)
        return doc

    def write(self, out_dir: str, stem: str = "report") -> dict[str, str]:
        """Write report.json (and series CSV if present); returns paths."""
        os.makedirs(out_dir, exist_ok=True)
        paths = {}
        json_path = os.path.join(out_dir, f"{stem}.json")
        with open(json_path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        paths["json"] = json_path
        if self.series is not None:
            csv_path = os.path.join(out_dir, f"{stem}_series.csv")
            meta = dict(self.series.meta)
            meta.setdefault("experiment", self.experiment)
            meta.setdefault("manifest_hash", self.manifest_hash)
            self.series.meta = meta
            self.series.write_csv(csv_path)
            paths["csv"] = csv_path
        return paths


def worst_verdict(verdicts: list[str]) -> str:
    if not verdicts:
        return "DIAGNOSTIC"
    return max(verdicts, key=lambda v: _VERDICT_ORDER[v])


def _plain(obj):
    """Recursively convert numpy scalars/arrays for JSON serialization."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj
