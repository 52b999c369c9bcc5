"""Structured pass/fail records shared by all verification operations.

A report never hides a number: the verdict is always a function of
``worst_slack`` and the tolerance that was in force, and every constant
that entered the computation is carried along so a failing record can be
audited without rerunning.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

PASS = "PASS"
FAIL = "FAIL"
VACUOUS = "VACUOUS"
INFO = "INFO"

_VERDICTS = (PASS, FAIL, VACUOUS, INFO)


@dataclass
class VerificationReport:
    """Outcome of one numerical check.

    worst_slack is signed so that negative means "inequality violated by
    this much"; FAIL holds exactly when worst_slack < -tolerance.
    """

    check_name: str
    verdict: str
    worst_slack: float
    tolerance: float
    constants: dict = field(default_factory=dict)
    digest: str = ""
    runtime_ms: float = 0.0

    def __post_init__(self):
        if self.verdict not in _VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @property
    def passed(self) -> bool:
        return self.verdict in (PASS, VACUOUS, INFO)

    def to_json_dict(self, include_runtime: bool = True) -> dict:
        d = {
            "check": self.check_name,
            "digest": self.digest,
            "verdict": self.verdict,
            "worst_slack": self.worst_slack,
            "tolerance": self.tolerance,
            "constants": _jsonable(self.constants),
        }
        if include_runtime:
            d["runtime_ms"] = self.runtime_ms
        return d


def verdict_from_slack(worst_slack: float, tolerance: float) -> str:
    return FAIL if worst_slack < -tolerance else PASS


def _jsonable(obj):
    """Recursively convert numpy scalars/arrays for json serialization."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and not hasattr(obj, "__len__"):
        return obj.item()
    if hasattr(obj, "tolist"):
        return obj.tolist()
    return obj


def canonical_json(payload) -> str:
    """Canonical serialization used for digests and byte-level comparisons."""
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2)


def config_digest(payload) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()[:16]


def write_csv(path, header, columns) -> None:
    """Write equal-length columns to a CSV file with the exact header given."""
    rows = zip(*columns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
