"""Structured solve reports.

Reports are plain JSON-serializable records: what was solved, with which
seed and thresholds, what discrepancy was achieved, which certified bound
it was checked against, and per-phase statistics.  They deliberately
contain no wall-clock data so a rerun with the same seed writes a
byte-identical file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

__all__ = ["SolveReport"]


@dataclass
class SolveReport:
    algorithm: str
    n: int
    m: int
    t: int
    k: int
    seed: int
    success: bool
    discrepancy: float
    bound: float
    retries: int
    thresholds: dict = field(default_factory=dict)
    phases: dict = field(default_factory=dict)
    verification: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "n": self.n,
            "m": self.m,
            "t": self.t,
            "k": self.k,
            "seed": self.seed,
            "success": self.success,
            "discrepancy": self.discrepancy,
            "bound": self.bound,
            "retries": self.retries,
            "thresholds": self.thresholds,
            "phases": self.phases,
            "verification": self.verification,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=1) + "\n"
