# reports.py
"""Check records and the per-command report document (JSON summary plus CSV grids)."""

import datetime
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

logger = logging.getLogger(__name__)

RESIDUAL = "residual"
NONNEGATIVE = "nonnegative"


@dataclass
class Check:
    """One verified quantity. Residual checks pass iff |value| <= tolerance, nonnegativity checks iff value >= -tolerance."""

    name: str
    value: float
    tolerance: float
    kind: str = RESIDUAL
    anchor: str = ""

    def __post_init__(self):
        if self.kind not in (RESIDUAL, NONNEGATIVE):
            raise ValueError(f"unknown check kind {self.kind!r}")
        self.value = float(self.value)
        self.tolerance = float(self.tolerance)

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.kind == RESIDUAL:
            return abs(self.value) <= self.tolerance
        return self.value >= -self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "kind": self.kind,
            "pass": self.passed,
            "paper_anchor": self.anchor,
        }


@dataclass
class ReportDocument:
    command: str
    config: dict
    checks: List[Check] = field(default_factory=list)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    events: List[str] = field(default_factory=list)
    error: Optional[str] = None
    timestamp: str = field(default_factory=lambda: datetime.datetime.now(datetime.timezone.utc).isoformat())

    def add(self, name, value, tolerance, kind=RESIDUAL, anchor="") -> Check:
        check = Check(name=name, value=value, tolerance=tolerance, kind=kind, anchor=anchor)
        self.checks.append(check)
        if not check.passed:
            logger.warning("check %s failed: value %.3e, tolerance %.3e", name, check.value, check.tolerance)
        return check

    def event(self, message: str):
        self.events.append(message)

    def add_table(self, name: str, frame: pd.DataFrame):
        self.tables[name] = frame

    def summary(self) -> dict:
        return {"total": len(self.checks), "passed": sum(c.passed for c in self.checks)}

    @property
    def failed(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def exit_code(self) -> int:
        if self.error is not None:
            return 2
        return 0 if not self.failed else 1

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "checks": [c.to_dict() for c in self.checks],
            "summary": self.summary(),
            "events": list(self.events),
            "error": self.error,
            "timestamp": self.timestamp,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write(self, out_dir) -> List[Path]:
        """Writes <command>.json and one <command>_<table>.csv per table; returns the paths."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = self.command.replace("-", "_")
        written = [out_dir / f"{stem}.json"]
        written[0].write_text(self.to_json() + "\n")
        for name, frame in self.tables.items():
            path = out_dir / f"{stem}_{name}.csv"
            frame.to_csv(path, index=False)
            written.append(path)
        logger.info("%s: %d/%d checks passed, report in %s", self.command, self.summary()["passed"], len(self.checks), out_dir)
        return written
