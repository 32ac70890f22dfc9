from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional


class CheckStatus(str, Enum):
    OK = "ok"
    WARN = "warn"
    FAIL = "fail"


class VerdictStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"


class ScanStatus(str, Enum):
    NO_VIOLATION = "no-violation"
    VIOLATION = "violation"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: CheckStatus
    details: str

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "status": self.status.value, "details": self.details}


@dataclass(frozen=True)
class InequalityVerdict:
    """
    Outcome of a pointwise inequality checked on a grid.

    `witnesses` lists every failing grid point (sorted by grid index), never a summary.
    """

    name: str
    status: VerdictStatus
    checked: int
    slack: float
    witnesses: List[Dict[str, Any]] = field(default_factory=list)
    details: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.status == VerdictStatus.PASS

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status.value,
            "checked": self.checked,
            "slack": self.slack,
            "witnesses": list(self.witnesses),
            "details": self.details,
        }


def no_counterexample_phrase(samples: int) -> str:
    return "no counterexample found at %d samples" % int(samples)
