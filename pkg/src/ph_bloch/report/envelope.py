from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ph_bloch import __version__

REPORT_SCHEMA = 1
TOOL = "ph-bloch"
# The only field allowed to differ between two identical invocations.
TIMESTAMP_FIELD = "generated_at"


def now_rfc3339() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


def to_jsonable(value: Any) -> Any:
    """numpy scalars/arrays, complex numbers and enums -> plain JSON values."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def make_report(*, command: str, params: Dict[str, Any], results: Dict[str, Any], status: str) -> Dict[str, Any]:
    """
    Standard report envelope.
    """
    return {
        "schema": REPORT_SCHEMA,
        "tool": TOOL,
        "version": __version__,
        "command": command,
        TIMESTAMP_FIELD: now_rfc3339(),
        "params": to_jsonable(params),
        "results": to_jsonable(results),
        "status": status,
    }


def dumps(report: Dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_report(report: Dict[str, Any], out: Optional[Path]) -> str:
    text = dumps(report)
    if out is not None:
        out.write_text(text, encoding="utf-8")
    return text


def write_csv(rows: Sequence[Dict[str, Any]], path: Path) -> None:
    """CSV sidecar; values are written with the same float repr as the JSON report."""
    rows = [to_jsonable(r) for r in rows]
    fields: List[str] = []
    for r in rows:
        for k in r:
            if k not in fields:
                fields.append(k)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
