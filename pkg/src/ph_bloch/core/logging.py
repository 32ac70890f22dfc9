from __future__ import annotations

import logging
from typing import Any, Dict

import numpy as np
import structlog
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape

# Context keys rendered first, in this order.
PROVENANCE_KEYS = ("component", "command", "check", "stage", "status", "n", "r", "samples", "seed", "workers")

LEVEL_STYLES = {"critical": "bold red", "error": "bold red", "warning": "bold yellow"}

EVENT_ICONS = {
    "command_starting": "🚀",
    "stage_starting": "🧩",
    "stage_complete": "🧩",
    "hypothesis_checks_complete": "🧪",
    "hypothesis_check": "🧪",
    "volume_estimated": "📐",
    "volume_profile": "📐",
    "violation_found": "💥",
    "scan_complete": "🔎",
    "covering_complete": "🔎",
}
LEVEL_ICONS = {"critical": "❌", "error": "❌", "warning": "⚠️"}


def configure_logging(level: str) -> None:
    """
    Human-friendly logs on stderr; stdout is reserved for JSON reports.
    """
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[
            RichHandler(
                console=Console(stderr=True),
                rich_tracebacks=True,
                markup=True,  # allow rich markup in messages
                show_time=True,
                show_level=True,
                show_path=False,
            )
        ],
        force=True,
    )

    # scipy/numpy warnings surface through `warnings`; keep them in the log stream.
    logging.captureWarnings(True)

    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            _rich_line_renderer,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.make_filtering_bound_logger(logging.getLevelName(level.upper())),
        cache_logger_on_first_use=True,
    )


def get_logger(**kwargs: Any) -> structlog.stdlib.BoundLogger:
    return structlog.get_logger().bind(**kwargs)


def _render_value(value: Any) -> str:
    """Floats at 6 significant digits; long point lists and arrays collapse to their shape."""
    if isinstance(value, (float, np.floating)):
        return "%.6g" % value
    if isinstance(value, np.ndarray):
        return "array%s" % (list(value.shape),)
    if isinstance(value, (list, tuple)) and len(value) > 6:
        return "[%d items]" % len(value)
    return escape(repr(value))


def _rich_line_renderer(logger: Any, method_name: str, event_dict: Dict[str, Any]) -> str:
    """structlog -> RichHandler: icon + event in the level style, then key=value context."""
    event = str(event_dict.pop("event", method_name))
    level = str(event_dict.pop("level", "")).lower()

    icon = EVENT_ICONS.get(event) or LEVEL_ICONS.get(level, "✅")
    style = LEVEL_STYLES.get(level, "bold cyan")
    title = "[%s]%s %s[/%s]" % (style, icon, event, style)

    keys = [k for k in PROVENANCE_KEYS if k in event_dict]
    keys += sorted(k for k in event_dict if k not in PROVENANCE_KEYS)
    parts = ["%s=%s" % (k, _render_value(event_dict[k])) for k in keys]
    return "%s  %s" % (title, " ".join(parts)) if parts else title
