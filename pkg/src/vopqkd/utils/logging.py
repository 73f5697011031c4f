"""Structured logging for vopqkd.

Records go through the standard `logging` module to standard error. Standard
output carries only CSV/JSON artefacts, so reruns with one seed stay byte-identical.
"""

import logging
import sys
from typing import Any

import structlog

RENDERERS = ("json", "console")


def setup_logging(log_level: str = "INFO", log_format: str = "json") -> None:
    """Configure structlog and the root logger.

    `log_format` is "json" for machine-readable lines or "console" for humans.
    """
    if log_format not in RENDERERS:
        raise ValueError(f"log format must be one of {RENDERERS}, got {log_format!r}")
    level = getattr(logging, log_level.upper())
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level)
    logging.getLogger().setLevel(level)

    renderer: Any = (
        structlog.processors.JSONRenderer()
        if log_format == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.stdlib.add_logger_name,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=False,
    )


def get_logger(name: str) -> Any:
    """Get a structured logger bound to `name`.

    Returns Any: the concrete type depends on the `setup_logging` configuration.
    """
    return structlog.get_logger(name)
