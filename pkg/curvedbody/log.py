"""Logging setup shared by the library and the command-line tool."""

import logging
import os
from typing import Optional

from rich.logging import RichHandler

ENV_VAR = "CURVEDBODY_LOG"

_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "warning": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Attach a rich handler to the ``curvedbody`` logger.

    Args:
        level (Optional[str]): One of error/warn/info/debug. Falls back to the
            CURVEDBODY_LOG environment variable, then to ``warn``.

    Returns:
        logging.Logger: The configured package logger
    """
    name = (level or os.environ.get(ENV_VAR) or "warn").strip().lower()
    logger = logging.getLogger("curvedbody")
    unknown = name not in _LEVELS
    logger.setLevel(_LEVELS.get(name, logging.WARNING))

    if not any(getattr(h, "_curvedbody", False) for h in logger.handlers):
        handler = RichHandler(show_path=False, rich_tracebacks=False)
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
        handler._curvedbody = True
        logger.addHandler(handler)
        logger.propagate = False

    if unknown:
        logger.warning("unknown log level %r, using warn", name)
    return logger
