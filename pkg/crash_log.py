# crash_log.py - Application logger setup and uncaught-exception logging

import logging
import sys
from pathlib import Path
from typing import Optional

LOGGER_NAME = "covering_numbers"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

logger = logging.getLogger(LOGGER_NAME)


def configure_logging(verbose: int = 0, log_file: Optional[Path] = None) -> None:
    """
    Attach handlers to the root logger: stderr always, plus log_file if given.
    verbose 0 -> WARNING, 1 -> INFO, 2+ -> DEBUG. Safe to call repeatedly.
    """
    if verbose <= 0:
        level = logging.WARNING
    else:
        level = logging.INFO if verbose == 1 else logging.DEBUG
    root = logging.getLogger()
    root.setLevel(level)
    # Avoid duplicate handlers if called more than once
    for handler in list(root.handlers):
        if getattr(handler, "_covering_numbers", False):
            root.removeHandler(handler)
            handler.close()
    fmt = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file is not None:
        log_file = Path(log_file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    for handler in handlers:
        handler.setFormatter(fmt)
        handler._covering_numbers = True  # type: ignore[attr-defined]
        root.addHandler(handler)


def _handlers_configured() -> bool:
    handlers = logging.getLogger().handlers
    return any(getattr(h, "_covering_numbers", False) for h in handlers)


def log_exception(exc_type, exc_value, exc_tb) -> None:
    """
    sys.excepthook replacement: uncaught exceptions go through the application
    logger when configure_logging has run, otherwise to the default hook.
    Ctrl+C is never logged as a crash.
    """
    if issubclass(exc_type, KeyboardInterrupt) or not _handlers_configured():
        sys.__excepthook__(exc_type, exc_value, exc_tb)
        return
    try:
        exc_info = (exc_type, exc_value, exc_tb)
        logger.critical("Uncaught %s", exc_type.__name__, exc_info=exc_info)
    except Exception:
        sys.__excepthook__(exc_type, exc_value, exc_tb)


def log_current_exception(context: str = "") -> None:
    """Log the exception being handled (no-op outside an except block)."""
    exc_info = sys.exc_info()
    if exc_info[0] is None:
        return
    where = f" in {context}" if context else ""
    logger.error(
        "Unhandled %s%s: %s",
        exc_info[0].__name__,
        where,
        exc_info[1],
        exc_info=exc_info,
    )


def install_global_excepthook() -> None:
    sys.excepthook = log_exception
