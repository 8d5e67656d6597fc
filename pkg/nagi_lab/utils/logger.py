"""
Logging helpers shaped after frappe.logger / frappe.log_error.

Frappe's logger needs a bench site to resolve its log directory; evolution runs
and their worker processes have no site, so the run directory takes that role.

Usage:
    from nagi_lab.utils.logger import logger, log_error

    logger("evolution").info(f"Generation {gen} completed in {elapsed:.3f}s")
    log_error(title="Evaluation failed", message=traceback.format_exc())
"""

import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path

LOGGER_NAMESPACE = "nagi_lab"
LOG_FILE_NAME = "nagi_lab.log"

# Same rotation defaults as frappe.utils.logger.get_logger
LOG_MAX_SIZE = 100_000
LOG_FILE_COUNT = 20

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"

_file_handler = None


def logger(module=None):
    """
    Return the logger for a module of the app.

    Args:
        module (str, optional): Sub-module name, e.g. "evolution".

    Returns:
        logging.Logger: `nagi_lab` or `nagi_lab.<module>`.
    """
    name = f"{LOGGER_NAMESPACE}.{module}" if module else LOGGER_NAMESPACE
    return logging.getLogger(name)


def set_log_file(run_dir):
    """Route all nagi_lab records into `<run_dir>/nagi_lab.log` (replaces any previous file)."""
    global _file_handler

    root = logging.getLogger(LOGGER_NAMESPACE)
    if _file_handler is not None:
        root.removeHandler(_file_handler)
        _file_handler.close()

    path = Path(run_dir) / LOG_FILE_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    _file_handler = RotatingFileHandler(path, maxBytes=LOG_MAX_SIZE, backupCount=LOG_FILE_COUNT)
    _file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(_file_handler)
    if root.level == logging.NOTSET or root.level > logging.INFO:
        root.setLevel(logging.INFO)
    return path


def close_log_file():
    global _file_handler

    if _file_handler is not None:
        logging.getLogger(LOGGER_NAMESPACE).removeHandler(_file_handler)
        _file_handler.close()
        _file_handler = None


def log_error(title, message):
    """Record an error entry: a title line followed by the message (usually a traceback)."""
    try:
        logger().error(f"{title}\n{message}")
    except Exception:
        pass
