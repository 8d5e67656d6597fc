"""
Exception hierarchy for nagi_lab.

Modelled on frappe.exceptions: every error carries a class-level code that the
command line maps to its exit status (Frappe maps the same idea to an HTTP
status code).
"""


class NagiError(Exception):
    exit_code = 1


class ValidationError(NagiError):
    exit_code = 2


class ConfigValidationError(ValidationError):
    """A configuration value failed validation. `key_path` is the dotted key."""

    def __init__(self, key_path, message):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}")


class ConfigurationError(NagiError):
    """Network and environment do not agree on the input/output interface."""

    exit_code = 3


class TopologyMismatchError(NagiError):
    exit_code = 3


class DevelopmentError(NagiError):
    """A genome could not be developed into a network."""

    exit_code = 4


class ContractViolationError(NagiError):
    exit_code = 5


class ChampionFormatError(NagiError):
    """A champion file could not be parsed. `offset` is the failing byte offset."""

    exit_code = 6

    def __init__(self, path, message, offset=None):
        self.path = path
        self.offset = offset
        where = f" at offset {offset}" if offset is not None else ""
        super().__init__(f"{path}: {message}{where}")


class RunDirectoryError(NagiError):
    exit_code = 7


class TaskConstructionError(NagiError):
    exit_code = 8
