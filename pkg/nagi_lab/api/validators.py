"""
NAGI Lab - Input Validation Module

This module validates and sanitizes configuration values and command-line
arguments before they reach the simulator. Every function returns the cleaned
value or raises ConfigValidationError naming the dotted key path.

Validation Categories:
1. Task and profile names
2. Integers (population sizes, generations, seeds, counts)
3. Numeric values with bounds (rates, probabilities, physical constants)
4. Booleans and enumerated choices
5. Numeric sequences (pole sizes)

Usage:
    from nagi_lab.api.validators import validate_task, validate_positive_int

    def cmd_evolve(task, seed=None, ...):
        task = validate_task(task)
        seed = validate_seed(seed)
"""

import math

from nagi_lab.config.profiles import PROFILE_NAMES, TASK_IDS
from nagi_lab.exceptions import ConfigValidationError

# Constants for validation
MAX_SEED = 2**63 - 1
MAX_SIMULATIONS = 100_000
TRUE_STRINGS = {"1", "true", "yes", "on"}
FALSE_STRINGS = {"0", "false", "no", "off"}


def validate_task(task, key_path="task"):
    """
    Validate a task identifier.

    Args:
        task (str): Task id, case-insensitive ("food-foraging", "logic-gate", "cart-pole").
        key_path (str): Key path used in error messages.

    Returns:
        str: Normalized task id.

    Raises:
        ConfigValidationError: If the task is unknown.

    Example:
        >>> validate_task("Food-Foraging")  # Returns "food-foraging"
        >>> validate_task("maze")  # Raises ConfigValidationError
    """
    if not task or not isinstance(task, str):
        raise ConfigValidationError(key_path, "Task is required and must be a string")

    task_lower = task.lower().strip().replace("_", "-")
    if task_lower not in TASK_IDS:
        raise ConfigValidationError(
            key_path, f"Invalid task: {task}. Valid options: {', '.join(TASK_IDS)}"
        )
    return task_lower


def validate_profile(profile, key_path="profile"):
    """Validate a profile name; None selects "paper"."""
    if profile is None or profile == "":
        return "paper"

    profile_lower = str(profile).lower().strip()
    if profile_lower not in PROFILE_NAMES:
        raise ConfigValidationError(
            key_path, f"Invalid profile: {profile}. Valid options: {', '.join(PROFILE_NAMES)}"
        )
    return profile_lower


def validate_int(value, key_path, min_val=None, max_val=None):
    """
    Validate an integer parameter.

    Args:
        value: Value to validate (int or numeric string). Booleans are rejected.
        key_path (str): Dotted key path for error messages.
        min_val (int, optional): Minimum allowed value.
        max_val (int, optional): Maximum allowed value.

    Returns:
        int: Validated integer.

    Raises:
        ConfigValidationError: If value is not an integer or out of range.

    Example:
        >>> validate_int("100", "evolution.population_size", min_val=2)  # Returns 100
        >>> validate_int(1.5, "evolution.generations")  # Raises ConfigValidationError
    """
    if isinstance(value, bool):
        raise ConfigValidationError(key_path, f"Invalid value: {value}. Must be an integer.")

    if isinstance(value, float):
        if not value.is_integer():
            raise ConfigValidationError(key_path, f"Invalid value: {value}. Must be an integer.")
        value = int(value)

    try:
        int_value = int(value)
    except (ValueError, TypeError):
        raise ConfigValidationError(key_path, f"Invalid value: {value}. Must be an integer.")

    if min_val is not None and int_value < min_val:
        raise ConfigValidationError(key_path, f"Must be at least {min_val}. Received: {int_value}")

    if max_val is not None and int_value > max_val:
        raise ConfigValidationError(key_path, f"Cannot exceed {max_val}. Received: {int_value}")

    return int_value


def validate_positive_int(value, key_path):
    return validate_int(value, key_path, min_val=1)


def validate_numeric_value(value, key_path, min_val=None, max_val=None, exclusive_min=False):
    """
    Validate a finite numeric parameter.

    Args:
        value: Value to validate (int, float, or string).
        key_path (str): Dotted key path for error messages.
        min_val (numeric, optional): Minimum allowed value.
        max_val (numeric, optional): Maximum allowed value.
        exclusive_min (bool): If True the value must be strictly greater than min_val.

    Returns:
        float: Validated numeric value.

    Raises:
        ConfigValidationError: If value is not numeric, not finite or out of range.

    Example:
        >>> validate_numeric_value("0.1", "simulation.dt_ms", min_val=0, exclusive_min=True)
        >>> validate_numeric_value(0, "simulation.dt_ms", min_val=0, exclusive_min=True)  # Raises
    """
    if isinstance(value, bool):
        raise ConfigValidationError(key_path, f"Invalid value: {value}. Must be a number.")

    try:
        num_value = float(value)
    except (ValueError, TypeError):
        raise ConfigValidationError(key_path, f"Invalid value: {value}. Must be a number.")

    if not math.isfinite(num_value):
        raise ConfigValidationError(key_path, f"Invalid value: {value}. Must be finite.")

    if min_val is not None:
        if exclusive_min and num_value <= min_val:
            raise ConfigValidationError(key_path, f"Must be greater than {min_val}. Received: {num_value}")
        if not exclusive_min and num_value < min_val:
            raise ConfigValidationError(key_path, f"Must be at least {min_val}. Received: {num_value}")

    if max_val is not None and num_value > max_val:
        raise ConfigValidationError(key_path, f"Cannot exceed {max_val}. Received: {num_value}")

    return num_value


def validate_probability(value, key_path):
    return validate_numeric_value(value, key_path, min_val=0.0, max_val=1.0)


def validate_fraction(value, key_path):
    """Validate a fraction in [0, 1) such as the elitism fraction."""
    num_value = validate_numeric_value(value, key_path, min_val=0.0)
    if num_value >= 1.0:
        raise ConfigValidationError(key_path, f"Must be below 1. Received: {num_value}")
    return num_value


def validate_bool(value, key_path):
    """Accept real booleans, 0/1 and the usual string spellings."""
    if isinstance(value, bool):
        return value
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    if isinstance(value, str):
        lowered = value.lower().strip()
        if lowered in TRUE_STRINGS:
            return True
        if lowered in FALSE_STRINGS:
            return False
    raise ConfigValidationError(key_path, f"Invalid value: {value}. Must be a boolean.")


def validate_choice(value, key_path, choices):
    if value not in choices:
        raise ConfigValidationError(
            key_path, f"Invalid value: {value}. Valid options: {', '.join(map(str, choices))}"
        )
    return value


def validate_string(value, key_path):
    if not isinstance(value, str):
        raise ConfigValidationError(key_path, f"Invalid value: {value}. Must be a string.")
    return value


def validate_number_sequence(values, key_path, min_val=None, exclusive_min=False):
    """
    Validate a non-empty list of numbers, e.g. pole sizes.

    Returns:
        tuple: Validated floats.
    """
    if isinstance(values, (str, bytes)) or not hasattr(values, "__iter__"):
        raise ConfigValidationError(key_path, f"Invalid value: {values}. Must be a list of numbers.")

    cleaned = tuple(
        validate_numeric_value(v, f"{key_path}[{i}]", min_val=min_val, exclusive_min=exclusive_min)
        for i, v in enumerate(values)
    )
    if not cleaned:
        raise ConfigValidationError(key_path, "Must contain at least one value")
    return cleaned


def validate_seed(seed, key_path="seed"):
    """Validate a master seed; None selects 0."""
    if seed is None or seed == "":
        return 0
    return validate_int(seed, key_path, min_val=0, max_val=MAX_SEED)


def validate_simulation_count(n_sims, key_path="sims"):
    """Validate the number of test simulations (0 yields a header-only report)."""
    if n_sims is None:
        return 10
    return validate_int(n_sims, key_path, min_val=0, max_val=MAX_SIMULATIONS)
