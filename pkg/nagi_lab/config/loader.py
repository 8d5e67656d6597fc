"""
Build, validate and serialize EvolutionConfig trees.

A configuration is resolved in three layers: dataclass defaults, the profile
overrides for the task, then an optional JSON document (or dict). Each value is
checked by the validators in `nagi_lab.api.validators`.
"""

import dataclasses
import json
import types
import typing
from pathlib import Path

from nagi_lab.api.validators import (
    validate_bool,
    validate_choice,
    validate_fraction,
    validate_int,
    validate_number_sequence,
    validate_numeric_value,
    validate_positive_int,
    validate_probability,
    validate_profile,
    validate_seed,
    validate_string,
    validate_task,
)
from nagi_lab.config import EvolutionConfig
from nagi_lab.config.profiles import PROFILE_OVERRIDES
from nagi_lab.exceptions import ConfigValidationError
from nagi_lab.tasks.environments import DamageModel, lifetime_bounds

POLE_MASS_SCALINGS = ("fixed", "density")


def build_config(task, profile=None, overrides=None, seed=None):
    """
    Resolve the configuration for a task.

    Args:
        task (str): Task id.
        profile (str, optional): "paper" (default) or "desk".
        overrides (dict, optional): Nested overrides, e.g. loaded from a JSON file.
        seed (int, optional): Master seed; takes precedence over the overrides.

    Returns:
        EvolutionConfig: Validated configuration.

    Raises:
        ConfigValidationError: If any key is unknown or any value is invalid.
    """
    task = validate_task(task)
    profile = validate_profile(profile)

    config = EvolutionConfig(task=task, profile=profile)
    config = merge_config(config, PROFILE_OVERRIDES[profile][task])
    if overrides:
        overrides = dict(overrides)
        # The task and profile are chosen on the command line, never by the file
        overrides.pop("task", None)
        overrides.pop("profile", None)
        config = merge_config(config, overrides)
    if seed is not None:
        config = dataclasses.replace(config, master_seed=validate_seed(seed))

    validate_config(config)
    return config


def merge_config(base, overrides, key_path=""):
    """Return a copy of dataclass `base` with `overrides` applied recursively."""
    if not isinstance(overrides, dict):
        raise ConfigValidationError(key_path or "config", "Must be a JSON object")

    hints = typing.get_type_hints(type(base))
    field_names = {f.name for f in dataclasses.fields(base)}
    changes = {}

    for key, value in overrides.items():
        path = f"{key_path}.{key}" if key_path else key
        if key not in field_names:
            raise ConfigValidationError(path, "Unknown configuration key")

        current = getattr(base, key)
        if dataclasses.is_dataclass(current):
            changes[key] = merge_config(current, value, path)
        else:
            changes[key] = _coerce(value, hints[key], path)

    return dataclasses.replace(base, **changes)


def _coerce(value, hint, path):
    """Coerce a JSON value to the annotated field type."""
    if hint is bool:
        return validate_bool(value, path)
    if hint is int:
        return validate_int(value, path)
    if hint is float:
        return validate_numeric_value(value, path)
    if hint is str:
        return validate_string(value, path)
    if hint is tuple:
        return validate_number_sequence(value, path)
    if typing.get_origin(hint) in (typing.Union, types.UnionType):
        if value is None:
            return None
        inner = [a for a in typing.get_args(hint) if a is not type(None)]
        return _coerce(value, inner[0], path)
    return value


def validate_config(config):
    """
    Check value ranges across the whole tree.

    Raises:
        ConfigValidationError: On the first invalid value.
    """
    validate_task(config.task, "task")
    validate_profile(config.profile, "profile")
    validate_int(config.population_size, "population_size", min_val=2)
    validate_int(config.generations, "generations", min_val=0)
    validate_fraction(config.elitism_fraction, "elitism_fraction")
    validate_positive_int(config.tournament_size, "tournament_size")
    validate_seed(config.master_seed, "master_seed")
    validate_positive_int(config.workers, "workers")
    validate_positive_int(config.checkpoint_every, "checkpoint_every")

    sim = config.simulation
    validate_numeric_value(sim.dt_ms, "simulation.dt_ms", min_val=0, exclusive_min=True)
    validate_probability(sim.membrane_decay_per_step, "simulation.membrane_decay_per_step")
    validate_probability(sim.theta_decay_per_step, "simulation.theta_decay_per_step")
    validate_numeric_value(sim.resting_threshold, "simulation.resting_threshold", min_val=0, exclusive_min=True)
    validate_numeric_value(sim.theta_increment, "simulation.theta_increment", min_val=0)
    validate_numeric_value(sim.bias_current, "simulation.bias_current", min_val=0)
    validate_numeric_value(sim.w_min, "simulation.w_min", min_val=0)
    validate_numeric_value(sim.w_max, "simulation.w_max", min_val=sim.w_min, exclusive_min=True)
    validate_numeric_value(sim.weight_budget, "simulation.weight_budget", min_val=0, exclusive_min=True)
    validate_numeric_value(sim.weight_init_std, "simulation.weight_init_std", min_val=0)
    validate_numeric_value(sim.stdp_window_ms, "simulation.stdp_window_ms", min_val=0, exclusive_min=True)
    validate_numeric_value(sim.actuator_window_ms, "simulation.actuator_window_ms", min_val=sim.dt_ms)

    genome = config.genome
    for f in dataclasses.fields(genome):
        if f.name.endswith(("_probability", "_rate")):
            validate_probability(getattr(genome, f.name), f"genome.{f.name}")
    validate_numeric_value(genome.mutation_power, "genome.mutation_power", min_val=0)

    spec = config.speciation
    validate_numeric_value(spec.excess_coefficient, "speciation.excess_coefficient", min_val=0)
    validate_numeric_value(spec.disjoint_coefficient, "speciation.disjoint_coefficient", min_val=0)
    validate_numeric_value(spec.locus_coefficient, "speciation.locus_coefficient", min_val=0)
    validate_numeric_value(spec.threshold, "speciation.threshold", min_val=0)
    validate_positive_int(spec.small_genome_size, "speciation.small_genome_size")
    validate_positive_int(spec.stagnation_limit, "speciation.stagnation_limit")

    damage = config.damage
    validate_numeric_value(damage.d_correct, "damage.d_correct", min_val=0, exclusive_min=True)
    validate_numeric_value(damage.d_incorrect, "damage.d_incorrect", min_val=damage.d_correct, exclusive_min=True)
    validate_positive_int(damage.s_target, "damage.s_target")

    binary = config.binary
    validate_positive_int(binary.sample_steps, "binary.sample_steps")
    validate_positive_int(binary.samples_per_condition, "binary.samples_per_condition")
    if binary.initial_health is not None:
        validate_numeric_value(binary.initial_health, "binary.initial_health", min_val=0, exclusive_min=True)
        l_min, l_max = lifetime_bounds(binary.initial_health, DamageModel.from_config(damage))
        if l_min >= l_max:
            raise ConfigValidationError(
                "binary.initial_health",
                f"Health {binary.initial_health} gives lifetime bounds [{l_min}, {l_max}]; "
                "raise it so an always-right agent outlives an always-wrong one",
            )
    validate_numeric_value(binary.low_rate_hz, "binary.low_rate_hz", min_val=0, exclusive_min=True)
    validate_numeric_value(binary.high_rate_hz, "binary.high_rate_hz", min_val=binary.low_rate_hz, exclusive_min=True)

    cart = config.cartpole
    validate_number_sequence(cart.train_sizes, "cartpole.train_sizes", min_val=0, exclusive_min=True)
    validate_number_sequence(cart.test_sizes, "cartpole.test_sizes", min_val=0, exclusive_min=True)
    validate_positive_int(cart.train_repeats, "cartpole.train_repeats")
    validate_positive_int(cart.test_repeats, "cartpole.test_repeats")
    validate_positive_int(cart.max_iterations, "cartpole.max_iterations")
    validate_int(cart.success_iterations, "cartpole.success_iterations", min_val=0)
    validate_positive_int(cart.network_steps_per_iteration, "cartpole.network_steps_per_iteration")
    validate_numeric_value(cart.tau, "cartpole.tau", min_val=0, exclusive_min=True)
    validate_numeric_value(cart.pole_mass, "cartpole.pole_mass", min_val=0, exclusive_min=True)
    validate_numeric_value(cart.cart_mass, "cartpole.cart_mass", min_val=0, exclusive_min=True)
    validate_numeric_value(cart.reset_noise, "cartpole.reset_noise", min_val=0)
    validate_choice(cart.pole_mass_scaling, "cartpole.pole_mass_scaling", POLE_MASS_SCALINGS)
    validate_numeric_value(cart.position_scale, "cartpole.position_scale", min_val=0, exclusive_min=True)
    validate_numeric_value(cart.velocity_clip, "cartpole.velocity_clip", min_val=0, exclusive_min=True)
    validate_numeric_value(cart.high_rate_hz, "cartpole.high_rate_hz", min_val=cart.low_rate_hz, exclusive_min=True)

    return config


def config_to_dict(config):
    """Plain-JSON view of a configuration (tuples become lists)."""
    return json.loads(json.dumps(dataclasses.asdict(config)))


def config_from_dict(data):
    """Rebuild a configuration echoed into a run manifest or checkpoint."""
    if not isinstance(data, dict) or "task" not in data:
        raise ConfigValidationError("config", "Must be a JSON object with a task")
    return build_config(data["task"], data.get("profile"), overrides=data)


def load_config_file(path):
    """
    Read a JSON configuration document.

    Raises:
        ConfigValidationError: If the file is missing or not valid JSON.
    """
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigValidationError("config", f"Config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigValidationError("config", f"Invalid JSON in {path} at offset {e.pos}: {e.msg}")
