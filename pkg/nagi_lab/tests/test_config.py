import json
import tempfile
import unittest
from pathlib import Path

from nagi_lab.api.validators import (
    validate_bool,
    validate_fraction,
    validate_int,
    validate_number_sequence,
    validate_numeric_value,
    validate_profile,
    validate_seed,
    validate_simulation_count,
    validate_task,
)
from nagi_lab.config.loader import build_config, config_from_dict, config_to_dict, load_config_file
from nagi_lab.exceptions import ConfigValidationError


class TestValidators(unittest.TestCase):
    def test_task_names(self):
        self.assertEqual(validate_task("Food-Foraging"), "food-foraging")
        self.assertEqual(validate_task("logic_gate"), "logic-gate")
        for bad in ("maze", "", None, 3):
            with self.assertRaises(ConfigValidationError):
                validate_task(bad)

    def test_profiles(self):
        self.assertEqual(validate_profile(None), "paper")
        self.assertEqual(validate_profile("DESK"), "desk")
        with self.assertRaises(ConfigValidationError):
            validate_profile("laptop")

    def test_integers(self):
        self.assertEqual(validate_int("100", "population_size", min_val=2), 100)
        self.assertEqual(validate_int(4.0, "generations"), 4)
        for bad in (1.5, True, "ten", None):
            with self.assertRaises(ConfigValidationError):
                validate_int(bad, "generations")
        with self.assertRaises(ConfigValidationError) as ctx:
            validate_int(1, "population_size", min_val=2)
        self.assertEqual(ctx.exception.key_path, "population_size")

    def test_numbers(self):
        self.assertEqual(validate_numeric_value("0.1", "simulation.dt_ms", min_val=0, exclusive_min=True), 0.1)
        for bad in (0, "nan", "inf", False):
            with self.assertRaises(ConfigValidationError):
                validate_numeric_value(bad, "simulation.dt_ms", min_val=0, exclusive_min=True)

    def test_fraction(self):
        self.assertEqual(validate_fraction(0.1, "elitism_fraction"), 0.1)
        with self.assertRaises(ConfigValidationError):
            validate_fraction(1.0, "elitism_fraction")

    def test_booleans(self):
        self.assertTrue(validate_bool("yes", "binary.shuffle_conditions"))
        self.assertFalse(validate_bool(0, "binary.shuffle_conditions"))
        with self.assertRaises(ConfigValidationError):
            validate_bool("maybe", "binary.shuffle_conditions")

    def test_sequences(self):
        self.assertEqual(validate_number_sequence([0.4, "0.6"], "cartpole.test_sizes"), (0.4, 0.6))
        for bad in ([], "0.4", [0.4, "x"]):
            with self.assertRaises(ConfigValidationError):
                validate_number_sequence(bad, "cartpole.test_sizes")
        with self.assertRaises(ConfigValidationError) as ctx:
            validate_number_sequence([0.4, 0.0], "cartpole.test_sizes", min_val=0, exclusive_min=True)
        self.assertEqual(ctx.exception.key_path, "cartpole.test_sizes[1]")

    def test_seed_and_simulation_defaults(self):
        self.assertEqual(validate_seed(None), 0)
        self.assertEqual(validate_seed("7"), 7)
        with self.assertRaises(ConfigValidationError):
            validate_seed(-1)
        self.assertEqual(validate_simulation_count(None), 10)
        self.assertEqual(validate_simulation_count(0), 0)
        with self.assertRaises(ConfigValidationError):
            validate_simulation_count(-1)


class TestLoader(unittest.TestCase):
    def test_paper_defaults(self):
        config = build_config("food-foraging")
        self.assertEqual(config.profile, "paper")
        self.assertEqual(config.population_size, 100)
        self.assertEqual(config.generations, 1000)
        self.assertEqual(config.elite_count, 10)
        self.assertEqual(config.binary.sample_steps, 10_000)
        self.assertEqual(config.simulation.dt_ms, 0.1)
        self.assertEqual(build_config("cart-pole").population_size, 256)

    def test_desk_profile(self):
        config = build_config("cart-pole", "desk")
        self.assertEqual(config.population_size, 64)
        self.assertEqual(config.simulation.actuator_window_ms, 100.0)
        self.assertEqual(config.cartpole.network_steps_per_iteration, 250)
        self.assertEqual(config.simulation.dt_ms, 0.1)

    def test_overrides_and_seed(self):
        config = build_config(
            "logic-gate",
            "desk",
            {"population_size": "12", "damage": {"s_target": 4}, "cartpole": {"test_sizes": [0.45]}, "task": "cart-pole"},
            seed=5,
        )
        self.assertEqual(config.task, "logic-gate")
        self.assertEqual(config.population_size, 12)
        self.assertEqual(config.damage.s_target, 4)
        self.assertEqual(config.cartpole.test_sizes, (0.45,))
        self.assertEqual(config.master_seed, 5)

    def test_nullable_fields(self):
        config = build_config("food-foraging", overrides={"binary": {"initial_health": 500}})
        self.assertEqual(config.binary.initial_health, 500.0)
        config = build_config("food-foraging", overrides={"binary": {"initial_health": None}})
        self.assertIsNone(config.binary.initial_health)

    def test_unknown_key(self):
        with self.assertRaises(ConfigValidationError) as ctx:
            build_config("food-foraging", overrides={"simulation": {"dt": 0.2}})
        self.assertEqual(ctx.exception.key_path, "simulation.dt")

    def test_invalid_values(self):
        bad_overrides = (
            {"simulation": {"dt_ms": 0}},
            {"population_size": 1},
            {"damage": {"d_correct": 3.0}},
            {"cartpole": {"pole_mass_scaling": "linear"}},
            {"genome": {"add_node_rate": 1.5}},
            {"simulation": "fast"},
        )
        for overrides in bad_overrides:
            with self.assertRaises(ConfigValidationError):
                build_config("food-foraging", overrides=overrides)

    def test_initial_health_needs_distinct_bounds(self):
        for health in (1.0, 0.5, 0.01):
            with self.assertRaises(ConfigValidationError) as ctx:
                build_config("food-foraging", overrides={"binary": {"initial_health": health}})
            self.assertEqual(ctx.exception.key_path, "binary.initial_health")

        config = build_config("food-foraging", overrides={"binary": {"initial_health": 3.0}})
        self.assertEqual(config.binary.initial_health, 3.0)

    def test_dict_round_trip(self):
        config = build_config("cart-pole", "desk", {"cartpole": {"test_sizes": [0.4, 0.65]}}, seed=3)
        data = config_to_dict(config)
        self.assertEqual(data["cartpole"]["test_sizes"], [0.4, 0.65])
        self.assertEqual(config_from_dict(data), config)
        with self.assertRaises(ConfigValidationError):
            config_from_dict({"profile": "desk"})

    def test_config_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "overrides.json"
            path.write_text(json.dumps({"generations": 3}), encoding="utf-8")
            self.assertEqual(load_config_file(path), {"generations": 3})

            path.write_text("{not json", encoding="utf-8")
            with self.assertRaises(ConfigValidationError):
                load_config_file(path)
            with self.assertRaises(ConfigValidationError):
                load_config_file(Path(tmp) / "missing.json")
