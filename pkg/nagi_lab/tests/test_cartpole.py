import math
import unittest

import numpy as np

from nagi_lab.config import CartPoleConfig
from nagi_lab.exceptions import ConfigurationError, ValidationError
from nagi_lab.tasks.cartpole import (
    N_INPUTS,
    CartPoleState,
    PhysicsParams,
    PoleSchedule,
    is_successful,
    is_terminal,
    physics_step,
    reset_state,
    run_cartpole_lifetime,
)


def reference_step(x, x_dot, theta, theta_dot, force, g=9.8, m_c=1.0, m_p=0.1, l=0.5, tau=0.02):
    """Equations of motion written out independently of the simulator."""
    m = m_c + m_p
    s, c = math.sin(theta), math.cos(theta)
    theta_acc = (g * s - c * (force + m_p * l * theta_dot**2 * s) / m) / (l * (4.0 / 3.0 - m_p * c * c / m))
    x_acc = (force + m_p * l * (theta_dot**2 * s - theta_acc * c)) / m
    return (x + tau * x_dot, x_dot + tau * x_acc, theta + tau * theta_dot, theta_dot + tau * theta_acc)


class SilentAgent:
    n_inputs = N_INPUTS
    n_outputs = 2

    def __init__(self):
        self.steps = 0

    def step(self, input_spikes, clock):
        self.steps += 1
        clock.tick()

    def output_counts(self):
        return [0, 0]


FAST = CartPoleConfig(network_steps_per_iteration=2)


class TestPhysics(unittest.TestCase):
    def test_equilibrium(self):
        self.assertEqual(physics_step(CartPoleState(), 0.0), CartPoleState())

    def test_push_from_rest(self):
        s = physics_step(CartPoleState(), 10.0)
        self.assertEqual(s.x, 0.0)
        self.assertEqual(s.theta, 0.0)
        self.assertAlmostEqual(s.x_dot, 0.195122, places=5)
        self.assertAlmostEqual(s.theta_dot, -0.292683, places=5)

    def test_matches_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(10_000):
            x, x_dot, theta, theta_dot = rng.uniform(-0.3, 0.3, size=4)
            force = float(rng.choice([-10.0, 0.0, 10.0]))
            size = float(rng.choice([0.3, 0.4, 0.5, 0.6, 0.7]))
            s = physics_step(CartPoleState(x, x_dot, theta, theta_dot), force, PhysicsParams(half_length=size))
            expected = reference_step(x, x_dot, theta, theta_dot, force, l=size)
            for got, want in zip(s.as_tuple(), expected):
                self.assertAlmostEqual(got, want, delta=1e-12)

    def test_terminal_states(self):
        self.assertTrue(is_terminal(CartPoleState(theta=0.22)))
        self.assertTrue(is_terminal(CartPoleState(theta=-0.22)))
        self.assertTrue(is_terminal(CartPoleState(x=2.5)))
        self.assertFalse(is_terminal(CartPoleState(theta=0.2, x=2.3)))

    def test_density_scaling(self):
        config = CartPoleConfig(pole_mass_scaling="density")
        self.assertAlmostEqual(PhysicsParams.for_size(0.7, config).pole_mass, 0.14)
        self.assertEqual(PhysicsParams.for_size(0.7).pole_mass, 0.1)
        self.assertEqual(PhysicsParams.for_size(0.7).half_length, 0.7)

    def test_reset_noise(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            for value in reset_state(rng, 0.05).as_tuple():
                self.assertLessEqual(abs(value), 0.05)


class TestSchedule(unittest.TestCase):
    def test_training_sizes_in_blocks(self):
        schedule = PoleSchedule.from_config(CartPoleConfig())
        self.assertEqual(schedule.conditions("train"), [0.5, 0.5, 0.5, 0.3, 0.3, 0.3, 0.7, 0.7, 0.7])

    def test_test_sizes_shuffled(self):
        schedule = PoleSchedule()
        orders = {tuple(schedule.conditions("test", np.random.default_rng(seed))) for seed in range(20)}
        self.assertEqual(orders, {(0.4, 0.6), (0.6, 0.4)})

    def test_rejects_non_positive_size(self):
        with self.assertRaises(ValidationError):
            PoleSchedule(train_sizes=(0.5, 0.0))

    def test_success_threshold(self):
        self.assertTrue(is_successful(101))
        self.assertFalse(is_successful(100))


class TestLifetime(unittest.TestCase):
    def test_fitness_is_share_of_balanced_iterations(self):
        schedule = PoleSchedule.from_config(FAST)
        report = run_cartpole_lifetime(SilentAgent(), schedule, "test", np.random.default_rng(2), FAST)
        self.assertEqual(len(report.condition_steps), 2)
        total = sum(steps for _, steps in report.condition_steps)
        self.assertEqual(report.survived_steps, total)
        self.assertEqual(report.l_max, 400)
        self.assertAlmostEqual(report.fitness, total / 400)
        self.assertIsNone(report.accuracy)
        self.assertIsNone(report.eos_accuracy)
        for _, steps in report.condition_steps:
            self.assertGreaterEqual(steps, 0)
            self.assertLessEqual(steps, 200)

    def test_agent_runs_per_iteration_steps(self):
        agent = SilentAgent()
        schedule = PoleSchedule.from_config(FAST)
        report = run_cartpole_lifetime(agent, schedule, "train", np.random.default_rng(3), FAST)
        iterations = sum(min(steps + 1, 200) for _, steps in report.condition_steps)
        self.assertEqual(agent.steps, iterations * FAST.network_steps_per_iteration)
        self.assertEqual(report.environment_order, ">".join(["0.5"] * 3 + ["0.3"] * 3 + ["0.7"] * 3))

    def test_actuator_trace(self):
        agent = SilentAgent()
        schedule = PoleSchedule.from_config(FAST)
        report = run_cartpole_lifetime(agent, schedule, "train", np.random.default_rng(3), FAST, trace_every=3)
        self.assertEqual(len(report.actuator_trace), agent.steps // 3)
        self.assertEqual([s.step for s in report.actuator_trace[:2]], [3, 6])
        self.assertEqual({s.counts for s in report.actuator_trace}, {(0, 0)})
        self.assertEqual(report.actuator_trace[0].condition, "0.5")
        self.assertEqual(report.actuator_trace[-1].condition, "0.7")

    def test_same_seed_same_report(self):
        schedule = PoleSchedule.from_config(FAST)
        a = run_cartpole_lifetime(SilentAgent(), schedule, "test", np.random.default_rng(4), FAST)
        b = run_cartpole_lifetime(SilentAgent(), schedule, "test", np.random.default_rng(4), FAST)
        self.assertEqual(a.condition_steps, b.condition_steps)

    def test_invalid_mode(self):
        with self.assertRaises(ValidationError):
            run_cartpole_lifetime(SilentAgent(), PoleSchedule(), "eval", np.random.default_rng(0), FAST)

    def test_interface_mismatch(self):
        agent = SilentAgent()
        agent.n_inputs = 4
        with self.assertRaises(ConfigurationError):
            run_cartpole_lifetime(agent, PoleSchedule(), "train", np.random.default_rng(0), FAST)
