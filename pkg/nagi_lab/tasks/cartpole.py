"""
Cart-pole balancing with a pole whose length changes during the lifetime.

Physics follow the classic cart-pole equations with Euler integration
(tau = 0.02 s). The pole "size" is the half-length of the pole. Each
environment iteration the observation is rate coded into 12 inputs, the
network runs `network_steps_per_iteration` steps, the decoded action pushes
the cart left or right, and the physics advance one step.
"""

import math
from dataclasses import dataclass

from nagi_lab.config import CartPoleConfig
from nagi_lab.config.profiles import TASK_CART_POLE
from nagi_lab.exceptions import ValidationError
from nagi_lab.snn.spiking_core import SimClock
from nagi_lab.tasks.encoding import ActionDecoder, SpikeEncoder, observation_to_rates
from nagi_lab.tasks.environments import (
    MODE_TEST,
    MODE_TRAIN,
    MODES,
    ORDER_SEPARATOR,
    ActuatorSample,
    LifetimeReport,
    check_interface,
)

N_INPUTS = 12
N_OUTPUTS = 2

PUSH_LEFT = 0
PUSH_RIGHT = 1

# Pole size the default pole mass refers to ("density" scaling)
REFERENCE_POLE_SIZE = 0.5


@dataclass(frozen=True)
class CartPoleState:
    x: float = 0.0
    x_dot: float = 0.0
    theta: float = 0.0
    theta_dot: float = 0.0

    def as_tuple(self):
        return (self.x, self.x_dot, self.theta, self.theta_dot)


@dataclass(frozen=True)
class PhysicsParams:
    gravity: float = 9.8
    cart_mass: float = 1.0
    pole_mass: float = 0.1
    half_length: float = 0.5
    force_mag: float = 10.0
    tau: float = 0.02
    x_limit: float = 2.4
    theta_limit_rad: float = 12 * 2 * math.pi / 360

    @classmethod
    def for_size(cls, size, config=CartPoleConfig()):
        pole_mass = config.pole_mass
        if config.pole_mass_scaling == "density":
            pole_mass = config.pole_mass * size / REFERENCE_POLE_SIZE
        return cls(
            gravity=config.gravity,
            cart_mass=config.cart_mass,
            pole_mass=pole_mass,
            half_length=size,
            force_mag=config.force_mag,
            tau=config.tau,
            x_limit=config.x_limit,
            theta_limit_rad=config.theta_limit_rad,
        )


def physics_step(s, force, params=PhysicsParams()):
    """One Euler step of the frictionless cart-pole equations of motion."""
    total_mass = params.cart_mass + params.pole_mass
    polemass_length = params.pole_mass * params.half_length
    cos_theta = math.cos(s.theta)
    sin_theta = math.sin(s.theta)

    temp = (force + polemass_length * s.theta_dot**2 * sin_theta) / total_mass
    theta_acc = (params.gravity * sin_theta - cos_theta * temp) / (
        params.half_length * (4.0 / 3.0 - params.pole_mass * cos_theta**2 / total_mass)
    )
    x_acc = temp - polemass_length * theta_acc * cos_theta / total_mass

    return CartPoleState(
        x=s.x + params.tau * s.x_dot,
        x_dot=s.x_dot + params.tau * x_acc,
        theta=s.theta + params.tau * s.theta_dot,
        theta_dot=s.theta_dot + params.tau * theta_acc,
    )


def is_terminal(s, params=PhysicsParams()):
    return abs(s.x) > params.x_limit or abs(s.theta) > params.theta_limit_rad


def reset_state(rng, noise=0.05):
    x, x_dot, theta, theta_dot = rng.uniform(-noise, noise, size=4)
    return CartPoleState(float(x), float(x_dot), float(theta), float(theta_dot))


@dataclass(frozen=True)
class PoleSchedule:
    train_sizes: tuple = (0.5, 0.3, 0.7)
    test_sizes: tuple = (0.4, 0.6)
    train_repeats: int = 3
    test_repeats: int = 1
    max_iterations: int = 200

    def __post_init__(self):
        if any(size <= 0 for size in self.train_sizes + self.test_sizes):
            raise ValidationError("Pole sizes must be positive")

    @classmethod
    def from_config(cls, config):
        return cls(
            tuple(config.train_sizes),
            tuple(config.test_sizes),
            config.train_repeats,
            config.test_repeats,
            config.max_iterations,
        )

    def conditions(self, mode, rng=None):
        """
        Pole sizes in run order.

        Training runs each size `train_repeats` times in a row, in the listed
        order. Testing shuffles the test sizes with `rng`.
        """
        if mode == MODE_TRAIN:
            return [size for size in self.train_sizes for _ in range(self.train_repeats)]
        sizes = list(self.test_sizes)
        if rng is not None:
            sizes = [sizes[k] for k in rng.permutation(len(sizes))]
        return [size for size in sizes for _ in range(self.test_repeats)]


def run_cartpole_lifetime(net, schedule, mode, rng, config=CartPoleConfig(), dt_ms=0.1, trace_every=None):
    """
    Run every scheduled pole size once and score the balanced iterations.

    Each condition restarts the cart from a small random perturbation; the
    network and its tie memory carry over. A condition ends at the first
    terminal state or after `max_iterations` balanced iterations. When no
    action has been decoded yet no force is applied. With `trace_every` the
    actuator counts are recorded every that many network steps.

    Returns:
        LifetimeReport: fitness = balanced iterations / (conditions * max_iterations);
        accuracy metrics are None; `condition_steps` lists (size, steps).
    """
    if mode not in MODES:
        raise ValidationError(f"Invalid mode {mode!r}. Must be one of {MODES}")
    check_interface(net, N_INPUTS, N_OUTPUTS, TASK_CART_POLE)

    sizes = schedule.conditions(mode, rng if mode == MODE_TEST else None)
    clock = SimClock(0, dt_ms)
    encoder = SpikeEncoder(N_INPUTS, dt_ms, reset_on_change=False)
    decoder = ActionDecoder()
    action = None
    net_steps = 0

    condition_steps = []
    actuator_trace = []
    for size in sizes:
        params = PhysicsParams.for_size(size, config)
        state = reset_state(rng, config.reset_noise)
        balanced = 0
        while balanced < schedule.max_iterations:
            encoder.set_rates(observation_to_rates(state.as_tuple(), config))
            for _ in range(config.network_steps_per_iteration):
                net.step(encoder.step(), clock)
                net_steps += 1
                if trace_every and net_steps % trace_every == 0:
                    actuator_trace.append(ActuatorSample(net_steps, str(size), tuple(net.output_counts())))
            action = decoder.decode(net.output_counts())

            if action == PUSH_RIGHT:
                force = params.force_mag
            elif action == PUSH_LEFT:
                force = -params.force_mag
            else:
                force = 0.0

            state = physics_step(state, force, params)
            if is_terminal(state, params):
                break
            balanced += 1
        condition_steps.append((size, balanced))

    total = sum(steps for _, steps in condition_steps)
    t_max = len(sizes) * schedule.max_iterations
    return LifetimeReport(
        survived_steps=total,
        fitness=total / t_max if t_max else 0.0,
        accuracy=None,
        eos_accuracy=None,
        l_min=0,
        l_max=t_max,
        environment_order=ORDER_SEPARATOR.join(str(size) for size, _ in condition_steps),
        condition_steps=condition_steps,
        actuator_trace=actuator_trace,
    )


def is_successful(steps, config=CartPoleConfig()):
    """A condition run succeeds when the pole stayed up for more than `success_iterations`."""
    return steps > config.success_iterations
