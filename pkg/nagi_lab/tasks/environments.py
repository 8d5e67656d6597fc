"""
Mutable binary-classification environments and the health/damage model.

The agent is shown one sample at a time for `sample_steps` network steps and
acts through the output neuron with the most spikes in the actuator window.
The rule deciding the correct action (which food colour is edible, which
logic gate is active) changes after every `samples_per_condition` samples,
cycling through all conditions. Every step costs health:

    d = d_c p_c + d_i p_i         (d_i when neither output spiked)

so the agent lives longest by acting correctly with confidence. Fitness is
the survived lifetime normalized between the shortest and longest possible
lifetimes.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum

from nagi_lab.config import BinaryTaskConfig, DamageConfig
from nagi_lab.config.profiles import TASK_FOOD_FORAGING, TASK_LOGIC_GATE
from nagi_lab.exceptions import ConfigurationError, ContractViolationError, ValidationError
from nagi_lab.snn.spiking_core import SimClock
from nagi_lab.tasks.encoding import ActionDecoder, RateRange, SpikeEncoder, binary_to_rates

# ============================================
# Actions and Conditions
# ============================================

EAT = 0
AVOID = 1

BLACK = "black"
WHITE = "white"
FOOD_COLORS = (BLACK, WHITE)

TRAINING_GATES = ("A", "B", "NOT A", "NOT B", "ONLY 0", "ONLY 1", "XOR", "XNOR")
TEST_GATES = ("AND", "NAND", "OR", "NOR")

GATE_INPUTS = ((0, 0), (0, 1), (1, 0), (1, 1))

GATE_TABLES = {
    "A": lambda a, b: a,
    "B": lambda a, b: b,
    "NOT A": lambda a, b: 1 - a,
    "NOT B": lambda a, b: 1 - b,
    "ONLY 0": lambda a, b: 0,
    "ONLY 1": lambda a, b: 1,
    "XOR": lambda a, b: a ^ b,
    "XNOR": lambda a, b: 1 - (a ^ b),
    "AND": lambda a, b: a & b,
    "NAND": lambda a, b: 1 - (a & b),
    "OR": lambda a, b: a | b,
    "NOR": lambda a, b: 1 - (a | b),
}

MODE_TRAIN = "train"
MODE_TEST = "test"
MODES = (MODE_TRAIN, MODE_TEST)

ORDER_SEPARATOR = ">"


class FoodCondition(str, Enum):
    """Which food colours are edible."""

    BLACK = "black"
    WHITE = "white"
    NONE = "none"
    BOTH = "both"

    @property
    def edible_set(self):
        return {
            FoodCondition.BLACK: {BLACK},
            FoodCondition.WHITE: {WHITE},
            FoodCondition.NONE: set(),
            FoodCondition.BOTH: {BLACK, WHITE},
        }[self]


FOOD_CONDITION_ORDER = (FoodCondition.BLACK, FoodCondition.WHITE, FoodCondition.NONE, FoodCondition.BOTH)


def correct_action(condition, current_input):
    """
    The correct action for a condition and the presented sample.

    Args:
        condition (FoodCondition | str): Edible set, or the active gate name.
        current_input (str | tuple[int, int]): Food colour, or the gate's bit pair.

    Returns:
        int: EAT (0) / AVOID (1) for food; the gate output bit for gates.
    """
    if isinstance(condition, FoodCondition):
        return EAT if current_input in condition.edible_set else AVOID
    try:
        table = GATE_TABLES[condition]
    except KeyError:
        raise ValidationError(f"Unknown condition {condition!r}")
    a, b = current_input
    return table(a, b)


# ============================================
# Damage Model
# ============================================


@dataclass(frozen=True)
class DamageModel:
    d_correct: float = 1.0
    d_incorrect: float = 2.0
    s_target: int = 3
    initial_health: float | None = None

    def __post_init__(self):
        if not 0 < self.d_correct < self.d_incorrect:
            raise ValidationError(
                f"Damage values must satisfy 0 < d_correct < d_incorrect, got {self.d_correct} and {self.d_incorrect}"
            )
        if self.s_target < 1:
            raise ValidationError(f"s_target must be at least 1, got {self.s_target}")

    @classmethod
    def from_config(cls, damage, initial_health=None):
        return cls(damage.d_correct, damage.d_incorrect, damage.s_target, initial_health)


def spike_participation(s_correct, s_incorrect, s_target):
    """
    Share of the correct and incorrect output in the current decision.

    Up to 2 s_t spikes in total, counts are capped at s_t and compared around
    the midpoint; above that, the plain spike ratio is used. The two branches
    agree where they meet.

    Returns:
        tuple: (p_c, p_i), both in [0, 1] and summing to 1.
    """
    if s_correct < 0 or s_incorrect < 0:
        raise ValueError(f"Spike counts must be non-negative, got {s_correct} and {s_incorrect}")
    if s_correct + s_incorrect <= 2 * s_target:
        p_c = (min(s_correct, s_target) - min(s_incorrect, s_target) + s_target) / (2 * s_target)
    else:
        p_c = s_correct / (s_correct + s_incorrect)
    return p_c, 1.0 - p_c


def damage(s_correct, s_incorrect, model=DamageModel()):
    """Damage for one step; d_i when neither output spiked."""
    if s_correct == 0 and s_incorrect == 0:
        return model.d_incorrect
    p_c, p_i = spike_participation(s_correct, s_incorrect, model.s_target)
    return model.d_correct * p_c + model.d_incorrect * p_i


def lifetime_bounds(initial_health, model):
    """(L_min, L_max): steps survived by an always-wrong and an always-right agent."""
    # Tolerance keeps exact quotients such as 160000 / 1 from rounding up
    l_max = math.ceil(initial_health / model.d_correct - 1e-9)
    l_min = math.ceil(initial_health / model.d_incorrect - 1e-9)
    return l_min, l_max


def fitness_from_lifetime(t, l_min, l_max):
    """
    (t - L_min) / (L_max - L_min)

    Raises:
        ContractViolationError: If the bounds are inverted or t lies outside them.
    """
    if not l_min < l_max:
        raise ContractViolationError(f"Lifetime bounds must satisfy l_min < l_max, got {l_min} and {l_max}")
    if not l_min <= t <= l_max:
        raise ContractViolationError(f"Lifetime {t} is outside [{l_min}, {l_max}]")
    return (t - l_min) / (l_max - l_min)


# ============================================
# Lifetime Report
# ============================================


@dataclass(frozen=True)
class SampleTrace:
    sample_index: int
    condition: str
    input: str
    correct_action: int
    eos_action: int | None
    accuracy: float
    counts: tuple
    completed: bool = True


@dataclass(frozen=True)
class ActuatorSample:
    """Actuator window counts after network step `step` of the lifetime."""

    step: int
    condition: str
    counts: tuple


@dataclass
class LifetimeReport:
    survived_steps: int
    fitness: float
    accuracy: float | None
    eos_accuracy: float | None
    l_min: int = 0
    l_max: int = 0
    input_order: str = ""
    environment_order: str = ""
    trace: list = field(default_factory=list)
    # (condition label, steps) per condition run
    condition_steps: list = field(default_factory=list)
    actuator_trace: list = field(default_factory=list)


# ============================================
# Environments
# ============================================


@dataclass(frozen=True)
class Sample:
    index: int
    condition: object
    input: object
    correct_action: int
    data_rates: tuple


class MutableEnvironment(ABC):
    """
    A binary task whose ground-truth rule changes during the lifetime.

    Inputs are the one-hot data channels followed by one reward and one
    penalty channel. Condition order and input order are drawn once, at
    construction, from `rng`.
    """

    task_id = None
    n_data_inputs = 0
    n_outputs = 2

    def __init__(self, config=BinaryTaskConfig(), rng=None, mode=MODE_TRAIN, rate_range=None):
        if mode not in MODES:
            raise ValidationError(f"Invalid mode {mode!r}. Must be one of {MODES}")
        if rng is None:
            raise ValidationError("An environment needs a random generator")
        self.config = config
        self.mode = mode
        self.rate_range = rate_range or RateRange(config.low_rate_hz, config.high_rate_hz)
        self._conditions = list(self.base_conditions())
        if mode == MODE_TEST or config.shuffle_conditions:
            self._conditions = [self._conditions[k] for k in rng.permutation(len(self._conditions))]
        self._setup_inputs(rng)

    @property
    def n_inputs(self):
        return self.n_data_inputs + 2

    @property
    def reward_channel(self):
        return self.n_data_inputs

    @property
    def penalty_channel(self):
        return self.n_data_inputs + 1

    @property
    def conditions(self):
        return list(self._conditions)

    @property
    def cycle_length(self):
        """Samples in one pass over every condition."""
        return len(self._conditions) * self.config.samples_per_condition

    def default_initial_health(self, model):
        return model.d_correct * self.cycle_length * self.config.sample_steps

    @abstractmethod
    def base_conditions(self):
        pass

    @abstractmethod
    def _setup_inputs(self, rng):
        pass

    @abstractmethod
    def input_for(self, sample_index):
        pass

    @abstractmethod
    def encode_input(self, current_input):
        pass

    @abstractmethod
    def input_label(self, current_input):
        pass

    @property
    @abstractmethod
    def input_order(self):
        pass

    def condition_label(self, condition):
        return condition.value if isinstance(condition, Enum) else str(condition)

    @property
    def environment_order(self):
        return ORDER_SEPARATOR.join(self.condition_label(c) for c in self._conditions)

    def sample(self, sample_index):
        per_condition = self.config.samples_per_condition
        condition = self._conditions[(sample_index // per_condition) % len(self._conditions)]
        current_input = self.input_for(sample_index)
        return Sample(
            sample_index,
            condition,
            current_input,
            correct_action(condition, current_input),
            tuple(self.encode_input(current_input)),
        )

    def samples(self):
        """Endless cyclic schedule of samples."""
        k = 0
        while True:
            yield self.sample(k)
            k += 1

    def feedback_rates(self, action, correct):
        """Reward high when the current action is correct; penalty high otherwise (no action included)."""
        high, low = self.rate_range.high_hz, self.rate_range.low_hz
        if action is not None and action == correct:
            return (high, low)
        return (low, high)


class FoodForagingEnvironment(MutableEnvironment):
    """
    Black or white food; the edible set cycles black, white, none, both.

    Inputs 0 and 1 one-hot code the colour (black = high/low); output 0 is
    "eat", output 1 "avoid". Colours alternate from sample to sample,
    starting with a random colour.
    """

    task_id = TASK_FOOD_FORAGING
    n_data_inputs = 2

    def base_conditions(self):
        return FOOD_CONDITION_ORDER

    def _setup_inputs(self, rng):
        self._phase = int(rng.integers(2))

    def input_for(self, sample_index):
        return FOOD_COLORS[(self._phase + sample_index) % 2]

    def encode_input(self, current_input):
        return binary_to_rates(1 if current_input == BLACK else 0, self.rate_range)

    def input_label(self, current_input):
        return current_input

    @property
    def input_order(self):
        return ORDER_SEPARATOR.join((FOOD_COLORS[self._phase], FOOD_COLORS[1 - self._phase]))


class LogicGateEnvironment(MutableEnvironment):
    """
    Two input bits; the active gate cycles through the training gates, or the
    shuffled test gates in test mode.

    Inputs 0-1 one-hot code bit A, inputs 2-3 bit B; output k means "the gate
    outputs k". The four bit pairs are shown in one random order, repeated.
    """

    task_id = TASK_LOGIC_GATE
    n_data_inputs = 4

    def base_conditions(self):
        return TEST_GATES if self.mode == MODE_TEST else TRAINING_GATES

    def _setup_inputs(self, rng):
        self._input_order = [GATE_INPUTS[k] for k in rng.permutation(len(GATE_INPUTS))]

    def input_for(self, sample_index):
        return self._input_order[sample_index % len(self._input_order)]

    def encode_input(self, current_input):
        a, b = current_input
        return binary_to_rates(a, self.rate_range) + binary_to_rates(b, self.rate_range)

    def input_label(self, current_input):
        return f"{current_input[0]}{current_input[1]}"

    @property
    def input_order(self):
        return ORDER_SEPARATOR.join(self.input_label(i) for i in self._input_order)


ENVIRONMENTS = {
    TASK_FOOD_FORAGING: FoodForagingEnvironment,
    TASK_LOGIC_GATE: LogicGateEnvironment,
}


def check_interface(net, n_inputs, n_outputs, task_id):
    if net.n_inputs != n_inputs or net.n_outputs != n_outputs:
        raise ConfigurationError(
            f"Task {task_id} expects {n_inputs} inputs and {n_outputs} outputs, "
            f"network has {net.n_inputs} and {net.n_outputs}"
        )


def run_lifetime(net, env, model=DamageModel(), dt_ms=0.1, trace_every=None):
    """
    Simulate one agent lifetime in a binary environment.

    Each step the data channels carry the current sample, the reward channel
    fires high if the current action is correct and the penalty channel
    otherwise. The action is decoded from the actuator window after the
    network step and the step's damage is taken from the correct and
    incorrect output counts. The lifetime ends when health reaches 0 or the
    agent has lived L_max steps.

    Args:
        net: A Network, or any agent with n_inputs, n_outputs,
            step(input_spikes, clock) and output_counts().
        env (MutableEnvironment): Task instance for this lifetime.
        model (DamageModel): Damage values; `initial_health` None derives H
            from one full condition cycle.
        dt_ms (float): Simulation step.
        trace_every (int, optional): Record the actuator counts every this
            many steps in `actuator_trace`.

    Returns:
        LifetimeReport

    Raises:
        ConfigurationError: If the network does not match the task interface.
    """
    check_interface(net, env.n_inputs, env.n_outputs, env.task_id)

    health = model.initial_health if model.initial_health is not None else env.default_initial_health(model)
    l_min, l_max = lifetime_bounds(health, model)

    clock = SimClock(0, dt_ms)
    encoder = SpikeEncoder(env.n_inputs, dt_ms, reset_on_change=True)
    decoder = ActionDecoder()
    sample_steps = env.config.sample_steps

    steps = 0
    correct_steps = 0
    eos_correct = 0
    completed = 0
    trace = []
    actuator_trace = []
    condition_steps = []
    action = None
    alive = True

    for sample in env.samples():
        encoder.restart()
        label = env.condition_label(sample.condition)
        sample_correct = 0
        counts = (0, 0)
        k = 0
        while k < sample_steps:
            feedback = env.feedback_rates(action, sample.correct_action)
            encoder.set_rates(sample.data_rates + feedback)
            net.step(encoder.step(), clock)

            counts = tuple(net.output_counts())
            action = decoder.decode(counts)
            s_c = counts[sample.correct_action]
            s_i = sum(counts) - s_c
            health -= damage(s_c, s_i, model)

            steps += 1
            k += 1
            if trace_every and steps % trace_every == 0:
                actuator_trace.append(ActuatorSample(steps, label, counts))
            if action == sample.correct_action:
                correct_steps += 1
                sample_correct += 1
            if health <= 0 or steps >= l_max:
                alive = False
                break

        done = k == sample_steps
        if done:
            completed += 1
            if action == sample.correct_action:
                eos_correct += 1

        if sample.index % env.config.samples_per_condition == 0:
            condition_steps.append([label, 0])
        condition_steps[-1][1] += k

        trace.append(
            SampleTrace(
                sample_index=sample.index,
                condition=label,
                input=env.input_label(sample.input),
                correct_action=sample.correct_action,
                eos_action=action if done else None,
                accuracy=sample_correct / k if k else 0.0,
                counts=counts,
                completed=done,
            )
        )
        if not alive:
            break

    survived = min(l_max, max(l_min, steps))
    return LifetimeReport(
        survived_steps=survived,
        fitness=fitness_from_lifetime(survived, l_min, l_max),
        accuracy=correct_steps / steps if steps else 0.0,
        eos_accuracy=eos_correct / completed if completed else 0.0,
        l_min=l_min,
        l_max=l_max,
        input_order=env.input_order,
        environment_order=env.environment_order,
        trace=trace,
        condition_steps=[tuple(c) for c in condition_steps],
        actuator_trace=actuator_trace,
    )
