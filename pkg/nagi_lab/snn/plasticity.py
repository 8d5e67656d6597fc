"""
Spike-timing-dependent plasticity.

Four rule kinds are supported, each parameterized by four values:

    asymmetric_hebbian       A+ e^(-dt/tau+) for dt > 0, -A- e^(dt/tau-) for dt < 0
    asymmetric_anti_hebbian  the negation of the above
    symmetric_hebbian        A+ g(dt) where g > 0, A- g(dt) where g < 0
    symmetric_anti_hebbian   the negation of the above

with dt = t_out - t_in in milliseconds and g a difference of Gaussians.
Weight changes are paired all-to-all inside the STDP window (inclusive),
clamped to [w_min, w_max] and then budget-normalized.
"""

import math
from dataclasses import dataclass
from enum import Enum
from itertools import chain

import numpy as np

from nagi_lab.snn.budget import W_MAX, W_MIN, WEIGHT_BUDGET, clamp_weights, normalize_weight_budget

# ============================================
# Parameter Ranges
# ============================================

ASYMMETRIC_RANGES = {
    "a_plus": (0.1, 1.0),
    "a_minus": (0.1, 1.0),
    "shape_plus": (1.0, 10.0),  # tau+
    "shape_minus": (1.0, 10.0),  # tau-
}

SYMMETRIC_RANGES = {
    "a_plus": (1.0, 10.6),
    "a_minus": (1.0, 44.0),
    "shape_plus": (3.5, 10.0),  # sigma+
    "shape_minus": (13.5, 20.0),  # sigma-
}

PARAMETER_NAMES = ("a_plus", "a_minus", "shape_plus", "shape_minus")

STDP_HALF_WIDTH_MS = 40.0
# Float slack when comparing spike-time differences against the window edge
WINDOW_EPSILON = 1e-9

SQRT_2PI = math.sqrt(2 * math.pi)


class RuleKind(str, Enum):
    ASYMMETRIC_HEBBIAN = "asymmetric_hebbian"
    ASYMMETRIC_ANTI_HEBBIAN = "asymmetric_anti_hebbian"
    SYMMETRIC_HEBBIAN = "symmetric_hebbian"
    SYMMETRIC_ANTI_HEBBIAN = "symmetric_anti_hebbian"

    @property
    def is_symmetric(self):
        return self in (RuleKind.SYMMETRIC_HEBBIAN, RuleKind.SYMMETRIC_ANTI_HEBBIAN)

    @property
    def is_hebbian(self):
        return self in (RuleKind.ASYMMETRIC_HEBBIAN, RuleKind.SYMMETRIC_HEBBIAN)

    @classmethod
    def from_family(cls, symmetric, hebbian):
        if symmetric:
            return cls.SYMMETRIC_HEBBIAN if hebbian else cls.SYMMETRIC_ANTI_HEBBIAN
        return cls.ASYMMETRIC_HEBBIAN if hebbian else cls.ASYMMETRIC_ANTI_HEBBIAN


def parameter_ranges(kind):
    return SYMMETRIC_RANGES if RuleKind(kind).is_symmetric else ASYMMETRIC_RANGES


@dataclass(frozen=True)
class LearningRule:
    kind: RuleKind
    a_plus: float
    a_minus: float
    shape_plus: float
    shape_minus: float

    def parameters(self):
        return (self.a_plus, self.a_minus, self.shape_plus, self.shape_minus)

    def with_parameters(self, values):
        return LearningRule(self.kind, *values)


@dataclass(frozen=True)
class StdpWindow:
    half_width_ms: float = STDP_HALF_WIDTH_MS

    def __post_init__(self):
        if self.half_width_ms <= 0:
            raise ValueError(f"STDP half width must be positive, got {self.half_width_ms}")

    def contains(self, dt_r):
        return np.abs(dt_r) <= self.half_width_ms + WINDOW_EPSILON

    def lag_steps(self, dt_ms):
        """Largest step lag whose timing difference still lies inside the window."""
        return int(math.floor(self.half_width_ms / dt_ms + WINDOW_EPSILON))


class SpikeEventKind(str, Enum):
    INPUT_SPIKE = "input_spike"
    OUTPUT_SPIKE = "output_spike"


@dataclass(frozen=True)
class SpikeEvent:
    """A new spike at `time_ms`. Input events name the synapse they arrived on."""

    kind: SpikeEventKind
    time_ms: float
    synapse_index: int | None = None


def relative_timing(t_out_ms, t_in_ms):
    return t_out_ms - t_in_ms


def dog(dt_r, sigma_plus, sigma_minus):
    """Difference of Gaussians; even in dt_r and vanishing in the tails."""
    x = np.asarray(dt_r, dtype=float)
    g = np.exp(-0.5 * (x / sigma_plus) ** 2) / (sigma_plus * SQRT_2PI) - np.exp(
        -0.5 * (x / sigma_minus) ** 2
    ) / (sigma_minus * SQRT_2PI)
    return g if g.ndim else float(g)


def stdp_kernel(rule, dt_r):
    """
    Weight change of `rule` for every timing difference in `dt_r`.

    Args:
        rule (LearningRule): Rule of the postsynaptic neuron.
        dt_r (array_like): t_out - t_in in milliseconds; the caller filters the window.

    Returns:
        numpy.ndarray: Signed weight changes, same shape as `dt_r`.
    """
    dt_r = np.asarray(dt_r, dtype=float)
    kind = rule.kind
    if kind.is_symmetric:
        g = dog(dt_r, rule.shape_plus, rule.shape_minus)
        change = np.where(g > 0, rule.a_plus * g, np.where(g < 0, rule.a_minus * g, 0.0))
    else:
        distance = np.abs(dt_r)
        change = np.where(
            dt_r > 0,
            rule.a_plus * np.exp(-distance / rule.shape_plus),
            np.where(dt_r < 0, -rule.a_minus * np.exp(-distance / rule.shape_minus), 0.0),
        )
    return change if kind.is_hebbian else -change


def delta_w(rule, dt_r):
    """Weight change for a single (t_in, t_out) pair under `rule`."""
    return float(stdp_kernel(rule, dt_r))


def apply_stdp(
    synapse_weights,
    event,
    input_spike_times,
    output_spike_times,
    rule,
    budget=WEIGHT_BUDGET,
    window=StdpWindow(),
    w_min=W_MIN,
    w_max=W_MAX,
):
    """
    Update the incoming weights of one neuron for a new spike event.

    An output spike pairs with every stored input spike of every incoming
    synapse; an input spike on synapse k pairs with every stored output spike.
    Pairs outside the window are ignored. Weights are clamped first and then
    normalized to the budget.

    Args:
        synapse_weights (list[float]): Incoming weights, one per synapse.
        event (SpikeEvent): The new spike.
        input_spike_times (list[Sequence[float]]): Presynaptic spike times per synapse (ms).
        output_spike_times (Sequence[float]): The neuron's own spike times (ms).
        rule (LearningRule): The neuron's learning rule.
        budget (float): Incoming weight budget.
        window (StdpWindow): Pairing window.

    Returns:
        list[float]: Updated weights.
    """
    weights = np.array(synapse_weights, dtype=float)

    if event.kind == SpikeEventKind.OUTPUT_SPIKE:
        lengths = [len(times) for times in input_spike_times]
        times = np.fromiter(chain.from_iterable(input_spike_times), dtype=float, count=sum(lengths))
        owners = np.repeat(np.arange(len(lengths)), lengths)
        dt_r = relative_timing(event.time_ms, times)
    else:
        times = np.fromiter(output_spike_times, dtype=float)
        owners = np.full(times.shape, event.synapse_index, dtype=int)
        dt_r = relative_timing(times, event.time_ms)

    paired = window.contains(dt_r)
    if not paired.any():
        return weights.tolist()

    np.add.at(weights, owners[paired], stdp_kernel(rule, dt_r[paired]))
    return normalize_weight_budget(clamp_weights(weights, w_min, w_max), budget).tolist()


def sample_rule(kind, rng):
    """
    Draw a rule of `kind` with every parameter uniform within its range.

    Args:
        kind (RuleKind | str): Rule kind.
        rng (numpy.random.Generator): Random source.
    """
    kind = RuleKind(kind)
    ranges = parameter_ranges(kind)
    values = [float(rng.uniform(*ranges[name])) for name in PARAMETER_NAMES]
    return LearningRule(kind, *values)
