"""
Discrete-time spiking network with simplified leaky integrate-and-fire neurons.

Each step every hidden and output neuron integrates

    v <- v + sum(sign_i * w_i * x_i) - k_m * v  (+ bias current)

and fires when v exceeds min(v_th* + theta, sum of incoming weights). Firing
resets v to 0 and raises theta, which decays by k_theta per step.

A Network keeps its state in arrays: potentials and thresholds per neuron, a
weight matrix with one row per presynaptic neuron (inputs first) and one
column per hidden/output neuron, and a spike raster covering the STDP window.
Updates are two-phase: input spikes of the current step and hidden/output
spikes of the previous step are read first, then every neuron is committed at
once, so no neuron order exists to depend on.
"""

from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from nagi_lab.config import SimulationConfig
from nagi_lab.exceptions import ConfigurationError, DevelopmentError, TopologyMismatchError
from nagi_lab.snn.budget import clamp_weights, normalize_weight_budget
from nagi_lab.snn.plasticity import LearningRule, StdpWindow, stdp_kernel

DEFAULT_SIMULATION = SimulationConfig()
V_REST = 0.0


class Neurotransmitter(str, Enum):
    EXCITATORY = "excitatory"
    INHIBITORY = "inhibitory"

    @property
    def sign(self):
        return 1.0 if self is Neurotransmitter.EXCITATORY else -1.0


@dataclass
class SimClock:
    step_index: int = 0
    dt_ms: float = 0.1

    def __post_init__(self):
        if self.dt_ms <= 0:
            raise ValueError(f"dt_ms must be positive, got {self.dt_ms}")

    @property
    def now_ms(self):
        return self.step_index * self.dt_ms

    def tick(self):
        self.step_index += 1


@dataclass
class NeuronState:
    membrane_v: float = V_REST
    theta: float = 0.0
    resting_threshold: float = 1.0
    bias_enabled: bool = False
    neurotransmitter: Neurotransmitter = Neurotransmitter.EXCITATORY
    rule: LearningRule | None = None


@dataclass
class Synapse:
    pre_id: int
    post_id: int
    weight: float


def effective_threshold(n, incoming_weight_sum):
    """Homeostatic threshold: min(v_th* + theta, sum of incoming weights)."""
    return min(n.resting_threshold + n.theta, incoming_weight_sum)


def integrate_and_fire(
    v, theta, weighted_input, resting_threshold, bias_enabled, incoming_weight_sum, config
):
    """
    One step of the neuron equation over arrays of neurons.

    theta decays first; a spike in this step adds its increment afterwards.

    Returns:
        tuple: (v, theta, spiked) as new arrays.
    """
    v = v + weighted_input - config.membrane_decay_per_step * v + config.bias_current * bias_enabled
    theta = theta * (1.0 - config.theta_decay_per_step)
    spiked = v > np.minimum(resting_threshold + theta, incoming_weight_sum)
    v = np.where(spiked, V_REST, v)
    theta = np.where(spiked, theta + config.theta_increment, theta)
    return v, theta, spiked


def step_neuron(n, weighted_input, dt_ms, incoming_weight_sum, config=DEFAULT_SIMULATION):
    """
    Advance one neuron by one step, in place.

    Args:
        n (NeuronState): Neuron to update.
        weighted_input (float): Signed sum of arriving spikes times their weights.
        dt_ms (float): Step length; the decay constants are already per step.
        incoming_weight_sum (float): Sum of the neuron's incoming weights.
        config (SimulationConfig): Decay constants, bias current and theta increment.

    Returns:
        tuple: (n, spiked)
    """
    if dt_ms <= 0:
        raise ValueError(f"dt_ms must be positive, got {dt_ms}")

    v, theta, spiked = integrate_and_fire(
        n.membrane_v, n.theta, weighted_input, n.resting_threshold, n.bias_enabled, incoming_weight_sum, config
    )
    n.membrane_v = float(v)
    n.theta = float(theta)
    return n, bool(spiked)


def window_steps(window_ms, dt_ms):
    return max(1, int(round(window_ms / dt_ms)))


class SpikeTrainWindow:
    """Trailing window of output spike steps, one ring per output neuron."""

    def __init__(self, output_ids, window_ms=250.0, dt_ms=0.1):
        self.window_steps = window_steps(window_ms, dt_ms)
        self.now_step = 0
        self._spikes = {oid: deque() for oid in output_ids}

    @property
    def output_ids(self):
        return list(self._spikes)

    def advance(self, step):
        self.now_step = step
        horizon = step - self.window_steps
        for ring in self._spikes.values():
            while ring and ring[0] <= horizon:
                ring.popleft()

    def record(self, output_id, step):
        self._spikes[output_id].append(step)

    def count(self, output_id):
        horizon = self.now_step - self.window_steps
        return sum(1 for s in self._spikes[output_id] if s > horizon)

    def counts(self):
        return [self.count(oid) for oid in self._spikes]

    def clear(self):
        for ring in self._spikes.values():
            ring.clear()

    def __contains__(self, output_id):
        return output_id in self._spikes


def count_spikes(window, output_id):
    """
    Number of spikes of an output neuron inside the trailing actuator window.

    Raises:
        TopologyMismatchError: If `output_id` is not an output of the window.
    """
    if output_id not in window:
        raise TopologyMismatchError(
            f"Neuron {output_id} is not an output neuron (outputs: {window.output_ids})"
        )
    return window.count(output_id)


class Network:
    """
    A developed spiking network.

    Input neurons are spike generators and carry no state. Hidden and output
    neurons are built from NeuronState values and synapses from Synapse
    values; both are copied into arrays on construction.
    """

    def __init__(self, input_ids, output_ids, hidden_ids, neurons, synapses, config=DEFAULT_SIMULATION):
        self.input_ids = list(input_ids)
        self.output_ids = list(output_ids)
        self.hidden_ids = list(hidden_ids)
        self.state_ids = sorted(self.output_ids + self.hidden_ids)
        self.config = config
        self.weight_budget = config.weight_budget
        self.stdp_window = StdpWindow(config.stdp_window_ms)
        self.window = SpikeTrainWindow(self.output_ids, config.actuator_window_ms, config.dt_ms)

        synapses = list(synapses)
        self._validate(neurons, synapses)

        n_in = len(self.input_ids)
        self._row = {nid: k for k, nid in enumerate(self.input_ids + self.state_ids)}
        self._col = {nid: k for k, nid in enumerate(self.state_ids)}
        self._output_cols = np.array([self._col[oid] for oid in self.output_ids], dtype=int)
        n_rows, n_cols = len(self._row), len(self.state_ids)

        states = [neurons[nid] for nid in self.state_ids]
        self.v = np.array([s.membrane_v for s in states], dtype=float)
        self.theta = np.array([s.theta for s in states], dtype=float)
        self.resting_threshold = np.array([s.resting_threshold for s in states], dtype=float)
        self.bias_enabled = np.array([s.bias_enabled for s in states], dtype=bool)
        self.sign = np.ones(n_rows)
        self.sign[n_in:] = [s.neurotransmitter.sign for s in states]
        self.rules = [s.rule for s in states]

        self.pairs = [(syn.pre_id, syn.post_id) for syn in synapses]
        self._syn_rows = np.array([self._row[pre] for pre, _ in self.pairs], dtype=int)
        self._syn_cols = np.array([self._col[post] for _, post in self.pairs], dtype=int)
        self.weights = np.zeros((n_rows, n_cols))
        self.weights[self._syn_rows, self._syn_cols] = [syn.weight for syn in synapses]
        self.connected = np.zeros((n_rows, n_cols), dtype=bool)
        self.connected[self._syn_rows, self._syn_cols] = True

        # Column j, lag l: change for a pair l steps apart under neuron j's rule
        self.max_lag = self.stdp_window.lag_steps(config.dt_ms)
        lags_ms = np.arange(self.max_lag + 1) * config.dt_ms
        self._causal_kernel = np.zeros((self.max_lag + 1, n_cols))
        self._acausal_kernel = np.zeros((self.max_lag + 1, n_cols))
        for col, rule in enumerate(self.rules):
            if rule is not None:
                self._causal_kernel[:, col] = stdp_kernel(rule, lags_ms)
                self._acausal_kernel[:, col] = stdp_kernel(rule, -lags_ms)

        # Ring buffer over the STDP window; row r holds the spikes of step _raster_steps[r]
        self._raster = np.zeros((self.max_lag + 1, n_rows), dtype=bool)
        self._raster_steps = np.full(self.max_lag + 1, -1, dtype=np.int64)
        self._previous = np.zeros(n_rows, dtype=bool)

    def _validate(self, neurons, synapses):
        missing = [nid for nid in self.state_ids if nid not in neurons]
        if missing:
            raise DevelopmentError(f"No neuron state for ids {missing}")

        for nid in self.input_ids + self.output_ids:
            if nid in neurons and neurons[nid].neurotransmitter != Neurotransmitter.EXCITATORY:
                raise DevelopmentError(f"Input and output neurons must be excitatory (neuron {nid})")

        inputs = set(self.input_ids)
        known = inputs | set(self.state_ids)
        seen = set()
        for syn in synapses:
            pair = (syn.pre_id, syn.post_id)
            if syn.pre_id not in known or syn.post_id not in known:
                raise DevelopmentError(f"Synapse {pair} references an unknown neuron")
            if syn.post_id in inputs:
                raise DevelopmentError(f"Synapse {pair} targets input neuron {syn.post_id}")
            if pair in seen:
                raise DevelopmentError(f"Duplicate synapse {pair}")
            seen.add(pair)

    @property
    def n_inputs(self):
        return len(self.input_ids)

    @property
    def n_outputs(self):
        return len(self.output_ids)

    @property
    def synapses(self):
        """Current synapses, in construction order."""
        values = self.weights[self._syn_rows, self._syn_cols]
        return [Synapse(pre, post, float(w)) for (pre, post), w in zip(self.pairs, values)]

    def incoming_weights(self, neuron_id):
        col = self._col[neuron_id]
        return self.weights[self.connected[:, col], col].tolist()

    def potential(self, neuron_id):
        return float(self.v[self._col[neuron_id]])

    def theta_of(self, neuron_id):
        return float(self.theta[self._col[neuron_id]])

    def step(self, input_spikes, clock):
        """
        Advance the network by one step and tick the clock.

        Args:
            input_spikes (Sequence[bool]): One flag per input neuron.
            clock (SimClock): Current time; ticked after the step.

        Returns:
            list[bool]: One flag per output neuron.
        """
        if len(input_spikes) != len(self.input_ids):
            raise ConfigurationError(
                f"Expected {len(self.input_ids)} input spike flags, got {len(input_spikes)}"
            )

        n_in = len(self.input_ids)
        step = clock.step_index

        # Phase 1: read current input spikes and previous-step internal spikes
        active = self._previous.copy()
        active[:n_in] = np.asarray(input_spikes, dtype=bool)
        drive = (active * self.sign) @ self.weights

        # Phase 2: commit every neuron
        self.v, self.theta, spiked = integrate_and_fire(
            self.v,
            self.theta,
            drive,
            self.resting_threshold,
            self.bias_enabled,
            self.weights.sum(axis=0),
            self.config,
        )

        fired = np.zeros_like(active)
        fired[:n_in] = active[:n_in]
        fired[n_in:] = spiked
        self._learn(fired, spiked, step)
        self._previous = fired.copy()
        self._previous[:n_in] = False

        self.window.advance(step)
        outputs = spiked[self._output_cols]
        for oid, out in zip(self.output_ids, outputs):
            if out:
                self.window.record(oid, step)

        clock.tick()
        return outputs.tolist()

    def _history(self, step):
        """Spike raster indexed by lag (row 0 is `step`), rows outside the ring masked out."""
        lags = np.arange(self.max_lag + 1)
        rows = (step - lags) % (self.max_lag + 1)
        valid = self._raster_steps[rows] == step - lags
        return self._raster[rows] & valid[:, None]

    def _learn(self, fired, post_fired, step):
        """
        STDP for every spike of this step.

        Presynaptic events pair with postsynaptic spikes of earlier steps;
        postsynaptic events pair with presynaptic spikes up to and including
        this step. Each batch is clamped and budget-normalized once.
        """
        slot = step % (self.max_lag + 1)
        self._raster[slot] = fired
        self._raster_steps[slot] = step
        if not fired.any():
            return

        n_in = len(self.input_ids)
        history = self._history(step).astype(float)

        earlier = history[1:, n_in:]
        touched = self.connected & fired[:, None] & earlier.any(axis=0)[None, :]
        if touched.any():
            per_post = np.einsum("lj,lj->j", earlier, self._acausal_kernel[1:])
            self.weights += np.where(touched, per_post[None, :], 0.0)
            self._settle(touched.any(axis=0))

        if post_fired.any():
            cols = np.flatnonzero(post_fired)
            touched = self.connected[:, cols] & history.any(axis=0)[:, None]
            if touched.any():
                change = history.T @ self._causal_kernel[:, cols]
                self.weights[:, cols] += np.where(touched, change, 0.0)
                settled = np.zeros(len(self.state_ids), dtype=bool)
                settled[cols[touched.any(axis=0)]] = True
                self._settle(settled)

    def _settle(self, cols):
        """Clamp then budget-normalize the incoming weights of the selected neurons."""
        block = clamp_weights(self.weights[:, cols], self.config.w_min, self.config.w_max)
        block = normalize_weight_budget(block * self.connected[:, cols], self.weight_budget)
        self.weights[:, cols] = block

    def normalize_budgets(self):
        """Apply the weight budget to every neuron (used after development)."""
        self.weights = normalize_weight_budget(self.weights, self.weight_budget)

    def output_counts(self):
        return self.window.counts()


def step_network(net, input_spikes, clock):
    """Advance `net` by one step of `clock`; returns the output spike flags."""
    return net.step(input_spikes, clock)
