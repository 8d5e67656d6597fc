"""
Conversion between task values and spike trains.

Binary data is one-hot rate coded: a bit drives two input neurons, one at the
high and one at the low rate. Real-valued cart-pole observations drive three
receptor neurons each (two sigmoids and a Gaussian). Trains are regular, not
Poisson: a channel at rate r spikes every round(1000 / r / dt) steps.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

from nagi_lab.config import CartPoleConfig

# ============================================
# Rate Constants
# ============================================

LOW_RATE_HZ = 5.0
HIGH_RATE_HZ = 50.0

# Receptor span and floor: outputs cover [RECEPTOR_FLOOR_HZ, RECEPTOR_FLOOR_HZ + RECEPTOR_SPAN_HZ]
RECEPTOR_SPAN_HZ = 45.0
RECEPTOR_FLOOR_HZ = 5.0

NO_ACTION = None


@dataclass(frozen=True)
class RateRange:
    low_hz: float = LOW_RATE_HZ
    high_hz: float = HIGH_RATE_HZ

    def __post_init__(self):
        if not 0 < self.low_hz < self.high_hz:
            raise ValueError(f"Need 0 < low_hz < high_hz, got {self.low_hz} and {self.high_hz}")


class ReceptorKind(str, Enum):
    SIGMOID = "sigmoid"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class ReceptorParams:
    kind: ReceptorKind
    omega: float = 0.0
    z: float = 0.0
    mu: float = 0.0
    sigma: float = 1.0
    h: float = RECEPTOR_SPAN_HZ
    l: float = RECEPTOR_FLOOR_HZ


def sigmoid_receptor(omega, z):
    return ReceptorParams(ReceptorKind.SIGMOID, omega=omega, z=z)


def gaussian_receptor(mu, sigma):
    return ReceptorParams(ReceptorKind.GAUSSIAN, mu=mu, sigma=sigma)


# Cart position, cart velocity and pole angular velocity
STATE_RECEPTORS = (
    sigmoid_receptor(-2.5, -0.6),
    gaussian_receptor(0.0, 0.4),
    sigmoid_receptor(2.5, 0.6),
)

# Pole angle, in radians
ANGLE_RECEPTORS = (
    sigmoid_receptor(-60.0, -0.05),
    gaussian_receptor(0.0, 0.05),
    sigmoid_receptor(60.0, 0.05),
)


def binary_to_rates(bit, rate_range=RateRange()):
    """1 -> (high, low), 0 -> (low, high)."""
    if bit not in (0, 1):
        raise ValueError(f"Expected a bit, got {bit!r}")
    if bit:
        return (rate_range.high_hz, rate_range.low_hz)
    return (rate_range.low_hz, rate_range.high_hz)


def period_steps(rate_hz, dt_ms):
    """Inter-spike interval in whole steps, or None for a silent channel."""
    if rate_hz < 0:
        raise ValueError(f"Rate must be non-negative, got {rate_hz}")
    if rate_hz == 0:
        return None
    return max(1, round(1000.0 / rate_hz / dt_ms))


def rate_to_spike_train(rate_hz, dt_ms=0.1, n_steps=None):
    """
    Yield the step indices at which a regular train at `rate_hz` spikes.

    The first spike is at step 0. Without `n_steps` the generator is endless
    (except for rate 0, which yields nothing).

    Example:
        >>> list(rate_to_spike_train(50, 0.1, 1000))  # [0, 200, 400, 600, 800]
    """
    period = period_steps(rate_hz, dt_ms)
    if period is None:
        return
    step = 0
    while n_steps is None or step < n_steps:
        yield step
        step += period


class SpikeEncoder:
    """
    Regular spike generators for a bank of input channels.

    Every channel replays a `rate_to_spike_train` shifted to the step where it
    starts. A restarted channel spikes on its next step. With `reset_on_change`
    a new rate restarts the channel; otherwise the channel spikes once the
    steps since its last spike reach the new period.
    """

    def __init__(self, n_channels, dt_ms=0.1, reset_on_change=True):
        self.dt_ms = dt_ms
        self.reset_on_change = reset_on_change
        self._step = 0
        self._rates = [0.0] * n_channels
        self._trains = [iter(())] * n_channels
        self._next = [None] * n_channels
        self._last = [None] * n_channels

    @property
    def rates(self):
        return list(self._rates)

    def restart(self):
        self._last = [None] * len(self._rates)
        for k in range(len(self._rates)):
            self._start(k, self._step)

    def set_rates(self, rates):
        if len(rates) != len(self._rates):
            raise ValueError(f"Expected {len(self._rates)} rates, got {len(rates)}")
        for k, rate in enumerate(rates):
            if rate == self._rates[k]:
                continue
            self._rates[k] = rate
            start = self._step
            period = period_steps(rate, self.dt_ms)
            if self.reset_on_change:
                self._last[k] = None
            elif self._last[k] is not None and period is not None:
                start = max(start, self._last[k] + period)
            self._start(k, start)

    def _start(self, k, start):
        self._trains[k] = (start + s for s in rate_to_spike_train(self._rates[k], self.dt_ms))
        self._next[k] = next(self._trains[k], None)

    def step(self):
        spikes = []
        for k, due in enumerate(self._next):
            spiked = due == self._step
            if spiked:
                self._last[k] = self._step
                self._next[k] = next(self._trains[k], None)
            spikes.append(spiked)
        self._step += 1
        return spikes


# ============================================
# Receptors
# ============================================


def _logistic(t):
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def sigmoid_rate(x, p):
    """h / (1 + e^(-omega (x - z))) + l"""
    if p.kind != ReceptorKind.SIGMOID:
        raise ValueError(f"Expected a sigmoid receptor, got {p.kind}")
    return p.h * _logistic(p.omega * (x - p.z)) + p.l


def gaussian_rate(x, p):
    """h e^(-(x - mu)^2 / (2 sigma^2)) + l"""
    if p.kind != ReceptorKind.GAUSSIAN:
        raise ValueError(f"Expected a Gaussian receptor, got {p.kind}")
    return p.h * math.exp(-((x - p.mu) ** 2) / (2 * p.sigma**2)) + p.l


def receptor_rate(x, p):
    if p.kind == ReceptorKind.SIGMOID:
        return sigmoid_rate(x, p)
    return gaussian_rate(x, p)


def scale_observation(obs, config=CartPoleConfig()):
    """Position / position_scale; velocities clipped to +-velocity_clip then divided by it; angle raw."""
    x, x_dot, theta, theta_dot = obs
    clip = config.velocity_clip
    return (
        x / config.position_scale,
        max(-clip, min(clip, x_dot)) / clip,
        theta,
        max(-clip, min(clip, theta_dot)) / clip,
    )


def observation_to_rates(obs, config=CartPoleConfig()):
    """
    Encode (x, x_dot, theta, theta_dot) into 12 firing rates.

    Returns:
        list[float]: Three receptor rates per observation component, in
        component order; every rate lies in [low_rate_hz, high_rate_hz].
    """
    if len(obs) != 4:
        raise ValueError(f"Expected 4 observation values, got {len(obs)}")

    scaled = scale_observation(obs, config)
    span = config.high_rate_hz - config.low_rate_hz
    receptors = (STATE_RECEPTORS, STATE_RECEPTORS, ANGLE_RECEPTORS, STATE_RECEPTORS)
    rates = []
    for value, triple in zip(scaled, receptors):
        rates.extend(receptor_rate(value, replace(p, h=span, l=config.low_rate_hz)) for p in triple)
    return rates


# ============================================
# Action Decoding
# ============================================


def strict_leader(counts):
    """Index of the unique maximum count, or None on a tie."""
    best = max(counts)
    leaders = [k for k, c in enumerate(counts) if c == best]
    return leaders[0] if len(leaders) == 1 else None


def decode_action(counts, previous_leader=NO_ACTION):
    """
    Action for the current actuator window spike counts.

    The output with the strictly highest count wins; on a tie the output that
    last held a strict lead keeps the action. Before any strict lead there is
    no action (None).
    """
    if len(counts) < 2:
        raise ValueError(f"Need at least two outputs, got {len(counts)}")
    leader = strict_leader(counts)
    return previous_leader if leader is None else leader


class ActionDecoder:
    """Tie memory for one lifetime."""

    def __init__(self):
        self.leader = NO_ACTION

    def decode(self, counts):
        self.leader = decode_action(counts, self.leader)
        return self.leader
