import unittest

import numpy as np

from nagi_lab.tasks.encoding import (
    ANGLE_RECEPTORS,
    STATE_RECEPTORS,
    ActionDecoder,
    RateRange,
    SpikeEncoder,
    binary_to_rates,
    decode_action,
    gaussian_rate,
    gaussian_receptor,
    observation_to_rates,
    period_steps,
    rate_to_spike_train,
    scale_observation,
    sigmoid_rate,
    sigmoid_receptor,
)


def count_encoder_spikes(encoder, n_steps):
    totals = None
    for _ in range(n_steps):
        spikes = encoder.step()
        totals = [int(s) for s in spikes] if totals is None else [t + int(s) for t, s in zip(totals, spikes)]
    return totals


class TestRateCoding(unittest.TestCase):
    def test_binary_rates(self):
        self.assertEqual(binary_to_rates(1), (50.0, 5.0))
        self.assertEqual(binary_to_rates(0), (5.0, 50.0))
        self.assertEqual(binary_to_rates(1, RateRange(10.0, 20.0)), (20.0, 10.0))
        with self.assertRaises(ValueError):
            binary_to_rates(2)

    def test_rate_range_validation(self):
        with self.assertRaises(ValueError):
            RateRange(50.0, 5.0)

    def test_periods(self):
        self.assertEqual(period_steps(50, 0.1), 200)
        self.assertEqual(period_steps(5, 0.1), 2000)
        self.assertIsNone(period_steps(0, 0.1))
        with self.assertRaises(ValueError):
            period_steps(-1, 0.1)

    def test_regular_train(self):
        self.assertEqual(list(rate_to_spike_train(50, 0.1, 1000)), [0, 200, 400, 600, 800])
        self.assertEqual(list(rate_to_spike_train(0, 0.1, 1000)), [])

    def test_encoder_calibration(self):
        encoder = SpikeEncoder(3, 0.1)
        encoder.set_rates([50.0, 5.0, 0.0])
        self.assertEqual(count_encoder_spikes(encoder, 10_000), [50, 5, 0])

    def test_restart_fires_next_step(self):
        encoder = SpikeEncoder(1, 0.1)
        encoder.set_rates([5.0])
        self.assertEqual(encoder.step(), [True])
        self.assertEqual(encoder.step(), [False])
        encoder.restart()
        self.assertEqual(encoder.step(), [True])

    def test_rate_change_without_reset(self):
        encoder = SpikeEncoder(1, 0.1, reset_on_change=False)
        encoder.set_rates([5.0])
        encoder.step()
        for _ in range(99):
            encoder.step()
        encoder.set_rates([50.0])
        fired = [encoder.step()[0] for _ in range(200)]
        # The 50 Hz period counts from the last 5 Hz spike
        self.assertEqual(fired.index(True), 100)

    def test_rate_change_with_reset(self):
        encoder = SpikeEncoder(1, 0.1)
        encoder.set_rates([5.0])
        for _ in range(100):
            encoder.step()
        encoder.set_rates([50.0])
        self.assertEqual(encoder.step(), [True])

    def test_encoder_replays_regular_train(self):
        encoder = SpikeEncoder(2, 0.1)
        encoder.set_rates([50.0, 13.0])
        fired = [encoder.step() for _ in range(3000)]
        for k, rate in enumerate((50.0, 13.0)):
            steps = [t for t, spikes in enumerate(fired) if spikes[k]]
            self.assertEqual(steps, list(rate_to_spike_train(rate, 0.1, 3000)))

    def test_silent_gap_without_reset(self):
        encoder = SpikeEncoder(1, 0.1, reset_on_change=False)
        encoder.set_rates([50.0])
        encoder.step()
        encoder.set_rates([0.0])
        self.assertFalse(any(encoder.step()[0] for _ in range(49)))
        encoder.set_rates([50.0])
        fired = [encoder.step()[0] for _ in range(300)]
        # Counted from the spike before the gap
        self.assertEqual(fired.index(True), 150)

    def test_rate_count_mismatch(self):
        with self.assertRaises(ValueError):
            SpikeEncoder(2).set_rates([5.0])


class TestReceptors(unittest.TestCase):
    def test_sigmoid_example(self):
        self.assertAlmostEqual(sigmoid_rate(0.0, sigmoid_receptor(-2.5, -0.6)), 13.24, delta=0.05)

    def test_gaussian_peak(self):
        self.assertAlmostEqual(gaussian_rate(0.0, gaussian_receptor(0.0, 0.4)), 50.0)
        self.assertLess(gaussian_rate(1.0, gaussian_receptor(0.0, 0.4)), 50.0)

    def test_kind_checks(self):
        with self.assertRaises(ValueError):
            sigmoid_rate(0.0, gaussian_receptor(0.0, 0.4))
        with self.assertRaises(ValueError):
            gaussian_rate(0.0, sigmoid_receptor(1.0, 0.0))

    def test_outer_receptors_mirror(self):
        low, _, high = STATE_RECEPTORS
        for x in np.linspace(-2, 2, 41):
            self.assertAlmostEqual(sigmoid_rate(float(x), low), sigmoid_rate(float(-x), high), places=12)
        low, _, high = ANGLE_RECEPTORS
        for x in np.linspace(-0.2, 0.2, 41):
            self.assertAlmostEqual(sigmoid_rate(float(x), low), sigmoid_rate(float(-x), high), places=12)

    def test_zero_observation(self):
        rates = observation_to_rates((0.0, 0.0, 0.0, 0.0))
        self.assertEqual(len(rates), 12)
        for start in (0, 3, 9):
            low, mid, high = rates[start : start + 3]
            self.assertAlmostEqual(low, 13.24, delta=0.05)
            self.assertAlmostEqual(mid, 50.0)
            self.assertAlmostEqual(high, 13.24, delta=0.05)
        self.assertAlmostEqual(rates[7], 50.0)
        self.assertAlmostEqual(rates[6], rates[8])

    def test_rates_within_range(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            obs = rng.uniform([-3, -5, -0.5, -5], [3, 5, 0.5, 5])
            for rate in observation_to_rates(tuple(float(v) for v in obs)):
                self.assertGreaterEqual(rate, 5.0)
                self.assertLessEqual(rate, 50.0)

    def test_scaling(self):
        self.assertEqual(scale_observation((2.4, 3.0, 0.1, -5.0)), (1.0, 1.0, 0.1, -1.0))
        with self.assertRaises(ValueError):
            observation_to_rates((0.0, 0.0, 0.0))


class TestDecoding(unittest.TestCase):
    def test_strict_leader(self):
        self.assertEqual(decode_action([3, 1]), 0)
        self.assertEqual(decode_action([1, 4]), 1)

    def test_ties_keep_previous_leader(self):
        self.assertIsNone(decode_action([2, 2]))
        self.assertIsNone(decode_action([0, 0]))
        self.assertEqual(decode_action([2, 2], 1), 1)

    def test_decoder_memory(self):
        decoder = ActionDecoder()
        self.assertIsNone(decoder.decode([0, 0]))
        self.assertEqual(decoder.decode([1, 0]), 0)
        self.assertEqual(decoder.decode([1, 1]), 0)
        self.assertEqual(decoder.decode([1, 2]), 1)
        self.assertEqual(decoder.decode([3, 3]), 1)

    def test_needs_two_outputs(self):
        with self.assertRaises(ValueError):
            decode_action([1])
