"""
Weight bounds and the per-neuron incoming weight budget.

Both helpers accept one neuron's incoming weights as a vector or a whole
network as a matrix whose columns are postsynaptic neurons.
"""

import numpy as np

W_MIN = 0.0
W_MAX = 1.0
WEIGHT_BUDGET = 5.0


def normalize_weight_budget(weights, budget=WEIGHT_BUDGET):
    """
    Scale incoming weights down to the budget.

    Every column whose sum exceeds `budget` becomes w * budget / sum; the
    other columns are returned unchanged.

    Returns:
        numpy.ndarray: Weights with every column sum <= budget.

    Example:
        >>> normalize_weight_budget([2, 2, 2, 2, 2], 5)  # array([1., 1., 1., 1., 1.])
    """
    weights = np.asarray(weights, dtype=float)
    totals = weights.sum(axis=0)
    over = totals > budget
    scale = np.where(over, budget / np.where(over, totals, 1.0), 1.0)
    return weights * scale


def clamp_weights(weights, w_min=W_MIN, w_max=W_MAX):
    return np.clip(np.asarray(weights, dtype=float), w_min, w_max)
