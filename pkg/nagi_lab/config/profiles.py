"""
Task ids and run profiles.

`paper` uses the full population sizes, generation counts and sample lengths;
`desk` is the reduced profile used for acceptance runs that must finish in minutes.
"""

# ============================================
# Task Identifiers
# ============================================

TASK_FOOD_FORAGING = "food-foraging"
TASK_LOGIC_GATE = "logic-gate"
TASK_CART_POLE = "cart-pole"

TASK_IDS = (TASK_FOOD_FORAGING, TASK_LOGIC_GATE, TASK_CART_POLE)
BINARY_TASK_IDS = (TASK_FOOD_FORAGING, TASK_LOGIC_GATE)

PROFILE_PAPER = "paper"
PROFILE_DESK = "desk"
PROFILE_NAMES = (PROFILE_PAPER, PROFILE_DESK)

# ============================================
# Profile Overrides (applied over the dataclass defaults)
# ============================================

PROFILE_OVERRIDES = {
    PROFILE_PAPER: {
        TASK_FOOD_FORAGING: {
            "population_size": 100,
            "generations": 1000,
        },
        TASK_LOGIC_GATE: {
            "population_size": 100,
            "generations": 1000,
        },
        TASK_CART_POLE: {
            "population_size": 256,
            "generations": 500,
        },
    },
    PROFILE_DESK: {
        TASK_FOOD_FORAGING: {
            "population_size": 20,
            "generations": 30,
            "checkpoint_every": 10,
            "binary": {"sample_steps": 1000},
        },
        TASK_LOGIC_GATE: {
            "population_size": 30,
            "generations": 50,
            "checkpoint_every": 10,
            "binary": {"sample_steps": 1000},
        },
        TASK_CART_POLE: {
            "population_size": 64,
            "generations": 100,
            "checkpoint_every": 10,
            "simulation": {"actuator_window_ms": 100.0},
            "cartpole": {"network_steps_per_iteration": 250},
        },
    },
}
