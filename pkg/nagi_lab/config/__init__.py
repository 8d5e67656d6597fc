"""
Configuration tree for simulations and evolution runs.

Defaults are the full-scale experiment values. Build configurations with
`nagi_lab.config.loader.build_config`, which overlays a profile and a JSON
document and validates the result.
"""

import math
from dataclasses import dataclass, field

from nagi_lab.config.profiles import PROFILE_PAPER, TASK_FOOD_FORAGING


@dataclass(frozen=True)
class SimulationConfig:
    dt_ms: float = 0.1
    # Per-step exponential decay constants
    membrane_decay_per_step: float = 0.01
    theta_decay_per_step: float = 0.01
    resting_threshold: float = 1.0
    theta_increment: float = 0.2
    bias_current: float = 0.001
    w_min: float = 0.0
    w_max: float = 1.0
    weight_budget: float = 5.0
    weight_init_mean: float = 1.0
    weight_init_std: float = 0.2
    stdp_window_ms: float = 40.0
    actuator_window_ms: float = 250.0


@dataclass(frozen=True)
class GenomeConfig:
    excitatory_probability: float = 0.7
    bias_probability: float = 0.2
    # Chance of the rule family matching the neurotransmitter
    # (Hebbian for excitatory, anti-Hebbian for inhibitory)
    matching_family_probability: float = 0.7
    symmetric_probability: float = 0.5
    neurotransmitter_mutation_rate: float = 0.1
    bias_mutation_rate: float = 0.1
    rule_mutation_rate: float = 0.1
    parameter_mutation_rate: float = 0.1
    parameter_reinit_rate: float = 0.02
    # m(p) = mutation_power * (p_max - p_min) is the perturbation variance
    mutation_power: float = 0.2
    add_connection_rate: float = 0.05
    add_node_rate: float = 0.03


@dataclass(frozen=True)
class SpeciationConfig:
    excess_coefficient: float = 1.0
    disjoint_coefficient: float = 1.0
    locus_coefficient: float = 0.4
    threshold: float = 3.0
    # Genomes with fewer connection genes than this are not size-normalized
    small_genome_size: int = 20
    stagnation_limit: int = 20


@dataclass(frozen=True)
class DamageConfig:
    d_correct: float = 1.0
    d_incorrect: float = 2.0
    s_target: int = 3


@dataclass(frozen=True)
class BinaryTaskConfig:
    sample_steps: int = 10_000
    samples_per_condition: int = 4
    # None derives H = d_correct * one full condition cycle
    initial_health: float | None = None
    low_rate_hz: float = 5.0
    high_rate_hz: float = 50.0
    shuffle_conditions: bool = False


@dataclass(frozen=True)
class CartPoleConfig:
    train_sizes: tuple = (0.5, 0.3, 0.7)
    test_sizes: tuple = (0.4, 0.6)
    train_repeats: int = 3
    test_repeats: int = 1
    max_iterations: int = 200
    success_iterations: int = 100
    network_steps_per_iteration: int = 500
    gravity: float = 9.8
    cart_mass: float = 1.0
    pole_mass: float = 0.1
    force_mag: float = 10.0
    tau: float = 0.02
    x_limit: float = 2.4
    theta_limit_rad: float = 12 * 2 * math.pi / 360
    reset_noise: float = 0.05
    # "fixed" keeps pole_mass for every size, "density" scales it with size / 0.5
    pole_mass_scaling: str = "fixed"
    position_scale: float = 2.4
    velocity_clip: float = 2.0
    low_rate_hz: float = 5.0
    high_rate_hz: float = 50.0


@dataclass(frozen=True)
class EvolutionConfig:
    task: str = TASK_FOOD_FORAGING
    profile: str = PROFILE_PAPER
    population_size: int = 100
    generations: int = 1000
    elitism_fraction: float = 0.10
    per_species_elitism: bool = False
    tournament_size: int = 3
    master_seed: int = 0
    workers: int = 1
    checkpoint_every: int = 50
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    genome: GenomeConfig = field(default_factory=GenomeConfig)
    speciation: SpeciationConfig = field(default_factory=SpeciationConfig)
    damage: DamageConfig = field(default_factory=DamageConfig)
    binary: BinaryTaskConfig = field(default_factory=BinaryTaskConfig)
    cartpole: CartPoleConfig = field(default_factory=CartPoleConfig)

    @property
    def elite_count(self):
        return int(self.population_size * self.elitism_fraction + 1e-9)
