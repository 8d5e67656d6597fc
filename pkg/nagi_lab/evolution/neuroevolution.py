"""
Generational loop: evaluation, speciation, elitism, selection and reproduction.

Each generation every genome lives once with freshly drawn weights and a
fresh environment order. The top `elitism_fraction` of the population is
copied unchanged into the next generation; the rest are offspring of
tournament-selected parents within species, with offspring quotas
proportional to the species' mean fitness.
"""

import math
import time
from dataclasses import dataclass, field

from nagi_lab.config import SpeciationConfig
from nagi_lab.evolution.evaluation import (
    STREAM_INITIAL,
    STREAM_REPRODUCTION,
    derive_rng,
    evaluate_genome,
    evaluate_population,
)
from nagi_lab.evolution.genome import InnovationRegistry, compatibility_distance, crossover, init_genome, mutate
from nagi_lab.harness.serialization import genome_from_dict, genome_to_dict
from nagi_lab.tasks.registry import METRIC_ACCURACY, METRIC_EOS_ACCURACY, METRIC_FITNESS, get_task
from nagi_lab.utils.logger import logger

DEFAULT_SPECIATION = SpeciationConfig()


# ============================================
# Statistics
# ============================================


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    fitness_min: float
    fitness_mean: float
    fitness_max: float
    acc_min: float | None
    acc_mean: float | None
    acc_max: float | None
    eos_min: float | None
    eos_mean: float | None
    eos_max: float | None
    species_count: int
    best_genome_id: int


def _summary(values):
    if not values or any(v is None for v in values):
        return (None, None, None)
    mean = sum(values) / len(values)
    low, high = min(values), max(values)
    # Rounding may put the mean a hair outside [min, max]
    return (low, min(high, max(low, mean)), high)


def generation_stats(generation, population, results, species_count):
    fitnesses = [r.fitness for r in results]
    best = max(range(len(results)), key=lambda k: (fitnesses[k], -k))
    return GenerationStats(
        generation,
        *_summary(fitnesses),
        *_summary([r.accuracy for r in results]),
        *_summary([r.eos_accuracy for r in results]),
        species_count,
        population[best].key,
    )


# ============================================
# Champion Archive
# ============================================


@dataclass
class ArchiveEntry:
    genome: object
    generation: int
    fitness: float
    accuracy: float | None
    eos_accuracy: float | None

    def to_dict(self):
        return {
            "genome": genome_to_dict(self.genome),
            "generation": self.generation,
            "fitness": self.fitness,
            "accuracy": self.accuracy,
            "eos_accuracy": self.eos_accuracy,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            genome_from_dict(data["genome"]),
            data["generation"],
            data["fitness"],
            data["accuracy"],
            data["eos_accuracy"],
        )


class ChampionArchive:
    """Best-ever genome per metric, by recorded single-lifetime value."""

    def __init__(self, metrics=(METRIC_FITNESS,)):
        self.metrics = tuple(metrics)
        self.best = {}

    def update(self, population, results, generation):
        for metric in self.metrics:
            scored = [(getattr(r, metric), k) for k, r in enumerate(results) if getattr(r, metric) is not None]
            if not scored:
                continue
            value, k = max(scored, key=lambda x: (x[0], -x[1]))
            current = self.best.get(metric)
            if current is None or value > getattr(current, metric):
                r = results[k]
                self.best[metric] = ArchiveEntry(population[k], generation, r.fitness, r.accuracy, r.eos_accuracy)

    def to_dict(self):
        return {"metrics": list(self.metrics), "best": {m: e.to_dict() for m, e in sorted(self.best.items())}}

    @classmethod
    def from_dict(cls, data):
        archive = cls(data["metrics"])
        archive.best = {m: ArchiveEntry.from_dict(e) for m, e in data["best"].items()}
        return archive


# ============================================
# Speciation
# ============================================


@dataclass
class Species:
    key: int
    representative: object
    members: list = field(default_factory=list)
    best_fitness: float = -math.inf
    last_improved: int = 0

    def mean_fitness(self):
        return sum(g.fitness for g in self.members) / len(self.members)

    def to_dict(self):
        return {
            "key": self.key,
            "representative": genome_to_dict(self.representative),
            "best_fitness": None if self.best_fitness == -math.inf else self.best_fitness,
            "last_improved": self.last_improved,
        }

    @classmethod
    def from_dict(cls, data):
        best = data["best_fitness"]
        return cls(
            data["key"],
            genome_from_dict(data["representative"]),
            [],
            -math.inf if best is None else best,
            data["last_improved"],
        )


def speciate(population, threshold, coefficients=DEFAULT_SPECIATION, previous_species=(), next_species_key=0, generation=0):
    """
    Partition a population into species.

    Each genome joins the first species whose representative lies within
    `threshold` (inclusive); otherwise it founds a new species and becomes
    its representative. Species of the previous generation keep their key,
    representative and stagnation record; species left without members
    disappear.

    Returns:
        tuple: (list[Species], next_species_key)
    """
    species = [Species(s.key, s.representative, [], s.best_fitness, s.last_improved) for s in previous_species]
    for g in population:
        for s in species:
            if compatibility_distance(s.representative, g, coefficients) <= threshold:
                s.members.append(g)
                break
        else:
            species.append(Species(next_species_key, g, [g], -math.inf, generation))
            next_species_key += 1

    return [s for s in species if s.members], next_species_key


def update_stagnation(species, generation):
    for s in species:
        best = max(g.fitness for g in s.members)
        if best > s.best_fitness:
            s.best_fitness = best
            s.last_improved = generation


def cull_stagnant(species, generation, stagnation_limit):
    """Drop species without improvement for `stagnation_limit` generations, except the one holding the best genome."""
    best_species = max(species, key=lambda s: max(g.fitness for g in s.members))
    return [s for s in species if s is best_species or generation - s.last_improved < stagnation_limit]


# ============================================
# Selection
# ============================================


def species_quotas(means, total):
    """
    Split `total` offspring proportionally to non-negative species means.

    Largest-remainder rounding; equal shares when every mean is 0. The result
    always sums to `total`.
    """
    if not means:
        return []
    weights = [max(0.0, m) for m in means]
    weight_sum = sum(weights)
    if weight_sum <= 0:
        weights = [1.0] * len(means)
        weight_sum = float(len(means))

    raw = [total * w / weight_sum for w in weights]
    quotas = [int(math.floor(r)) for r in raw]
    leftover = total - sum(quotas)
    order = sorted(range(len(raw)), key=lambda k: (-(raw[k] - quotas[k]), k))
    for k in order[:leftover]:
        quotas[k] += 1
    return quotas


def tournament(members, rng, size=3):
    """Fittest of `size` members drawn with replacement (first drawn wins ties)."""
    draws = rng.integers(len(members), size=size)
    best = members[int(draws[0])]
    for k in draws[1:]:
        if members[int(k)].fitness > best.fitness:
            best = members[int(k)]
    return best


def select_parents(species, n_offspring, rng, tournament_size=3):
    """
    Parent pairs for the offspring of a generation.

    Args:
        species (list[Species]): Non-empty species with evaluated members.
        n_offspring (int): Offspring to produce in total.
        rng (numpy.random.Generator): Random source.
        tournament_size (int): Tournament size within a species.

    Returns:
        list[tuple]: (species_key, parent_a, parent_b); a single-member
        species pairs its member with itself.
    """
    quotas = species_quotas([s.mean_fitness() for s in species], n_offspring)
    pairs = []
    for s, quota in zip(species, quotas):
        for _ in range(quota):
            if len(s.members) == 1:
                pairs.append((s.key, s.members[0], s.members[0]))
                continue
            a = tournament(s.members, rng, tournament_size)
            b = tournament(s.members, rng, tournament_size)
            pairs.append((s.key, a, b))
    return pairs


def select_elites(population, species, elite_count, per_species=False):
    ranked = sorted(population, key=lambda g: (-g.fitness, g.key))
    if not per_species:
        return ranked[:elite_count]

    elites = []
    for s in sorted(species, key=lambda s: (-max(g.fitness for g in s.members), s.key)):
        if len(elites) == elite_count:
            break
        elites.append(min(s.members, key=lambda g: (-g.fitness, g.key)))
    chosen = {g.key for g in elites}
    elites.extend([g for g in ranked if g.key not in chosen][: elite_count - len(elites)])
    return elites


def reproduce(population, species, config, registry, rng, next_genome_key, generation):
    """
    Build the next generation.

    Returns:
        tuple: (population, next_genome_key, species); the species carry
        freshly sampled representatives for the next speciation.
    """
    species = cull_stagnant(species, generation, config.speciation.stagnation_limit)
    elites = select_elites(population, species, config.elite_count, config.per_species_elitism)

    children = []
    for _, a, b in select_parents(species, config.population_size - len(elites), rng, config.tournament_size):
        if a is b:
            child = a
        else:
            child = crossover(a, b, a.fitness, b.fitness, rng, key=next_genome_key)
        children.append(mutate(child, registry, rng, config.genome, key=next_genome_key))
        next_genome_key += 1

    for s in species:
        s.representative = s.members[int(rng.integers(len(s.members)))]
        s.members = []

    return elites + children, next_genome_key, species


# ============================================
# Evolution
# ============================================


@dataclass
class EvolutionState:
    generation: int
    population: list
    species: list
    registry: InnovationRegistry
    next_genome_key: int
    next_species_key: int
    archive: ChampionArchive

    def to_dict(self):
        return {
            "generation": self.generation,
            "population": [genome_to_dict(g) for g in self.population],
            "species": [s.to_dict() for s in self.species],
            "registry": self.registry.to_dict(),
            "next_genome_key": self.next_genome_key,
            "next_species_key": self.next_species_key,
            "archive": self.archive.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            data["generation"],
            [genome_from_dict(g) for g in data["population"]],
            [Species.from_dict(s) for s in data["species"]],
            InnovationRegistry.from_dict(data["registry"]),
            data["next_genome_key"],
            data["next_species_key"],
            ChampionArchive.from_dict(data["archive"]),
        )


def initial_state(config):
    task = get_task(config.task)
    population = [
        init_genome(task.n_inputs, task.n_outputs, derive_rng(config.master_seed, STREAM_INITIAL, 0, k), config.genome, key=k)
        for k in range(config.population_size)
    ]
    metrics = (METRIC_FITNESS, METRIC_ACCURACY, METRIC_EOS_ACCURACY) if task.has_accuracy else (METRIC_FITNESS,)
    return EvolutionState(
        generation=0,
        population=population,
        species=[],
        registry=InnovationRegistry(task.n_inputs, task.n_outputs),
        next_genome_key=config.population_size,
        next_species_key=0,
        archive=ChampionArchive(metrics),
    )


def evolve(config, evaluator=evaluate_genome, run=None, state=None):
    """
    Run the generational loop up to `config.generations`.

    Args:
        config (EvolutionConfig): Resolved configuration.
        evaluator (callable): (genome, config, seed_key) -> report with
            fitness, accuracy, eos_accuracy and survived_steps. Must be a
            module-level function when `config.workers` > 1.
        run (RunDirectory, optional): Receives stats rows and checkpoints.
        state (EvolutionState, optional): Resume point.

    Returns:
        tuple: (list[GenerationStats], ChampionArchive)
    """
    log = logger("evolution")
    state = state or initial_state(config)
    history = []

    for generation in range(state.generation, config.generations):
        start = time.perf_counter()

        results = evaluate_population(state.population, config, generation, evaluator)
        population = [g.with_fitness(r.fitness) for g, r in zip(state.population, results)]

        species, state.next_species_key = speciate(
            population,
            config.speciation.threshold,
            config.speciation,
            state.species,
            state.next_species_key,
            generation,
        )
        update_stagnation(species, generation)

        stats = generation_stats(generation, population, results, len(species))
        history.append(stats)
        state.archive.update(population, results, generation)
        if run is not None:
            run.append_stats(stats)

        rng = derive_rng(config.master_seed, STREAM_REPRODUCTION, generation)
        state.population, state.next_genome_key, state.species = reproduce(
            population, species, config, state.registry, rng, state.next_genome_key, generation
        )
        state.registry.reset_generation()
        state.generation = generation + 1

        if run is not None and (state.generation % config.checkpoint_every == 0 or state.generation == config.generations):
            run.write_checkpoint(state)

        log.info(
            f"Generation {generation} completed in {time.perf_counter() - start:.3f}s: "
            f"max fitness {stats.fitness_max:.4f}, {stats.species_count} species"
        )

    return history, state.archive
