import unittest
from dataclasses import dataclass

import numpy as np

from nagi_lab.config.loader import build_config
from nagi_lab.evolution.evaluation import EvaluationResult, derive_rng, evaluate_genome, evaluate_population
from nagi_lab.evolution.genome import init_genome
from nagi_lab.evolution.neuroevolution import (
    ChampionArchive,
    EvolutionState,
    Species,
    cull_stagnant,
    evolve,
    generation_stats,
    initial_state,
    reproduce,
    select_elites,
    select_parents,
    speciate,
    species_quotas,
)
from nagi_lab.tasks.registry import METRIC_ACCURACY, METRIC_FITNESS


@dataclass(frozen=True)
class StubReport:
    fitness: float
    accuracy: float | None
    eos_accuracy: float | None
    survived_steps: int


def constant_evaluator(genome, config, seed_key):
    return StubReport(0.5, 0.5, 0.5, 100)


def random_evaluator(genome, config, seed_key):
    rng = derive_rng(*seed_key)
    value = float(rng.random()) * len(genome.enabled_connections()) / 20
    return StubReport(value, float(rng.random()), float(rng.random()), int(rng.integers(1000)))


def tiny_config(**overrides):
    return build_config("food-foraging", "desk", {"population_size": 10, "generations": 3, **overrides})


def evaluated_population(n, fitnesses=None, seed=0):
    rng = np.random.default_rng(seed)
    fitnesses = fitnesses or [0.5] * n
    return [init_genome(4, 2, rng, key=k).with_fitness(f) for k, f in zip(range(n), fitnesses)]


class TestSpeciation(unittest.TestCase):
    def test_clones_share_a_species(self):
        g = evaluated_population(1)[0]
        species, next_key = speciate([g] * 8, 3.0)
        self.assertEqual(len(species), 1)
        self.assertEqual(len(species[0].members), 8)
        self.assertEqual(next_key, 1)

    def test_zero_threshold_separates_distinct_genomes(self):
        population = evaluated_population(5)
        species, _ = speciate([*population, population[0]], 0.0)
        self.assertEqual(len(species), 5)
        self.assertEqual(len(species[0].members), 2)

    def test_previous_species_keep_keys(self):
        population = evaluated_population(4)
        first, next_key = speciate(population, 0.0, next_species_key=10)
        second, _ = speciate(population, 0.0, previous_species=first, next_species_key=next_key)
        self.assertEqual([s.key for s in second], [s.key for s in first])

    def test_empty_species_disappear(self):
        population = evaluated_population(3)
        first, next_key = speciate(population, 0.0)
        second, _ = speciate(population[:1], 0.0, previous_species=first, next_species_key=next_key)
        self.assertEqual([s.key for s in second], [first[0].key])

    def test_stagnant_species_culled_except_best(self):
        population = evaluated_population(3, [0.1, 0.9, 0.5])
        species = [Species(k, g, [g], g.fitness, 0) for k, g in enumerate(population)]
        kept = cull_stagnant(species, 25, 20)
        self.assertEqual([s.key for s in kept], [1])


class TestSelection(unittest.TestCase):
    def test_quotas_sum_to_total(self):
        self.assertEqual(species_quotas([1.0, 1.0, 2.0], 10), [3, 2, 5])
        self.assertEqual(species_quotas([0.0, 0.0], 5), [3, 2])
        self.assertEqual(species_quotas([-1.0, 3.0], 4), [0, 4])
        self.assertEqual(species_quotas([], 4), [])
        rng = np.random.default_rng(0)
        for _ in range(100):
            means = list(rng.random(int(rng.integers(1, 8))))
            total = int(rng.integers(0, 200))
            self.assertEqual(sum(species_quotas(means, total)), total)

    def test_single_member_species_pairs_with_itself(self):
        g = evaluated_population(1)[0]
        pairs = select_parents([Species(4, g, [g])], 6, np.random.default_rng(0))
        self.assertEqual(len(pairs), 6)
        for key, a, b in pairs:
            self.assertEqual(key, 4)
            self.assertIs(a, g)
            self.assertIs(b, g)

    def test_elites_are_fittest(self):
        population = evaluated_population(5, [0.1, 0.9, 0.5, 0.9, 0.3])
        species, _ = speciate(population, 0.0)
        self.assertEqual([g.key for g in select_elites(population, species, 2)], [1, 3])

    def test_per_species_elites(self):
        population = evaluated_population(4, [0.9, 0.8, 0.7, 0.1])
        species = [
            Species(0, population[0], population[:2]),
            Species(1, population[2], population[2:]),
        ]
        elites = select_elites(population, species, 3, per_species=True)
        self.assertEqual([g.key for g in elites], [0, 2, 1])

    def test_elites_survive_unchanged(self):
        config = tiny_config()
        population = evaluated_population(10)
        species, _ = speciate(population, config.speciation.threshold)
        state = initial_state(config)
        children, next_key, _ = reproduce(
            population, species, config, state.registry, np.random.default_rng(1), 10, 0
        )
        self.assertEqual(len(children), 10)
        self.assertEqual(config.elite_count, 1)
        self.assertIs(children[0], population[0])
        self.assertEqual(next_key, 19)
        self.assertEqual([g.key for g in children[1:]], list(range(10, 19)))


class TestStatistics(unittest.TestCase):
    def test_summary_ordering(self):
        population = evaluated_population(4)
        results = [
            EvaluationResult(k, f, a, a, 100) for k, (f, a) in enumerate([(0.2, 0.5), (0.8, 0.25), (0.8, 1.0), (0.4, 0.0)])
        ]
        stats = generation_stats(7, population, results, 2)
        self.assertEqual(stats.generation, 7)
        self.assertEqual((stats.fitness_min, stats.fitness_max), (0.2, 0.8))
        self.assertLessEqual(stats.fitness_min, stats.fitness_mean)
        self.assertLessEqual(stats.fitness_mean, stats.fitness_max)
        self.assertAlmostEqual(stats.acc_mean, 0.4375)
        self.assertEqual(stats.best_genome_id, population[1].key)
        self.assertEqual(stats.species_count, 2)

    def test_missing_accuracy(self):
        population = evaluated_population(2)
        results = [EvaluationResult(k, 0.5, None, None, 10) for k in range(2)]
        stats = generation_stats(0, population, results, 1)
        self.assertIsNone(stats.acc_mean)
        self.assertIsNone(stats.eos_max)

    def test_archive_keeps_strict_improvement(self):
        archive = ChampionArchive((METRIC_FITNESS, METRIC_ACCURACY))
        population = evaluated_population(2)
        archive.update(population, [EvaluationResult(0, 0.5, 0.7, 0.7, 1), EvaluationResult(1, 0.6, 0.2, 0.2, 1)], 0)
        archive.update(population, [EvaluationResult(0, 0.6, 0.7, 0.7, 1), EvaluationResult(1, 0.1, 0.1, 0.1, 1)], 1)
        self.assertEqual(archive.best[METRIC_FITNESS].generation, 0)
        self.assertIs(archive.best[METRIC_FITNESS].genome, population[1])
        self.assertEqual(archive.best[METRIC_ACCURACY].generation, 0)
        self.assertIs(archive.best[METRIC_ACCURACY].genome, population[0])


class TestEvaluation(unittest.TestCase):
    config = build_config(
        "food-foraging", "desk", {"population_size": 4, "binary": {"sample_steps": 50, "samples_per_condition": 1}}
    )

    def test_same_key_same_lifetime(self):
        g = init_genome(4, 2, np.random.default_rng(0))
        a = evaluate_genome(g, self.config, (0, 0, 0, 1))
        b = evaluate_genome(g, self.config, (0, 0, 0, 1))
        self.assertEqual((a.fitness, a.accuracy, a.survived_steps), (b.fitness, b.accuracy, b.survived_steps))
        self.assertEqual(a.input_order, b.input_order)
        self.assertGreaterEqual(a.fitness, 0.0)
        self.assertLessEqual(a.fitness, 1.0)
        self.assertLessEqual(a.survived_steps, a.l_max)

    def test_population_results_in_order(self):
        population = [init_genome(4, 2, np.random.default_rng(k), key=k) for k in range(4)]
        results = evaluate_population(population, self.config, 0)
        self.assertEqual([r.index for r in results], [0, 1, 2, 3])
        single = evaluate_genome(population[2], self.config, (0, 0, 0, 2))
        self.assertEqual(results[2].fitness, single.fitness)


class TestEvolve(unittest.TestCase):
    def test_constant_fitness_runs(self):
        config = tiny_config()
        history, archive = evolve(config, evaluator=constant_evaluator)
        self.assertEqual([s.generation for s in history], [0, 1, 2])
        for stats in history:
            self.assertEqual(stats.fitness_mean, 0.5)
        self.assertEqual(archive.best[METRIC_FITNESS].generation, 0)

    def test_same_seed_same_history(self):
        config = tiny_config(generations=5)
        first, _ = evolve(config, evaluator=random_evaluator)
        second, _ = evolve(config, evaluator=random_evaluator)
        self.assertEqual(first, second)

    def test_resume_matches_uninterrupted_run(self):
        config = tiny_config(generations=4)
        full, _ = evolve(config, evaluator=random_evaluator)
        checkpoints = []

        class Recorder:
            def append_stats(self, stats):
                pass

            def write_checkpoint(self, state):
                checkpoints.append(state.to_dict())

        head, _ = evolve(tiny_config(generations=2, checkpoint_every=1), evaluator=random_evaluator, run=Recorder())
        self.assertEqual(head, full[:2])
        self.assertEqual(len(checkpoints), 2)
        state = EvolutionState.from_dict(checkpoints[-1])
        tail, _ = evolve(config, evaluator=random_evaluator, state=state)
        self.assertEqual(tail, full[2:])
