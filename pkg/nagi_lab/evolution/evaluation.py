"""
Fitness evaluation fan-out.

Every (genome, seed key) pair is an independent job. Seeds are derived from
(master_seed, stream, generation, index) so serial and parallel evaluation
give identical results.
"""

import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from nagi_lab.evolution.genome import develop
from nagi_lab.exceptions import NagiError, TaskConstructionError
from nagi_lab.tasks.environments import MODE_TRAIN
from nagi_lab.tasks.registry import run_task_lifetime
from nagi_lab.utils.logger import log_error

# ============================================
# Random Streams
# ============================================

STREAM_EVALUATION = 0
STREAM_REPRODUCTION = 1
STREAM_INITIAL = 2
STREAM_TEST = 3

# Sub-streams of one evaluation
WEIGHTS = 0
LIFETIME = 1


def derive_rng(*keys):
    """Independent generator for a tuple of non-negative integer keys."""
    return np.random.default_rng([int(k) for k in keys])


@dataclass(frozen=True)
class EvaluationResult:
    index: int
    fitness: float
    accuracy: float | None
    eos_accuracy: float | None
    survived_steps: int


def evaluate_genome(genome, config, seed_key, mode=MODE_TRAIN, trace_every=None):
    """
    Develop `genome` with fresh weights and run one lifetime.

    Args:
        genome (Genome): Genome to evaluate.
        config (EvolutionConfig): Resolved configuration.
        seed_key (tuple[int]): Keys of this evaluation's random stream.
        mode (str): "train" or "test".
        trace_every (int, optional): Record actuator counts every this many steps.

    Returns:
        LifetimeReport
    """
    net = develop(genome, derive_rng(*seed_key, WEIGHTS), config.simulation)
    return run_task_lifetime(net, config, derive_rng(*seed_key, LIFETIME), mode, trace_every)


def _run_job(job):
    index, genome, config, seed_key, evaluator = job
    report = evaluator(genome, config, seed_key)
    return EvaluationResult(index, report.fitness, report.accuracy, report.eos_accuracy, report.survived_steps)


def evaluate_population(population, config, generation, evaluator=evaluate_genome):
    """
    Evaluate every genome of a generation, in population order.

    With `config.workers` > 1 the jobs run in a process pool; results are
    joined in index order either way.

    Returns:
        list[EvaluationResult]

    Raises:
        TaskConstructionError: If a lifetime fails with an unexpected error.
    """
    jobs = [
        (index, genome, config, (config.master_seed, STREAM_EVALUATION, generation, index), evaluator)
        for index, genome in enumerate(population)
    ]

    try:
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as executor:
                return list(executor.map(_run_job, jobs))
        return [_run_job(job) for job in jobs]
    except NagiError:
        raise
    except Exception as e:
        log_error(title=f"Evaluation failed in generation {generation}", message=traceback.format_exc())
        raise TaskConstructionError(f"Lifetime evaluation failed in generation {generation}: {e}") from e
