"""
NAGI Lab - Harness API

The four operations behind the command line. Each validates its arguments,
does its work through the evolution, task and harness packages, and returns
the paths it wrote. Errors are raised as NagiError subclasses; the command
layer turns them into messages and exit codes.

Usage:
    from nagi_lab.api.harness import cmd_evolve, cmd_test

    run_dir = cmd_evolve("food-foraging", profile="desk", seed=7)
    report = cmd_test(run_dir / "champions" / "eos_accuracy.json", n_sims=10)
"""

import dataclasses
import time
from pathlib import Path

from nagi_lab.api.validators import validate_positive_int, validate_profile, validate_seed, validate_simulation_count, validate_task
from nagi_lab.config.loader import build_config, config_from_dict, load_config_file
from nagi_lab.evolution.evaluation import STREAM_TEST, evaluate_genome
from nagi_lab.evolution.neuroevolution import EvolutionState, evolve
from nagi_lab.exceptions import ConfigurationError
from nagi_lab.harness.reports import (
    actuator_trace_path,
    export_curves,
    topology_dot,
    topology_json,
    write_actuator_trace,
    write_test_report,
)
from nagi_lab.harness.runs import RunDirectory
from nagi_lab.harness.serialization import load_champion
from nagi_lab.snn.spiking_core import window_steps
from nagi_lab.tasks.environments import MODE_TEST
from nagi_lab.tasks.registry import get_task
from nagi_lab.utils.logger import close_log_file, logger, set_log_file

DEFAULT_RUNS_DIR = "runs"
DEFAULT_TEST_SIMULATIONS = 10


def default_run_dir(task, profile, seed):
    return Path(DEFAULT_RUNS_DIR) / f"{task}-{profile}-seed{seed}"


def cmd_evolve(task=None, config_path=None, seed=None, out_dir=None, profile=None, resume=None, workers=None):
    """
    Evolve a population for a task and persist the run.

    Args:
        task (str): Task id; ignored when resuming.
        config_path (str, optional): JSON overrides applied over the profile.
        seed (int, optional): Master seed (default 0).
        out_dir (str, optional): Run directory (default runs/<task>-<profile>-seed<N>).
        profile (str, optional): "paper" (default) or "desk".
        resume (str, optional): Run directory to continue from its latest checkpoint.
        workers (int, optional): Evaluation processes; does not change results.

    Returns:
        Path: The run directory, holding manifest.json, stats.csv,
        checkpoints/ and champions/.

    Raises:
        ConfigValidationError: On an invalid argument or config key.
        RunDirectoryError: If `out_dir` already holds a run, or `resume` holds none.
    """
    state = None
    if resume:
        run = RunDirectory.open(resume)
        config = run.read_config()
        checkpoint = run.latest_checkpoint()
        if checkpoint is not None:
            state = EvolutionState.from_dict(checkpoint)
        run.truncate_stats(state.generation if state else 0)
    else:
        task = validate_task(task)
        profile = validate_profile(profile)
        seed = validate_seed(seed)
        overrides = load_config_file(config_path) if config_path else None
        config = build_config(task, profile, overrides, seed)
        run = RunDirectory.create(out_dir or default_run_dir(task, profile, seed), config)

    if workers is not None:
        config = dataclasses.replace(config, workers=validate_positive_int(workers, "workers"))

    set_log_file(run.path)
    log = logger("harness")
    try:
        start = time.perf_counter()
        first = state.generation if state else 0
        log.info(
            f"Evolving {config.task} ({config.profile}) from generation {first} to {config.generations}, "
            f"population {config.population_size}, seed {config.master_seed}"
        )
        _, archive = evolve(config, run=run, state=state)
        run.write_champions(archive, config)
        run.mark_finished()
        log.info(f"Run {run.path} completed in {time.perf_counter() - start:.3f}s")
    finally:
        close_log_file()

    return run.path


def champion_config(record):
    if record.config:
        return config_from_dict(record.config)
    return build_config(record.task, record.profile)


def cmd_test(champion_path, n_sims=DEFAULT_TEST_SIMULATIONS, seed=None, out=None):
    """
    Replay a champion in test mode.

    Every simulation develops the genome with fresh weights and draws new
    orders; the logic-gate task switches to the test gates and cart-pole to
    the test pole sizes. The actuator counts, sampled once per actuator
    window, go to `<report>_actuators.csv` next to the report.

    Args:
        champion_path (str): Champion JSON file.
        n_sims (int): Number of simulations (0 writes the header only).
        seed (int, optional): Seed of the simulations (default 0).
        out (str, optional): Report path (default <champion>_test_seed<N>.csv).

    Returns:
        Path: The report CSV.

    Raises:
        ChampionFormatError: If the champion cannot be read.
        ConfigurationError: If the genome does not fit the task's interface.
    """
    n_sims = validate_simulation_count(n_sims)
    seed = validate_seed(seed)
    champion_path = Path(champion_path)

    record = load_champion(champion_path)
    config = champion_config(record)
    task = get_task(record.task)
    genome = record.genome
    if (genome.n_inputs, genome.n_outputs) != (task.n_inputs, task.n_outputs):
        raise ConfigurationError(
            f"Task {task.task_id} expects {task.n_inputs} inputs and {task.n_outputs} outputs, "
            f"champion has {genome.n_inputs} and {genome.n_outputs}"
        )

    sim = config.simulation
    trace_every = window_steps(sim.actuator_window_ms, sim.dt_ms)
    reports = [
        evaluate_genome(genome, config, (seed, STREAM_TEST, 0, k), mode=MODE_TEST, trace_every=trace_every)
        for k in range(n_sims)
    ]

    out = Path(out) if out else champion_path.with_name(f"{champion_path.stem}_test_seed{seed}.csv")
    path = write_test_report(out, task.task_id, reports, config.cartpole.test_sizes)
    write_actuator_trace(actuator_trace_path(path), reports)
    logger("harness").info(f"Tested {champion_path} with {n_sims} simulations -> {path}")
    return path


def cmd_inspect(champion_path, out_dir=None):
    """
    Write the champion topology as a JSON document and a Graphviz DOT file.

    Returns:
        tuple: (json_path, dot_path)
    """
    champion_path = Path(champion_path)
    record = load_champion(champion_path)
    out_dir = Path(out_dir) if out_dir else champion_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)

    json_path = out_dir / f"{champion_path.stem}_topology.json"
    dot_path = out_dir / f"{champion_path.stem}_topology.dot"
    json_path.write_text(topology_json(record.genome), encoding="utf-8")
    dot_path.write_text(topology_dot(record.genome), encoding="utf-8")
    return json_path, dot_path


def cmd_export_curves(run_dir, out_dir=None):
    """
    Export min/mean/max curves per metric from a run's stats.csv.

    Returns:
        list[Path]: One CSV per metric with values.

    Raises:
        RunDirectoryError: If the run has no stats.
    """
    return export_curves(RunDirectory(run_dir), out_dir)
