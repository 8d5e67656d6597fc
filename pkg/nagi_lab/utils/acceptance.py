"""
Acceptance Runner - desk-scale evolution runs with champion test simulations

Evolves one run per master seed, tests the run's champion and reports
whether any seed meets the task's acceptance threshold:

    food-foraging  EOS accuracy >= 0.85 averaged over the test simulations
    logic-gate     test-gate accuracy >= 0.70 averaged over the test simulations
    cart-pole      more than 100 balanced iterations on every test pole size
                   in at least half of the test simulations

Usage:
    # All seeds for one task
    nagi-lab acceptance food-foraging --seeds 5

    # From a bench
    bench execute nagi_lab.utils.acceptance.run_acceptance --kwargs "{'task': 'logic-gate'}"
"""

import csv
import json
import time
from pathlib import Path

from nagi_lab.api.harness import cmd_evolve, cmd_test
from nagi_lab.api.validators import validate_positive_int, validate_simulation_count, validate_task
from nagi_lab.config.profiles import PROFILE_DESK, TASK_CART_POLE, TASK_FOOD_FORAGING, TASK_LOGIC_GATE
from nagi_lab.harness.reports import AVERAGE_LABEL, size_label
from nagi_lab.harness.runs import RunDirectory
from nagi_lab.tasks.cartpole import is_successful
from nagi_lab.tasks.registry import get_task

# ============================================
# Acceptance Thresholds
# ============================================

ACCEPTANCE_OVERRIDES = {
    TASK_FOOD_FORAGING: {"population_size": 50, "generations": 100},
    TASK_LOGIC_GATE: {},
    TASK_CART_POLE: {"population_size": 64, "generations": 100},
}

FOOD_MIN_EOS_ACCURACY = 0.85
GATE_MIN_ACCURACY = 0.70
CARTPOLE_MIN_SUCCESS_SHARE = 0.5


def _report_rows(path):
    with Path(path).open(newline="", encoding="utf-8") as f:
        return [row for row in csv.DictReader(f) if row["sim"] != AVERAGE_LABEL]


def _mean(values):
    return sum(values) / len(values) if values else 0.0


def score_report(task, report_path, config):
    """
    Returns:
        tuple: (score, passed) for one champion's test report.
    """
    rows = _report_rows(report_path)
    if task == TASK_FOOD_FORAGING:
        score = _mean([float(r["eos_accuracy"]) for r in rows])
        return score, score >= FOOD_MIN_EOS_ACCURACY
    if task == TASK_LOGIC_GATE:
        score = _mean([float(r["accuracy"]) for r in rows])
        return score, score >= GATE_MIN_ACCURACY

    columns = [f"steps_{size_label(s)}" for s in config.cartpole.test_sizes]
    successes = sum(
        1 for r in rows if all(r[c] != "" and is_successful(float(r[c]), config.cartpole) for c in columns)
    )
    score = successes / len(rows) if rows else 0.0
    return score, score >= CARTPOLE_MIN_SUCCESS_SHARE


def run_acceptance(task, seeds=5, n_sims=10, out_root=None):
    """
    Run the acceptance check for one task.

    Args:
        task (str): Task id.
        seeds (int): Master seeds 0..seeds-1.
        n_sims (int): Test simulations per champion.
        out_root (str, optional): Parent of the run directories (default runs/acceptance).

    Returns:
        bool: True if at least one seed passed.
    """
    task = validate_task(task)
    seeds = validate_positive_int(seeds, "seeds")
    n_sims = validate_simulation_count(n_sims)
    out_root = Path(out_root or "runs/acceptance")
    out_root.mkdir(parents=True, exist_ok=True)

    overrides_path = out_root / f"{task}-overrides.json"
    overrides_path.write_text(json.dumps(ACCEPTANCE_OVERRIDES[task], indent=1, sort_keys=True), encoding="utf-8")
    metric = get_task(task).champion_metrics[0]

    print("\n" + "=" * 70)
    print(f"ACCEPTANCE: {task.upper()} ({seeds} seeds, {n_sims} test simulations)")
    print("=" * 70 + "\n")

    passed_seeds = []
    for seed in range(seeds):
        start = time.perf_counter()
        run_dir = out_root / f"{task}-seed{seed}"
        if (run_dir / "manifest.json").exists():
            run_dir = cmd_evolve(resume=run_dir)
        else:
            run_dir = cmd_evolve(task, str(overrides_path), seed, run_dir, PROFILE_DESK)

        run = RunDirectory.open(run_dir)
        config = run.read_config()
        report = cmd_test(run.champion_path(metric), n_sims, seed)
        score, passed = score_report(task, report, config)
        if passed:
            passed_seeds.append(seed)

        mark = "✓" if passed else "✗"
        print(f"{mark} seed {seed}: {metric} champion scored {score:.3f} ({time.perf_counter() - start:.1f}s)")

    print("\n" + "=" * 70)
    if passed_seeds:
        print(f"✅ PASSED with seeds {passed_seeds}")
    else:
        print("❌ FAILED: no seed met the threshold")
    print("=" * 70 + "\n")
    return bool(passed_seeds)
