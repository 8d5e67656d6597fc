"""
Report files: test-simulation tables, learning-curve exports and topology
documents for external renderers.
"""

import csv
from pathlib import Path

from nagi_lab.config.profiles import TASK_CART_POLE
from nagi_lab.evolution.genome import NodeKind
from nagi_lab.exceptions import ContractViolationError, RunDirectoryError
from nagi_lab.harness.runs import format_value
from nagi_lab.harness.serialization import as_json
from nagi_lab.snn.spiking_core import Neurotransmitter

AVERAGE_LABEL = "avg"

BINARY_REPORT_COLUMNS = ("sim", "accuracy", "eos_accuracy", "input_order", "environment_order")
ACTUATOR_TRACE_COLUMNS = ("sim", "step", "condition", "count_0", "count_1")

# stats.csv column prefix per exported metric
CURVE_METRICS = {
    "fitness": "fitness",
    "accuracy": "acc",
    "eos_accuracy": "eos",
}
CURVE_COLUMNS = ("generation", "min", "mean", "max")
CURVE_DIR = "curves"


# ============================================
# Test Simulation Reports
# ============================================


def size_label(size):
    return f"{float(size):g}"


def cartpole_report_columns(test_sizes):
    return ("sim", "fitness", *(f"steps_{size_label(s)}" for s in test_sizes), "environment_order")


def _mean(values):
    return sum(values) / len(values) if values else None


def binary_report_rows(reports):
    rows = [
        [k, format_value(r.accuracy), format_value(r.eos_accuracy), r.input_order, r.environment_order]
        for k, r in enumerate(reports)
    ]
    if reports:
        rows.append(
            [
                AVERAGE_LABEL,
                format_value(_mean([r.accuracy for r in reports])),
                format_value(_mean([r.eos_accuracy for r in reports])),
                "",
                "",
            ]
        )
    return rows


def cartpole_steps_by_size(report, test_sizes):
    """Mean balanced iterations per test size in one lifetime."""
    steps = {}
    for size in test_sizes:
        runs = [n for s, n in report.condition_steps if s == size]
        steps[size] = _mean(runs) if runs else None
    return steps


def cartpole_report_rows(reports, test_sizes):
    rows = []
    per_size = [cartpole_steps_by_size(r, test_sizes) for r in reports]
    for k, (r, steps) in enumerate(zip(reports, per_size)):
        rows.append(
            [k, format_value(r.fitness), *(_format_steps(steps[s]) for s in test_sizes), r.environment_order]
        )
    if reports:
        rows.append(
            [
                AVERAGE_LABEL,
                format_value(_mean([r.fitness for r in reports])),
                *(format_value(_mean([steps[s] for steps in per_size if steps[s] is not None])) for s in test_sizes),
                "",
            ]
        )
    return rows


def _format_steps(value):
    if value is None:
        return ""
    if float(value).is_integer():
        return str(int(value))
    return format_value(float(value))


def write_test_report(path, task, reports, test_sizes=()):
    """
    Write the table of a champion's test simulations plus an average row.

    Binary tasks report accuracy, end-of-sample accuracy, input order and
    environment order; cart-pole reports fitness, balanced iterations per test
    pole size and the environment order. No simulations give a header-only file.
    """
    if task == TASK_CART_POLE:
        columns = cartpole_report_columns(test_sizes)
        rows = cartpole_report_rows(reports, test_sizes)
    else:
        columns = BINARY_REPORT_COLUMNS
        rows = binary_report_rows(reports)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
    return path


def actuator_trace_path(report_path):
    report_path = Path(report_path)
    return report_path.with_name(f"{report_path.stem}_actuators.csv")


def write_actuator_trace(path, reports):
    """
    Write the recorded actuator window counts of every test simulation.

    One row per recorded step: simulation index, lifetime step, active
    condition and the spike count of each output neuron in the window.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(ACTUATOR_TRACE_COLUMNS)
        for k, report in enumerate(reports):
            for sample in report.actuator_trace:
                writer.writerow([k, sample.step, sample.condition, *sample.counts])
    return path


# ============================================
# Learning Curves
# ============================================


def export_curves(run, out_dir=None):
    """
    One CSV per metric with generation, min, mean and max columns.

    Metrics without values (accuracy for cart-pole) are skipped. Exporting
    twice gives identical files.

    Raises:
        RunDirectoryError: If the run has no stats.csv.
        ContractViolationError: If a row has min > mean or mean > max.
    """
    rows = run.read_stats()
    out_dir = Path(out_dir) if out_dir else run.path / CURVE_DIR
    out_dir.mkdir(parents=True, exist_ok=True)

    paths = []
    for metric, prefix in CURVE_METRICS.items():
        columns = (f"{prefix}_min", f"{prefix}_mean", f"{prefix}_max")
        if not rows or any(row[c] == "" for row in rows for c in columns):
            continue

        path = out_dir / f"{metric}.csv"
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CURVE_COLUMNS)
            for row in rows:
                low, mean, high = (float(row[c]) for c in columns)
                if not low <= mean <= high:
                    raise ContractViolationError(
                        f"Generation {row['generation']}: {metric} min/mean/max out of order ({low}, {mean}, {high})"
                    )
                writer.writerow([row["generation"], *(row[c] for c in columns)])
        paths.append(path)

    if not paths and not rows:
        raise RunDirectoryError(f"{run.stats_path} has no generations to export")
    return paths


# ============================================
# Topology
# ============================================


def topology_document(genome):
    """Nodes with their loci and edges, for `inspect`."""
    nodes = []
    for nid in sorted(genome.nodes):
        node = genome.nodes[nid]
        rule = node.rule
        nodes.append(
            {
                "id": node.id,
                "kind": node.kind.value,
                "neurotransmitter": node.neurotransmitter.value,
                "bias_enabled": node.bias_enabled,
                "rule_kind": rule.kind.value if rule else None,
                "rule_parameters": (
                    {
                        "a_plus": rule.a_plus,
                        "a_minus": rule.a_minus,
                        "shape_plus": rule.shape_plus,
                        "shape_minus": rule.shape_minus,
                    }
                    if rule
                    else None
                ),
            }
        )

    edges = [
        {"innovation": c.innovation, "from": c.from_id, "to": c.to_id}
        for c in genome.enabled_connections()
    ]
    return {
        "genome_key": genome.key,
        "n_inputs": genome.n_inputs,
        "n_outputs": genome.n_outputs,
        "nodes": nodes,
        "edges": edges,
    }


def topology_json(genome):
    return as_json(topology_document(genome)) + "\n"


def topology_dot(genome):
    """
    Graphviz description: inputs as boxes, outputs as double circles,
    inhibitory neurons red, biased neurons bold; node labels name the rule.
    """
    lines = [f"digraph genome_{genome.key} {{", "  rankdir=LR;"]
    for nid in sorted(genome.nodes):
        node = genome.nodes[nid]
        shape = {NodeKind.INPUT: "box", NodeKind.OUTPUT: "doublecircle", NodeKind.HIDDEN: "circle"}[node.kind]
        color = "red" if node.neurotransmitter == Neurotransmitter.INHIBITORY else "black"
        label = str(nid) if node.rule is None else f"{nid}\\n{node.rule.kind.value}"
        style = ',style="bold"' if node.bias_enabled else ""
        lines.append(f'  n{nid} [label="{label}",shape={shape},color={color}{style}];')
    for c in genome.enabled_connections():
        color = "red" if genome.nodes[c.from_id].neurotransmitter == Neurotransmitter.INHIBITORY else "black"
        lines.append(f"  n{c.from_id} -> n{c.to_id} [color={color}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
