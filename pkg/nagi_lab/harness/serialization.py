"""
JSON documents for genomes and champion records.

Documents are written the way frappe.as_json writes them (indent 1, sorted
keys) so a serialize -> parse -> serialize round trip is byte-identical.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from nagi_lab import __version__
from nagi_lab.evolution.genome import ConnectionGene, Genome, NodeGene, NodeKind
from nagi_lab.exceptions import ChampionFormatError
from nagi_lab.hooks import champion_schema_version
from nagi_lab.snn.plasticity import LearningRule, RuleKind
from nagi_lab.snn.spiking_core import Neurotransmitter

CHAMPION_DOCTYPE = "NAGI Champion"


def as_json(obj):
    return json.dumps(obj, indent=1, sort_keys=True, separators=(",", ": "))


# ============================================
# Genomes
# ============================================


def rule_to_dict(rule):
    if rule is None:
        return None
    return {
        "kind": rule.kind.value,
        "a_plus": rule.a_plus,
        "a_minus": rule.a_minus,
        "shape_plus": rule.shape_plus,
        "shape_minus": rule.shape_minus,
    }


def rule_from_dict(data):
    if data is None:
        return None
    return LearningRule(
        RuleKind(data["kind"]),
        float(data["a_plus"]),
        float(data["a_minus"]),
        float(data["shape_plus"]),
        float(data["shape_minus"]),
    )


def genome_to_dict(g):
    return {
        "key": g.key,
        "n_inputs": g.n_inputs,
        "n_outputs": g.n_outputs,
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                "neurotransmitter": n.neurotransmitter.value,
                "bias_enabled": n.bias_enabled,
                "rule": rule_to_dict(n.rule),
            }
            for n in (g.nodes[k] for k in sorted(g.nodes))
        ],
        "connections": [
            {"innovation": c.innovation, "from_id": c.from_id, "to_id": c.to_id, "enabled": c.enabled}
            for c in (g.connections[k] for k in sorted(g.connections))
        ],
    }


def genome_from_dict(data):
    """
    Raises:
        KeyError, TypeError, ValueError: On a malformed document.
    """
    nodes = {}
    for item in data["nodes"]:
        node = NodeGene(
            int(item["id"]),
            NodeKind(item["kind"]),
            Neurotransmitter(item["neurotransmitter"]),
            bool(item["bias_enabled"]),
            rule_from_dict(item["rule"]),
        )
        nodes[node.id] = node

    connections = {}
    for item in data["connections"]:
        gene = ConnectionGene(int(item["innovation"]), int(item["from_id"]), int(item["to_id"]), bool(item["enabled"]))
        connections[gene.innovation] = gene

    return Genome(int(data["key"]), int(data["n_inputs"]), int(data["n_outputs"]), nodes, connections)


def genome_digest(g):
    """Content hash of a genome's genes (fitness excluded)."""
    return hashlib.sha256(as_json(genome_to_dict(g)).encode()).hexdigest()


# ============================================
# Champion Records
# ============================================


@dataclass
class ChampionRecord:
    genome: Genome
    task: str
    profile: str
    metric: str
    generation: int
    fitness: float
    accuracy: float | None = None
    eos_accuracy: float | None = None
    config: dict = field(default_factory=dict)


def champion_to_dict(record):
    return {
        "doctype": CHAMPION_DOCTYPE,
        "schema_version": champion_schema_version,
        "app_version": __version__,
        "task": record.task,
        "profile": record.profile,
        "metric": record.metric,
        "generation": record.generation,
        "fitness": record.fitness,
        "accuracy": record.accuracy,
        "eos_accuracy": record.eos_accuracy,
        "config": record.config,
        "genome": genome_to_dict(record.genome),
    }


def champion_from_dict(data, path="<champion>"):
    if not isinstance(data, dict) or data.get("doctype") != CHAMPION_DOCTYPE:
        raise ChampionFormatError(path, "Not a champion document")
    if data.get("schema_version") != champion_schema_version:
        raise ChampionFormatError(path, f"Unsupported schema version {data.get('schema_version')!r}")
    try:
        return ChampionRecord(
            genome=genome_from_dict(data["genome"]),
            task=data["task"],
            profile=data["profile"],
            metric=data["metric"],
            generation=int(data["generation"]),
            fitness=float(data["fitness"]),
            accuracy=data.get("accuracy"),
            eos_accuracy=data.get("eos_accuracy"),
            config=data.get("config") or {},
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ChampionFormatError(path, f"Invalid champion field: {e!r}")


def save_champion(path, record):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(as_json(champion_to_dict(record)) + "\n", encoding="utf-8")
    return path


def load_champion(path):
    """
    Read a champion file.

    Raises:
        ChampionFormatError: If the file is missing, not JSON (with the byte
            offset of the error) or not a champion document.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (FileNotFoundError, IsADirectoryError):
        raise ChampionFormatError(str(path), "Champion file not found")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ChampionFormatError(str(path), f"Invalid JSON: {e.msg}", offset=e.pos)
    return champion_from_dict(data, str(path))
