"""
Weightless NEAT-style genome.

Connection genes carry no weight: weights are drawn when a genome is developed
into a network and then change during the agent's lifetime through STDP. Node
genes of hidden and output neurons carry three extra loci: neurotransmitter
(hidden only; inputs and outputs are excitatory), bias, and the learning rule
with its parameters.

Node ids are dense: inputs 0..n_in-1, outputs n_in..n_in+n_out-1, hidden
neurons after that.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from nagi_lab.config import GenomeConfig, SimulationConfig, SpeciationConfig
from nagi_lab.exceptions import DevelopmentError
from nagi_lab.snn.plasticity import PARAMETER_NAMES, LearningRule, RuleKind, parameter_ranges, sample_rule
from nagi_lab.snn.spiking_core import Network, NeuronState, Neurotransmitter, Synapse

DEFAULT_GENOME = GenomeConfig()
DEFAULT_SPECIATION = SpeciationConfig()
DEFAULT_SIMULATION = SimulationConfig()


class NodeKind(str, Enum):
    INPUT = "input"
    HIDDEN = "hidden"
    OUTPUT = "output"


@dataclass(frozen=True)
class NodeGene:
    id: int
    kind: NodeKind
    neurotransmitter: Neurotransmitter = Neurotransmitter.EXCITATORY
    bias_enabled: bool = False
    rule: LearningRule | None = None


@dataclass(frozen=True)
class ConnectionGene:
    innovation: int
    from_id: int
    to_id: int
    enabled: bool = True

    @property
    def pair(self):
        return (self.from_id, self.to_id)


@dataclass(frozen=True)
class Genome:
    key: int
    n_inputs: int
    n_outputs: int
    nodes: dict = field(default_factory=dict)  # id -> NodeGene
    connections: dict = field(default_factory=dict)  # innovation -> ConnectionGene
    fitness: float | None = None

    @property
    def input_ids(self):
        return list(range(self.n_inputs))

    @property
    def output_ids(self):
        return list(range(self.n_inputs, self.n_inputs + self.n_outputs))

    @property
    def hidden_ids(self):
        return sorted(nid for nid, n in self.nodes.items() if n.kind == NodeKind.HIDDEN)

    def enabled_connections(self):
        return [self.connections[k] for k in sorted(self.connections) if self.connections[k].enabled]

    def connection_for(self, from_id, to_id):
        for gene in self.connections.values():
            if gene.from_id == from_id and gene.to_id == to_id:
                return gene
        return None

    def with_fitness(self, fitness):
        return replace(self, fitness=fitness)


class InnovationRegistry:
    """
    Historical markings shared by a whole run.

    A connection between an ordered pair of nodes keeps its innovation number
    for the rest of the run. Splitting the same connection twice within one
    generation yields the same hidden node id and innovations; the split cache
    is cleared by `reset_generation`.
    """

    def __init__(self, n_inputs, n_outputs):
        self.n_inputs = n_inputs
        self.n_outputs = n_outputs
        self._connections = {}
        self._splits = {}
        for i in range(n_inputs):
            for o in range(n_outputs):
                self._connections[(i, n_inputs + o)] = i * n_outputs + o
        self.next_innovation = n_inputs * n_outputs
        self.next_node_id = n_inputs + n_outputs

    def connection_innovation(self, from_id, to_id):
        pair = (from_id, to_id)
        if pair not in self._connections:
            self._connections[pair] = self.next_innovation
            self.next_innovation += 1
        return self._connections[pair]

    def split(self, innovation, from_id, to_id):
        """Return (node_id, innovation_in, innovation_out) for splitting a connection."""
        if innovation not in self._splits:
            node_id = self.next_node_id
            self.next_node_id += 1
            self._splits[innovation] = (
                node_id,
                self.connection_innovation(from_id, node_id),
                self.connection_innovation(node_id, to_id),
            )
        return self._splits[innovation]

    def fresh_split(self, from_id, to_id):
        node_id = self.next_node_id
        self.next_node_id += 1
        return (
            node_id,
            self.connection_innovation(from_id, node_id),
            self.connection_innovation(node_id, to_id),
        )

    def reset_generation(self):
        self._splits.clear()

    def to_dict(self):
        return {
            "n_inputs": self.n_inputs,
            "n_outputs": self.n_outputs,
            "next_innovation": self.next_innovation,
            "next_node_id": self.next_node_id,
            "connections": [[u, v, k] for (u, v), k in sorted(self._connections.items(), key=lambda x: x[1])],
        }

    @classmethod
    def from_dict(cls, data):
        registry = cls(data["n_inputs"], data["n_outputs"])
        registry._connections = {(u, v): k for u, v, k in data["connections"]}
        registry.next_innovation = data["next_innovation"]
        registry.next_node_id = data["next_node_id"]
        return registry


# ============================================
# Locus Sampling
# ============================================


def _sample_rule_for(neurotransmitter, rng, config):
    matching = rng.random() < config.matching_family_probability
    excitatory = neurotransmitter == Neurotransmitter.EXCITATORY
    hebbian = matching if excitatory else not matching
    symmetric = rng.random() < config.symmetric_probability
    return sample_rule(RuleKind.from_family(symmetric, hebbian), rng)


def _new_node(node_id, kind, rng, config):
    if kind == NodeKind.HIDDEN and rng.random() >= config.excitatory_probability:
        neurotransmitter = Neurotransmitter.INHIBITORY
    else:
        neurotransmitter = Neurotransmitter.EXCITATORY
    bias = bool(rng.random() < config.bias_probability)
    rule = _sample_rule_for(neurotransmitter, rng, config)
    return NodeGene(node_id, kind, neurotransmitter, bias, rule)


def init_genome(n_inputs, n_outputs, rng, config=DEFAULT_GENOME, key=0):
    """
    Minimal genome: every input connected to every output, no hidden nodes.

    Args:
        n_inputs (int): Number of input neurons (>= 1).
        n_outputs (int): Number of output neurons (>= 1).
        rng (numpy.random.Generator): Random source for the output loci.
        config (GenomeConfig): Locus probabilities.
        key (int): Genome id.

    Returns:
        Genome
    """
    if n_inputs < 1 or n_outputs < 1:
        raise ValueError(f"Need at least one input and one output, got {n_inputs}/{n_outputs}")

    nodes = {i: NodeGene(i, NodeKind.INPUT) for i in range(n_inputs)}
    for o in range(n_inputs, n_inputs + n_outputs):
        nodes[o] = _new_node(o, NodeKind.OUTPUT, rng, config)

    connections = {}
    for i in range(n_inputs):
        for o in range(n_outputs):
            innovation = i * n_outputs + o
            connections[innovation] = ConnectionGene(innovation, i, n_inputs + o, True)

    return Genome(key, n_inputs, n_outputs, nodes, connections)


# ============================================
# Mutation
# ============================================


def _perturb_rule(rule, rng, config):
    ranges = parameter_ranges(rule.kind)
    values = []
    for name, value in zip(PARAMETER_NAMES, rule.parameters()):
        low, high = ranges[name]
        variance = config.mutation_power * (high - low)
        value = value + rng.normal(0.0, math.sqrt(variance))
        values.append(float(min(high, max(low, value))))
    return rule.with_parameters(values)


def _switch_rule_kind(rule, rng):
    others = [k for k in RuleKind if k != rule.kind]
    kind = others[int(rng.integers(len(others)))]
    if kind.is_symmetric != rule.kind.is_symmetric:
        return sample_rule(kind, rng)
    return replace(rule, kind=kind)


def mutate_node(node, rng, config=DEFAULT_GENOME):
    """Apply the per-locus mutations to one hidden or output node gene."""
    if node.kind == NodeKind.INPUT:
        return node

    neurotransmitter = node.neurotransmitter
    if node.kind == NodeKind.HIDDEN and rng.random() < config.neurotransmitter_mutation_rate:
        neurotransmitter = (
            Neurotransmitter.INHIBITORY
            if neurotransmitter == Neurotransmitter.EXCITATORY
            else Neurotransmitter.EXCITATORY
        )

    bias = node.bias_enabled
    if rng.random() < config.bias_mutation_rate:
        bias = not bias

    rule = node.rule
    if rng.random() < config.rule_mutation_rate:
        rule = _switch_rule_kind(rule, rng)
    if rng.random() < config.parameter_mutation_rate:
        rule = _perturb_rule(rule, rng, config)
    if rng.random() < config.parameter_reinit_rate:
        rule = sample_rule(rule.kind, rng)

    return NodeGene(node.id, node.kind, neurotransmitter, bias, rule)


def _add_connection(nodes, connections, registry, rng):
    enabled_pairs = {c.pair for c in connections.values() if c.enabled}
    candidates = [
        (u, v)
        for u in sorted(nodes)
        for v in sorted(nodes)
        if nodes[v].kind != NodeKind.INPUT and (u, v) not in enabled_pairs
    ]
    if not candidates:
        return

    u, v = candidates[int(rng.integers(len(candidates)))]
    innovation = registry.connection_innovation(u, v)
    # A disabled gene for the same pair shares the innovation and is re-enabled
    connections[innovation] = ConnectionGene(innovation, u, v, True)


def _add_node(nodes, connections, registry, rng, config):
    enabled = [connections[k] for k in sorted(connections) if connections[k].enabled]
    if not enabled:
        return

    gene = enabled[int(rng.integers(len(enabled)))]
    node_id, innovation_in, innovation_out = registry.split(gene.innovation, gene.from_id, gene.to_id)
    if node_id in nodes:
        node_id, innovation_in, innovation_out = registry.fresh_split(gene.from_id, gene.to_id)

    connections[gene.innovation] = replace(gene, enabled=False)
    nodes[node_id] = _new_node(node_id, NodeKind.HIDDEN, rng, config)
    connections[innovation_in] = ConnectionGene(innovation_in, gene.from_id, node_id, True)
    connections[innovation_out] = ConnectionGene(innovation_out, node_id, gene.to_id, True)


def mutate(g, registry, rng, config=DEFAULT_GENOME, key=None):
    """
    Return a mutated copy of `g`.

    Every hidden/output node goes through the locus mutations, then a new
    hidden node (splitting an enabled connection) and a new connection are
    added with their structural rates.

    Args:
        g (Genome): Parent genome (not modified).
        registry (InnovationRegistry): Run-wide historical markings.
        rng (numpy.random.Generator): Random source.
        config (GenomeConfig): Mutation rates.
        key (int, optional): Id of the child; defaults to the parent's.

    Returns:
        Genome
    """
    nodes = {nid: mutate_node(g.nodes[nid], rng, config) for nid in sorted(g.nodes)}
    connections = dict(g.connections)

    if rng.random() < config.add_node_rate:
        _add_node(nodes, connections, registry, rng, config)
    if rng.random() < config.add_connection_rate:
        _add_connection(nodes, connections, registry, rng)

    return Genome(g.key if key is None else key, g.n_inputs, g.n_outputs, nodes, connections)


# ============================================
# Crossover
# ============================================


def crossover(parent_a, parent_b, fitness_a, fitness_b, rng, key=None):
    """
    NEAT crossover of two genomes with the same interface.

    Matching connection genes and matching node genes come from either parent
    at random; disjoint and excess genes come from the fitter parent (parent_a
    on ties). The child's node set is the fitter parent's, so every connection
    endpoint has a node gene.
    """
    if (parent_a.n_inputs, parent_a.n_outputs) != (parent_b.n_inputs, parent_b.n_outputs):
        raise DevelopmentError("Parents have different input/output interfaces")

    if fitness_b > fitness_a:
        fitter, other = parent_b, parent_a
    else:
        fitter, other = parent_a, parent_b

    nodes = {}
    for nid in sorted(fitter.nodes):
        gene = fitter.nodes[nid]
        if nid in other.nodes and rng.random() < 0.5:
            gene = other.nodes[nid]
        nodes[nid] = gene

    connections = {}
    for innovation in sorted(fitter.connections):
        gene = fitter.connections[innovation]
        if innovation in other.connections and rng.random() < 0.5:
            gene = other.connections[innovation]
        connections[innovation] = gene

    return Genome(fitter.key if key is None else key, fitter.n_inputs, fitter.n_outputs, nodes, connections)


# ============================================
# Compatibility Distance
# ============================================


def node_locus_distance(a, b):
    """
    Disagreement between two node genes with the same id.

    +1 for a different rule kind, +1 for a different neurotransmitter, +1 for
    a different bias locus, plus the mean range-normalized parameter
    difference when the rule kinds agree. Input nodes score 0.
    """
    score = 0.0
    if a.neurotransmitter != b.neurotransmitter:
        score += 1.0
    if a.bias_enabled != b.bias_enabled:
        score += 1.0
    if a.rule is None or b.rule is None:
        return score + (1.0 if (a.rule is None) != (b.rule is None) else 0.0)

    if a.rule.kind != b.rule.kind:
        return score + 1.0

    ranges = parameter_ranges(a.rule.kind)
    diffs = [
        abs(pa - pb) / (ranges[name][1] - ranges[name][0])
        for name, pa, pb in zip(PARAMETER_NAMES, a.rule.parameters(), b.rule.parameters())
    ]
    return score + sum(diffs) / len(diffs)


def compatibility_distance(a, b, coefficients=DEFAULT_SPECIATION):
    """
    delta = c1*E/N + c2*D/N + c3*L

    E and D count excess and disjoint connection genes, N is the larger
    connection-gene count (1 when both genomes are below
    `small_genome_size`), and L is the mean node locus distance over node ids
    present in both genomes.

    Args:
        a (Genome), b (Genome): Genomes to compare.
        coefficients (SpeciationConfig): c1, c2, c3 and the small-genome size.

    Returns:
        float: Non-negative, symmetric distance.
    """
    innovations_a = set(a.connections)
    innovations_b = set(b.connections)

    excess = disjoint = 0
    if innovations_a and innovations_b:
        cutoff = min(max(innovations_a), max(innovations_b))
        for innovation in innovations_a ^ innovations_b:
            if innovation > cutoff:
                excess += 1
            else:
                disjoint += 1
    else:
        excess = len(innovations_a | innovations_b)

    size = max(len(innovations_a), len(innovations_b))
    if size < coefficients.small_genome_size:
        size = 1

    matching_nodes = sorted(set(a.nodes) & set(b.nodes))
    locus = 0.0
    if matching_nodes:
        locus = sum(node_locus_distance(a.nodes[n], b.nodes[n]) for n in matching_nodes) / len(matching_nodes)

    return (
        coefficients.excess_coefficient * excess / size
        + coefficients.disjoint_coefficient * disjoint / size
        + coefficients.locus_coefficient * locus
    )


# ============================================
# Development
# ============================================


def validate_genome(g):
    """
    Raises:
        DevelopmentError: On a malformed genome.
    """
    for nid, node in g.nodes.items():
        if node.id != nid:
            raise DevelopmentError(f"Node gene stored under id {nid} has id {node.id}")

    for nid in g.input_ids:
        node = g.nodes.get(nid)
        if node is None or node.kind != NodeKind.INPUT:
            raise DevelopmentError(f"Missing input node {nid}")
        if node.rule is not None or node.bias_enabled:
            raise DevelopmentError(f"Input node {nid} carries rule or bias loci")

    for nid in g.output_ids:
        node = g.nodes.get(nid)
        if node is None or node.kind != NodeKind.OUTPUT:
            raise DevelopmentError(f"Missing output node {nid}")
        if node.neurotransmitter != Neurotransmitter.EXCITATORY:
            raise DevelopmentError(f"Output node {nid} must be excitatory")

    for nid in g.hidden_ids:
        if nid < g.n_inputs + g.n_outputs:
            raise DevelopmentError(f"Hidden node id {nid} collides with the interface")

    for nid, node in g.nodes.items():
        if node.kind != NodeKind.INPUT and node.rule is None:
            raise DevelopmentError(f"Node {nid} has no learning rule")

    enabled_pairs = set()
    for innovation, gene in g.connections.items():
        if gene.innovation != innovation:
            raise DevelopmentError(f"Connection gene stored under {innovation} has innovation {gene.innovation}")
        if gene.from_id not in g.nodes or gene.to_id not in g.nodes:
            raise DevelopmentError(f"Connection {gene.pair} references a missing node")
        if g.nodes[gene.to_id].kind == NodeKind.INPUT:
            raise DevelopmentError(f"Connection {gene.pair} targets an input node")
        if gene.enabled:
            if gene.pair in enabled_pairs:
                raise DevelopmentError(f"Duplicate enabled connection {gene.pair}")
            enabled_pairs.add(gene.pair)


def draw_initial_weights(n, rng, mean=1.0, std=0.2):
    """Normal(mean, std) weights truncated at 0."""
    return np.maximum(rng.normal(mean, std, size=n), 0.0)


def develop(g, rng, config=DEFAULT_SIMULATION):
    """
    Build the phenotype network of a genome.

    One synapse per enabled connection gene with a weight drawn from
    Normal(1, 0.2), truncated at 0, clamped to [w_min, w_max] and then
    budget-normalized per neuron. Topology depends on the genome only; the
    random source decides the weights.

    Raises:
        DevelopmentError: If the genome is malformed.
    """
    validate_genome(g)

    neurons = {}
    for nid in g.output_ids + g.hidden_ids:
        node = g.nodes[nid]
        neurons[nid] = NeuronState(
            resting_threshold=config.resting_threshold,
            bias_enabled=node.bias_enabled,
            neurotransmitter=node.neurotransmitter,
            rule=node.rule,
        )

    genes = g.enabled_connections()
    weights = draw_initial_weights(len(genes), rng, config.weight_init_mean, config.weight_init_std)
    synapses = [
        Synapse(gene.from_id, gene.to_id, float(min(config.w_max, max(config.w_min, w))))
        for gene, w in zip(genes, weights)
    ]

    net = Network(g.input_ids, g.output_ids, g.hidden_ids, neurons, synapses, config)
    net.normalize_budgets()
    return net
