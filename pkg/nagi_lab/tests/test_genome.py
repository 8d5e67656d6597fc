import math
import unittest
from dataclasses import replace

import numpy as np

from nagi_lab.config import GenomeConfig
from nagi_lab.evolution.genome import (
    ConnectionGene,
    Genome,
    InnovationRegistry,
    NodeGene,
    NodeKind,
    compatibility_distance,
    crossover,
    develop,
    draw_initial_weights,
    init_genome,
    mutate,
    mutate_node,
    node_locus_distance,
    validate_genome,
)
from nagi_lab.exceptions import DevelopmentError
from nagi_lab.snn.plasticity import LearningRule, RuleKind, parameter_ranges
from nagi_lab.snn.spiking_core import Neurotransmitter

STRUCTURAL = GenomeConfig(add_connection_rate=0.5, add_node_rate=0.3)


def evolved_genome(seed, rounds=60):
    rng = np.random.default_rng(seed)
    registry = InnovationRegistry(4, 2)
    g = init_genome(4, 2, rng)
    for _ in range(rounds):
        g = mutate(g, registry, rng, STRUCTURAL)
        registry.reset_generation()
    return g, registry


def evolved_pair(seed, rounds=60):
    """Two lineages mutated side by side under one registry, as in a population."""
    rng = np.random.default_rng(seed)
    registry = InnovationRegistry(4, 2)
    a, b = init_genome(4, 2, rng, key=0), init_genome(4, 2, rng, key=1)
    for _ in range(rounds):
        a = mutate(a, registry, rng, STRUCTURAL)
        b = mutate(b, registry, rng, STRUCTURAL)
        registry.reset_generation()
    return a, b


class TestInitGenome(unittest.TestCase):
    def test_fully_connected_interface(self):
        g = init_genome(4, 2, np.random.default_rng(0))
        self.assertEqual(len(g.nodes), 6)
        self.assertEqual(len(g.connections), 8)
        self.assertEqual(g.hidden_ids, [])
        self.assertEqual(sorted(g.connections), list(range(8)))
        self.assertEqual(g.connections[3].pair, (1, 5))
        for nid in g.output_ids:
            self.assertEqual(g.nodes[nid].neurotransmitter, Neurotransmitter.EXCITATORY)
            self.assertIsNotNone(g.nodes[nid].rule)
        validate_genome(g)

    def test_same_seed_same_genome(self):
        a = init_genome(4, 2, np.random.default_rng(11))
        b = init_genome(4, 2, np.random.default_rng(11))
        self.assertEqual(a, b)

    def test_bias_frequency(self):
        rng = np.random.default_rng(1)
        outputs = [n for _ in range(5000) for n in init_genome(4, 2, rng).nodes.values() if n.kind == NodeKind.OUTPUT]
        share = sum(n.bias_enabled for n in outputs) / len(outputs)
        self.assertAlmostEqual(share, 0.2, delta=0.02)

    def test_output_rule_family_frequency(self):
        rng = np.random.default_rng(2)
        outputs = [n for _ in range(5000) for n in init_genome(4, 2, rng).nodes.values() if n.kind == NodeKind.OUTPUT]
        share = sum(n.rule.kind.is_hebbian for n in outputs) / len(outputs)
        self.assertAlmostEqual(share, 0.7, delta=0.02)

    def test_hidden_locus_frequencies(self):
        rng = np.random.default_rng(3)
        split_only = GenomeConfig(add_node_rate=1.0, add_connection_rate=0.0)
        hidden = []
        for _ in range(8000):
            child = mutate(init_genome(4, 2, rng), InnovationRegistry(4, 2), rng, split_only)
            hidden += [n for n in child.nodes.values() if n.kind == NodeKind.HIDDEN]
        self.assertEqual(len(hidden), 8000)

        excitatory = [n for n in hidden if n.neurotransmitter == Neurotransmitter.EXCITATORY]
        inhibitory = [n for n in hidden if n.neurotransmitter == Neurotransmitter.INHIBITORY]
        self.assertAlmostEqual(len(excitatory) / len(hidden), 0.7, delta=0.02)
        self.assertAlmostEqual(sum(n.rule.kind.is_hebbian for n in excitatory) / len(excitatory), 0.7, delta=0.03)
        self.assertAlmostEqual(
            sum(not n.rule.kind.is_hebbian for n in inhibitory) / len(inhibitory), 0.7, delta=0.035
        )

    def test_rejects_empty_interface(self):
        with self.assertRaises(ValueError):
            init_genome(0, 2, np.random.default_rng(0))


class TestMutation(unittest.TestCase):
    def test_parameter_perturbation_spread(self):
        rule = LearningRule(RuleKind.SYMMETRIC_HEBBIAN, 5.0, 22.5, 6.0, 16.0)
        node = NodeGene(9, NodeKind.HIDDEN, rule=rule)
        config = GenomeConfig(
            neurotransmitter_mutation_rate=0.0,
            bias_mutation_rate=0.0,
            rule_mutation_rate=0.0,
            parameter_mutation_rate=1.0,
            parameter_reinit_rate=0.0,
        )
        rng = np.random.default_rng(2)
        steps = [mutate_node(node, rng, config).rule.a_minus - 22.5 for _ in range(10_000)]
        low, high = parameter_ranges(RuleKind.SYMMETRIC_HEBBIAN)["a_minus"]
        self.assertAlmostEqual(float(np.std(steps)), math.sqrt(0.2 * (high - low)), delta=0.1)

    def test_perturbation_is_clamped(self):
        rule = LearningRule(RuleKind.ASYMMETRIC_HEBBIAN, 1.0, 0.1, 10.0, 1.0)
        node = NodeGene(9, NodeKind.HIDDEN, rule=rule)
        config = GenomeConfig(rule_mutation_rate=0.0, parameter_mutation_rate=1.0, parameter_reinit_rate=0.0)
        rng = np.random.default_rng(3)
        ranges = parameter_ranges(RuleKind.ASYMMETRIC_HEBBIAN)
        for _ in range(2000):
            mutated = mutate_node(node, rng, config).rule
            self.assertGreaterEqual(mutated.a_minus, ranges["a_minus"][0])
            self.assertLessEqual(mutated.a_plus, ranges["a_plus"][1])
            self.assertLessEqual(mutated.shape_plus, ranges["shape_plus"][1])
            self.assertGreaterEqual(mutated.shape_minus, ranges["shape_minus"][0])

    def test_neurotransmitter_switch_rate(self):
        node = NodeGene(9, NodeKind.HIDDEN, rule=LearningRule(RuleKind.ASYMMETRIC_HEBBIAN, 0.5, 0.5, 5.0, 5.0))
        rng = np.random.default_rng(4)
        flips = sum(
            mutate_node(node, rng).neurotransmitter == Neurotransmitter.INHIBITORY for _ in range(10_000)
        )
        self.assertAlmostEqual(flips / 10_000, 0.10, delta=0.01)

    def test_parameter_reinit_rate(self):
        rule = LearningRule(RuleKind.ASYMMETRIC_HEBBIAN, 0.5, 0.5, 5.0, 5.0)
        node = NodeGene(9, NodeKind.HIDDEN, rule=rule)
        reinit_only = GenomeConfig(
            neurotransmitter_mutation_rate=0.0,
            bias_mutation_rate=0.0,
            rule_mutation_rate=0.0,
            parameter_mutation_rate=0.0,
        )
        rng = np.random.default_rng(6)
        changed = sum(mutate_node(node, rng, reinit_only).rule != rule for _ in range(20_000))
        self.assertAlmostEqual(changed / 20_000, 0.02, delta=0.004)

    def test_outputs_stay_excitatory(self):
        node = NodeGene(4, NodeKind.OUTPUT, rule=LearningRule(RuleKind.ASYMMETRIC_HEBBIAN, 0.5, 0.5, 5.0, 5.0))
        rng = np.random.default_rng(5)
        config = GenomeConfig(neurotransmitter_mutation_rate=1.0)
        for _ in range(100):
            self.assertEqual(mutate_node(node, rng, config).neurotransmitter, Neurotransmitter.EXCITATORY)

    def test_input_nodes_untouched(self):
        node = NodeGene(0, NodeKind.INPUT)
        self.assertIs(mutate_node(node, np.random.default_rng(0)), node)

    def test_structural_mutations_keep_genome_valid(self):
        g, _ = evolved_genome(6, rounds=200)
        validate_genome(g)
        self.assertGreater(len(g.hidden_ids), 0)
        pairs = [c.pair for c in g.enabled_connections()]
        self.assertEqual(len(pairs), len(set(pairs)))

    def test_parent_not_modified(self):
        rng = np.random.default_rng(7)
        registry = InnovationRegistry(4, 2)
        g = init_genome(4, 2, rng)
        before = (dict(g.nodes), dict(g.connections))
        mutate(g, registry, rng, GenomeConfig(add_connection_rate=1.0, add_node_rate=1.0))
        self.assertEqual((g.nodes, g.connections), before)


class TestInnovationRegistry(unittest.TestCase):
    def test_initial_innovations(self):
        registry = InnovationRegistry(4, 2)
        self.assertEqual(registry.connection_innovation(1, 5), 3)
        self.assertEqual(registry.next_innovation, 8)
        self.assertEqual(registry.next_node_id, 6)

    def test_same_pair_same_innovation(self):
        registry = InnovationRegistry(4, 2)
        first = registry.connection_innovation(4, 5)
        self.assertEqual(registry.connection_innovation(4, 5), first)
        registry.reset_generation()
        self.assertEqual(registry.connection_innovation(4, 5), first)

    def test_split_cached_within_generation(self):
        registry = InnovationRegistry(4, 2)
        first = registry.split(0, 0, 4)
        self.assertEqual(registry.split(0, 0, 4), first)
        registry.reset_generation()
        second = registry.split(0, 0, 4)
        self.assertNotEqual(second[0], first[0])

    def test_round_trip(self):
        _, registry = evolved_genome(8)
        restored = InnovationRegistry.from_dict(registry.to_dict())
        self.assertEqual(restored.to_dict(), registry.to_dict())


class TestCrossover(unittest.TestCase):
    def test_self_crossover(self):
        g, _ = evolved_genome(9)
        child = crossover(g, g, 1.0, 1.0, np.random.default_rng(0))
        self.assertEqual(child.nodes, g.nodes)
        self.assertEqual(child.connections, g.connections)

    def test_fitter_parent_structure(self):
        a, b = evolved_pair(10)
        rng = np.random.default_rng(1)
        child = crossover(a, b, 0.2, 0.9, rng, key=99)
        self.assertEqual(set(child.connections), set(b.connections))
        self.assertEqual(set(child.nodes), set(b.nodes))
        self.assertEqual(child.key, 99)

        tie = crossover(a, b, 0.5, 0.5, rng)
        self.assertEqual(set(tie.connections), set(a.connections))

    def test_offspring_develop(self):
        a, b = evolved_pair(12)
        self.assertNotEqual(set(a.connections), set(b.connections))
        rng = np.random.default_rng(2)
        for _ in range(20):
            child = crossover(a, b, float(rng.random()), float(rng.random()), rng)
            validate_genome(child)
            develop(child, rng)

    def test_interface_mismatch(self):
        rng = np.random.default_rng(0)
        with self.assertRaises(DevelopmentError):
            crossover(init_genome(4, 2, rng), init_genome(6, 2, rng), 1.0, 0.0, rng)


class TestCompatibilityDistance(unittest.TestCase):
    def test_identity_and_symmetry(self):
        a, b = evolved_pair(14)
        self.assertEqual(compatibility_distance(a, a), 0.0)
        self.assertAlmostEqual(compatibility_distance(a, b), compatibility_distance(b, a), places=12)
        self.assertGreaterEqual(compatibility_distance(a, b), 0.0)

    def test_single_rule_kind_difference(self):
        g = init_genome(4, 2, np.random.default_rng(16))
        node = g.nodes[4]
        others = [k for k in RuleKind if k.is_symmetric == node.rule.kind.is_symmetric and k != node.rule.kind]
        nodes = dict(g.nodes)
        nodes[4] = replace(node, rule=replace(node.rule, kind=others[0]))
        other = replace(g, nodes=nodes)
        self.assertEqual(node_locus_distance(node, nodes[4]), 1.0)
        self.assertAlmostEqual(compatibility_distance(g, other), 0.4 / 6, places=12)

    def test_disjoint_and_excess_counted(self):
        rng = np.random.default_rng(17)
        g = init_genome(4, 2, rng)
        connections = dict(g.connections)
        del connections[2]
        connections[20] = ConnectionGene(20, 4, 5)
        other = replace(g, connections=connections)
        self.assertAlmostEqual(compatibility_distance(g, other), 2.0, places=12)


class TestDevelop(unittest.TestCase):
    def test_initial_weight_statistics(self):
        weights = draw_initial_weights(100_000, np.random.default_rng(18))
        self.assertAlmostEqual(float(np.mean(weights)), 1.0, delta=0.02)
        self.assertAlmostEqual(float(np.std(weights)), 0.2, delta=0.02)
        self.assertGreaterEqual(float(weights.min()), 0.0)

    def test_weights_bounded_and_budgeted(self):
        rng = np.random.default_rng(19)
        for seed in range(20):
            g, _ = evolved_genome(seed, rounds=40)
            net = develop(g, rng)
            for syn in net.synapses:
                self.assertGreaterEqual(syn.weight, 0.0)
                self.assertLessEqual(syn.weight, 1.0)
            for nid in net.state_ids:
                self.assertLessEqual(sum(net.incoming_weights(nid)), 5.0 + 1e-9)

    def test_disabled_connections_have_no_synapse(self):
        g = init_genome(4, 2, np.random.default_rng(20))
        connections = dict(g.connections)
        connections[0] = replace(connections[0], enabled=False)
        net = develop(replace(g, connections=connections), np.random.default_rng(0))
        self.assertEqual(len(net.synapses), 7)
        self.assertNotIn((0, 4), [(s.pre_id, s.post_id) for s in net.synapses])

    def test_topology_independent_of_rng(self):
        g, _ = evolved_genome(21)
        a = develop(g, np.random.default_rng(1))
        b = develop(g, np.random.default_rng(2))
        self.assertEqual([(s.pre_id, s.post_id) for s in a.synapses], [(s.pre_id, s.post_id) for s in b.synapses])

    def test_malformed_genome(self):
        g = init_genome(2, 1, np.random.default_rng(0))
        connections = dict(g.connections)
        connections[5] = ConnectionGene(5, 2, 0)
        with self.assertRaises(DevelopmentError):
            develop(Genome(0, 2, 1, g.nodes, connections), np.random.default_rng(0))
