import math
from collections import Counter

import numpy as np
import pytest

from neatuav.evolution import (
    NeatConfig,
    Species,
    allot_offspring,
    compat_distance,
    crossover,
    init_population,
    mutate,
    next_generation,
    order_parents,
    select_parent,
    speciate,
)
from neatuav.genome import ConnectionGene, Genome, InnovationTracker, NodeGene, is_acyclic


def bare_genome(innovations_weights, n_in=1, n_out=1):
    """Genome with prescribed (innovation, weight) connection genes on a 1->1 frame."""
    nodes = {0: NodeGene(0, "input")}
    for j in range(n_out):
        nodes[n_in + j] = NodeGene(n_in + j, "output")
    conns = {
        innov: ConnectionGene(innov, 0, n_in, w) for innov, w in innovations_weights
    }
    return Genome(nodes, conns, n_in, n_out)


def quiet_config(**overrides):
    base = dict(
        population_size=10,
        weight_mutation_rate=0.0,
        bias_mutation_rate=0.0,
        node_add_prob=0.0,
        node_delete_prob=0.0,
        conn_add_prob=0.0,
        conn_delete_prob=0.0,
    )
    base.update(overrides)
    return NeatConfig(**base)


class TestInitPopulation:
    def test_default_scene_shape(self):
        pop = init_population(NeatConfig(population_size=6), 17, 5, seed=3)
        for g in pop.genomes:
            assert len(g.nodes) == 22
            assert len(g.connections) == 85
            assert all(c.enabled for c in g.connections.values())
            assert len(g.input_ids()) == 17 and len(g.output_ids()) == 5

    def test_minimal_case(self):
        pop = init_population(NeatConfig(population_size=2), 1, 1, seed=0)
        g = pop.genomes[0]
        assert len(g.nodes) == 2 and list(g.connections) == [0]

    def test_innovations_shared_across_genomes(self):
        pop = init_population(NeatConfig(population_size=5), 3, 2, seed=1)
        keys = {tuple(sorted(g.connections)) for g in pop.genomes}
        assert keys == {tuple(range(6))}
        pairs = {(c.src, c.dst) for c in pop.genomes[0].connections.values()}
        assert len(pairs) == 6

    def test_same_seed_bit_identical(self):
        a = init_population(NeatConfig(population_size=4), 5, 3, seed=42)
        b = init_population(NeatConfig(population_size=4), 5, 3, seed=42)
        assert a.genomes == b.genomes

    def test_weights_within_range(self):
        cfg = NeatConfig(population_size=8, weight_range=(-0.5, 0.5))
        pop = init_population(cfg, 6, 4, seed=9)
        for g in pop.genomes:
            assert all(-0.5 <= c.weight <= 0.5 for c in g.connections.values())
            assert all(-0.5 <= n.bias <= 0.5 for n in g.nodes.values())

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            init_population(NeatConfig(population_size=1), 2, 2, seed=0)
        with pytest.raises(ValueError):
            init_population(NeatConfig(weight_mutation_rate=1.5), 2, 2, seed=0)
        with pytest.raises(ValueError):
            init_population(NeatConfig(), 0, 2, seed=0)


class TestCompatDistance:
    def test_identity_zero(self):
        g = bare_genome([(1, 0.3), (2, -0.7)])
        assert compat_distance(g, g, NeatConfig()) == 0.0

    def test_excess_disjoint_example(self):
        # {1,2,3} vs {1,2,4,5}: innovations 4,5 excess, 3 disjoint, N_c=4
        a = bare_genome([(1, 0.5), (2, 0.5), (3, 0.5)])
        b = bare_genome([(1, 0.5), (2, 0.5), (4, 0.5), (5, 0.5)])
        cfg = NeatConfig(c_excess=1.0, c_disjoint=1.0, c_weight=0.4)
        assert compat_distance(a, b, cfg) == pytest.approx(0.75, rel=1e-12)
        assert compat_distance(b, a, cfg) == compat_distance(a, b, cfg)

    def test_matching_weight_drift(self):
        a = bare_genome([(i, 0.0) for i in range(5)])
        b = bare_genome([(i, 0.2) for i in range(5)])
        cfg = NeatConfig(c_weight=0.4)
        assert compat_distance(a, b, cfg) == pytest.approx(0.08, rel=1e-12)

    def test_nonnegative_random(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a = bare_genome([(i, rng.normal()) for i in rng.choice(10, 4, replace=False)])
            b = bare_genome([(i, rng.normal()) for i in rng.choice(10, 4, replace=False)])
            d = compat_distance(a, b, NeatConfig())
            assert d >= 0.0
            assert d == compat_distance(b, a, NeatConfig())


class TestSpeciate:
    def test_identical_genomes_single_species(self):
        rng = np.random.default_rng(0)
        g = bare_genome([(0, 1.0)])
        species = speciate([g.copy() for _ in range(7)], [], [], NeatConfig(), rng)
        assert len(species) == 1
        assert sorted(species[0].members) == list(range(7))

    def test_degenerate_threshold_splits_everyone(self):
        # threshold must stay positive, so use one epsilon above zero
        rng = np.random.default_rng(0)
        genomes = [bare_genome([(i, float(i))]) for i in range(6)]
        cfg = NeatConfig(compat_threshold=1e-12)
        species = speciate(genomes, [], [], cfg, rng)
        assert len(species) == 6

    def test_two_clusters_two_species(self):
        rng = np.random.default_rng(1)
        near = [bare_genome([(0, 0.0), (1, 0.0)]) for _ in range(4)]
        far = [bare_genome([(0, 10.0), (1, 10.0)]) for _ in range(4)]
        cfg = NeatConfig(compat_threshold=3.0, c_weight=0.4)
        # distance across clusters is 0.4 * 10 = 4 > 3; within clusters 0
        assert compat_distance(near[0], far[0], cfg) == pytest.approx(4.0)
        species = speciate(near + far, [], [], cfg, rng)
        assert len(species) == 2
        assert sorted(species[0].members) == [0, 1, 2, 3]
        assert sorted(species[1].members) == [4, 5, 6, 7]

    def test_partition_covers_population(self):
        rng = np.random.default_rng(2)
        genomes = [bare_genome([(i % 3, float(i))]) for i in range(12)]
        species = speciate(genomes, [], [], NeatConfig(), rng)
        seen = sorted(m for sp in species for m in sp.members)
        assert seen == list(range(12))


class TestAllot:
    def test_single_species_gets_everything(self):
        cfg = quiet_config(population_size=10, elite_count=1)
        sp = Species(1, bare_genome([(0, 0.0)]), members=[0, 1, 2])
        assert allot_offspring([sp], [5.0, 1.0, 3.0], cfg) == [9]

    def test_equal_adjusted_sums_equal_quotas(self):
        # A: 2 members of fitness 4, B: 4 members of fitness 4 -> equal shares
        cfg = quiet_config(population_size=14, elite_count=0)
        a = Species(1, bare_genome([(0, 0.0)]), members=[0, 1])
        b = Species(2, bare_genome([(0, 0.0)]), members=[2, 3, 4, 5])
        fits = [4.0, 4.0, 4.0, 4.0, 4.0, 4.0]
        assert allot_offspring([a, b], fits, cfg) == [7, 7]

    def test_quotas_sum_exactly(self):
        rng = np.random.default_rng(3)
        cfg = quiet_config(population_size=17, elite_count=2)
        for _ in range(100):
            sizes = rng.integers(1, 6, size=rng.integers(1, 5))
            members = []
            start = 0
            species = []
            for sid, size in enumerate(sizes):
                species.append(
                    Species(sid + 1, bare_genome([(0, 0.0)]), list(range(start, start + size)))
                )
                start += size
            fits = rng.random(start).tolist()
            quotas = allot_offspring(species, fits, cfg)
            assert sum(quotas) == 15
            assert all(q >= 0 for q in quotas)

    def test_all_zero_uniform(self):
        cfg = quiet_config(population_size=9, elite_count=1)
        a = Species(1, bare_genome([(0, 0.0)]), [0])
        b = Species(2, bare_genome([(0, 0.0)]), [1])
        assert allot_offspring([a, b], [2.0, 2.0], cfg) == [4, 4]


class TestSelectParent:
    def test_single_member(self):
        rng = np.random.default_rng(0)
        assert select_parent([4], [0.0, 0.0, 0.0, 0.0, 1.0], rng) == 4

    def test_proportionate_frequencies(self):
        rng = np.random.default_rng(7)
        counts = Counter(
            select_parent([0, 1], [3.0, 1.0], rng) for _ in range(100_000)
        )
        assert counts[0] / 100_000 == pytest.approx(0.75, abs=0.01)
        assert counts[1] / 100_000 == pytest.approx(0.25, abs=0.01)

    def test_all_zero_uniform(self):
        rng = np.random.default_rng(11)
        counts = Counter(
            select_parent([0, 1, 2], [0.0, 0.0, 0.0], rng) for _ in range(60_000)
        )
        for idx in range(3):
            assert counts[idx] / 60_000 == pytest.approx(1 / 3, abs=0.01)


class TestCrossover:
    def test_self_crossover_identity(self):
        rng = np.random.default_rng(0)
        g = bare_genome([(1, 0.4), (2, -0.2)])
        child = crossover(g, g, rng)
        assert child.connections == g.connections
        assert child.nodes == g.nodes

    def test_child_keeps_fitter_topology(self):
        rng = np.random.default_rng(1)
        fitter = bare_genome([(1, 1.0), (2, 1.0), (4, 1.0), (5, 1.0)])
        weaker = bare_genome([(1, 2.0), (2, 2.0), (3, 2.0)])
        child = crossover(fitter, weaker, rng)
        assert sorted(child.connections) == [1, 2, 4, 5]
        # non-matching weights always come from the fitter parent
        assert child.connections[4].weight == 1.0
        assert child.connections[5].weight == 1.0

    def test_matching_gene_coin_flip(self):
        rng = np.random.default_rng(5)
        fitter = bare_genome([(1, 1.0)])
        weaker = bare_genome([(1, 2.0)])
        picks = Counter(
            crossover(fitter, weaker, rng).connections[1].weight for _ in range(20_000)
        )
        assert picks[1.0] / 20_000 == pytest.approx(0.5, abs=0.02)
        assert picks[2.0] / 20_000 == pytest.approx(0.5, abs=0.02)

    def test_orphan_hidden_nodes_dropped(self):
        rng = np.random.default_rng(2)
        fitter = bare_genome([(1, 1.0)])
        fitter.nodes[9] = NodeGene(9, "hidden", 0.0)  # referenced by nothing
        child = crossover(fitter, fitter, rng)
        assert 9 not in child.nodes
        assert child.input_ids() == [0] and child.output_ids() == [1]

    def test_order_parents_tiebreaks(self):
        small = bare_genome([(1, 0.0)])
        big = bare_genome([(1, 0.0), (2, 0.0)])
        assert order_parents(big, small, 1.0, 2.0) == (small, big)
        # fitness tie -> fewer connections wins
        assert order_parents(big, small, 1.0, 1.0) == (small, big)
        # full tie -> first argument
        other = bare_genome([(7, 0.0)])
        assert order_parents(small, other, 1.0, 1.0) == (small, other)


class TestMutate:
    def test_no_probability_no_change(self):
        rng = np.random.default_rng(0)
        tracker = InnovationTracker()
        g = bare_genome([(1, 0.4), (2, -0.2)])
        out = mutate(g, tracker, quiet_config(), rng)
        assert out.connections == g.connections and out.nodes == g.nodes
        assert out is not g

    def test_add_node_weight_rule(self):
        # split (0 -> 1, w=2.5): incoming keeps 2.5, outgoing gets 1.0
        rng = np.random.default_rng(0)
        tracker = InnovationTracker()
        tracker.claim_node_ids(2)
        tracker.claim_innovations(1)
        g = bare_genome([(0, 2.5)])
        out = mutate(g, tracker, quiet_config(node_add_prob=1.0), rng)
        assert not out.connections[0].enabled
        new_node = out.hidden_ids()[0]
        incoming = [c for c in out.connections.values() if c.dst == new_node]
        outgoing = [c for c in out.connections.values() if c.src == new_node]
        assert len(incoming) == 1 and incoming[0].weight == 2.5
        assert len(outgoing) == 1 and outgoing[0].weight == 1.0
        assert len(out.nodes) == len(g.nodes) + 1
        assert len(out.connections) == len(g.connections) + 2

    def test_same_split_same_markers_across_genomes(self):
        rng = np.random.default_rng(0)
        tracker = InnovationTracker()
        tracker.claim_node_ids(2)
        tracker.claim_innovations(1)
        cfg = quiet_config(node_add_prob=1.0)
        a = mutate(bare_genome([(0, 1.0)]), tracker, cfg, rng)
        b = mutate(bare_genome([(0, 5.0)]), tracker, cfg, rng)
        assert sorted(a.connections) == sorted(b.connections)
        assert a.hidden_ids() == b.hidden_ids()

    def test_add_connection_shares_innovation(self):
        rng = np.random.default_rng(1)
        tracker = InnovationTracker()
        tracker.claim_node_ids(4)
        tracker.claim_innovations(1)
        cfg = quiet_config(conn_add_prob=1.0)
        # 2 inputs, 2 outputs, one existing edge; only unconnected pairs remain
        def seed_genome():
            nodes = {
                0: NodeGene(0, "input"),
                1: NodeGene(1, "input"),
                2: NodeGene(2, "output"),
                3: NodeGene(3, "output"),
            }
            return Genome(nodes, {0: ConnectionGene(0, 0, 2, 1.0)}, 2, 2)

        added = set()
        for _ in range(40):
            out = mutate(seed_genome(), tracker, cfg, rng)
            new = [c for k, c in out.connections.items() if k != 0]
            assert len(new) == 1
            added.add((new[0].innovation, new[0].src, new[0].dst))
        # every distinct pair got exactly one marker this generation
        pairs = {(s, d) for _, s, d in added}
        assert len(pairs) == len(added)

    def test_weight_clamped(self):
        rng = np.random.default_rng(3)
        tracker = InnovationTracker()
        cfg = quiet_config(weight_mutation_rate=1.0, bias_mutation_rate=1.0,
                           weight_range=(-0.05, 0.05), perturb_stddev=5.0)
        g = bare_genome([(0, 0.0), (1, 0.0)])
        for _ in range(50):
            g = mutate(g, tracker, cfg, rng)
            assert all(-0.05 <= c.weight <= 0.05 for c in g.connections.values())
            assert all(-0.05 <= n.bias <= 0.05 for n in g.nodes.values())

    def test_delete_node_removes_incident_edges(self):
        rng = np.random.default_rng(4)
        tracker = InnovationTracker()
        tracker.claim_node_ids(2)
        tracker.claim_innovations(1)
        g = mutate(bare_genome([(0, 1.0)]), tracker, quiet_config(node_add_prob=1.0), rng)
        hidden = g.hidden_ids()[0]
        out = mutate(g, tracker, quiet_config(node_delete_prob=1.0), rng)
        assert hidden not in out.nodes
        assert all(hidden not in (c.src, c.dst) for c in out.connections.values())
        assert out.input_ids() == [0] and out.output_ids() == [1]

    def test_inputs_outputs_never_deleted(self):
        rng = np.random.default_rng(5)
        tracker = InnovationTracker()
        g = bare_genome([(0, 1.0)])
        out = mutate(g, tracker, quiet_config(node_delete_prob=1.0), rng)
        assert out.input_ids() == [0] and out.output_ids() == [1]


class TestNextGeneration:
    def run_generation(self, seed=0, pop_size=12, **cfg_kw):
        cfg = NeatConfig(population_size=pop_size, **cfg_kw)
        pop = init_population(cfg, 3, 2, seed=seed)
        rng = np.random.default_rng(seed + 100)
        fits = [float(i) for i in range(pop_size)]
        nxt = next_generation(pop, fits, pop.tracker, cfg, rng)
        return pop, fits, nxt

    def test_elite_preserved_unchanged(self):
        pop, fits, nxt = self.run_generation(elite_count=1)
        best = pop.genomes[len(fits) - 1]
        assert nxt.genomes[0].connections == best.connections
        assert nxt.genomes[0].nodes == best.nodes
        assert nxt.genomes[0] is not best

    def test_population_size_conserved(self):
        for seed in range(5):
            _, _, nxt = self.run_generation(seed=seed)
            assert len(nxt.genomes) == 12
            assert nxt.generation == 1

    def test_deterministic(self):
        _, _, a = self.run_generation(seed=3)
        _, _, b = self.run_generation(seed=3)
        assert a.genomes == b.genomes

    def test_species_cover_new_population(self):
        _, _, nxt = self.run_generation(seed=2)
        seen = sorted(m for sp in nxt.species for m in sp.members)
        assert seen == list(range(12))

    def test_stagnation_removal_optional(self):
        cfg = NeatConfig(population_size=8, stagnation_generations=2)
        pop = init_population(cfg, 2, 2, seed=0)
        rng = np.random.default_rng(0)
        fits = [1.0] * 8
        for _ in range(5):  # constant fitness: stale but the best species survives
            pop = next_generation(pop, fits, pop.tracker, cfg, rng)
            assert len(pop.genomes) == 8
