"""Population-level machinery: speciation, selection, crossover, mutation.

The engine evolves feed-forward genomes under elitism and explicit fitness
sharing. Structural additions that would break the feed-forward contract are
rejected; the cycle test runs over the full gene digraph (disabled genes
included) so that crossover, which can re-enable a matching gene inherited
from either parent, can never stitch an enabled cycle together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .genome import (
    HIDDEN,
    INPUT,
    OUTPUT,
    ConnectionGene,
    Genome,
    InnovationTracker,
    NodeGene,
)

# resampling attempts before an add-connection mutation is skipped
MAX_ADD_ATTEMPTS = 20


@dataclass
class NeatConfig:
    population_size: int = 50
    weight_range: tuple[float, float] = (-30.0, 30.0)
    weight_mutation_rate: float = 0.8
    bias_mutation_rate: float = 0.7
    node_add_prob: float = 0.2
    node_delete_prob: float = 0.2
    conn_add_prob: float = 0.2
    conn_delete_prob: float = 0.2
    compat_threshold: float = 3.0
    c_excess: float = 1.0
    c_disjoint: float = 1.0
    c_weight: float = 0.4
    elite_count: int = 1
    perturb_stddev: float = 1.0
    crossover_prob: float = 0.75
    stagnation_generations: int | None = None

    def validate(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        lo, hi = self.weight_range
        if not lo < hi:
            raise ValueError("weight_range must satisfy min < max")
        for name in (
            "weight_mutation_rate",
            "bias_mutation_rate",
            "node_add_prob",
            "node_delete_prob",
            "conn_add_prob",
            "conn_delete_prob",
            "crossover_prob",
        ):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be a probability in [0, 1]")
        if self.compat_threshold <= 0:
            raise ValueError("compat_threshold must be positive")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must be in [0, population_size)")
        if self.perturb_stddev <= 0:
            raise ValueError("perturb_stddev must be positive")
        if self.stagnation_generations is not None and self.stagnation_generations < 1:
            raise ValueError("stagnation_generations must be >= 1 when set")


@dataclass
class Species:
    id: int
    representative: Genome
    members: list[int] = field(default_factory=list)
    best_fitness: float = -math.inf  # stagnation bookkeeping only
    stale_generations: int = 0


@dataclass
class Population:
    genomes: list[Genome]
    species: list[Species]
    tracker: InnovationTracker
    generation: int = 0


def _clamp(value: float, lo: float, hi: float) -> float:
    return lo if value < lo else hi if value > hi else value


def init_population(
    config: NeatConfig, state_dim: int, action_dim: int, seed: int
) -> Population:
    """Fully-connected minimal genomes, weights and biases from N(0, 1).

    All genomes share the same input-to-output wiring, so the tracker hands
    out one innovation number per (input, output) pair, reused across the
    whole population.
    """
    config.validate()
    if state_dim < 1 or action_dim < 1:
        raise ValueError("state_dim and action_dim must be at least 1")
    rng = np.random.default_rng(seed)
    tracker = InnovationTracker()
    tracker.claim_node_ids(state_dim + action_dim)
    lo, hi = config.weight_range
    input_ids = list(range(state_dim))
    output_ids = list(range(state_dim, state_dim + action_dim))

    genomes = []
    for _ in range(config.population_size):
        biases = rng.standard_normal(action_dim)
        weights = rng.standard_normal(state_dim * action_dim)
        nodes = {i: NodeGene(i, INPUT, 0.0) for i in input_ids}
        for j, out in enumerate(output_ids):
            nodes[out] = NodeGene(out, OUTPUT, _clamp(float(biases[j]), lo, hi))
        connections = {}
        k = 0
        for src in input_ids:
            for dst in output_ids:
                innov = tracker.connection_innovation(src, dst)
                connections[innov] = ConnectionGene(
                    innov, src, dst, _clamp(float(weights[k]), lo, hi)
                )
                k += 1
        genomes.append(Genome(nodes, connections, state_dim, action_dim))

    species = speciate(genomes, [], [], config, rng)
    return Population(genomes, species, tracker, generation=0)


def compat_distance(a: Genome, b: Genome, config: NeatConfig) -> float:
    """Weighted mix of excess genes, disjoint genes, and matching-weight drift.

    Normalised by the larger connection count (floored at 1); symmetric.
    """
    keys_a = a.connections.keys()
    keys_b = b.connections.keys()
    n_c = max(len(keys_a), len(keys_b), 1)
    max_a = max(keys_a, default=-1)
    max_b = max(keys_b, default=-1)

    matching = keys_a & keys_b
    n_excess = 0
    n_disjoint = 0
    for k in keys_a:
        if k not in matching:
            if k > max_b:
                n_excess += 1
            else:
                n_disjoint += 1
    for k in keys_b:
        if k not in matching:
            if k > max_a:
                n_excess += 1
            else:
                n_disjoint += 1

    if matching:
        drift = sum(
            abs(a.connections[k].weight - b.connections[k].weight) for k in matching
        ) / len(matching)
    else:
        drift = 0.0
    return (
        config.c_excess * n_excess / n_c
        + config.c_disjoint * n_disjoint / n_c
        + config.c_weight * drift
    )


def speciate(
    genomes: list[Genome],
    previous_species: list[Species],
    previous_genomes: list[Genome],
    config: NeatConfig,
    rng: np.random.Generator,
) -> list[Species]:
    """Partition the population into species.

    Surviving species are seeded, in id order, with a representative drawn
    uniformly from their previous-generation members. Each genome joins the
    first compatible species; incompatible genomes found a new one with
    themselves as representative. Species left empty are dropped.
    """
    species: list[Species] = []
    for prev in sorted(previous_species, key=lambda s: s.id):
        rep = previous_genomes[prev.members[int(rng.integers(len(prev.members)))]]
        species.append(
            Species(
                prev.id,
                rep,
                [],
                best_fitness=prev.best_fitness,
                stale_generations=prev.stale_generations,
            )
        )
    next_id = max((s.id for s in species), default=0) + 1

    for idx, genome in enumerate(genomes):
        for sp in species:
            if compat_distance(genome, sp.representative, config) < config.compat_threshold:
                sp.members.append(idx)
                break
        else:
            species.append(Species(next_id, genome, [idx]))
            next_id += 1
    return [sp for sp in species if sp.members]


def allot_offspring(
    species_list: list[Species], fitnesses: list[float], config: NeatConfig
) -> list[int]:
    """Offspring quota per species under explicit fitness sharing.

    Fitness is shifted by the generation minimum so proportionate selection
    has nonnegative mass, each member's share is divided by its species size,
    and quotas are rounded by largest remainder so they always total exactly
    population_size - elite_count. A zero total (all members equal) falls
    back to uniform quotas.
    """
    slots = config.population_size - config.elite_count
    shift = min(fitnesses)
    sums = []
    for sp in species_list:
        sums.append(sum(fitnesses[m] - shift for m in sp.members) / len(sp.members))
    total = sum(sums)
    if total <= 0.0:
        shares = [1.0 / len(species_list)] * len(species_list)
    else:
        shares = [s / total for s in sums]

    raw = [slots * s for s in shares]
    quotas = [int(math.floor(r)) for r in raw]
    leftover = slots - sum(quotas)
    by_remainder = sorted(range(len(raw)), key=lambda i: (quotas[i] - raw[i], i))
    for i in by_remainder[:leftover]:
        quotas[i] += 1
    return quotas


def select_parent(
    members: list[int], shifted_fitness, rng: np.random.Generator
) -> int:
    """Fitness-proportionate draw; returns the chosen population index.

    `shifted_fitness` is indexed by population position and must already be
    nonnegative. All-zero mass degenerates to a uniform draw.
    """
    total = 0.0
    for m in members:
        total += shifted_fitness[m]
    if total <= 0.0:
        return members[int(rng.integers(len(members)))]
    pick = rng.random() * total
    acc = 0.0
    for m in members:
        acc += shifted_fitness[m]
        if pick < acc:
            return m
    return members[-1]


def order_parents(a: Genome, b: Genome, fitness_a: float, fitness_b: float):
    """Resolve (fitter, weaker); ties prefer fewer connections, then `a`."""
    if fitness_a > fitness_b:
        return a, b
    if fitness_b > fitness_a:
        return b, a
    if len(b.connections) < len(a.connections):
        return b, a
    return a, b


def crossover(fitter: Genome, weaker: Genome, rng: np.random.Generator) -> Genome:
    """Compose a child from two innovation-aligned parents.

    Matching genes come from either parent with probability 1/2 (weight and
    enabled flag travel together); disjoint and excess genes come only from
    the fitter parent, so the child's wiring is a subset of the fitter's and
    stays acyclic.
    """
    connections: dict[int, ConnectionGene] = {}
    for innov in sorted(fitter.connections):
        gene = fitter.connections[innov]
        other = weaker.connections.get(innov)
        if other is not None and rng.random() < 0.5:
            gene = other
        connections[innov] = ConnectionGene(
            gene.innovation, gene.src, gene.dst, gene.weight, gene.enabled
        )

    keep = {nid for c in connections.values() for nid in (c.src, c.dst)}
    nodes = {}
    for nid, node in fitter.nodes.items():
        if nid in keep or node.kind != HIDDEN:
            nodes[nid] = NodeGene(node.id, node.kind, node.bias)
    return Genome(nodes, connections, fitter.state_dim, fitter.action_dim)


def _creates_cycle(genome: Genome, src: int, dst: int) -> bool:
    # walk the full gene digraph: a path dst -> ... -> src means adding
    # src -> dst closes a loop
    if src == dst:
        return True
    succ: dict[int, list[int]] = {}
    for c in genome.connections.values():
        succ.setdefault(c.src, []).append(c.dst)
    stack = [dst]
    seen = set()
    while stack:
        nid = stack.pop()
        if nid == src:
            return True
        if nid in seen:
            continue
        seen.add(nid)
        stack.extend(succ.get(nid, ()))
    return False


def mutate(
    genome: Genome,
    tracker: InnovationTracker,
    config: NeatConfig,
    rng: np.random.Generator,
) -> Genome:
    """Return a mutated copy; mutations that cannot apply are skipped.

    Splitting a connection keeps the old weight on the incoming link and puts
    weight 1 on the outgoing one. Weights and biases are clamped into the
    configured range after every perturbation.
    """
    g = genome.copy()
    g.fitness = None
    lo, hi = config.weight_range
    sigma = config.perturb_stddev

    for innov in sorted(g.connections):
        if rng.random() < config.weight_mutation_rate:
            conn = g.connections[innov]
            conn.weight = _clamp(conn.weight + sigma * rng.standard_normal(), lo, hi)

    for nid in sorted(g.nodes):
        node = g.nodes[nid]
        if node.kind == INPUT:
            continue
        if rng.random() < config.bias_mutation_rate:
            node.bias = _clamp(node.bias + sigma * rng.standard_normal(), lo, hi)

    if rng.random() < config.node_add_prob:
        enabled = [g.connections[k] for k in sorted(g.connections) if g.connections[k].enabled]
        if enabled:
            conn = enabled[int(rng.integers(len(enabled)))]
            conn.enabled = False
            nid = tracker.node_for_split(conn.innovation)
            g.nodes[nid] = NodeGene(nid, HIDDEN, 0.0)
            first = tracker.connection_innovation(conn.src, nid)
            g.connections[first] = ConnectionGene(first, conn.src, nid, conn.weight)
            second = tracker.connection_innovation(nid, conn.dst)
            g.connections[second] = ConnectionGene(second, nid, conn.dst, 1.0)

    if rng.random() < config.conn_add_prob:
        sources = g.input_ids() + g.hidden_ids()
        targets = g.hidden_ids() + g.output_ids()
        for _ in range(MAX_ADD_ATTEMPTS):
            src = sources[int(rng.integers(len(sources)))]
            dst = targets[int(rng.integers(len(targets)))]
            if src == dst or g.has_edge(src, dst) or _creates_cycle(g, src, dst):
                continue
            innov = tracker.connection_innovation(src, dst)
            weight = _clamp(float(rng.standard_normal()), lo, hi)
            g.connections[innov] = ConnectionGene(innov, src, dst, weight)
            break

    if rng.random() < config.conn_delete_prob:
        keys = sorted(g.connections)
        if keys:
            del g.connections[keys[int(rng.integers(len(keys)))]]

    if rng.random() < config.node_delete_prob:
        hidden = g.hidden_ids()
        if hidden:
            nid = hidden[int(rng.integers(len(hidden)))]
            del g.nodes[nid]
            g.connections = {
                k: c for k, c in g.connections.items() if nid not in (c.src, c.dst)
            }
    return g


def next_generation(
    population: Population,
    fitnesses: list[float],
    tracker: InnovationTracker,
    config: NeatConfig,
    rng: np.random.Generator,
) -> Population:
    """One full turnover: elitism, sharing-based quotas, breeding, speciation."""
    genomes = population.genomes
    if len(fitnesses) != len(genomes):
        raise ValueError("one fitness per genome required")

    order = sorted(range(len(genomes)), key=lambda i: (-fitnesses[i], i))
    elites = []
    for i in order[: config.elite_count]:
        elite = genomes[i].copy()
        elite.fitness = fitnesses[i]
        elites.append(elite)

    shift = min(fitnesses)
    shifted = [f - shift for f in fitnesses]

    species = population.species
    best_index = order[0]
    for sp in species:
        best = max(fitnesses[m] for m in sp.members)
        if best > sp.best_fitness:
            sp.best_fitness = best
            sp.stale_generations = 0
        else:
            sp.stale_generations += 1
    if config.stagnation_generations is not None:
        active = [
            sp
            for sp in species
            if sp.stale_generations < config.stagnation_generations
            or best_index in sp.members
        ]
        if active:
            species = active

    quotas = allot_offspring(species, fitnesses, config)
    surviving = [sp for sp, q in zip(species, quotas) if q > 0]

    tracker.reset_generation()
    children = list(elites)
    for sp, quota in zip(species, quotas):
        for _ in range(quota):
            first = select_parent(sp.members, shifted, rng)
            if rng.random() < config.crossover_prob:
                second = select_parent(sp.members, shifted, rng)
                fitter, weaker = order_parents(
                    genomes[first], genomes[second], fitnesses[first], fitnesses[second]
                )
                child = crossover(fitter, weaker, rng)
            else:
                child = genomes[first].copy()
            children.append(mutate(child, tracker, config, rng))

    new_species = speciate(children, surviving, genomes, config, rng)
    return Population(children, new_species, tracker, population.generation + 1)
