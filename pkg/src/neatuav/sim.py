"""Training and evaluation orchestration.

A genome's fitness is the mean per-step reward of one deterministic episode,
so fitness is comparable across episode lengths and identical replays yield
identical traces. Generations evolve through the neuroevolution engine;
the champion is the best genome ever evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelParams, dbm_to_watts
from .environment import (
    RewardWeights,
    Scene,
    build_state,
    decode_action,
    reset,
    reward,
    step,
)
from .evolution import NeatConfig, init_population, next_generation
from .genome import FeedForwardNetwork, Genome


@dataclass(frozen=True)
class Schedule:
    generations: int = 1000  # E
    steps_per_episode: int = 300  # T
    seeds: tuple[int, ...] = ()

    def validate(self) -> None:
        if self.generations < 1 or self.steps_per_episode < 1:
            raise ValueError("generations and steps_per_episode must be >= 1")


@dataclass
class GenerationRecord:
    generation: int
    best_fitness: float
    mean_fitness: float
    species_count: int
    best_mean_sum_se: float  # bit/s/Hz, generation-best genome
    min_rate_satisfaction: float  # fraction of (user, step) pairs at >= r_min_se


@dataclass
class SweepPoint:
    pt_dbm: float
    mean_se: float  # mean sum spectral efficiency over the test episode
    ee: float  # bit/s/Hz per watt of transmit plus static power


@dataclass
class EpisodeTrace:
    positions: list[tuple[float, float, float]] = field(default_factory=list)
    alphas: list[tuple[float, ...]] = field(default_factory=list)
    ses: list[tuple[float, ...]] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rewards)

    def mean_sum_se(self) -> float:
        return sum(sum(row) for row in self.ses) / len(self.ses)

    def per_user_mean_se(self) -> tuple[float, ...]:
        n = len(self.ses[0])
        totals = [0.0] * n
        for row in self.ses:
            for i, v in enumerate(row):
                totals[i] += v
        return tuple(t / len(self.ses) for t in totals)

    def satisfaction_fraction(self, r_min_se: float) -> float:
        """Fraction of (user, step) pairs meeting the minimum rate."""
        hits = sum(1 for row in self.ses for v in row if v >= r_min_se)
        return hits / (len(self.ses) * len(self.ses[0]))

    def all_satisfied_fraction(self, r_min_se: float) -> float:
        """Fraction of steps on which every user meets the minimum rate."""
        hits = sum(1 for row in self.ses if min(row) >= r_min_se)
        return hits / len(self.ses)


@dataclass
class EvalMetrics:
    mean_reward: float
    mean_sum_se: float
    per_user_mean_se: tuple[float, ...]
    satisfaction_fraction: float
    all_satisfied_fraction: float
    final_position: tuple[float, float, float]
    trace: EpisodeTrace


def run_episode(
    genome: Genome,
    scene: Scene,
    params: ChannelParams,
    weights: RewardWeights,
    steps: int,
) -> tuple[float, EpisodeTrace]:
    """Roll one deterministic episode; returns (mean reward, full trace)."""
    if genome.state_dim != scene.state_dim or genome.action_dim != scene.action_dim:
        raise ValueError(
            f"genome is {genome.state_dim}->{genome.action_dim} but the scene "
            f"needs {scene.state_dim}->{scene.action_dim}"
        )
    net = FeedForwardNetwork(genome)
    activate = net.activate
    n_clusters = scene.n_clusters
    state = reset(scene, params)
    trace = EpisodeTrace()
    positions = trace.positions
    alphas = trace.alphas
    ses = trace.ses
    rewards = trace.rewards
    total = 0.0
    for _ in range(steps):
        outputs = activate(build_state(state, scene))
        action = decode_action(outputs.tolist(), n_clusters)
        state = step(state, action, scene, params)
        value = reward(state, params, weights)
        total += value
        positions.append((state.x, state.y, state.h))
        alphas.append(tuple(state.alpha))
        ses.append(tuple(state.se))
        rewards.append(value)
    return total / steps, trace


def evaluate_champion(
    genome: Genome,
    scene: Scene,
    params: ChannelParams,
    weights: RewardWeights,
    steps: int,
) -> EvalMetrics:
    mean_reward, trace = run_episode(genome, scene, params, weights, steps)
    return EvalMetrics(
        mean_reward=mean_reward,
        mean_sum_se=trace.mean_sum_se(),
        per_user_mean_se=trace.per_user_mean_se(),
        satisfaction_fraction=trace.satisfaction_fraction(weights.r_min_se),
        all_satisfied_fraction=trace.all_satisfied_fraction(weights.r_min_se),
        final_position=trace.positions[-1],
        trace=trace,
    )


@dataclass
class TrainResult:
    champion: Genome
    records: list[GenerationRecord]
    seed: int


def train(config, seed: int | None = None, out_dir=None) -> TrainResult:
    """Evolve a controller for `schedule.generations` generations.

    Fully deterministic in (config, seed). When out_dir is given, writes
    generations.csv and champion.json there.
    """
    scene: Scene = config.scene
    params: ChannelParams = config.channel
    weights: RewardWeights = config.reward
    neat: NeatConfig = config.neat
    schedule: Schedule = config.schedule
    if seed is None:
        seed = config.master_seed

    population = init_population(neat, scene.state_dim, scene.action_dim, seed)
    evo_rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    steps = schedule.steps_per_episode

    champion: Genome | None = None
    champion_fitness = -math.inf
    records: list[GenerationRecord] = []

    for gen in range(schedule.generations):
        fitnesses = []
        best_i = 0
        best_trace = None
        for i, genome in enumerate(population.genomes):
            fitness, trace = run_episode(genome, scene, params, weights, steps)
            genome.fitness = fitness
            fitnesses.append(fitness)
            if best_trace is None or fitness > fitnesses[best_i]:
                best_i = i
                best_trace = trace
        if fitnesses[best_i] > champion_fitness:
            champion_fitness = fitnesses[best_i]
            champion = population.genomes[best_i].copy()

        records.append(
            GenerationRecord(
                generation=gen,
                best_fitness=fitnesses[best_i],
                mean_fitness=sum(fitnesses) / len(fitnesses),
                species_count=len(population.species),
                best_mean_sum_se=best_trace.mean_sum_se(),
                min_rate_satisfaction=best_trace.satisfaction_fraction(weights.r_min_se),
            )
        )
        if gen + 1 < schedule.generations:
            population = next_generation(
                population, fitnesses, population.tracker, neat, evo_rng
            )

    result = TrainResult(champion=champion, records=records, seed=seed)
    if out_dir is not None:
        from . import output

        output.write_run_outputs(out_dir, result)
    return result


def power_sweep(
    genome: Genome,
    scene: Scene,
    params: ChannelParams,
    weights: RewardWeights,
    p_min_dbm: float,
    p_max_dbm: float,
    step_dbm: float,
    p_static_dbm: float,
    steps: int,
) -> list[SweepPoint]:
    """Test the trained controller over an inclusive transmit-power grid.

    Energy efficiency divides the episode-mean sum spectral efficiency by the
    transmit power plus a fixed static consumption, both in watts.
    """
    if not (p_min_dbm < p_max_dbm and step_dbm > 0):
        raise ValueError("need p_min_dbm < p_max_dbm and step_dbm > 0")
    static_w = dbm_to_watts(p_static_dbm)
    count = int(round((p_max_dbm - p_min_dbm) / step_dbm)) + 1
    points = []
    for i in range(count):
        pt_dbm = p_min_dbm + i * step_dbm
        pt_w = dbm_to_watts(pt_dbm)
        test_params = replace(params, p_t_w=pt_w)
        metrics = evaluate_champion(genome, scene, test_params, weights, steps)
        points.append(
            SweepPoint(pt_dbm, metrics.mean_sum_se, metrics.mean_sum_se / (pt_w + static_w))
        )
    return points


@dataclass
class SeedStats:
    """Per-generation aggregate over independent training runs."""

    generations: list[int]
    best_mean: list[float]
    best_std: list[float]
    mean_mean: list[float]
    mean_std: list[float]
    seeds: list[int]


def multi_seed(config, n_seeds: int) -> SeedStats:
    """Train once per seed and aggregate mean and one-sigma spread."""
    if n_seeds < 2:
        raise ValueError("n_seeds must be at least 2")
    seeds = list(config.schedule.seeds)[:n_seeds]
    while len(seeds) < n_seeds:
        seeds.append(config.master_seed + len(seeds))

    curves_best = []
    curves_mean = []
    for seed in seeds:
        result = train(config, seed=seed)
        curves_best.append([r.best_fitness for r in result.records])
        curves_mean.append([r.mean_fitness for r in result.records])

    best = np.asarray(curves_best)
    mean = np.asarray(curves_mean)
    return SeedStats(
        generations=list(range(best.shape[1])),
        best_mean=best.mean(axis=0).tolist(),
        best_std=best.std(axis=0).tolist(),
        mean_mean=mean.mean(axis=0).tolist(),
        mean_std=mean.std(axis=0).tolist(),
        seeds=seeds,
    )
