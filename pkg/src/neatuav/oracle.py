"""Independent brute-force references for verification and baselines.

The grid search solves the static placement-and-power problem by exhaustive
enumeration and serves as the repository's ground truth for how much sum
spectral efficiency the scene actually offers. The random policy is the
sanity floor a trained controller has to clear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, channel_gain, distance_3d
from .environment import (
    ALPHA_FLOOR,
    Action,
    RewardWeights,
    Scene,
    pair_users,
    reset,
    reward,
    step,
)
from .sim import EpisodeTrace, EvalMetrics


class InfeasibleGridError(RuntimeError):
    """Fairness pruning left no feasible (position, power-split) candidate."""


@dataclass(frozen=True)
class GridSpec:
    xy_spacing: float = 5.0
    heights: tuple[float, ...] = (10.0, 30.0, 50.0)
    alpha_step: float = 0.01
    enforce_fairness: bool = False

    def validate(self, scene: Scene) -> None:
        if self.xy_spacing <= 0:
            raise ValueError("xy_spacing must be positive")
        if not 0 < self.alpha_step <= 0.5:
            raise ValueError("alpha_step must be in (0, 0.5]")
        if not self.heights:
            raise ValueError("at least one height required")
        if min(self.heights) < scene.min_height:
            raise ValueError("grid heights must respect the minimum UAV height")


@dataclass
class GridSearchResult:
    position: tuple[float, float, float]
    alpha: tuple[float, ...]  # per user
    sum_se: float
    feasible: bool
    grid: GridSpec


def _axis(side: float, spacing: float) -> list[float]:
    half = side / 2.0
    count = int(math.floor(side / spacing + 1e-9)) + 1
    return [-half + i * spacing for i in range(count)]


def _alpha_grid(alpha_step: float) -> np.ndarray:
    k_max = int(math.floor(1.0 / alpha_step + 1e-9))
    values = [k * alpha_step for k in range(1, k_max + 1)]
    return np.array(
        [a for a in values if ALPHA_FLOOR - 1e-12 <= a <= 1.0 - ALPHA_FLOOR + 1e-12]
    )


def grid_search(
    scene: Scene,
    params: ChannelParams,
    weights: RewardWeights,
    grid: GridSpec,
) -> GridSearchResult:
    """Enumerate every grid placement and per-cluster power split.

    Pairing is recomputed at each candidate position. The per-cluster sums
    are independent, so each cluster's split is optimized separately, which
    equals a full cartesian scan with ties resolved in scan order
    (x, then y, then h, then alpha ascending). With enforce_fairness any
    candidate leaving a user below weights.r_min_se is discarded; an empty
    feasible set raises InfeasibleGridError.
    """
    grid.validate(scene)
    alphas = _alpha_grid(grid.alpha_step)
    coef = params.snr_coefficient
    r_min = weights.r_min_se

    best_sum = -math.inf
    best_pos = None
    best_alpha = None

    for x in _axis(scene.side, grid.xy_spacing):
        for y in _axis(scene.side, grid.xy_spacing):
            for h in grid.heights:
                uav = (x, y, h)
                gains = [
                    channel_gain(distance_3d(uav, user), params)
                    for user in scene.users
                ]
                clusters = pair_users(gains)
                total = 0.0
                user_alpha = [0.0] * scene.n_users
                feasible = True
                for cluster in clusters:
                    members = cluster.members
                    if len(members) == 2:
                        s = cluster.strong
                        w = members[1] if members[0] == s else members[0]
                        snr_s = coef * gains[s]
                        snr_w = coef * gains[w]
                        se_s = np.log2(1.0 + snr_s * alphas)
                        se_w = np.log2(
                            1.0 + snr_w * (1.0 - alphas) / (snr_w * alphas + 1.0)
                        )
                        sums = se_s + se_w
                        if grid.enforce_fairness:
                            valid = (se_s >= r_min) & (se_w >= r_min)
                            if not valid.any():
                                feasible = False
                                break
                            sums = np.where(valid, sums, -math.inf)
                        k = int(np.argmax(sums))
                        total += float(sums[k])
                        user_alpha[s] = float(alphas[k])
                        user_alpha[w] = 1.0 - float(alphas[k])
                    else:
                        u = members[0]
                        se_u = np.log2(1.0 + coef * gains[u] * alphas)
                        if grid.enforce_fairness:
                            valid = se_u >= r_min
                            if not valid.any():
                                feasible = False
                                break
                            se_u = np.where(valid, se_u, -math.inf)
                        k = int(np.argmax(se_u))
                        total += float(se_u[k])
                        user_alpha[u] = float(alphas[k])
                if feasible and total > best_sum:
                    best_sum = total
                    best_pos = uav
                    best_alpha = tuple(user_alpha)

    if best_pos is None:
        raise InfeasibleGridError(
            "no grid candidate satisfies the minimum rate for every user"
        )
    return GridSearchResult(best_pos, best_alpha, best_sum, True, grid)


def random_policy(
    scene: Scene,
    params: ChannelParams,
    weights: RewardWeights,
    steps: int,
    seed: int,
) -> EvalMetrics:
    """Uniform random actions; same metrics shape as a champion evaluation."""
    rng = np.random.default_rng(seed)
    n_clusters = scene.n_clusters
    state = reset(scene, params)
    trace = EpisodeTrace()
    total = 0.0
    for _ in range(steps):
        bits = rng.integers(0, 2, size=3 + n_clusters)
        signs = [1 if b else -1 for b in bits]
        action = Action(signs[0], signs[1], signs[2], tuple(signs[3:]))
        state = step(state, action, scene, params)
        value = reward(state, params, weights)
        total += value
        trace.positions.append((state.x, state.y, state.h))
        trace.alphas.append(tuple(state.alpha))
        trace.ses.append(tuple(state.se))
        trace.rewards.append(value)
    r_min = weights.r_min_se
    return EvalMetrics(
        mean_reward=total / steps,
        mean_sum_se=trace.mean_sum_se(),
        per_user_mean_se=trace.per_user_mean_se(),
        satisfaction_fraction=trace.satisfaction_fraction(r_min),
        all_satisfied_fraction=trace.all_satisfied_fraction(r_min),
        final_position=trace.positions[-1],
        trace=trace,
    )
