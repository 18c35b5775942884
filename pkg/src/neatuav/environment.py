"""Deterministic NOMA downlink environment around a mobile UAV base station.

Users are paired strongest-with-weakest into clusters once per episode; the
SIC role (who decodes first) is re-evaluated every step from the current
gains. Per-cluster power is split by a coefficient pair that always sums to
one, nudged by the controller in +/-alpha_step moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import ChannelParams, channel_gain, distance_3d

# keeps every coefficient strictly inside (0, 1) with one alpha_step of margin
ALPHA_FLOOR = 0.01


@dataclass(frozen=True)
class Scene:
    side: float = 100.0  # L, square area side (m)
    users: tuple[tuple[float, float], ...] = (
        (4.0, 15.0),
        (-44.0, -49.0),
        (-5.0, 21.0),
        (47.0, 49.0),
    )
    min_height: float = 10.0  # h_0 (m)
    start: tuple[float, float, float] = (0.0, 0.0, 50.0)
    move_x: float = 1.0  # per-step displacement magnitudes (m)
    move_y: float = 1.0
    move_h: float = 1.0
    alpha_step: float = 0.01  # power-coefficient step per action

    def validate(self) -> None:
        if self.side <= 0:
            raise ValueError("side must be positive")
        if not self.users:
            raise ValueError("at least one user required")
        half = self.side / 2.0
        for x, y in self.users:
            if abs(x) > half or abs(y) > half:
                raise ValueError(f"user ({x}, {y}) outside the service area")
        if self.min_height <= 0:
            raise ValueError("min_height must be positive")
        if min(self.move_x, self.move_y, self.move_h) <= 0:
            raise ValueError("move magnitudes must be positive")
        if not 0 < self.alpha_step <= 0.5:
            raise ValueError("alpha_step must be in (0, 0.5]")
        sx, sy, sh = self.start
        if abs(sx) > half or abs(sy) > half or sh < self.min_height:
            raise ValueError("start position outside the allowed box")

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_clusters(self) -> int:
        return (len(self.users) + 1) // 2

    @property
    def state_dim(self) -> int:
        return 4 * len(self.users) + 1

    @property
    def action_dim(self) -> int:
        return 3 + self.n_clusters


@dataclass(frozen=True)
class Cluster:
    members: tuple[int, ...]  # user indices, ascending
    strong: int  # member with the higher current gain


@dataclass(frozen=True)
class RewardWeights:
    w_rate: float = 1.0  # fair-sum-rate term
    w_sat: float = 100.0  # per-user minimum-rate satisfaction bonus
    w_unsat: float = 1.0  # rate credit for users still below the minimum
    r_min_se: float = 0.5  # minimum spectral efficiency R_min/W (bit/s/Hz)

    def validate(self) -> None:
        if min(self.w_rate, self.w_sat, self.w_unsat, self.r_min_se) < 0:
            raise ValueError("reward weights must be nonnegative")


@dataclass(frozen=True)
class Action:
    d_x: int  # each in {+1, -1}
    d_y: int
    d_h: int
    d_alpha: tuple[int, ...]  # one per cluster, in cluster-list order


@dataclass(slots=True)
class EnvState:
    x: float
    y: float
    h: float
    alpha: list[float]  # per-user power coefficient
    gains: list[float]  # per-user channel gain (linear)
    se: list[float]  # per-user spectral efficiency (bit/s/Hz)
    clusters: tuple[Cluster, ...]
    step_index: int

    @property
    def uav(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.h)


def pair_users(gains) -> tuple[Cluster, ...]:
    """Strong-weak pairing: k-th best gain with k-th worst, ties by index.

    An odd leftover user forms a singleton cluster that keeps the whole
    cluster power to itself.
    """
    n = len(gains)
    order = sorted(range(n), key=lambda i: (-gains[i], i))
    clusters = []
    for k in range(n // 2):
        a, b = order[k], order[n - 1 - k]
        members = (a, b) if a < b else (b, a)
        clusters.append(Cluster(members, strong=a))
    if n % 2:
        mid = order[n // 2]
        clusters.append(Cluster((mid,), strong=mid))
    return tuple(clusters)


def _strong_member(members, gains) -> int:
    return min(members, key=lambda i: (-gains[i], i))


def _beta(user: int, state: EnvState) -> float:
    """Residual-interference coefficient seen by `user` after SIC."""
    for cluster in state.clusters:
        if user in cluster.members:
            if user == cluster.strong or len(cluster.members) == 1:
                return 0.0
            return state.alpha[cluster.strong]
    raise ValueError(f"user {user} not in any cluster")


def snr(user: int, state: EnvState, params: ChannelParams) -> float:
    return params.p_t_w * params.mimo_gain * state.gains[user] / params.noise_w


def sinr(user: int, state: EnvState, params: ChannelParams) -> float:
    s = snr(user, state, params)
    return s * state.alpha[user] / (s * _beta(user, state) + 1.0)


def rate_se(user: int, state: EnvState, params: ChannelParams) -> float:
    return math.log2(1.0 + sinr(user, state, params))


def sum_rate_se(state: EnvState, params: ChannelParams) -> float:
    return sum(rate_se(u, state, params) for u in range(len(state.gains)))


def _se_all(alpha, gains, clusters, params) -> list[float]:
    # same arithmetic as rate_se()/sinr(), unrolled per cluster for the hot loop
    coef = params.p_t_w * params.mimo_gain / params.noise_w
    se = [0.0] * len(gains)
    log2 = math.log2
    for cluster in clusters:
        members = cluster.members
        if len(members) == 2:
            s = cluster.strong
            w = members[1] if members[0] == s else members[0]
            snr_s = coef * gains[s]
            snr_w = coef * gains[w]
            se[s] = log2(1.0 + snr_s * alpha[s])
            se[w] = log2(1.0 + snr_w * alpha[w] / (snr_w * alpha[s] + 1.0))
        else:
            u = members[0]
            se[u] = log2(1.0 + coef * gains[u] * alpha[u])
    return se


def reward(state: EnvState, params: ChannelParams, weights: RewardWeights) -> float:
    """Fairness-gated sum rate plus satisfaction and catch-up terms.

    The sum-rate term only counts when every user meets the minimum spectral
    efficiency; each satisfied user adds w_sat; unsatisfied users contribute
    their own rate scaled by w_unsat.
    """
    r_min = weights.r_min_se
    total = 0.0
    satisfied = 0
    lagging = 0.0
    for v in state.se:
        total += v
        if v >= r_min:
            satisfied += 1
        else:
            lagging += v
    value = weights.w_sat * satisfied + weights.w_unsat * lagging
    if satisfied == len(state.se):
        value += weights.w_rate * total
    return value


def build_state(state: EnvState, scene: Scene) -> list[float]:
    """Observation vector: per user (dx/L, dy/L, alpha, log10(gain)/10), then h/L."""
    side = scene.side
    out = []
    for i, (ux, uy) in enumerate(scene.users):
        out.append((state.x - ux) / side)
        out.append((state.y - uy) / side)
        out.append(state.alpha[i])
        out.append(math.log10(state.gains[i]) / 10.0)
    out.append(state.h / side)
    return out


def decode_action(outputs, n_clusters: int | None = None) -> Action:
    """Map raw network outputs to signed unit moves; value <= 0 decodes to -1."""
    if n_clusters is not None and len(outputs) != 3 + n_clusters:
        raise ValueError(
            f"expected {3 + n_clusters} outputs, got {len(outputs)}"
        )
    if len(outputs) < 4:
        raise ValueError("action vector needs at least 4 components")
    signs = [1 if v > 0.0 else -1 for v in outputs]
    return Action(signs[0], signs[1], signs[2], tuple(signs[3:]))


def _gains_at(x: float, y: float, h: float, scene: Scene, params: ChannelParams):
    # mirrors channel_gain(distance_3d(...)) op for op; kept inline for speed
    c = params.intercept
    neg_a = -params.exponent
    sqrt = math.sqrt
    gains = []
    for ux, uy in scene.users:
        dx = x - ux
        dy = y - uy
        gains.append(c * sqrt(dx * dx + dy * dy + h * h) ** neg_a)
    return gains


def reset(scene: Scene, params: ChannelParams) -> EnvState:
    """Episode start: UAV at the scene start, every pair split 50/50.

    Pairing is computed from the initial gains and stays fixed for the whole
    episode; only the SIC role inside each cluster follows the gains later.
    """
    x, y, h = scene.start
    gains = _gains_at(x, y, h, scene, params)
    clusters = pair_users(gains)
    alpha = [0.5] * scene.n_users
    for cluster in clusters:
        if len(cluster.members) == 1:
            alpha[cluster.members[0]] = 1.0
    se = _se_all(alpha, gains, clusters, params)
    return EnvState(x, y, h, alpha, gains, se, clusters, 0)


def step(state: EnvState, action: Action, scene: Scene, params: ChannelParams) -> EnvState:
    """Apply one action: clamped motion, coefficient nudge, link refresh.

    The d_alpha component acts on the coefficient of the member that was
    designated strong in the observed state; its partner keeps the
    complement. Pure function: the input state is never modified.
    """
    if len(action.d_alpha) != len(state.clusters):
        raise ValueError(
            f"expected {len(state.clusters)} power actions, got {len(action.d_alpha)}"
        )
    half = scene.side / 2.0
    x = state.x + action.d_x * scene.move_x
    x = -half if x < -half else half if x > half else x
    y = state.y + action.d_y * scene.move_y
    y = -half if y < -half else half if y > half else y
    h = state.h + action.d_h * scene.move_h
    if h < scene.min_height:
        h = scene.min_height

    alpha = list(state.alpha)
    hi = 1.0 - ALPHA_FLOOR
    for k, cluster in enumerate(state.clusters):
        members = cluster.members
        if len(members) == 1:
            continue
        s = cluster.strong
        w = members[1] if members[0] == s else members[0]
        a = alpha[s] + action.d_alpha[k] * scene.alpha_step
        a = ALPHA_FLOOR if a < ALPHA_FLOOR else hi if a > hi else a
        alpha[s] = a
        alpha[w] = 1.0 - a

    gains = _gains_at(x, y, h, scene, params)
    clusters = state.clusters
    for k, cluster in enumerate(clusters):
        members = cluster.members
        if len(members) == 2:
            i, j = members
            strong = i if gains[i] >= gains[j] else j  # members ascending, tie -> i
        else:
            strong = members[0]
        if strong != cluster.strong:
            if clusters is state.clusters:
                clusters = list(clusters)
            clusters[k] = Cluster(cluster.members, strong)
    if clusters is not state.clusters:
        clusters = tuple(clusters)
    se = _se_all(alpha, gains, clusters, params)
    return EnvState(x, y, h, alpha, gains, se, clusters, state.step_index + 1)
