"""Run configuration: sectioned key-value files, defaults, unit conversion.

A config file has sections [scene], [channel], [reward], [neat], [schedule],
[sweep], [run]; every key is optional and missing keys take the defaults
below, so an empty file describes the default experiment. Powers enter in
dBm and are converted to watts exactly once here; the antenna counts
multiply into the MIMO gain.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .channel import ChannelParams, dbm_to_watts
from .environment import RewardWeights, Scene
from .evolution import NeatConfig
from .sim import Schedule


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelInputs:
    """Channel section exactly as written in the file (input units)."""

    intercept: float = 10.0 ** -6.4
    exponent: float = 2.0
    noise_dbm: float = -84.0
    p_t_dbm: float = 20.0
    n_uav_antennas: int = 8
    n_ue_antennas: int = 8
    bandwidth_hz: float = 2e9

    def to_params(self) -> ChannelParams:
        return ChannelParams(
            intercept=self.intercept,
            exponent=self.exponent,
            noise_w=dbm_to_watts(self.noise_dbm),
            mimo_gain=float(self.n_uav_antennas * self.n_ue_antennas),
            p_t_w=dbm_to_watts(self.p_t_dbm),
            bandwidth_hz=self.bandwidth_hz,
        )


@dataclass(frozen=True)
class SweepConfig:
    p_min_dbm: float = -20.0
    p_max_dbm: float = 80.0
    step_dbm: float = 0.1
    p_static_dbm: float = 40.0

    def validate(self) -> None:
        if not (self.p_min_dbm < self.p_max_dbm and self.step_dbm > 0):
            raise ValueError("sweep needs p_min_dbm < p_max_dbm and step_dbm > 0")


@dataclass
class RunConfig:
    scene: Scene = field(default_factory=Scene)
    channel_in: ChannelInputs = field(default_factory=ChannelInputs)
    neat: NeatConfig = field(default_factory=NeatConfig)
    reward: RewardWeights = field(default_factory=RewardWeights)
    schedule: Schedule = field(default_factory=Schedule)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output_dir: str = "runs"
    master_seed: int = 0
    channel: ChannelParams = None  # derived; filled in __post_init__

    def __post_init__(self):
        if self.channel is None:
            self.channel = self.channel_in.to_params()

    def validate(self) -> None:
        self.scene.validate()
        self.channel.validate()
        self.neat.validate()
        self.reward.validate()
        self.schedule.validate()
        self.sweep.validate()


def default_config() -> RunConfig:
    return RunConfig()


def _fail(section: str, key: str, raw: str, kind: str):
    raise ConfigError(f"[{section}] {key} = {raw!r}: expected {kind}")


def _as_float(section, key, raw) -> float:
    try:
        return float(raw)
    except ValueError:
        _fail(section, key, raw, "a number")


def _as_int(section, key, raw) -> int:
    try:
        return int(raw)
    except ValueError:
        _fail(section, key, raw, "an integer")


def _as_pair(section, key, raw) -> tuple[float, float]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 2:
        _fail(section, key, raw, "two comma-separated numbers")
    return (_as_float(section, key, parts[0]), _as_float(section, key, parts[1]))


def _as_triple(section, key, raw) -> tuple[float, float, float]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 3:
        _fail(section, key, raw, "three comma-separated numbers")
    return tuple(_as_float(section, key, p) for p in parts)


def _as_users(section, key, raw) -> tuple[tuple[float, float], ...]:
    groups = [g.strip() for g in raw.split(";") if g.strip()]
    if not groups:
        _fail(section, key, raw, "semicolon-separated x,y pairs")
    return tuple(_as_pair(section, key, g) for g in groups)


def _as_ints(section, key, raw) -> tuple[int, ...]:
    raw = raw.strip()
    if not raw:
        return ()
    return tuple(_as_int(section, key, p.strip()) for p in raw.split(","))


_SCENE_KEYS = {
    "side",
    "users",
    "min_height",
    "start",
    "move_x",
    "move_y",
    "move_h",
    "alpha_step",
}
_CHANNEL_KEYS = {
    "intercept",
    "exponent",
    "noise_dbm",
    "p_t_dbm",
    "n_uav_antennas",
    "n_ue_antennas",
    "bandwidth_hz",
}
_NEAT_KEYS = {
    "population_size",
    "weight_range",
    "weight_mutation_rate",
    "bias_mutation_rate",
    "node_add_prob",
    "node_delete_prob",
    "conn_add_prob",
    "conn_delete_prob",
    "compat_threshold",
    "c_excess",
    "c_disjoint",
    "c_weight",
    "elite_count",
    "perturb_stddev",
    "crossover_prob",
    "stagnation_generations",
}
_REWARD_KEYS = {"w_rate", "w_sat", "w_unsat", "r_min_se"}
_SCHEDULE_KEYS = {"generations", "steps_per_episode", "seeds"}
_SWEEP_KEYS = {"p_min_dbm", "p_max_dbm", "step_dbm", "p_static_dbm"}
_RUN_KEYS = {"output_dir", "master_seed"}
_SECTIONS = {
    "scene": _SCENE_KEYS,
    "channel": _CHANNEL_KEYS,
    "neat": _NEAT_KEYS,
    "reward": _REWARD_KEYS,
    "schedule": _SCHEDULE_KEYS,
    "sweep": _SWEEP_KEYS,
    "run": _RUN_KEYS,
}


def loads(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc

    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    def get(section, key):
        if parser.has_section(section) and key in parser[section]:
            return parser[section][key]
        return None

    def number(section, key, default):
        raw = get(section, key)
        return default if raw is None else _as_float(section, key, raw)

    def integer(section, key, default):
        raw = get(section, key)
        return default if raw is None else _as_int(section, key, raw)

    scene_d = Scene()
    raw_users = get("scene", "users")
    raw_start = get("scene", "start")
    scene = Scene(
        side=number("scene", "side", scene_d.side),
        users=scene_d.users if raw_users is None else _as_users("scene", "users", raw_users),
        min_height=number("scene", "min_height", scene_d.min_height),
        start=scene_d.start if raw_start is None else _as_triple("scene", "start", raw_start),
        move_x=number("scene", "move_x", scene_d.move_x),
        move_y=number("scene", "move_y", scene_d.move_y),
        move_h=number("scene", "move_h", scene_d.move_h),
        alpha_step=number("scene", "alpha_step", scene_d.alpha_step),
    )

    chan_d = ChannelInputs()
    channel_in = ChannelInputs(
        intercept=number("channel", "intercept", chan_d.intercept),
        exponent=number("channel", "exponent", chan_d.exponent),
        noise_dbm=number("channel", "noise_dbm", chan_d.noise_dbm),
        p_t_dbm=number("channel", "p_t_dbm", chan_d.p_t_dbm),
        n_uav_antennas=integer("channel", "n_uav_antennas", chan_d.n_uav_antennas),
        n_ue_antennas=integer("channel", "n_ue_antennas", chan_d.n_ue_antennas),
        bandwidth_hz=number("channel", "bandwidth_hz", chan_d.bandwidth_hz),
    )

    neat_d = NeatConfig()
    raw_range = get("neat", "weight_range")
    raw_stag = get("neat", "stagnation_generations")
    neat = NeatConfig(
        population_size=integer("neat", "population_size", neat_d.population_size),
        weight_range=(
            neat_d.weight_range
            if raw_range is None
            else _as_pair("neat", "weight_range", raw_range)
        ),
        weight_mutation_rate=number(
            "neat", "weight_mutation_rate", neat_d.weight_mutation_rate
        ),
        bias_mutation_rate=number("neat", "bias_mutation_rate", neat_d.bias_mutation_rate),
        node_add_prob=number("neat", "node_add_prob", neat_d.node_add_prob),
        node_delete_prob=number("neat", "node_delete_prob", neat_d.node_delete_prob),
        conn_add_prob=number("neat", "conn_add_prob", neat_d.conn_add_prob),
        conn_delete_prob=number("neat", "conn_delete_prob", neat_d.conn_delete_prob),
        compat_threshold=number("neat", "compat_threshold", neat_d.compat_threshold),
        c_excess=number("neat", "c_excess", neat_d.c_excess),
        c_disjoint=number("neat", "c_disjoint", neat_d.c_disjoint),
        c_weight=number("neat", "c_weight", neat_d.c_weight),
        elite_count=integer("neat", "elite_count", neat_d.elite_count),
        perturb_stddev=number("neat", "perturb_stddev", neat_d.perturb_stddev),
        crossover_prob=number("neat", "crossover_prob", neat_d.crossover_prob),
        stagnation_generations=(
            neat_d.stagnation_generations
            if raw_stag is None or not raw_stag.strip()
            else _as_int("neat", "stagnation_generations", raw_stag)
        ),
    )

    reward_d = RewardWeights()
    reward = RewardWeights(
        w_rate=number("reward", "w_rate", reward_d.w_rate),
        w_sat=number("reward", "w_sat", reward_d.w_sat),
        w_unsat=number("reward", "w_unsat", reward_d.w_unsat),
        r_min_se=number("reward", "r_min_se", reward_d.r_min_se),
    )

    sched_d = Schedule()
    raw_seeds = get("schedule", "seeds")
    schedule = Schedule(
        generations=integer("schedule", "generations", sched_d.generations),
        steps_per_episode=integer(
            "schedule", "steps_per_episode", sched_d.steps_per_episode
        ),
        seeds=sched_d.seeds if raw_seeds is None else _as_ints("schedule", "seeds", raw_seeds),
    )

    sweep_d = SweepConfig()
    sweep = SweepConfig(
        p_min_dbm=number("sweep", "p_min_dbm", sweep_d.p_min_dbm),
        p_max_dbm=number("sweep", "p_max_dbm", sweep_d.p_max_dbm),
        step_dbm=number("sweep", "step_dbm", sweep_d.step_dbm),
        p_static_dbm=number("sweep", "p_static_dbm", sweep_d.p_static_dbm),
    )

    raw_out = get("run", "output_dir")
    cfg = RunConfig(
        scene=scene,
        channel_in=channel_in,
        neat=neat,
        reward=reward,
        schedule=schedule,
        sweep=sweep,
        output_dir="runs" if raw_out is None else raw_out,
        master_seed=integer("run", "master_seed", 0),
    )
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)


def serialize_config(cfg: RunConfig) -> str:
    """Render a config that loads() back to an equal RunConfig."""
    scene = cfg.scene
    chan = cfg.channel_in
    neat = cfg.neat
    lines = [
        "[scene]",
        f"side = {scene.side!r}",
        "users = " + "; ".join(f"{x!r},{y!r}" for x, y in scene.users),
        f"min_height = {scene.min_height!r}",
        "start = " + ",".join(repr(v) for v in scene.start),
        f"move_x = {scene.move_x!r}",
        f"move_y = {scene.move_y!r}",
        f"move_h = {scene.move_h!r}",
        f"alpha_step = {scene.alpha_step!r}",
        "",
        "[channel]",
        f"intercept = {chan.intercept!r}",
        f"exponent = {chan.exponent!r}",
        f"noise_dbm = {chan.noise_dbm!r}",
        f"p_t_dbm = {chan.p_t_dbm!r}",
        f"n_uav_antennas = {chan.n_uav_antennas}",
        f"n_ue_antennas = {chan.n_ue_antennas}",
        f"bandwidth_hz = {chan.bandwidth_hz!r}",
        "",
        "[neat]",
        f"population_size = {neat.population_size}",
        f"weight_range = {neat.weight_range[0]!r},{neat.weight_range[1]!r}",
        f"weight_mutation_rate = {neat.weight_mutation_rate!r}",
        f"bias_mutation_rate = {neat.bias_mutation_rate!r}",
        f"node_add_prob = {neat.node_add_prob!r}",
        f"node_delete_prob = {neat.node_delete_prob!r}",
        f"conn_add_prob = {neat.conn_add_prob!r}",
        f"conn_delete_prob = {neat.conn_delete_prob!r}",
        f"compat_threshold = {neat.compat_threshold!r}",
        f"c_excess = {neat.c_excess!r}",
        f"c_disjoint = {neat.c_disjoint!r}",
        f"c_weight = {neat.c_weight!r}",
        f"elite_count = {neat.elite_count}",
        f"perturb_stddev = {neat.perturb_stddev!r}",
        f"crossover_prob = {neat.crossover_prob!r}",
    ]
    if neat.stagnation_generations is not None:
        lines.append(f"stagnation_generations = {neat.stagnation_generations}")
    lines += [
        "",
        "[reward]",
        f"w_rate = {cfg.reward.w_rate!r}",
        f"w_sat = {cfg.reward.w_sat!r}",
        f"w_unsat = {cfg.reward.w_unsat!r}",
        f"r_min_se = {cfg.reward.r_min_se!r}",
        "",
        "[schedule]",
        f"generations = {cfg.schedule.generations}",
        f"steps_per_episode = {cfg.schedule.steps_per_episode}",
        "seeds = " + ",".join(str(s) for s in cfg.schedule.seeds),
        "",
        "[sweep]",
        f"p_min_dbm = {cfg.sweep.p_min_dbm!r}",
        f"p_max_dbm = {cfg.sweep.p_max_dbm!r}",
        f"step_dbm = {cfg.sweep.step_dbm!r}",
        f"p_static_dbm = {cfg.sweep.p_static_dbm!r}",
        "",
        "[run]",
        f"output_dir = {cfg.output_dir}",
        f"master_seed = {cfg.master_seed}",
    ]
    return "\n".join(lines) + "\n"


def save_config(cfg: RunConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_config(cfg))
