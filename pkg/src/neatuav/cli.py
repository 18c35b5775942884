"""Command-line entry points: train, eval, sweep, oracle, ci."""

from __future__ import annotations

import argparse
import os
import sys

from . import output, sim
from .config import ConfigError, load_config
from .genome import load_genome
from .oracle import GridSpec, InfeasibleGridError, grid_search


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neatuav",
        description="Evolve and evaluate a UAV NOMA-downlink controller.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a controller and persist the run")
    train.add_argument("--config", required=True, help="run configuration file")
    train.add_argument("--seed", type=int, help="override the master seed")
    train.add_argument("--out", help="override the output directory")

    evalp = sub.add_parser("eval", help="evaluate a saved genome on the scene")
    evalp.add_argument("--genome", required=True)
    evalp.add_argument("--config", required=True)

    sweep = sub.add_parser("sweep", help="energy-efficiency transmit-power sweep")
    sweep.add_argument("--genome", required=True)
    sweep.add_argument("--config", required=True)

    oracle = sub.add_parser("oracle", help="brute-force static optimum by grid search")
    oracle.add_argument("--config", required=True)
    oracle.add_argument("--spacing", type=float, default=5.0, help="xy grid spacing (m)")
    oracle.add_argument("--alpha-step", type=float, default=0.01)
    oracle.add_argument("--fair", action="store_true", help="discard candidates violating r_min_se")

    ci = sub.add_parser("ci", help="multi-seed training with mean/std curves")
    ci.add_argument("--config", required=True)
    ci.add_argument("--runs", type=int, required=True)

    return parser


def _cmd_train(args) -> int:
    cfg = load_config(args.config)
    seed = cfg.master_seed if args.seed is None else args.seed
    out_dir = args.out if args.out else cfg.output_dir
    result = sim.train(cfg, seed=seed, out_dir=out_dir)
    last = result.records[-1]
    print(
        f"train: {len(result.records)} generations, seed {seed}, "
        f"best fitness {output.fmt(last.best_fitness)}, outputs in {out_dir}"
    )
    return 0


def _cmd_eval(args) -> int:
    cfg = load_config(args.config)
    genome = load_genome(args.genome)
    metrics = sim.evaluate_champion(
        genome, cfg.scene, cfg.channel, cfg.reward, cfg.schedule.steps_per_episode
    )
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "trace.csv")
    output.write_trace_csv(path, metrics.trace)
    x, y, h = metrics.final_position
    print(
        f"eval: mean sum-SE {output.fmt(metrics.mean_sum_se)} bit/s/Hz, "
        f"min-rate satisfaction {output.fmt(metrics.satisfaction_fraction)}, "
        f"final position ({output.fmt(x)}, {output.fmt(y)}, {output.fmt(h)}), "
        f"trace in {path}"
    )
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    genome = load_genome(args.genome)
    points = sim.power_sweep(
        genome,
        cfg.scene,
        cfg.channel,
        cfg.reward,
        cfg.sweep.p_min_dbm,
        cfg.sweep.p_max_dbm,
        cfg.sweep.step_dbm,
        cfg.sweep.p_static_dbm,
        cfg.schedule.steps_per_episode,
    )
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "ee_curve.csv")
    output.write_ee_curve_csv(path, points)
    peak = max(points, key=lambda p: p.ee)
    print(
        f"sweep: {len(points)} points, peak EE {output.fmt(peak.ee)} bit/s/Hz/W "
        f"at {output.fmt(peak.pt_dbm)} dBm, curve in {path}"
    )
    return 0


def _cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    grid = GridSpec(
        xy_spacing=args.spacing,
        alpha_step=args.alpha_step,
        enforce_fairness=args.fair,
    )
    result = grid_search(cfg.scene, cfg.channel, cfg.reward, grid)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "oracle.json")
    output.write_oracle_json(path, result)
    x, y, h = result.position
    print(
        f"oracle: optimum sum-SE {output.fmt(result.sum_se)} bit/s/Hz at "
        f"({output.fmt(x)}, {output.fmt(y)}, {output.fmt(h)}), record in {path}"
    )
    return 0


def _cmd_ci(args) -> int:
    cfg = load_config(args.config)
    stats = sim.multi_seed(cfg, args.runs)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "ci.csv")
    output.write_ci_csv(path, stats)
    print(
        f"ci: {len(stats.seeds)} runs, final best fitness "
        f"{output.fmt(stats.best_mean[-1])} +/- {output.fmt(stats.best_std[-1])}, "
        f"curves in {path}"
    )
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
    "ci": _cmd_ci,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, InfeasibleGridError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
