"""Acceptance gate: every criterion at its stated tolerance, one line each.

The heavy fixtures train real controllers on the default scene, so this
module dominates the suite's runtime (roughly twenty minutes on one core).
"""

import filecmp
import math
import time

import pytest

import property_suites as suites
from neatuav.channel import channel_gain, min_alpha_feasible
from neatuav.cli import main as cli_main
from neatuav.config import default_config
from neatuav.environment import EnvState, RewardWeights
from neatuav.oracle import GridSpec, grid_search
from neatuav.sim import Schedule, evaluate_champion, power_sweep, train

SEEDS = (1, 2, 3)


def report(num, name, ok, detail):
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {num} ({name}): {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def learning_rate_config(generations, r_min_se):
    cfg = default_config()
    cfg.reward = RewardWeights(w_rate=1.0, w_sat=100.0, w_unsat=1.0, r_min_se=r_min_se)
    cfg.schedule = Schedule(generations=generations, steps_per_episode=300)
    return cfg


@pytest.fixture(scope="session")
def rate_training_runs():
    """Criterion 2/5 runs: E=300, T=300, G_s=50, r_min 0, seeds {1,2,3}."""
    cfg = learning_rate_config(300, r_min_se=0.0)
    started = time.perf_counter()
    runs = [train(cfg, seed=s) for s in SEEDS]
    return cfg, runs, time.perf_counter() - started


@pytest.fixture(scope="session")
def long_training_runs():
    """Criterion 4 runs: the full E=1000 learning-rate scenario, 3 seeds."""
    cfg = learning_rate_config(1000, r_min_se=0.5)
    return cfg, [train(cfg, seed=s) for s in SEEDS]


def test_criterion_1_property_suites():
    cases = 10_000
    started = time.perf_counter()
    for name, suite in suites.ALL_SUITES.items():
        suite(cases)
    elapsed = time.perf_counter() - started
    report(
        1,
        "randomized invariants",
        elapsed < 120.0,
        f"{len(suites.ALL_SUITES)} properties x {cases} cases in {elapsed:.1f}s (budget 120s)",
    )


def test_criterion_2_oracle_proximity(rate_training_runs):
    cfg, runs, train_seconds = rate_training_runs
    optimum = grid_search(
        cfg.scene,
        cfg.channel,
        cfg.reward,
        GridSpec(xy_spacing=5.0, heights=(10.0, 30.0, 50.0), alpha_step=0.01),
    )
    champs = [
        evaluate_champion(r.champion, cfg.scene, cfg.channel, cfg.reward, 300)
        for r in runs
    ]
    best = max(m.mean_sum_se for m in champs)
    ratio = best / optimum.sum_se
    report(
        2,
        "oracle proximity",
        ratio >= 0.90 and train_seconds < 15 * 60,
        f"best champion {best:.3f} vs grid optimum {optimum.sum_se:.3f} bit/s/Hz "
        f"= {ratio * 100:.1f}% (needs >= 90%), training took {train_seconds:.0f}s "
        f"(budget 900s)",
    )


def test_criterion_3_fairness_satisfaction():
    cfg = default_config()
    cfg.reward = RewardWeights(w_rate=10.0, w_sat=100.0, w_unsat=1.0, r_min_se=0.5)
    cfg.schedule = Schedule(generations=500, steps_per_episode=300)
    result = train(cfg, seed=SEEDS[0])
    metrics = evaluate_champion(result.champion, cfg.scene, cfg.channel, cfg.reward, 300)
    frac = metrics.all_satisfied_fraction
    report(
        3,
        "fairness satisfaction",
        frac >= 0.95,
        f"all four users meet se >= 0.5 on {frac * 100:.2f}% of steps (needs >= 95%), "
        f"per-user mean SE {[round(v, 2) for v in metrics.per_user_mean_se]}",
    )


def test_criterion_4_learning_curve_shape(long_training_runs):
    cfg, runs = long_training_runs
    monotone_ok = True
    early = []
    for r in runs:
        best = [rec.best_fitness for rec in r.records]
        monotone_ok &= all(a <= b for a, b in zip(best, best[1:]))
        threshold = 0.96 * best[-1]
        first = next(g for g, v in enumerate(best) if v >= threshold)
        early.append(first)
    hits = sum(1 for g in early if g < len(runs[0].records) - 1)
    report(
        4,
        "learning-curve shape",
        monotone_ok and hits >= 2,
        f"best_fitness non-decreasing on all seeds: {monotone_ok}; 96% of the "
        f"final value first reached at generations {early} out of 1000 "
        f"({hits}/3 strictly before the last generation, needs >= 2)",
    )


def test_criterion_5_ee_sweep(rate_training_runs, tmp_path_factory):
    from neatuav.output import write_ee_curve_csv

    cfg, runs, _ = rate_training_runs
    champs = [
        (evaluate_champion(r.champion, cfg.scene, cfg.channel, cfg.reward, 300), r)
        for r in runs
    ]
    best_run = max(champs, key=lambda pair: pair[0].mean_sum_se)[1]
    started = time.perf_counter()
    points = power_sweep(
        best_run.champion,
        cfg.scene,
        cfg.channel,
        cfg.reward,
        -20.0,
        80.0,
        0.1,
        40.0,
        300,
    )
    elapsed = time.perf_counter() - started
    path = tmp_path_factory.mktemp("sweep") / "ee_curve.csv"
    write_ee_curve_csv(path, points)
    rows = path.read_text().splitlines()

    peak_idx = max(range(len(points)), key=lambda i: points[i].ee)
    peak = points[peak_idx].ee
    interior = 0 < peak_idx < len(points) - 1
    ends_below = points[0].ee < peak and points[-1].ee < peak
    tail_collapsed = points[-1].ee < 0.5 * peak
    report(
        5,
        "energy-efficiency sweep",
        len(points) == 1001
        and len(rows) == 1002
        and interior
        and ends_below
        and tail_collapsed
        and elapsed < 600.0,
        f"1001 points, peak EE {peak:.3f} bit/s/Hz/W at "
        f"{points[peak_idx].pt_dbm:.1f} dBm (interior: {interior}), "
        f"EE(80 dBm)/peak = {points[-1].ee / peak:.2e} (needs < 0.5), "
        f"sweep took {elapsed:.0f}s (budget 600s)",
    )


def test_criterion_6_byte_identical_runs(tmp_path):
    config_text = (
        "[neat]\npopulation_size = 10\n\n"
        "[schedule]\ngenerations = 6\nsteps_per_episode = 25\n\n"
        "[run]\nmaster_seed = 3\noutput_dir = {out}\n"
    )
    path_a = tmp_path / "a.ini"
    path_a.write_text(config_text.format(out=tmp_path / "run_a"))
    path_b = tmp_path / "b.ini"
    path_b.write_text(config_text.format(out=tmp_path / "run_b"))
    assert cli_main(["train", "--config", str(path_a)]) == 0
    assert cli_main(["train", "--config", str(path_b)]) == 0
    same = all(
        filecmp.cmp(tmp_path / "run_a" / name, tmp_path / "run_b" / name, shallow=False)
        for name in ("generations.csv", "champion.json")
    )
    report(
        6,
        "determinism",
        same,
        "two train runs with the same config and seed wrote byte-identical "
        "generations.csv and champion.json",
    )


def test_criterion_7_unit_numerics(params):
    gain = channel_gain(50.0, params)
    gain_ok = abs(gain - 1.5924e-10) < 1e-14
    alpha = min_alpha_feasible(0.5, 100.0)
    alpha_ok = abs(alpha - 0.0041421) < 1e-7

    w = RewardWeights(1.0, 100.0, 1.0, 0.5)
    state = EnvState(0.0, 0.0, 50.0, [0.5] * 4, [1.0] * 4, [], (), 0)
    state.se = [1.0, 0.6, 0.8, 0.7]
    from neatuav.environment import reward

    r1 = reward(state, params, w)
    state.se = [1.0, 0.4, 0.8, 0.3]
    r2 = reward(state, params, w)
    rewards_ok = math.isclose(r1, 403.1, rel_tol=1e-9) and math.isclose(
        r2, 200.7, rel_tol=1e-9
    )
    report(
        7,
        "unit-level numerics",
        gain_ok and alpha_ok and rewards_ok,
        f"channel_gain(50) = {gain:.6e} (within 1e-14 of 1.5924e-10), "
        f"min_alpha_feasible(0.5, 100) = {alpha:.7f} (within 1e-7 of 0.0041421), "
        f"rewards {r1}, {r2} vs 403.1, 200.7 at 1e-9 relative",
    )
