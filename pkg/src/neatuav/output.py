"""Fixed-schema CSV/JSON emission for runs, sweeps, traces, and oracles.

Every float is printed with 9 significant digits so that identical runs
produce byte-identical files.
"""

from __future__ import annotations

import json
import os

from .genome import Genome, save_genome
from .oracle import GridSearchResult
from .sim import EpisodeTrace, GenerationRecord, SeedStats, SweepPoint, TrainResult


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".9g")


def _write_rows(path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_generations_csv(path, records: list[GenerationRecord]) -> None:
    _write_rows(
        path,
        [
            "generation",
            "best_fitness",
            "mean_fitness",
            "species_count",
            "best_mean_sum_se",
            "min_rate_satisfaction",
        ],
        (
            (
                r.generation,
                r.best_fitness,
                r.mean_fitness,
                r.species_count,
                r.best_mean_sum_se,
                r.min_rate_satisfaction,
            )
            for r in records
        ),
    )


def write_trace_csv(path, trace: EpisodeTrace) -> None:
    n = len(trace.ses[0])
    header = (
        ["step", "x", "y", "h"]
        + [f"alpha_{i + 1}" for i in range(n)]
        + [f"se_{i + 1}" for i in range(n)]
        + ["reward"]
    )
    rows = (
        (k + 1, *trace.positions[k], *trace.alphas[k], *trace.ses[k], trace.rewards[k])
        for k in range(len(trace))
    )
    _write_rows(path, header, rows)


def write_ee_curve_csv(path, points: list[SweepPoint]) -> None:
    _write_rows(
        path,
        ["pt_dbm", "mean_se", "ee"],
        ((p.pt_dbm, p.mean_se, p.ee) for p in points),
    )


def write_ci_csv(path, stats: SeedStats) -> None:
    _write_rows(
        path,
        [
            "generation",
            "best_fitness_mean",
            "best_fitness_std",
            "mean_fitness_mean",
            "mean_fitness_std",
        ],
        (
            (
                g,
                stats.best_mean[g],
                stats.best_std[g],
                stats.mean_mean[g],
                stats.mean_std[g],
            )
            for g in stats.generations
        ),
    )


def write_oracle_json(path, result: GridSearchResult) -> None:
    record = {
        "position": list(result.position),
        "alpha": list(result.alpha),
        "sum_se": result.sum_se,
        "feasible": result.feasible,
        "grid": {
            "xy_spacing": result.grid.xy_spacing,
            "heights": list(result.grid.heights),
            "alpha_step": result.grid.alpha_step,
            "enforce_fairness": result.grid.enforce_fairness,
        },
    }
    with open(path, "w") as fh:
        json.dump(record, fh, indent=1)
        fh.write("\n")


def write_run_outputs(out_dir, result: TrainResult) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_generations_csv(os.path.join(out_dir, "generations.csv"), result.records)
    save_genome(result.champion, os.path.join(out_dir, "champion.json"))
