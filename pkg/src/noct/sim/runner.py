"""Simulation batch driver: per-run CSVs, verdict summaries, Monte-Carlo
batches with independent per-run seeds."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .convergence import ConvergenceVerdict, classify_convergence, scalar_names
from .ekf import EpochRecord, FilterDivergedError, SingularUpdateError, run_ekf
from .measurements import synthesize_measurements
from .scenarios import SCENARIO_NAMES, SCENARIOS, get_scenario

__all__ = [
    "SCENARIO_NAMES",
    "SCENARIOS",
    "FilterDivergedError",
    "RunResult",
    "run_batch",
    "run_scenario",
    "write_run_csv",
]


@dataclass
class RunResult:
    scenario: str
    seed: int
    time_offset_true: float
    records: list[EpochRecord]
    verdicts: dict[str, ConvergenceVerdict]
    diverged: bool
    diverged_at: float | None = None


def run_scenario(name: str, seed: int, **overrides) -> RunResult:
    """Synthesize one measurement stream and push it through the filter."""
    scenario = get_scenario(name, **overrides)
    stream = synthesize_measurements(scenario, seed)
    diverged = False
    diverged_at = None
    try:
        records = run_ekf(stream, seed=seed)
    except FilterDivergedError as e:
        diverged = True
        diverged_at = e.t
        records = getattr(e, "records", [])
    except SingularUpdateError:
        diverged = True
        records = []
    verdicts = classify_convergence(records) if len(records) >= 2 else {}
    return RunResult(scenario=name, seed=seed,
                     time_offset_true=stream.time_offset,
                     records=records, verdicts=verdicts,
                     diverged=diverged, diverged_at=diverged_at)


def write_run_csv(result: RunResult, path: Path) -> None:
    """One row per camera epoch: time, then (error, 3sigma) per scalar."""
    records = result.records
    if not records:
        path.write_text("time\n", encoding="utf-8")
        return
    names = scalar_names(records)
    header = ["time"]
    for n in names:
        header += [f"{n}_err", f"{n}_3sig"]
    lines = [",".join(header)]
    for rec in records:
        errs = np.concatenate([np.atleast_1d(rec.errors[k]) for k in rec.errors])
        sigs = np.concatenate([np.atleast_1d(rec.sigmas3[k]) for k in rec.sigmas3])
        cells = [repr(float(rec.t))]
        for e, s in zip(errs, sigs):
            cells.append(repr(float(e)))
            cells.append(repr(float(s)))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _one_run(args) -> RunResult:
    name, seed = args
    return run_scenario(name, seed)


def run_batch(name: str, runs: int, seed: int, out_dir: Path | None = None,
              jobs: int = 1) -> dict:
    """Run ``runs`` seeds of a scenario; optionally write CSVs + summary."""
    seeds = [seed + k for k in range(runs)]
    tasks = [(name, s) for s in seeds]
    if jobs > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, runs)) as pool:
            results = list(pool.map(_one_run, tasks))
    else:
        results = [_one_run(t) for t in tasks]

    summary = {
        "scenario": name,
        "runs": runs,
        "base_seed": seed,
        "diverged_runs": [r.seed for r in results if r.diverged],
        "per_run": [
            {
                "seed": r.seed,
                "time_offset_true": r.time_offset_true,
                "diverged": r.diverged,
                "verdicts": {k: v.to_json_dict() for k, v in r.verdicts.items()},
            }
            for r in results
        ],
    }
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for r in results:
            write_run_csv(r, out_dir / f"{name}_{r.seed}.csv")
        with open(out_dir / f"{name}_summary.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    summary["results"] = results
    return summary
