"""Experiment harness: acceptance-ratio and period-distance sweeps.

For every (core count, utilization group) cell the harness generates
tasksets, runs the four schemes, and aggregates acceptance ratios plus
normalized period distances.  The distance column holds, per scheme:

* hydra_c: mean ||T* - Tmax||2 / ||Tmax||2 over its schedulable tasksets
  (how far below the designer bounds the solved periods sit);
* other schemes: mean ||T_scheme - T*||2 / ||Tmax||2 over tasksets both
  that scheme and hydra_c find schedulable (T_scheme is Tmax for the
  fixed-period schemes).

Rows are canonically ordered by (cores, group, scheme) no matter how
many workers computed them.
"""

from __future__ import annotations

import csv
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .baselines import global_tmax_check, hydra_select, hydra_tmax_check
from .model import TaskSystem
from .period_opt import select_periods
from .tsgen import GenSpec, GenerationError, generate_taskset, group_band

SCHEMES = ("hydra_c", "hydra", "hydra_tmax", "global_tmax")

SWEEP_COLUMNS = ["cores", "group", "u_lo", "u_hi", "scheme", "generated",
                 "schedulable", "acceptance_ratio", "mean_norm_distance"]


@dataclass
class TasksetEval:
    cores: int
    group: int
    index: int
    schedulable: dict[str, bool]
    periods: dict[str, dict[str, int]]   # scheme -> {task: period}
    tmax: dict[str, int]


@dataclass
class SweepRow:
    cores: int
    group: int
    u_lo: float
    u_hi: float
    scheme: str
    generated: int
    schedulable: int
    acceptance_ratio: float
    mean_norm_distance: Optional[float]

    def as_list(self) -> list:
        d = "" if self.mean_norm_distance is None \
            else f"{self.mean_norm_distance:.6f}"
        return [self.cores, self.group, f"{self.u_lo:.4f}", f"{self.u_hi:.4f}",
                self.scheme, self.generated, self.schedulable,
                f"{self.acceptance_ratio:.4f}", d]


def evaluate_taskset(system: TaskSystem, cores: int, group: int, index: int,
                     schemes: Sequence[str] = SCHEMES) -> TasksetEval:
    """Run the requested schemes on one taskset."""
    sched: dict[str, bool] = {}
    periods: dict[str, dict[str, int]] = {}
    tmax = {s.id: s.max_period for s in system.security_tasks}
    for scheme in schemes:
        if scheme == "hydra_c":
            sel = select_periods(system)
            sched[scheme] = sel.schedulable
            if sel.schedulable:
                periods[scheme] = sel.periods
        elif scheme == "hydra":
            res = hydra_select(system)
            sched[scheme] = res.schedulable
            if res.schedulable:
                periods[scheme] = res.periods
        elif scheme == "hydra_tmax":
            sched[scheme] = hydra_tmax_check(system).schedulable
            if sched[scheme]:
                periods[scheme] = dict(tmax)
        elif scheme == "global_tmax":
            sched[scheme] = global_tmax_check(system).schedulable
            if sched[scheme]:
                periods[scheme] = dict(tmax)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
    return TasksetEval(cores, group, index, sched, periods, tmax)


def _norm_distance(a: dict[str, int], b: dict[str, int],
                   tmax: dict[str, int]) -> float:
    dist = math.sqrt(sum((a[k] - b[k]) ** 2 for k in tmax))
    scale = math.sqrt(sum(v ** 2 for v in tmax.values()))
    return dist / scale


def summarize_cell(evals: Sequence[TasksetEval], cores: int, group: int,
                   schemes: Sequence[str] = SCHEMES) -> list[SweepRow]:
    lo, hi = group_band(group, cores)
    rows = []
    for scheme in schemes:
        ok = [e for e in evals if e.schedulable.get(scheme)]
        distances = []
        for e in ok:
            if scheme == "hydra_c":
                distances.append(_norm_distance(e.periods[scheme], e.tmax, e.tmax))
            elif e.schedulable.get("hydra_c") and "hydra_c" in e.periods:
                distances.append(_norm_distance(
                    e.periods[scheme], e.periods["hydra_c"], e.tmax))
        rows.append(SweepRow(
            cores=cores, group=group, u_lo=float(lo), u_hi=float(hi),
            scheme=scheme, generated=len(evals), schedulable=len(ok),
            acceptance_ratio=len(ok) / len(evals) if evals else 0.0,
            mean_norm_distance=(sum(distances) / len(distances))
            if distances else None))
    return rows


def sweep_cell(cores: int, group: int, count: int, seed: int,
               schemes: Sequence[str] = SCHEMES,
               max_redraws: int = 1000) -> list[TasksetEval]:
    spec = GenSpec(cores=cores, seed=seed, tasksets_per_group=count,
                   max_redraws=max_redraws)
    evals = []
    for index in range(count):
        try:
            system = generate_taskset(spec, group, index)
        except GenerationError as exc:
            # partial group: visible as generated < requested in the CSV
            print(f"warning: {exc}", file=sys.stderr)
            continue
        evals.append(evaluate_taskset(system, cores, group, index, schemes))
    return evals


def _cell_worker(args) -> list[SweepRow]:
    cores, group, count, seed, schemes, max_redraws = args
    evals = sweep_cell(cores, group, count, seed, schemes, max_redraws)
    return summarize_cell(evals, cores, group, schemes)


def run_sweep(cores_list: Sequence[int], groups: Sequence[int], count: int,
              seed: int, schemes: Sequence[str] = SCHEMES, workers: int = 1,
              max_redraws: int = 1000, verbose: bool = False) -> list[SweepRow]:
    cells = [(m, g, count, seed, tuple(schemes), max_redraws)
             for m in cores_list for g in groups]
    rows: list[SweepRow] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for cell, out in zip(cells, pool.map(_cell_worker, cells)):
                rows.extend(out)
                if verbose:
                    print(f"done cores={cell[0]} group={cell[1]}",
                          file=sys.stderr)
    else:
        for cell in cells:
            rows.extend(_cell_worker(cell))
            if verbose:
                print(f"done cores={cell[0]} group={cell[1]}", file=sys.stderr)
    rows.sort(key=lambda r: (r.cores, r.group, r.scheme))
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            w.writerow(row.as_list())


def read_sweep_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
