"""Comparison schemes.

hydra: fully partitioned, greedy per task from highest priority down;
each security task is bound to the core giving the shortest feasible
period (its core-local response time).  hydra_tmax: same placement loop
but periods pinned at their maxima, feasibility only.  global_tmax: all
tasks, RT included, treated as migrating under one fixed-priority order
with periods at their maxima.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _kernels
from .allocation import best_fit_security_per_core
from .analysis import WcrtResult, rt_wcrt
from .model import TaskSystem, Tick


@dataclass(frozen=True)
class SchemeResult:
    scheme: str
    schedulable: bool
    periods: dict[str, Tick] = field(default_factory=dict)
    placement: dict[str, int] = field(default_factory=dict)
    wcrts: dict[str, WcrtResult] = field(default_factory=dict)
    violating_task: Optional[str] = None


def hydra_select(system: TaskSystem) -> SchemeResult:
    """Greedy partitioned placement with minimized periods.

    Each security task, highest priority first, lands on the core where
    its response time (hence its period) is smallest; ties go to the
    lowest core index.  Unschedulable when no core fits a task within
    its maximum period.
    """
    placed = []
    placement, periods, wcrts = {}, {}, {}
    for s in system.security_tasks:
        best = None
        for core in range(system.cores):
            res = best_fit_security_per_core(s, core, system, placed)
            if res.converged and (best is None or res.wcrt < best[0].wcrt):
                best = (res, core)
        if best is None:
            return SchemeResult("hydra", False, violating_task=s.id,
                                periods=periods, placement=placement, wcrts=wcrts)
        res, core = best
        placed.append(replace(s, period=res.wcrt, core=core))
        placement[s.id] = core
        periods[s.id] = res.wcrt
        wcrts[s.id] = res
    return SchemeResult("hydra", True, periods, placement, wcrts)


def hydra_tmax_check(system: TaskSystem) -> SchemeResult:
    """Partitioned feasibility with periods fixed at their maxima.

    Placement follows the same greedy loop (lowest-response core wins)
    but the placed task keeps its maximum period.
    """
    placed = []
    placement, periods, wcrts = {}, {}, {}
    for s in system.security_tasks:
        best = None
        for core in range(system.cores):
            res = best_fit_security_per_core(s, core, system, placed)
            if res.converged and (best is None or res.wcrt < best[0].wcrt):
                best = (res, core)
        if best is None:
            return SchemeResult("hydra_tmax", False, violating_task=s.id,
                                periods=periods, placement=placement, wcrts=wcrts)
        res, core = best
        placed.append(replace(s, period=s.max_period, core=core))
        placement[s.id] = core
        periods[s.id] = s.max_period
        wcrts[s.id] = res
    return SchemeResult("hydra_tmax", True, periods, placement, wcrts)


def global_tmax_check(system: TaskSystem) -> SchemeResult:
    """Global fixed-priority feasibility with security periods at their
    maxima and RT tasks migrating too.

    Tasks are analyzed in priority order; every higher-priority task may
    or may not carry in, so the window interference takes all
    non-carry-in terms plus the M-1 largest positive carry-in gains.
    Schedulable when every RT response fits its deadline and every
    security response fits its maximum period.
    """
    rt = sorted(system.rt_tasks, key=lambda t: t.priority)
    combined = [(t.id, t.wcet, t.period, t.deadline, True) for t in rt]
    combined += [(s.id, s.wcet, s.max_period, s.max_period, False)
                 for s in system.security_tasks]

    empty = np.zeros(0, dtype=np.int64)
    n = len(combined)
    hp_c = np.zeros(n, dtype=np.int64)
    hp_t = np.zeros(n, dtype=np.int64)
    hp_r = np.zeros(n, dtype=np.int64)
    periods, wcrts = {}, {}
    for k, (tid, c, t, bound, is_rt) in enumerate(combined):
        x, conv, it = _kernels.migrating_wcrt_topdiff(
            system.cores, c, bound, empty, empty, empty,
            hp_c[:k], hp_t[:k], hp_r[:k])
        wcrts[tid] = WcrtResult(tid, int(x), bool(conv), int(it))
        if not conv:
            return SchemeResult("global_tmax", False, violating_task=tid,
                                periods=periods, wcrts=wcrts)
        hp_c[k] = c
        hp_t[k] = t
        hp_r[k] = x
        if not is_rt:
            periods[tid] = t
    return SchemeResult("global_tmax", True, periods, {}, wcrts)


def rt_partition_check(system: TaskSystem) -> SchemeResult:
    """Plain per-core response-time check of the RT partition."""
    wcrts = rt_wcrt(system)
    for tid, res in wcrts.items():
        if not res.converged:
            return SchemeResult("rt_partition", False, violating_task=tid,
                                wcrts=wcrts)
    return SchemeResult("rt_partition", True, wcrts=wcrts)
