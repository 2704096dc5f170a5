"""Security-task period selection.

Periods start at their designer bounds; if every response time fits, the
tasks are walked from highest to lowest priority and each one gets the
smallest period (found by integer binary search over [R_s, T_s^max])
that keeps every lower-priority security task schedulable.  After fixing
a period, the lower-priority response times are recomputed with the new
interference.  Lower-priority tasks that have not been optimized yet
keep their maximum period during the search; schedulability of a
lower-priority task always means R_j <= T_j^max.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .analysis import WcrtResult, _rt_arrays
from .model import TaskSystem, Tick


@dataclass(frozen=True)
class PeriodSelection:
    """Outcome of period selection: a period vector or the violating task."""

    schedulable: bool
    periods: dict[str, Tick]
    wcrts: dict[str, WcrtResult]
    violating_task: Optional[str] = None

    def periods_json(self) -> dict:
        return dict(self.periods)


class SelectionState:
    """Array-backed state for the selection loop: current periods and
    response times of the security list in priority order."""

    def __init__(self, system: TaskSystem):
        self.m = system.cores
        self.rt_c, self.rt_t, self.rt_core = _rt_arrays(system)
        sec = system.security_tasks
        self.ids = [s.id for s in sec]
        self.n = len(sec)
        self.c = np.array([s.wcet for s in sec], dtype=np.int64)
        self.tmax = np.array([s.max_period for s in sec], dtype=np.int64)
        self.T = self.tmax.copy()
        self.R = np.zeros(self.n, dtype=np.int64)
        self.iters = np.zeros(self.n, dtype=np.int64)

    def wcrt(self, j: int, bound: int):
        x, conv, it = _kernels.migrating_wcrt_topdiff(
            self.m, self.c[j], bound, self.rt_c, self.rt_t, self.rt_core,
            self.c[:j], self.T[:j], self.R[:j])
        return int(x), bool(conv), int(it)

    def recompute_from(self, start: int) -> Optional[int]:
        """Refresh R for tasks start.. under current periods, in priority
        order; returns the first index whose bound is exceeded, else None."""
        for j in range(start, self.n):
            x, conv, it = self.wcrt(j, int(self.tmax[j]))
            self.R[j] = x
            self.iters[j] = it
            if not conv:
                return j
        return None

    def feasible(self, j: int, candidate: int) -> bool:
        """Would every lower-priority task stay within its bound if task
        j ran with this period?  Leaves the state untouched."""
        saved_T = self.T[j]
        saved_R = self.R[j + 1:].copy()
        self.T[j] = candidate
        ok = True
        for jj in range(j + 1, self.n):
            x, conv, _ = self.wcrt(jj, int(self.tmax[jj]))
            self.R[jj] = x
            if not conv:
                ok = False
                break
        self.T[j] = saved_T
        self.R[j + 1:] = saved_R
        return ok


def min_feasible_period(solver: SelectionState, j: int, search: str = "binary") -> Tick:
    """Smallest period in [R_j, T_j^max] keeping all lower-priority
    security tasks schedulable.

    Binary search probes midpoints and records only verified-feasible
    candidates, with the maximum period seeding the feasible set;
    search="scan" walks the range upward and is the exactness oracle.
    """
    lo = int(solver.R[j])
    hi = int(solver.tmax[j])
    if search == "scan":
        for cand in range(lo, hi + 1):
            if solver.feasible(j, cand):
                return cand
        return hi
    best = hi
    l, r = lo, hi
    while l <= r:
        cand = (l + r) // 2
        if solver.feasible(j, cand):
            best = min(best, cand)
            r = cand - 1
        else:
            l = cand + 1
    return best


def select_periods(system: TaskSystem, search: str = "binary") -> PeriodSelection:
    """Pick a period for every security task, highest priority first.

    Returns an unschedulable outcome naming the first task whose
    response time exceeds its maximum period when all periods sit at
    their bounds; otherwise the final period vector together with the
    response times under it.
    """
    solver = SelectionState(system)
    viol = solver.recompute_from(0)

    def results(upto: int) -> dict[str, WcrtResult]:
        return {
            solver.ids[j]: WcrtResult(solver.ids[j], int(solver.R[j]),
                                      bool(solver.R[j] <= solver.tmax[j]),
                                      int(solver.iters[j]))
            for j in range(upto)
        }

    if viol is not None:
        return PeriodSelection(False, {}, results(viol + 1), solver.ids[viol])
    for j in range(solver.n):
        best = min_feasible_period(solver, j, search)
        solver.T[j] = best
        solver.recompute_from(j + 1)
    periods = {solver.ids[j]: int(solver.T[j]) for j in range(solver.n)}
    return PeriodSelection(True, periods, results(solver.n), None)
