"""Workload and interference bounds plus response-time fixpoints.

RT tasks only ever interfere from their own core, so their workload in a
window is summed per core and the per-core sum is capped once.  Security
tasks migrate; higher-priority ones contribute either a non-carry-in or
a carry-in workload bound, with at most M-1 carry-in tasks in any busy
window.  Response times solve x = floor(Omega(x)/M) + C by monotone
fixpoint iteration seeded at C, aborting once x passes its bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from . import _kernels
from .model import RtTask, SecurityTask, TaskSystem, Tick


@dataclass(frozen=True)
class WcrtResult:
    task_id: str
    wcrt: Tick
    converged: bool
    iterations: int

    def to_json(self) -> dict:
        return {"id": self.task_id, "wcrt": self.wcrt, "converged": self.converged}


@dataclass(frozen=True)
class CarryInSplit:
    """Partition of the higher-priority security set into non-carry-in
    and carry-in tasks; at most M-1 may carry in."""

    nc: frozenset
    ci: frozenset

    def check(self, hp_ids, m: int) -> None:
        hp = set(hp_ids)
        if self.nc & self.ci:
            raise ValueError("carry-in split overlaps")
        if self.nc | self.ci != hp:
            raise ValueError("carry-in split does not cover the hp set")
        if len(self.ci) > m - 1:
            raise ValueError("more than M-1 carry-in tasks")


def rt_workload(c: Tick, t: Tick, x: Tick) -> Tick:
    """Largest execution demand of one periodic task in a window of length x."""
    if x <= 0:
        return 0
    return (x // t) * c + min(x % t, c)


def capped_interference(workload: Tick, x: Tick, c_s: Tick) -> Tick:
    """Interference on a job with WCET c_s in a window x; the +1 keeps
    the fixpoint iteration from stalling at its seed."""
    return min(workload, x - c_s + 1)


def rt_core_interference(core_tasks: Sequence[RtTask], x: Tick, c_s: Tick) -> Tick:
    """Interference of one core's RT partition: workloads summed, capped once."""
    total = sum(rt_workload(t.wcet, t.period, x) for t in core_tasks)
    return capped_interference(total, x, c_s)


def nc_security_workload(c: Tick, t: Tick, x: Tick) -> Tick:
    """Workload of a higher-priority security task released inside the window."""
    return rt_workload(c, t, x)


def ci_security_workload(c: Tick, t: Tick, r: Tick, x: Tick) -> Tick:
    """Workload of a carry-in security task: one partial leading job of
    at most C-1 ticks plus the in-window releases shifted by the
    earliest point the carried job can still occupy."""
    if r > t:
        raise ValueError("carry-in workload needs a schedulable task (R <= T)")
    if x <= 0:
        return 0
    xbar = c - 1 + t - r
    return nc_security_workload(c, t, max(x - xbar, 0)) + min(x, c - 1)


def total_interference(x: Tick, s: SecurityTask, system: TaskSystem,
                       hp_state: Mapping[str, tuple[Tick, Tick]],
                       split: CarryInSplit) -> Tick:
    """Interference on s over a window x for one carry-in split.

    hp_state maps each higher-priority security id to its (period, wcrt).
    """
    hp = system.hp_security(s.id)
    split.check([h.id for h in hp], system.cores)
    omega = 0
    for m in range(system.cores):
        omega += rt_core_interference(system.rt_on_core(m), x, s.wcet)
    for h in hp:
        period, wcrt = hp_state[h.id]
        if h.id in split.ci:
            w = ci_security_workload(h.wcet, period, wcrt, x)
        else:
            w = nc_security_workload(h.wcet, period, x)
        omega += capped_interference(w, x, s.wcet)
    return omega


def uniprocessor_rta(task: RtTask, hp_on_core: Sequence[RtTask]) -> WcrtResult:
    """Exact single-core response time under fixed priorities.

    Smallest fixpoint of t = C + sum(ceil(t/T_i) C_i) starting at C;
    not converged once t exceeds the deadline.
    """
    hp_c = np.array([t.wcet for t in hp_on_core], dtype=np.int64)
    hp_t = np.array([t.period for t in hp_on_core], dtype=np.int64)
    wcrt, converged, it = _kernels.uni_rta(task.wcet, task.deadline, hp_c, hp_t)
    return WcrtResult(task.id, int(wcrt), bool(converged), int(it))


def rt_wcrt(system: TaskSystem) -> dict[str, WcrtResult]:
    """Per-core response times for every RT task (security tasks are
    lower priority and never enter RT analysis)."""
    out = {}
    for m in range(system.cores):
        tasks = sorted(system.rt_on_core(m), key=lambda t: t.priority)
        for i, task in enumerate(tasks):
            out[task.id] = uniprocessor_rta(task, tasks[:i])
    return out


def _rt_arrays(system: TaskSystem):
    rt = system.rt_tasks
    if any(t.core is None for t in rt):
        raise ValueError("all RT tasks need a core assignment")
    rt_c = np.array([t.wcet for t in rt], dtype=np.int64)
    rt_t = np.array([t.period for t in rt], dtype=np.int64)
    rt_core = np.array([t.core for t in rt], dtype=np.int64)
    return rt_c, rt_t, rt_core


def carry_in_splits(hp_ids: Sequence[str], m: int):
    """All admissible carry-in splits of the hp set (|ci| <= M-1)."""
    ids = list(hp_ids)
    for k in range(min(m - 1, len(ids)) + 1):
        for ci in itertools.combinations(ids, k):
            yield CarryInSplit(nc=frozenset(ids) - frozenset(ci), ci=frozenset(ci))


def security_wcrt(s: SecurityTask, system: TaskSystem,
                  hp_solved: Mapping[str, tuple[Tick, Tick]],
                  bound: Optional[Tick] = None,
                  mode: str = "topdiff") -> WcrtResult:
    """Response-time bound of a migrating security task.

    hp_solved maps every higher-priority security id to (period, wcrt).
    Not converged once an iterate exceeds the bound (default: the task's
    maximum period).

    Modes differ in how the carry-in choice is maximized:

    * "topdiff" (default): inside each fixpoint window, add the M-1
      largest positive carry-in gains on top of the non-carry-in terms.
      Because every task is capped independently, this is exactly the
      window maximum over all admissible splits.
    * "enumerate": same iteration, but the window maximum is found by
      brute force over every admissible split; oracle for the ranking,
      identical result by construction (small task counts only).
    * "per_split": run the fixpoint separately per split and take the
      largest fixpoint.  This is the defining form; it never exceeds the
      window-maximized result but can undercut it by a few ticks when
      interference is dense, because the single-split iteration may
      settle in a gap that the window maximum steps over.
    """
    if bound is None:
        bound = s.max_period
    hp = system.hp_security(s.id)
    missing = [h.id for h in hp if h.id not in hp_solved]
    if missing:
        raise ValueError(f"missing period/wcrt for hp tasks: {missing}")
    rt_c, rt_t, rt_core = _rt_arrays(system)
    hp_c = np.array([h.wcet for h in hp], dtype=np.int64)
    hp_t = np.array([hp_solved[h.id][0] for h in hp], dtype=np.int64)
    hp_r = np.array([hp_solved[h.id][1] for h in hp], dtype=np.int64)

    if mode == "topdiff":
        x, conv, it = _kernels.migrating_wcrt_topdiff(
            system.cores, s.wcet, bound, rt_c, rt_t, rt_core, hp_c, hp_t, hp_r)
        return WcrtResult(s.id, int(x), bool(conv), int(it))
    if mode == "enumerate":
        if len(hp) > 16:
            raise ValueError("enumerate mode is limited to 16 hp tasks")
        x, conv, it = _kernels.migrating_wcrt_window_enum(
            system.cores, s.wcet, bound, rt_c, rt_t, rt_core, hp_c, hp_t, hp_r)
        return WcrtResult(s.id, int(x), bool(conv), int(it))
    if mode == "per_split":
        worst = 0
        iters = 0
        for split in carry_in_splits([h.id for h in hp], system.cores):
            mask = np.array([1 if h.id in split.ci else 0 for h in hp],
                            dtype=np.int64)
            x, conv, it = _kernels.migrating_wcrt_split(
                system.cores, s.wcet, bound, rt_c, rt_t, rt_core,
                hp_c, hp_t, hp_r, mask)
            iters = max(iters, int(it))
            if not conv:
                return WcrtResult(s.id, int(x), False, iters)
            worst = max(worst, int(x))
        return WcrtResult(s.id, worst, True, iters)
    raise ValueError(f"unknown mode {mode!r}")
