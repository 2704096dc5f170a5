"""Task-to-core placement.

RT tasks are packed best-fit in priority order: a task goes to the
schedulable core that ends up most utilized, so load concentrates and
whole cores stay free for later tasks.  Security placement (used by the
fully partitioned baselines) pins one task to one core and reports the
response time it would get there, which doubles as its smallest usable
period.
"""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .analysis import WcrtResult, uniprocessor_rta
from .model import RtTask, SecurityTask, TaskSystem


class AllocationError(Exception):
    """No core can take the task; carries the task id."""

    def __init__(self, task_id: str):
        super().__init__(f"no feasible core for task {task_id}")
        self.task_id = task_id


def best_fit_rt(rt_tasks: Sequence[RtTask], cores: int) -> list[RtTask]:
    """Partition RT tasks onto cores, best-fit by utilization.

    Tasks are placed in descending priority order; each goes to the
    schedulable core (single-core response within deadline, given the
    tasks already there) with the largest utilization, ties to the
    lowest index.  Raises AllocationError for the first unplaceable
    task.  Returns the tasks in input order with cores assigned.
    """
    placed: dict[int, list[RtTask]] = {m: [] for m in range(cores)}
    util = [Fraction(0)] * cores
    assignment: dict[str, int] = {}
    for task in sorted(rt_tasks, key=lambda t: t.priority):
        best = None
        for m in range(cores):
            if uniprocessor_rta(task, placed[m]).converged:
                if best is None or util[m] > util[best]:
                    best = m
        if best is None:
            raise AllocationError(task.id)
        placed[best].append(task)
        util[best] += task.utilization
        assignment[task.id] = best
    return [replace(t, core=assignment[t.id]) for t in rt_tasks]


def best_fit_security_per_core(s: SecurityTask, core: int, system: TaskSystem,
                               placed: Sequence[SecurityTask]) -> WcrtResult:
    """Response time of s if bound to one core, under that core's RT
    tasks and the higher-priority security tasks already placed there.

    The returned wcrt is the smallest period s could run with on that
    core; converged is False when even the maximum period is too short.
    """
    hp = [(t.wcet, t.period) for t in system.rt_on_core(core)]
    hp += [(p.wcet, p.period) for p in placed if p.core == core]
    hp_c = np.array([c for c, _ in hp], dtype=np.int64)
    hp_t = np.array([t for _, t in hp], dtype=np.int64)
    wcrt, conv, it = _kernels.uni_rta(s.wcet, s.max_period, hp_c, hp_t)
    return WcrtResult(s.id, int(wcrt), bool(conv), int(it))
