"""Task and platform model.

All timing quantities (WCETs, periods, deadlines, instants) are integer
clock ticks; generated workloads use 1 tick = 1 ms.  Real-time tasks are
statically partitioned and scheduled fixed-priority preemptive per core.
Security tasks sit below every RT priority and may migrate between cores
at runtime; their period is a free parameter bounded by ``max_period``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

Tick = int


@dataclass(frozen=True)
class RtTask:
    """A partitioned hard real-time task (constrained deadline D <= T)."""

    id: str
    wcet: Tick
    period: Tick
    deadline: Tick
    priority: int = 0
    core: Optional[int] = None

    @property
    def utilization(self) -> Fraction:
        return Fraction(self.wcet, self.period)


@dataclass(frozen=True)
class SecurityTask:
    """A migrating monitoring task; ``period`` stays None until solved."""

    id: str
    wcet: Tick
    max_period: Tick
    priority: int = 0
    period: Optional[Tick] = None
    core: Optional[int] = None

    def utilization(self, source: str = "max") -> Fraction:
        if source == "max":
            return Fraction(self.wcet, self.max_period)
        if source == "solved":
            if self.period is None:
                raise ValueError(f"security task {self.id} has no solved period")
            return Fraction(self.wcet, self.period)
        raise ValueError(f"unknown period source {source!r}")


@dataclass(frozen=True)
class Platform:
    """An identical-multicore platform with ``cores`` >= 1 cores."""

    cores: int


@dataclass(frozen=True)
class TaskSystem:
    """Platform plus RT partition plus security tasks.

    ``security_tasks`` is kept in descending priority order (highest
    first), so the higher/lower-priority sets of a task are simply the
    list prefix/suffix around it.
    """

    platform: Platform
    rt_tasks: tuple[RtTask, ...]
    security_tasks: tuple[SecurityTask, ...]

    @property
    def cores(self) -> int:
        return self.platform.cores

    def rt_on_core(self, core: int) -> tuple[RtTask, ...]:
        return tuple(t for t in self.rt_tasks if t.core == core)

    def security_index(self, task_id: str) -> int:
        for i, s in enumerate(self.security_tasks):
            if s.id == task_id:
                return i
        raise KeyError(task_id)

    def hp_security(self, task_id: str) -> tuple[SecurityTask, ...]:
        """Security tasks with priority above the given one."""
        return self.security_tasks[: self.security_index(task_id)]

    def lp_security(self, task_id: str) -> tuple[SecurityTask, ...]:
        """Security tasks with priority below the given one."""
        return self.security_tasks[self.security_index(task_id) + 1 :]

    def with_security_periods(self, periods: Mapping[str, Tick]) -> "TaskSystem":
        sec = tuple(
            replace(s, period=periods[s.id]) if s.id in periods else s
            for s in self.security_tasks
        )
        return replace(self, security_tasks=sec)

    def with_security_cores(self, cores: Mapping[str, int]) -> "TaskSystem":
        sec = tuple(
            replace(s, core=cores[s.id]) if s.id in cores else s
            for s in self.security_tasks
        )
        return replace(self, security_tasks=sec)


def make_system(cores: int,
                rt_tasks: Iterable[RtTask],
                security_tasks: Iterable[SecurityTask]) -> TaskSystem:
    """Build a TaskSystem, ordering security tasks by descending priority."""
    sec = tuple(sorted(security_tasks, key=lambda s: s.priority))
    return TaskSystem(Platform(cores), tuple(rt_tasks), sec)


def assign_rm_priorities(rt_tasks: Sequence[RtTask]) -> list[RtTask]:
    """Assign rate-monotonic priorities: shorter period wins, ties by id.

    Priorities are 0..n-1 with 0 highest.  Input order is preserved;
    re-running on the result is a fixpoint.
    """
    order = sorted(rt_tasks, key=lambda t: (t.period, t.id))
    prio = {t.id: p for p, t in enumerate(order)}
    return [replace(t, priority=prio[t.id]) for t in rt_tasks]


def validate(system: TaskSystem) -> list[str]:
    """Check every model invariant; returns the list of violations (empty = ok)."""
    violations = []
    m = system.platform.cores
    if m < 1:
        violations.append("platform: core count must be >= 1")

    seen_ids = set()
    for t in list(system.rt_tasks) + list(system.security_tasks):
        if t.id in seen_ids:
            violations.append(f"{t.id}: duplicate task id")
        seen_ids.add(t.id)

    for t in system.rt_tasks:
        if t.wcet < 1:
            violations.append(f"{t.id}: wcet must be >= 1")
        if not (t.wcet <= t.deadline <= t.period):
            violations.append(f"{t.id}: constrained deadline requires C <= D <= T")
        if t.core is not None and not (0 <= t.core < m):
            violations.append(f"{t.id}: core index out of range")

    # RM consistency: strictly shorter period implies higher priority.
    for a in system.rt_tasks:
        for b in system.rt_tasks:
            if a.period < b.period and a.priority >= b.priority:
                violations.append(
                    f"{a.id}/{b.id}: rate-monotonic order violated")

    for s in system.security_tasks:
        if s.wcet < 1:
            violations.append(f"{s.id}: wcet must be >= 1")
        if s.wcet > s.max_period:
            violations.append(f"{s.id}: wcet exceeds max period")
        if s.period is not None and not (s.wcet <= s.period <= s.max_period):
            violations.append(f"{s.id}: solved period outside [C, T^max]")

    # Security tasks sit strictly below every RT task (larger number =
    # lower priority), and all priorities form a strict total order.
    if system.rt_tasks and system.security_tasks:
        max_rt = max(t.priority for t in system.rt_tasks)
        for s in system.security_tasks:
            if s.priority <= max_rt:
                violations.append(f"{s.id}: security priority must be below RT")
    prios = [t.priority for t in system.rt_tasks] + \
            [s.priority for s in system.security_tasks]
    if len(set(prios)) != len(prios):
        violations.append("priorities are not a strict total order")

    sec_prios = [s.priority for s in system.security_tasks]
    if sec_prios != sorted(sec_prios):
        violations.append("security tasks not in descending priority order")

    return violations


def total_utilization(system: TaskSystem, source: str = "max") -> Fraction:
    """Exact utilization sum C/T over all tasks.

    ``source`` picks the security period: "max" uses the designer bound,
    "solved" uses the computed period (which must be present).
    """
    u = Fraction(0)
    for t in system.rt_tasks:
        u += t.utilization
    for s in system.security_tasks:
        u += s.utilization(source)
    return u


_RT_FIELDS = {"id", "wcet", "period", "deadline", "core"}
_SEC_FIELDS = {"id", "wcet", "max_period", "priority"}


class SystemFormatError(ValueError):
    """Raised for malformed task-system documents."""


def _check_fields(entry: dict, allowed: set, kind: str) -> None:
    unknown = set(entry) - allowed
    if unknown:
        raise SystemFormatError(
            f"unknown field(s) in {kind} entry: {', '.join(sorted(unknown))}")
    missing = allowed - set(entry)
    if missing:
        raise SystemFormatError(
            f"missing field(s) in {kind} entry: {', '.join(sorted(missing))}")


def system_from_json(doc: dict) -> TaskSystem:
    """Parse the task-system document.

    Schema: {"cores": M, "rt": [{"id","wcet","period","deadline","core"}...],
    "security": [{"id","wcet","max_period","priority"}...]}.  Unknown
    fields are rejected.  RT priorities are (re)assigned rate-monotonic;
    a null core leaves the task unpartitioned.
    """
    if not isinstance(doc, dict):
        raise SystemFormatError("document must be a JSON object")
    unknown = set(doc) - {"cores", "rt", "security"}
    if unknown:
        raise SystemFormatError(f"unknown top-level field(s): {', '.join(sorted(unknown))}")
    try:
        cores = int(doc["cores"])
    except (KeyError, TypeError, ValueError):
        raise SystemFormatError("missing or malformed 'cores'")

    try:
        rt = []
        for entry in doc.get("rt", []):
            if not isinstance(entry, dict):
                raise SystemFormatError("rt entries must be objects")
            _check_fields(entry, _RT_FIELDS, "rt")
            core = entry["core"]
            rt.append(RtTask(id=str(entry["id"]), wcet=int(entry["wcet"]),
                             period=int(entry["period"]),
                             deadline=int(entry["deadline"]),
                             core=None if core is None else int(core)))
        rt = assign_rm_priorities(rt)

        base = len(rt)
        sec = []
        for entry in doc.get("security", []):
            if not isinstance(entry, dict):
                raise SystemFormatError("security entries must be objects")
            _check_fields(entry, _SEC_FIELDS, "security")
            sec.append(SecurityTask(id=str(entry["id"]),
                                    wcet=int(entry["wcet"]),
                                    max_period=int(entry["max_period"]),
                                    priority=base + int(entry["priority"])))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SystemFormatError):
            raise
        raise SystemFormatError(f"malformed task entry: {exc}") from exc
    return make_system(cores, rt, sec)


def system_to_json(system: TaskSystem) -> dict:
    base = len(system.rt_tasks)
    return {
        "cores": system.platform.cores,
        "rt": [{"id": t.id, "wcet": t.wcet, "period": t.period,
                "deadline": t.deadline, "core": t.core}
               for t in system.rt_tasks],
        "security": [{"id": s.id, "wcet": s.wcet, "max_period": s.max_period,
                      "priority": s.priority - base}
                     for s in system.security_tasks],
    }


def load_system(path) -> TaskSystem:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SystemFormatError(f"invalid JSON: {exc}") from exc
    return system_from_json(doc)


def save_system(system: TaskSystem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(system_to_json(system), fh, indent=2)
        fh.write("\n")
