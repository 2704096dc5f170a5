"""Tick-accurate preemptive scheduling simulator.

Dispatch decisions happen at every integer tick.  Three policies:

* ``partitioned``: every task, security included, runs fixed-priority
  preemptive on its own core.
* ``semi_partitioned``: RT tasks stay on their cores; ready security
  jobs then fill idle cores in global priority order, lowest core index
  to the highest-priority job, migrating freely between ticks.
* ``global``: the M highest-priority ready jobs run, same core rule.

Jobs of one task run FIFO and never in parallel with themselves.
Execution times are either the full WCET or a seeded uniform fraction of
it; release offsets are zero or seeded-uniform within one period.  The
same seed always reproduces the same trace.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import lcm

import numpy as np

from . import _kernels
from .model import TaskSystem, Tick

_POLICIES = {
    "partitioned": _kernels.POLICY_PARTITIONED,
    "semi_partitioned": _kernels.POLICY_SEMI,
    "global": _kernels.POLICY_GLOBAL,
}


@dataclass(frozen=True)
class SimConfig:
    horizon: Tick
    policy: str = "semi_partitioned"
    release_offsets: str = "synchronous"        # synchronous | random
    execution_time_model: str = "worst_case"    # worst_case | uniform_fraction
    exec_fraction_min: float = 0.5
    seed: int = 0


@dataclass(frozen=True)
class IntrusionScenario:
    """Seeded injection times checked against one detector task."""

    detector_task_id: str
    injection_times: tuple[Tick, ...]


@dataclass
class SimTrace:
    """Per-core, per-tick occupancy plus per-job release/start/completion."""

    cores: int
    horizon: Tick
    task_ids: list[str]
    task_is_rt: np.ndarray
    occupant_task: np.ndarray   # (cores, horizon), task index or -1
    occupant_job: np.ndarray    # (cores, horizon), job index within task
    job_offsets: np.ndarray     # flat job array slicing, len n_tasks+1
    job_release: np.ndarray
    job_start: np.ndarray       # -1 if never started
    job_complete: np.ndarray    # -1 if never completed

    def jobs_of(self, task_id: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        i = self.task_ids.index(task_id)
        lo, hi = self.job_offsets[i], self.job_offsets[i + 1]
        return (self.job_release[lo:hi], self.job_start[lo:hi],
                self.job_complete[lo:hi])

    def to_csv(self, path) -> None:
        """Rows tick,core,job_id,task_id for every occupied core-tick."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["tick", "core", "job_id", "task_id"])
            for t in range(self.horizon):
                for c in range(self.cores):
                    i = self.occupant_task[c, t]
                    if i >= 0:
                        tid = self.task_ids[i]
                        w.writerow([t, c, f"{tid}#{self.occupant_job[c, t]}", tid])


@dataclass
class SimStats:
    response_max: dict[str, Tick]
    response_mean: dict[str, float]
    completed_jobs: dict[str, int]
    context_switches: int
    migrations: int
    deadline_misses: int
    rt_deadline_misses: int
    detection_latencies: list[Tick] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "response_max": self.response_max,
            "response_mean": self.response_mean,
            "completed_jobs": self.completed_jobs,
            "context_switches": self.context_switches,
            "migrations": self.migrations,
            "deadline_misses": self.deadline_misses,
            "rt_deadline_misses": self.rt_deadline_misses,
            "detection_latencies": list(self.detection_latencies),
        }


def default_horizon(system: TaskSystem) -> Tick:
    """Hyperperiod when small, else 100x the largest period."""
    periods = [t.period for t in system.rt_tasks]
    periods += [s.period if s.period is not None else s.max_period
                for s in system.security_tasks]
    if not periods:
        return 1
    cap = 100 * max(periods)
    hyper = 1
    for p in periods:
        hyper = lcm(hyper, p)
        if hyper > cap:
            return cap
    return hyper


def _task_arrays(system: TaskSystem, config: SimConfig):
    m = system.cores
    tasks = []
    for t in system.rt_tasks:
        if t.core is None and config.policy != "global":
            raise ValueError(f"RT task {t.id} has no core")
        core = t.core if t.core is not None else -1
        tasks.append((t.id, t.wcet, t.period, t.deadline, True, core, t.priority))
    for s in system.security_tasks:
        if s.period is None:
            raise ValueError(f"security task {s.id} has no resolved period")
        core = s.core if s.core is not None else -1
        if config.policy == "partitioned" and core < 0:
            raise ValueError(f"security task {s.id} has no core for the "
                             "partitioned policy")
        tasks.append((s.id, s.wcet, s.period, s.period, False, core, s.priority))

    ids = [x[0] for x in tasks]
    wcet = np.array([x[1] for x in tasks], dtype=np.int64)
    period = np.array([x[2] for x in tasks], dtype=np.int64)
    dl = np.array([x[3] for x in tasks], dtype=np.int64)
    is_rt = np.array([x[4] for x in tasks], dtype=np.int64)
    core = np.array([x[5] for x in tasks], dtype=np.int64)
    prio = np.array([x[6] for x in tasks], dtype=np.int64)
    prio_order = np.argsort(prio, kind="stable").astype(np.int64)

    rng = np.random.default_rng(np.random.SeedSequence((config.seed, 0xA11)))
    n = len(tasks)
    if config.release_offsets == "synchronous":
        offset = np.zeros(n, dtype=np.int64)
    elif config.release_offsets == "random":
        offset = np.array([rng.integers(0, p) for p in period], dtype=np.int64)
    else:
        raise ValueError(f"unknown release_offsets {config.release_offsets!r}")

    n_jobs = np.zeros(n, dtype=np.int64)
    for i in range(n):
        if offset[i] < config.horizon:
            n_jobs[i] = (config.horizon - offset[i] - 1) // period[i] + 1
    job_off = np.zeros(n + 1, dtype=np.int64)
    job_off[1:] = np.cumsum(n_jobs)

    total = int(job_off[-1])
    exec_dur = np.zeros(total, dtype=np.int64)
    if config.execution_time_model == "worst_case":
        for i in range(n):
            exec_dur[job_off[i]:job_off[i + 1]] = wcet[i]
    elif config.execution_time_model == "uniform_fraction":
        lo = config.exec_fraction_min
        for i in range(n):
            frac = rng.uniform(lo, 1.0, size=int(n_jobs[i]))
            dur = np.maximum(1, np.rint(frac * wcet[i])).astype(np.int64)
            exec_dur[job_off[i]:job_off[i + 1]] = dur
    else:
        raise ValueError(
            f"unknown execution_time_model {config.execution_time_model!r}")

    return (ids, wcet, period, offset, dl, is_rt, core, prio_order,
            n_jobs, job_off, exec_dur, m)


def simulate(system: TaskSystem, config: SimConfig) -> tuple[SimTrace, SimStats]:
    """Run one deterministic simulation; returns the trace and its stats."""
    if config.horizon < 1:
        raise ValueError("horizon must be >= 1")
    if config.policy not in _POLICIES:
        raise ValueError(f"unknown policy {config.policy!r}")
    (ids, wcet, period, offset, dl, is_rt, core, prio_order,
     n_jobs, job_off, exec_dur, m) = _task_arrays(system, config)

    (occ_task, occ_job, job_release, job_start, job_complete,
     cs, migrations, misses, rt_misses) = _kernels.simulate_ticks(
        m, config.horizon, _POLICIES[config.policy],
        wcet, period, offset, dl, is_rt, core, prio_order,
        n_jobs, job_off, exec_dur)

    trace = SimTrace(cores=m, horizon=config.horizon, task_ids=ids,
                     task_is_rt=is_rt.astype(bool),
                     occupant_task=occ_task, occupant_job=occ_job,
                     job_offsets=job_off, job_release=job_release,
                     job_start=job_start, job_complete=job_complete)

    response_max, response_mean, completed = {}, {}, {}
    for i, tid in enumerate(ids):
        lo, hi = job_off[i], job_off[i + 1]
        done = job_complete[lo:hi] >= 0
        resp = job_complete[lo:hi][done] - job_release[lo:hi][done]
        completed[tid] = int(done.sum())
        response_max[tid] = int(resp.max()) if resp.size else 0
        response_mean[tid] = float(resp.mean()) if resp.size else 0.0

    stats = SimStats(response_max=response_max, response_mean=response_mean,
                     completed_jobs=completed, context_switches=int(cs),
                     migrations=int(migrations), deadline_misses=int(misses),
                     rt_deadline_misses=int(rt_misses))
    return trace, stats


def count_context_switches(trace: SimTrace) -> int:
    """Job-to-different-job boundaries per core; transitions to or from
    idle are free."""
    occ = trace.occupant_task.astype(np.int64) * (trace.horizon + 1) \
        + trace.occupant_job
    occ[trace.occupant_task < 0] = -1
    prev, cur = occ[:, :-1], occ[:, 1:]
    return int(((prev >= 0) & (cur >= 0) & (prev != cur)).sum())


def count_migrations(trace: SimTrace) -> int:
    """Times a job resumes on a different core than it last ran on."""
    migrations = 0
    n_jobs = int(trace.job_offsets[-1])
    last_core = np.full(n_jobs, -1, dtype=np.int64)
    uid = trace.occupant_task.astype(np.int64)
    for t in range(trace.horizon):
        for c in range(trace.cores):
            i = uid[c, t]
            if i < 0:
                continue
            g = int(trace.job_offsets[i]) + int(trace.occupant_job[c, t])
            if last_core[g] >= 0 and last_core[g] != c:
                migrations += 1
            last_core[g] = c
    return migrations


@dataclass
class DetectionResult:
    latencies: list[Tick]
    censored: int

    @property
    def mean(self) -> float:
        return float(np.mean(self.latencies)) if self.latencies else float("nan")


def measure_detection(trace: SimTrace, scenario: IntrusionScenario,
                      rule: str = "start_after") -> DetectionResult:
    """Latency from each injection to the completion of the first
    qualifying scan of the detector.

    A scan qualifies when it starts at or after the injection (a scan
    already underway cannot vouch for state modified behind it); with
    rule="completion_after" any scan completing after the injection
    counts.  Injections with no qualifying completed scan inside the
    horizon are censored.
    """
    release, start, complete = trace.jobs_of(scenario.detector_task_id)
    started = start >= 0
    start = start[started]
    complete = complete[started]
    done = complete[complete >= 0]   # FIFO: unfinished jobs trail, so sorted
    latencies: list[Tick] = []
    censored = 0
    for t in scenario.injection_times:
        if rule == "start_after":
            k = int(np.searchsorted(start, t, side="left"))
            if k >= start.size or complete[k] < 0:
                censored += 1
            else:
                latencies.append(int(complete[k]) - int(t))
        elif rule == "completion_after":
            k = int(np.searchsorted(done, t, side="right"))
            if k >= done.size:
                censored += 1
            else:
                latencies.append(int(done[k]) - int(t))
        else:
            raise ValueError(f"unknown detection rule {rule!r}")
    return DetectionResult(latencies, censored)


def make_scenario(detector_task_id: str, count: int, horizon: Tick,
                  seed: int) -> IntrusionScenario:
    """Uniform seeded injection times over the horizon."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xD37)))
    times = sorted(int(x) for x in rng.integers(0, horizon, size=count))
    return IntrusionScenario(detector_task_id, tuple(times))


def audit_trace(system: TaskSystem, config: SimConfig,
                trace: SimTrace) -> list[str]:
    """Replay-independent invariant check of a trace.

    Verifies: no intra-job parallelism; RT jobs only on their own core
    under the partitioned policies; priority compliance per policy; and
    work conservation for security jobs under semi-partitioned dispatch.
    Returns violation strings (empty = clean).
    """
    violations = []
    n = len(trace.task_ids)
    ids = trace.task_ids
    is_rt = trace.task_is_rt
    core_of = {}
    prio = {}
    for t in system.rt_tasks:
        core_of[t.id] = t.core
        prio[t.id] = t.priority
    for s in system.security_tasks:
        core_of[s.id] = s.core if s.core is not None else -1
        prio[s.id] = s.priority

    for t in range(trace.horizon):
        running = {}
        for c in range(trace.cores):
            i = trace.occupant_task[c, t]
            if i < 0:
                continue
            key = (int(i), int(trace.occupant_job[c, t]))
            if key in running:
                violations.append(f"t={t}: job {ids[i]}#{key[1]} on two cores")
            running[key] = c
            if is_rt[i] and config.policy != "global" \
                    and core_of[ids[i]] != c:
                violations.append(f"t={t}: RT job {ids[i]} ran off its core")

        running_tasks = {i for i, _ in running}
        ready = []
        for i in range(n):
            lo = trace.job_offsets[i]
            hi = trace.job_offsets[i + 1]
            for g in range(lo, hi):
                if trace.job_complete[g] >= 0 and trace.job_complete[g] <= t:
                    continue
                ready.append((prio[ids[i]], i, trace.job_release[g] <= t))
                break

        if config.policy == "semi_partitioned":
            for c in range(trace.cores):
                rt_ready = [(p, i) for p, i, rdy in ready
                            if rdy and is_rt[i] and core_of[ids[i]] == c]
                if rt_ready:
                    want = min(rt_ready)[1]
                    if trace.occupant_task[c, t] != want:
                        violations.append(
                            f"t={t}: core {c} did not run its ready RT "
                            f"task {ids[want]}")
            idle = [c for c in range(trace.cores)
                    if trace.occupant_task[c, t] < 0]
            waiting_sec = [i for p, i, rdy in ready
                           if rdy and not is_rt[i] and i not in running_tasks]
            if idle and waiting_sec:
                violations.append(
                    f"t={t}: core(s) {idle} idle while security task(s) "
                    f"{[ids[i] for i in waiting_sec]} ready")
            # priority compliance: executing security set must be the
            # highest-priority ready ones
            ready_sec = sorted((p, i) for p, i, rdy in ready
                               if rdy and not is_rt[i])
            exec_sec = [i for i in running_tasks if not is_rt[i]]
            k = len(exec_sec)
            expected = {i for _, i in ready_sec[:k]}
            if set(exec_sec) != expected:
                violations.append(f"t={t}: security dispatch out of priority order")
        elif config.policy == "partitioned":
            for c in range(trace.cores):
                occ = trace.occupant_task[c, t]
                cand = [(p, i) for p, i, rdy in ready
                        if rdy and core_of[ids[i]] == c]
                if cand:
                    want = min(cand)[1]
                    if occ != want:
                        violations.append(
                            f"t={t}: core {c} ran "
                            f"{ids[occ] if occ >= 0 else 'idle'} "
                            f"instead of {ids[want]}")
        else:  # global
            ready_all = sorted((p, i) for p, i, rdy in ready if rdy)
            k = len(running_tasks)
            expected = {i for _, i in ready_all[:min(len(ready_all), trace.cores)]}
            if len(ready_all) >= trace.cores and k < trace.cores:
                violations.append(f"t={t}: idle core under global policy")
            if not running_tasks <= expected:
                violations.append(f"t={t}: global dispatch out of priority order")
    return violations
