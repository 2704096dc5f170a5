"""Synthetic taskset generation.

Tasksets are grouped by base utilization: group i draws its target
utilization uniformly from [(0.01+0.1i)M, (0.1+0.1i)M].  Security tasks
take a fixed 30% share of the target.  Per-task utilizations come from
the fixed-sum simplex sampler, periods are log-uniform, WCETs round to
at least one tick, and the realized utilization must land back inside
the group band or the draw is discarded.  Only tasksets whose RT
partition passes the per-core response-time test are kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .allocation import AllocationError, best_fit_rt
from .model import (RtTask, SecurityTask, TaskSystem, Tick,
                    assign_rm_priorities, make_system, validate)


class GenerationError(RuntimeError):
    """Redraw budget exhausted for one taskset slot."""


@dataclass(frozen=True)
class GenSpec:
    cores: int
    seed: int = 0
    rt_period_range: tuple[Tick, Tick] = (10, 1000)
    sec_max_period_range: tuple[Tick, Tick] = (1500, 3000)
    security_share: float = 0.30
    tasksets_per_group: int = 250
    max_redraws: int = 1000

    def __post_init__(self):
        if self.cores < 1:
            raise ValueError("cores must be >= 1")
        if not 0.0 < self.security_share < 1.0:
            raise ValueError("security_share must be in (0, 1)")
        for lo, hi in (self.rt_period_range, self.sec_max_period_range):
            if not 1 <= lo <= hi:
                raise ValueError("period ranges must satisfy 1 <= lo <= hi")

    @property
    def n_rt_range(self) -> tuple[int, int]:
        return (3 * self.cores, 10 * self.cores)

    @property
    def n_sec_range(self) -> tuple[int, int]:
        return (2 * self.cores, 5 * self.cores)


def group_band(group: int, cores: int) -> tuple[Fraction, Fraction]:
    """Utilization band [(0.01+0.1i)M, (0.1+0.1i)M] of group i."""
    if not 0 <= group <= 9:
        raise ValueError("group index must be in 0..9")
    return (Fraction(1 + 10 * group, 100) * cores,
            Fraction(10 + 10 * group, 100) * cores)


def _rand_fixed_sum_unit(n: int, s: float, rng: np.random.Generator) -> np.ndarray:
    """One point uniform on the part of the [0,1]^n cube where the
    coordinates sum to s (the fixed-sum simplex-slice construction)."""
    if not 0 <= s <= n:
        raise ValueError("sum target outside [0, n]")
    if n == 1:
        return np.array([s])
    k = int(max(min(math.floor(s), n - 1), 0))
    s1 = s - np.arange(k, k - n, -1, dtype=float)
    s2 = np.arange(k + n, k, -1, dtype=float) - s
    tiny = np.finfo(float).tiny
    huge = np.finfo(float).max
    w = np.zeros((n, n + 1))
    w[0, 1] = huge
    t = np.zeros((n - 1, n))
    for i in range(2, n + 1):
        tmp1 = w[i - 2, 1:i + 1] * s1[:i] / i
        tmp2 = w[i - 2, 0:i] * s2[n - i:n] / i
        w[i - 1, 1:i + 1] = tmp1 + tmp2
        tmp3 = w[i - 1, 1:i + 1] + tiny
        tmp4 = s2[n - i:n] > s1[:i]
        t[i - 2, 0:i] = (tmp2 / tmp3) * tmp4 + (1 - tmp1 / tmp3) * (~tmp4)

    x = np.zeros(n)
    rt = rng.uniform(size=n - 1)
    rs = rng.uniform(size=n - 1)
    sm, pr = 0.0, 1.0
    j = k + 1
    ss = s
    for i in range(n - 1, 0, -1):
        e = 1 if rt[n - i - 1] <= t[i - 1, j - 1] else 0
        sx = rs[n - i - 1] ** (1.0 / i)
        sm += (1.0 - sx) * pr * ss / (i + 1)
        pr *= sx
        x[n - i - 1] = sm + pr * e
        ss -= e
        j -= e
    x[n - 1] = sm + pr * ss
    rng.shuffle(x)
    return x


def fixed_sum_utilizations(n: int, total: float, per_task_max: float,
                           rng: np.random.Generator) -> np.ndarray:
    """n utilizations in (0, per_task_max] summing to total."""
    if total <= 0:
        raise ValueError("total must be positive")
    if n * per_task_max < total:
        raise ValueError("infeasible: n * per_task_max < total")
    return _rand_fixed_sum_unit(n, total / per_task_max, rng) * per_task_max


def log_uniform_period(lo: Tick, hi: Tick, rng: np.random.Generator) -> Tick:
    """round(exp(uniform(ln lo, ln hi))), clamped into [lo, hi]."""
    v = round(math.exp(rng.uniform(math.log(lo), math.log(hi))))
    return int(min(max(v, lo), hi))


def _attempt(spec: GenSpec, group: int, rng: np.random.Generator
             ) -> Optional[TaskSystem]:
    m = spec.cores
    band_lo, band_hi = group_band(group, m)
    n_rt = int(rng.integers(spec.n_rt_range[0], spec.n_rt_range[1] + 1))
    n_sec = int(rng.integers(spec.n_sec_range[0], spec.n_sec_range[1] + 1))
    u_total = rng.uniform(float(band_lo), float(band_hi))
    u_sec = spec.security_share * u_total
    u_rt = u_total - u_sec

    rt_utils = fixed_sum_utilizations(n_rt, u_rt, 1.0, rng)
    sec_utils = fixed_sum_utilizations(n_sec, u_sec, 1.0, rng)

    rt = []
    for i, u in enumerate(rt_utils):
        t = log_uniform_period(*spec.rt_period_range, rng)
        c = max(1, round(u * t))
        rt.append(RtTask(id=f"rt{i}", wcet=c, period=t, deadline=t))
    rt = assign_rm_priorities(rt)

    sec_raw = []
    for i, u in enumerate(sec_utils):
        tmax = log_uniform_period(*spec.sec_max_period_range, rng)
        c = max(1, round(u * tmax))
        sec_raw.append((tmax, f"sec{i}", c))
    sec = [SecurityTask(id=sid, wcet=c, max_period=tmax, priority=n_rt + rank)
           for rank, (tmax, sid, c) in enumerate(sorted(sec_raw))]

    realized = sum((Fraction(t.wcet, t.period) for t in rt), Fraction(0)) \
        + sum((Fraction(s.wcet, s.max_period) for s in sec), Fraction(0))
    if not band_lo <= realized <= band_hi:
        return None
    try:
        rt = best_fit_rt(rt, m)
    except AllocationError:
        return None
    system = make_system(m, rt, sec)
    problems = validate(system)
    if problems:
        raise AssertionError(f"generated invalid system: {problems}")
    return system


def generate_taskset(spec: GenSpec, group: int, index: int) -> TaskSystem:
    """Generate one valid, RT-schedulable taskset for a group slot.

    Deterministic in (spec.seed, cores, group, index).  Draws failing
    the utilization band or the RT partition are discarded and redrawn,
    up to the configured budget.
    """
    for attempt in range(spec.max_redraws):
        rng = np.random.default_rng(np.random.SeedSequence(
            (spec.seed, spec.cores, group, index, attempt)))
        system = _attempt(spec, group, rng)
        if system is not None:
            return system
    raise GenerationError(
        f"gave up after {spec.max_redraws} redraws "
        f"(cores={spec.cores}, group={group}, index={index}, seed={spec.seed})")
