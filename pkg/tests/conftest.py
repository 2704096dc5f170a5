import math

import pytest

from rtsecint.allocation import AllocationError, best_fit_rt
from rtsecint.model import (RtTask, SecurityTask, assign_rm_priorities,
                            make_system)
from rtsecint.presets import micro_system, rover_system


@pytest.fixture
def micro():
    return micro_system()


@pytest.fixture
def rover():
    return rover_system()


def random_small_system(rng, cores=None, max_sec=8, rt_period_hi=50,
                        sec_tmax=(20, 120)):
    """Dense random system: short periods, chunky security tasks.

    The RT partition always passes the per-core response-time test
    (redrawn otherwise), matching the analysis preconditions.
    """
    m = cores or int(rng.integers(2, 5))
    while True:
        n_rt = int(rng.integers(0, 3 * m + 1))
        rt = []
        for i in range(n_rt):
            t = int(rng.integers(4, rt_period_hi + 1))
            c = int(rng.integers(1, max(2, t // 2)))
            rt.append(RtTask(f"rt{i}", c, t, t))
        rt = assign_rm_priorities(rt)
        try:
            rt = best_fit_rt(rt, m)
        except AllocationError:
            continue
        n_sec = int(rng.integers(1, max_sec + 1))
        sec = []
        for i in range(n_sec):
            c = int(rng.integers(1, 9))
            tmax = int(rng.integers(max(sec_tmax[0], c), sec_tmax[1] + 1))
            sec.append(SecurityTask(f"sec{i}", c, tmax, priority=n_rt + i))
        return make_system(m, rt, sec)


def random_regime_system(rng, max_sec=8):
    """Random system at the experiment's parameter scales: log-uniform
    RT periods, security tasks with generous period bounds."""
    m = int(rng.integers(2, 5))
    while True:
        n_rt = int(rng.integers(m, 3 * m + 1))
        rt = []
        for i in range(n_rt):
            t = int(round(math.exp(rng.uniform(math.log(10), math.log(100)))))
            u = rng.uniform(0.05, 0.6)
            rt.append(RtTask(f"rt{i}", max(1, round(u * t)), t, t))
        rt = assign_rm_priorities(rt)
        try:
            rt = best_fit_rt(rt, m)
        except AllocationError:
            continue
        n_sec = int(rng.integers(1, max_sec + 1))
        sec = []
        for i in range(n_sec):
            tmax = int(rng.integers(100, 401))
            sec.append(SecurityTask(f"sec{i}", int(rng.integers(1, 11)), tmax,
                                    priority=n_rt + i))
        return make_system(m, rt, sec)
