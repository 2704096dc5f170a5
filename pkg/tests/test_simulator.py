import numpy as np
import pytest

from rtsecint.model import RtTask, SecurityTask, make_system
from rtsecint.period_opt import select_periods
from rtsecint.simulator import (IntrusionScenario, SimConfig, SimTrace,
                                audit_trace, count_context_switches,
                                count_migrations, default_horizon,
                                make_scenario, measure_detection, simulate)

from conftest import random_small_system


def solved_micro(micro):
    sel = select_periods(micro)
    return micro.with_security_periods(sel.periods)


def test_micro_first_completions(micro):
    solved = solved_micro(micro)
    trace, stats = simulate(solved, SimConfig(horizon=60))
    _, start1, comp1 = trace.jobs_of("sigma1")
    _, start2, comp2 = trace.jobs_of("sigma2")
    assert (start1[0], comp1[0]) == (2, 3)
    assert (start2[0], comp2[0]) == (2, 4)
    assert stats.deadline_misses == 0


def test_empty_security_matches_rt_only_schedule(micro):
    bare = make_system(2, micro.rt_tasks, [])
    trace, stats = simulate(bare, SimConfig(horizon=50, policy="partitioned"))
    trace2, stats2 = simulate(bare, SimConfig(horizon=50,
                                              policy="semi_partitioned"))
    assert np.array_equal(trace.occupant_task, trace2.occupant_task)
    assert stats.migrations == stats2.migrations == 0


def test_policies_respect_rt_binding(micro):
    solved = solved_micro(micro)
    for policy in ("partitioned", "semi_partitioned"):
        sys_for_policy = solved
        if policy == "partitioned":
            sys_for_policy = solved.with_security_cores(
                {"sigma1": 0, "sigma2": 1})
        cfg = SimConfig(horizon=200, policy=policy)
        trace, _ = simulate(sys_for_policy, cfg)
        assert audit_trace(sys_for_policy, cfg, trace) == []


def test_simulation_requires_periods(micro):
    with pytest.raises(ValueError, match="no resolved period"):
        simulate(micro, SimConfig(horizon=10))


def test_partitioned_requires_security_cores(micro):
    solved = solved_micro(micro)
    with pytest.raises(ValueError, match="no core"):
        simulate(solved, SimConfig(horizon=10, policy="partitioned"))


def test_determinism(micro):
    solved = solved_micro(micro)
    cfg = SimConfig(horizon=300, policy="semi_partitioned",
                    release_offsets="random",
                    execution_time_model="uniform_fraction", seed=9)
    t1, s1 = simulate(solved, cfg)
    t2, s2 = simulate(solved, cfg)
    assert np.array_equal(t1.occupant_task, t2.occupant_task)
    assert s1.to_json() == s2.to_json()


def _hand_trace(rows):
    """Build a SimTrace from a per-core list of (task_idx, job_idx) or None."""
    cores = len(rows)
    horizon = len(rows[0])
    occ_t = np.full((cores, horizon), -1, dtype=np.int32)
    occ_j = np.full((cores, horizon), -1, dtype=np.int32)
    for c, row in enumerate(rows):
        for t, cell in enumerate(row):
            if cell is not None:
                occ_t[c, t], occ_j[c, t] = cell
    return SimTrace(cores=cores, horizon=horizon, task_ids=["A", "B"],
                    task_is_rt=np.array([False, False]),
                    occupant_task=occ_t, occupant_job=occ_j,
                    job_offsets=np.array([0, 4, 8]),
                    job_release=np.zeros(8, dtype=np.int64),
                    job_start=np.zeros(8, dtype=np.int64),
                    job_complete=np.zeros(8, dtype=np.int64))


def test_context_switch_counting_rules():
    # uninterrupted single job: no switches
    solo = _hand_trace([[(0, 0), (0, 0), (0, 0), (0, 0)]])
    assert count_context_switches(solo) == 0
    # A,B,A,B alternation on one core: three boundaries
    alt = _hand_trace([[(0, 0), (1, 0), (0, 0), (1, 0)]])
    assert count_context_switches(alt) == 3
    # idle boundaries are free
    gaps = _hand_trace([[(0, 0), None, (1, 0), None, (0, 0)]])
    assert count_context_switches(gaps) == 0
    # a new job of the same task is still a different job
    jobs = _hand_trace([[(0, 0), (0, 1)]])
    assert count_context_switches(jobs) == 1


def test_migration_counting():
    # job 0 of task A resumes on the other core: one migration
    moved = _hand_trace([[(0, 0), None], [None, (0, 0)]])
    assert count_migrations(moved) == 1
    stayed = _hand_trace([[(0, 0), (0, 0)], [None, None]])
    assert count_migrations(stayed) == 0


def test_kernel_counters_match_trace_recount(micro):
    solved = solved_micro(micro)
    cfg = SimConfig(horizon=500, policy="semi_partitioned")
    trace, stats = simulate(solved, cfg)
    assert stats.context_switches == count_context_switches(trace)
    assert stats.migrations == count_migrations(trace)


def test_detection_micro(micro):
    solved = solved_micro(micro)
    trace, _ = simulate(solved, SimConfig(horizon=60))
    res = measure_detection(trace, IntrusionScenario("sigma1", (0,)))
    assert res.latencies == [3] and res.censored == 0


def test_detection_uninterrupted_scan():
    system = make_system(1, [], [SecurityTask("s", 5, 50, priority=0)])
    solved = system.with_security_periods({"s": 20})
    trace, _ = simulate(solved, SimConfig(horizon=200))
    # scans start at 0, 20, 40...; injection at 7 waits for the scan at 20
    res = measure_detection(trace, IntrusionScenario("s", (7,)))
    assert res.latencies == [5 + (20 - 7)]


def test_detection_censored_after_last_scan():
    system = make_system(1, [], [SecurityTask("s", 5, 50, priority=0)])
    solved = system.with_security_periods({"s": 20})
    trace, _ = simulate(solved, SimConfig(horizon=50))
    res = measure_detection(trace, IntrusionScenario("s", (49,)))
    assert res.latencies == [] and res.censored == 1


def test_detection_completion_rule():
    system = make_system(1, [], [SecurityTask("s", 5, 50, priority=0)])
    solved = system.with_security_periods({"s": 20})
    trace, _ = simulate(solved, SimConfig(horizon=200))
    # a scan underway at the injection counts under the completion rule
    res = measure_detection(trace, IntrusionScenario("s", (2,)),
                            rule="completion_after")
    assert res.latencies == [3]
    res2 = measure_detection(trace, IntrusionScenario("s", (2,)))
    assert res2.latencies == [5 + 18]


def test_make_scenario_deterministic():
    a = make_scenario("s", 10, 1000, 5)
    b = make_scenario("s", 10, 1000, 5)
    assert a == b
    assert all(0 <= t < 1000 for t in a.injection_times)


def test_audit_clean_on_random_systems():
    rng = np.random.default_rng(777)
    audited = 0
    for _ in range(25):
        system = random_small_system(rng, max_sec=4)
        sel = select_periods(system)
        if not sel.schedulable:
            continue
        solved = system.with_security_periods(sel.periods)
        for policy in ("semi_partitioned", "global"):
            for model in ("worst_case", "uniform_fraction"):
                cfg = SimConfig(horizon=150, policy=policy,
                                release_offsets="random",
                                execution_time_model=model, seed=audited)
                trace, _ = simulate(solved, cfg)
                assert audit_trace(solved, cfg, trace) == []
        audited += 1
    assert audited >= 8


def test_kernel_matches_reference_dispatcher():
    from oracles import reference_dispatch
    rng = np.random.default_rng(555)
    compared = 0
    for _ in range(30):
        system = random_small_system(rng, max_sec=4)
        solved = system.with_security_periods(
            {s.id: s.max_period for s in system.security_tasks})
        solved = solved.with_security_cores(
            {s.id: int(rng.integers(0, system.cores))
             for s in system.security_tasks})
        for policy in ("partitioned", "semi_partitioned", "global"):
            for offsets in ("synchronous", "random"):
                cfg = SimConfig(horizon=200, policy=policy,
                                release_offsets=offsets, seed=compared)
                trace, _ = simulate(solved, cfg)
                tasks = []
                for idx, tid in enumerate(trace.task_ids):
                    lo = trace.job_offsets[idx]
                    src = next((t for t in solved.rt_tasks if t.id == tid),
                               None)
                    if src is not None:
                        tasks.append(dict(id=tid, wcet=src.wcet,
                                          period=src.period,
                                          offset=int(trace.job_release[lo]),
                                          priority=src.priority, is_rt=True,
                                          core=src.core))
                    else:
                        s = next(s for s in solved.security_tasks
                                 if s.id == tid)
                        tasks.append(dict(id=tid, wcet=s.wcet,
                                          period=s.period,
                                          offset=int(trace.job_release[lo]),
                                          priority=s.priority, is_rt=False,
                                          core=s.core))
                expected = reference_dispatch(tasks, solved.cores, 200, policy)
                assert trace.occupant_task.tolist() == expected
                compared += 1
    assert compared >= 150


def test_global_policy_ignores_rt_partition():
    rt = [RtTask("a", 2, 6, 6, 0, None), RtTask("b", 2, 8, 8, 1, None)]
    system = make_system(2, rt, [SecurityTask("s", 1, 30, priority=2)])
    solved = system.with_security_periods({"s": 30})
    trace, stats = simulate(solved, SimConfig(horizon=120, policy="global"))
    assert stats.deadline_misses == 0
    assert stats.completed_jobs["a"] == 20


def test_no_rt_deadline_miss_when_partition_schedulable():
    rng = np.random.default_rng(888)
    for _ in range(20):
        system = random_small_system(rng, max_sec=3)
        solved = system.with_security_periods(
            {s.id: s.max_period for s in system.security_tasks})
        _, stats = simulate(solved, SimConfig(horizon=2000))
        assert stats.rt_deadline_misses == 0


def test_default_horizon(micro):
    solved = solved_micro(micro)
    # periods 5, 10, 3, 5 -> hyperperiod 30 < 100 * 10
    assert default_horizon(solved) == 30


def test_trace_csv_export(tmp_path, micro):
    solved = solved_micro(micro)
    trace, _ = simulate(solved, SimConfig(horizon=12))
    out = tmp_path / "trace.csv"
    trace.to_csv(out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "tick,core,job_id,task_id"
    assert any(",rt_a" in line for line in lines[1:])
