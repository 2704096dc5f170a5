"""Acceptance gate: every criterion at its stated size and tolerance.

Each test prints one PASS/FAIL line (run with ``pytest -s`` to see them
as they complete).  The sweep and the rover simulations are shared
module-scope fixtures; everything is seeded and deterministic.
"""

import time

import numpy as np
import pytest

from rtsecint.analysis import rt_wcrt, security_wcrt
from rtsecint.baselines import hydra_select
from rtsecint.experiments import run_sweep
from rtsecint.period_opt import select_periods
from rtsecint.presets import micro_system, rover_system
from rtsecint.simulator import (SimConfig, make_scenario, measure_detection,
                                simulate)
from rtsecint.tsgen import GenSpec, fixed_sum_utilizations, generate_taskset, log_uniform_period

from conftest import random_small_system

SEED = 20250810


def _report(num, ok, detail):
    print(f"\n[criterion {num}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {num}: {detail}"


# --- criterion 1: worked micro-example exactness ---------------------------

def test_criterion_1_micro_example_exact():
    system = micro_system()
    s1, s2 = system.security_tasks
    security_wcrt(s1, system, {})   # warm the compiled kernels
    select_periods(system)
    t0 = time.time()
    r1 = security_wcrt(s1, system, {})
    r2 = security_wcrt(s2, system, {"sigma1": (20, r1.wcrt)})
    sel = select_periods(system)
    elapsed = time.time() - t0
    ok = (r1.wcrt, r1.converged) == (3, True) \
        and (r2.wcrt, r2.converged) == (4, True) \
        and sel.schedulable and sel.periods == {"sigma1": 3, "sigma2": 5} \
        and elapsed < 1.0
    _report(1, ok, f"R(sigma1)={r1.wcrt}, R(sigma2)={r2.wcrt}, "
                   f"periods={sel.periods}, {elapsed * 1000:.0f} ms")


# --- criterion 2: analysis soundness vs simulation -------------------------

def test_criterion_2_soundness():
    per_cell = 72
    systems = 0
    simulated = 0
    response_violations = 0
    rt_misses = 0
    for cores in (2, 4):
        spec = GenSpec(cores=cores, seed=SEED)
        for group in range(7):
            for index in range(per_cell):
                system = generate_taskset(spec, group, index)
                systems += 1
                sel = select_periods(system)
                if not sel.schedulable:
                    continue
                solved = system.with_security_periods(sel.periods)
                bounds = {k: v.wcrt for k, v in rt_wcrt(solved).items()}
                bounds.update({k: v.wcrt for k, v in sel.wcrts.items()})
                maxp = max([t.period for t in solved.rt_tasks] +
                           [s.period for s in solved.security_tasks])
                simulated += 1
                for run in range(11):
                    cfg = SimConfig(
                        horizon=20 * maxp, policy="semi_partitioned",
                        release_offsets="synchronous" if run == 0 else "random",
                        seed=SEED + run)
                    _, stats = simulate(solved, cfg)
                    rt_misses += stats.rt_deadline_misses
                    for tid, bound in bounds.items():
                        if stats.response_max[tid] > bound:
                            response_violations += 1
    ok = systems >= 1000 and response_violations == 0 and rt_misses == 0
    _report(2, ok, f"{systems} systems ({simulated} schedulable, 11 runs "
                   f"each), {response_violations} response violations, "
                   f"{rt_misses} RT deadline misses")


# --- criterion 3: carry-in split maximization equivalence ------------------

def test_criterion_3_carry_in_equivalence():
    rng = np.random.default_rng(SEED)
    instances = 0
    mismatches = 0
    while instances < 500:
        system = random_small_system(rng)
        instances += 1
        state = {}
        for s in system.security_tasks:
            a = security_wcrt(s, system, state, mode="topdiff")
            b = security_wcrt(s, system, state, mode="enumerate")
            if (a.wcrt, a.converged) != (b.wcrt, b.converged):
                mismatches += 1
            if not a.converged:
                break
            state[s.id] = (s.max_period, a.wcrt)
    ok = instances >= 500 and mismatches == 0
    _report(3, ok, f"{instances} random instances, {mismatches} mismatches "
                   "between difference ranking and exhaustive window max")


# --- criterion 4: minimum-period search exactness ---------------------------

def test_criterion_4_binary_search_exact():
    rng = np.random.default_rng(SEED + 1)
    systems = 0
    mismatches = 0
    schedulable = 0
    while systems < 500:
        system = random_small_system(rng, max_sec=5)
        systems += 1
        fast = select_periods(system, search="binary")
        slow = select_periods(system, search="scan")
        if fast.schedulable != slow.schedulable:
            mismatches += 1
            continue
        if fast.schedulable:
            schedulable += 1
            if fast.periods != slow.periods:
                mismatches += 1
    ok = systems >= 500 and mismatches == 0
    _report(4, ok, f"{systems} systems ({schedulable} schedulable), "
                   f"{mismatches} binary-vs-scan mismatches")


# --- criteria 5 and 6: experiment sweep -------------------------------------

@pytest.fixture(scope="module")
def sweep_rows():
    return run_sweep([2, 4], list(range(10)), count=250, seed=SEED, workers=2)


def _cell(rows, cores, group, scheme):
    return next(r for r in rows if r.cores == cores and r.group == group
                and r.scheme == scheme)


def test_criterion_5_acceptance_ratios(sweep_rows):
    problems = []
    for cores in (2, 4):
        acc = {s: [ _cell(sweep_rows, cores, g, s).acceptance_ratio
                    for g in range(10)] for s in
               ("hydra_c", "hydra", "hydra_tmax", "global_tmax")}
        for g in range(10):
            if acc["hydra_c"][g] < acc["hydra"][g] - 0.02:
                problems.append(f"M={cores} g={g}: hydra_c {acc['hydra_c'][g]:.3f} "
                                f"< hydra {acc['hydra'][g]:.3f} - 0.02")
            if acc["hydra_c"][g] < acc["global_tmax"][g] - 0.02:
                problems.append(f"M={cores} g={g}: hydra_c below global_tmax")
        for g in range(6):  # groups whose band tops out below U/M = 0.7
            if abs(acc["hydra_c"][g] - acc["hydra_tmax"][g]) > 0.05:
                problems.append(f"M={cores} g={g}: hydra_c vs hydra_tmax gap "
                                f"{abs(acc['hydra_c'][g] - acc['hydra_tmax'][g]):.3f}")
        for scheme, series in acc.items():
            for g in (6, 7, 8):
                if series[g + 1] > series[g] + 0.05:
                    problems.append(f"M={cores} {scheme}: ratio rises "
                                    f"{series[g]:.3f}->{series[g + 1]:.3f} at g{g + 1}")
    ok = not problems
    _report(5, ok, "250 tasksets/group, M in {2,4}: all margins hold"
            if ok else "; ".join(problems))


def test_criterion_6_distance_trend(sweep_rows):
    problems = []
    for cores in (2, 4):
        dist = [_cell(sweep_rows, cores, g, "hydra_c").mean_norm_distance
                for g in range(2, 9)]
        if any(d is None for d in dist):
            problems.append(f"M={cores}: missing distance data {dist}")
            continue
        rises = sum(1 for a, b in zip(dist, dist[1:]) if b >= a)
        if rises > 1:
            problems.append(f"M={cores}: {rises} non-decreasing steps in {dist}")
    ok = not problems
    _report(6, ok, "hydra_c distance decreases over groups 2..8"
            if ok else "; ".join(problems))


# --- criteria 7 and 8: rover detection latency and context switches --------

@pytest.fixture(scope="module")
def rover_runs():
    system = rover_system()
    sel = select_periods(system)
    hyd = hydra_select(system)
    assert sel.schedulable and hyd.schedulable
    semi_sys = system.with_security_periods(sel.periods)
    part_sys = system.with_security_periods(hyd.periods) \
                     .with_security_cores(hyd.placement)
    horizon = 200000
    runs = []
    for seed in range(10):
        base = dict(horizon=horizon, release_offsets="random",
                    execution_time_model="uniform_fraction",
                    exec_fraction_min=0.8, seed=seed)
        tr_s, st_s = simulate(semi_sys, SimConfig(policy="semi_partitioned", **base))
        tr_p, st_p = simulate(part_sys, SimConfig(policy="partitioned", **base))
        scenario = make_scenario("tripwire", 35, horizon - 20000, seed)
        det_s = measure_detection(tr_s, scenario)
        det_p = measure_detection(tr_p, scenario)
        runs.append((det_s, det_p, st_s, st_p))
    return runs


def test_criterion_7_detection_latency(rover_runs):
    improvements = []
    ratios = []
    censored = 0
    for det_s, det_p, _, _ in rover_runs:
        improvements.append((det_p.mean - det_s.mean) / det_p.mean)
        ratios.append(det_p.mean / det_s.mean)
        censored += det_s.censored + det_p.censored
    mean_impr = float(np.mean(improvements))
    ok = mean_impr >= 0.05 and all(len(r[0].latencies) > 0 for r in rover_runs)
    _report(7, ok, f"mean detection-latency improvement "
                   f"{100 * mean_impr:.1f}% (ratio partitioned/semi "
                   f"{np.mean(ratios):.3f}, {censored} censored) over 10 seeds")


def test_criterion_8_context_switches(rover_runs):
    ratios = [st_s.context_switches / st_p.context_switches
              for _, _, st_s, st_p in rover_runs]
    mean_ratio = float(np.mean(ratios))
    ok = mean_ratio > 1.0
    _report(8, ok, f"CS(semi)/CS(partitioned) = {mean_ratio:.3f} over 10 seeds")


# --- criterion 9: generator statistics --------------------------------------

def test_criterion_9_generator_statistics():
    rng = np.random.default_rng(SEED + 2)
    worst_err = 0.0
    bounds_ok = True
    for _ in range(10000):
        u = fixed_sum_utilizations(4, 2.0, 1.0, rng)
        worst_err = max(worst_err, abs(float(u.sum()) - 2.0))
        if not ((u >= 0).all() and (u <= 1.0 + 1e-12).all()):
            bounds_ok = False
    draws = np.array([log_uniform_period(10, 1000, rng) for _ in range(10000)])
    gmean = float(np.exp(np.log(draws).mean()))
    in_range = bool(draws.min() >= 10 and draws.max() <= 1000)
    ok = worst_err <= 1e-9 and bounds_ok and abs(gmean - 100) <= 10 and in_range
    _report(9, ok, f"fixed-sum max |error| {worst_err:.2e}, bounds ok; "
                   f"log-uniform geometric mean {gmean:.1f}")
