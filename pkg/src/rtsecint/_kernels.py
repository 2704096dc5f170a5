"""Compiled inner loops: response-time fixpoints and the tick simulator.

Everything here works on plain int64 numpy arrays so numba can compile
it; the public modules build the arrays and wrap the results.  The
formulas mirror the pure-Python ones in ``analysis`` (kept in sync by a
consistency test).
"""

import numpy as np
from numba import njit

POLICY_PARTITIONED = 0
POLICY_SEMI = 1
POLICY_GLOBAL = 2


@njit(cache=True)
def _workload(c, t, x):
    if x <= 0:
        return 0
    return (x // t) * c + min(x % t, c)


@njit(cache=True)
def _carry_in_workload(c, t, r, x):
    if x <= 0:
        return 0
    xbar = c - 1 + t - r
    w = _workload(c, t, max(x - xbar, 0))
    return w + min(x, c - 1)


@njit(cache=True)
def uni_rta(c, bound, hp_c, hp_t):
    """Single-core fixpoint t = C + sum(ceil(t/T_i) C_i), seeded at C.

    Returns (t, converged, iterations); aborts once t exceeds bound.
    """
    t = c
    it = 0
    while True:
        it += 1
        demand = c
        for i in range(hp_c.shape[0]):
            demand += ((t + hp_t[i] - 1) // hp_t[i]) * hp_c[i]
        if demand == t:
            return t, True, it
        t = demand
        if t > bound:
            return t, False, it


@njit(cache=True)
def migrating_wcrt_topdiff(m, c_s, bound, rt_c, rt_t, rt_core,
                           hp_c, hp_t, hp_r):
    """Fixpoint x = floor(Omega(x)/m) + C_s with per-window split maximization.

    Partitioned interferers (rt_* arrays) are summed per core and capped
    once per core.  Migrating higher-priority tasks (hp_* arrays) each
    contribute their non-carry-in interference; the m-1 largest positive
    carry-in gains are added on top, which maximizes the interference
    over all admissible carry-in subsets because each task is capped
    independently.
    Returns (x, converged, iterations).
    """
    n_hp = hp_c.shape[0]
    core_w = np.zeros(m, dtype=np.int64)
    diffs = np.zeros(n_hp, dtype=np.int64)
    x = c_s
    it = 0
    while True:
        it += 1
        cap = x - c_s + 1
        for k in range(m):
            core_w[k] = 0
        for i in range(rt_c.shape[0]):
            core_w[rt_core[i]] += _workload(rt_c[i], rt_t[i], x)
        omega = 0
        for k in range(m):
            omega += min(core_w[k], cap)
        for i in range(n_hp):
            nc = min(_workload(hp_c[i], hp_t[i], x), cap)
            ci = min(_carry_in_workload(hp_c[i], hp_t[i], hp_r[i], x), cap)
            omega += nc
            diffs[i] = ci - nc
        picks = m - 1 if m - 1 < n_hp else n_hp
        for _ in range(picks):
            best = 0
            bi = -1
            for i in range(n_hp):
                if diffs[i] > best:
                    best = diffs[i]
                    bi = i
            if bi < 0:
                break
            omega += best
            diffs[bi] = 0
        x_new = omega // m + c_s
        if x_new == x:
            return x, True, it
        x = x_new
        if x > bound:
            return x, False, it


@njit(cache=True)
def migrating_wcrt_window_enum(m, c_s, bound, rt_c, rt_t, rt_core,
                               hp_c, hp_t, hp_r):
    """Same fixpoint as migrating_wcrt_topdiff, but the per-window
    maximum over carry-in subsets is found by brute force over all
    admissible subsets (|ci| <= m-1) instead of difference ranking.
    Oracle for the ranking logic; sizes must stay small."""
    n_hp = hp_c.shape[0]
    core_w = np.zeros(m, dtype=np.int64)
    nc = np.zeros(n_hp, dtype=np.int64)
    ci = np.zeros(n_hp, dtype=np.int64)
    x = c_s
    it = 0
    while True:
        it += 1
        cap = x - c_s + 1
        for k in range(m):
            core_w[k] = 0
        for i in range(rt_c.shape[0]):
            core_w[rt_core[i]] += _workload(rt_c[i], rt_t[i], x)
        base = 0
        for k in range(m):
            base += min(core_w[k], cap)
        for i in range(n_hp):
            nc[i] = min(_workload(hp_c[i], hp_t[i], x), cap)
            ci[i] = min(_carry_in_workload(hp_c[i], hp_t[i], hp_r[i], x), cap)
        omega = -1
        for mask in range(1 << n_hp):
            bits = 0
            mm = mask
            while mm:
                bits += mm & 1
                mm >>= 1
            if bits > m - 1:
                continue
            tot = base
            for i in range(n_hp):
                if mask & (1 << i):
                    tot += ci[i]
                else:
                    tot += nc[i]
            if tot > omega:
                omega = tot
        x_new = omega // m + c_s
        if x_new == x:
            return x, True, it
        x = x_new
        if x > bound:
            return x, False, it


@njit(cache=True)
def migrating_wcrt_split(m, c_s, bound, rt_c, rt_t, rt_core,
                         hp_c, hp_t, hp_r, ci_mask):
    """Same fixpoint for one fixed carry-in assignment (ci_mask[i] != 0)."""
    core_w = np.zeros(m, dtype=np.int64)
    x = c_s
    it = 0
    while True:
        it += 1
        cap = x - c_s + 1
        for k in range(m):
            core_w[k] = 0
        for i in range(rt_c.shape[0]):
            core_w[rt_core[i]] += _workload(rt_c[i], rt_t[i], x)
        omega = 0
        for k in range(m):
            omega += min(core_w[k], cap)
        for i in range(hp_c.shape[0]):
            if ci_mask[i]:
                w = _carry_in_workload(hp_c[i], hp_t[i], hp_r[i], x)
            else:
                w = _workload(hp_c[i], hp_t[i], x)
            omega += min(w, cap)
        x_new = omega // m + c_s
        if x_new == x:
            return x, True, it
        x = x_new
        if x > bound:
            return x, False, it


@njit(cache=True)
def simulate_ticks(m, horizon, policy,
                   wcet, period, offset, dl, is_rt, core,
                   prio_order, n_jobs, job_off, exec_dur):
    """Tick-quantum dispatch loop.

    prio_order lists task indices by descending priority.  Jobs of one
    task run FIFO, one at a time.  Dispatch per tick: RT tasks go to
    their own core by priority (partitioned/semi); then security jobs
    fill idle cores in global priority order, lowest core index first
    (semi), or stay on their bound core (partitioned).  Under the global
    policy the m highest-priority ready jobs run, again lowest core
    index to highest priority.

    Returns occupancy matrices, per-job start/completion/release arrays
    and the counter tuple (context_switches, migrations,
    deadline_misses, rt_deadline_misses).
    """
    n = wcet.shape[0]
    total_jobs = job_off[n]
    remaining = exec_dur.copy()
    job_start = np.full(total_jobs, -1, dtype=np.int64)
    job_complete = np.full(total_jobs, -1, dtype=np.int64)
    job_release = np.full(total_jobs, -1, dtype=np.int64)
    last_core = np.full(total_jobs, -1, dtype=np.int64)
    cur = np.zeros(n, dtype=np.int64)
    occ_task = np.full((m, horizon), -1, dtype=np.int32)
    occ_job = np.full((m, horizon), -1, dtype=np.int32)
    prev_uid = np.full(m, -1, dtype=np.int64)
    occ = np.full(m, -1, dtype=np.int64)

    for i in range(n):
        for k in range(n_jobs[i]):
            job_release[job_off[i] + k] = offset[i] + k * period[i]

    cs = 0
    migrations = 0
    misses = 0
    rt_misses = 0

    for t in range(horizon):
        for c in range(m):
            occ[c] = -1

        if policy == POLICY_GLOBAL:
            nxt = 0
            for pi in range(n):
                i = prio_order[pi]
                k = cur[i]
                if k < n_jobs[i] and offset[i] + k * period[i] <= t:
                    occ[nxt] = i
                    nxt += 1
                    if nxt == m:
                        break
        else:
            # RT first, per core by priority
            for pi in range(n):
                i = prio_order[pi]
                if not is_rt[i]:
                    continue
                c = core[i]
                if occ[c] >= 0:
                    continue
                k = cur[i]
                if k < n_jobs[i] and offset[i] + k * period[i] <= t:
                    occ[c] = i
            if policy == POLICY_PARTITIONED:
                for pi in range(n):
                    i = prio_order[pi]
                    if is_rt[i]:
                        continue
                    c = core[i]
                    if occ[c] >= 0:
                        continue
                    k = cur[i]
                    if k < n_jobs[i] and offset[i] + k * period[i] <= t:
                        occ[c] = i
            else:  # semi-partitioned: fill idle cores by global priority
                free_core = 0
                for pi in range(n):
                    i = prio_order[pi]
                    if is_rt[i]:
                        continue
                    k = cur[i]
                    if k >= n_jobs[i] or offset[i] + k * period[i] > t:
                        continue
                    while free_core < m and occ[free_core] >= 0:
                        free_core += 1
                    if free_core == m:
                        break
                    occ[free_core] = i
                    free_core += 1

        for c in range(m):
            i = occ[c]
            uid = -1
            if i >= 0:
                k = cur[i]
                g = job_off[i] + k
                if job_start[g] < 0:
                    job_start[g] = t
                if last_core[g] >= 0 and last_core[g] != c:
                    migrations += 1
                last_core[g] = c
                remaining[g] -= 1
                occ_task[c, t] = i
                occ_job[c, t] = k
                if remaining[g] == 0:
                    job_complete[g] = t + 1
                    if t + 1 > job_release[g] + dl[i]:
                        misses += 1
                        if is_rt[i]:
                            rt_misses += 1
                    cur[i] += 1
                uid = g
            if prev_uid[c] >= 0 and uid >= 0 and uid != prev_uid[c]:
                cs += 1
            prev_uid[c] = uid

    # jobs whose deadline passed inside the horizon but never finished
    for i in range(n):
        for k in range(cur[i], n_jobs[i]):
            g = job_off[i] + k
            if job_release[g] + dl[i] < horizon and job_complete[g] < 0:
                misses += 1
                if is_rt[i]:
                    rt_misses += 1

    return (occ_task, occ_job, job_release, job_start, job_complete,
            cs, migrations, misses, rt_misses)
