"""Command-line harness.

Subcommands: ``gen`` (write taskset files), ``analyze`` (run one scheme
on a taskset file), ``simulate`` (solve periods, then run the tick
simulator), ``sweep`` (acceptance-ratio / distance experiment grid) and
``report`` (render figures from a sweep CSV).

Option precedence is flags > config file (JSON, via --config) > built-in
defaults; the default seed comes from RTSECINT_SEED when set.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import experiments, report
from .allocation import AllocationError, best_fit_rt
from .baselines import global_tmax_check, hydra_select, hydra_tmax_check
from .model import (SystemFormatError, load_system, save_system,
                    total_utilization)
from .analysis import rt_wcrt
from .period_opt import select_periods
from .presets import PRESETS
from .simulator import (SimConfig, default_horizon, make_scenario,
                        measure_detection, simulate)
from .tsgen import GenSpec, GenerationError, generate_taskset

_SCHEMES = ("hydra_c", "hydra", "hydra_tmax", "global_tmax")
_POLICY_SCHEME = {
    "semi_partitioned": "hydra_c",
    "partitioned": "hydra",
    "global": "global_tmax",
}


def _env_seed() -> int:
    try:
        return int(os.environ.get("RTSECINT_SEED", "0"))
    except ValueError:
        return 0


def _fail(message: str, code: int = 2) -> int:
    print(json.dumps({"error": message}), file=sys.stderr)
    return code


def _resolve(args: argparse.Namespace, config: dict, key: str, default):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _parse_int_list(text: str) -> list[int]:
    return [int(x) for x in str(text).replace(" ", "").split(",") if x != ""]


def _parse_groups(text: str) -> list[int]:
    out = []
    for part in str(text).replace(" ", "").split(","):
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _emit(doc: dict, out_path) -> None:
    text = json.dumps(doc, indent=2)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _load(path):
    try:
        return load_system(path)
    except FileNotFoundError:
        raise SystemFormatError(f"no such file: {path}")


def _ensure_partition(system):
    if any(t.core is None for t in system.rt_tasks):
        rt = best_fit_rt(system.rt_tasks, system.cores)
        system = type(system)(system.platform, tuple(rt), system.security_tasks)
    return system


def _run_scheme(system, scheme: str):
    """Returns (schedulable, violating, periods, placement, wcrts dict)."""
    if scheme == "hydra_c":
        sel = select_periods(system)
        wcrts = dict(rt_wcrt(system))
        wcrts.update(sel.wcrts)
        return sel.schedulable, sel.violating_task, sel.periods, {}, wcrts
    if scheme == "hydra":
        res = hydra_select(system)
    elif scheme == "hydra_tmax":
        res = hydra_tmax_check(system)
    elif scheme == "global_tmax":
        res = global_tmax_check(system)
        return (res.schedulable, res.violating_task, res.periods, {},
                res.wcrts)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    wcrts = dict(rt_wcrt(system))
    wcrts.update(res.wcrts)
    return res.schedulable, res.violating_task, res.periods, res.placement, wcrts


def cmd_gen(args, config) -> int:
    out = _resolve(args, config, "out", None)
    if out is None:
        return _fail("gen: --out is required")
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)

    preset = _resolve(args, config, "preset", None)
    if preset is not None:
        if preset not in PRESETS:
            return _fail(f"unknown preset {preset!r}")
        system = PRESETS[preset]()
        path = outdir / f"{preset}.json"
        save_system(system, path)
        print(str(path))
        return 0

    cores = int(_resolve(args, config, "cores", 2))
    group = _resolve(args, config, "group", None)
    if group is None:
        return _fail("gen: --group is required (or use --preset)")
    count = int(_resolve(args, config, "count", 1))
    seed = int(_resolve(args, config, "seed", _env_seed()))
    max_redraws = int(_resolve(args, config, "max_redraws", 1000))

    spec = GenSpec(cores=cores, seed=seed, tasksets_per_group=count,
                   max_redraws=max_redraws)
    manifest = outdir / "manifest.csv"
    with open(manifest, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "index", "seed", "n_rt", "n_sec",
                    "utilization", "file"])
        for index in range(count):
            try:
                system = generate_taskset(spec, int(group), index)
            except GenerationError as exc:
                return _fail(str(exc))
            name = f"taskset_m{cores}_g{group}_{index:04d}.json"
            save_system(system, outdir / name)
            w.writerow([group, index, seed, len(system.rt_tasks),
                        len(system.security_tasks),
                        f"{float(total_utilization(system)):.6f}", name])
    print(str(manifest))
    return 0


def cmd_analyze(args, config) -> int:
    scheme = _resolve(args, config, "scheme", "hydra_c")
    if scheme not in _SCHEMES:
        return _fail(f"unknown scheme {scheme!r}")
    try:
        system = _load(args.taskset)
        system = _ensure_partition(system)
    except SystemFormatError as exc:
        return _fail(f"invalid taskset: {exc}")
    except AllocationError as exc:
        return _fail(f"RT partition infeasible: {exc.task_id}")
    schedulable, violating, periods, placement, wcrts = _run_scheme(system, scheme)
    doc = {
        "scheme": scheme,
        "schedulable": schedulable,
        "violating_task": violating,
        "periods": periods,
        "placement": placement,
        "rt_cores": {t.id: t.core for t in system.rt_tasks},
        "wcrt": [w.to_json() for _, w in sorted(wcrts.items())],
    }
    _emit(doc, _resolve(args, config, "out", None))
    return 0


def cmd_simulate(args, config) -> int:
    policy = _resolve(args, config, "policy", "semi_partitioned")
    if policy not in _POLICY_SCHEME:
        return _fail(f"unknown policy {policy!r}")
    scheme = _resolve(args, config, "scheme", _POLICY_SCHEME[policy])
    seed = int(_resolve(args, config, "seed", _env_seed()))
    try:
        system = _load(args.taskset)
        system = _ensure_partition(system)
    except SystemFormatError as exc:
        return _fail(f"invalid taskset: {exc}")
    except AllocationError as exc:
        return _fail(f"RT partition infeasible: {exc.task_id}")

    schedulable, violating, periods, placement, _ = _run_scheme(system, scheme)
    if not schedulable:
        return _fail(f"scheme {scheme} finds the taskset unschedulable "
                     f"(task {violating}); nothing to simulate", 3)
    solved = system.with_security_periods(periods)
    if placement:
        solved = solved.with_security_cores(placement)

    horizon = _resolve(args, config, "horizon", None)
    horizon = int(horizon) if horizon is not None else default_horizon(solved)
    sim_config = SimConfig(
        horizon=horizon, policy=policy,
        release_offsets=_resolve(args, config, "offsets", "synchronous"),
        execution_time_model=_resolve(args, config, "exec_model", "worst_case"),
        exec_fraction_min=float(_resolve(args, config, "exec_fraction_min", 0.5)),
        seed=seed)
    try:
        trace, stats = simulate(solved, sim_config)
    except ValueError as exc:
        return _fail(str(exc))

    detection = None
    inject = _resolve(args, config, "inject", None)
    if inject:
        detector, _, count = str(inject).partition(":")
        if detector not in {s.id for s in solved.security_tasks}:
            return _fail(f"unknown detector task {detector!r}")
        scenario = make_scenario(detector, int(count or "1"), horizon, seed)
        res = measure_detection(trace, scenario,
                                _resolve(args, config, "detection_rule",
                                         "start_after"))
        stats.detection_latencies = res.latencies
        detection = {"detector": detector, "injections": len(scenario.injection_times),
                     "mean_latency": res.mean, "censored": res.censored,
                     "latencies": res.latencies}

    trace_out = _resolve(args, config, "trace_out", None)
    if trace_out:
        trace.to_csv(trace_out)

    doc = {
        "policy": policy,
        "scheme": scheme,
        "horizon": horizon,
        "seed": seed,
        "periods": periods,
        "placement": placement,
        "stats": stats.to_json(),
    }
    if detection is not None:
        doc["detection"] = detection
    _emit(doc, _resolve(args, config, "out", None))
    return 0


def cmd_sweep(args, config) -> int:
    cores = _parse_int_list(_resolve(args, config, "cores", "2,4"))
    groups = _parse_groups(_resolve(args, config, "groups", "0-9"))
    count = int(_resolve(args, config, "count", 250))
    seed = int(_resolve(args, config, "seed", _env_seed()))
    workers = int(_resolve(args, config, "workers", 1))
    max_redraws = int(_resolve(args, config, "max_redraws", 1000))
    schemes_arg = _resolve(args, config, "schemes", "all")
    schemes = _SCHEMES if schemes_arg == "all" \
        else tuple(str(schemes_arg).split(","))
    for s in schemes:
        if s not in _SCHEMES:
            return _fail(f"unknown scheme {s!r}")
    out = _resolve(args, config, "out", "sweep.csv")
    try:
        rows = experiments.run_sweep(cores, groups, count, seed, schemes,
                                     workers=workers, max_redraws=max_redraws,
                                     verbose=bool(args.verbose))
    except GenerationError as exc:
        return _fail(str(exc))
    experiments.write_sweep_csv(rows, out)
    print(str(out))
    return 0


def cmd_report(args, config) -> int:
    sweep_path = _resolve(args, config, "sweep", None)
    if sweep_path is None:
        return _fail("report: --sweep is required")
    outdir = _resolve(args, config, "outdir", "figures")
    try:
        rows = experiments.read_sweep_csv(sweep_path)
    except FileNotFoundError:
        return _fail(f"no such file: {sweep_path}")
    if not rows:
        return _fail("sweep file has no rows")
    for path in report.render_report(rows, outdir):
        print(str(path))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rtsecint",
        description="Schedulability analysis and simulation for security "
                    "tasks in partitioned multicore real-time systems.")
    parser.add_argument("--config", help="JSON config file; flags win over it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate taskset files")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--cores", type=int)
    p.add_argument("--group", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-redraws", dest="max_redraws", type=int)
    p.add_argument("--out")

    p = sub.add_parser("analyze", help="run one scheme on a taskset file")
    p.add_argument("taskset")
    p.add_argument("--scheme", choices=_SCHEMES)
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="solve periods and run the simulator")
    p.add_argument("taskset")
    p.add_argument("--policy", choices=sorted(_POLICY_SCHEME))
    p.add_argument("--scheme", choices=_SCHEMES)
    p.add_argument("--horizon", type=int)
    p.add_argument("--offsets", choices=("synchronous", "random"))
    p.add_argument("--exec-model", dest="exec_model",
                   choices=("worst_case", "uniform_fraction"))
    p.add_argument("--exec-fraction-min", dest="exec_fraction_min", type=float)
    p.add_argument("--inject", metavar="DETECTOR:COUNT")
    p.add_argument("--detection-rule", dest="detection_rule",
                   choices=("start_after", "completion_after"))
    p.add_argument("--seed", type=int)
    p.add_argument("--trace-out", dest="trace_out")
    p.add_argument("--out")

    p = sub.add_parser("sweep", help="acceptance-ratio / distance experiment")
    p.add_argument("--cores")
    p.add_argument("--groups")
    p.add_argument("--count", type=int)
    p.add_argument("--schemes")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--max-redraws", dest="max_redraws", type=int)
    p.add_argument("--out")
    p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("report", help="render figures from a sweep CSV")
    p.add_argument("--sweep")
    p.add_argument("--outdir")
    return parser


_COMMANDS = {
    "gen": cmd_gen,
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {}
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            return _fail(f"cannot read config: {exc}")
        if not isinstance(config, dict):
            return _fail("config file must hold a JSON object")
    return _COMMANDS[args.command](args, config)


if __name__ == "__main__":
    sys.exit(main())
