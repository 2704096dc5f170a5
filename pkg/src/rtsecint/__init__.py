"""Schedulability analysis, period selection and simulation for security
tasks integrated into partitioned multicore real-time systems."""

from .model import (Platform, RtTask, SecurityTask, SystemFormatError,
                    TaskSystem, Tick, assign_rm_priorities, load_system,
                    make_system, save_system, system_from_json,
                    system_to_json, total_utilization, validate)
from .analysis import (CarryInSplit, WcrtResult, capped_interference,
                       ci_security_workload, nc_security_workload,
                       rt_core_interference, rt_wcrt, rt_workload,
                       security_wcrt, total_interference, uniprocessor_rta)
from .period_opt import (PeriodSelection, SelectionState,
                         min_feasible_period, select_periods)
from .allocation import AllocationError, best_fit_rt, best_fit_security_per_core
from .baselines import (SchemeResult, global_tmax_check, hydra_select,
                        hydra_tmax_check, rt_partition_check)
from .simulator import (DetectionResult, IntrusionScenario, SimConfig,
                        SimStats, SimTrace, audit_trace,
                        count_context_switches, count_migrations,
                        default_horizon, make_scenario, measure_detection,
                        simulate)
from .tsgen import (GenSpec, GenerationError, fixed_sum_utilizations,
                    generate_taskset, group_band, log_uniform_period)

__version__ = "0.1.0"
