import json
from dataclasses import replace
from fractions import Fraction

import pytest

from rtsecint.model import (RtTask, SystemFormatError,
                            assign_rm_priorities, make_system, system_from_json,
                            system_to_json, total_utilization, validate)


def test_valid_micro_system_passes(micro):
    assert validate(micro) == []


def test_constrained_deadline_violation(micro):
    bad = replace(micro.rt_tasks[0], deadline=7, period=5)
    system = make_system(2, [bad, micro.rt_tasks[1]], micro.security_tasks)
    assert any("constrained deadline" in v for v in validate(system))


def test_security_priority_above_rt_flagged(micro):
    sneaky = replace(micro.security_tasks[0], priority=-1)
    system = make_system(2, micro.rt_tasks,
                         [sneaky, micro.security_tasks[1]])
    assert any("below RT" in v for v in validate(system))


def test_validate_is_pure(micro):
    first = validate(micro)
    second = validate(micro)
    assert first == second == []


def test_wcet_and_core_range_checks(micro):
    bad_core = replace(micro.rt_tasks[0], core=5)
    system = make_system(2, [bad_core, micro.rt_tasks[1]], micro.security_tasks)
    assert any("core index" in v for v in validate(system))


def test_rm_priorities_by_period():
    tasks = [RtTask("t0", 1, 10, 10), RtTask("t1", 1, 5, 5),
             RtTask("t2", 1, 20, 20)]
    out = assign_rm_priorities(tasks)
    prio = {t.id: t.priority for t in out}
    assert prio["t1"] < prio["t0"] < prio["t2"]


def test_rm_tie_break_by_id():
    tasks = [RtTask("b", 1, 5, 5), RtTask("a", 1, 5, 5)]
    prio = {t.id: t.priority for t in assign_rm_priorities(tasks)}
    assert prio["a"] < prio["b"]


def test_rm_rover_order(rover):
    prio = {t.id: t.priority for t in
            assign_rm_priorities(list(rover.rt_tasks))}
    assert prio["navigation"] < prio["camera"]


def test_rm_rerun_is_fixpoint():
    tasks = [RtTask("t0", 1, 10, 10), RtTask("t1", 1, 5, 5)]
    once = assign_rm_priorities(tasks)
    assert assign_rm_priorities(once) == once


def test_rover_rt_utilization(rover):
    rt_only = make_system(2, rover.rt_tasks, [])
    assert total_utilization(rt_only) == Fraction(7040, 10000)


def test_rover_total_utilization_at_max(rover):
    assert total_utilization(rover, "max") == \
        Fraction(7040, 10000) + Fraction(5565, 10000)


def test_single_task_utilization():
    system = make_system(1, [RtTask("t", 1, 2, 2, 0, 0)], [])
    assert total_utilization(system) == Fraction(1, 2)


def test_solved_utilization_at_least_max(micro):
    solved = micro.with_security_periods({"sigma1": 3, "sigma2": 5})
    assert total_utilization(solved, "solved") >= total_utilization(micro, "max")


def test_missing_solved_period_raises(micro):
    with pytest.raises(ValueError):
        total_utilization(micro, "solved")


def test_json_round_trip(micro):
    doc = system_to_json(micro)
    back = system_from_json(json.loads(json.dumps(doc)))
    assert system_to_json(back) == doc
    assert validate(back) == []


def test_json_rejects_unknown_fields(micro):
    doc = system_to_json(micro)
    doc["rt"][0]["speed"] = 3
    with pytest.raises(SystemFormatError, match="unknown field"):
        system_from_json(doc)


def test_json_rejects_missing_fields(micro):
    doc = system_to_json(micro)
    del doc["security"][0]["priority"]
    with pytest.raises(SystemFormatError, match="missing field"):
        system_from_json(doc)


def test_json_rejects_unknown_top_level(micro):
    doc = system_to_json(micro)
    doc["comment"] = "hi"
    with pytest.raises(SystemFormatError, match="top-level"):
        system_from_json(doc)


def test_json_null_core_allowed(micro):
    doc = system_to_json(micro)
    doc["rt"][0]["core"] = None
    system = system_from_json(doc)
    assert system.rt_tasks[0].core is None


def test_hp_lp_security_slicing(micro):
    assert [s.id for s in micro.hp_security("sigma2")] == ["sigma1"]
    assert [s.id for s in micro.lp_security("sigma1")] == ["sigma2"]
    assert micro.hp_security("sigma1") == ()


def test_duplicate_ids_flagged(micro):
    dup = replace(micro.rt_tasks[0], id="sigma1")
    system = make_system(2, [dup, micro.rt_tasks[1]], micro.security_tasks)
    assert any("duplicate" in v for v in validate(system))
