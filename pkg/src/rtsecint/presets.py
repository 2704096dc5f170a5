"""Built-in example systems.

``micro_system``: the two-core worked example used across the test
suite (one RT task per core, two migrating security tasks).

``rover_system``: the dual-core rover deployment: a navigation loop and
a camera task pinned one per core, plus a file-store integrity scanner
and a kernel-module checker with a 10 s period bound each.  The scanner
outranks the checker.
"""

from __future__ import annotations

from .model import RtTask, SecurityTask, TaskSystem, make_system


def micro_system() -> TaskSystem:
    rt = [
        RtTask(id="rt_a", wcet=2, period=5, deadline=5, priority=0, core=0),
        RtTask(id="rt_b", wcet=2, period=10, deadline=10, priority=1, core=1),
    ]
    sec = [
        SecurityTask(id="sigma1", wcet=1, max_period=20, priority=2),
        SecurityTask(id="sigma2", wcet=2, max_period=20, priority=3),
    ]
    return make_system(2, rt, sec)


def rover_system() -> TaskSystem:
    rt = [
        RtTask(id="navigation", wcet=240, period=500, deadline=500,
               priority=0, core=0),
        RtTask(id="camera", wcet=1120, period=5000, deadline=5000,
               priority=1, core=1),
    ]
    sec = [
        SecurityTask(id="tripwire", wcet=5342, max_period=10000, priority=2),
        SecurityTask(id="kmod_checker", wcet=223, max_period=10000, priority=3),
    ]
    return make_system(2, rt, sec)


PRESETS = {
    "micro": micro_system,
    "rover": rover_system,
}
