"""Omniscient LP-FJP tree scheduler and trace comparison.

The reference scheduler sees the unfolded trees directly: a child becomes
eligible when its parent instance completes and carries its job's priority.
At each scheduling point it runs the highest-priority eligible instance,
breaking ties among equal priorities in favour of the most recently
released one.  It is the yardstick the two-queue executor is checked
against.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

from .errors import IncomparableTraces
from .executors._common import ExecTimes, check_horizon, exec_time, make_segment, root_releases
from .graph_model import Forest
from .scheduling_core import PriorityPolicy, make_job
from .trace import Release, ScheduleTrace, Segment


def simulate_reference(forest: Forest, policy: PriorityPolicy, horizon: int,
                       exec_times: ExecTimes | None = None) -> ScheduleTrace:
    check_horizon(horizon)
    policy.check_complete(forest)
    arrivals = root_releases(forest, horizon)
    seq = itertools.count()
    pool: list = []  # (priority key, -release seq, (task, node, job))
    jobs = {}
    segments, releases = [], []
    ai = 0
    t = 0
    running = None  # ((task, node, job), end)

    while True:
        if running is not None and running[1] == t:
            (task, node, job), _ = running
            running = None
            key = policy.priority_of(jobs[(task, job)])
            for c in forest.trees[task].nodes[node].children:
                releases.append(Release(task, c, job, t))
                heapq.heappush(pool, (key, -next(seq), (task, c, job)))
        while ai < len(arrivals) and arrivals[ai][0] == t:
            _, task, job_index = arrivals[ai]
            ai += 1
            job = make_job(forest.trees[task], job_index, t)
            jobs[(task, job_index)] = job
            releases.append(Release(task, 0, job_index, t))
            heapq.heappush(pool, (policy.priority_of(job), -next(seq), (task, 0, job_index)))

        if running is None and pool:
            key, _, (task, node, job) = heapq.heappop(pool)
            end = t + exec_time(forest, exec_times, task, node, job)
            segments.append(make_segment(forest, task, node, job, t, end, key))
            running = ((task, node, job), end)

        nxt = [running[1]] if running is not None else []
        if ai < len(arrivals):
            nxt.append(arrivals[ai][0])
        if not nxt:
            break
        t = min(nxt)
        if t >= horizon:
            break

    return ScheduleTrace(
        executor="reference",
        horizon=horizon,
        forest=forest.fingerprint(),
        segments=tuple(segments),
        releases=tuple(releases),
    )


def ready_at(trace: ScheduleTrace, index: int) -> list[str]:
    """Instances released but not yet started when segment ``index`` starts."""
    if index < len(trace.segments):
        tick = trace.segments[index].start
    else:
        tick = trace.segments[-1].end if trace.segments else 0
    started = {s.instance for s in trace.segments[:index]}
    return [r.instance for r in trace.releases if r.tick <= tick and r.instance not in started]


@dataclass
class Divergence:
    index: int
    tick: int
    left: Segment | None
    right: Segment | None
    left_ready: list = field(default_factory=list)
    right_ready: list = field(default_factory=list)

    def describe(self) -> str:
        def seg(s):
            return "(none)" if s is None else f"{s.task_name}/{s.callback}#{s.node} job {s.job} [{s.start},{s.end})"

        def queues(ready):
            roots = [r for r in ready if r.split(":")[1] == "0"]
            kids = [r for r in ready if r.split(":")[1] != "0"]
            return f"roots={roots} children={kids}"

        return (f"first divergence at dispatch #{self.index} (tick {self.tick}):\n"
                f"  left : {seg(self.left)}  ready {queues(self.left_ready)}\n"
                f"  right: {seg(self.right)}  ready {queues(self.right_ready)}")


@dataclass
class Equivalence:
    equivalent: bool
    divergence: Divergence | None = None

    def __bool__(self) -> bool:
        return self.equivalent


def traces_equivalent(a: ScheduleTrace, b: ScheduleTrace) -> Equivalence:
    """Compare segment sequences on (instance, start, end)."""
    if a.forest != b.forest or a.horizon != b.horizon:
        raise IncomparableTraces(
            f"traces come from forest {a.forest}/horizon {a.horizon} and {b.forest}/horizon {b.horizon}")
    for i, (x, y) in enumerate(itertools.zip_longest(a.segments, b.segments)):
        if x is None or y is None or x.identity != y.identity:
            tick = min(s.start for s in (x, y) if s is not None)
            return Equivalence(False, Divergence(i, tick, x, y, ready_at(a, i), ready_at(b, i)))
    return Equivalence(True)
