"""Events executor with a root priority queue and a priority-annotated LIFO
child queue.

The executor never sees the unfolded trees.  A root activation carries the
priority the policy gives its job.  A child activation only learns its
priority from ``latest_priority``, the priority of the subtask that was
dispatched last.  Children are released exactly when that subtask
completes, before the next scheduling decision, so the inherited value is
the parent's.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

from ..errors import InvariantViolation
from ..graph_model import Forest
from ..scheduling_core import (
    InstanceState,
    PriorityKey,
    PriorityPolicy,
    SubtaskInstance,
    higher,
    make_job,
)
from ..trace import Mismatch, Release, ScheduleTrace
from ._common import (
    ExecTimes,
    check_horizon,
    child_for,
    exec_time,
    make_segment,
    require_progress,
    root_releases,
)
from .dds import DdsOrder, DdsQueue

INVARIANTS = ("idle_root", "inheritance", "queue_bound",
          "push_max", "pop_max")


@dataclass
class ChildEntry:
    instance: SubtaskInstance
    priority: PriorityKey | None


@dataclass
class ExecutorState:
    root_queue: list = field(default_factory=list)
    child_queue: list[ChildEntry] = field(default_factory=list)
    latest_priority: PriorityKey | None = None
    running: SubtaskInstance | None = None
    clock: int = 0
    checks: dict = field(default_factory=lambda: {name: [0, 0] for name in INVARIANTS})
    strict: bool = False
    _seq: itertools.count = field(default_factory=itertools.count, repr=False)

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        entry = self.checks[name]
        entry[0] += 1
        if not ok:
            entry[1] += 1
            if self.strict:
                raise InvariantViolation(f"{name} violated at tick {self.clock}: {detail}")

    def queued_priorities(self):
        for key, _, _ in self.root_queue:
            yield key
        for entry in self.child_queue:
            yield entry.priority

    def snapshot(self) -> dict:
        return {
            "root_queue": [(inst.label, key) for key, _, inst in sorted(self.root_queue)],
            "child_queue": [(e.instance.label, e.priority) for e in reversed(self.child_queue)],
            "latest_priority": self.latest_priority,
        }


def release_event(state: ExecutorState, instance: SubtaskInstance, is_root: bool) -> ExecutorState:
    """Sort a newly eligible instance into the matching queue.

    Roots carry their job priority into the heap.  Children take
    ``latest_priority`` and go on top of the LIFO stack.
    """
    instance.advance(InstanceState.ENQUEUED)
    if is_root:
        heapq.heappush(state.root_queue, (instance.priority, next(state._seq), instance))
        return state
    annotated = state.latest_priority
    state.check("inheritance", annotated == instance.priority,
                f"{instance.label} annotated {annotated}, job priority {instance.priority}")
    state.check("push_max",
                all(not higher(e.priority, annotated) for e in state.child_queue),
                f"push of {instance.label} below a higher-priority child")
    state.child_queue.append(ChildEntry(instance, annotated))
    return state


def pick_next(state: ExecutorState) -> tuple[SubtaskInstance, PriorityKey] | None:
    """Dispatch decision at a non-preemptive scheduling point.

    The root top wins only when strictly higher; on a tie the child is taken.
    Returns ``None`` when both queues are empty.
    """
    root_top = state.root_queue[0][0] if state.root_queue else None
    child_top = state.child_queue[-1].priority if state.child_queue else None
    if root_top is None and child_top is None:
        return None
    if child_top is None or (root_top is not None and higher(root_top, child_top)):
        key, _, inst = heapq.heappop(state.root_queue)
    else:
        entry = state.child_queue.pop()
        inst, key = entry.instance, entry.priority
        state.check("pop_max",
                    all(not higher(e.priority, key) for e in state.child_queue),
                    f"pop of {inst.label} left a higher-priority child behind")
    state.latest_priority = key
    state.check("queue_bound",
                all(not higher(p, key) for p in state.queued_priorities()),
                f"dispatched {inst.label} at {key} with a higher entry queued")
    inst.advance(InstanceState.RUNNING)
    state.running = inst
    return inst, key


def simulate_two_queue(forest: Forest, policy: PriorityPolicy, dds_order=DdsOrder.LIFO,
                       horizon: int = 0, exec_times: ExecTimes | None = None,
                       strict: bool = False) -> ScheduleTrace:
    """Run the two-queue executor over ``[0, horizon)``.

    Same-tick order: completion and its child releases, then root releases
    in declaration order, then one dispatch.  Subscription instances consume
    a message from their DDS queue at dispatch; the executed work (and so the
    segment) is the job whose message was consumed, and any difference from
    the dispatched instance is logged as a mismatch.
    """
    check_horizon(horizon)
    policy.check_complete(forest)
    state = ExecutorState(strict=strict)
    dds = DdsQueue(dds_order)
    arrivals = root_releases(forest, horizon)
    jobs = {}
    segments, releases, mismatches = [], [], []
    ai = 0
    t = 0
    run_end = None
    run_key = None  # (task, node, job) of the work actually executing

    while True:
        state.clock = t
        completed = False
        if state.running is not None and run_end == t:
            state.running.advance(InstanceState.DONE)
            state.running = None
            completed = True
            task, node, job = run_key
            tree = forest.trees[task]
            for c in tree.nodes[node].children:
                child = tree.nodes[c]
                dds.publish(child.topic, child.callback, task, job, node, t)
                inst = SubtaskInstance(jobs[(task, job)], c, t, exec_time(forest, exec_times, task, c, job),
                                       policy.priority_of(jobs[(task, job)]), next(state._seq))
                releases.append(Release(task, c, job, t))
                release_event(state, inst, is_root=False)

        was_idle = state.running is None and not completed
        while ai < len(arrivals) and arrivals[ai][0] == t:
            _, task, job_index = arrivals[ai]
            ai += 1
            job = make_job(forest.trees[task], job_index, t)
            jobs[(task, job_index)] = job
            inst = SubtaskInstance(job, 0, t, exec_time(forest, exec_times, task, 0, job_index),
                                   policy.priority_of(job), next(state._seq))
            releases.append(Release(task, 0, job_index, t))
            release_event(state, inst, is_root=True)

        if state.running is None:
            if was_idle:
                children_waiting = bool(state.child_queue)
            picked = pick_next(state)
            if picked is not None:
                inst, key = picked
                task, node, job = inst.key
                if node != 0:
                    tree = forest.trees[task]
                    n = tree.nodes[node]
                    msg = dds.take(n.topic, n.callback, t)
                    data_node = child_for(forest.trees[msg.task], msg.publisher_node, n.callback)
                    if (msg.task, data_node, msg.job) != inst.key:
                        mismatches.append(Mismatch(t, inst.label, msg.id, msg.job_label))
                    task, node, job = msg.task, data_node, msg.job
                if was_idle:
                    state.check("idle_root", node == 0 and not children_waiting,
                                f"dispatch after idle of {task}:{node}:{job}")
                run_key = (task, node, job)
                run_end = t + exec_time(forest, exec_times, task, node, job)
                segments.append(make_segment(forest, task, node, job, t, run_end, key))

        nxt = []
        if state.running is not None:
            nxt.append(run_end)
        if ai < len(arrivals):
            nxt.append(arrivals[ai][0])
        if not nxt:
            break
        t = min(nxt)
        if t >= horizon:
            break

    require_progress(forest, segments, horizon)
    return ScheduleTrace(
        executor="two-queue",
        horizon=horizon,
        forest=forest.fingerprint(),
        segments=tuple(segments),
        releases=tuple(releases),
        dds_events=tuple(dds.events),
        max_dds_depth=dict(dds.max_depth),
        mismatches=tuple(mismatches),
        checks=state.checks,
    )
