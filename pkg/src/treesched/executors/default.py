"""The stock single-threaded executor with its ready set.

A ready set is a per-callback flag, refreshed only at polling points.  A
polling point happens whenever the set has drained and some callback has
pending work (the executor blocks until then otherwise).  Inside a
processing window each ready callback runs once: timers first, then
subscriptions, each group in declaration order.  A timer that fires again
while an earlier activation is still unserved loses the new activation.
Subscription messages stay in the middleware queues across windows.
"""

from __future__ import annotations

from collections import deque

from ..graph_model import Forest
from ..trace import Drop, Release, ScheduleTrace
from ._common import ExecTimes, check_horizon, child_for, exec_time, make_segment, root_releases
from .dds import DdsOrder, DdsQueue


def _callback_table(forest: Forest):
    timers, others = [], []
    topic_of = {}
    root_task = {}
    for tree in forest.trees:
        root_task[tree.root.callback] = tree.index
        for node in tree.nodes[1:]:
            topic_of[node.callback] = node.topic
    for cb in forest.callbacks():
        if cb in root_task and not forest.trees[root_task[cb]].sporadic:
            timers.append(cb)
        elif cb in root_task or cb in topic_of:
            others.append(cb)
    return timers + others, topic_of, root_task


def simulate_default_executor(forest: Forest, horizon: int, dds_order=DdsOrder.FIFO,
                              exec_times: ExecTimes | None = None) -> ScheduleTrace:
    check_horizon(horizon)
    order, topic_of, root_task = _callback_table(forest)
    dds = DdsQueue(dds_order)
    arrivals = root_releases(forest, horizon)
    timer_pending: dict[int, int | None] = {}
    external: dict[int, deque[int]] = {}
    segments, releases, drops, polls = [], [], [], []
    ready: list[str] = []
    ai = 0
    t = 0
    running = None  # (data key, end)

    def has_work(cb):
        if cb in root_task:
            task = root_task[cb]
            if forest.trees[task].sporadic:
                return bool(external.get(task))
            return timer_pending.get(task) is not None
        return dds.depth(topic_of[cb], cb) > 0

    while True:
        if running is not None and running[1] == t:
            (task, node, job), _ = running
            running = None
            tree = forest.trees[task]
            for c in tree.nodes[node].children:
                child = tree.nodes[c]
                dds.publish(child.topic, child.callback, task, job, node, t)
                releases.append(Release(task, c, job, t))
        while ai < len(arrivals) and arrivals[ai][0] == t:
            _, task, job = arrivals[ai]
            ai += 1
            releases.append(Release(task, 0, job, t))
            if forest.trees[task].sporadic:
                external.setdefault(task, deque()).append(job)
            elif timer_pending.get(task) is None:
                timer_pending[task] = job
            else:
                drops.append(Drop(forest.trees[task].name, task, job, t))

        if running is None:
            if not ready:
                ready = [cb for cb in order if has_work(cb)]
                if ready:
                    polls.append(t)
            if ready:
                cb = ready.pop(0)
                if cb in root_task:
                    task = root_task[cb]
                    if forest.trees[task].sporadic:
                        job = external[task].popleft()
                    else:
                        job, timer_pending[task] = timer_pending[task], None
                    node = 0
                else:
                    msg = dds.take(topic_of[cb], cb, t)
                    task, job = msg.task, msg.job
                    node = child_for(forest.trees[task], msg.publisher_node, cb)
                end = t + exec_time(forest, exec_times, task, node, job)
                segments.append(make_segment(forest, task, node, job, t, end))
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
        executor="default",
        horizon=horizon,
        forest=forest.fingerprint(),
        segments=tuple(segments),
        releases=tuple(releases),
        drops=tuple(drops),
        polling_points=tuple(polls),
        dds_events=tuple(dds.events),
        max_dds_depth=dict(dds.max_depth),
    )
