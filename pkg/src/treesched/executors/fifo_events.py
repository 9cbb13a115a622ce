"""Stock events executor: one FIFO queue, one entry per activation."""

from __future__ import annotations

from collections import deque

from ..graph_model import Forest
from ..trace import Mismatch, Release, ScheduleTrace
from ._common import ExecTimes, check_horizon, child_for, exec_time, make_segment, root_releases
from .dds import DdsOrder, DdsQueue


def simulate_fifo_events(forest: Forest, horizon: int, dds_order=DdsOrder.FIFO,
                         exec_times: ExecTimes | None = None) -> ScheduleTrace:
    """Dispatch activations strictly in enqueue order.

    The queue is re-polled after every callback.  Children released by a
    completion are enqueued before root activations of the same tick.
    """
    check_horizon(horizon)
    dds = DdsQueue(dds_order)
    arrivals = root_releases(forest, horizon)
    queue: deque[tuple[int, int, int]] = deque()
    segments, releases, mismatches = [], [], []
    ai = 0
    t = 0
    running = None  # (data key, end)

    while True:
        if running is not None and running[1] == t:
            (task, node, job), _ = running
            running = None
            tree = forest.trees[task]
            for c in tree.nodes[node].children:
                child = tree.nodes[c]
                dds.publish(child.topic, child.callback, task, job, node, t)
                releases.append(Release(task, c, job, t))
                queue.append((task, c, job))
        while ai < len(arrivals) and arrivals[ai][0] == t:
            _, task, job = arrivals[ai]
            ai += 1
            releases.append(Release(task, 0, job, t))
            queue.append((task, 0, job))

        if running is None and queue:
            event = queue.popleft()
            task, node, job = event
            if node != 0:
                n = forest.trees[task].nodes[node]
                msg = dds.take(n.topic, n.callback, t)
                data_node = child_for(forest.trees[msg.task], msg.publisher_node, n.callback)
                if (msg.task, data_node, msg.job) != event:
                    mismatches.append(Mismatch(t, f"{task}:{node}:{job}", msg.id, msg.job_label))
                task, node, job = msg.task, data_node, msg.job
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
        executor="events-fifo",
        horizon=horizon,
        forest=forest.fingerprint(),
        segments=tuple(segments),
        releases=tuple(releases),
        dds_events=tuple(dds.events),
        max_dds_depth=dict(dds.max_depth),
        mismatches=tuple(mismatches),
    )
