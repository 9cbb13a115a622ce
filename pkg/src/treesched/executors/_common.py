from __future__ import annotations

from typing import Mapping, Sequence

from ..errors import HorizonTooSmall
from ..graph_model import Forest, TreeTask
from ..trace import Segment

ExecTimes = Mapping[str, Sequence[int]]


def root_releases(forest: Forest, horizon: int) -> list[tuple[int, int, int]]:
    """All root activations before ``horizon`` as ``(tick, task, job)``.

    Sorting by ``(tick, task)`` gives the same-tick rule: declaration order.
    """
    out = []
    for tree in forest.trees:
        for job, tick in tree.release_times(horizon):
            out.append((tick, tree.index, job))
    out.sort()
    return out


def child_for(tree: TreeTask, parent: int, callback: str) -> int:
    for c in tree.nodes[parent].children:
        if tree.nodes[c].callback == callback:
            return c
    raise LookupError(f"{tree.name}: node {parent} has no child running {callback!r}")


def exec_time(forest: Forest, exec_times: ExecTimes | None, task: int, node: int, job: int) -> int:
    n = forest.trees[task].nodes[node]
    if exec_times:
        seq = exec_times.get(n.callback)
        if seq and job < len(seq):
            c = seq[job]
            if not 0 < c <= n.wcet:
                raise ValueError(f"execution time {c} of {n.callback} job {job} outside [1, {n.wcet}]")
            return c
    return n.wcet


def make_segment(forest: Forest, task: int, node: int, job: int, start: int, end: int,
                 priority=None) -> Segment:
    tree = forest.trees[task]
    return Segment(task, node, job, start, end, tree.nodes[node].callback, tree.name,
                   None if priority is None else (priority.primary, priority.tiebreak_class,
                                                  priority.job_index))


def completed_jobs(forest: Forest, segments: Sequence[Segment]) -> set[tuple[int, int]]:
    done: dict[tuple[int, int], int] = {}
    for s in segments:
        done[(s.task, s.job)] = done.get((s.task, s.job), 0) + 1
    return {k for k, n in done.items() if n == len(forest.trees[k[0]].nodes)}


def require_progress(forest: Forest, segments: Sequence[Segment], horizon: int) -> None:
    if forest.trees and not completed_jobs(forest, [s for s in segments if s.end <= horizon]):
        raise HorizonTooSmall(f"no job completes within horizon {horizon}")


def check_horizon(horizon: int) -> None:
    if not isinstance(horizon, int) or horizon <= 0:
        raise ValueError(f"horizon must be a positive integer, got {horizon!r}")
