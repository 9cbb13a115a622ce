"""Job-level priorities, jobs and subtask instances.

Convention used everywhere: a *smaller* :class:`PriorityKey` is a *higher*
priority.  Keys compare as ``(primary, tiebreak_class, job_index)`` so the
order is total across distinct jobs; instances of the same job tie.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

from .errors import MissingAssignment
from .graph_model import Forest, TreeTask


@dataclass(frozen=True, order=True)
class PriorityKey:
    primary: int
    tiebreak_class: int = 0
    job_index: int = 0


def higher(a: PriorityKey, b: PriorityKey) -> bool:
    """True iff ``a`` is strictly higher priority than ``b``."""
    return a < b


class PolicyKind(str, enum.Enum):
    RM = "rm"
    EDF = "edf"
    FIXED = "fixed"


@dataclass(frozen=True)
class Job:
    task: int
    job_index: int
    release_time: int
    absolute_deadline: int
    period: int
    task_name: str = ""

    @property
    def id(self) -> tuple[int, int]:
        return (self.task, self.job_index)


def make_job(tree: TreeTask, job_index: int, release_time: int) -> Job:
    return Job(
        task=tree.index,
        job_index=job_index,
        release_time=release_time,
        absolute_deadline=release_time + tree.relative_deadline,
        period=tree.period,
        task_name=tree.name,
    )


@dataclass(frozen=True)
class PriorityPolicy:
    kind: PolicyKind
    assignments: Mapping[str, int] = field(default_factory=dict)

    def priority_of(self, job: Job) -> PriorityKey:
        if self.kind is PolicyKind.RM:
            primary = job.period
        elif self.kind is PolicyKind.EDF:
            primary = job.absolute_deadline
        else:
            try:
                primary = self.assignments[job.task_name]
            except KeyError:
                raise MissingAssignment(f"no fixed priority for task {job.task_name!r}") from None
        return PriorityKey(primary, job.task, job.job_index)

    def check_complete(self, forest: Forest) -> None:
        if self.kind is not PolicyKind.FIXED:
            return
        missing = [t.name for t in forest.trees if t.name not in self.assignments]
        if missing:
            raise MissingAssignment(f"no fixed priority for task(s): {', '.join(missing)}")


def make_policy(kind, assignments: Mapping[str, int] | None = None) -> PriorityPolicy:
    """Build a priority policy.  ``kind`` is a :class:`PolicyKind` or its name.

    FIXED needs an assignment for every root task, keyed by root callback id;
    completeness against a particular forest is checked by
    :meth:`PriorityPolicy.check_complete` (the simulators call it).
    """
    kind = PolicyKind(kind.lower() if isinstance(kind, str) else kind)
    if kind is PolicyKind.FIXED and not assignments:
        raise MissingAssignment("FIXED policy requires a task -> priority map")
    return PriorityPolicy(kind, dict(assignments or {}))


def priority_of(policy: PriorityPolicy, job: Job) -> PriorityKey:
    return policy.priority_of(job)


class InstanceState(str, enum.Enum):
    PENDING = "pending"
    ENQUEUED = "enqueued"
    RUNNING = "running"
    DONE = "done"


_ORDER = [InstanceState.PENDING, InstanceState.ENQUEUED, InstanceState.RUNNING, InstanceState.DONE]


@dataclass(eq=False)
class SubtaskInstance:
    """One execution of one tree node for one job.

    ``priority`` is the job's true priority; executors that cannot see the
    precedence structure keep their own annotation next to the instance.
    """

    job: Job
    node: int
    eligibility_time: int
    exec_time: int
    priority: PriorityKey | None = None
    seq: int = 0
    state: InstanceState = InstanceState.PENDING

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.job.task, self.node, self.job.job_index)

    @property
    def label(self) -> str:
        return instance_label(*self.key)

    def advance(self, state: InstanceState) -> None:
        if _ORDER.index(state) <= _ORDER.index(self.state):
            raise ValueError(f"{self.label}: {self.state.value} -> {state.value} is not monotone")
        self.state = state


def instance_label(task: int, node: int, job: int) -> str:
    return f"{task}:{node}:{job}"
