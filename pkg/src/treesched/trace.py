"""Immutable schedule traces produced by every simulator."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Segment:
    task: int
    node: int
    job: int
    start: int
    end: int
    callback: str
    task_name: str
    priority: tuple[int, int, int] | None = None
    """Full priority key the executor used at dispatch, if it has one."""

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.task, self.node, self.job)

    @property
    def instance(self) -> str:
        return f"{self.task}:{self.node}:{self.job}"

    @property
    def identity(self) -> tuple[int, int, int, int, int]:
        return (self.task, self.node, self.job, self.start, self.end)


@dataclass(frozen=True)
class Release:
    task: int
    node: int
    job: int
    tick: int

    @property
    def instance(self) -> str:
        return f"{self.task}:{self.node}:{self.job}"


@dataclass(frozen=True)
class Drop:
    callback: str
    task: int
    job: int
    tick: int


@dataclass(frozen=True)
class DdsEvent:
    kind: str  # "enqueue" | "dequeue"
    topic: str
    subscriber: str
    message: int
    publisher: str  # "task:job" of the job whose data the message carries
    tick: int


@dataclass(frozen=True)
class Mismatch:
    """A subscription dispatched for one job consumed another job's message."""

    tick: int
    instance: str
    message: int
    message_job: str


@dataclass(frozen=True)
class ScheduleTrace:
    executor: str
    horizon: int
    forest: str
    segments: tuple[Segment, ...] = ()
    releases: tuple[Release, ...] = ()
    drops: tuple[Drop, ...] = ()
    polling_points: tuple[int, ...] = ()
    dds_events: tuple[DdsEvent, ...] = ()
    max_dds_depth: dict = field(default_factory=dict, compare=False, hash=False)
    mismatches: tuple[Mismatch, ...] = ()
    checks: dict = field(default_factory=dict, compare=False, hash=False)
    """Invariant name -> ``[evaluations, violations]`` (two-queue only)."""
    tick_unit: str = "100us"

    def violations(self) -> int:
        return sum(v for _, v in self.checks.values())

    def by_task(self, task: int) -> list[Segment]:
        return [s for s in self.segments if s.task == task]
