"""Response times, utilization, hyperperiods and the harmonic-parents check."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import MissingBound, NotPeriodic, SporadicTask
from .graph_model import AppGraph, Forest, unfold
from .trace import ScheduleTrace


def _periodic(forest: Forest, err=SporadicTask) -> None:
    for tree in forest.trees:
        if tree.sporadic:
            raise err(f"task {tree.name!r} is sporadic")


def hyperperiod(forest: Forest) -> int:
    _periodic(forest)
    return math.lcm(*(t.period for t in forest.trees)) if forest.trees else 1


def utilization(forest: Forest) -> float:
    """Sum over trees of total tree work divided by period."""
    _periodic(forest)
    return float(sum(Fraction(t.total_wcet, t.period) for t in forest.trees))


@dataclass(frozen=True)
class JobResponse:
    job: int
    release: int
    completion: int

    @property
    def response(self) -> int:
        return self.completion - self.release


@dataclass(frozen=True)
class TaskStats:
    task: str
    jobs: tuple[JobResponse, ...]
    incomplete: int
    max: int | None
    mean: float | None
    percentile: float | None


@dataclass(frozen=True)
class DeadlineMiss:
    task: str
    job: int
    lateness: int


@dataclass
class ResponseTimeReport:
    tasks: dict[str, TaskStats] = field(default_factory=dict)
    deadline_misses: list[DeadlineMiss] = field(default_factory=list)
    percentile_level: float = 99.7

    def max_response(self) -> dict[str, int | None]:
        return {name: s.max for name, s in self.tasks.items()}


def response_times(trace: ScheduleTrace, forest: Forest, percentile: float = 99.7) -> ResponseTimeReport:
    """Per-job response time from root release to completion of the job's
    last subtask instance.  Jobs not finished by the horizon are counted as
    incomplete and left out of the statistics."""
    release = {}
    for r in trace.releases:
        if r.node == 0:
            release[(r.task, r.job)] = r.tick
    finish: dict[tuple[int, int], list[int]] = {}
    for s in trace.segments:
        if s.end <= trace.horizon:
            finish.setdefault((s.task, s.job), []).append(s.end)

    report = ResponseTimeReport(percentile_level=percentile)
    for tree in forest.trees:
        done, incomplete = [], 0
        for (task, job), tick in sorted(release.items()):
            if task != tree.index:
                continue
            ends = finish.get((task, job), [])
            if len(ends) == len(tree.nodes):
                done.append(JobResponse(job, tick, max(ends)))
            else:
                incomplete += 1
        rts = np.array([j.response for j in done], dtype=float)
        report.tasks[tree.name] = TaskStats(
            task=tree.name,
            jobs=tuple(done),
            incomplete=incomplete,
            max=int(rts.max()) if len(rts) else None,
            mean=float(rts.mean()) if len(rts) else None,
            percentile=float(np.percentile(rts, percentile)) if len(rts) else None,
        )
        for j in done:
            late = j.completion - (j.release + tree.relative_deadline)
            if late > 0:
                report.deadline_misses.append(DeadlineMiss(tree.name, j.job, late))
    return report


def observed_bounds(trace: ScheduleTrace, forest: Forest) -> dict[str, int]:
    """Largest observed (completion - job release) for every callback.

    Measured from the owning tree's job release, so the values are safe to
    use for publishers that are not roots and pessimistic for subscribers.
    """
    release = {(r.task, r.job): r.tick for r in trace.releases if r.node == 0}
    out: dict[str, int] = {}
    for s in trace.segments:
        if s.end > trace.horizon or (s.task, s.job) not in release:
            continue
        r = s.end - release[(s.task, s.job)]
        if r > out.get(s.callback, -1):
            out[s.callback] = r
    return out


@dataclass(frozen=True)
class Publisher:
    callback: str
    task: int
    task_name: str
    period: int
    phase: int

    @property
    def label(self) -> str:
        return self.callback if self.callback == self.task_name else f"{self.callback}@{self.task_name}"


@dataclass(frozen=True)
class HarmonicViolation:
    subscription: str
    first: str
    second: str
    inequality: int  # 1: t_A + R_A + R_C <= t_B ; 2: t_B + R_B + R_C <= next t_A ; 0: own period
    release_first: int
    release_second: int
    lhs: int
    rhs: int

    def describe(self) -> str:
        return (f"{self.subscription}: pair ({self.first}, {self.second}) inequality {self.inequality}: "
                f"{self.lhs} > {self.rhs} (releases {self.release_first}, {self.release_second})")


@dataclass
class HarmonicCheckResult:
    subscriptions: dict[str, bool] = field(default_factory=dict)
    violations: list[HarmonicViolation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.subscriptions.values())

    def __bool__(self) -> bool:
        return self.passed


def _next_release(p: Publisher, t: int, strict: bool = False) -> int:
    """First release of ``p`` at or after ``t`` (strictly after if ``strict``)."""
    if t < p.phase:
        return p.phase
    k = -(-(t - p.phase) // p.period)
    nxt = p.phase + k * p.period
    if strict and nxt == t:
        nxt += p.period
    return nxt


def publishers_of(forest: Forest) -> dict[str, list[Publisher]]:
    """Distinct publishing (callback, tree) instances per subscription callback."""
    out: dict[str, list[Publisher]] = {}
    for tree in forest.trees:
        for node in tree.nodes[1:]:
            parent = tree.nodes[node.parent]
            pub = Publisher(parent.callback, tree.index, tree.name, tree.period, tree.phase)
            pubs = out.setdefault(node.callback, [])
            if pub not in pubs:
                pubs.append(pub)
    return out


def check_harmonic_condition(model, bounds: Mapping[str, int]) -> HarmonicCheckResult:
    """Check that every multi-publisher subscription holds at most one message.

    ``model`` is an :class:`AppGraph` or an unfolded :class:`Forest`;
    ``bounds`` maps callback ids to response-time bounds.  For every ordered
    pair of publishers (A, B) and every release of A within one hyperperiod,
    with B's next release at or after it and A's next release after that:

        t_A + R_A + R_C <= t_B
        t_B + R_B + R_C <= t_A'

    Each publisher must also clear its own period (R_A + R_C <= T_A) so two
    back-to-back releases of one parent cannot stack up either.
    """
    forest = unfold(model) if isinstance(model, AppGraph) else model
    result = HarmonicCheckResult()
    for sub, pubs in publishers_of(forest).items():
        if len(pubs) < 2:
            result.subscriptions[sub] = True
            continue
        for p in pubs:
            if forest.trees[p.task].sporadic:
                raise NotPeriodic(f"publisher {p.label} of {sub!r} is not strictly periodic")
        for name in [sub] + [p.callback for p in pubs]:
            if name not in bounds:
                raise MissingBound(f"no response-time bound for {name!r}")
        r_c = bounds[sub]
        hyper = math.lcm(*(p.period for p in pubs))
        ok = True
        for a in pubs:
            r_a = bounds[a.callback]
            if r_a + r_c > a.period:
                ok = False
                result.violations.append(HarmonicViolation(sub, a.label, a.label, 0, a.phase,
                                                           a.phase + a.period, a.phase + r_a + r_c,
                                                           a.phase + a.period))
            for b in pubs:
                if a is b:
                    continue
                r_b = bounds[b.callback]
                for t_a in range(a.phase, a.phase + hyper, a.period):
                    t_b = _next_release(b, t_a)
                    t_a2 = _next_release(a, t_b, strict=True)
                    if t_a + r_a + r_c > t_b:
                        ok = False
                        result.violations.append(HarmonicViolation(
                            sub, a.label, b.label, 1, t_a, t_b, t_a + r_a + r_c, t_b))
                        break
                    if t_b + r_b + r_c > t_a2:
                        ok = False
                        result.violations.append(HarmonicViolation(
                            sub, a.label, b.label, 2, t_a, t_b, t_b + r_b + r_c, t_a2))
                        break
        result.subscriptions[sub] = ok
    return result


def max_dds_depth(trace: ScheduleTrace) -> dict[tuple[str, str], int]:
    """Largest simultaneous message count per (topic, subscriber), replayed
    from the trace's middleware events."""
    depth: dict[tuple[str, str], int] = {}
    peak: dict[tuple[str, str], int] = {}
    for ev in trace.dds_events:
        k = (ev.topic, ev.subscriber)
        depth[k] = depth.get(k, 0) + (1 if ev.kind == "enqueue" else -1)
        peak[k] = max(peak.get(k, 0), depth[k])
    return peak
