"""Canonical text form of schedule traces.

One header line, then ``[section]`` blocks of comma-separated records::

    # treesched-trace v1 executor=default forest=3f0c... horizon=30 tick_unit=1ms
    [segments]
    start,end,task,task_name,node,callback,job,priority,tiebreak
    0,3,0,tau1,0,tau1,0,-,-
    ...

Sections: segments, releases, drops, polling_points, dds_events, mismatches,
max_dds_depth, checks.  The same trace value always yields the same bytes.
"""

from __future__ import annotations

import csv
import io

from .errors import ParseError
from .trace import DdsEvent, Drop, Mismatch, Release, ScheduleTrace, Segment

MAGIC = "# treesched-trace v1"

_COLUMNS = {
    "segments": ("start", "end", "task", "task_name", "node", "callback", "job", "priority", "tiebreak"),
    "releases": ("task", "node", "job", "tick"),
    "drops": ("callback", "task", "job", "tick"),
    "polling_points": ("tick",),
    "dds_events": ("kind", "topic", "subscriber", "message", "publisher", "tick"),
    "mismatches": ("tick", "instance", "message", "message_job"),
    "max_dds_depth": ("topic", "subscriber", "depth"),
    "checks": ("invariant", "evaluations", "violations"),
}


def _rows(trace: ScheduleTrace):
    yield "segments", [
        (s.start, s.end, s.task, s.task_name, s.node, s.callback, s.job,
         "-" if s.priority is None else s.priority[0],
         "-" if s.priority is None else f"{s.priority[1]}:{s.priority[2]}")
        for s in trace.segments]
    yield "releases", [(r.task, r.node, r.job, r.tick) for r in trace.releases]
    yield "drops", [(d.callback, d.task, d.job, d.tick) for d in trace.drops]
    yield "polling_points", [(t,) for t in trace.polling_points]
    yield "dds_events", [(e.kind, e.topic, e.subscriber, e.message, e.publisher, e.tick)
                         for e in trace.dds_events]
    yield "mismatches", [(m.tick, m.instance, m.message, m.message_job) for m in trace.mismatches]
    yield "max_dds_depth", [(t, s, d) for (t, s), d in sorted(trace.max_dds_depth.items())]
    yield "checks", [(k, v[0], v[1]) for k, v in sorted(trace.checks.items())]


def dumps(trace: ScheduleTrace) -> str:
    buf = io.StringIO()
    buf.write(f"{MAGIC} executor={trace.executor} forest={trace.forest} "
              f"horizon={trace.horizon} tick_unit={trace.tick_unit}\n")
    w = csv.writer(buf, lineterminator="\n")
    for name, rows in _rows(trace):
        buf.write(f"[{name}]\n")
        w.writerow(_COLUMNS[name])
        w.writerows(rows)
    return buf.getvalue()


def dump(trace: ScheduleTrace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps(trace))


def loads(text: str) -> ScheduleTrace:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(MAGIC):
        raise ParseError("not a treesched trace (bad header)", 1, 1)
    header = dict(kv.split("=", 1) for kv in lines[0][len(MAGIC):].split())
    sections: dict[str, list[list[str]]] = {}
    current = None
    for lineno, line in enumerate(lines[1:], start=2):
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            if current not in _COLUMNS:
                raise ParseError(f"unknown section {current!r}", lineno, 1)
            sections[current] = []
            continue
        if current is None:
            raise ParseError("record outside of a section", lineno, 1)
        row = next(csv.reader([line]))
        if tuple(row) == _COLUMNS[current]:
            continue
        if len(row) != len(_COLUMNS[current]):
            raise ParseError(f"expected {len(_COLUMNS[current])} fields in [{current}]", lineno, 1)
        sections[current].append(row)

    def get(name):
        return sections.get(name, [])

    segs = []
    for r in get("segments"):
        prio = None
        if r[7] != "-":
            cls, job = r[8].split(":")
            prio = (int(r[7]), int(cls), int(job))
        segs.append(Segment(int(r[2]), int(r[4]), int(r[6]), int(r[0]), int(r[1]), r[5], r[3], prio))
    return ScheduleTrace(
        executor=header.get("executor", "?"),
        horizon=int(header.get("horizon", 0)),
        forest=header.get("forest", ""),
        segments=tuple(segs),
        releases=tuple(Release(*map(int, r)) for r in get("releases")),
        drops=tuple(Drop(r[0], int(r[1]), int(r[2]), int(r[3])) for r in get("drops")),
        polling_points=tuple(int(r[0]) for r in get("polling_points")),
        dds_events=tuple(DdsEvent(r[0], r[1], r[2], int(r[3]), r[4], int(r[5])) for r in get("dds_events")),
        max_dds_depth={(r[0], r[1]): int(r[2]) for r in get("max_dds_depth")},
        mismatches=tuple(Mismatch(int(r[0]), r[1], int(r[2]), r[3]) for r in get("mismatches")),
        checks={r[0]: [int(r[1]), int(r[2])] for r in get("checks")},
        tick_unit=header.get("tick_unit", "100us"),
    )


def load(path) -> ScheduleTrace:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
