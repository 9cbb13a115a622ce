"""Render a schedule trace as an SVG Gantt chart (stdlib only)."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .trace import ScheduleTrace

PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
           "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac")

ROW_H = 28
BAR_H = 18
LEFT = 90
TOP = 20


def render_svg(trace: ScheduleTrace, scale: float = 10.0, title: str | None = None) -> str:
    """One row per task, one ``rect.segment`` per trace segment.

    Bar x-extent is ``LEFT + tick * scale``; releases are drawn as small
    up-arrows, dropped activations dotted, polling points as dashed red lines.
    """
    rows: dict[int, str] = {}
    for s in trace.segments:
        rows.setdefault(s.task, s.task_name)
    for r in trace.releases:
        rows.setdefault(r.task, str(r.task))
    order = sorted(rows)
    row_of = {task: i for i, task in enumerate(order)}
    end = max([trace.horizon] + [s.end for s in trace.segments])
    width = LEFT + end * scale + 20
    height = TOP + len(order) * ROW_H + 30

    def x(t):
        return LEFT + t * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}" '
           f'viewBox="0 0 {width:g} {height:g}" font-family="sans-serif" font-size="11">']
    if title:
        out.append(f'<title>{escape(title)}</title>')
    axis_y = TOP + len(order) * ROW_H
    out.append(f'<line x1="{LEFT}" y1="{axis_y}" x2="{x(end):g}" y2="{axis_y}" stroke="#333"/>')
    step = max(1, end // 20)
    for t in range(0, end + 1, step):
        out.append(f'<text x="{x(t):g}" y="{axis_y + 14}" text-anchor="middle">{t}</text>')
    for task in order:
        y = TOP + row_of[task] * ROW_H
        out.append(f'<text class="label" x="{LEFT - 6}" y="{y + BAR_H - 4}" '
                   f'text-anchor="end">{escape(rows[task])}</text>')
    for s in trace.segments:
        y = TOP + row_of[s.task] * ROW_H
        colour = PALETTE[s.node % len(PALETTE)]
        out.append(
            f'<rect class="segment" data-start="{s.start}" data-end="{s.end}" data-job="{s.job}" '
            f'x="{x(s.start):g}" y="{y}" width="{(s.end - s.start) * scale:g}" height="{BAR_H}" '
            f'fill="{colour}" stroke="#222"><title>{escape(s.callback)} job {s.job} '
            f'[{s.start},{s.end})</title></rect>')
    dropped = {(d.task, d.job) for d in trace.drops}
    for r in trace.releases:
        if r.node != 0:
            continue
        y = TOP + row_of[r.task] * ROW_H + BAR_H
        dash = ' stroke-dasharray="2,2"' if (r.task, r.job) in dropped else ""
        out.append(f'<line class="release" x1="{x(r.tick):g}" y1="{y + 4}" x2="{x(r.tick):g}" '
                   f'y2="{y - BAR_H - 2}" stroke="#1f3b99"{dash}/>')
    for t in trace.polling_points:
        out.append(f'<line class="poll" x1="{x(t):g}" y1="{TOP - 6}" x2="{x(t):g}" y2="{axis_y}" '
                   f'stroke="red" stroke-dasharray="4,3"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
