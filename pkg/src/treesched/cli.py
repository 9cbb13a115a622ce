"""Command-line entry point: ``treesched {unfold,simulate,compare,analyze,render,gen}``.

Exit status: 0 on success, 1 when an analysis finds a problem (divergence,
or a deadline miss under ``--strict``), 2 on bad input.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from . import trace_io
from .analysis import (
    check_harmonic_condition,
    hyperperiod,
    max_dds_depth,
    observed_bounds,
    response_times,
    utilization,
)
from .errors import TreeschedError
from .executors import simulate_default_executor, simulate_fifo_events, simulate_two_queue
from .gantt import render_svg
from .generate import DEFAULT_PERIODS, GenParams, generate
from .graph_model import unfold
from .reference import simulate_reference, traces_equivalent
from .scheduling_core import make_policy
from .taskset import load_taskset, serialize_taskset

EXECUTORS = ("default", "events-fifo", "two-queue", "reference")


class InputError(Exception):
    pass


def _horizon(args, doc, forest):
    if args.horizon is not None:
        return args.horizon
    if doc.config.horizon is not None:
        return doc.config.horizon
    return hyperperiod(forest)


def _policy(args, doc):
    name = args.policy or doc.config.policy
    return make_policy(name, doc.config.fixed_priorities or None)


def _run(executor, forest, policy, dds, horizon, exec_times):
    if executor == "default":
        return simulate_default_executor(forest, horizon, dds or "fifo", exec_times)
    if executor == "events-fifo":
        return simulate_fifo_events(forest, horizon, dds or "fifo", exec_times)
    if executor == "reference":
        return simulate_reference(forest, policy, horizon, exec_times)
    return simulate_two_queue(forest, policy, dds or "lifo", horizon, exec_times)


def _tick_unit(trace, doc):
    return replace(trace, tick_unit=doc.config.tick_unit)


def _gen_params(args) -> GenParams:
    return GenParams(max_trees=args.trees, max_depth=args.depth, max_fanout=args.fanout,
                     max_utilization=args.util,
                     periods=tuple(args.periods) if args.periods else DEFAULT_PERIODS)


def _docs(args):
    """The taskset, or ``--trials`` generated ones when no taskset is given."""
    if args.taskset:
        if args.trials:
            raise InputError("--trials generates its own tasksets; drop the TASKSET argument")
        return [(None, load_taskset(args.taskset))]
    if not args.trials:
        raise InputError("give a TASKSET or --trials N")
    params = _gen_params(args)
    return [(i, generate(args.seed + i, params)) for i in range(args.trials)]


def _parallel(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))  # map keeps trial order


def cmd_unfold(args, out):
    doc = load_taskset(args.taskset)
    forest = unfold(doc.graph)
    out.write(f"forest {forest.fingerprint()}: {len(forest.trees)} tree(s), {forest.node_count} node(s)\n")
    for tree in forest.trees:
        kind = "sporadic" if tree.sporadic else "periodic"
        out.write(f"tree {tree.index} {tree.name} ({kind}, T={tree.period}, D={tree.relative_deadline}, "
                  f"phase={tree.phase}, work={tree.total_wcet})\n")
        for node in tree.nodes:
            depth, p = 0, node.parent
            while p is not None:
                depth, p = depth + 1, tree.nodes[p].parent
            cb, edge = forest.provenance[(tree.index, node.id)]
            via = f"  <- {edge.publisher} via {edge.topic}" if edge else ""
            out.write(f"  {'  ' * depth}#{node.id} {cb} wcet={node.wcet}{via}\n")
    out.write("duplication counts:\n")
    for cb, n in forest.duplication_counts().items():
        out.write(f"  {cb}: {n}\n")
    return 0


def cmd_simulate(args, out):
    docs = _docs(args)

    def one(item):
        idx, doc = item
        forest = unfold(doc.graph)
        trace = _run(args.executor, forest, _policy(args, doc), args.dds or doc.config.dds_order,
                     _horizon(args, doc, forest), doc.config.exec_times)
        return idx, trace_io.dumps(_tick_unit(trace, doc))

    results = _parallel(one, docs, args.jobs)
    if len(results) == 1 and results[0][0] is None:
        text = results[0][1]
        if args.output and args.output != "-":
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            out.write(text)
        return 0
    if not args.output:
        raise InputError("--trials needs -o DIRECTORY")
    os.makedirs(args.output, exist_ok=True)
    for idx, text in results:
        path = os.path.join(args.output, f"trial_{idx:04d}.trace")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        out.write(f"trial {idx} seed {args.seed + idx}: {path}\n")
    return 0


def cmd_compare(args, out):
    docs = _docs(args)

    def one(item):
        idx, doc = item
        forest = unfold(doc.graph)
        policy = _policy(args, doc)
        horizon = _horizon(args, doc, forest)
        dds = args.dds or doc.config.dds_order
        two_q = simulate_two_queue(forest, policy, dds, horizon, doc.config.exec_times)
        ref = simulate_reference(forest, policy, horizon, doc.config.exec_times)
        return idx, traces_equivalent(two_q, ref), two_q

    failed = 0
    for idx, eq, two_q in _parallel(one, docs, args.jobs):
        prefix = "" if idx is None else f"trial {idx} seed {args.seed + idx}: "
        if eq:
            out.write(f"{prefix}equivalent ({len(two_q.segments)} segments, "
                      f"{two_q.violations()} invariant violations)\n")
        else:
            failed += 1
            out.write(f"{prefix}DIVERGENT\n{eq.divergence.describe()}\n")
        if two_q.violations():
            failed += 1
    return 1 if failed else 0


def _parse_bounds(items):
    bounds = {}
    for item in items or ():
        name, _, val = item.partition("=")
        try:
            bounds[name] = int(val)
        except ValueError:
            raise InputError(f"bad --bound {item!r}; expected CALLBACK=TICKS") from None
    return bounds


def cmd_analyze(args, out):
    doc = load_taskset(args.taskset)
    forest = unfold(doc.graph)
    policy = _policy(args, doc)
    periodic = not any(t.sporadic for t in forest.trees)
    if periodic:
        out.write(f"utilization: {utilization(forest):.3f}\n")
        out.write(f"hyperperiod: {hyperperiod(forest)}\n")
    horizon = _horizon(args, doc, forest)
    trace = _run(args.executor, forest, policy, args.dds or doc.config.dds_order, horizon,
                 doc.config.exec_times)
    report = response_times(trace, forest, args.percentile)
    out.write(f"response times ({args.executor}, horizon {horizon}):\n")
    out.write(f"  {'task':<12}{'jobs':>6}{'incomplete':>12}{'max':>8}{'mean':>10}"
              f"{'p' + format(args.percentile, 'g'):>10}\n")
    for name, s in report.tasks.items():
        fmt = (lambda v, spec: "-" if v is None else format(v, spec))
        out.write(f"  {name:<12}{len(s.jobs):>6}{s.incomplete:>12}{fmt(s.max, 'd'):>8}"
                  f"{fmt(s.mean, '.2f'):>10}{fmt(s.percentile, '.2f'):>10}\n")
    out.write(f"deadline misses: {len(report.deadline_misses)}\n")
    for m in report.deadline_misses[:20]:
        out.write(f"  {m.task} job {m.job} late by {m.lateness}\n")

    if periodic:
        bounds = _parse_bounds(args.bound)
        if len(bounds) < len(forest.callbacks()):
            calib = simulate_two_queue(forest, policy, "lifo", hyperperiod(forest), doc.config.exec_times)
            bounds = {**observed_bounds(calib, forest), **bounds}
        check = check_harmonic_condition(forest, bounds)
        out.write(f"harmonic condition: {'pass' if check.passed else 'fail'}\n")
        for sub, ok in check.subscriptions.items():
            out.write(f"  {sub}: {'pass' if ok else 'fail'}\n")
        for v in check.violations:
            out.write(f"    {v.describe()}\n")
    depths = max_dds_depth(trace)
    out.write("max dds depth:\n")
    for (topic, sub), d in sorted(depths.items()):
        out.write(f"  {topic} -> {sub}: {d}\n")
    if trace.mismatches:
        out.write(f"message/job mismatches: {len(trace.mismatches)}\n")
    return 1 if args.strict and report.deadline_misses else 0


def cmd_render(args, out):
    trace = trace_io.load(args.trace)
    svg = render_svg(trace, scale=args.scale, title=args.title)
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(svg)
    else:
        out.write(svg)
    return 0


def cmd_gen(args, out):
    doc = generate(args.seed, _gen_params(args))
    text = f"# generated: seed={args.seed}\n" + serialize_taskset(doc)
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="treesched", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def gen_opts(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trees", type=int, default=6)
        p.add_argument("--depth", type=int, default=4)
        p.add_argument("--fanout", type=int, default=3)
        p.add_argument("--util", type=float, default=0.95)
        p.add_argument("--periods", type=int, nargs="+")

    def sim_opts(p, executor=True):
        if executor:
            p.add_argument("--executor", choices=EXECUTORS, default="two-queue")
        p.add_argument("--policy", choices=("rm", "edf", "fixed"))
        p.add_argument("--dds", choices=("fifo", "lifo"))
        p.add_argument("--horizon", type=int)

    p = sub.add_parser("unfold", help="print the unfolded forest")
    p.add_argument("taskset")
    p.set_defaults(fn=cmd_unfold)

    p = sub.add_parser("simulate", help="simulate one executor and write its trace")
    p.add_argument("taskset", nargs="?")
    sim_opts(p)
    p.add_argument("-o", "--output")
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    gen_opts(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("compare", help="two-queue executor vs reference scheduler")
    p.add_argument("taskset", nargs="?")
    sim_opts(p, executor=False)
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    gen_opts(p)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("analyze", help="response times, utilization, harmonic check")
    p.add_argument("taskset")
    sim_opts(p)
    p.add_argument("--percentile", type=float, default=99.7)
    p.add_argument("--bound", action="append", metavar="CALLBACK=TICKS")
    p.add_argument("--strict", action="store_true", help="exit 1 on any deadline miss")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("render", help="trace file to SVG Gantt chart")
    p.add_argument("trace")
    p.add_argument("-o", "--output")
    p.add_argument("--scale", type=float, default=10.0)
    p.add_argument("--title")
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("gen", help="write a seeded random taskset")
    gen_opts(p)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_gen)
    return ap


def run_cli(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args, out)
    except (TreeschedError, InputError, OSError, ValueError) as exc:
        print(f"treesched: error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
