"""Taskset documents: a strict YAML schema for callback graphs plus run
configuration.

Example::

    tick_unit: 1ms
    policy: rm
    dds_order: lifo
    topics: [scan]
    callbacks:
      - {id: lidar, kind: timer, period: 25, wcet: 1, published_topics: [scan]}
      - {id: filter, kind: subscription, subscribed_topic: scan, wcet: 2}

Top-level keys: ``tick_unit``, ``policy`` (rm, edf, fixed), ``dds_order``
(fifo, lifo), ``horizon``, ``fixed_priorities`` (root id -> integer, smaller
is higher), ``exec_times`` (callback id -> per-job execution times),
``topics`` and ``callbacks``.  Unknown keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .errors import ParseError, SchemaError
from .graph_model import AppGraph, CallbackKind, CallbackSpec, validate

TOP_KEYS = ("tick_unit", "policy", "dds_order", "horizon", "fixed_priorities",
            "exec_times", "topics", "callbacks")
CALLBACK_KEYS = ("id", "kind", "wcet", "period", "phase", "min_interarrival",
                 "subscribed_topic", "published_topics", "relative_deadline", "arrivals")
POLICIES = ("rm", "edf", "fixed")
DDS_ORDERS = ("fifo", "lifo")


@dataclass
class RunConfig:
    tick_unit: str = "100us"
    policy: str = "rm"
    dds_order: str = "lifo"
    horizon: int | None = None
    fixed_priorities: dict[str, int] = field(default_factory=dict)
    exec_times: dict[str, list[int]] = field(default_factory=dict)


@dataclass
class TasksetDocument:
    graph: AppGraph
    config: RunConfig


def _err(msg, node, path):
    mark = node.start_mark if node is not None else None
    return SchemaError(f"{path}: {msg}", field=path,
                       line=mark.line + 1 if mark else None,
                       column=mark.column + 1 if mark else None)


class _Reader:
    def __init__(self, loader):
        self.loader = loader

    def mapping(self, node, allowed, path):
        if not isinstance(node, yaml.MappingNode):
            raise _err("expected a mapping", node, path)
        out = {}
        for key_node, value_node in node.value:
            key = self.loader.construct_object(key_node, deep=True)
            if not isinstance(key, str) or (allowed is not None and key not in allowed):
                raise _err(f"unknown field {key!r}", key_node, f"{path}.{key}" if path else str(key))
            if key in out:
                raise _err(f"duplicate field {key!r}", key_node, path)
            out[key] = value_node
        return out

    def value(self, node):
        return self.loader.construct_object(node, deep=True)

    def int(self, node, path, minimum=0):
        v = self.value(node)
        if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
            raise _err(f"expected an integer >= {minimum}, got {v!r}", node, path)
        return v

    def str(self, node, path, choices=None):
        v = self.value(node)
        if not isinstance(v, str) or (choices and v not in choices):
            want = f"one of {', '.join(choices)}" if choices else "a string"
            raise _err(f"expected {want}, got {v!r}", node, path)
        return v

    def seq(self, node, path):
        if not isinstance(node, yaml.SequenceNode):
            raise _err("expected a list", node, path)
        return node.value


def parse_taskset(text: str) -> TasksetDocument:
    """Parse and validate a taskset document.

    Raises :class:`ParseError` for malformed YAML and :class:`SchemaError`
    (with line and column) for schema or referential-integrity problems.
    Graph-level problems such as cycles propagate from :func:`validate`.
    """
    loader = yaml.SafeLoader(text)
    try:
        try:
            root = loader.get_single_node()
        except yaml.MarkedYAMLError as exc:
            mark = exc.problem_mark
            raise ParseError(exc.problem or str(exc), mark.line + 1 if mark else None,
                             mark.column + 1 if mark else None) from None
        except yaml.YAMLError as exc:
            raise ParseError(str(exc)) from None
        if root is None:
            raise ParseError("empty document")
        rd = _Reader(loader)
        top = rd.mapping(root, TOP_KEYS, "")
        cfg = RunConfig()
        if "tick_unit" in top:
            cfg.tick_unit = rd.str(top["tick_unit"], "tick_unit")
        if "policy" in top:
            cfg.policy = rd.str(top["policy"], "policy", POLICIES)
        if "dds_order" in top:
            cfg.dds_order = rd.str(top["dds_order"], "dds_order", DDS_ORDERS)
        if "horizon" in top:
            cfg.horizon = rd.int(top["horizon"], "horizon", 1)
        if "fixed_priorities" in top:
            for k, v in rd.mapping(top["fixed_priorities"], None, "fixed_priorities").items():
                cfg.fixed_priorities[k] = rd.int(v, f"fixed_priorities.{k}", -2**62)
        if "exec_times" in top:
            for k, v in rd.mapping(top["exec_times"], None, "exec_times").items():
                cfg.exec_times[k] = [rd.int(x, f"exec_times.{k}[{i}]", 1)
                                     for i, x in enumerate(rd.seq(v, f"exec_times.{k}"))]

        topics = []
        topic_nodes = {}
        if "topics" in top:
            for i, n in enumerate(rd.seq(top["topics"], "topics")):
                name = rd.str(n, f"topics[{i}]")
                topics.append(name)
                topic_nodes[name] = n

        callbacks = []
        cb_nodes = {}
        if "callbacks" not in top:
            raise _err("missing field 'callbacks'", root, "callbacks")
        for i, n in enumerate(rd.seq(top["callbacks"], "callbacks")):
            path = f"callbacks[{i}]"
            m = rd.mapping(n, CALLBACK_KEYS, path)
            for req in ("id", "kind", "wcet"):
                if req not in m:
                    raise _err(f"missing field {req!r}", n, path)
            cb_id = rd.str(m["id"], f"{path}.id")
            kind = CallbackKind(rd.str(m["kind"], f"{path}.kind", [k.value for k in CallbackKind]))
            kwargs = {"id": cb_id, "kind": kind, "wcet": rd.int(m["wcet"], f"{path}.wcet", 1)}
            for name in ("period", "min_interarrival", "relative_deadline"):
                if name in m:
                    kwargs[name] = rd.int(m[name], f"{path}.{name}", 1)
            if "phase" in m:
                kwargs["phase"] = rd.int(m["phase"], f"{path}.phase", 0)
            if "subscribed_topic" in m:
                topic = rd.str(m["subscribed_topic"], f"{path}.subscribed_topic")
                if topic not in topics:
                    raise _err(f"undeclared topic {topic!r}", m["subscribed_topic"],
                               f"{path}.subscribed_topic")
                kwargs["subscribed_topic"] = topic
            if "published_topics" in m:
                pubs = []
                for j, tn in enumerate(rd.seq(m["published_topics"], f"{path}.published_topics")):
                    topic = rd.str(tn, f"{path}.published_topics[{j}]")
                    if topic not in topics:
                        raise _err(f"undeclared topic {topic!r}", tn, f"{path}.published_topics[{j}]")
                    pubs.append(topic)
                kwargs["published_topics"] = tuple(pubs)
            if "arrivals" in m:
                kwargs["arrivals"] = tuple(rd.int(x, f"{path}.arrivals[{j}]", 0)
                                           for j, x in enumerate(rd.seq(m["arrivals"], f"{path}.arrivals")))
            callbacks.append(CallbackSpec(**kwargs))
            cb_nodes[cb_id] = n

        graph = AppGraph(tuple(callbacks), tuple(topics))
        try:
            validate(graph)
        except SchemaError as exc:
            # attach a location when the failing callback is identifiable
            cb_id = (exc.field or "").partition("[")[2].partition("]")[0]
            node = cb_nodes.get(cb_id)
            if node is not None and exc.line is None:
                raise _err(str(exc), node, exc.field) from None
            raise

        ids = {cb.id for cb in callbacks}
        roots = {cb.id for cb in callbacks if cb.is_root}
        for k in cfg.exec_times:
            if k not in ids:
                raise _err(f"unknown callback {k!r}", top["exec_times"], f"exec_times.{k}")
            wcet = graph.callback(k).wcet
            if any(c > wcet for c in cfg.exec_times[k]):
                raise _err(f"execution time above wcet {wcet}", top["exec_times"], f"exec_times.{k}")
        for k in cfg.fixed_priorities:
            if k not in roots:
                raise _err(f"{k!r} is not a root callback", top["fixed_priorities"],
                           f"fixed_priorities.{k}")
        if cfg.policy == "fixed" and set(cfg.fixed_priorities) != roots:
            missing = sorted(roots - set(cfg.fixed_priorities))
            raise _err(f"fixed policy needs priorities for {missing}", root, "fixed_priorities")
        return TasksetDocument(graph, cfg)
    finally:
        loader.dispose()


def load_taskset(path) -> TasksetDocument:
    with open(path, encoding="utf-8") as fh:
        return parse_taskset(fh.read())


def _callback_dict(cb: CallbackSpec) -> dict:
    d = {"id": cb.id, "kind": cb.kind.value, "wcet": cb.wcet}
    if cb.period is not None:
        d["period"] = cb.period
    if cb.phase:
        d["phase"] = cb.phase
    if cb.min_interarrival is not None:
        d["min_interarrival"] = cb.min_interarrival
    if cb.relative_deadline is not None:
        d["relative_deadline"] = cb.relative_deadline
    if cb.subscribed_topic is not None:
        d["subscribed_topic"] = cb.subscribed_topic
    if cb.published_topics:
        d["published_topics"] = list(cb.published_topics)
    if cb.arrivals:
        d["arrivals"] = list(cb.arrivals)
    return d


class _FlowList(list):
    pass


class _Dumper(yaml.SafeDumper):
    pass


_Dumper.add_representer(
    _FlowList, lambda d, v: d.represent_sequence("tag:yaml.org,2002:seq", v, flow_style=True))


def serialize_taskset(doc: TasksetDocument) -> str:
    """Canonical text: fixed key order, defaults omitted, one callback per line."""
    cfg = doc.config
    out = {"tick_unit": cfg.tick_unit, "policy": cfg.policy, "dds_order": cfg.dds_order}
    if cfg.horizon is not None:
        out["horizon"] = cfg.horizon
    if cfg.fixed_priorities:
        out["fixed_priorities"] = dict(cfg.fixed_priorities)
    if cfg.exec_times:
        out["exec_times"] = {k: _FlowList(v) for k, v in cfg.exec_times.items()}
    out["topics"] = _FlowList(doc.graph.topics)
    text = yaml.dump(out, Dumper=_Dumper, sort_keys=False, width=1000)
    lines = [text.rstrip("\n"), "callbacks:"]
    if not doc.graph.callbacks:
        lines[-1] = "callbacks: []"
    for cb in doc.graph.callbacks:
        d = _callback_dict(cb)
        flow = yaml.dump(d, Dumper=_Dumper, sort_keys=False, default_flow_style=True, width=1000)
        lines.append(f"  - {flow.strip()}")
    return "\n".join(lines) + "\n"
