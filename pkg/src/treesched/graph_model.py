"""Pub/sub callback graphs and their unfolding into forests of tree tasks.

An :class:`AppGraph` is what an application declares: callbacks, the topics
they publish to and the topic each subscription listens on.  Because a
subscription runs once for *every* message from *every* publisher, the
precedence constraints are disjunctive.  :func:`unfold` duplicates each
subscription once per incoming publish path so that every subtask ends up
with at most one parent, which gives a forest of tree tasks that standard
LP-FJP DAG analysis understands.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from typing import Iterator

from .errors import CycleError, SchemaError


class CallbackKind(str, enum.Enum):
    TIMER = "timer"
    SUBSCRIPTION = "subscription"
    EXTERNAL_SPORADIC = "external_sporadic"


@dataclass(frozen=True)
class CallbackSpec:
    """One callback as declared by the application.

    Timers and external sporadic callbacks become tree roots; subscriptions
    become child subtasks of whoever publishes on ``subscribed_topic``.
    ``arrivals`` is the explicit activation list of an external sporadic
    callback.
    """

    id: str
    kind: CallbackKind
    wcet: int
    period: int | None = None
    phase: int = 0
    min_interarrival: int | None = None
    subscribed_topic: str | None = None
    published_topics: tuple[str, ...] = ()
    relative_deadline: int | None = None
    arrivals: tuple[int, ...] = ()

    @property
    def is_root(self) -> bool:
        return self.kind is not CallbackKind.SUBSCRIPTION

    @property
    def rate(self) -> int | None:
        """Period of a timer or minimum inter-arrival time of a sporadic root."""
        if self.kind is CallbackKind.TIMER:
            return self.period
        if self.kind is CallbackKind.EXTERNAL_SPORADIC:
            return self.min_interarrival
        return None

    @property
    def deadline(self) -> int | None:
        if not self.is_root:
            return None
        return self.relative_deadline if self.relative_deadline is not None else self.rate


@dataclass(frozen=True)
class Edge:
    publisher: str
    topic: str
    subscriber: str


@dataclass(frozen=True)
class AppGraph:
    """Declared callbacks and topics.  Declaration order is significant:
    it fixes task indices, same-tick release order and child order."""

    callbacks: tuple[CallbackSpec, ...] = ()
    topics: tuple[str, ...] = ()

    def callback(self, cb_id: str) -> CallbackSpec:
        for cb in self.callbacks:
            if cb.id == cb_id:
                return cb
        raise KeyError(cb_id)

    def subscribers(self, topic: str) -> list[CallbackSpec]:
        return [cb for cb in self.callbacks if cb.subscribed_topic == topic]

    def publishers(self, topic: str) -> list[CallbackSpec]:
        return [cb for cb in self.callbacks if topic in cb.published_topics]

    @property
    def edges(self) -> list[Edge]:
        """(publisher, topic, subscriber) triples in declaration order."""
        out = []
        for cb in self.callbacks:
            for topic in cb.published_topics:
                for sub in self.subscribers(topic):
                    out.append(Edge(cb.id, topic, sub.id))
        return out

    def successors(self, cb_id: str) -> list[str]:
        return [e.subscriber for e in self.edges if e.publisher == cb_id]


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    callbacks: int
    edges: int


def _check_callback(cb: CallbackSpec, topics: set[str]) -> None:
    where = f"callbacks[{cb.id}]"

    def bad(msg, name):
        raise SchemaError(f"{where}.{name}: {msg}", field=f"{where}.{name}")

    if not isinstance(cb.wcet, int) or cb.wcet <= 0:
        bad("wcet must be a positive integer", "wcet")
    if cb.kind is CallbackKind.TIMER:
        if not isinstance(cb.period, int) or cb.period <= 0:
            bad("timer needs a positive integer period", "period")
        if cb.subscribed_topic is not None:
            bad("timers cannot subscribe", "subscribed_topic")
        if cb.min_interarrival is not None:
            bad("only external_sporadic callbacks take min_interarrival", "min_interarrival")
        if cb.arrivals:
            bad("only external_sporadic callbacks take arrivals", "arrivals")
    elif cb.kind is CallbackKind.SUBSCRIPTION:
        if cb.subscribed_topic is None:
            bad("subscription needs exactly one subscribed topic", "subscribed_topic")
        if cb.subscribed_topic not in topics:
            bad(f"undeclared topic {cb.subscribed_topic!r}", "subscribed_topic")
        for name in ("period", "min_interarrival", "relative_deadline"):
            if getattr(cb, name) is not None:
                bad("not allowed on a subscription", name)
        if cb.phase:
            bad("not allowed on a subscription", "phase")
        if cb.arrivals:
            bad("not allowed on a subscription", "arrivals")
    elif cb.kind is CallbackKind.EXTERNAL_SPORADIC:
        if not isinstance(cb.min_interarrival, int) or cb.min_interarrival <= 0:
            bad("external_sporadic needs a positive min_interarrival", "min_interarrival")
        if cb.subscribed_topic is not None or cb.period is not None:
            bad("external_sporadic takes neither period nor subscribed_topic", "period")
        if cb.phase:
            bad("external_sporadic activations come from arrivals, not phase", "phase")
        prev = None
        for t in cb.arrivals:
            if not isinstance(t, int) or t < 0:
                bad("arrival ticks must be non-negative integers", "arrivals")
            if prev is not None and t - prev < cb.min_interarrival:
                bad(f"arrivals {prev} and {t} closer than min_interarrival", "arrivals")
            prev = t
    else:  # pragma: no cover - enum is closed
        bad("unknown kind", "kind")

    if not isinstance(cb.phase, int) or cb.phase < 0:
        bad("phase must be a non-negative integer", "phase")
    if cb.relative_deadline is not None:
        if not isinstance(cb.relative_deadline, int) or cb.relative_deadline <= 0:
            bad("relative_deadline must be a positive integer", "relative_deadline")
        if cb.relative_deadline > cb.rate:
            bad("arbitrary deadlines (D > T) are not supported", "relative_deadline")
    if len(set(cb.published_topics)) != len(cb.published_topics):
        bad("a callback may publish to each topic at most once", "published_topics")
    for topic in cb.published_topics:
        if topic not in topics:
            bad(f"undeclared topic {topic!r}", "published_topics")


def _find_cycle(graph: AppGraph) -> list[str] | None:
    succ = {cb.id: graph.successors(cb.id) for cb in graph.callbacks}
    white, grey, black = 0, 1, 2
    color = dict.fromkeys(succ, white)
    stack: list[str] = []

    def visit(v):
        color[v] = grey
        stack.append(v)
        for w in succ[v]:
            if color[w] == grey:
                return stack[stack.index(w):]
            if color[w] == white:
                found = visit(w)
                if found:
                    return found
        stack.pop()
        color[v] = black
        return None

    for v in succ:
        if color[v] == white:
            found = visit(v)
            if found:
                return list(found)
    return None


def validate(graph: AppGraph) -> ValidationReport:
    """Check field invariants and acyclicity.

    Raises :class:`SchemaError` naming the offending field, or
    :class:`CycleError` listing the callbacks on a publish/subscribe loop.
    """
    ids = [cb.id for cb in graph.callbacks]
    seen = set()
    for cb_id in ids:
        if cb_id in seen:
            raise SchemaError(f"duplicate callback id {cb_id!r}", field="callbacks")
        seen.add(cb_id)
    if len(set(graph.topics)) != len(graph.topics):
        raise SchemaError("duplicate topic id", field="topics")
    topics = set(graph.topics)
    for cb in graph.callbacks:
        _check_callback(cb, topics)
    for cb in graph.callbacks:
        if cb.kind is CallbackKind.SUBSCRIPTION and not graph.publishers(cb.subscribed_topic):
            raise SchemaError(
                f"subscription {cb.id!r} listens on {cb.subscribed_topic!r} which nobody "
                "publishes; declare externally driven callbacks as external_sporadic",
                field=f"callbacks[{cb.id}].subscribed_topic",
            )
    cycle = _find_cycle(graph)
    if cycle:
        raise CycleError(cycle)
    return ValidationReport(ok=True, callbacks=len(graph.callbacks), edges=len(graph.edges))


@dataclass(frozen=True)
class TreeNode:
    id: int
    callback: str
    wcet: int
    parent: int | None
    children: tuple[int, ...]
    topic: str | None
    """Topic on the incoming edge (``None`` for the root)."""


@dataclass(frozen=True)
class TreeTask:
    """A recurrent tree task.  Node 0 is the root; nodes are in preorder."""

    index: int
    name: str
    nodes: tuple[TreeNode, ...]
    period: int
    relative_deadline: int
    phase: int = 0
    sporadic: bool = False
    arrivals: tuple[int, ...] = ()

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    @property
    def parent_of(self) -> dict[int, int]:
        return {n.id: n.parent for n in self.nodes if n.parent is not None}

    @property
    def total_wcet(self) -> int:
        return sum(n.wcet for n in self.nodes)

    def depth(self) -> int:
        def d(i):
            kids = self.nodes[i].children
            return 1 + (max(d(k) for k in kids) if kids else 0)
        return d(0)

    def release_times(self, horizon: int) -> Iterator[tuple[int, int]]:
        """Yield ``(job_index, release_tick)`` for releases before ``horizon``."""
        if self.sporadic:
            for k, t in enumerate(self.arrivals):
                if t >= horizon:
                    return
                yield k, t
        else:
            k, t = 0, self.phase
            while t < horizon:
                yield k, t
                k += 1
                t += self.period


@dataclass(frozen=True)
class Forest:
    trees: tuple[TreeTask, ...] = ()
    provenance: dict = field(default_factory=dict, compare=False, hash=False)
    """``(tree index, node id) -> (callback id, incoming Edge or None)``."""
    callback_order: tuple[str, ...] = ()
    """Declaration order of the callbacks; defaults to preorder appearance."""

    def callbacks(self) -> list[str]:
        if self.callback_order:
            return list(self.callback_order)
        seen: dict[str, None] = {}
        for tree in self.trees:
            for node in tree.nodes:
                seen.setdefault(node.callback, None)
        return list(seen)

    @property
    def node_count(self) -> int:
        return sum(len(t.nodes) for t in self.trees)

    def duplication_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for tree in self.trees:
            for node in tree.nodes:
                counts[node.callback] = counts.get(node.callback, 0) + 1
        return counts

    def fingerprint(self) -> str:
        """Stable short hash identifying the forest in trace headers."""
        h = hashlib.sha256()
        for t in self.trees:
            h.update(
                f"{t.index}|{t.name}|{t.period}|{t.relative_deadline}|{t.phase}|"
                f"{int(t.sporadic)}|{','.join(map(str, t.arrivals))}\n".encode()
            )
            for n in t.nodes:
                h.update(f"{n.id},{n.callback},{n.wcet},{n.parent},{n.topic}\n".encode())
        return h.hexdigest()[:16]


def unfold(graph: AppGraph) -> Forest:
    """Unfold ``graph`` into one tree per timer or external sporadic callback.

    Every subscription is duplicated once per distinct publish path reaching
    it and each duplicate keeps the callback's full WCET.  Children appear in
    declared edge order: published topics in order, then subscribers of each
    topic in declaration order.
    """
    validate(graph)
    trees = []
    provenance = {}
    for cb in graph.callbacks:
        if not cb.is_root:
            continue
        tree_index = len(trees)
        nodes: list[dict] = []

        def grow(spec: CallbackSpec, parent: int | None, edge: Edge | None) -> int:
            node_id = len(nodes)
            nodes.append({"callback": spec.id, "wcet": spec.wcet, "parent": parent,
                          "topic": edge.topic if edge else None, "children": []})
            provenance[(tree_index, node_id)] = (spec.id, edge)
            for topic in spec.published_topics:
                for sub in graph.subscribers(topic):
                    child = grow(sub, node_id, Edge(spec.id, topic, sub.id))
                    nodes[node_id]["children"].append(child)
            return node_id

        grow(cb, None, None)
        trees.append(TreeTask(
            index=tree_index,
            name=cb.id,
            nodes=tuple(TreeNode(i, n["callback"], n["wcet"], n["parent"],
                                 tuple(n["children"]), n["topic"])
                        for i, n in enumerate(nodes)),
            period=cb.rate,
            relative_deadline=cb.deadline,
            phase=cb.phase,
            sporadic=cb.kind is CallbackKind.EXTERNAL_SPORADIC,
            arrivals=tuple(cb.arrivals),
        ))
    return Forest(tuple(trees), provenance, tuple(cb.id for cb in graph.callbacks))


def path_counts(graph: AppGraph) -> dict[str, int]:
    """Number of distinct root-to-callback publish paths for each callback."""
    memo: dict[str, int] = {}

    def count(cb: CallbackSpec) -> int:
        if cb.id in memo:
            return memo[cb.id]
        if cb.is_root:
            n = 1
        else:
            n = sum(count(p) for p in graph.publishers(cb.subscribed_topic))
        memo[cb.id] = n
        return n

    return {cb.id: count(cb) for cb in graph.callbacks}
