"""Seeded random callback graphs for property testing.

Callbacks are laid out in levels: timers (or external sporadic sources) at
level 0, subscriptions below.  Every edge goes from level L to level L+1, so
graphs are acyclic by construction.  Each callback gets its own output topic
with freshly created subscribers; it may additionally publish to a sibling's
already-populated topic, which is what creates multi-publisher topics and
therefore duplication on unfolding.  Depth and fan-out bounds hold on the
unfolded forest.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .graph_model import AppGraph, CallbackKind, CallbackSpec, unfold
from .taskset import RunConfig, TasksetDocument

DEFAULT_PERIODS = (100, 200, 250, 400, 500, 1000)


@dataclass(frozen=True)
class GenParams:
    max_trees: int = 6
    max_depth: int = 4
    max_fanout: int = 3
    max_utilization: float = 0.95
    min_utilization: float = 0.3
    periods: tuple[int, ...] = DEFAULT_PERIODS
    share_prob: float = 0.35
    sporadic_prob: float = 0.0
    actual_times: bool = False
    hyperperiods: int = 2
    horizon_cap: int = 10**6


def _structure(rng: random.Random, p: GenParams):
    n_roots = rng.randint(1, p.max_trees)
    levels: list[list[dict]] = [[{"id": f"r{i}", "root": True, "pubs": [], "sub": None}
                                 for i in range(n_roots)]]
    topic_subs: dict[str, list[dict]] = {}
    topics: list[str] = []
    for depth in range(p.max_depth - 1):
        nxt: list[dict] = []
        level_topics: list[str] = []
        for cb in levels[depth]:
            k = rng.choices(range(p.max_fanout + 1), weights=[4, 4, 2, 1][: p.max_fanout + 1] +
                            [1] * max(0, p.max_fanout - 3))[0]
            fan = 0
            if k:
                topic = f"t_{cb['id']}"
                subs = []
                for j in range(k):
                    sub = {"id": f"{cb['id']}_{j}", "root": False, "pubs": [], "sub": topic}
                    subs.append(sub)
                nxt.extend(subs)
                topics.append(topic)
                topic_subs[topic] = subs
                cb["pubs"].append(topic)
                level_topics.append(topic)
                fan = k
            for topic in list(level_topics):
                if topic in cb["pubs"] or rng.random() >= p.share_prob:
                    continue
                if fan + len(topic_subs[topic]) <= p.max_fanout:
                    cb["pubs"].append(topic)
                    fan += len(topic_subs[topic])
        if not nxt:
            break
        levels.append(nxt)
    return [cb for level in levels for cb in level], topics


def generate(seed: int, params: GenParams | None = None) -> TasksetDocument:
    """Deterministic random taskset for ``seed``; horizon is ``hyperperiods``
    hyperperiods capped at ``horizon_cap`` (a fixed span when sporadic)."""
    p = params or GenParams()
    rng = random.Random(seed)
    while True:
        cbs, topics = _structure(rng, p)
        roots = [cb for cb in cbs if cb["root"]]
        for cb in roots:
            cb["period"] = rng.choice(p.periods)
            cb["sporadic"] = rng.random() < p.sporadic_prob
            cb["phase"] = 0 if cb["sporadic"] or rng.random() < 0.5 else rng.randrange(cb["period"])
        weights = {cb["id"]: rng.uniform(0.2, 1.0) for cb in cbs}

        def spec(cb, wcet):
            if not cb["root"]:
                return CallbackSpec(cb["id"], CallbackKind.SUBSCRIPTION, wcet,
                                    subscribed_topic=cb["sub"], published_topics=tuple(cb["pubs"]))
            if cb["sporadic"]:
                return CallbackSpec(cb["id"], CallbackKind.EXTERNAL_SPORADIC, wcet,
                                    min_interarrival=cb["period"], published_topics=tuple(cb["pubs"]))
            return CallbackSpec(cb["id"], CallbackKind.TIMER, wcet, period=cb["period"],
                                phase=cb["phase"], published_topics=tuple(cb["pubs"]))

        probe = unfold(AppGraph(tuple(spec(cb, 1) for cb in cbs), tuple(topics)))
        floor_util = sum(t.total_wcet / t.period for t in probe.trees)
        if floor_util > p.max_utilization:
            continue
        target = rng.uniform(max(p.min_utilization, floor_util), p.max_utilization)
        weighted = sum(sum(weights[n.callback] for n in t.nodes) / t.period for t in probe.trees)
        scale = target / weighted
        wcet = {k: max(1, int(w * scale)) for k, w in weights.items()}
        graph = AppGraph(tuple(spec(cb, wcet[cb["id"]]) for cb in cbs), tuple(topics))
        forest = unfold(graph)
        if sum(t.total_wcet / t.period for t in forest.trees) <= p.max_utilization:
            break

    if any(t.sporadic for t in forest.trees):
        horizon = min(p.hyperperiods * max(p.periods) * 2, p.horizon_cap)
    else:
        horizon = min(p.hyperperiods * math.lcm(*(t.period for t in forest.trees)), p.horizon_cap)

    callbacks = list(graph.callbacks)
    for i, cb in enumerate(callbacks):
        if cb.kind is CallbackKind.EXTERNAL_SPORADIC:
            arrivals, t = [], rng.randrange(cb.min_interarrival)
            while t < horizon:
                arrivals.append(t)
                t += cb.min_interarrival + rng.choice((0, 0, rng.randrange(cb.min_interarrival)))
            callbacks[i] = CallbackSpec(cb.id, cb.kind, cb.wcet, min_interarrival=cb.min_interarrival,
                                        published_topics=cb.published_topics, arrivals=tuple(arrivals))
    graph = AppGraph(tuple(callbacks), graph.topics)

    exec_times = {}
    if p.actual_times:
        n_jobs = horizon // min(p.periods) + 1
        for cb in graph.callbacks:
            if rng.random() < 0.5:
                exec_times[cb.id] = [rng.randint(1, cb.wcet) for _ in range(n_jobs)]
    return TasksetDocument(graph, RunConfig(tick_unit="100us", horizon=horizon, exec_times=exec_times))
