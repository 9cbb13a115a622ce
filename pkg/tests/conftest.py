from pathlib import Path

import pytest

from treesched.graph_model import AppGraph, CallbackKind, CallbackSpec, unfold
from treesched.taskset import load_taskset

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "treesched" / "fixtures"


def timer(cb_id, period, wcet, phase=0, pubs=(), deadline=None):
    return CallbackSpec(cb_id, CallbackKind.TIMER, wcet, period=period, phase=phase,
                        published_topics=tuple(pubs), relative_deadline=deadline)


def sub(cb_id, topic, wcet, pubs=()):
    return CallbackSpec(cb_id, CallbackKind.SUBSCRIPTION, wcet, subscribed_topic=topic,
                        published_topics=tuple(pubs))


def fixture_doc(name):
    return load_taskset(FIXTURES / f"{name}.taskset")


def fixture_forest(name):
    return unfold(fixture_doc(name).graph)


@pytest.fixture
def three_timers_forest():
    return fixture_forest("three_timers")


@pytest.fixture
def three_timers_graph():
    return AppGraph((timer("tau1", 10, 3), timer("tau2", 30, 10), timer("tau3", 30, 10)))
