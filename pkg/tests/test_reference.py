import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fixture_doc, fixture_forest, sub, timer
from treesched.errors import IncomparableTraces
from treesched.executors import DdsOrder, simulate_two_queue
from treesched.generate import GenParams, generate
from treesched.graph_model import AppGraph, unfold
from treesched.reference import simulate_reference, traces_equivalent
from treesched.scheduling_core import make_policy

RM = make_policy("rm")


def test_reference_on_three_timers(three_timers_forest):
    trace = simulate_reference(three_timers_forest, RM, 30)
    assert [(s.task_name, s.start, s.end) for s in trace.segments] == [
        ("tau1", 0, 3), ("tau2", 3, 13), ("tau1", 13, 16), ("tau3", 16, 26), ("tau1", 26, 29)]


def test_uncontended_chain_runs_back_to_back():
    graph = AppGraph((timer("T", 100, 3, pubs=["a"]), sub("A", "a", 2, pubs=["b"]), sub("B", "b", 2)),
                     ("a", "b"))
    trace = simulate_reference(unfold(graph), RM, 100)
    assert [(s.start, s.end) for s in trace.segments] == [(0, 3), (3, 5), (5, 7)]


def test_two_queue_matches_reference_on_synthetic_half_load():
    forest = fixture_forest("synthetic_50")
    for kind in ("rm", "edf"):
        policy = make_policy(kind)
        a = simulate_two_queue(forest, policy, horizon=2000)
        b = simulate_reference(forest, policy, 2000)
        assert traces_equivalent(a, b)


def test_trace_is_equivalent_to_itself(three_timers_forest):
    trace = simulate_reference(three_timers_forest, RM, 30)
    result = traces_equivalent(trace, trace)
    assert result and result.divergence is None


def test_traces_of_different_runs_are_incomparable(three_timers_forest):
    a = simulate_reference(three_timers_forest, RM, 30)
    b = simulate_reference(three_timers_forest, RM, 60)
    with pytest.raises(IncomparableTraces):
        traces_equivalent(a, b)


def test_fifo_middleware_breaks_equivalence():
    doc = fixture_doc("harmonic_fail")
    forest = unfold(doc.graph)
    fifo = simulate_two_queue(forest, RM, DdsOrder.FIFO, horizon=doc.config.horizon)
    ref = simulate_reference(forest, RM, doc.config.horizon)
    result = traces_equivalent(fifo, ref)
    assert not result
    assert result.divergence.index == 2
    text = result.divergence.describe()
    assert "dispatch #2" in text and "roots=" in text and "children=" in text
    assert fifo.mismatches


def random_fixed(forest, seed):
    rng = random.Random(seed)
    return make_policy("fixed", {t.name: rng.randint(1, 4) for t in forest.trees})


def equivalent_runs(doc, policy, strict=False):
    forest = unfold(doc.graph)
    h = doc.config.horizon
    ex = doc.config.exec_times or None
    a = simulate_two_queue(forest, policy, DdsOrder.LIFO, horizon=h, exec_times=ex, strict=strict)
    b = simulate_reference(forest, policy, h, exec_times=ex)
    return a, b


seeds = st.integers(min_value=0, max_value=10**9)


@settings(max_examples=80, deadline=None)
@given(seeds, st.sampled_from(["rm", "edf", "fixed"]))
def test_two_queue_lifo_matches_reference(seed, kind):
    doc = generate(seed)
    forest = unfold(doc.graph)
    policy = random_fixed(forest, seed) if kind == "fixed" else make_policy(kind)
    a, b = equivalent_runs(doc, policy)
    result = traces_equivalent(a, b)
    assert result, result.divergence.describe()
    assert a.violations() == 0
    assert a.mismatches == ()


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from(["rm", "edf"]))
def test_equivalence_survives_sporadic_roots_and_early_completion(seed, kind):
    doc = generate(seed, GenParams(sporadic_prob=0.3, actual_times=True))
    a, b = equivalent_runs(doc, make_policy(kind), strict=True)
    result = traces_equivalent(a, b)
    assert result, result.divergence.describe()
