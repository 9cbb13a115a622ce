import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import fixture_forest
from treesched.errors import MissingAssignment
from treesched.scheduling_core import (
    InstanceState,
    Job,
    PriorityKey,
    SubtaskInstance,
    higher,
    make_job,
    make_policy,
    priority_of,
)


def job(task=0, index=0, release=0, deadline=10, period=10, name="t"):
    return Job(task, index, release, release + deadline, period, name)


def test_rm_orders_synthetic_roots_by_period():
    forest = fixture_forest("synthetic_50")
    rm = make_policy("rm")
    keys = [rm.priority_of(make_job(t, 0, 0)) for t in forest.trees]
    assert [k.primary for k in keys] == [25, 41, 51]
    assert higher(keys[0], keys[1]) and higher(keys[1], keys[2])


def test_edf_equal_deadlines_tie_break_on_task_index():
    edf = make_policy("edf")
    a = edf.priority_of(job(task=0, deadline=30))
    b = edf.priority_of(job(task=1, deadline=30))
    assert a.primary == b.primary == 30
    assert higher(a, b) and not higher(b, a)


def test_edf_on_three_timers_at_time_zero(three_timers_forest):
    edf = make_policy("edf")
    k1, k2, k3 = (edf.priority_of(make_job(t, 0, 0)) for t in three_timers_forest.trees)
    assert (k1.primary, k2.primary, k3.primary) == (10, 30, 30)
    assert higher(k1, k2) and higher(k1, k3)


def test_priority_of_examples():
    assert priority_of(make_policy("rm"), job(period=25)).primary == 25
    assert priority_of(make_policy("edf"), job(release=50, deadline=25)).primary == 75
    fixed = make_policy("fixed", {"A": 1, "B": 2})
    assert priority_of(fixed, job(name="B")).primary == 2


def test_fixed_needs_assignments(three_timers_forest):
    with pytest.raises(MissingAssignment):
        make_policy("fixed")
    with pytest.raises(MissingAssignment):
        make_policy("fixed", {"tau1": 1}).check_complete(three_timers_forest)
    with pytest.raises(MissingAssignment):
        make_policy("fixed", {"tau1": 1}).priority_of(job(name="tau2"))


def test_later_jobs_of_same_task_rank_lower_under_rm():
    rm = make_policy("rm")
    assert higher(rm.priority_of(job(index=0)), rm.priority_of(job(index=1)))


keys = st.builds(PriorityKey, st.integers(-5, 5), st.integers(0, 3), st.integers(0, 3))


@given(keys, keys, keys)
def test_priority_order_is_total_and_transitive(a, b, c):
    assert higher(a, b) + higher(b, a) + (a == b) == 1
    if higher(a, b) and higher(b, c):
        assert higher(a, c)


@given(st.sampled_from(["rm", "edf"]), st.integers(0, 5), st.integers(0, 1000), st.integers(1, 100))
def test_priority_is_a_pure_function_of_the_job(kind, task, release, deadline):
    policy = make_policy(kind)
    j = job(task=task, release=release, deadline=deadline, period=deadline)
    assert policy.priority_of(j) == policy.priority_of(j)


def test_instance_states_only_move_forward():
    inst = SubtaskInstance(job(), 0, 0, 1)
    inst.advance(InstanceState.ENQUEUED)
    inst.advance(InstanceState.RUNNING)
    with pytest.raises(ValueError):
        inst.advance(InstanceState.ENQUEUED)
    inst.advance(InstanceState.DONE)
    assert inst.label == "0:0:0"
