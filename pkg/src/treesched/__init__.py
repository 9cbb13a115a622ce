"""Deterministic uniprocessor simulation of pub/sub callback graphs under the
stock executors and a two-queue LP-FJP events executor."""

from .analysis import (
    check_harmonic_condition,
    hyperperiod,
    max_dds_depth,
    observed_bounds,
    response_times,
    utilization,
)
from .executors import (
    DdsOrder,
    simulate_default_executor,
    simulate_fifo_events,
    simulate_two_queue,
)
from .graph_model import AppGraph, CallbackKind, CallbackSpec, Forest, TreeTask, unfold, validate
from .reference import simulate_reference, traces_equivalent
from .scheduling_core import PolicyKind, PriorityKey, make_policy, priority_of
from .taskset import load_taskset, parse_taskset, serialize_taskset

__version__ = "0.1.0"

__all__ = [
    "AppGraph", "CallbackKind", "CallbackSpec", "DdsOrder", "Forest", "PolicyKind",
    "PriorityKey", "TreeTask", "check_harmonic_condition", "hyperperiod", "load_taskset",
    "make_policy", "max_dds_depth", "observed_bounds", "parse_taskset", "priority_of",
    "response_times", "serialize_taskset", "simulate_default_executor", "simulate_fifo_events",
    "simulate_reference", "simulate_two_queue", "traces_equivalent", "unfold", "utilization",
    "validate",
]
