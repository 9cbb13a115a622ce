from .dds import DdsOrder, DdsQueue, Message
from .default import simulate_default_executor
from .fifo_events import simulate_fifo_events
from .two_queue import (
    INVARIANTS,
    ChildEntry,
    ExecutorState,
    pick_next,
    release_event,
    simulate_two_queue,
)

__all__ = [
    "INVARIANTS",
    "ChildEntry",
    "DdsOrder",
    "DdsQueue",
    "ExecutorState",
    "Message",
    "pick_next",
    "release_event",
    "simulate_default_executor",
    "simulate_fifo_events",
    "simulate_two_queue",
]
