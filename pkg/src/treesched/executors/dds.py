"""Per-(topic, subscriber) message buffers of the middleware layer."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..trace import DdsEvent


class DdsOrder(str, enum.Enum):
    FIFO = "fifo"
    LIFO = "lifo"


@dataclass(frozen=True)
class Message:
    id: int
    task: int
    job: int
    publisher_node: int
    tick: int

    @property
    def job_label(self) -> str:
        return f"{self.task}:{self.job}"


class DdsQueue:
    """Unbounded message store for every (topic, subscriber) pair.

    A message leaves only when a subscription instance is dispatched; the
    queue's ordering decides *which* message that instance gets.
    """

    def __init__(self, order: DdsOrder | str = DdsOrder.LIFO):
        self.order = DdsOrder(order)
        self._queues: dict[tuple[str, str], list[Message]] = {}
        self._next_id = 0
        self.events: list[DdsEvent] = []
        self.max_depth: dict[tuple[str, str], int] = {}

    def publish(self, topic: str, subscriber: str, task: int, job: int,
                publisher_node: int, tick: int) -> Message:
        msg = Message(self._next_id, task, job, publisher_node, tick)
        self._next_id += 1
        q = self._queues.setdefault((topic, subscriber), [])
        q.append(msg)
        self.max_depth[(topic, subscriber)] = max(self.max_depth.get((topic, subscriber), 0), len(q))
        self.events.append(DdsEvent("enqueue", topic, subscriber, msg.id, msg.job_label, tick))
        return msg

    def take(self, topic: str, subscriber: str, tick: int) -> Message:
        q = self._queues[(topic, subscriber)]
        msg = q.pop(0) if self.order is DdsOrder.FIFO else q.pop()
        self.events.append(DdsEvent("dequeue", topic, subscriber, msg.id, msg.job_label, tick))
        return msg

    def depth(self, topic: str, subscriber: str) -> int:
        return len(self._queues.get((topic, subscriber), ()))
