"""Indexed binary max-heap of anomaly events ordered by severity."""
from __future__ import annotations

from typing import Any, Iterator

from ..errors import EmptyQueueError, InvalidArgument, NotFound


def priority_key(event: Any) -> tuple:
    """Sort key under which smaller means served first.

    Higher severity wins; ties go to the earlier arrival, then the lower id.
    """
    return (-event.severity, event.arrival_time, event.id)


class AnomalyHeap:
    """Array-backed binary heap with O(log n) removal by event id.

    Items are any objects exposing ``id``, ``severity`` and ``arrival_time``.
    Not thread-safe; a producer and a consumer sharing one instance must hold
    an external lock.
    """

    __slots__ = ("_keys", "_items", "_pos")

    def __init__(self, events=()):
        self._keys: list[tuple] = []
        self._items: list[Any] = []
        self._pos: dict[Any, int] = {}
        for e in events:
            self.insert(e)

    def __len__(self) -> int:
        return len(self._items)

    def __bool__(self) -> bool:
        return bool(self._items)

    def __contains__(self, event_id) -> bool:
        return event_id in self._pos

    def __iter__(self) -> Iterator[Any]:
        # heap order, not priority order
        return iter(list(self._items))

    def insert(self, event) -> None:
        if event.id in self._pos:
            raise InvalidArgument(f"duplicate event id {event.id!r}")
        self._keys.append(priority_key(event))
        self._items.append(event)
        i = len(self._items) - 1
        self._pos[event.id] = i
        self._sift_up(i)

    def peek(self):
        if not self._items:
            raise EmptyQueueError("peek on empty queue")
        return self._items[0]

    def extract_max(self):
        if not self._items:
            raise EmptyQueueError("extract from empty queue")
        return self._remove_at(0)

    def remove(self, event_id):
        try:
            i = self._pos[event_id]
        except KeyError:
            raise NotFound(f"event {event_id!r} not in queue") from None
        return self._remove_at(i)

    def least_severe(self):
        """The event that would be served last. Only leaves need checking."""
        if not self._items:
            raise EmptyQueueError("least_severe on empty queue")
        n = len(self._items)
        j = max(range(n // 2, n), key=self._keys.__getitem__)
        return self._items[j]

    def is_valid(self) -> bool:
        """Check the heap property and the position index."""
        keys = self._keys
        for i in range(1, len(keys)):
            if keys[(i - 1) >> 1] > keys[i]:
                return False
        return all(self._pos[e.id] == i for i, e in enumerate(self._items)) and len(self._pos) == len(
            self._items
        )

    def _remove_at(self, i: int):
        items, keys = self._items, self._keys
        out = items[i]
        del self._pos[out.id]
        last_item = items.pop()
        last_key = keys.pop()
        if i < len(items):
            items[i] = last_item
            keys[i] = last_key
            self._pos[last_item.id] = i
            # reheapify: the moved element may need to go either way
            if i > 0 and keys[(i - 1) >> 1] > last_key:
                self._sift_up(i)
            else:
                self._sift_down(i)
        return out

    def _sift_up(self, i: int) -> None:
        keys, items, pos = self._keys, self._items, self._pos
        key, item = keys[i], items[i]
        while i > 0:
            parent = (i - 1) >> 1
            if keys[parent] <= key:
                break
            keys[i] = keys[parent]
            items[i] = items[parent]
            pos[items[i].id] = i
            i = parent
        keys[i] = key
        items[i] = item
        pos[item.id] = i

    def _sift_down(self, i: int) -> None:
        keys, items, pos = self._keys, self._items, self._pos
        n = len(keys)
        key, item = keys[i], items[i]
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            right = child + 1
            if right < n and keys[right] < keys[child]:
                child = right
            if key <= keys[child]:
                break
            keys[i] = keys[child]
            items[i] = items[child]
            pos[items[i].id] = i
            i = child
        keys[i] = key
        items[i] = item
        pos[item.id] = i
