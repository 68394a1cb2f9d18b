import heapq
from typing import Any, Iterator, List, Tuple


class TrialQueue:
    """
    Holds trial results that arrive out of order and releases them strictly
    by trial index.
    """

    def __init__(self, start: int = 0):
        self.queue: List[Tuple[int, Any]] = []
        self.next_index = start

    def push(self, index: int, item: Any):
        if index < self.next_index:
            raise ValueError(f"trial {index} was already released")
        heapq.heappush(self.queue, (index, item))

    def drain(self) -> Iterator[Any]:
        """Yield the contiguous run of results starting at the next expected index."""
        while self.queue and self.queue[0][0] == self.next_index:
            _, item = heapq.heappop(self.queue)
            self.next_index += 1
            yield item

    def __len__(self) -> int:
        return len(self.queue)
