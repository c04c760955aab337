"""Online balanced greedy packing of sequences into fixed-capacity bins."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable

from .errors import InvalidInputError, OversizeSequenceError

DEFAULT_BUFFER = 512


@dataclass
class Bin:
    ids: list[int] = field(default_factory=list)
    lengths: list[int] = field(default_factory=list)
    fill: int = 0


@dataclass(frozen=True)
class PackedBins:
    capacity: int
    bins: tuple[Bin, ...]

    @property
    def utilization(self) -> float:
        if not self.bins:
            return 1.0
        return sum(b.fill for b in self.bins) / (len(self.bins) * self.capacity)


@dataclass(frozen=True)
class UtilizationStats:
    bins: int
    min_fill: float
    mean_fill: float
    max_fill: float
    waste_tokens: int

    def to_dict(self) -> dict:
        return {
            "bins": self.bins,
            "min_fill": self.min_fill,
            "mean_fill": self.mean_fill,
            "max_fill": self.max_fill,
            "waste_tokens": self.waste_tokens,
        }


def pack(lengths: Iterable[int], capacity: int, buffer_size: int = DEFAULT_BUFFER) -> PackedBins:
    """Pack ``lengths`` buffer by buffer.

    Each buffer is sorted longest-first; every item goes to the open bin with
    the most free space, which fits whenever any bin does. Bins stay open
    across buffers.
    """
    if capacity < 1 or buffer_size < 1:
        raise InvalidInputError("capacity and buffer_size must be >= 1")
    lengths = list(lengths)
    for i, n in enumerate(lengths):
        if n < 0:
            raise InvalidInputError(f"sequence {i} has negative length {n}")
        if n > capacity:
            raise OversizeSequenceError(i, n, capacity)

    bins: list[Bin] = []
    free: list[tuple[int, int]] = []  # (-remaining, bin index)
    for lo in range(0, len(lengths), buffer_size):
        batch = sorted(range(lo, min(lo + buffer_size, len(lengths))), key=lambda i: -lengths[i])
        for i in batch:
            n = lengths[i]
            if free and -free[0][0] >= n:
                neg_room, b = heapq.heappop(free)
                room = -neg_room
            else:
                b, room = len(bins), capacity
                bins.append(Bin())
            bins[b].ids.append(i)
            bins[b].lengths.append(n)
            bins[b].fill += n
            heapq.heappush(free, (-(room - n), b))
    return PackedBins(capacity, tuple(bins))


def utilization_stats(packed: PackedBins) -> UtilizationStats:
    if not packed.bins:
        return UtilizationStats(0, 1.0, 1.0, 1.0, 0)
    fracs = [b.fill / packed.capacity for b in packed.bins]
    return UtilizationStats(
        bins=len(packed.bins),
        min_fill=min(fracs),
        mean_fill=sum(fracs) / len(fracs),
        max_fill=max(fracs),
        waste_tokens=sum(packed.capacity - b.fill for b in packed.bins),
    )
