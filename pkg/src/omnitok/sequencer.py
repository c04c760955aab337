"""Temporal interleaving of per-media token budgets into one input sequence."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from ._exact import exact
from .errors import InvalidInputError
from .video import TokenOverheadModel

KINDS = ("image", "video", "audio", "text")
TIMED_KINDS = ("video", "audio")
UNTIMED_WINDOW = -1
DEFAULT_WINDOW_SECONDS = 30

STAGE_LIMITS = {"16k": 16384, "48k": 49152, "256k": 262144}


@dataclass(frozen=True)
class MediaItem:
    kind: str
    id: str
    token_budget: int
    start: float = 0.0
    duration: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown media kind {self.kind!r}")
        if self.token_budget < 0:
            raise InvalidInputError(f"{self.id}: token_budget must be >= 0")
        if self.duration < 0 or self.start < 0:
            raise InvalidInputError(f"{self.id}: start and duration must be >= 0")

    @property
    def timed(self) -> bool:
        return self.kind in TIMED_KINDS


@dataclass(frozen=True)
class Span:
    media_id: str
    kind: str
    window_index: int
    tokens: int


@dataclass
class TimelineWindow:
    index: int
    start: float
    end: float
    spans: list[Span] = field(default_factory=list)


@dataclass(frozen=True)
class SequenceLayout:
    spans: tuple[Span, ...]
    overhead_tokens: int
    total_tokens: int
    context_limit: int
    fits: bool

    def to_dict(self) -> dict:
        return {
            "spans": [
                {"id": s.media_id, "kind": s.kind, "window": s.window_index, "tokens": s.tokens}
                for s in self.spans
            ],
            "overhead_tokens": self.overhead_tokens,
            "total_tokens": self.total_tokens,
            "context_limit": self.context_limit,
            "fits": self.fits,
        }


@dataclass(frozen=True)
class FitReport:
    stage: str
    fits: bool
    total: int
    limit: int
    excess: int

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "fits": self.fits,
            "total": self.total,
            "limit": self.limit,
            "excess": self.excess,
        }


def largest_remainder(total: int, weights: list[Fraction]) -> list[int]:
    """Split ``total`` proportionally to ``weights`` into integers summing to ``total``.

    Leftover units go to the largest fractional parts, earlier entries first
    on ties.
    """
    wsum = sum(weights)
    if total == 0 or wsum == 0:
        return [0] * len(weights)
    quotas = [Fraction(total) * w / wsum for w in weights]
    parts = [math.floor(x) for x in quotas]
    short = total - sum(parts)
    order = sorted(range(len(quotas)), key=lambda i: (-(quotas[i] - parts[i]), i))
    for i in order[:short]:
        parts[i] += 1
    return parts


def build_timeline(
    items: list[MediaItem],
    window: float = DEFAULT_WINDOW_SECONDS,
    kind_order: tuple[str, ...] = TIMED_KINDS,
) -> list[TimelineWindow]:
    """Bucket media into fixed-length time windows.

    Timed items spread their tokens over the windows they overlap; images and
    text sit in a leading window with index ``UNTIMED_WINDOW``.
    """
    if window <= 0:
        raise InvalidInputError(f"window must be > 0, got {window}")
    w = exact(window)
    out: list[TimelineWindow] = []

    untimed = [it for it in items if not it.timed]
    if untimed:
        out.append(
            TimelineWindow(
                UNTIMED_WINDOW,
                0.0,
                0.0,
                [Span(it.id, it.kind, UNTIMED_WINDOW, it.token_budget) for it in untimed],
            )
        )

    timed = [it for it in items if it.timed]
    if not timed:
        return out

    bounds = [(exact(it.start), exact(it.start) + exact(it.duration)) for it in timed]
    first = min(math.floor(s / w) for s, _ in bounds)
    last = max(max(math.ceil(e / w) - 1, math.floor(s / w)) for s, e in bounds)
    range_end = max(e for _, e in bounds)

    windows = {}
    for k in range(first, last + 1):
        lo = k * w
        hi = max(min((k + 1) * w, range_end), lo)
        windows[k] = TimelineWindow(k, float(lo), float(hi))

    for it, (s, e) in zip(timed, bounds):
        if e == s:
            k = math.floor(s / w)
            windows[k].spans.append(Span(it.id, it.kind, k, it.token_budget))
            continue
        ks = list(range(math.floor(s / w), math.ceil(e / w)))
        overlaps = [min(e, (k + 1) * w) - max(s, k * w) for k in ks]
        for k, tokens in zip(ks, largest_remainder(it.token_budget, overlaps)):
            windows[k].spans.append(Span(it.id, it.kind, k, tokens))

    rank = {kind: i for i, kind in enumerate(kind_order)}
    for win in windows.values():
        win.spans.sort(key=lambda sp: (rank[sp.kind], sp.media_id))
    out.extend(windows[k] for k in sorted(windows))
    return out


def interleave(
    windows: list[TimelineWindow],
    overhead: TokenOverheadModel | None = None,
    context_limit: int = STAGE_LIMITS["256k"],
) -> SequenceLayout:
    overhead = overhead or TokenOverheadModel()
    spans = tuple(sp for win in windows for sp in win.spans)
    total = sum(sp.tokens for sp in spans) + overhead.per_sequence_fixed
    return SequenceLayout(
        spans=spans,
        overhead_tokens=overhead.per_sequence_fixed,
        total_tokens=total,
        context_limit=context_limit,
        fits=total <= context_limit,
    )


def check_context(layout: SequenceLayout, stage: str) -> FitReport:
    try:
        limit = STAGE_LIMITS[stage]
    except KeyError:
        raise InvalidInputError(
            f"unknown stage {stage!r}; expected one of {sorted(STAGE_LIMITS)}"
        ) from None
    total = layout.total_tokens
    return FitReport(stage, total <= limit, total, limit, max(0, total - limit))
