"""Streaming reasoning-budget enforcement.

The controller sees one event at a time. Think-block tokens count against
``reasoning_budget``; once it is spent the stream gets ``grace`` more tokens to
close the block itself before a close is injected. Nothing passes beyond
``max_sequence`` total tokens.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import InvalidInputError, InvalidStateError, MalformedStreamError


class Event(enum.Enum):
    THINK_OPEN = "OPEN"
    THINK_CLOSE = "CLOSE"
    TOKEN = "TOK"
    END = "END"


class Action(enum.Enum):
    PASS = "Pass"
    INJECT_THINK_CLOSE = "InjectThinkClose"
    STOP = "Stop"
    # a model-emitted close arriving after a forced one; dropped, not counted
    SUPPRESS = "Suppress"


class Phase(enum.Enum):
    BEFORE_THINK = "BeforeThink"
    REASONING = "Reasoning"
    GRACE = "Grace"
    ANSWER = "Answer"
    CLOSED = "Closed"


@dataclass(frozen=True)
class BudgetConfig:
    reasoning_budget: int = 13000
    grace: int = 1024
    max_sequence: int = 16384

    def __post_init__(self):
        if min(self.reasoning_budget, self.grace, self.max_sequence) < 1:
            raise InvalidInputError("budget, grace and max_sequence must be positive")
        if self.reasoning_budget + self.grace > self.max_sequence:
            raise InvalidInputError("reasoning_budget + grace must not exceed max_sequence")


@dataclass(frozen=True)
class BudgetStats:
    reasoning_tokens: int
    total_tokens: int
    forced_closures: int
    stopped_at_cap: bool

    def to_dict(self) -> dict:
        return {
            "reasoning_tokens": self.reasoning_tokens,
            "total_tokens": self.total_tokens,
            "forced_closures": self.forced_closures,
            "stopped_at_cap": self.stopped_at_cap,
        }


class BudgetController:
    """Per-stream state machine; not safe to share between threads."""

    def __init__(self, config: BudgetConfig | None = None):
        self.config = config or BudgetConfig()
        self.phase = Phase.BEFORE_THINK
        self.reasoning_tokens = 0
        self.total_tokens = 0
        self.forced_closures = 0
        self.stopped_at_cap = False
        self.events_seen = 0

    def _emit(self) -> bool:
        """Charge one token against the sequence cap; False if it would overflow."""
        if self.total_tokens + 1 > self.config.max_sequence:
            self.phase = Phase.CLOSED
            self.stopped_at_cap = True
            return False
        self.total_tokens += 1
        return True

    def on_token(self, event: Event) -> Action:
        self.events_seen += 1
        if self.phase is Phase.CLOSED:
            return Action.STOP
        if event is Event.END:
            self.phase = Phase.CLOSED
            return Action.PASS

        if event is Event.THINK_OPEN:
            if self.phase is not Phase.BEFORE_THINK:
                raise MalformedStreamError("second think block opened")
            if not self._emit():
                return Action.STOP
            self.phase = Phase.REASONING
            return Action.PASS

        if event is Event.THINK_CLOSE:
            if self.phase is Phase.BEFORE_THINK:
                raise MalformedStreamError("think block closed before it was opened")
            if self.phase is Phase.ANSWER:
                if self.forced_closures:
                    return Action.SUPPRESS
                raise MalformedStreamError("think block closed twice")
            if not self._emit():
                return Action.STOP
            self.phase = Phase.ANSWER
            return Action.PASS

        # plain token
        if self.phase in (Phase.REASONING, Phase.GRACE):
            cfg = self.config
            if self.reasoning_tokens >= cfg.reasoning_budget:
                self.phase = Phase.GRACE
            if self.reasoning_tokens >= cfg.reasoning_budget + cfg.grace:
                # the injected close replaces the offered token
                if not self._emit():
                    return Action.STOP
                self.phase = Phase.ANSWER
                self.forced_closures += 1
                return Action.INJECT_THINK_CLOSE
            if not self._emit():
                return Action.STOP
            self.reasoning_tokens += 1
            return Action.PASS

        if not self._emit():
            return Action.STOP
        return Action.PASS

    @property
    def ended(self) -> bool:
        return self.phase is Phase.CLOSED or self.events_seen == 0

    def finalize(self) -> BudgetStats:
        if not self.ended:
            raise InvalidStateError("finalize() called before the stream ended")
        return BudgetStats(
            self.reasoning_tokens, self.total_tokens, self.forced_closures, self.stopped_at_cap
        )


def run_stream(events: Iterable[Event], config: BudgetConfig | None = None):
    """Drive a controller over ``events``; returns ``(actions, stats)``.

    An ``END`` is appended if the stream does not carry one.
    """
    ctl = BudgetController(config)
    actions = []
    for ev in events:
        actions.append(ctl.on_token(ev))
        if ctl.phase is Phase.CLOSED:
            break
    if ctl.phase is not Phase.CLOSED:
        actions.append(ctl.on_token(Event.END))
    return actions, ctl.finalize()


def parse_trace(text: str) -> list[Event]:
    """Parse a trace with one ``OPEN``/``CLOSE``/``TOK``/``END`` per line."""
    events = []
    lookup = {e.value: e for e in Event}
    for lineno, raw in enumerate(text.splitlines(), 1):
        word = raw.split("#", 1)[0].strip()
        if not word:
            continue
        try:
            events.append(lookup[word])
        except KeyError:
            raise InvalidInputError(f"line {lineno}: unknown event {word!r}") from None
    return events


def read_trace(path: str | Path) -> list[Event]:
    return parse_trace(Path(path).read_text())
