"""Prefix-decidable events over plays.

Each event doubles as a tiny deterministic automaton so that both the play
evaluator and the finite-horizon backward induction share one semantics:
``init(s0)`` starts the automaton on the initial state, ``step(ev, t, s)``
consumes the state at position t >= 1, ``absorbing(ev)`` reports an early
0/1 decision if any, and ``terminal(ev)`` scores the automaton state at the
horizon.

Buchi and transience proper are tail events; estimation must go through
their windowed proxies (WindowedBuchi, or avoiding the leak sink).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BadParams, EventNotPrefixDecidable
from .games import (
    AVOID_BOT,
    BUCHI,
    REACH,
    REACH_CONSTRAINED,
    SAFETY,
    TRANSIENCE,
    TRANSIENT_BUCHI,
    Objective,
)


class Event:
    horizon_locked = None  # set when the event pins its own horizon

    def holds(self, play):
        states = play.states()
        ev = self.init(states[0])
        for t in range(1, len(states)):
            dec = self.absorbing(ev)
            if dec is not None:
                return bool(dec)
            ev = self.step(ev, t, states[t])
        dec = self.absorbing(ev)
        if dec is not None:
            return bool(dec)
        return bool(self.terminal(ev))


@dataclass(frozen=True)
class ReachEvent(Event):
    target: frozenset

    def init(self, s0):
        return 1 if s0 in self.target else 0

    def step(self, ev, t, s):
        return 1 if (ev or s in self.target) else 0

    def absorbing(self, ev):
        return 1 if ev else None

    def terminal(self, ev):
        return ev

    def describe(self):
        return f"reach({sorted(map(str, self.target))})"


@dataclass(frozen=True)
class SafetyEvent(Event):
    target: frozenset

    def init(self, s0):
        return 0 if s0 in self.target else 1

    def step(self, ev, t, s):
        return 0 if (not ev or s in self.target) else 1

    def absorbing(self, ev):
        return 0 if not ev else None

    def terminal(self, ev):
        return ev

    def describe(self):
        return f"safety({sorted(map(str, self.target))})"


@dataclass(frozen=True)
class ReachConstrainedEvent(Event):
    """Reach the target while every earlier state stays in the constraint."""

    constraint: frozenset
    target: frozenset

    def init(self, s0):
        if s0 in self.target:
            return 1
        return 0 if s0 in self.constraint else -1

    def step(self, ev, t, s):
        if ev != 0:
            return ev
        if s in self.target:
            return 1
        return 0 if s in self.constraint else -1

    def absorbing(self, ev):
        if ev == 1:
            return 1
        if ev == -1:
            return 0
        return None

    def terminal(self, ev):
        return 1 if ev == 1 else 0

    def describe(self):
        return (f"reach_constrained(L={sorted(map(str, self.constraint))}, "
                f"T={sorted(map(str, self.target))})")


@dataclass(frozen=True)
class WindowedBuchi(Event):
    """Finite-horizon proxy for Buchi: at least min_visits visits to the
    target, one of them landing in the final `window` positions.

    A proxy only: it neither bounds true Buchi from above nor below.  Exact
    Buchi numbers come from the chain analysis.
    """

    target: frozenset
    window: int
    min_visits: int = 1

    def __post_init__(self):
        if self.window < 1 or self.min_visits < 1:
            raise BadParams("window and min_visits must be positive")

    def init(self, s0):
        # (visit count capped, visit-in-final-window flag); window checks
        # need the horizon, carried through step's position argument by the
        # caller via attach_horizon.
        raise BadParams("WindowedBuchi needs a horizon; use with_horizon(H)")

    def with_horizon(self, horizon):
        return _WindowedBuchiH(self.target, self.window, self.min_visits, horizon)

    def describe(self):
        return (f"windowed_buchi({sorted(map(str, self.target))}, "
                f"window={self.window}, min_visits={self.min_visits})")


@dataclass(frozen=True)
class _WindowedBuchiH(Event):
    target: frozenset
    window: int
    min_visits: int
    horizon: int

    def init(self, s0):
        hit = s0 in self.target
        infinal = hit and 0 > self.horizon - self.window
        return (1 if hit else 0, 1 if infinal else 0)

    def step(self, ev, t, s):
        count, flag = ev
        if s in self.target:
            count = min(count + 1, self.min_visits)
            if t > self.horizon - self.window:
                flag = 1
        return (count, flag)

    def absorbing(self, ev):
        return None

    def terminal(self, ev):
        count, flag = ev
        return 1 if (count >= self.min_visits and flag) else 0

    def describe(self):
        return (f"windowed_buchi({sorted(map(str, self.target))}, "
                f"window={self.window}, min_visits={self.min_visits})")


@dataclass(frozen=True)
class EveryWindowReach(Event):
    """Visit the target inside every window of positions [c_(i-1), c_i).

    boundaries are the cumulative window ends c_1 < c_2 < ... and also pin
    the horizon to c_last.
    """

    target: frozenset
    boundaries: tuple

    def __post_init__(self):
        bs = tuple(self.boundaries)
        if not bs or any(x >= y for x, y in zip(bs, bs[1:])) or bs[0] < 1:
            raise BadParams("boundaries must be strictly increasing and positive")
        object.__setattr__(self, "boundaries", bs)
        object.__setattr__(self, "horizon_locked", bs[-1])

    def init(self, s0):
        # (completed windows, visited-in-current-window, failed); a visit at
        # position t counts toward the window containing t.
        return (0, 1 if s0 in self.target else 0, 0)

    def step(self, ev, t, s):
        idx, visited, failed = ev
        if failed:
            return ev
        if idx < len(self.boundaries) and t == self.boundaries[idx]:
            if not visited:
                return (idx, 0, 1)
            idx, visited = idx + 1, 0
        if idx >= len(self.boundaries):
            return (idx, visited, failed)
        if s in self.target:
            visited = 1
        return (idx, visited, failed)

    def absorbing(self, ev):
        return 0 if ev[2] else None

    def terminal(self, ev):
        idx, visited, failed = ev
        return 1 if (not failed and idx == len(self.boundaries)) else 0

    def describe(self):
        return (f"every_window_reach({sorted(map(str, self.target))}, "
                f"boundaries={list(self.boundaries)})")


def from_objective(obj, bot_state="bot"):
    """Map a prefix-decidable Objective to an Event.

    Buchi and transience are tail events: request their windowed proxies
    instead (WindowedBuchi, or avoid_bot on a leaky game as the transience
    surrogate).
    """
    if isinstance(obj, Event):
        return obj
    if not isinstance(obj, Objective):
        raise BadParams(f"not an objective or event: {obj!r}")
    if obj.variant == REACH:
        return ReachEvent(obj.target)
    if obj.variant == SAFETY:
        return SafetyEvent(obj.target)
    if obj.variant == REACH_CONSTRAINED:
        return ReachConstrainedEvent(obj.constraint, obj.target)
    if obj.variant == AVOID_BOT:
        return SafetyEvent(frozenset({bot_state}))
    if obj.variant in (BUCHI, TRANSIENCE, TRANSIENT_BUCHI):
        raise EventNotPrefixDecidable(
            f"{obj.variant} is a tail event; use its windowed proxy")
    raise BadParams(f"unknown objective {obj!r}")
