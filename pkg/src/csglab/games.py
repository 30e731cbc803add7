"""Concurrent two-player zero-sum stochastic games on countable state spaces.

A GameSpec bundles a state universe (finite enumeration or lazy generator),
per-state action sets for Max and Min, and a transition kernel mapping
(state, max action, min action) to a distribution over successor states.
Min action sets are finite at every state; Max sets may be countable but are
enumerated lazily where infinite.

Everything is immutable after construction; sampling state lives entirely in
caller-provided RNG streams, so games are safe to share across workers.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction

from .dist import Dist, dirac, dist_new
from .errors import BadParams, IllegalAction, UnknownName

F = Fraction


class GameSpec:
    """A concurrent game.

    Parameters
    ----------
    name : str
    states : sequence or None
        Finite enumeration (its order is the canonical total order on states),
        or None for lazily generated games.
    max_actions, min_actions : callables state -> tuple of action ids
    kernel : callable (s, a, b) -> Dist over states
    sinks : frozenset or callable
        States s with kernel(s,a,b) = Dirac(s) for all a, b.
    target : frozenset or callable
        The objective's target set T.
    infinite_min_branching : dict state -> callable(i) -> state, optional
        Declares conceptual infinite Min branching at a state, consumed by the
        ladder reduction.  The state's actual B(s) stays finite.
    """

    def __init__(self, name, *, states=None, max_actions, min_actions, kernel,
                 sinks=frozenset(), target=frozenset(),
                 infinite_min_branching=None):
        self.name = name
        self.states = tuple(states) if states is not None else None
        self._max_actions = max_actions
        self._min_actions = min_actions
        self._kernel = kernel
        self._sinks = sinks
        self._target = target
        self.infinite_min_branching = infinite_min_branching or {}

    # -- structure ----------------------------------------------------------

    @property
    def is_finite(self):
        return self.states is not None

    def max_actions(self, s):
        return self._max_actions(s)

    def min_actions(self, s):
        return self._min_actions(s)

    def kernel(self, s, a, b):
        return self._kernel(s, a, b)

    def is_sink(self, s):
        if callable(self._sinks):
            return self._sinks(s)
        return s in self._sinks

    def is_target(self, s):
        if callable(self._target):
            return self._target(s)
        return s in self._target

    @property
    def target(self):
        if callable(self._target):
            raise BadParams(f"game {self.name} has a predicate target; no finite set")
        return frozenset(self._target)

    def target_states(self):
        """Finite target set when enumerable, else the predicate."""
        return self._target

    def __repr__(self):
        n = len(self.states) if self.is_finite else "lazy"
        return f"GameSpec({self.name!r}, states={n})"

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_tables(cls, name, states, max_actions, min_actions, kernel,
                    sinks=frozenset(), target=frozenset(), validate=True):
        """Finite game from dict tables.

        kernel maps (s, a, b) to a Dist or a list of (state, prob) entries.
        """
        states = tuple(states)
        rows = {}
        for key, row in kernel.items():
            rows[key] = row if isinstance(row, Dist) else dist_new(row)
        amax = {s: tuple(max_actions[s]) for s in states}
        bmin = {s: tuple(min_actions[s]) for s in states}
        game = cls(
            name,
            states=states,
            max_actions=lambda s: amax[s],
            min_actions=lambda s: bmin[s],
            kernel=lambda s, a, b: rows[(s, a, b)],
            sinks=frozenset(sinks),
            target=target if callable(target) else frozenset(target),
        )
        if validate:
            validate_game(game)
        return game

    @classmethod
    def from_generator(cls, name, node_fn, target=frozenset(), sinks=frozenset(),
                       infinite_min_branching=None):
        """Lazy game from a pure function state -> (max_actions, min_actions, rows).

        rows maps (a, b) to a Dist.  node_fn is memoized, so repeated requests
        for the same state id return identical local data.
        """
        node = functools.lru_cache(maxsize=None)(node_fn)
        return cls(
            name,
            states=None,
            max_actions=lambda s: node(s)[0],
            min_actions=lambda s: node(s)[1],
            kernel=lambda s, a, b: node(s)[2][(a, b)],
            sinks=sinks,
            target=target,
            infinite_min_branching=infinite_min_branching,
        )


def validate_game(game, states=None):
    """Check every kernel row of the given (or all, if finite) states."""
    states = states if states is not None else game.states
    for s in states:
        amax = game.max_actions(s)
        bmin = game.min_actions(s)
        if not amax or not bmin:
            raise BadParams(f"empty action set at {s!r}")
        for a in amax:
            for b in bmin:
                row = game.kernel(s, a, b)
                if not isinstance(row, Dist):
                    raise BadParams(f"kernel({s!r},{a!r},{b!r}) is not a Dist")
                if game.is_sink(s) and row.prob(s) != 1:
                    raise BadParams(f"sink {s!r} has a non-self transition")
    return True


def step(game, s, a, b, rng):
    """Sample the successor of (s, a, b) from the kernel.

    Deterministic given the rng stream state; consumes exactly one uniform.
    """
    if a not in game.max_actions(s):
        raise IllegalAction(f"Max action {a!r} not available at {s!r}")
    if b not in game.min_actions(s):
        raise IllegalAction(f"Min action {b!r} not available at {s!r}")
    return game.kernel(s, a, b).sample(rng)


def check_turn_based(game, states=None):
    """True iff at every listed state the kernel depends on only one player's action."""
    states = states if states is not None else game.states
    for s in states:
        if not _one_player_matters(game, s):
            return False
    return True


def _one_player_matters(game, s):
    amax, bmin = game.max_actions(s), game.min_actions(s)
    only_a = all(
        game.kernel(s, a, bmin[0]) == game.kernel(s, a, b)
        for a in amax for b in bmin[1:]
    )
    if only_a:
        return True
    return all(
        game.kernel(s, amax[0], b) == game.kernel(s, a, b)
        for b in bmin for a in amax[1:]
    )


def max_controlled(game, s):
    """State where only Max's action matters and Max genuinely has a choice."""
    amax, bmin = game.max_actions(s), game.min_actions(s)
    if len(amax) < 2:
        return False
    b_irrelevant = all(
        game.kernel(s, a, bmin[0]) == game.kernel(s, a, b)
        for a in amax for b in bmin[1:]
    )
    a_matters = any(
        game.kernel(s, amax[0], b) != game.kernel(s, a, b)
        for b in bmin for a in amax[1:]
    )
    return b_irrelevant and a_matters


def reachable_states(game, start, depth=None, limit=None):
    """BFS over kernel supports; start is a single state unless given as a list."""
    if not isinstance(start, list):
        start = [start]
    seen = list(dict.fromkeys(start))
    seen_set = set(seen)
    frontier = list(seen)
    d = 0
    while frontier and (depth is None or d < depth):
        d += 1
        nxt = []
        for s in frontier:
            for a in game.max_actions(s):
                for b in game.min_actions(s):
                    for s2 in game.kernel(s, a, b).support():
                        if s2 not in seen_set:
                            seen_set.add(s2)
                            seen.append(s2)
                            nxt.append(s2)
                            if limit is not None and len(seen) >= limit:
                                return seen
        frontier = nxt
    return seen


# -- plays ---------------------------------------------------------------


@dataclass(frozen=True)
class Play:
    """A sampled play prefix: start state plus (s, a, b, s') steps.

    When the play enters a sink, stepping may stop early; sink_entry records
    the index from which the play sits in the sink forever.  horizon is the
    nominal number of steps the play logically represents.
    """

    start: object
    steps: tuple
    horizon: int
    sink_entry: int | None = None

    def __len__(self):
        return self.horizon

    def recorded_steps(self):
        return len(self.steps)

    def state_at(self, t):
        """State at position t in the logical play, 0 <= t <= horizon."""
        if t == 0:
            return self.start
        if t <= len(self.steps):
            return self.steps[t - 1][3]
        if self.sink_entry is None:
            raise IndexError(t)
        return self.steps[-1][3] if self.steps else self.start

    def states(self):
        """All horizon+1 visited states, expanding any sink fast-forward."""
        out = [self.start]
        for st in self.steps:
            out.append(st[3])
        while len(out) < self.horizon + 1:
            out.append(out[-1])
        return out

    def validate(self, game):
        for (s, a, b, s2) in self.steps:
            if s2 not in game.kernel(s, a, b).support():
                raise BadParams(f"step ({s},{a},{b})->{s2} leaves the kernel support")
        return True


# -- objectives -----------------------------------------------------------

REACH = "reach"
REACH_CONSTRAINED = "reach_constrained"
SAFETY = "safety"
BUCHI = "buchi"
TRANSIENCE = "transience"
TRANSIENT_BUCHI = "transient_buchi"
AVOID_BOT = "avoid_bot"


@dataclass(frozen=True)
class Objective:
    """Event selector over plays.

    variant is one of the module constants; target/constraint are frozensets
    of states (constraint only for reach_constrained).
    """

    variant: str
    target: frozenset = frozenset()
    constraint: frozenset | None = None

    def __post_init__(self):
        known = {REACH, REACH_CONSTRAINED, SAFETY, BUCHI, TRANSIENCE,
                 TRANSIENT_BUCHI, AVOID_BOT}
        if self.variant not in known:
            raise BadParams(f"unknown objective variant {self.variant!r}")
        if self.variant == REACH_CONSTRAINED and self.constraint is None:
            raise BadParams("reach_constrained needs a constraint set")

    def describe(self):
        if self.variant == REACH_CONSTRAINED:
            return f"reach_constrained(L={sorted(map(str, self.constraint))}, T={sorted(map(str, self.target))})"
        if self.target:
            return f"{self.variant}({sorted(map(str, self.target))})"
        return self.variant


def reach(target):
    return Objective(REACH, frozenset(target))


def reach_constrained(constraint, target):
    return Objective(REACH_CONSTRAINED, frozenset(target), frozenset(constraint))


def safety(target):
    return Objective(SAFETY, frozenset(target))


def buchi(target):
    return Objective(BUCHI, frozenset(target))


def transience():
    return Objective(TRANSIENCE)


def transient_buchi(target):
    return Objective(TRANSIENT_BUCHI, frozenset(target))


def avoid_bot():
    return Objective(AVOID_BOT)


# -- built-in games --------------------------------------------------------


def _bad_match(simplified):
    # Two temporary states s (win) and t (loss) bounce back to d through a
    # single uncontrolled edge; w and l are permanent sinks.
    states = ["d", "w", "l", "s", "t"] if not simplified else ["d", "l", "s", "t"]
    A = {s: (0,) for s in states}
    B = {s: (0,) for s in states}
    A["d"] = B["d"] = (0, 1)
    win_11 = "w" if not simplified else "s"
    kern = {
        ("d", 0, 0): dirac("s"),
        ("d", 0, 1): dirac("t"),
        ("d", 1, 0): dirac("l"),
        ("d", 1, 1): dirac(win_11),
        ("l", 0, 0): dirac("l"),
        ("s", 0, 0): dirac("d"),
        ("t", 0, 0): dirac("d"),
    }
    sinks = {"l"}
    if not simplified:
        kern[("w", 0, 0)] = dirac("w")
        sinks.add("w")
    target = {"s"} if simplified else {"w", "s"}
    name = "simplified_bad_match" if simplified else "bad_match"
    return GameSpec.from_tables(name, states, A, B, kern, sinks=sinks, target=target)


def _turnbased_bad_match():
    # States: ('d', i) decision chain, ('e', i) Min response, ('p', a, b)
    # outcome encodings, then s/t bouncing back to ('d', 0) and sink l.
    def node(s):
        if isinstance(s, tuple) and s[0] == "d":
            i = s[1]
            rows = {(0, 0): dirac(("d", i + 1)), (1, 0): dirac(("e", i))}
            return ((0, 1), (0,), rows)
        if isinstance(s, tuple) and s[0] == "e":
            i = s[1]
            p = F(1, 2**i)
            rows = {
                (0, 0): dist_new([(("p", 1, 0), p), (("p", 0, 0), 1 - p)]) if p < 1
                else dirac(("p", 1, 0)),
                (0, 1): dist_new([(("p", 1, 1), p), (("p", 0, 1), 1 - p)]) if p < 1
                else dirac(("p", 1, 1)),
            }
            return ((0,), (0, 1), rows)
        if isinstance(s, tuple) and s[0] == "p":
            _, a, b = s
            dest = {(1, 1): "s", (0, 0): "s", (0, 1): "t", (1, 0): "l"}[(a, b)]
            return ((0,), (0,), {(0, 0): dirac(dest)})
        if s == "s" or s == "t":
            return ((0,), (0,), {(0, 0): dirac(("d", 0))})
        if s == "l":
            return ((0,), (0,), {(0, 0): dirac("l")})
        raise UnknownName(f"not a turnbased_bad_match state: {s!r}")

    return GameSpec.from_generator(
        "turnbased_bad_match", node, target=frozenset({"s"}), sinks=frozenset({"l"}))


def _one_way_chain(forward=F(3, 4)):
    # Infinite chain on states 1,2,3,...  Action 0 drifts forward, action 1
    # lingers in place; the sole Min action is a placeholder (MDP testbed).
    forward = F(forward) if not isinstance(forward, float) else forward
    if not (0 < forward < 1):
        raise BadParams("forward probability must lie in (0,1)")

    def node(i):
        if not (isinstance(i, int) and i >= 1):
            raise UnknownName(f"not a one_way_chain state: {i!r}")
        back = i - 1 if i > 1 else 1
        advance = dist_new([(i + 1, forward), (back, 1 - forward)])
        rows = {(0, 0): advance, (1, 0): dirac(i)}
        return ((0, 1), (0,), rows)

    return GameSpec.from_generator("one_way_chain", node)


def _ladder_demo():
    # A root whose conceptual Min choice ranges over countably many leaves;
    # the actual B(root) is a placeholder self-loop until the ladder reduction
    # rewires it.
    def node(s):
        if s == "root":
            return ((0,), (0,), {(0, 0): dirac("root")})
        if isinstance(s, tuple) and s[0] == "leaf":
            return ((0,), (0,), {(0, 0): dirac(s)})
        raise UnknownName(f"not a ladder_demo state: {s!r}")

    return GameSpec.from_generator(
        "ladder_demo", node,
        target=frozenset({("leaf", 1)}),
        sinks=lambda s: isinstance(s, tuple) and s[0] == "leaf",
        infinite_min_branching={"root": lambda i: ("leaf", i)},
    )


_BUILTINS = {
    "bad_match": lambda **kw: _bad_match(simplified=False),
    "simplified_bad_match": lambda **kw: _bad_match(simplified=True),
    "turnbased_bad_match": lambda **kw: _turnbased_bad_match(),
    "one_way_chain": _one_way_chain,
    "ladder_demo": lambda **kw: _ladder_demo(),
}


def builtin_game(name, **params):
    """Construct a built-in game by name.

    one_way_chain accepts forward=<prob>; the games needing truncation to a
    finite window are cut down with transforms.truncate.
    """
    if name not in _BUILTINS:
        raise UnknownName(f"no builtin game {name!r}; have {sorted(_BUILTINS)}")
    try:
        return _BUILTINS[name](**params)
    except TypeError as e:
        raise BadParams(str(e)) from e


def builtin_names():
    return sorted(_BUILTINS)
