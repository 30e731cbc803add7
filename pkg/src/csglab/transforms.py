"""Game-to-game transformations and strategy transfers.

- leaky: replace each Max action by leak-decorated variants that divert mass
  eta to a fresh absorbing sink, aligning transience with avoiding the sink.
- leak_schedule_transfer / carry_back: move strategies to and from the leaky
  game along a halving leak schedule.
- acyclic_unfold / markov_carry_back: encode a step counter into the states,
  and pull clock-plus-bit strategies back.
- fix_action: collapse Max's choice at one state to a single mixed action.
- ladder_reduce / min_delay_gadget: the two gadgets reducing infinite Min
  branching and injecting Min-controlled delays.
- truncate: cut a (possibly lazy) game to a finite window with absorbing
  frontier states.
"""

from __future__ import annotations

import functools
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .dist import Dist, dirac, dist_new, mix
from .errors import (
    BadParams,
    BotCollision,
    GridTooCoarse,
    NotInfiniteBranchingSpec,
    NotTurnBased,
    UnsupportedAction,
)
from .games import GameSpec, max_controlled, reachable_states
from .strategies import (
    GENERAL,
    MARKOV,
    MEMORYLESS,
    ONE_BIT,
    ONE_BIT_MARKOV,
    StrategyMachine,
)

F = Fraction

BOT = "bot"


@dataclass(frozen=True)
class LeakGrid:
    """Finite ascending grid of rational leak rates in (0,1).

    The countable grid of all rationals is truncated to this finite menu;
    schedule transfers round requested rates down, which only shrinks leak.
    """

    values: tuple

    def __post_init__(self):
        vals = tuple(F(v) for v in self.values)
        if not vals:
            raise BadParams("empty leak grid")
        for v in vals:
            if not (0 < v < 1):
                raise BadParams(f"leak rate {v} outside (0,1)")
        if any(a >= b for a, b in zip(vals, vals[1:])):
            raise BadParams("leak grid must be strictly ascending")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def floor(self, eta):
        """Largest grid value <= eta, or None."""
        i = bisect_right(self.values, F(eta))
        return self.values[i - 1] if i else None

    @property
    def minimum(self):
        return self.values[0]


def default_grid(levels=40):
    """Dyadic grid 2^-levels, ..., 2^-1."""
    return LeakGrid(tuple(F(1, 2 ** j) for j in range(levels, 0, -1)))


def leaky(game, grid):
    """The leak-decorated game: Max action a becomes (a, eta) for each grid
    eta, sending mass eta to the fresh absorbing state BOT and scaling the
    original row by 1 - eta.  Min actions are untouched."""
    if game.is_finite and BOT in game.states:
        raise BotCollision(f"state {BOT!r} already present")
    etas = grid.values

    @functools.lru_cache(maxsize=None)
    def kernel(s, a_eta, b):
        if s == BOT:
            return dirac(BOT)
        a, eta = a_eta
        row = game.kernel(s, a, b)
        entries = [(s2, (1 - eta) * p) for s2, p in row.items()]
        entries.append((BOT, eta))
        return dist_new(entries)

    @functools.lru_cache(maxsize=None)
    def amax(s):
        if s == BOT:
            return (0,)
        return tuple((a, eta) for a in game.max_actions(s) for eta in etas)

    def bmin(s):
        if s == BOT:
            return (0,)
        return game.min_actions(s)

    states = game.states + (BOT,) if game.is_finite else None
    return GameSpec(
        f"{game.name}_leaky",
        states=states,
        max_actions=amax,
        min_actions=bmin,
        kernel=lambda s, a, b: kernel(s, a, b),
        sinks=frozenset({BOT}),
        target=game.target_states(),
        infinite_min_branching=game.infinite_min_branching,
    )


def halving_schedule(eps, grid):
    """eta_n = largest grid value <= eps * 2^-(n+1); total leak mass < eps."""
    eps = F(eps)

    @functools.lru_cache(maxsize=None)
    def eta(n):
        req = eps * F(1, 2 ** (n + 1))
        v = grid.floor(req)
        if v is None:
            raise GridTooCoarse(
                f"no grid value below {req} (step {n}); extend the grid")
        return v

    return eta


def leak_schedule_transfer(sigma, eps, grid, name=None):
    """Transfer a strategy to the leaky game along the halving leak schedule.

    The new machine plays (a, eta_n) whenever sigma plays a at step n; memory
    is sigma's memory times a step counter.  Memoryless sources become plain
    clock-driven machines; clock-plus-one-bit structure is preserved.
    """
    eta = halving_schedule(eps, grid)
    memoryless = sigma.tag == MEMORYLESS

    def wrap_mode(n, m):
        return n if memoryless else (n, m)

    def split_mode(mode):
        if memoryless:
            return mode, sigma.initial_mode
        return mode

    def act(mode, s):
        n, m = split_mode(mode)
        if s == BOT:
            return dirac(0)
        e = eta(n)
        return sigma.act(m, s).map_outcomes(lambda a: (a, e))

    def update(s, mode, a_eta, b, s2):
        n, m = split_mode(mode)
        if s == BOT:
            return dirac(wrap_mode(n + 1, m))
        a = a_eta[0]
        return sigma.update(s, m, a, b, s2).map_outcomes(
            lambda m2: wrap_mode(n + 1, m2))

    if memoryless:
        tag, submodes = MARKOV, None
    elif sigma.tag == ONE_BIT:
        tag, submodes = ONE_BIT_MARKOV, (0, 1)
    else:
        tag, submodes = GENERAL, tuple(sigma.modes) if sigma.modes else None

    return StrategyMachine(
        name or f"{sigma.name}_leaky", modes=None,
        initial_mode=wrap_mode(0, sigma.initial_mode), act=act, update=update,
        tag=tag, dirac_updates=sigma.dirac_updates, submodes=submodes,
        act_deterministic=False,
        params={"eps": eps, "source": sigma.name})


def carry_back(sigma_bot, name=None):
    """Project a leaky-game strategy back to the original game.

    Plays a wherever the source plays (a, eta); identical memory mode set.
    Memory updates are fed the source's most likely eta-variant of the
    observed action (unique for schedule-transferred machines).
    """

    def act(m, s):
        return sigma_bot.act(m, s).map_outcomes(lambda ae: ae[0])

    def update(s, m, a, b, s2):
        row = sigma_bot.act(m, s)
        best, bestp = None, -1
        for ae, p in row.items():
            if ae[0] == a and p > bestp:
                best, bestp = ae, p
        if best is None:
            raise UnsupportedAction(f"{a!r} not in the source support at {s!r}")
        return sigma_bot.update(s, m, best, b, s2)

    return StrategyMachine(
        name or f"{sigma_bot.name}_carried", modes=sigma_bot.modes,
        initial_mode=sigma_bot.initial_mode, act=act, update=update,
        tag=sigma_bot.tag, dirac_updates=sigma_bot.dirac_updates,
        submodes=sigma_bot.submodes,
        act_deterministic=sigma_bot.act_deterministic)


def acyclic_unfold(game):
    """Encode a step counter into the states: (s, k) steps to (s', k+1).

    Every play of the unfolded game visits pairwise distinct states, so all
    plays are transient by construction.  The result is always lazy.
    """

    def amax(sk):
        return game.max_actions(sk[0])

    def bmin(sk):
        return game.min_actions(sk[0])

    @functools.lru_cache(maxsize=None)
    def kernel(sk, a, b):
        s, k = sk
        return game.kernel(s, a, b).map_outcomes(lambda s2: (s2, k + 1))

    return GameSpec(
        f"{game.name}_unfolded",
        states=None,
        max_actions=amax,
        min_actions=bmin,
        kernel=lambda sk, a, b: kernel(sk, a, b),
        sinks=frozenset(),
        target=lambda sk: game.is_target(sk[0]),
    )


def markov_carry_back(sigma_unf, name=None):
    """Pull a 1-bit strategy on the unfolding back as a clock-plus-bit
    strategy on the original game: at state s with mode (n, bit) it plays as
    the source does at state (s, n) with mode bit."""

    def act(mode, s):
        n, bit = mode
        return sigma_unf.act(bit, (s, n))

    def update(s, mode, a, b, s2):
        n, bit = mode
        return sigma_unf.update((s, n), bit, a, b, (s2, n + 1)).map_outcomes(
            lambda bit2: (n + 1, bit2))

    tag = ONE_BIT_MARKOV if sigma_unf.tag == ONE_BIT else GENERAL
    return StrategyMachine(
        name or f"{sigma_unf.name}_markov", modes=None,
        initial_mode=(0, sigma_unf.initial_mode), act=act, update=update,
        tag=tag, dirac_updates=sigma_unf.dirac_updates,
        submodes=tuple(sigma_unf.modes) if sigma_unf.modes else None,
        act_deterministic=sigma_unf.act_deterministic)


def fix_action(game, s0, alpha):
    """Restrict Max at s0 to the single mixed action alpha, folded into the
    kernel; rows at every other state are untouched."""
    support = alpha.support()
    avail = set(game.max_actions(s0))
    for a in support:
        if a not in avail:
            raise UnsupportedAction(f"{a!r} not a Max action at {s0!r}")
    if alpha.is_dirac:
        new_id = support[0]
    else:
        new_id = ("mix",) + tuple(alpha.items())

    @functools.lru_cache(maxsize=None)
    def kernel_s0(b):
        return mix((p, game.kernel(s0, a, b)) for a, p in alpha.items())

    def amax(s):
        return (new_id,) if s == s0 else game.max_actions(s)

    def kernel(s, a, b):
        if s == s0:
            if a != new_id:
                raise UnsupportedAction(f"only the fixed action remains at {s0!r}")
            return kernel_s0(b)
        return game.kernel(s, a, b)

    return GameSpec(
        f"{game.name}_fixed",
        states=game.states,
        max_actions=amax,
        min_actions=game.min_actions,
        kernel=kernel,
        sinks=game._sinks,
        target=game.target_states(),
        infinite_min_branching=game.infinite_min_branching,
    )


def ladder_reduce(game, s, family=None):
    """Replace conceptual infinite Min branching at s by the ladder gadget.

    State s hands off to rung 0; at rung i >= 1 Min either exits to the i-th
    family member or continues into a half-half shuttle that moves one rung
    forward or back (rung' 1 returns to rung 0).  Min branching at every new
    state is at most 2.
    """
    family = family or game.infinite_min_branching.get(s)
    if family is None:
        raise NotInfiniteBranchingSpec(
            f"state {s!r} declares no infinite Min branching family")
    rung = lambda i: ("ladder", s, i)
    shuttle = lambda i: ("ladder'", s, i)
    half = F(1, 2)

    def amax(x):
        if x == s or _is_gadget(x, s):
            return (0,)
        return game.max_actions(x)

    def bmin(x):
        if isinstance(x, tuple) and x[:2] == ("ladder", s) and x[2] >= 1:
            return (0, 1)  # 0 = exit, 1 = continue
        if x == s or _is_gadget(x, s):
            return (0,)
        return game.min_actions(x)

    def kernel(x, a, b):
        if x == s:
            return dirac(rung(0))
        if isinstance(x, tuple) and x[:2] == ("ladder", s):
            i = x[2]
            if i == 0:
                return dirac(rung(1))
            if b == 0:
                return dirac(family(i))
            return dirac(shuttle(i))
        if isinstance(x, tuple) and x[:2] == ("ladder'", s):
            i = x[2]
            back = rung(i - 1)
            return dist_new([(rung(i + 1), half), (back, half)])
        return game.kernel(x, a, b)

    return GameSpec(
        f"{game.name}_ladder",
        states=None,
        max_actions=amax,
        min_actions=bmin,
        kernel=kernel,
        sinks=game._sinks,
        target=game.target_states(),
    )


def _is_gadget(x, s):
    return isinstance(x, tuple) and len(x) == 3 and x[0] in ("ladder", "ladder'") \
        and x[1] == s


def min_delay_gadget(game, check_states=None):
    """Insert a Min-controlled self-loop state in front of every
    Max-controlled state of a turn-based game.

    At the new state Min picks stay (self-loop) or go (proceed); delays are
    charged to the step count.
    """
    if game.is_finite:
        scope = game.states
    else:
        scope = check_states or ()
    for x in scope:
        from .games import _one_player_matters
        if not _one_player_matters(game, x):
            raise NotTurnBased(f"both players' actions matter at {x!r}")

    controlled = functools.lru_cache(maxsize=None)(
        lambda x: max_controlled(game, x))
    delay = lambda x: ("delay", x)

    def redirect(x):
        return delay(x) if controlled(x) else x

    def amax(x):
        if isinstance(x, tuple) and len(x) == 2 and x[0] == "delay":
            return (0,)
        return game.max_actions(x)

    def bmin(x):
        if isinstance(x, tuple) and len(x) == 2 and x[0] == "delay":
            return (0, 1)  # 0 = stay, 1 = go
        return game.min_actions(x)

    @functools.lru_cache(maxsize=None)
    def kernel(x, a, b):
        if isinstance(x, tuple) and len(x) == 2 and x[0] == "delay":
            return dirac(x) if b == 0 else dirac(x[1])
        return game.kernel(x, a, b).map_outcomes(redirect)

    states = None
    if game.is_finite:
        states = game.states + tuple(
            delay(x) for x in game.states if controlled(x))
    return GameSpec(
        f"{game.name}_delayed",
        states=states,
        max_actions=amax,
        min_actions=bmin,
        kernel=lambda x, a, b: kernel(x, a, b),
        sinks=game._sinks,
        target=game.target_states(),
    )


def truncate(game, keep, bot=None):
    """Finite window of a game: states outside `keep` become absorbing
    frontier sinks (keeping their ids).  Returns (finite game, frontier set).

    The bot state, when named, stays a plain absorbing sink rather than a
    frontier state.
    """
    keep = list(dict.fromkeys(keep))
    kept = set(keep)
    frontier = []
    for s in keep:
        for a in game.max_actions(s):
            for b in game.min_actions(s):
                for s2 in game.kernel(s, a, b).support():
                    if s2 not in kept and s2 not in frontier:
                        frontier.append(s2)
    outside = set(frontier)
    states = tuple(keep) + tuple(frontier)

    def amax(s):
        return (0,) if s in outside else game.max_actions(s)

    def bmin(s):
        return (0,) if s in outside else game.min_actions(s)

    @functools.lru_cache(maxsize=None)
    def kernel(s, a, b):
        if s in outside:
            return dirac(s)
        return game.kernel(s, a, b)

    def is_sink(s):
        return s in outside or game.is_sink(s)

    def is_target(s):
        return s in kept and game.is_target(s)

    frontier_set = frozenset(f for f in frontier if f != (bot if bot else BOT))
    return GameSpec(
        f"{game.name}_trunc{len(keep)}",
        states=states,
        max_actions=amax,
        min_actions=bmin,
        kernel=lambda s, a, b: kernel(s, a, b),
        sinks=is_sink,
        target=is_target,
    ), frontier_set
