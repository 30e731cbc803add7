"""Memory-based strategy machines.

A machine is (modes, initial mode, act, update): act(m, s) yields a mixed
action over A(s) (for Max machines) or B(s) (for Min machines); after both
players' actions and the successor are observed, update(s, m, a, b, s')
yields the next mode.  Machines with Dirac updates have public memory: the
opponent can track the mode.

Step-counter machines use structured modes: plain ints for strategies driven
only by a clock, pairs (step, bit) for clock-plus-one-bit strategies.  The
classes of the explicitly constructed bad-match strategies live here, next to
the generic constructors.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction

from .dist import Dist, dirac, dist_new
from .errors import (
    BadEpsilon,
    BadParams,
    ModeOutOfRange,
    NotFiniteMemory,
    UndecidableTail,
)
from .matrixgame import matrix_game_value

F = Fraction

MEMORYLESS = "memoryless"
FINITE_MEMORY = "finite_memory"
MARKOV = "markov"
ONE_BIT = "one_bit"
ONE_BIT_MARKOV = "one_bit_markov"
GENERAL = "general"

_STEP_COUNTER_TAGS = {MARKOV, ONE_BIT_MARKOV}


class StrategyMachine:
    """Immutable strategy machine; per-play mode state is caller-owned."""

    def __init__(self, name, *, modes, initial_mode, act, update, tag,
                 dirac_updates, submodes=None, act_deterministic=False,
                 constructor=None, params=None, act_table=None,
                 update_table=None):
        self.name = name
        self.modes = tuple(modes) if modes is not None else None
        self.initial_mode = initial_mode
        self.act = act
        self.update = update
        self.tag = tag
        self.dirac_updates = dirac_updates
        self.submodes = tuple(submodes) if submodes is not None else None
        self.act_deterministic = act_deterministic
        self.constructor = constructor
        self.params = dict(params) if params else {}
        self.act_table = act_table
        self.update_table = update_table
        self._check_class()

    def _check_class(self):
        if self.tag == MEMORYLESS and (self.modes is None or len(self.modes) != 1):
            raise BadParams("memoryless machines have a singleton mode set")
        if self.tag == ONE_BIT and tuple(self.modes or ()) != (0, 1):
            raise BadParams("one_bit machines have modes (0, 1)")
        if self.tag in _STEP_COUNTER_TAGS and self.modes is not None:
            raise BadParams("step-counter machines have structured modes")
        if self.tag == ONE_BIT_MARKOV and tuple(self.submodes or ()) != (0, 1):
            raise BadParams("one_bit_markov machines carry submodes (0, 1)")

    @property
    def finite_memory(self):
        return self.modes is not None

    @property
    def uses_step_counter(self):
        return self.modes is None

    def valid_mode(self, m):
        if self.modes is not None:
            return m in self.modes
        if self.submodes is not None:
            return (isinstance(m, tuple) and len(m) == 2
                    and isinstance(m[0], int) and m[0] >= 0
                    and m[1] in self.submodes)
        if self.tag == GENERAL:
            return True  # structured modes beyond (step, submode)
        return isinstance(m, int) and m >= 0

    def __repr__(self):
        size = len(self.modes) if self.modes is not None else "step-counter"
        return f"StrategyMachine({self.name!r}, tag={self.tag}, modes={size})"


def strategy_step(machine, m, s, rng):
    """Sample an action at (m, s); returns (action, finish).

    finish(b, s2) consumes the observed opponent action and successor and
    samples the next mode from the same rng stream.
    """
    if not machine.valid_mode(m):
        raise ModeOutOfRange(f"mode {m!r} invalid for {machine.name}")
    a = machine.act(m, s).sample(rng)

    def finish(b, s2):
        return machine.update(s, m, a, b, s2).sample(rng)

    return a, finish


# -- generic constructors ---------------------------------------------------


def memoryless_machine(name, policy, act_deterministic=None):
    """Memoryless machine from a policy: state -> Dist over actions."""
    if isinstance(policy, dict):
        table = dict(policy)
        fn = table.__getitem__
        if act_deterministic is None:
            act_deterministic = all(d.is_dirac for d in table.values())
        act_table = {(0, s): d for s, d in table.items()}
    else:
        fn = policy
        act_deterministic = bool(act_deterministic)
        act_table = None
    return StrategyMachine(
        name, modes=(0,), initial_mode=0,
        act=lambda m, s: fn(s),
        update=lambda s, m, a, b, s2: _DIRAC_ZERO,
        tag=MEMORYLESS, dirac_updates=True, act_deterministic=act_deterministic,
        act_table=act_table,
        update_table={} if act_table is not None else None,
    )


_DIRAC_ZERO = dirac(0)


def machine_from_tables(name, modes, initial_mode, act_table, update_table,
                        tag=FINITE_MEMORY):
    """Finite machine from explicit act/update tables.

    act_table: (mode, state) -> Dist over actions.
    update_table: (state, mode, a, b, s2) -> Dist over modes; missing keys
    keep the mode unchanged.
    """
    modes = tuple(modes)
    act_table = dict(act_table)
    update_table = dict(update_table)
    dirac_updates = all(d.is_dirac for d in update_table.values())

    def act(m, s):
        return act_table[(m, s)]

    def update(s, m, a, b, s2):
        return update_table.get((s, m, a, b, s2), dirac(m))

    return StrategyMachine(
        name, modes=modes, initial_mode=initial_mode, act=act, update=update,
        tag=tag, dirac_updates=dirac_updates,
        act_deterministic=all(d.is_dirac for d in act_table.values()),
        act_table=act_table, update_table=update_table)


def always(action):
    """Policy playing one action everywhere (as far as it is available)."""
    return lambda s: dirac(action)


def restart_on_return(machine, s0, name=None):
    """Wrap a machine so its memory resets to the initial mode on every
    arrival at s0.  For memoryless machines this is the machine itself."""
    if machine.tag == MEMORYLESS:
        return machine

    def update(s, m, a, b, s2):
        if s2 == s0:
            return dirac(machine.initial_mode)
        return machine.update(s, m, a, b, s2)

    return StrategyMachine(
        name or f"{machine.name}*", modes=machine.modes,
        initial_mode=machine.initial_mode, act=machine.act, update=update,
        tag=machine.tag if machine.finite_memory else GENERAL,
        dirac_updates=machine.dirac_updates, submodes=machine.submodes,
        act_deterministic=machine.act_deterministic)


# -- sequence specs ---------------------------------------------------------


@dataclass(frozen=True)
class SequenceSpec:
    """A [0,1]-valued sequence with decidable tail sums.

    kinds: constant (r_n = c), geometric (r_n = c * ratio**n),
    table (finite list, zero afterwards), custom (opaque callable; summability
    is undecidable and tail queries raise).
    """

    kind: str
    c: object = None
    ratio: object = None
    values: tuple = ()
    fn: object = None

    def value(self, n):
        if self.kind == "constant":
            return self.c
        if self.kind == "geometric":
            return self.c * self.ratio ** n
        if self.kind == "table":
            return self.values[n] if n < len(self.values) else 0
        return self.fn(n)

    def summable(self):
        if self.kind == "constant":
            return self.c == 0
        if self.kind == "geometric":
            return self.c == 0 or self.ratio < 1
        if self.kind == "table":
            return True
        raise UndecidableTail("custom sequences carry no tail bound")

    def tail(self, n):
        """Sum of r_m for m >= n; only for summable sequences."""
        if not self.summable():
            raise BadParams("tail of a divergent sequence")
        if self.kind == "constant":
            return 0
        if self.kind == "geometric":
            return self.c * self.ratio ** n / (1 - self.ratio)
        return sum(self.values[n:]) if n < len(self.values) else 0


def seq_constant(c):
    _check_unit(c)
    return SequenceSpec("constant", c=c)


def seq_geometric(c, ratio):
    _check_unit(c)
    if ratio < 0:
        raise BadParams("ratio must be nonnegative")
    return SequenceSpec("geometric", c=c, ratio=ratio)


def seq_table(values):
    values = tuple(values)
    for v in values:
        _check_unit(v)
    return SequenceSpec("table", values=values)


def seq_custom(fn):
    return SequenceSpec("custom", fn=fn)


def _check_unit(v):
    if not (0 <= v <= 1):
        raise BadParams(f"sequence value {v!r} outside [0,1]")


# -- bad-match strategies ----------------------------------------------------
#
# These constructors hard-code the (simplified) bad-match structure: the only
# decision state is "d", the target state is "s", action 1 is the risky move.


def badmatch_phase_lengths(eps):
    """Per-phase error budgets and lengths for the clock-plus-bit strategy.

    Phase i (1-based) gets budget eps_i = eps * 2**-(i+1), split evenly
    between the mixing loss and the phase-timeout loss; the resulting length
    l_i = 2*ceil(ln(1/eps_i)/eps_i) makes a run of l_i/2 two-step rounds fail
    to resolve with probability at most eps_i.
    """
    if not (0 < eps < 1):
        raise BadEpsilon(f"epsilon {eps!r} outside (0,1)")

    def eps_i(i):
        return eps * 2.0 ** (-(i + 1))

    def length(i):
        e = eps_i(i)
        return 2 * math.ceil(math.log(1.0 / e) / e)

    return eps_i, length


class _PhaseClock:
    """Lazily extended cumulative phase boundaries."""

    def __init__(self, length_fn):
        self.length = length_fn
        self.cum = [0]

    def phase_of(self, n):
        """1-based phase index of step n, and the phase's start step."""
        while self.cum[-1] <= n:
            self.cum.append(self.cum[-1] + self.length(len(self.cum)))
        i = bisect.bisect_right(self.cum, n)
        return i, self.cum[i - 1]

    def boundaries(self, k):
        """Cumulative boundaries of the first k phases."""
        while len(self.cum) <= k:
            self.cum.append(self.cum[-1] + self.length(len(self.cum)))
        return self.cum[1:k + 1]


def badmatch_max_1bit_markov(eps):
    """Clock-plus-one-bit Max strategy for the (simplified) bad match.

    Within phase i the machine mixes action 1 with probability eps_i at d
    until the bit records a visit to s, then plays 0 for the rest of the
    phase; the bit resets at each phase boundary.  All updates are Dirac, so
    the memory is public.
    """
    eps_i, length = badmatch_phase_lengths(eps)
    clock = _PhaseClock(length)

    def act(m, s):
        n, bit = m
        if s == "d" and bit == 0:
            e = eps_i(clock.phase_of(n)[0])
            return dist_new([(1, e), (0, 1.0 - e)])
        return _DIRAC_ZERO

    def update(s, m, a, b, s2):
        n, bit = m
        n2 = n + 1
        _, start = clock.phase_of(n2)
        fresh = 1 if s2 == "s" else 0
        bit2 = fresh if n2 == start else (bit | fresh)
        return dirac((n2, bit2))

    return StrategyMachine(
        "badmatch_max_1bit_markov", modes=None, initial_mode=(0, 0),
        act=act, update=update, tag=ONE_BIT_MARKOV, dirac_updates=True,
        submodes=(0, 1), constructor="badmatch_max_1bit_markov",
        params={"eps": eps})


def badmatch_max_1bit_boundaries(eps, phases):
    """Cumulative step boundaries of the first `phases` phases."""
    _, length = badmatch_phase_lengths(eps)
    return _PhaseClock(length).boundaries(phases)


def badmatch_max_markov(r_spec):
    """Markov Max strategy playing action 1 with probability r_n at its n-th
    visit to d (visits land on even steps when starting at d)."""
    if r_spec.kind == "constant":
        c = r_spec.c
        if c == 0:
            pol = {"d": _DIRAC_ZERO}
        elif c == 1:
            pol = {"d": dirac(1)}
        else:
            pol = {"d": dist_new([(1, c), (0, 1 - c)])}
        full = {s: pol.get(s, _DIRAC_ZERO) for s in ("d", "l", "s", "t", "w")}
        m = memoryless_machine("badmatch_max_rate", full)
        m.constructor = "badmatch_max_markov"
        m.params = {"r": _seq_params(r_spec)}
        return m

    def act(n, s):
        if s != "d":
            return _DIRAC_ZERO
        r = r_spec.value(n // 2)
        if r == 0:
            return _DIRAC_ZERO
        if r == 1:
            return dirac(1)
        return dist_new([(1, r), (0, 1 - r)])

    def update(s, n, a, b, s2):
        return dirac(n + 1)

    return StrategyMachine(
        "badmatch_max_markov", modes=None, initial_mode=0, act=act,
        update=update, tag=MARKOV, dirac_updates=True,
        constructor="badmatch_max_markov", params={"r": _seq_params(r_spec)})


def badmatch_max_periodic():
    """Two-mode Max machine alternating actions 0 and 1 on successive visits
    to d (the mode flips exactly on arrivals at d)."""

    def act(m, s):
        return dirac(m) if s == "d" else _DIRAC_ZERO

    def update(s, m, a, b, s2):
        return dirac(1 - m) if s2 == "d" else dirac(m)

    return StrategyMachine(
        "badmatch_max_periodic", modes=(0, 1), initial_mode=0, act=act,
        update=update, tag=FINITE_MEMORY, dirac_updates=True,
        act_deterministic=True, constructor="badmatch_max_periodic")


def badmatch_min_counter_finite(game, max_strat, eps, cap=10**6):
    """Min counter-strategy against a finite-memory Max machine on the
    (simplified) bad match.

    Splits eps into a mixing rate eps1 and a settling budget eps2, plays
    action 1 with probability eps1 for K steps and action 1 forever after,
    where K is the least horizon at which the Max-vs-mixing product chain has
    transient mass at most eps2 (computed exactly).
    """
    from . import chains

    if not max_strat.finite_memory:
        raise NotFiniteMemory(f"{max_strat.name} is not finite-memory")
    if not (0 < eps < 1):
        raise BadEpsilon(f"epsilon {eps!r} outside (0,1)")
    eps = F(eps) if not isinstance(eps, (F, int)) else eps
    eps1 = eps / 2
    eps2 = eps / 2
    pi1_policy = {
        s: (dist_new([(1, eps1), (0, 1 - eps1)]) if len(game.min_actions(s)) > 1
            else dirac(game.min_actions(s)[0]))
        for s in game.states
    }
    pi1 = memoryless_machine("badmatch_min_mixing", pi1_policy)
    chain = chains.product_chain(game, max_strat, pi1, start="d")
    masses = chains.transient_mass_curve(chain, chain.start_index("d"), cap)
    K = None
    for k, mass in enumerate(masses):
        if mass <= eps2:
            K = k
            break
    if K is None:
        from .errors import KNotFound
        raise KNotFound(f"transient mass did not fall below {eps2} within {cap} steps")

    def act(m, s):
        if len(game.min_actions(s)) == 1:
            return dirac(game.min_actions(s)[0])
        return pi1_policy[s] if m < K else dirac(1)

    def update(s, m, a, b, s2):
        return dirac(min(m + 1, K))

    return StrategyMachine(
        "badmatch_min_counter_finite", modes=tuple(range(K + 1)),
        initial_mode=0, act=act, update=update, tag=FINITE_MEMORY,
        dirac_updates=True, params={"eps": eps, "K": K})


def badmatch_min_counter_markov(r_spec, eps):
    """Min counter-strategy against a Markov Max strategy with visit rates r_n.

    Divergent rate sums let Min play 0 forever; for summable rates Min plays 0
    until the tail sum drops to eps (switching at step 2K, the step of the
    K-th visit to d) and action 1 forever after.
    """
    if not (0 < eps < 1):
        raise BadEpsilon(f"epsilon {eps!r} outside (0,1)")
    summable = r_spec.summable()  # raises UndecidableTail for custom specs
    if not summable:
        pol = lambda s: _DIRAC_ZERO
        m = memoryless_machine("badmatch_min_zero_forever", pol,
                               act_deterministic=True)
        m.params = {"branch": "divergent"}
        return m
    K = 0
    while r_spec.tail(K) > eps:
        K += 1
    switch = 2 * K

    def act(n, s):
        if s != "d":
            return _DIRAC_ZERO
        return _DIRAC_ZERO if n < switch else dirac(1)

    def update(s, n, a, b, s2):
        return dirac(n + 1)

    return StrategyMachine(
        "badmatch_min_counter_markov", modes=None, initial_mode=0, act=act,
        update=update, tag=MARKOV, dirac_updates=True, act_deterministic=True,
        params={"branch": "convergent", "K": K, "eps": eps})


def _seq_params(spec):
    return {"kind": spec.kind, "c": spec.c, "ratio": spec.ratio,
            "values": spec.values}


# -- locally optimal memoryless strategies -----------------------------------


def memoryless_from_values(game, values, objective=None):
    """Memoryless strategy playing, at each state, an optimal Max mix of the
    one-step matrix game whose payoffs are the expected continuation values.

    Ties: a matrix with all entries equal yields the uniform mix; otherwise a
    pure optimal row wins (lexicographically smallest); otherwise the solver's
    mixed optimum is used.
    """
    get = values.values.__getitem__ if hasattr(values, "values") and isinstance(
        getattr(values, "values"), dict) else values.__getitem__
    policy = {}
    for s in game.states:
        amax = game.max_actions(s)
        bmin = game.min_actions(s)
        M = [[_expect(game.kernel(s, a, b), get) for b in bmin] for a in amax]
        policy[s] = _optimal_row_mix(M, amax)
    return memoryless_machine("greedy_from_values", policy)


def _expect(row, get):
    return sum(p * get(s2) for s2, p in row.items())


def _optimal_row_mix(M, actions):
    flat = [v for r in M for v in r]
    if all(v == flat[0] for v in flat):
        n = len(actions)
        if n == 1:
            return dirac(actions[0])
        w = F(1, n) if isinstance(flat[0], (F, int)) else 1.0 / n
        return dist_new([(a, w) for a in actions])
    value, x, _ = matrix_game_value(M)
    slack = 0 if isinstance(value, (F, int)) else 1e-12
    for i, row in enumerate(M):
        if min(row) >= value - slack:
            return dirac(actions[i])
    return dist_new([(a, p) for a, p in zip(actions, x) if p > 0])
