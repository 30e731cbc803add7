"""Exact analysis of the finite Markov chains induced by fixing both players.

Fixing a finite game plus finite-memory machines for Max and Min yields a
finite chain over (state, Max mode, Min mode).  Absorption, Buchi-via-BSCC
and transient-mass queries are answered exactly when all inputs are exact
fractions; float inputs run the same algorithms in floats.

The linear solves walk the SCC condensation in reverse topological order, so
only the (typically tiny) strongly connected blocks need dense elimination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import NotFiniteMemory, OutOfRange, SingularSystem

F = Fraction


@dataclass
class ProductChain:
    """Finite Markov chain with target/bot labels on product states."""

    states: tuple                 # product tuples (s, max mode, min mode)
    rows: tuple                   # rows[i] = tuple of (succ index, prob)
    target: frozenset             # indices whose game state is a target
    bot: frozenset                # indices whose game state is the leak sink
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {s: i for i, s in enumerate(self.states)}

    def __len__(self):
        return len(self.states)

    @property
    def exact(self):
        return all(isinstance(p, (F, int)) for row in self.rows for _, p in row)

    def start_index(self, game_state):
        key = (game_state, self.meta.get("sigma_mode0"), self.meta.get("pi_mode0"))
        if key in self.index:
            return self.index[key]
        raise KeyError(f"no product state for {game_state!r}")

    def resolve(self, frm):
        """Index from a product tuple, a bare game state, or a raw index."""
        if frm in self.index:
            return self.index[frm]
        try:
            return self.start_index(frm)
        except KeyError:
            if isinstance(frm, int) and 0 <= frm < len(self.states):
                return frm
            raise


def product_chain(game, sigma, pi, start, target=None, bot=None):
    """Chain over (state, Max mode, Min mode) reachable from the start states.

    Transition mass is aggregated over action pairs, kernel draws and both
    machines' memory updates.  Private (non-Dirac-update) machines are fine:
    the chain simply tracks the joint mode distribution.
    """
    if not sigma.finite_memory:
        raise NotFiniteMemory(f"{sigma.name} is not finite-memory")
    if not pi.finite_memory:
        raise NotFiniteMemory(f"{pi.name} is not finite-memory")
    if not isinstance(start, list):
        start = [start]
    is_target = (target if callable(target) else
                 (lambda s: s in target) if target is not None else game.is_target)
    is_bot = (bot if callable(bot) else
              (lambda s: s in bot) if bot is not None else (lambda s: False))

    init = [(s, sigma.initial_mode, pi.initial_mode) for s in start]
    states = list(dict.fromkeys(init))
    index = {st: i for i, st in enumerate(states)}
    rows = []
    i = 0
    while i < len(states):
        s, ms, mp = states[i]
        acc = {}
        for a, pa in sigma.act(ms, s).items():
            for b, pb in pi.act(mp, s).items():
                wab = pa * pb
                for s2, pk in game.kernel(s, a, b).items():
                    for ms2, pu in sigma.update(s, ms, a, b, s2).items():
                        for mp2, pv in pi.update(s, mp, a, b, s2).items():
                            key = (s2, ms2, mp2)
                            w = wab * pk * pu * pv
                            acc[key] = acc.get(key, 0) + w
        row = []
        for key, w in acc.items():
            if key not in index:
                index[key] = len(states)
                states.append(key)
            row.append((index[key], w))
        rows.append(tuple(row))
        i += 1
    tgt = frozenset(i for i, (s, _, _) in enumerate(states) if is_target(s))
    bots = frozenset(i for i, (s, _, _) in enumerate(states) if is_bot(s))
    return ProductChain(
        tuple(states), tuple(rows), tgt, bots,
        meta={"sigma_mode0": sigma.initial_mode, "pi_mode0": pi.initial_mode,
              "game": game.name, "sigma": sigma.name, "pi": pi.name})


# -- BSCC decomposition ------------------------------------------------------


def strongly_connected_components(rows):
    """Iterative Tarjan; components are emitted successors-first."""
    n = len(rows)
    indices = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    comps = []
    counter = [0]

    for root in range(n):
        if indices[root] is not None:
            continue
        work = [(root, 0)]
        while work:
            v, pi_ = work[-1]
            if pi_ == 0:
                indices[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            succs = rows[v]
            while pi_ < len(succs):
                w = succs[pi_][0]
                pi_ += 1
                if indices[w] is None:
                    work[-1] = (v, pi_)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], indices[w])
            if advanced:
                continue
            work.pop()
            if low[v] == indices[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(frozenset(comp))
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comps


def bscc_decompose(chain):
    """Bottom strongly connected components and the transient remainder."""
    comps = strongly_connected_components(chain.rows)
    comp_of = {}
    for ci, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = ci
    bottom = []
    transient = set()
    for ci, comp in enumerate(comps):
        is_bottom = all(
            comp_of[w] == ci for v in comp for w, _ in chain.rows[v])
        if is_bottom:
            bottom.append(comp)
        else:
            transient.update(comp)
    return bottom, frozenset(transient)


# -- exact event probabilities ------------------------------------------------

REACH = "reach"
BUCHI = "buchi"
AVOID = "avoid"


def _label_set(chain, label):
    if label == "target":
        return set(chain.target)
    if label == "bot":
        return set(chain.bot)
    if callable(label):
        return {i for i, s in enumerate(chain.states) if label(s)}
    out = set()
    for x in label:
        out.add(x if isinstance(x, int) else chain.resolve(x))
    return out


def exact_event_prob(chain, event, frm, label="target"):
    """Probability of Reach/Buchi/Avoid over the labeled states, from frm.

    Exact rationals in, exact rational out.  Buchi probability equals the
    absorption probability into any bottom component containing a labeled
    state; Avoid is the complement of Reach.
    """
    frm = chain.resolve(frm)
    goal = _label_set(chain, label)
    if event == REACH:
        return hitting_probabilities(chain, goal)[frm]
    if event == AVOID:
        return 1 - hitting_probabilities(chain, goal)[frm]
    if event == BUCHI:
        bottom, _ = bscc_decompose(chain)
        good = set()
        for comp in bottom:
            if comp & goal:
                good |= comp
        if not good:
            zero = F(0) if chain.exact else 0.0
            return zero
        return hitting_probabilities(chain, good)[frm]
    raise OutOfRange(f"unknown event kind {event!r}")


def hitting_probabilities(chain, goal):
    """Vector of hit probabilities of the goal set (goal made absorbing).

    Solved by back-substitution along the SCC condensation; each strongly
    connected block is eliminated densely in exact arithmetic.
    """
    n = len(chain.states)
    exact = chain.exact
    one = F(1) if exact else 1.0
    zero = F(0) if exact else 0.0
    h = [None] * n
    for g in goal:
        h[g] = one

    # restrict to states that can reach the goal; the rest get 0
    radj = [[] for _ in range(n)]
    for i, row in enumerate(chain.rows):
        for j, _ in row:
            radj[j].append(i)
    can = set(goal)
    stack = list(goal)
    while stack:
        v = stack.pop()
        for u in radj[v]:
            if u not in can:
                can.add(u)
                stack.append(u)
    for i in range(n):
        if i not in can and h[i] is None:
            h[i] = zero

    unknown = [i for i in range(n) if h[i] is None]
    if not unknown:
        return h
    # restricted graph indexed by position in `unknown`
    pos = {v: k for k, v in enumerate(unknown)}
    restricted = [tuple((pos[j], p) for j, p in chain.rows[v] if j in pos)
                  for v in unknown]
    comps = strongly_connected_components(restricted)
    for comp in comps:  # successors-first, so back-substitution is in order
        block = sorted(comp)
        bidx = {k: t for t, k in enumerate(block)}
        m = len(block)
        A = [[one if r == c else zero for c in range(m)] for r in range(m)]
        bvec = [zero] * m
        for t, k in enumerate(block):
            v = unknown[k]
            for j, p in chain.rows[v]:
                if j in pos and pos[j] in bidx:
                    A[t][bidx[pos[j]]] -= p
                else:
                    bvec[t] += p * h[j]
        sol = _solve_dense(A, bvec, exact)
        for t, k in enumerate(block):
            h[unknown[k]] = sol[t]
    return h


def _solve_dense(A, b, exact):
    m = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(m):
        piv = None
        for r in range(col, m):
            if M[r][col] != 0:
                piv = r
                break
        if piv is None:
            raise SingularSystem("singular transient block")
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [v / pv for v in M[col]]
        for r in range(m):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [v - f * w for v, w in zip(M[r], M[col])]
    return [M[r][m] for r in range(m)]


# -- transient mass -----------------------------------------------------------


def transient_mass_at(chain, K, frm):
    """Probability of not having entered any bottom component after K steps."""
    last = None
    for k, mass in enumerate(transient_mass_curve(chain, frm, K)):
        last = mass
    return last


def transient_mass_curve(chain, frm, cap):
    """Yields the transient mass after k steps for k = 0..cap."""
    frm = chain.resolve(frm)
    _, transient = bscc_decompose(chain)
    mu = {frm: F(1) if chain.exact else 1.0} if frm in transient else {}
    yield sum(mu.values()) if mu else (F(0) if chain.exact else 0.0)
    for _ in range(cap):
        nxt = {}
        for i, w in mu.items():
            for j, p in chain.rows[i]:
                if j in transient:
                    nxt[j] = nxt.get(j, 0) + w * p
        mu = nxt
        yield sum(mu.values()) if mu else (F(0) if chain.exact else 0.0)


# -- the product inequality ----------------------------------------------------


def one_minus_sum_le_prod(a):
    """Both sides of 1 - sum(a) <= prod(1 - a) for a in [0,1]^n."""
    a = list(a)
    for v in a:
        if not (0 <= v <= 1):
            raise OutOfRange(f"value {v!r} outside [0,1]")
    lhs = 1 - sum(a)
    rhs = 1
    for v in a:
        rhs = rhs * (1 - v)
    return lhs, rhs, lhs <= rhs


# -- export --------------------------------------------------------------------


def chain_to_edgelist(chain):
    """Plain text edge list: 'src dst prob' with probs as exact fractions."""
    from .gamefile import _fmt_id, _fmt_prob

    lines = [f"# chain over {len(chain)} states"]
    if chain.target:
        lines.append("# target " + " ".join(
            _fmt_id(chain.states[i]) for i in sorted(chain.target)))
    if chain.bot:
        lines.append("# bot " + " ".join(
            _fmt_id(chain.states[i]) for i in sorted(chain.bot)))
    for i, row in enumerate(chain.rows):
        for j, p in row:
            lines.append(
                f"{_fmt_id(chain.states[i])} {_fmt_id(chain.states[j])} {_fmt_prob(p)}")
    return "\n".join(lines) + "\n"
