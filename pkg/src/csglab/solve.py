"""Numerical core: value iteration, best responses, and the fixing sweep.

Local optimization at each state is a zero-sum matrix game over expected
continuation values; sweeps are Jacobi (all states update from the previous
vector), which keeps iterate laws and iteration counts deterministic and
independent of state order.  Games whose Min sets are all singletons run on a
compiled numpy fast path; exact-rational mode always takes the generic path.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import events as ev_mod
from .dist import dirac, dist_new
from .errors import (
    BadParams,
    HorizonRequired,
    NoProgress,
    PrivateMemory,
    TruncationTooSmall,
)
from .games import Objective, reach_constrained
from .matrixgame import matrix_game_value
from .strategies import (
    StrategyMachine,
    machine_from_tables,
    memoryless_from_values,
    memoryless_machine,
    _optimal_row_mix,
)
from .transforms import BOT, fix_action

F = Fraction


@dataclass
class ValueVector:
    """State values in [0,1] plus solve metadata."""

    values: dict
    objective: str
    iterations: int
    residual: float
    converged: bool
    extra: dict = field(default_factory=dict)

    def __getitem__(self, s):
        return self.values[s]

    def check_range(self):
        for s, v in self.values.items():
            if not (-1e-12 <= float(v) <= 1 + 1e-12):
                raise BadParams(f"value {v} at {s!r} outside [0,1]")
        return True


# -- generic Jacobi value iteration -------------------------------------------


def _expect(row, vals):
    return sum(p * vals[s2] for s2, p in row.items())


def _state_backup(game, s, vals):
    amax = game.max_actions(s)
    bmin = game.min_actions(s)
    if len(amax) == 1 and len(bmin) == 1:
        return _expect(game.kernel(s, amax[0], bmin[0]), vals)
    if len(bmin) == 1:
        return max(_expect(game.kernel(s, a, bmin[0]), vals) for a in amax)
    if len(amax) == 1:
        return min(_expect(game.kernel(s, amax[0], b), vals) for b in bmin)
    M = [[_expect(game.kernel(s, a, b), vals) for b in bmin] for a in amax]
    return matrix_game_value(M)[0]


def value_iteration(game, *, absorb, init, monotone=None, max_iters=10000,
                    tol=1e-12, exact=False, trace_states=(), objective="custom"):
    """Jacobi iteration of the one-step matrix-game operator.

    absorb pins states to fixed values; init is the starting vector.  Iterates
    are checked monotone ('up' or 'down') when requested.  Returns on residual
    below tol or at the iteration cap, and says which in the metadata.
    """
    if not game.is_finite:
        raise BadParams("value iteration needs a finite game")
    fast = (not exact) and all(len(game.min_actions(s)) == 1 for s in game.states)
    if fast:
        return _value_iteration_mdp(game, absorb=absorb, init=init,
                                    monotone=monotone, max_iters=max_iters,
                                    tol=tol, trace_states=trace_states,
                                    objective=objective)
    vals = dict(init)
    for s, v in absorb.items():
        vals[s] = v
    slack = 0 if exact else 1e-12
    free = [s for s in game.states if s not in absorb]
    trace = {s: [vals[s]] for s in trace_states}
    it = 0
    residual = None
    while it < max_iters:
        new = dict(vals)
        for s in free:
            new[s] = _state_backup(game, s, vals)
        residual = max((abs(float(new[s] - vals[s])) for s in free), default=0.0)
        if monotone == "up":
            assert all(float(new[s]) >= float(vals[s]) - slack for s in free), \
                "iterates lost monotonicity (up)"
        elif monotone == "down":
            assert all(float(new[s]) <= float(vals[s]) + slack for s in free), \
                "iterates lost monotonicity (down)"
        vals = new
        it += 1
        for s in trace_states:
            trace[s].append(vals[s])
        if residual < tol:
            break
    vv = ValueVector(vals, objective, it, float(residual or 0.0),
                     converged=(residual is not None and residual < tol),
                     extra={"stop": "residual" if (residual is not None and residual < tol) else "cap"})
    if trace_states:
        vv.extra["trace"] = trace
    vv.check_range()
    return vv


def _value_iteration_mdp(game, *, absorb, init, monotone, max_iters, tol,
                         trace_states, objective):
    """Float fast path for games whose Min sets are singletons everywhere."""
    states = list(game.states)
    idx = {s: i for i, s in enumerate(states)}
    v = np.array([float(absorb.get(s, init[s])) for s in states])
    fixed = np.array([s in absorb for s in states])
    # flatten all (state, action) rows
    row_state, row_starts, flat_idx, flat_p = [], [0], [], []
    for s in states:
        if s in absorb:
            continue
        b = game.min_actions(s)[0]
        for a in game.max_actions(s):
            row = game.kernel(s, a, b)
            for s2, p in row.items():
                flat_idx.append(idx[s2])
                flat_p.append(float(p))
            row_state.append(idx[s])
            row_starts.append(len(flat_idx))
    group_starts = np.array(_group_starts(row_state), dtype=np.int64)
    free_idx = np.array(list(dict.fromkeys(row_state)), dtype=np.int64)
    row_state = np.array(row_state, dtype=np.int64)
    starts = np.array(row_starts[:-1], dtype=np.int64)
    flat_idx = np.array(flat_idx, dtype=np.int64)
    flat_p = np.array(flat_p)
    n_rows = len(row_state)

    trace = {s: [v[idx[s]]] for s in trace_states}
    it = 0
    residual = None
    while it < max_iters:
        new = v.copy()
        if n_rows:
            row_vals = np.add.reduceat(flat_p * v[flat_idx], starts)
            new[free_idx] = np.maximum.reduceat(row_vals, group_starts)
        residual = float(np.max(np.abs(new - v))) if len(new) else 0.0
        if monotone == "up":
            assert np.all(new >= v - 1e-12), "iterates lost monotonicity (up)"
        elif monotone == "down":
            assert np.all(new <= v + 1e-12), "iterates lost monotonicity (down)"
        v = new
        it += 1
        for s in trace_states:
            trace[s].append(float(v[idx[s]]))
        if residual < tol:
            break
    vals = {s: float(v[idx[s]]) for s in states}
    vv = ValueVector(vals, objective, it, float(residual or 0.0),
                     converged=(residual is not None and residual < tol),
                     extra={"stop": "residual" if (residual is not None and residual < tol) else "cap",
                            "fast_path": "mdp"})
    if trace_states:
        vv.extra["trace"] = trace
    vv.check_range()
    return vv


def _group_starts(row_state):
    starts = [0]
    for i in range(1, len(row_state)):
        if row_state[i] != row_state[i - 1]:
            starts.append(i)
    return starts


def reach_value_iteration(game, target, max_iters=10000, tol=1e-12,
                          exact=False, trace_states=(), terminal=None):
    """Reachability values: targets absorb at 1, iterates climb from 1_T.

    terminal generalizes the target to weighted absorption (state -> value),
    used for frontier-weighted reachability on truncations.
    """
    target = frozenset(target)
    one = F(1) if exact else 1.0
    zero = F(0) if exact else 0.0
    absorb = {s: one for s in target}
    if terminal:
        for s, w in terminal.items():
            absorb[s] = F(w) if exact else float(w)
    init = {s: absorb.get(s, zero) for s in game.states}
    return value_iteration(game, absorb=absorb, init=init, monotone="up",
                           max_iters=max_iters, tol=tol, exact=exact,
                           trace_states=trace_states, objective="reach")


def safety_value_iteration(game, avoid, max_iters=10000, tol=1e-12, exact=False):
    """Safety values: avoid-states absorb at 0, iterates descend from 1."""
    avoid = frozenset(avoid)
    one = F(1) if exact else 1.0
    zero = F(0) if exact else 0.0
    absorb = {s: zero for s in avoid}
    init = {s: absorb.get(s, one) for s in game.states}
    return value_iteration(game, absorb=absorb, init=init, monotone="down",
                           max_iters=max_iters, tol=tol, exact=exact,
                           objective="safety")


def buchi_value(game, target, inner_cap=10000, outer_cap=3, tol=1e-12,
                exact=False):
    """Quantitative Buchi via the nested fixpoint: the outer iterate descends
    from 1; each inner round climbs from 0 with target states pinned to the
    one-step backup of the outer vector.

    Exact Buchi values are generally reached only in the limit; the caps and
    residuals in the metadata say how far the truncation went.
    """
    target = frozenset(target)
    one = F(1) if exact else 1.0
    zero = F(0) if exact else 0.0
    Y = {s: one for s in game.states}
    outer_resids = []
    inner_iters = []
    for outer in range(outer_cap):
        pins = {s: _state_backup(game, s, Y) for s in target}
        inner = value_iteration(
            game, absorb=pins, init={s: pins.get(s, zero) for s in game.states},
            monotone="up", max_iters=inner_cap, tol=tol, exact=exact,
            objective="buchi_inner")
        X = inner.values
        resid = max(abs(float(Y[s] - X[s])) for s in game.states)
        assert all(float(X[s]) <= float(Y[s]) + 1e-12 for s in game.states), \
            "outer iterates lost monotonicity (down)"
        Y = dict(X)
        outer_resids.append(resid)
        inner_iters.append(inner.iterations)
        if resid < tol:
            break
    vv = ValueVector(Y, "buchi", sum(inner_iters), outer_resids[-1],
                     converged=outer_resids[-1] < tol,
                     extra={"outer_iterations": len(outer_resids),
                            "outer_residuals": outer_resids,
                            "inner_iterations": inner_iters,
                            "inner_cap": inner_cap, "outer_cap": outer_cap})
    vv.check_range()
    return vv


# -- best response for Min ------------------------------------------------------

BestResponse = namedtuple("BestResponse", ["pi", "value", "values"])


def best_response_min(game, sigma, objective, horizon=None, start=None,
                      max_iters=100000, tol=1e-12):
    """Min's best response against a fixed public-memory Max machine.

    Finite-memory sigma with an infinite-horizon Reach/Safety/Buchi objective
    runs value iteration (Buchi through its co-Buchi safe-region split) on the
    product Min MDP over game states x modes.  Step-counter machines need a
    finite horizon and run event-automaton backward induction.

    Returns (pi, value at the requested start, full value map).
    """
    if not sigma.dirac_updates:
        raise PrivateMemory(f"{sigma.name} has private (randomized) memory")
    if horizon is None and sigma.uses_step_counter:
        raise HorizonRequired(f"{sigma.name} runs on a step counter")
    if horizon is None:
        return _best_response_stationary(game, sigma, objective, start,
                                         max_iters, tol)
    return _best_response_horizon(game, sigma, objective, horizon, start)


def _det_update(machine, s, m, a, b, s2):
    d = machine.update(s, m, a, b, s2)
    return d.outcomes[0]


def _product_mdp(game, sigma):
    """Min MDP over (state, mode).  Returns (nodes, per-node action rows)."""
    nodes = []
    index = {}
    rows = []
    stack = [(s, sigma.initial_mode) for s in game.states]
    for nd in stack:
        if nd not in index:
            index[nd] = len(nodes)
            nodes.append(nd)
    i = 0
    while i < len(nodes):
        s, m = nodes[i]
        acts = {}
        for b in game.min_actions(s):
            acc = {}
            for a, pa in sigma.act(m, s).items():
                for s2, pk in game.kernel(s, a, b).items():
                    m2 = _det_update(sigma, s, m, a, b, s2)
                    key = (s2, m2)
                    acc[key] = acc.get(key, 0) + pa * pk
            row = []
            for key, p in acc.items():
                if key not in index:
                    index[key] = len(nodes)
                    nodes.append(key)
                row.append((index[key], float(p)))
            acts[b] = row
        rows.append(acts)
        i += 1
    return nodes, index, rows


def _mdp_min_reach(nodes, rows, goal_idx, max_iters, tol):
    """Minimal reach probabilities and Min's argmin actions."""
    n = len(nodes)
    v = [1.0 if i in goal_idx else 0.0 for i in range(n)]
    for _ in range(max_iters):
        resid = 0.0
        new = v[:]
        for i in range(n):
            if i in goal_idx:
                continue
            new[i] = min(sum(p * v[j] for j, p in row)
                         for row in rows[i].values())
            resid = max(resid, abs(new[i] - v[i]))
        v = new
        if resid < tol:
            break
    choice = {}
    for i in range(n):
        if i in goal_idx:
            choice[i] = next(iter(rows[i]))
            continue
        choice[i] = min(rows[i], key=lambda b: sum(p * v[j] for j, p in rows[i][b]))
    return v, choice


def _mdp_max_reach(nodes, rows, goal_idx, max_iters, tol):
    n = len(nodes)
    v = [1.0 if i in goal_idx else 0.0 for i in range(n)]
    for _ in range(max_iters):
        resid = 0.0
        new = v[:]
        for i in range(n):
            if i in goal_idx:
                continue
            new[i] = max(sum(p * v[j] for j, p in row)
                         for row in rows[i].values())
            resid = max(resid, abs(new[i] - v[i]))
        v = new
        if resid < tol:
            break
    choice = {}
    for i in range(n):
        if i in goal_idx:
            choice[i] = next(iter(rows[i]))
            continue
        choice[i] = max(rows[i], key=lambda b: sum(p * v[j] for j, p in rows[i][b]))
    return v, choice


def _safe_region(nodes, rows, bad_idx):
    """Nodes where Min can avoid bad_idx forever, with a staying action."""
    alive = {i for i in range(len(nodes)) if i not in bad_idx}
    while True:
        stay = {}
        dead = []
        for i in alive:
            pick = None
            for b, row in rows[i].items():
                if all(j in alive for j, _ in row):
                    pick = b
                    break
            if pick is None:
                dead.append(i)
            else:
                stay[i] = pick
        if not dead:
            return alive, stay
        alive -= set(dead)


def _best_response_stationary(game, sigma, objective, start, max_iters, tol):
    if not sigma.finite_memory:
        raise HorizonRequired("stationary best response needs finite memory")
    obj = objective if isinstance(objective, Objective) else None
    if obj is None:
        raise BadParams("infinite-horizon best response takes an Objective")
    nodes, index, rows = _product_mdp(game, sigma)

    if obj.variant == "reach_constrained":
        allowed = set(obj.constraint) | set(obj.target)
        goal = {i for i, (s, _) in enumerate(nodes) if s in obj.target}
        trap = {i for i, (s, _) in enumerate(nodes)
                if s not in allowed and i not in goal}
        # outside the constraint the play is lost: freeze those nodes at 0
        rows = [({b: [] for b in r} if i in trap else r)
                for i, r in enumerate(rows)]
        v, choice = _mdp_min_reach(nodes, rows, goal, max_iters, tol)
        values = {nd: v[i] for i, nd in enumerate(nodes)}
    elif obj.variant == "reach":
        goal = {i for i, (s, _) in enumerate(nodes) if s in obj.target}
        v, choice = _mdp_min_reach(nodes, rows, goal, max_iters, tol)
        values = {nd: v[i] for i, nd in enumerate(nodes)}
    elif obj.variant in ("safety", "avoid_bot"):
        bad = obj.target if obj.variant == "safety" else frozenset({BOT})
        goal = {i for i, (s, _) in enumerate(nodes) if s in bad}
        v, choice = _mdp_max_reach(nodes, rows, goal, max_iters, tol)
        values = {nd: 1.0 - v[i] for i, nd in enumerate(nodes)}
    elif obj.variant == "buchi":
        bad = {i for i, (s, _) in enumerate(nodes) if s in obj.target}
        safe, stay = _safe_region(nodes, rows, bad)
        v, choice = _mdp_max_reach(nodes, rows, safe, max_iters, tol)
        for i, b in stay.items():
            choice[i] = b
        values = {nd: 1.0 - v[i] for i, nd in enumerate(nodes)}
    else:
        raise BadParams(f"unsupported objective {obj.variant!r} at infinite horizon")

    act_table = {}
    for i, (s, m) in enumerate(nodes):
        act_table[(m, s)] = dirac(choice[i])
    pi = _tracking_min_machine(game, sigma, act_table)
    val = None
    if start is not None:
        val = values[(start, sigma.initial_mode)]
    return BestResponse(pi, val, values)


def _tracking_min_machine(game, sigma, act_table):
    """Min machine that replays sigma's public memory and plays a table."""

    def act(m, s):
        d = act_table.get((m, s))
        if d is None:
            return dirac(game.min_actions(s)[0])
        return d

    def update(s, m, a, b, s2):
        return dirac(_det_update(sigma, s, m, a, b, s2))

    return StrategyMachine(
        "best_response_min", modes=sigma.modes, initial_mode=sigma.initial_mode,
        act=act, update=update,
        tag="finite_memory" if sigma.finite_memory else "general",
        dirac_updates=True, act_deterministic=True)


def _sigma_mode(sigma, t, k):
    if sigma.uses_step_counter:
        return t if sigma.submodes is None else (t, k)
    return k


def _best_response_horizon(game, sigma, objective, horizon, start):
    """Exact backward induction over (state, submode, event automaton state)."""
    event = ev_mod.from_objective(objective, bot_state=BOT)
    if isinstance(event, ev_mod.WindowedBuchi):
        event = event.with_horizon(horizon)
    if event.horizon_locked is not None and event.horizon_locked != horizon:
        raise BadParams(
            f"event pins horizon {event.horizon_locked}, got {horizon}")
    starts = [start] if start is not None and not isinstance(start, list) \
        else (start or list(game.states))
    subm0 = sigma.initial_mode if not sigma.uses_step_counter else (
        sigma.initial_mode[1] if sigma.submodes is not None else None)

    # forward pass: reachable (s, k, ev) per layer
    layers = [dict.fromkeys((s0, subm0, event.init(s0)) for s0 in starts)]
    for t in range(1, horizon + 1):
        nxt = {}
        for (s, k, ev) in layers[t - 1]:
            if event.absorbing(ev) is not None:
                continue
            m = _sigma_mode(sigma, t - 1, k)
            for a in sigma.act(m, s).support():
                for b in game.min_actions(s):
                    for s2 in game.kernel(s, a, b).support():
                        m2 = _det_update(sigma, s, m, a, b, s2)
                        k2 = m2[1] if (sigma.uses_step_counter and
                                       sigma.submodes is not None) else (
                            m2 if not sigma.uses_step_counter else None)
                        ev2 = event.step(ev, t, s2)
                        nxt[(s2, k2, ev2)] = None
        layers.append(nxt)

    # backward pass
    values = {}
    for node in layers[horizon]:
        dec = event.absorbing(node[2])
        values[(horizon, node)] = float(
            dec if dec is not None else event.terminal(node[2]))
    choice = {}
    for t in range(horizon - 1, -1, -1):
        for node in layers[t]:
            s, k, ev = node
            dec = event.absorbing(ev)
            if dec is not None:
                values[(t, node)] = float(dec)
                continue
            m = _sigma_mode(sigma, t, k)
            best_b, best_v = None, math.inf
            for b in game.min_actions(s):
                acc = 0.0
                for a, pa in sigma.act(m, s).items():
                    for s2, pk in game.kernel(s, a, b).items():
                        m2 = _det_update(sigma, s, m, a, b, s2)
                        k2 = m2[1] if (sigma.uses_step_counter and
                                       sigma.submodes is not None) else (
                            m2 if not sigma.uses_step_counter else None)
                        ev2 = event.step(ev, t + 1, s2)
                        nxt = values.get((t + 1, (s2, k2, ev2)))
                        if nxt is None:
                            dec2 = event.absorbing(ev2)
                            nxt = float(dec2 if dec2 is not None
                                        else event.terminal(ev2))
                        acc += float(pa) * float(pk) * nxt
                if acc < best_v:
                    best_b, best_v = b, acc
            values[(t, node)] = best_v
            choice[(t, node)] = best_b

    pi = _horizon_min_machine(game, sigma, event, choice, subm0)
    out_values = {}
    for s0 in starts:
        out_values[s0] = values[(0, (s0, subm0, event.init(s0)))]
    val = out_values[starts[0]] if len(starts) == 1 else None
    return BestResponse(pi, val, out_values)


def _horizon_min_machine(game, sigma, event, choice, subm0):
    """Min machine tracking (step, sigma submode, event state)."""

    def act(mode, s):
        t, k, ev = mode
        b = choice.get((t, (s, k, ev)))
        if b is None:
            b = game.min_actions(s)[0]
        return dirac(b)

    def update(s, mode, a, b, s2):
        t, k, ev = mode
        m = _sigma_mode(sigma, t, k)
        m2 = _det_update(sigma, s, m, a, b, s2)
        k2 = m2[1] if (sigma.uses_step_counter and sigma.submodes is not None) \
            else (m2 if not sigma.uses_step_counter else None)
        return dirac((t + 1, k2, event.step(ev, t + 1, s2)))

    def init_mode(s0):
        return (0, subm0, event.init(s0))

    pi = StrategyMachine(
        "best_response_min_horizon", modes=None, initial_mode=None,
        act=act, update=update, tag="general", dirac_updates=True,
        act_deterministic=True)
    pi.init_mode_for = init_mode
    return pi


# -- the constructive vector procedure ------------------------------------------


def technical_vector(f, x, step_shrink=0.5, max_rounds=200, tol=1e-9):
    """Raise coordinates of x into a vector y with: f(y)_i > y_i implies
    y_i > x_i, and f(y)_i <= y_i implies y_i = x_i.

    Starting at y = x, any coordinate sitting at x whose image strictly
    exceeds it gets lifted, together with all currently exceeded coordinates,
    by a line-searched step that keeps every lifted coordinate strictly
    exceeded.  Each outer round permanently lifts at least one new
    coordinate, so at most n rounds run; a failing line search raises
    NoProgress rather than returning a bad vector.
    """
    y = [float(v) for v in x]
    n = len(y)
    if any(not (0 < v < 1) for v in y):
        raise BadParams("x must lie in the open unit cube")
    lifted = set()
    rounds = 0
    while True:
        fy = [float(v) for v in f(y)]
        fresh = [i for i in range(n)
                 if i not in lifted and fy[i] > y[i] + tol]
        if not fresh:
            break
        active = [i for i in range(n) if fy[i] > y[i] + tol]
        scale = 1.0
        while True:
            rounds += 1
            if rounds > max_rounds:
                raise NoProgress(
                    f"line search exhausted after {max_rounds} rounds")
            cand = y[:]
            for i in active:
                room = min((fy[i] - y[i]) / 2.0, (1.0 - y[i]) / 2.0)
                cand[i] = y[i] + scale * room
            fc = [float(v) for v in f(cand)]
            if all(fc[i] > cand[i] and cand[i] > y[i] for i in active):
                y = cand
                lifted.update(active)
                break
            scale *= step_shrink
    return y


def check_technical_postcondition(f, x, y, tol=1e-9):
    """Both implications of the lifted-vector contract, checked at y."""
    fy = [float(v) for v in f(y)]
    for i in range(len(y)):
        if fy[i] > y[i] + tol and not (y[i] > float(x[i])):
            return False
        if fy[i] <= y[i] + tol and abs(y[i] - float(x[i])) > tol \
                and not (fy[i] > y[i] + tol):
            return False
    return True


# -- memoryless reach with finite support -----------------------------------------

ReachSupport = namedtuple("ReachSupport", ["strategy", "support", "report"])


def memoryless_reach_with_support(game, start_states, target, eps,
                                  max_k=2000, tol=1e-12):
    """A memoryless strategy and a finite support set carrying most of the
    reachability value.

    Candidate strategies come from playing the one-step matrix games at the
    successive value iterates (early iterates mix more); each candidate's
    constrained-reach guarantee is certified against Min's exact best
    response, and the first certified candidate is returned.  The report
    carries the guarantee actually verified; for this finite instantiation
    nothing is claimed beyond the finite game itself.
    """
    target = frozenset(target)
    start_states = list(start_states)
    vstar = reach_value_iteration(game, target, max_iters=200000, tol=tol)
    tried = 0
    vals = {s: (1.0 if s in target else 0.0) for s in game.states}
    for k in range(1, max_k + 1):
        vals = {s: (1.0 if s in target else _state_backup(game, s, vals))
                for s in game.states}
        sigma = memoryless_from_values(game, vals)
        support = _support_under(game, sigma, start_states)
        L = frozenset(s for s in support
                      if vstar[s] > tol or s in target) | frozenset(start_states)
        br = best_response_min(game, sigma,
                               reach_constrained(L, target))
        tried += 1
        ok = all(br.values[(s, sigma.initial_mode)] >= vstar[s] - eps - 1e-9
                 for s in start_states)
        if ok:
            report = {
                "iterate": k,
                "candidates_tried": tried,
                "guarantee": {s: br.values[(s, sigma.initial_mode)]
                              for s in start_states},
                "value": {s: vstar[s] for s in start_states},
                "eps": eps,
                "verified": True,
                "scope": "finite game only",
            }
            return ReachSupport(sigma, L, report)
    report = {"candidates_tried": tried, "verified": False, "eps": eps,
              "scope": "finite game only"}
    return ReachSupport(sigma, L, report)


def _support_under(game, sigma, start_states):
    seen = list(dict.fromkeys(start_states))
    seen_set = set(seen)
    i = 0
    while i < len(seen):
        s = seen[i]
        for a in sigma.act(sigma.initial_mode, s).support():
            for b in game.min_actions(s):
                for s2 in game.kernel(s, a, b).support():
                    if s2 not in seen_set:
                        seen_set.add(s2)
                        seen.append(s2)
        i += 1
    return seen


# -- the state-enumeration fixing sweep ---------------------------------------------


@dataclass
class FixingSweepReport:
    """Everything the sweep measured: the fixed mixed actions, value traces,
    the per-step retention checks, and the optimistic/pessimistic value
    bracket from the frontier weighting."""

    order: list
    alphas: dict
    value_traces: list          # values after 0, 1, .., N fixings
    retention: list             # (index, state, lhs, rhs, ok) per check
    violations: list
    future_factors: list        # r_i = r ** 2**-i for i = 0..N
    bracket: dict
    y_traces: list = field(default_factory=list)

    @property
    def all_retained(self):
        return not self.violations


def fixing_sweep(game, r, frontier, frontier_values=None, interior=None,
                 bot_states=(BOT,), max_iters=20000, tol=1e-10):
    """Fix a locally optimal mixed action at each interior state in turn.

    Values on the truncation are frontier-weighted reachability: exits absorb
    at frontier_values (optimistic 1 by default; the pessimistic all-0
    reading makes the whole truncation worthless and is reported as the other
    end of the bracket).  After fixing state i the sweep verifies the
    per-step retention v_i(s) >= r**(2**-i) * v_(i-1)(s) and flags every
    violation; local fixing has no global guarantee, so surfacing violations
    is the point of the report.
    """
    if not (0 < r < 1):
        raise BadParams("retention factor r must lie in (0,1)")
    if not game.is_finite:
        raise BadParams("the sweep needs a finite truncation")
    frontier = frozenset(frontier)
    if not frontier:
        raise TruncationTooSmall("no frontier exits in the truncation")
    bots = frozenset(bot_states)
    if interior is None:
        interior = [s for s in game.states
                    if s not in frontier and s not in bots
                    and not game.is_sink(s)]
    fv = frontier_values if frontier_values is not None else {f: 1.0 for f in frontier}
    if not isinstance(fv, dict):
        fv = {f: fv for f in frontier}
    terminal = dict(fv)
    for s in bots:
        if game.is_finite and s in game.states:
            terminal[s] = 0.0

    def solve(g):
        vv = reach_value_iteration(g, frozenset(), terminal=terminal,
                                   max_iters=max_iters, tol=tol)
        return vv.values

    v_prev = solve(game)
    if all(v_prev[s] <= tol for s in interior):
        raise TruncationTooSmall(
            "frontier unreachable from every interior state; the truncated "
            "window carries no value")

    n = len(interior)
    factors = [r ** (2.0 ** -i) for i in range(n + 1)]
    alphas = {}
    traces = [dict(v_prev)]
    retention = []
    violations = []
    g = game
    for pos, s0 in enumerate(interior, start=1):
        amax = g.max_actions(s0)
        bmin = g.min_actions(s0)
        M = [[_expect(g.kernel(s0, a, b), v_prev) for b in bmin] for a in amax]
        alpha = _optimal_row_mix(M, amax)
        alphas[s0] = alpha
        g = fix_action(g, s0, alpha)
        v_new = solve(g)
        need = r ** (2.0 ** -pos)
        for s in interior:
            lhs, rhs = v_new[s], need * v_prev[s]
            ok = lhs >= rhs - 1e-9
            retention.append((pos, s, lhs, rhs, ok))
            if not ok:
                violations.append((pos, s, lhs, rhs))
        traces.append(dict(v_new))
        v_prev = v_new

    policy = {}
    for s in game.states:
        if s in alphas:
            policy[s] = alphas[s]
        else:
            policy[s] = dirac(game.max_actions(s)[0])
    sigma = memoryless_machine("fixing_sweep", policy)
    report = FixingSweepReport(
        order=list(interior), alphas=alphas, value_traces=traces,
        retention=retention, violations=violations,
        future_factors=factors,
        bracket={"optimistic": traces[0],
                 "pessimistic": {s: 0.0 for s in game.states}},
    )
    return sigma, report
