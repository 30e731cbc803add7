"""Plain-text game definition files.

Grammar (one directive per line, ``#`` starts a comment):

    game <name>
    states <id> <id> ...
    target <id> ...
    sinks <id> ...
    actions <state> max <a> ... min <b> ...
    row <state> <a> <b> : <succ> <prob> <succ> <prob> ...

Probabilities are exact fractions (``3/4``) or decimals.  Ids are Python
literals without whitespace (ints, quoted strings, tuples like ``('d',0)``)
or bare alphanumeric tokens, which read as strings.

Lazy games are referenced instead of enumerated:

    builtin <name>
    param <key> <literal>
"""

from __future__ import annotations

import ast
from fractions import Fraction

from .errors import BadParams
from .games import GameSpec, builtin_game


def _fmt_id(x):
    if isinstance(x, str) and x.isalnum():
        return x
    return repr(x).replace(" ", "")


def _parse_id(tok):
    try:
        return ast.literal_eval(tok)
    except (ValueError, SyntaxError):
        return tok


def _fmt_prob(p):
    if isinstance(p, Fraction):
        return f"{p.numerator}/{p.denominator}"
    if isinstance(p, int):
        return str(p)
    return repr(p)


def _parse_prob(tok):
    if "/" in tok:
        num, den = tok.split("/")
        return Fraction(int(num), int(den))
    if tok.isdigit():
        return Fraction(int(tok))
    return float(tok)


def write_game(game, path=None):
    """Serialize a finite game to the text grammar; returns the text."""
    lines = [f"game {game.name}"]
    if not game.is_finite:
        raise BadParams(
            "only finite games can be enumerated; reference lazy games via 'builtin'")
    lines.append("states " + " ".join(_fmt_id(s) for s in game.states))
    target = [s for s in game.states if game.is_target(s)]
    if target:
        lines.append("target " + " ".join(_fmt_id(s) for s in target))
    sinks = [s for s in game.states if game.is_sink(s)]
    if sinks:
        lines.append("sinks " + " ".join(_fmt_id(s) for s in sinks))
    for s in game.states:
        amax = game.max_actions(s)
        bmin = game.min_actions(s)
        lines.append(
            f"actions {_fmt_id(s)} max " + " ".join(_fmt_id(a) for a in amax)
            + " min " + " ".join(_fmt_id(b) for b in bmin))
    for s in game.states:
        for a in game.max_actions(s):
            for b in game.min_actions(s):
                row = game.kernel(s, a, b)
                cells = " ".join(
                    f"{_fmt_id(o)} {_fmt_prob(p)}" for o, p in row.items())
                lines.append(f"row {_fmt_id(s)} {_fmt_id(a)} {_fmt_id(b)} : {cells}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def read_game(source):
    """Parse a game file (path or text)."""
    if "\n" not in source and not source.strip().startswith(("game", "builtin")):
        with open(source) as fh:
            text = fh.read()
    else:
        text = source
    name = "unnamed"
    builtin = None
    params = {}
    states = None
    target = set()
    sinks = set()
    max_actions = {}
    min_actions = {}
    kernel = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0]
        try:
            if head == "game":
                name = toks[1]
            elif head == "builtin":
                builtin = toks[1]
            elif head == "param":
                params[toks[1]] = _parse_id(toks[2])
            elif head == "states":
                states = [_parse_id(t) for t in toks[1:]]
            elif head == "target":
                target.update(_parse_id(t) for t in toks[1:])
            elif head == "sinks":
                sinks.update(_parse_id(t) for t in toks[1:])
            elif head == "actions":
                s = _parse_id(toks[1])
                mi = toks.index("max")
                ni = toks.index("min")
                max_actions[s] = tuple(_parse_id(t) for t in toks[mi + 1:ni])
                min_actions[s] = tuple(_parse_id(t) for t in toks[ni + 1:])
            elif head == "row":
                s, a, b = (_parse_id(t) for t in toks[1:4])
                if toks[4] != ":":
                    raise BadParams("expected ':' after row key")
                cells = toks[5:]
                entries = [( _parse_id(cells[i]), _parse_prob(cells[i + 1]))
                           for i in range(0, len(cells), 2)]
                kernel[(s, a, b)] = entries
            else:
                raise BadParams(f"unknown directive {head!r}")
        except (IndexError, ValueError) as e:
            raise BadParams(f"line {lineno}: {e}") from e
    if builtin is not None:
        return builtin_game(builtin, **params)
    if states is None:
        raise BadParams("missing 'states' (or 'builtin') directive")
    return GameSpec.from_tables(
        name, states, max_actions, min_actions, kernel, sinks=sinks, target=target)
