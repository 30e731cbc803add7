"""Concurrent stochastic games on countable state spaces.

Library layers:

- ``dist`` / ``games`` / ``gamefile``: distributions, game specs, built-in
  games and the game file format.
- ``strategies``: memory-based strategy machines and the explicitly
  constructed strategies for the bad-match family.
- ``transforms``: leaky games, leak schedules, acyclic unfolding, action
  fixing, the ladder and delay gadgets.
- ``matrixgame`` / ``solve``: zero-sum matrix games, value iteration, best
  responses, the constructive vector procedure, the state-fixing sweep.
- ``chains``: exact product-chain analysis (BSCCs, absorption, transient mass).
- ``mc``: seeded simulation, estimation with confidence intervals, martingale
  and transience diagnostics.
- ``experiments`` / ``cli``: the experiment runner behind the ``lab`` command.
"""

__version__ = "0.1.0"

from .dist import Dist, dirac, dist_new, mix
from .games import (
    GameSpec,
    Objective,
    Play,
    avoid_bot,
    buchi,
    builtin_game,
    builtin_names,
    check_turn_based,
    reach,
    reach_constrained,
    safety,
    step,
    transience,
    transient_buchi,
)

__all__ = [
    "Dist", "dirac", "dist_new", "mix",
    "GameSpec", "Objective", "Play", "builtin_game", "builtin_names",
    "check_turn_based", "step",
    "reach", "reach_constrained", "safety", "buchi", "transience",
    "transient_buchi", "avoid_bot",
    "__version__",
]
