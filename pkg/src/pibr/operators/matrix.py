"""Deterministic oracles for the 3x3 matrix games.

Plain best response reads the opponent's mixed strategy off its source
(by executing it on the empty history) and plays the expected-payoff
argmax. The commitment proposer instead anchors on the welfare-best
diagonal cell when one strictly dominates every off-diagonal payoff:
naive best-response dynamics provably stall in the climbing game at the
(1,1) cell, and a one-sided commitment that the partner's next best
response will match is the deterministic way out of that trap.
"""

from __future__ import annotations

import logging

from ..errors import PolicyLangError
from ..games import GameSpec, encode_state, reset
from ..lang.interp import coerce_distribution, evaluate_value
from ..lang.parser import SourceText, parse
from .base import Candidate

logger = logging.getLogger(__name__)

_ONE_HOT = {0: "(list 1 0 0)", 1: "(list 0 1 0)", 2: "(list 0 0 1)"}


def constant_policy_source(action: int, n_actions: int,
                           comment: str = "") -> SourceText:
    entries = " ".join("1" if i == action else "0" for i in range(n_actions))
    lines = [comment] if comment else []
    lines.append(f"(policy (h) (list {entries}))")
    return SourceText.of("\n".join(lines))


def opponent_mixed_strategy(game: GameSpec,
                            opponent_source: SourceText) -> list[float]:
    """Execute the opponent policy on the empty history and read its mix."""
    program = parse(opponent_source)
    empty_history = [[encode_state(game, reset(game, 0))], []]
    raw = evaluate_value(program, empty_history)
    return coerce_distribution(raw, game.n_actions)


def _mixed_or_uniform(game: GameSpec, opponent_source: SourceText) -> list[float]:
    try:
        return opponent_mixed_strategy(game, opponent_source)
    except PolicyLangError as exc:
        logger.warning("opponent source invalid (%s); assuming uniform", exc)
        return [1.0 / game.n_actions] * game.n_actions


def expected_payoffs(game: GameSpec, role: int, q: list[float]) -> list[float]:
    """Expected payoff per own action against opponent mix q."""
    m = game.matrix
    if role == 0:
        return [sum(m[a][b] * q[b] for b in range(3)) for a in range(3)]
    return [sum(q[a] * m[a][b] for a in range(3)) for b in range(3)]


def _argmax(values: list[float]) -> int:
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


def oracle_matrix_best_response(game: GameSpec, role: int,
                                q: list[float]) -> Candidate:
    """Constant policy on the expected-payoff argmax (lowest index on ties)."""
    u = expected_payoffs(game, role, q)
    action = _argmax(u)
    comment = ("; best response for role {}: q=[{}] u=[{}] -> action {}"
               .format(role,
                       ",".join(f"{x:.6g}" for x in q),
                       ",".join(f"{x:.6g}" for x in u),
                       action))
    return Candidate(source=constant_policy_source(action, 3, comment),
                     origin="oracle")


def oracle_commitment_proposer(game: GameSpec, role: int,
                               opponent_source: SourceText) -> Candidate:
    """Propose (or match) the welfare-best diagonal coordination point.

    Falls back to plain best response when no diagonal cell strictly beats
    every off-diagonal payoff (then committing would sacrifice welfare).
    """
    m = game.matrix
    diag = [m[k][k] for k in range(3)]
    k_star = _argmax(diag)
    off_max = max(m[a][b] for a in range(3) for b in range(3) if a != b)
    if diag[k_star] <= off_max:
        return oracle_matrix_best_response(
            game, role, _mixed_or_uniform(game, opponent_source))

    try:
        q = opponent_mixed_strategy(game, opponent_source)
        matched = q[k_star] >= 1.0 - 1e-9
    except PolicyLangError:
        matched = False
    if matched:
        comment = (f"; opponent already commits to action {k_star}; matching "
                   f"for payoff {diag[k_star]:.6g}")
    else:
        comment = f"; COMMIT {k_star}"
    return Candidate(source=constant_policy_source(k_star, 3, comment),
                     origin="oracle")
