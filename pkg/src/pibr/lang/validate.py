"""Probe-based validation of parsed policies against a concrete game.

Two probes: the empty history (just the seed-0 initial state) and a short
synthetic history obtained by playing random legal actions from the same
reset. Failures are data, not exceptions; they become operator feedback.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..errors import PolicyLangError
from .interp import DEFAULT_FUEL, coerce_distribution, evaluate_value
from .parser import PolicyProgram

PROBE_SEED = 0
_PROBE_STEPS = 3


@dataclass(frozen=True)
class ValidationFailure:
    kind: str
    message: str
    probe_index: int


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    failure: "ValidationFailure | None" = None


def probe_histories(game) -> list[list]:
    """History values used by the probe suite, in probe order."""
    from .. import games  # deferred: games imports this package

    initial = games.reset(game, PROBE_SEED)
    empty = [[games.encode_state(game, initial)], []]

    rng = random.Random(PROBE_SEED)
    state = initial
    states = [games.encode_state(game, state)]
    actions: list[list[float]] = []
    for _ in range(_PROBE_STEPS):
        if games.is_done(game, state):
            break
        joint = (rng.randrange(game.n_actions), rng.randrange(game.n_actions))
        state, _, _ = games.step(game, state, joint)
        states.append(games.encode_state(game, state))
        actions.append([float(joint[0]), float(joint[1])])
    return [empty, [states, actions]]


def validate(game, program: PolicyProgram,
             fuel: int = DEFAULT_FUEL) -> ValidationReport:
    """Run the probe suite; marks the program validated on success."""
    for idx, history_value in enumerate(probe_histories(game)):
        try:
            raw = evaluate_value(program, history_value, fuel)
            coerce_distribution(raw, game.n_actions)
        except PolicyLangError as exc:
            return ValidationReport(ok=False, failure=ValidationFailure(
                kind=exc.kind,
                message=exc.message.replace("\n", " "),
                probe_index=idx))
    program.n_actions = game.n_actions
    return ValidationReport(ok=True)
