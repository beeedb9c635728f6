"""Two-player Markov games: coordination matrix games and cooperative foraging.

The matrix family (vanilla, climbing, penalty) is common-payoff: both
agents receive the entry selected by (row action, column action). The
foraging game is a grid world where every food's level equals the sum of
the agent levels, so collection always needs both agents loading at once;
rewards are shared in proportion to loader levels and normalized so that
collecting everything yields exactly 1.0 across agents, minus a terminal
penalty of lambda * terminal_step / t_max per agent that rewards speed.

State encoding (the contract consumed by policies and feedback text):
matrix states are the single-element vector [round_index]; foraging
states are foods first in spawn order as (row, col, level) triples with
collected foods encoded (-1, -1, 0), then agents in index order as
(row, col, level), giving length 3 * (n_foods + 2).

Everything here is deterministic given (game, policies, seed): spawn uses
a seeded generator and each rollout action draw uses a stream derived
from (seed, agent index, step).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import (
    ActionOutOfRangeError,
    PenaltyParamError,
    PolicyLangError,
    PolicyRuntimeFailure,
    SpawnInfeasibleError,
    StepAfterDoneError,
    UnknownGameError,
)
from .lang.interp import DEFAULT_FUEL, coerce_distribution, evaluate_value, sample
from .lang.parser import PolicyProgram

MATRIX = "matrix"
FORAGING = "foraging"

ACTION_NAMES = ("stay_idle", "move_up", "move_down", "move_left",
                "move_right", "load_food")
_MOVE_DELTAS = {1: (-1, 0), 2: (1, 0), 3: (0, -1), 4: (0, 1)}

_MATRIX_PAYOFFS = {
    "vanilla": ((2.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 3.0)),
    "climbing": ((11.0, -30.0, 0.0), (-30.0, 7.0, 0.0), (0.0, 6.0, 5.0)),
}

_SPAWN_ATTEMPTS = 10_000


@dataclass
class GameConfig:
    """Game section of a run configuration; unset fields take defaults."""

    kind: str = ""
    p: "float | None" = None
    rounds_per_episode: int = 1
    grid_rows: int = 5
    grid_cols: int = 5
    n_foods: int = 2
    agent_levels: tuple[int, int] = (1, 1)
    t_max: int = 50
    penalty_lambda: float = 0.2


@dataclass(frozen=True)
class GameSpec:
    """Immutable definition of a game; safe to share across threads."""

    kind: str
    name: str
    n_actions: int
    matrix: "tuple[tuple[float, ...], ...] | None" = None
    rounds_per_episode: int = 1
    grid_rows: int = 5
    grid_cols: int = 5
    n_foods: int = 2
    agent_levels: tuple[int, int] = (1, 1)
    t_max: int = 50
    penalty_lambda: float = 0.2

    def __post_init__(self):
        if self.kind == MATRIX:
            assert self.n_actions == 3 and self.matrix is not None
            assert self.rounds_per_episode >= 1
        elif self.kind == FORAGING:
            assert self.n_actions == len(ACTION_NAMES)
            if self.t_max < 1 or self.n_foods < 1:
                raise ValueError("t_max and n_foods must be positive")
            if min(self.grid_rows, self.grid_cols) < 3:
                raise ValueError("grid dimensions must be at least 3")
            if min(self.agent_levels) < 1:
                raise ValueError("agent levels must be positive")
            if self.penalty_lambda < 0:
                raise ValueError("penalty_lambda must be nonnegative")
        else:
            raise ValueError(f"unknown game kind {self.kind!r}")


@dataclass(frozen=True)
class Food:
    row: int
    col: int
    level: int
    alive: bool


@dataclass(frozen=True)
class AgentPos:
    row: int
    col: int
    level: int


@dataclass(frozen=True)
class WorldState:
    """Matrix: only the round counter. Foraging: food and agent slots."""

    step_index: int
    foods: tuple[Food, ...] = ()
    agents: tuple[AgentPos, ...] = ()

    @property
    def round_index(self) -> int:
        return self.step_index


@dataclass
class History:
    """States seen so far (length steps+1) and completed joint actions."""

    states: list[list[float]]
    actions: list[tuple[int, int]]


@dataclass
class Trajectory:
    history: History
    rewards: list[tuple[float, float]]
    returns: tuple[float, float]
    terminal_step: int
    all_collected: bool = False


@dataclass
class SWReport:
    """Per-episode and mean social welfare for a fixed policy profile."""

    per_episode_sw: list[float]
    mean_sw: float
    episodes: int
    seed: int


def make_game(config: GameConfig) -> GameSpec:
    """Build a GameSpec from the game section of a configuration."""
    name = config.kind
    if name in _MATRIX_PAYOFFS:
        return GameSpec(kind=MATRIX, name=name, n_actions=3,
                        matrix=_MATRIX_PAYOFFS[name],
                        rounds_per_episode=config.rounds_per_episode)
    if name == "penalty":
        if config.p is None or config.p >= 0:
            raise PenaltyParamError(
                f"penalty game requires p < 0, got {config.p!r}")
        p = float(config.p)
        matrix = ((p, 0.0, 10.0), (0.0, 2.0, 0.0), (10.0, 0.0, p))
        return GameSpec(kind=MATRIX, name=name, n_actions=3, matrix=matrix,
                        rounds_per_episode=config.rounds_per_episode)
    if name == "foraging":
        return GameSpec(kind=FORAGING, name=name, n_actions=6,
                        grid_rows=config.grid_rows, grid_cols=config.grid_cols,
                        n_foods=config.n_foods,
                        agent_levels=config.agent_levels,
                        t_max=config.t_max,
                        penalty_lambda=config.penalty_lambda)
    raise UnknownGameError(f"unknown game {name!r}")


def reset(game: GameSpec, seed: int) -> WorldState:
    """Initial world state; foraging spawns are seeded rejection draws."""
    if game.kind == MATRIX:
        return WorldState(step_index=0)

    rng = random.Random(seed)
    n_entities = game.n_foods + 2
    food_level = sum(game.agent_levels)
    for _ in range(_SPAWN_ATTEMPTS):
        cells = [(rng.randrange(game.grid_rows), rng.randrange(game.grid_cols))
                 for _ in range(n_entities)]
        if len(set(cells)) != n_entities:
            continue
        food_cells = cells[:game.n_foods]
        if any(abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1
               for i, a in enumerate(food_cells)
               for b in food_cells[i + 1:]):
            continue
        foods = tuple(Food(r, c, food_level, True) for r, c in food_cells)
        agents = tuple(AgentPos(r, c, lvl)
                       for (r, c), lvl in zip(cells[game.n_foods:],
                                              game.agent_levels))
        return WorldState(step_index=0, foods=foods, agents=agents)
    raise SpawnInfeasibleError(
        f"no feasible spawn for {game.grid_rows}x{game.grid_cols} grid "
        f"with {game.n_foods} foods after {_SPAWN_ATTEMPTS} attempts")


def is_done(game: GameSpec, state: WorldState) -> bool:
    if game.kind == MATRIX:
        return state.step_index >= game.rounds_per_episode
    return (all(not f.alive for f in state.foods)
            or state.step_index >= game.t_max)


def _resolve_moves(game: GameSpec, state: WorldState,
                   actions: tuple[int, int]) -> list[tuple[int, int]]:
    """Final agent cells after simultaneous movement; conflicted movers stay."""
    pos = [(a.row, a.col) for a in state.agents]
    food_cells = {(f.row, f.col) for f in state.foods if f.alive}
    movers = {i for i, a in enumerate(actions) if a in _MOVE_DELTAS}
    intent = list(pos)
    for i in movers:
        dr, dc = _MOVE_DELTAS[actions[i]]
        intent[i] = (pos[i][0] + dr, pos[i][1] + dc)

    ok = set(movers)
    # mover-vs-mover conflicts use raw intents: same target, or a swap
    for i in movers:
        for j in movers:
            if i < j and (intent[i] == intent[j]
                          or (intent[i] == pos[j] and intent[j] == pos[i])):
                ok.discard(i)
                ok.discard(j)
    for i in list(ok):
        r, c = intent[i]
        if not (0 <= r < game.grid_rows and 0 <= c < game.grid_cols):
            ok.discard(i)
        elif (r, c) in food_cells:
            ok.discard(i)
    # blocked movers become stationary obstacles; iterate to a fixed point
    changed = True
    while changed:
        changed = False
        stationary = {pos[i] for i in range(len(pos)) if i not in ok}
        for i in list(ok):
            if intent[i] in stationary:
                ok.discard(i)
                changed = True
    return [intent[i] if i in ok else pos[i] for i in range(len(pos))]


def step(game: GameSpec, state: WorldState,
         joint_action: tuple[int, int]) -> tuple[WorldState, tuple[float, float], bool]:
    """Advance one step; returns (new state, per-agent rewards, done flag)."""
    for i, a in enumerate(joint_action):
        if not isinstance(a, int) or not 0 <= a < game.n_actions:
            raise ActionOutOfRangeError(
                f"agent {i} action {a!r} outside [0, {game.n_actions})")
    if is_done(game, state):
        raise StepAfterDoneError("episode already finished")

    if game.kind == MATRIX:
        a0, a1 = joint_action
        payoff = game.matrix[a0][a1]
        new_state = WorldState(step_index=state.step_index + 1)
        return new_state, (payoff, payoff), is_done(game, new_state)

    new_pos = _resolve_moves(game, state, joint_action)
    rewards = [0.0, 0.0]
    total_food_level = sum(f.level for f in state.foods)
    new_foods = []
    for f in state.foods:
        if not f.alive:
            new_foods.append(f)
            continue
        loaders = [i for i, (r, c) in enumerate(new_pos)
                   if joint_action[i] == 5
                   and abs(r - f.row) + abs(c - f.col) == 1]
        loader_levels = sum(state.agents[i].level for i in loaders)
        if loaders and loader_levels >= f.level:
            for i in loaders:
                rewards[i] += (f.level * state.agents[i].level
                               / (loader_levels * total_food_level))
            new_foods.append(Food(f.row, f.col, f.level, False))
        else:
            new_foods.append(f)

    new_agents = tuple(AgentPos(r, c, a.level)
                       for (r, c), a in zip(new_pos, state.agents))
    new_state = WorldState(step_index=state.step_index + 1,
                           foods=tuple(new_foods), agents=new_agents)
    done = is_done(game, new_state)
    if done:
        penalty = game.penalty_lambda * new_state.step_index / game.t_max
        rewards[0] -= penalty
        rewards[1] -= penalty
    return new_state, (rewards[0], rewards[1]), done


def encode_state(game: GameSpec, state: WorldState) -> list[float]:
    """Flatten a world state into the numeric vector fed to policies."""
    if game.kind == MATRIX:
        return [float(state.step_index)]
    out: list[float] = []
    for f in state.foods:
        if f.alive:
            out.extend((float(f.row), float(f.col), float(f.level)))
        else:
            out.extend((-1.0, -1.0, 0.0))
    for a in state.agents:
        out.extend((float(a.row), float(a.col), float(a.level)))
    return out


def action_stream(seed: int, agent: int, step_index: int) -> random.Random:
    """Independent per-(seed, agent, step) stream used for action draws."""
    return random.Random(f"{seed}:{agent}:{step_index}")


def rollout(game: GameSpec, policy_pair: tuple[PolicyProgram, PolicyProgram],
            seed: int, fuel: int = DEFAULT_FUEL) -> Trajectory:
    """Play one episode; deterministic given (game, policies, seed).

    Policies see the full history each step. A crash or malformed
    distribution raises PolicyRuntimeFailure tagged with the offending
    agent and step.
    """
    state = reset(game, seed)
    states = [encode_state(game, state)]
    actions: list[tuple[int, int]] = []
    rewards: list[tuple[float, float]] = []
    # language values share the same lists; the language cannot mutate them
    hist_value = [states, []]
    done = False
    step_index = 0
    while not done:
        joint = []
        for agent in (0, 1):
            try:
                raw = evaluate_value(policy_pair[agent], hist_value, fuel)
                dist = coerce_distribution(raw, game.n_actions)
            except PolicyLangError as exc:
                raise PolicyRuntimeFailure(agent, step_index, exc) from exc
            joint.append(sample(dist, action_stream(seed, agent, step_index)))
        joint_action = (joint[0], joint[1])
        state, r, done = step(game, state, joint_action)
        actions.append(joint_action)
        hist_value[1].append([float(joint_action[0]), float(joint_action[1])])
        states.append(encode_state(game, state))
        rewards.append(r)
        step_index += 1

    returns = (sum(r[0] for r in rewards), sum(r[1] for r in rewards))
    all_collected = (game.kind == FORAGING
                     and all(not f.alive for f in state.foods))
    return Trajectory(history=History(states=states, actions=actions),
                      rewards=rewards, returns=returns,
                      terminal_step=step_index, all_collected=all_collected)


def evaluate_social_welfare(game: GameSpec,
                            policy_pair: tuple[PolicyProgram, PolicyProgram],
                            episodes: int, seed: int) -> SWReport:
    """Mean of per-episode social welfare over seeds seed..seed+episodes-1.

    A PolicyRuntimeFailure in any episode aborts the whole report.
    """
    per_episode = []
    for e in range(episodes):
        traj = rollout(game, policy_pair, seed + e)
        per_episode.append(traj.returns[0] + traj.returns[1])
    return SWReport(per_episode_sw=per_episode,
                    mean_sw=sum(per_episode) / episodes,
                    episodes=episodes, seed=seed)


def describe_game(game: GameSpec) -> str:
    """Human/LLM-readable description including the state-encoding layout."""
    if game.kind == MATRIX:
        rows = "\n".join("  " + " ".join(f"{v:>6g}" for v in row)
                         for row in game.matrix)
        return (
            f"Common-payoff 3x3 matrix game '{game.name}': both agents pick "
            f"an action in {{0,1,2}} (agent 0 the row, agent 1 the column) "
            f"and both receive the selected entry.\nPayoffs:\n{rows}\n"
            f"Rounds per episode: {game.rounds_per_episode}. "
            f"States are [round_index]."
        )
    return (
        f"Cooperative level-based foraging on a {game.grid_rows}x"
        f"{game.grid_cols} grid with {game.n_foods} foods and agent levels "
        f"{game.agent_levels}. Every food's level equals the sum of agent "
        f"levels, so both agents must stand in its 4-neighborhood and play "
        f"load_food simultaneously to collect it. Actions: "
        + ", ".join(f"{i}={n}" for i, n in enumerate(ACTION_NAMES))
        + f". Episodes end when all foods are collected or after "
        f"{game.t_max} steps; each agent then pays a penalty of "
        f"{game.penalty_lambda} * terminal_step / {game.t_max}. States are "
        f"foods first in spawn order as (row, col, level) triples, with "
        f"collected foods encoded (-1, -1, 0), then agents in index order "
        f"as (row, col, level)."
    )
