"""Shared operator types: the context handed to every candidate generator,
operator configuration, and the candidate wrapper they all return."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Sequence

from ..games import GameSpec
from ..lang.parser import SourceText

if TYPE_CHECKING:
    from ..engine import LossRecord

ORACLE_BR = "OracleBR"
ORACLE_PROPOSER = "OracleProposer"
ORACLE_FORAGE = "OracleForage"
LLM = "LLM"

OPERATOR_KINDS = (ORACLE_BR, ORACLE_PROPOSER, ORACLE_FORAGE, LLM)


@dataclass
class LlmSettings:
    base_url: "str | None" = None
    model: "str | None" = None
    temperature: float = 0.0
    max_retries: int = 3
    timeout: float = 30.0


@dataclass
class ForageSettings:
    eval_episodes: int = 4
    template_budget: int = 8


@dataclass
class OperatorConfig:
    kind: str
    llm: LlmSettings = field(default_factory=LlmSettings)
    forage: ForageSettings = field(default_factory=ForageSettings)

    def __post_init__(self):
        if self.kind not in OPERATOR_KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")


@dataclass
class OperatorContext:
    """Everything a best-response operator may condition on.

    ``feedback_log`` holds the inner loop's prior loss records, oldest
    first; ``opponent_source`` is the frozen opposing policy's code. The
    normal path guarantees it parses, but operators degrade gracefully
    (uniform-opponent fallback) if a previous step accepted broken code.
    """

    game: GameSpec
    role: int
    opponent_source: SourceText
    inner_step: int
    inner_budget: int
    feedback_log: "Sequence[LossRecord]"
    grammar_doc: str
    seed: int

    def __post_init__(self):
        if self.role not in (0, 1):
            raise ValueError("role must be 0 or 1")
        if not 1 <= self.inner_step <= self.inner_budget:
            raise ValueError("inner_step must lie in [1, inner_budget]")


@dataclass(frozen=True)
class Candidate:
    source: SourceText
    origin: str  # oracle | llm | llm_repair
