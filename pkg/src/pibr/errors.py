"""Exception taxonomy shared across the package.

Policy-language failures carry a ``kind`` string that matches the
validation-report vocabulary (``ParseError``, ``ArityError``,
``RuntimeError``, ``InvalidDistribution``, ``FuelExhausted``,
``DepthExceeded``) and an optional source position. They print as
``KIND at line:col — message``.
"""

from __future__ import annotations


class PibrError(Exception):
    """Base class for all package errors."""


# --- game-core -------------------------------------------------------------

class UnknownGameError(PibrError):
    pass


class PenaltyParamError(PibrError):
    """Penalty game configured with a non-negative penalty parameter."""


class SpawnInfeasibleError(PibrError):
    """Spawn constraints could not be satisfied within the attempt budget."""


class ActionOutOfRangeError(PibrError):
    pass


class StepAfterDoneError(PibrError):
    pass


class PolicyRuntimeFailure(PibrError):
    """A policy crashed or emitted a malformed distribution during a rollout."""

    def __init__(self, agent: int, step: int, cause: Exception):
        self.agent = agent
        self.step = step
        self.cause = cause
        super().__init__(f"agent {agent} failed at step {step}: {cause}")


# --- policy language --------------------------------------------------------

class PolicyLangError(PibrError):
    """Base for interpreter/parser failures; ``kind`` feeds validation reports."""

    kind = "RuntimeError"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(message)

    def __str__(self) -> str:
        return f"{self.kind} at {self.line}:{self.col} — {self.message}"


class ParseError(PolicyLangError):
    kind = "ParseError"


class ArityError(PolicyLangError):
    kind = "ArityError"


class PolicyRuntimeError(PolicyLangError):
    kind = "RuntimeError"


class FuelExhaustedError(PolicyLangError):
    kind = "FuelExhausted"


class DepthExceededError(PolicyLangError):
    kind = "DepthExceeded"


class InvalidDistributionError(PolicyLangError):
    kind = "InvalidDistribution"


# --- operators ---------------------------------------------------------------

class LlmUnavailableError(PibrError):
    """Endpoint unreachable or persistently failing after the retry budget."""


class NoCodeBlockError(PibrError):
    """Replies never contained a fenced code block within the retry budget."""


# --- optimization engine -----------------------------------------------------

class NoValidCandidateError(PibrError):
    """inner_return="best" found no candidate that passed validation."""


class AllProfilesInvalidError(PibrError):
    """Every outer step's evaluation aborted; no social welfare defined."""


# --- modal arena ---------------------------------------------------------------

class GuardednessError(PibrError):
    """A modal agent references the opponent outside any box."""


class NonStabilizedError(PibrError):
    """Pair evaluation did not reach a constant tail on the finite frame."""


# --- harness -------------------------------------------------------------------

class ConfigError(PibrError):
    pass


class MissingKeyError(ConfigError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"missing config key: {key}")


class TypeMismatchError(ConfigError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"config key {key}: {message}")
