"""The policy language: parsing, sandboxed evaluation, and validation.

``validate`` is intentionally not imported here; it depends on the game
engine (which in turn imports this package for evaluation). Import it as
``pibr.lang.validate`` where needed.
"""

from .interp import (
    DEFAULT_FUEL,
    GRAMMAR_DOC,
    MAX_DEPTH,
    coerce_distribution,
    evaluate_policy,
    evaluate_value,
    make_history_value,
    sample,
)
from .parser import PolicyProgram, SourceText, parse, read_forms

__all__ = [
    "DEFAULT_FUEL",
    "GRAMMAR_DOC",
    "MAX_DEPTH",
    "PolicyProgram",
    "SourceText",
    "coerce_distribution",
    "evaluate_policy",
    "evaluate_value",
    "make_history_value",
    "parse",
    "read_forms",
    "sample",
]
