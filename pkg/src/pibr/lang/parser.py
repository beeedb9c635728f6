"""Parser for the policy language.

A policy program is a sequence of parenthesized prefix expressions:
zero or more ``(def name (params...) body)`` forms followed by exactly one
``(policy (h) body)`` form. Comments run from ``;`` to end of line.

The reader is iterative (explicit stack), so arbitrarily deep nesting
parses without touching the host recursion limit.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Union

from ..errors import ParseError

RESERVED = frozenset({"if", "let", "lambda", "and", "or", "def", "policy"})

BUILTIN_NAMES = frozenset({
    "+", "-", "*", "/", "%", "<", "<=", ">", ">=", "=", "!=",
    "not", "abs", "min", "max", "floor", "len", "list", "get",
    "append", "range", "fold",
})

_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_ATOM_END = frozenset(" \t\r\n();")


@dataclass(frozen=True)
class SourceText:
    """Policy source plus a content hash used in logs and artifacts."""

    text: str
    sha: str

    @classmethod
    def of(cls, text: str) -> "SourceText":
        if not text.strip():
            raise ValueError("policy source is empty")
        return cls(text=text, sha=hashlib.sha256(text.encode("utf-8")).hexdigest())


@dataclass(frozen=True)
class Atom:
    """Number literal (float) or symbol (str)."""

    value: "float | str"
    line: int
    col: int

    @property
    def is_symbol(self) -> bool:
        return isinstance(self.value, str)


@dataclass(frozen=True)
class SList:
    items: "tuple[SExpr, ...]"
    line: int
    col: int


SExpr = Union[Atom, SList]


@dataclass
class PolicyProgram:
    """Parsed policy: top-level definitions plus the single policy entry.

    ``n_actions`` stays ``None`` until the program passes validation for a
    concrete game; see :mod:`pibr.lang.validate`.
    """

    source: SourceText
    defs: list[tuple[str, tuple[str, ...], SExpr]]
    entry_param: str
    entry_body: SExpr
    n_actions: "int | None" = field(default=None)

    @property
    def validated(self) -> bool:
        return self.n_actions is not None


def _tokenize(text: str):
    """Yield (kind, value, line, col) with kind in {'(', ')', 'atom'}."""
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield (ch, ch, line, col)
            col += 1
            i += 1
        else:
            start, start_col = i, col
            while i < n and text[i] not in _ATOM_END:
                i += 1
                col += 1
            token = text[start:i]
            if _NUMBER_RE.match(token):
                yield ("atom", float(token), line, start_col)
            else:
                yield ("atom", token, line, start_col)


def read_forms(text: str) -> list[SExpr]:
    """Read all top-level s-expressions from ``text``."""
    forms: list[SExpr] = []
    stack: list[tuple[list[SExpr], int, int]] = []
    for kind, value, line, col in _tokenize(text):
        if kind == "(":
            stack.append(([], line, col))
        elif kind == ")":
            if not stack:
                raise ParseError("unexpected ')'", line, col)
            items, oline, ocol = stack.pop()
            node: SExpr = SList(tuple(items), oline, ocol)
            if stack:
                stack[-1][0].append(node)
            else:
                forms.append(node)
        else:
            node = Atom(value, line, col)
            if stack:
                stack[-1][0].append(node)
            else:
                forms.append(node)
    if stack:
        _, oline, ocol = stack[-1]
        raise ParseError("unbalanced parenthesis", oline, ocol)
    return forms


def _expect_symbol(node: SExpr, what: str) -> str:
    if not isinstance(node, Atom) or not node.is_symbol:
        raise ParseError(f"expected {what}", node.line, node.col)
    name = node.value
    if name in RESERVED:
        raise ParseError(f"reserved word '{name}' cannot be used as {what}",
                         node.line, node.col)
    return name


def _check_params(node: SExpr, what: str) -> tuple[str, ...]:
    if not isinstance(node, SList):
        raise ParseError(f"expected {what} parameter list", node.line, node.col)
    names = tuple(_expect_symbol(p, "a parameter name") for p in node.items)
    if len(set(names)) != len(names):
        raise ParseError(f"duplicate parameter in {what}", node.line, node.col)
    return names


def _check_expr(root: SExpr) -> None:
    """Validate special-form shapes everywhere in an expression tree."""
    todo = [root]
    while todo:
        node = todo.pop()
        if isinstance(node, Atom):
            continue
        if not node.items:
            raise ParseError("empty application '()'", node.line, node.col)
        head = node.items[0]
        if isinstance(head, Atom) and head.is_symbol and head.value in RESERVED:
            form = head.value
            args = node.items[1:]
            if form in ("def", "policy"):
                raise ParseError(f"'{form}' is only allowed at top level",
                                 node.line, node.col)
            if form == "if":
                if len(args) != 3:
                    raise ParseError("if takes exactly 3 arguments",
                                     node.line, node.col)
                todo.extend(args)
            elif form == "let":
                if len(args) != 2 or not isinstance(args[0], SList):
                    raise ParseError("let takes a binding list and a body",
                                     node.line, node.col)
                for binding in args[0].items:
                    if not isinstance(binding, SList) or len(binding.items) != 2:
                        raise ParseError("let binding must be (name expr)",
                                         binding.line, binding.col)
                    _expect_symbol(binding.items[0], "a binding name")
                    todo.append(binding.items[1])
                todo.append(args[1])
            elif form == "lambda":
                if len(args) != 2:
                    raise ParseError("lambda takes a parameter list and a body",
                                     node.line, node.col)
                _check_params(args[0], "lambda")
                todo.append(args[1])
            else:  # and / or
                todo.extend(args)
        else:
            todo.extend(node.items)


def parse(source: "SourceText | str") -> PolicyProgram:
    """Parse policy source into a :class:`PolicyProgram` (unvalidated)."""
    src = source if isinstance(source, SourceText) else SourceText.of(source)
    forms = read_forms(src.text)
    if not forms:
        raise ParseError("program is empty", 1, 1)

    defs: list[tuple[str, tuple[str, ...], SExpr]] = []
    seen: set[str] = set()
    for form in forms[:-1]:
        if not isinstance(form, SList) or not form.items:
            raise ParseError("expected (def ...) form", form.line, form.col)
        head = form.items[0]
        if isinstance(head, Atom) and head.value == "policy":
            raise ParseError("(policy ...) must be the final form",
                             form.line, form.col)
        if not (isinstance(head, Atom) and head.value == "def"):
            raise ParseError("only (def ...) may precede the policy form",
                             form.line, form.col)
        if len(form.items) != 4:
            raise ParseError("def takes a name, a parameter list and a body",
                             form.line, form.col)
        name = _expect_symbol(form.items[1], "a definition name")
        if name in seen:
            raise ParseError(f"duplicate definition '{name}'",
                             form.items[1].line, form.items[1].col)
        seen.add(name)
        params = _check_params(form.items[2], "def")
        _check_expr(form.items[3])
        defs.append((name, params, form.items[3]))

    last = forms[-1]
    if (not isinstance(last, SList) or not last.items
            or not (isinstance(last.items[0], Atom)
                    and last.items[0].value == "policy")):
        raise ParseError("program must end with (policy (h) body)",
                         last.line, last.col)
    if len(last.items) != 3:
        raise ParseError("policy takes a parameter list and a body",
                         last.line, last.col)
    params = _check_params(last.items[1], "policy")
    if len(params) != 1:
        raise ParseError("policy binds exactly one parameter (the history)",
                         last.items[1].line, last.items[1].col)
    _check_expr(last.items[2])

    return PolicyProgram(source=src, defs=defs,
                         entry_param=params[0], entry_body=last.items[2])
