"""Deterministic tree-walking interpreter for the policy language.

Evaluation is total: every step burns fuel (default 100,000) and nesting
beyond depth 256 aborts, so arbitrary policy code terminates with a value
or a typed error in bounded time. The language itself has no randomness,
no I/O and no mutation; list builtins return fresh lists, which lets the
rollout engine share history structures across evaluations safely.

Values are 64-bit reals, booleans, lists, and (transiently) functions.
Number results must stay finite; overflow to inf/nan raises.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Any, Callable, Optional

from ..errors import (
    ArityError,
    DepthExceededError,
    FuelExhaustedError,
    InvalidDistributionError,
    PolicyRuntimeError,
)
from .parser import RESERVED, Atom, PolicyProgram, SExpr, SList

DEFAULT_FUEL = 100_000
MAX_DEPTH = 256

DIST_SUM_TOL = 1e-6
DIST_NEG_TOL = -1e-9


class _Fuel:
    __slots__ = ("remaining",)

    def __init__(self, remaining: int):
        self.remaining = remaining


class Env:
    """Chained lexical environment."""

    __slots__ = ("table", "parent")

    def __init__(self, table: dict, parent: "Optional[Env]" = None):
        self.table = table
        self.parent = parent

    def lookup(self, name: str, node: SExpr):
        env: Optional[Env] = self
        while env is not None:
            if name in env.table:
                return env.table[name]
            env = env.parent
        raise PolicyRuntimeError(f"unbound symbol '{name}'", node.line, node.col)


@dataclass(frozen=True)
class Closure:
    params: tuple[str, ...]
    body: SExpr
    env: Env
    name: str = "lambda"


@dataclass(frozen=True)
class Builtin:
    name: str
    min_args: int
    max_args: "int | None"
    fn: Callable


def _err(msg: str, node: SExpr) -> PolicyRuntimeError:
    return PolicyRuntimeError(msg, node.line, node.col)


def _num(x, node: SExpr) -> float:
    if type(x) is not float:
        raise _err(f"expected a number, got {_type_name(x)}", node)
    return x

def _int_index(x, node: SExpr) -> int:
    v = _num(x, node)
    if not v.is_integer():
        raise _err(f"expected an integer, got {v!r}", node)
    return int(v)


def _bool(x, node: SExpr) -> bool:
    if type(x) is not bool:
        raise _err(f"expected a boolean, got {_type_name(x)}", node)
    return x


def _lst(x, node: SExpr) -> list:
    if type(x) is not list:
        raise _err(f"expected a list, got {_type_name(x)}", node)
    return x


def _type_name(x) -> str:
    if type(x) is float:
        return "number"
    if type(x) is bool:
        return "boolean"
    if type(x) is list:
        return "list"
    return "function"


def _finite(v: float, node: SExpr) -> float:
    if not math.isfinite(v):
        raise _err("non-finite arithmetic result", node)
    return v


def values_equal(a, b) -> bool:
    """Structural equality; mismatched kinds compare unequal."""
    if type(a) is not type(b):
        return False
    if type(a) is list:
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    if type(a) is float or type(a) is bool:
        return a == b
    return a is b


def _arith_add(interp, args, node):
    total = _num(args[0], node)
    for x in args[1:]:
        total = _finite(total + _num(x, node), node)
    return total


def _arith_sub(interp, args, node):
    if len(args) == 1:
        return -_num(args[0], node)
    total = _num(args[0], node)
    for x in args[1:]:
        total = _finite(total - _num(x, node), node)
    return total


def _arith_mul(interp, args, node):
    total = _num(args[0], node)
    for x in args[1:]:
        total = _finite(total * _num(x, node), node)
    return total


def _arith_div(interp, args, node):
    total = _num(args[0], node)
    for x in args[1:]:
        d = _num(x, node)
        if d == 0.0:
            raise _err("division by zero", node)
        total = _finite(total / d, node)
    return total


def _arith_mod(interp, args, node):
    a, b = _num(args[0], node), _num(args[1], node)
    if b == 0.0:
        raise _err("modulo by zero", node)
    return _finite(a % b, node)


def _cmp(op):
    def fn(interp, args, node):
        return op(_num(args[0], node), _num(args[1], node))
    return fn


def _builtin_list(interp, args, node):
    interp.charge(len(args), node)
    return list(args)


def _builtin_get(interp, args, node):
    xs = _lst(args[0], node)
    i = _int_index(args[1], node)
    if i < 0 or i >= len(xs):
        raise _err(f"index {i} out of bounds for list of length {len(xs)}", node)
    return xs[i]


def _builtin_append(interp, args, node):
    xs = _lst(args[0], node)
    interp.charge(len(xs) + 1, node)
    return xs + [args[1]]


def _builtin_range(interp, args, node):
    if len(args) == 1:
        lo, hi = 0, _int_index(args[0], node)
    else:
        lo, hi = _int_index(args[0], node), _int_index(args[1], node)
    count = max(0, hi - lo)
    interp.charge(count, node)
    return [float(i) for i in range(lo, hi)]


def _builtin_fold(interp, args, node):
    fn, acc, xs = args[0], args[1], _lst(args[2], node)
    if not isinstance(fn, (Closure, Builtin)):
        raise _err("fold expects a function as its first argument", node)
    for x in xs:
        acc = interp.apply(fn, [acc, x], node, 0)
    return acc


def _builtin_minmax(py_op):
    def fn(interp, args, node):
        best = _num(args[0], node)
        for x in args[1:]:
            best = py_op(best, _num(x, node))
        return best
    return fn


BUILTINS: dict[str, Builtin] = {}


def _register(name, min_args, max_args, fn):
    BUILTINS[name] = Builtin(name, min_args, max_args, fn)


_register("+", 1, None, _arith_add)
_register("-", 1, None, _arith_sub)
_register("*", 1, None, _arith_mul)
_register("/", 2, None, _arith_div)
_register("%", 2, 2, _arith_mod)
_register("<", 2, 2, _cmp(lambda a, b: a < b))
_register("<=", 2, 2, _cmp(lambda a, b: a <= b))
_register(">", 2, 2, _cmp(lambda a, b: a > b))
_register(">=", 2, 2, _cmp(lambda a, b: a >= b))
_register("=", 2, 2, lambda i, a, n: values_equal(a[0], a[1]))
_register("!=", 2, 2, lambda i, a, n: not values_equal(a[0], a[1]))
_register("not", 1, 1, lambda i, a, n: not _bool(a[0], n))
_register("abs", 1, 1, lambda i, a, n: abs(_num(a[0], n)))
_register("floor", 1, 1, lambda i, a, n: float(math.floor(_num(a[0], n))))
_register("min", 1, None, _builtin_minmax(min))
_register("max", 1, None, _builtin_minmax(max))
_register("len", 1, 1, lambda i, a, n: float(len(_lst(a[0], n))))
_register("list", 0, None, _builtin_list)
_register("get", 2, 2, _builtin_get)
_register("append", 2, 2, _builtin_append)
_register("range", 1, 2, _builtin_range)
_register("fold", 3, 3, _builtin_fold)

_BASE_BINDINGS = dict(BUILTINS)
_BASE_BINDINGS["true"] = True
_BASE_BINDINGS["false"] = False


class _Interp:
    __slots__ = ("fuel",)

    def __init__(self, fuel: int):
        self.fuel = _Fuel(fuel)

    def charge(self, amount: int, node: SExpr):
        self.fuel.remaining -= amount
        if self.fuel.remaining < 0:
            raise FuelExhaustedError("fuel exhausted", node.line, node.col)

    def eval(self, node: SExpr, env: Env, depth: int):
        self.charge(1, node)
        if depth > MAX_DEPTH:
            raise DepthExceededError("evaluation depth exceeded",
                                     node.line, node.col)
        if isinstance(node, Atom):
            if not node.is_symbol:
                return node.value
            return env.lookup(node.value, node)

        head = node.items[0]
        if isinstance(head, Atom) and head.is_symbol and head.value in RESERVED:
            form = head.value
            if form == "if":
                cond = _bool(self.eval(node.items[1], env, depth + 1), node.items[1])
                branch = node.items[2] if cond else node.items[3]
                return self.eval(branch, env, depth + 1)
            if form == "let":
                bindings, body = node.items[1], node.items[2]
                scope = Env({}, env)
                for binding in bindings.items:  # type: ignore[union-attr]
                    name_node, expr = binding.items  # type: ignore[union-attr]
                    scope.table[name_node.value] = self.eval(expr, scope, depth + 1)
                return self.eval(body, scope, depth + 1)
            if form == "lambda":
                params = tuple(p.value for p in node.items[1].items)  # type: ignore[union-attr]
                return Closure(params, node.items[2], env)
            if form == "and":
                for arg in node.items[1:]:
                    if not _bool(self.eval(arg, env, depth + 1), arg):
                        return False
                return True
            if form == "or":
                for arg in node.items[1:]:
                    if _bool(self.eval(arg, env, depth + 1), arg):
                        return True
                return False

        fn = self.eval(head, env, depth + 1)
        args = [self.eval(arg, env, depth + 1) for arg in node.items[1:]]
        return self.apply(fn, args, node, depth)

    def apply(self, fn, args: list, node: SExpr, depth: int):
        if isinstance(fn, Builtin):
            n = len(args)
            if n < fn.min_args or (fn.max_args is not None and n > fn.max_args):
                raise ArityError(
                    f"'{fn.name}' called with {n} argument(s)",
                    node.line, node.col)
            return fn.fn(self, args, node)
        if isinstance(fn, Closure):
            if len(args) != len(fn.params):
                raise ArityError(
                    f"'{fn.name}' expects {len(fn.params)} argument(s), "
                    f"got {len(args)}", node.line, node.col)
            scope = Env(dict(zip(fn.params, args)), fn.env)
            return self.eval(fn.body, scope, depth + 1)
        raise _err(f"{_type_name(fn)} is not callable", node)


def make_history_value(states, actions) -> list:
    """Encode a history as the two-element [states, actions] language value."""
    return [[list(map(float, s)) for s in states],
            [[float(a) for a in pair] for pair in actions]]


def evaluate_value(program: PolicyProgram, history_value: list,
                   fuel: int = DEFAULT_FUEL):
    """Evaluate the policy entry on a prebuilt history value.

    Hot path for rollouts: the caller may share (immutable-by-language)
    list structure across steps. Returns whatever the policy body produced.
    """
    interp = _Interp(fuel)
    root = Env(dict(_BASE_BINDINGS))
    for name, params, body in program.defs:
        root.table[name] = Closure(params, body, root, name)
    scope = Env({program.entry_param: history_value}, root)
    return interp.eval(program.entry_body, scope, 0)


def evaluate_policy(program: PolicyProgram, history,
                    fuel: int = DEFAULT_FUEL):
    """Evaluate the policy on a :class:`pibr.games.History`-like object.

    The history reaches the program as ``[states, actions]`` where states is
    a list of flat numeric state vectors and actions a list of [a0, a1]
    pairs. Raises the language's typed errors on failure.
    """
    return evaluate_value(
        program, make_history_value(history.states, history.actions), fuel)


def coerce_distribution(value, n_actions: int) -> list[float]:
    """Check and normalize a policy output into a probability vector.

    Entries in [-1e-9, 0) are clamped to zero and the vector renormalized;
    anything else malformed raises ``InvalidDistributionError``.
    """
    def bad(msg: str) -> InvalidDistributionError:
        return InvalidDistributionError(msg)

    if type(value) is not list:
        raise bad(f"policy returned {_type_name(value)}, expected a list")
    if len(value) != n_actions:
        raise bad(f"expected {n_actions} entries, got {len(value)}")
    out = []
    for i, x in enumerate(value):
        if type(x) is not float:
            raise bad(f"entry {i} is not a number")
        if not math.isfinite(x):
            raise bad(f"entry {i} is not finite")
        if x < DIST_NEG_TOL:
            raise bad(f"entry {i} is negative ({x:.6g})")
        out.append(max(x, 0.0))
    total = math.fsum(out)
    if abs(total - 1.0) > DIST_SUM_TOL:
        raise bad(f"distribution sums to {total:.6g}, expected 1")
    return [x / total for x in out]


def sample(dist: list[float], stream: random.Random) -> int:
    """Inverse-CDF draw from a normalized distribution."""
    u = stream.random()
    acc = 0.0
    for i, p in enumerate(dist):
        acc += p
        if u < acc:
            return i
    return len(dist) - 1


GRAMMAR_DOC = """\
Policy language reference
=========================

A policy is a program in a small parenthesized prefix language:

    program    = {definition} policy
    definition = (def name (param ...) body)
    policy     = (policy (h) body)

Expressions: number literals (64-bit reals), symbols,
(if cond then else), (let ((name expr) ...) body) with sequential bindings,
(lambda (param ...) body), short-circuit (and ...) / (or ...), and
applications of builtins or defined functions. Comments run from ';' to
end of line. The constants true and false are predefined.

Builtins: + - * / % < <= > >= = != not abs min max floor len list get
append range fold. get indexes a list (0-based); append returns a new
list with one element added; (range n) or (range a b) builds an integer
sequence; (fold f init xs) left-folds f over xs. Conditions must be
booleans; arithmetic must stay finite; there is no mutation, I/O or
randomness.

Calling convention: the single parameter h is the interaction history,
a two-element list [states actions]. states is a list of flat numeric
state vectors, oldest first; the current state is the last element.
actions is a list of [a0 a1] joint-action pairs, one per completed step
(so (len (get h 1)) is the number of steps played). The policy must
return a list of action probabilities: one entry per action, each >= 0,
summing to 1.

Execution is fuel-limited (100000 steps) with call depth capped at 256;
exceeding either aborts the policy.
"""
