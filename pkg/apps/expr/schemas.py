# apps/expr/schemas.py
"""Expression tree node types and the ExprAST carrier."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Tuple

from apps.core.exceptions import ExprError

# name -> arity
FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "tanh": 1,
    "sech": 1,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "abs": 1,
    "pow": 2,
}

CONSTANTS = {"pi": math.pi, "e": math.e}

MAX_VARIABLES = 3


class Expression:
    """Base class for immutable expression nodes.

    Arithmetic operators build new nodes so derived expressions (fields,
    divergences, gauge generators) can be written naturally.
    """

    def __add__(self, other):
        return Add(self, coerce(other))

    def __radd__(self, other):
        return Add(coerce(other), self)

    def __sub__(self, other):
        return Sub(self, coerce(other))

    def __rsub__(self, other):
        return Sub(coerce(other), self)

    def __mul__(self, other):
        return Mul(self, coerce(other))

    def __rmul__(self, other):
        return Mul(coerce(other), self)

    def __truediv__(self, other):
        return Div(self, coerce(other))

    def __rtruediv__(self, other):
        return Div(coerce(other), self)

    def __pow__(self, other):
        return Pow(self, coerce(other))

    def __neg__(self):
        return Neg(self)


def coerce(value: Any) -> Expression:
    if isinstance(value, Expression):
        return value
    return Number(float(value))


@dataclass(frozen=True, eq=True)
class Number(Expression):
    value: float


@dataclass(frozen=True, eq=True)
class Constant(Expression):
    name: str

    @property
    def value(self) -> float:
        return CONSTANTS[self.name]


@dataclass(frozen=True, eq=True)
class Symbol(Expression):
    name: str


@dataclass(frozen=True, eq=True)
class Neg(Expression):
    operand: Expression


@dataclass(frozen=True, eq=True)
class BinaryOp(Expression):
    left: Expression
    right: Expression

    op_symbol = "?"


@dataclass(frozen=True, eq=True)
class Add(BinaryOp):
    op_symbol = "+"


@dataclass(frozen=True, eq=True)
class Sub(BinaryOp):
    op_symbol = "-"


@dataclass(frozen=True, eq=True)
class Mul(BinaryOp):
    op_symbol = "*"


@dataclass(frozen=True, eq=True)
class Div(BinaryOp):
    op_symbol = "/"


@dataclass(frozen=True, eq=True)
class Pow(BinaryOp):
    op_symbol = "^"


@dataclass(frozen=True, eq=True)
class Call(Expression):
    func: str
    args: Tuple[Expression, ...]


def free_symbols(node: Expression) -> set[str]:
    """Names of all variables referenced below `node`."""
    stack = [node]
    names: set[str] = set()
    while stack:
        current = stack.pop()
        if isinstance(current, Symbol):
            names.add(current.name)
        elif isinstance(current, Neg):
            stack.append(current.operand)
        elif isinstance(current, BinaryOp):
            stack.extend((current.left, current.right))
        elif isinstance(current, Call):
            stack.extend(current.args)
    return names


@dataclass(frozen=True)
class ExprAST:
    """A parsed expression together with its ordered variable list.

    Calling the object evaluates it at positional arguments in variable
    order using the scalar backend; `evaluate_array` uses numpy.
    """

    root: Expression
    variables: Tuple[str, ...] = ()
    _scalar: Callable[..., float] = field(default=None, init=False, repr=False, compare=False)
    _array: Callable[..., Any] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        variables = tuple(self.variables)
        if len(variables) > MAX_VARIABLES:
            raise ExprError(f"at most {MAX_VARIABLES} variables are supported", variables=list(variables))
        if len(set(variables)) != len(variables):
            raise ExprError("duplicate variable names", variables=list(variables))
        for name in variables:
            if name in FUNCTIONS or name in CONSTANTS:
                raise ExprError(f"'{name}' is reserved and cannot name a variable", name=name)
        missing = free_symbols(self.root) - set(variables)
        if missing:
            raise ExprError("expression references undeclared variables", names=sorted(missing))
        object.__setattr__(self, "variables", variables)

        # deferred import keeps schemas free of the evaluation backends
        from apps.expr.service import compile_scalar
        object.__setattr__(self, "_scalar", compile_scalar(self.root, variables))

    def __call__(self, *args: float) -> float:
        return self._scalar(*args)

    def evaluate_array(self, *args):
        if self._array is None:
            from apps.expr.service import compile_array
            object.__setattr__(self, "_array", compile_array(self.root, self.variables))
        return self._array(*args)

    @property
    def is_constant(self) -> bool:
        return not free_symbols(self.root)

    def __str__(self) -> str:
        from apps.expr.service import print_expr
        return print_expr(self)
