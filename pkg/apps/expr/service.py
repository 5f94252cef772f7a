# apps/expr/service.py
"""Evaluation, printing and symbolic differentiation of expression trees."""

from __future__ import annotations

import math
from functools import singledispatch
from typing import Any, Callable, Dict, Mapping, Sequence, Tuple, Union

import numpy as np

from apps.core.exceptions import DomainError, ExprError, NonDifferentiable, UnknownVariable
from apps.expr.schemas import (
    Add,
    BinaryOp,
    Call,
    Constant,
    Div,
    ExprAST,
    Expression,
    Mul,
    Neg,
    Number,
    Pow,
    Sub,
    Symbol,
    coerce,
    free_symbols,
)

Node = Union[ExprAST, Expression]


def _root(node: Node) -> Expression:
    return node.root if isinstance(node, ExprAST) else node


# Scalar backend (math)

def _checked(value: float, operand: Any) -> float:
    if not math.isfinite(value):
        raise DomainError("overflow", operand=operand)
    return value


def _s_div(a: float, b: float) -> float:
    if b == 0.0:
        raise DomainError("/", operand=a)
    return _checked(a / b, (a, b))


def _s_pow(op: str) -> Callable[[float, float], float]:
    def power(a: float, b: float) -> float:
        try:
            return _checked(math.pow(a, b), (a, b))
        except ValueError:
            raise DomainError(op, operand=(a, b)) from None
        except OverflowError:
            raise DomainError("overflow", operand=(a, b)) from None
    return power


def _s_log(x: float) -> float:
    if x <= 0.0:
        raise DomainError("log", operand=x)
    return math.log(x)


def _s_sqrt(x: float) -> float:
    if x < 0.0:
        raise DomainError("sqrt", operand=x)
    return math.sqrt(x)


def _s_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        raise DomainError("overflow", operand=x) from None


def _s_sech(x: float) -> float:
    q = math.exp(-abs(x))
    return 2.0 * q / (1.0 + q * q)


def _s_tan(x: float) -> float:
    return _checked(math.tan(x), x)


_SCALAR_BINARY: Dict[type, Callable[[float, float], float]] = {
    Add: lambda a, b: _checked(a + b, (a, b)),
    Sub: lambda a, b: _checked(a - b, (a, b)),
    Mul: lambda a, b: _checked(a * b, (a, b)),
    Div: _s_div,
    Pow: _s_pow("^"),
}

_SCALAR_FUNCTIONS: Dict[str, Callable[..., float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": _s_tan,
    "tanh": math.tanh,
    "sech": _s_sech,
    "exp": _s_exp,
    "log": _s_log,
    "sqrt": _s_sqrt,
    "abs": abs,
    "pow": _s_pow("pow"),
}


def _scalar_node(node: Expression, index: Mapping[str, int]) -> Callable[[Tuple[float, ...]], float]:
    if isinstance(node, Number):
        value = node.value
        return lambda vals: value
    if isinstance(node, Constant):
        value = node.value
        return lambda vals: value
    if isinstance(node, Symbol):
        position = index[node.name]
        return lambda vals: vals[position]
    if isinstance(node, Neg):
        inner = _scalar_node(node.operand, index)
        return lambda vals: -inner(vals)
    if isinstance(node, BinaryOp):
        left = _scalar_node(node.left, index)
        right = _scalar_node(node.right, index)
        op = _SCALAR_BINARY[type(node)]
        return lambda vals: op(left(vals), right(vals))
    if isinstance(node, Call):
        fn = _SCALAR_FUNCTIONS[node.func]
        args = [_scalar_node(arg, index) for arg in node.args]
        if len(args) == 1:
            only = args[0]
            return lambda vals: fn(only(vals))
        first, second = args
        return lambda vals: fn(first(vals), second(vals))
    raise ExprError(f"cannot evaluate node {node!r}")


def compile_scalar(root: Node, variables: Sequence[str]) -> Callable[..., float]:
    """Compile a tree into a float callable taking arguments in `variables` order."""
    variables = tuple(variables)
    index = {name: i for i, name in enumerate(variables)}
    body = _scalar_node(_root(root), index)
    arity = len(variables)

    def evaluate_scalar(*args: float) -> float:
        if len(args) != arity:
            raise ExprError(f"expected {arity} argument(s), got {len(args)}", variables=list(variables))
        return body(tuple(float(a) for a in args))

    return evaluate_scalar


# Array backend (numpy)

def _first_offender(values: np.ndarray, mask: np.ndarray) -> float:
    values, mask = np.broadcast_arrays(np.asarray(values, dtype=float), np.asarray(mask))
    return float(values[mask][0])


def _a_div(a, b):
    zero = np.asarray(b == 0.0)
    if zero.any():
        raise DomainError("/", operand=_first_offender(np.asarray(a, dtype=float), zero))
    return a / b


def _a_pow(op: str):
    def power(a, b):
        a_arr = np.asarray(a, dtype=float)
        b_arr = np.asarray(b, dtype=float)
        bad = np.asarray(((a_arr < 0.0) & (b_arr != np.floor(b_arr))) | ((a_arr == 0.0) & (b_arr < 0.0)))
        if bad.any():
            raise DomainError(op, operand=_first_offender(a_arr, bad))
        return np.power(a_arr, b_arr)
    return power


def _a_log(x):
    bad = np.asarray(x <= 0.0)
    if bad.any():
        raise DomainError("log", operand=_first_offender(np.asarray(x, dtype=float), bad))
    return np.log(x)


def _a_sqrt(x):
    bad = np.asarray(x < 0.0)
    if bad.any():
        raise DomainError("sqrt", operand=_first_offender(np.asarray(x, dtype=float), bad))
    return np.sqrt(x)


def _a_sech(x):
    q = np.exp(-np.abs(x))
    return 2.0 * q / (1.0 + q * q)


_ARRAY_BINARY: Dict[type, Callable[[Any, Any], Any]] = {
    Add: np.add,
    Sub: np.subtract,
    Mul: np.multiply,
    Div: _a_div,
    Pow: _a_pow("^"),
}

_ARRAY_FUNCTIONS: Dict[str, Callable[..., Any]] = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "tanh": np.tanh,
    "sech": _a_sech,
    "exp": np.exp,
    "log": _a_log,
    "sqrt": _a_sqrt,
    "abs": np.abs,
    "pow": _a_pow("pow"),
}


def _finite_array(values):
    arr = np.asarray(values, dtype=float)
    bad = ~np.isfinite(arr)
    if bad.any():
        raise DomainError("overflow", operand=_first_offender(arr, bad))
    return values


def _array_node(node: Expression, index: Mapping[str, int]) -> Callable[[Sequence[np.ndarray]], Any]:
    if isinstance(node, (Number, Constant)):
        value = node.value
        return lambda arrays: value
    if isinstance(node, Symbol):
        position = index[node.name]
        return lambda arrays: arrays[position]
    if isinstance(node, Neg):
        inner = _array_node(node.operand, index)
        return lambda arrays: np.negative(inner(arrays))
    if isinstance(node, BinaryOp):
        left = _array_node(node.left, index)
        right = _array_node(node.right, index)
        op = _ARRAY_BINARY[type(node)]
        return lambda arrays: _finite_array(op(left(arrays), right(arrays)))
    if isinstance(node, Call):
        fn = _ARRAY_FUNCTIONS[node.func]
        args = [_array_node(arg, index) for arg in node.args]
        return lambda arrays: _finite_array(fn(*(arg(arrays) for arg in args)))
    raise ExprError(f"cannot evaluate node {node!r}")


def compile_array(root: Node, variables: Sequence[str]) -> Callable[..., np.ndarray]:
    """Compile a tree into a numpy callable; arguments broadcast against each other."""
    variables = tuple(variables)
    index = {name: i for i, name in enumerate(variables)}
    body = _array_node(_root(root), index)
    arity = len(variables)

    def evaluate_array(*args) -> np.ndarray:
        if len(args) != arity:
            raise ExprError(f"expected {arity} argument(s), got {len(args)}", variables=list(variables))
        arrays = [np.asarray(a, dtype=float) for a in args]
        shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
        with np.errstate(all="ignore"):
            result = body(arrays)
        return np.array(np.broadcast_to(np.asarray(result, dtype=float), shape))

    return evaluate_array


def evaluate(ast: ExprAST, bindings: Mapping[str, float]) -> float:
    """
    Evaluate an expression at named bindings.

    Raises:
        UnknownVariable: A declared variable has no binding
        DomainError: log/sqrt/division/pow domain violations or overflow
    """
    args = []
    for name in ast.variables:
        if name not in bindings:
            raise UnknownVariable(name)
        value = float(bindings[name])
        if not math.isfinite(value):
            raise ExprError(f"binding for '{name}' is not finite", name=name, value=value)
        args.append(value)
    return ast(*args)


# Printing

def _print_node(node: Expression) -> str:
    if isinstance(node, Number):
        text = repr(float(node.value))
        return f"(-{text[1:]})" if node.value < 0 or text.startswith("-") else text
    if isinstance(node, (Constant, Symbol)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{_print_node(node.operand)})"
    if isinstance(node, BinaryOp):
        return f"({_print_node(node.left)} {node.op_symbol} {_print_node(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({', '.join(_print_node(arg) for arg in node.args)})"
    raise ExprError(f"cannot print node {node!r}")


def print_expr(ast: Node) -> str:
    """Deterministic, fully parenthesized text form that parses back to the same tree."""
    return _print_node(_root(ast))


# Smart constructors (constant folding)

def _is_number(node: Expression, value: float | None = None) -> bool:
    return isinstance(node, Number) and (value is None or node.value == value)


def _fold(op: Callable[..., float], *args: Expression) -> Expression | None:
    try:
        return Number(op(*(arg.value for arg in args)))
    except (DomainError, ZeroDivisionError):
        return None


def mk_neg(a: Expression) -> Expression:
    if isinstance(a, Number):
        return Number(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def mk_add(a: Expression, b: Expression) -> Expression:
    if _is_number(a) and _is_number(b):
        return _fold(_SCALAR_BINARY[Add], a, b) or Add(a, b)
    if _is_number(a, 0.0):
        return b
    if _is_number(b, 0.0):
        return a
    return Add(a, b)


def mk_sub(a: Expression, b: Expression) -> Expression:
    if _is_number(a) and _is_number(b):
        return _fold(_SCALAR_BINARY[Sub], a, b) or Sub(a, b)
    if _is_number(b, 0.0):
        return a
    if _is_number(a, 0.0):
        return mk_neg(b)
    return Sub(a, b)


def mk_mul(a: Expression, b: Expression) -> Expression:
    if _is_number(a) and _is_number(b):
        return _fold(_SCALAR_BINARY[Mul], a, b) or Mul(a, b)
    if _is_number(a, 0.0) or _is_number(b, 0.0):
        return Number(0.0)
    if _is_number(a, 1.0):
        return b
    if _is_number(b, 1.0):
        return a
    return Mul(a, b)


def mk_div(a: Expression, b: Expression) -> Expression:
    if _is_number(a) and _is_number(b):
        return _fold(_SCALAR_BINARY[Div], a, b) or Div(a, b)
    if _is_number(a, 0.0) and not _is_number(b, 0.0):
        return Number(0.0)
    if _is_number(b, 1.0):
        return a
    return Div(a, b)


def mk_pow(a: Expression, b: Expression) -> Expression:
    if _is_number(a) and _is_number(b):
        return _fold(_SCALAR_BINARY[Pow], a, b) or Pow(a, b)
    if _is_number(b, 1.0):
        return a
    if _is_number(b, 0.0):
        return Number(1.0)
    return Pow(a, b)


def mk_call(func: str, *args: Expression) -> Expression:
    if all(isinstance(arg, Number) for arg in args):
        folded = _fold(_SCALAR_FUNCTIONS[func], *args)
        if folded is not None:
            return folded
    return Call(func, tuple(args))


_BUILDERS = {Add: mk_add, Sub: mk_sub, Mul: mk_mul, Div: mk_div, Pow: mk_pow}


def _simplify_node(node: Expression) -> Expression:
    if isinstance(node, Neg):
        return mk_neg(_simplify_node(node.operand))
    if isinstance(node, BinaryOp):
        return _BUILDERS[type(node)](_simplify_node(node.left), _simplify_node(node.right))
    if isinstance(node, Call):
        return mk_call(node.func, *(_simplify_node(arg) for arg in node.args))
    return node


def simplify(ast: Node) -> Node:
    """Constant-fold a tree. Returns the same kind of object it was given."""
    if isinstance(ast, ExprAST):
        return ExprAST(_simplify_node(ast.root), ast.variables)
    return _simplify_node(ast)


# Differentiation

@singledispatch
def _diff(node: Expression, var: str) -> Expression:
    raise NonDifferentiable(type(node).__name__)


@_diff.register
def _(node: Number, var: str) -> Expression:
    return Number(0.0)


@_diff.register
def _(node: Constant, var: str) -> Expression:
    return Number(0.0)


@_diff.register
def _(node: Symbol, var: str) -> Expression:
    return Number(1.0 if node.name == var else 0.0)


@_diff.register
def _(node: Neg, var: str) -> Expression:
    return mk_neg(_d(node.operand, var))


@_diff.register
def _(node: Add, var: str) -> Expression:
    return mk_add(_d(node.left, var), _d(node.right, var))


@_diff.register
def _(node: Sub, var: str) -> Expression:
    return mk_sub(_d(node.left, var), _d(node.right, var))


@_diff.register
def _(node: Mul, var: str) -> Expression:
    a, b = node.left, node.right
    return mk_add(mk_mul(_d(a, var), b), mk_mul(a, _d(b, var)))


@_diff.register
def _(node: Div, var: str) -> Expression:
    a, b = node.left, node.right
    numerator = mk_sub(mk_mul(_d(a, var), b), mk_mul(a, _d(b, var)))
    return mk_div(numerator, mk_pow(b, Number(2.0)))


def _diff_power(a: Expression, b: Expression, var: str) -> Expression:
    da = _d(a, var)
    if var not in free_symbols(b):
        return mk_mul(mk_mul(b, mk_pow(a, mk_sub(b, Number(1.0)))), da)
    # a^b * (b' log a + b a' / a)
    inner = mk_add(mk_mul(_d(b, var), mk_call("log", a)), mk_div(mk_mul(b, da), a))
    return mk_mul(Pow(a, b), inner)


@_diff.register
def _(node: Pow, var: str) -> Expression:
    return _diff_power(node.left, node.right, var)


@_diff.register
def _(node: Call, var: str) -> Expression:
    if node.func == "pow":
        return _diff_power(node.args[0], node.args[1], var)
    a = node.args[0]
    if node.func == "abs":
        raise NonDifferentiable("abs")
    outer = _OUTER_DERIVATIVES[node.func](a)
    return mk_mul(outer, _d(a, var))


_OUTER_DERIVATIVES: Dict[str, Callable[[Expression], Expression]] = {
    "sin": lambda a: mk_call("cos", a),
    "cos": lambda a: mk_neg(mk_call("sin", a)),
    "tan": lambda a: mk_add(Number(1.0), mk_pow(mk_call("tan", a), Number(2.0))),
    "tanh": lambda a: mk_pow(mk_call("sech", a), Number(2.0)),
    "sech": lambda a: mk_neg(mk_mul(mk_call("sech", a), mk_call("tanh", a))),
    "exp": lambda a: mk_call("exp", a),
    "log": lambda a: mk_div(Number(1.0), a),
    "sqrt": lambda a: mk_div(Number(1.0), mk_mul(Number(2.0), mk_call("sqrt", a))),
}


def _d(node: Expression, var: str) -> Expression:
    if var not in free_symbols(node):
        return Number(0.0)
    return _diff(node, var)


def derivative(ast: ExprAST, var: str) -> ExprAST:
    """
    Exact symbolic derivative of `ast` with respect to `var`.

    abs is rejected when its argument depends on `var`.

    Raises:
        UnknownVariable: `var` is not declared on `ast`
        NonDifferentiable: abs of a `var`-dependent argument
    """
    if var not in ast.variables:
        raise UnknownVariable(var)
    return ExprAST(_simplify_node(_d(ast.root, var)), ast.variables)


def gradient(ast: ExprAST) -> Tuple[ExprAST, ...]:
    return tuple(derivative(ast, name) for name in ast.variables)


def directional_derivative(ast: ExprAST, direction: Sequence[Any]) -> ExprAST:
    """
    Symbolic θ·∇ of `ast`.

    `direction` holds one component per declared variable; components may be
    numbers or expressions over the same variables (a vector field).
    """
    if len(direction) != len(ast.variables):
        raise ExprError(
            f"direction has {len(direction)} components, expression has {len(ast.variables)} variables"
        )
    total: Expression = Number(0.0)
    for name, component in zip(ast.variables, direction):
        comp = _root(component) if isinstance(component, (ExprAST, Expression)) else coerce(component)
        total = mk_add(total, mk_mul(comp, _d(ast.root, name)))
    return ExprAST(_simplify_node(total), ast.variables)


# Rewriting

def _substitute_node(node: Expression, mapping: Mapping[str, Expression]) -> Expression:
    if isinstance(node, Symbol):
        return mapping.get(node.name, node)
    if isinstance(node, Neg):
        return Neg(_substitute_node(node.operand, mapping))
    if isinstance(node, BinaryOp):
        return type(node)(_substitute_node(node.left, mapping), _substitute_node(node.right, mapping))
    if isinstance(node, Call):
        return Call(node.func, tuple(_substitute_node(arg, mapping) for arg in node.args))
    return node


def substitute(ast: ExprAST, mapping: Mapping[str, Any], variables: Sequence[str]) -> ExprAST:
    """
    Replace variables by sub-expressions.

    Args:
        ast: Expression to rewrite
        mapping: variable name -> ExprAST, Expression or number
        variables: Variable list of the result

    Returns:
        New ExprAST over `variables`
    """
    replacements = {
        name: _root(value) if isinstance(value, (ExprAST, Expression)) else coerce(value)
        for name, value in mapping.items()
    }
    return ExprAST(_substitute_node(ast.root, replacements), tuple(variables))


def rename(ast: ExprAST, mapping: Mapping[str, str]) -> ExprAST:
    new_variables = tuple(mapping.get(name, name) for name in ast.variables)
    return substitute(ast, {old: Symbol(new) for old, new in mapping.items()}, new_variables)


def lift(ast: ExprAST, variables: Sequence[str]) -> ExprAST:
    """Re-declare `ast` over a wider variable list (e.g. f̃(x) as a field in (x, y))."""
    return ExprAST(ast.root, tuple(variables))


def constant(value: float, variables: Sequence[str] = ()) -> ExprAST:
    return ExprAST(Number(float(value)), tuple(variables))
