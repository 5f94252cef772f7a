"""
Expression language used by scene configs.

Exports:
    - parse: text -> ExprAST
    - evaluate / derivative / directional_derivative / substitute / print_expr
"""

from apps.expr.parser import parse
from apps.expr.schemas import CONSTANTS, FUNCTIONS, ExprAST, Expression, Number, Symbol, free_symbols
from apps.expr.service import (
    compile_array,
    compile_scalar,
    constant,
    derivative,
    directional_derivative,
    evaluate,
    gradient,
    lift,
    print_expr,
    rename,
    simplify,
    substitute,
)

__all__ = [
    "CONSTANTS",
    "FUNCTIONS",
    "ExprAST",
    "Expression",
    "Number",
    "Symbol",
    "compile_array",
    "compile_scalar",
    "constant",
    "derivative",
    "directional_derivative",
    "evaluate",
    "free_symbols",
    "gradient",
    "lift",
    "parse",
    "print_expr",
    "rename",
    "simplify",
    "substitute",
]
