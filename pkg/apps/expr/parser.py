# apps/expr/parser.py
"""Recursive-descent parser for the config expression language.

Grammar (precedence low to high)::

    expression := term (("+" | "-") term)*
    term       := unary (("*" | "/") unary)*
    unary      := "-" unary | power
    power      := atom ("^" unary)?          # right-associative
    atom       := NUMBER | IDENT | IDENT "(" args ")" | "(" expression ")"
    args       := expression ("," expression)*
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, List, Sequence

from apps.core.exceptions import ExprSyntaxError, UnknownFunction, UnknownVariable
from apps.expr.schemas import (
    CONSTANTS,
    FUNCTIONS,
    Add,
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
)

MAX_DEPTH = 100

_NUMBER = re.compile(r"([0-9]+\.?[0-9]*|\.[0-9]+)([eE][+-]?[0-9]+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_WHITESPACE = " \t\r\n"
_PUNCT = {"+", "-", "*", "/", "^", "(", ")", ","}


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | op | end
    text: str
    offset: int  # character offset, converted to bytes on error


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text

    def tokens(self) -> List[Token]:
        text = self.text
        out: List[Token] = []
        i = 0
        while i < len(text):
            ch = text[i]
            if ch in _WHITESPACE:
                i += 1
                continue
            if ch in _PUNCT:
                out.append(Token("op", ch, i))
                i += 1
                continue
            match = _NUMBER.match(text, i)
            if match:
                out.append(Token("number", match.group(0), i))
                i = match.end()
                continue
            match = _IDENT.match(text, i)
            if match:
                out.append(Token("ident", match.group(0), i))
                i = match.end()
                continue
            raise ExprSyntaxError(
                f"unexpected character {ch!r}",
                offset=_byte_offset(text, i),
                expected={"number", "identifier", "operator", "(", ")"},
            )
        out.append(Token("end", "", len(text)))
        return out


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8", errors="surrogatepass"))


class Parser:
    """Parse one expression over a declared variable list."""

    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text
        self.variables = tuple(variables)
        self.tokens = _Tokenizer(text).tokens()
        self.pos = 0
        self.depth = 0

    # token helpers

    def _peek(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind != "end":
            self.pos += 1
        return token

    def _error(self, token: Token, expected: Iterable[str], message: str = "") -> ExprSyntaxError:
        found = token.text or "end of input"
        return ExprSyntaxError(
            message or f"unexpected {found!r}",
            offset=_byte_offset(self.text, token.offset),
            expected=expected,
        )

    def _expect(self, text: str) -> Token:
        token = self._peek()
        if token.kind == "op" and token.text == text:
            return self._advance()
        raise self._error(token, {text})

    def _enter(self, token: Token) -> None:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self._error(token, {"shallower nesting"}, "expression nested too deeply")

    # grammar

    def parse(self) -> Expression:
        root = self._expression()
        token = self._peek()
        if token.kind != "end":
            raise self._error(token, {"+", "-", "*", "/", "^", "end of input"})
        return root

    def _expression(self) -> Expression:
        left = self._term()
        while True:
            token = self._peek()
            if token.kind == "op" and token.text in ("+", "-"):
                self._advance()
                right = self._term()
                left = Add(left, right) if token.text == "+" else Sub(left, right)
            else:
                return left

    def _term(self) -> Expression:
        left = self._unary()
        while True:
            token = self._peek()
            if token.kind == "op" and token.text in ("*", "/"):
                self._advance()
                right = self._unary()
                left = Mul(left, right) if token.text == "*" else Div(left, right)
            else:
                return left

    def _unary(self) -> Expression:
        token = self._peek()
        if token.kind == "op" and token.text == "-":
            self._advance()
            self._enter(token)
            operand = self._unary()
            self.depth -= 1
            return Neg(operand)
        return self._power()

    def _power(self) -> Expression:
        base = self._atom()
        token = self._peek()
        if token.kind == "op" and token.text == "^":
            self._advance()
            self._enter(token)
            exponent = self._unary()
            self.depth -= 1
            return Pow(base, exponent)
        return base

    def _atom(self) -> Expression:
        token = self._peek()
        if token.kind == "number":
            self._advance()
            value = float(token.text)
            if not math.isfinite(value):
                raise self._error(token, {"finite number"}, f"literal {token.text!r} is not finite")
            return Number(value)

        if token.kind == "ident":
            self._advance()
            name = token.text
            following = self._peek()
            if following.kind == "op" and following.text == "(":
                if name not in FUNCTIONS:
                    raise UnknownFunction(name, offset=_byte_offset(self.text, token.offset))
                return self._call(name, following)
            if name in CONSTANTS:
                return Constant(name)
            if name in FUNCTIONS:
                raise self._error(following, {"("})
            if name not in self.variables:
                raise UnknownVariable(name, offset=_byte_offset(self.text, token.offset))
            return Symbol(name)

        if token.kind == "op" and token.text == "(":
            self._advance()
            self._enter(token)
            inner = self._expression()
            self.depth -= 1
            self._expect(")")
            return inner

        raise self._error(token, {"number", "identifier", "(", "-"})

    def _call(self, name: str, open_token: Token) -> Expression:
        self._advance()  # "("
        self._enter(open_token)
        args = [self._expression()]
        while self._peek().kind == "op" and self._peek().text == ",":
            self._advance()
            args.append(self._expression())
        self.depth -= 1
        closing = self._peek()
        if len(args) != FUNCTIONS[name]:
            raise self._error(
                closing,
                {f"{FUNCTIONS[name]} argument(s) for {name}"},
                f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}",
            )
        self._expect(")")
        return Call(name, tuple(args))


def parse(source: str | bytes, variables: Sequence[str] = ()) -> ExprAST:
    """
    Parse expression text into an ExprAST.

    Args:
        source: UTF-8 text (bytes are decoded; invalid UTF-8 is a syntax error)
        variables: Ordered declared variable names (at most 3)

    Returns:
        ExprAST over `variables`

    Raises:
        ExprSyntaxError: Malformed input, with byte offset and expected tokens
        UnknownFunction: Call of a name outside the supported function set
        UnknownVariable: Variable not in `variables`
    """
    if isinstance(source, (bytes, bytearray)):
        try:
            text = bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ExprSyntaxError("input is not valid UTF-8", offset=exc.start, expected={"utf-8 text"}) from None
    else:
        text = source
    root = Parser(text, variables).parse()
    return ExprAST(root, tuple(variables))
