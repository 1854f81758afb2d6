"""
  Recursive-descent parser for formulas over x1, x2.

  Precedence, highest first: '^' (right-associative), unary minus, '*' '/',
  '+' '-'. Function calls take one parenthesised argument.
"""

import logging
import re
from dataclasses import dataclass

from invex2d.exceptions import ExpressionSyntaxError, UnknownIdentifierError
from invex2d.expression.nodes import (
    FUNCTIONS,
    Add,
    Const,
    Div,
    Expression,
    Mul,
    Neg,
    Pow,
    Sub,
    Var,
)

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),])"
)

VARIABLES = {"x1": Var(1), "x2": Var(2)}


@dataclass(frozen=True)
class Token:
    kind: str  # number, name, op, end
    text: str
    position: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup
        assert kind is not None
        value = match.group(kind)
        # '**' is accepted as an alias of '^'
        tokens.append(Token(kind, "^" if value == "**" else value, pos))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _expect(self, text: str) -> Token:
        token = self.current
        if token.kind != "op" or token.text != text:
            found = token.text or "end of input"
            raise ExpressionSyntaxError(f"expected {text!r}, found {found!r}", token.position)
        return self._advance()

    def _at_op(self, *texts: str) -> bool:
        return self.current.kind == "op" and self.current.text in texts

    def parse(self) -> Expression:
        expr = self.expression()
        if self.current.kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {self.current.text!r}", self.current.position)
        return expr

    def expression(self) -> Expression:
        expr = self.term()
        while self._at_op("+", "-"):
            op = self._advance().text
            right = self.term()
            expr = Add(expr, right) if op == "+" else Sub(expr, right)
        return expr

    def term(self) -> Expression:
        expr = self.unary()
        while self._at_op("*", "/"):
            op = self._advance().text
            right = self.unary()
            expr = Mul(expr, right) if op == "*" else Div(expr, right)
        return expr

    def unary(self) -> Expression:
        if self._at_op("-"):
            self._advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self._at_op("^"):
            self._advance()
            return Pow(base, self.unary())
        return base

    def atom(self) -> Expression:
        token = self.current
        match token.kind:
            case "number":
                self._advance()
                return Const(float(token.text))
            case "name":
                self._advance()
                if token.text in VARIABLES:
                    return VARIABLES[token.text]
                if token.text in FUNCTIONS:
                    self._expect("(")
                    arg = self.expression()
                    self._expect(")")
                    return FUNCTIONS[token.text](arg)
                raise UnknownIdentifierError(token.text, token.position)
            case "op" if token.text == "(":
                self._advance()
                expr = self.expression()
                self._expect(")")
                return expr
        found = token.text or "end of input"
        raise ExpressionSyntaxError(f"unexpected token {found!r}", token.position)


def parse_expression(text: str) -> Expression:
    """
    Parse a formula over x1, x2 into an expression tree.

    :param text: formula using + - * / ^, parentheses, decimal literals and sin, cos, tan, sqrt, exp, log
    :returns: parsed expression tree
    :raises ExpressionSyntaxError: malformed formula (carries the position)
    :raises UnknownIdentifierError: identifier other than x1, x2 or a known function
    """
    expr = _Parser(text).parse()
    logger.debug(f"Parsed {text!r} -> {expr!r}")
    return expr
