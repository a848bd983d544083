# expressions.py
"""
Arithmetic expression language for vector-field components.

Grammar (whitespace insensitive, left associative):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' ['-'] INTEGER)*
    atom   := NUMBER | 'pi' | yK | ('sin' | 'cos' | 'exp') '(' expr ')' | '(' expr ')'

Parsed trees are sympy expressions over the symbols y1..yd; sympy supplies
exact differentiation and the light canonical simplification it applies on
construction (constant folding, 0/1 absorption).
"""

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, NamedTuple, Sequence, Tuple

import numpy as np
import sympy as sp
from sympy.printing.str import StrPrinter

from ..core.exceptions import DomainError, EvaluationError, ParseError

FUNCTIONS = {'sin': sp.sin, 'cos': sp.cos, 'exp': sp.exp}

_TOKEN_SPEC = [
    ('NUMBER', r'\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?'),
    ('IDENT', r'[A-Za-z_][A-Za-z_0-9]*'),
    ('OP', r'[-+*/^()]'),
    ('SKIP', r'\s+'),
    ('MISMATCH', r'.'),
]
_TOKEN_RE = re.compile('|'.join(f'(?P<{name}>{pattern})' for name, pattern in _TOKEN_SPEC))
_VARIABLE_RE = re.compile(r'y(\d+)$')


class Token(NamedTuple):
    kind: str
    text: str
    position: int


@lru_cache(maxsize=None)
def variables(dimension: int) -> Tuple[sp.Symbol, ...]:
    """The symbols y1..yd"""
    return tuple(sp.Symbol(f'y{i}', real=True) for i in range(1, dimension + 1))


def tokenize(text: str) -> List[Token]:
    tokens = []
    for match in _TOKEN_RE.finditer(text):
        kind = match.lastgroup
        if kind == 'SKIP':
            continue
        if kind == 'MISMATCH':
            raise ParseError(f"unexpected character {match.group()!r}", match.start())
        tokens.append(Token(kind, match.group(), match.start()))
    tokens.append(Token('END', '', len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser producing sympy trees"""

    def __init__(self, text: str, dimension: int):
        self.tokens = tokenize(text)
        self.index = 0
        self.dimension = dimension
        self.symbols = variables(dimension)

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.current
        if token.text != text:
            found = repr(token.text) if token.kind != 'END' else 'end of input'
            raise ParseError(f"expected {text!r}, found {found}", token.position)
        return self.advance()

    def parse(self) -> sp.Expr:
        result = self.expr()
        if self.current.kind != 'END':
            raise ParseError(f"unexpected {self.current.text!r}", self.current.position)
        return result

    def expr(self) -> sp.Expr:
        result = self.term()
        while self.current.text in ('+', '-'):
            op = self.advance().text
            right = self.term()
            result = result + right if op == '+' else result - right
        return result

    def term(self) -> sp.Expr:
        result = self.unary()
        while self.current.text in ('*', '/'):
            op = self.advance().text
            right = self.unary()
            result = result * right if op == '*' else result / right
        return result

    def unary(self) -> sp.Expr:
        if self.current.text == '-':
            self.advance()
            return -self.unary()
        return self.power()

    def power(self) -> sp.Expr:
        result = self.atom()
        while self.current.text == '^':
            self.advance()
            sign = 1
            if self.current.text == '-':
                self.advance()
                sign = -1
            token = self.current
            if token.kind != 'NUMBER' or not token.text.isdigit():
                raise ParseError("exponent must be an integer literal", token.position)
            self.advance()
            result = result ** sp.Integer(sign * int(token.text))
        return result

    def atom(self) -> sp.Expr:
        token = self.current
        if token.kind == 'NUMBER':
            self.advance()
            if token.text.isdigit():
                return sp.Integer(int(token.text))
            return sp.Float(float(token.text))
        if token.kind == 'IDENT':
            self.advance()
            if token.text in FUNCTIONS:
                self.expect('(')
                argument = self.expr()
                self.expect(')')
                return FUNCTIONS[token.text](argument)
            if token.text == 'pi':
                return sp.pi
            match = _VARIABLE_RE.match(token.text)
            if match:
                index = int(match.group(1))
                if not 1 <= index <= self.dimension:
                    raise ParseError(f"variable index out of range: {token.text} with d={self.dimension}",
                                     token.position)
                return self.symbols[index - 1]
            raise ParseError(f"unknown identifier {token.text!r}", token.position)
        if token.text == '(':
            self.advance()
            result = self.expr()
            self.expect(')')
            return result
        found = repr(token.text) if token.kind != 'END' else 'end of input'
        raise ParseError(f"unexpected {found}", token.position)


class ExpressionPrinter(StrPrinter):
    """Prints trees back in the toolkit grammar ('^' powers, exact float literals)"""

    def _print_Pow(self, expr, rational=False):
        base = self._print(expr.base)
        if not (expr.base.is_Symbol or (expr.base.is_Number and expr.base >= 0)):
            base = f"({base})"
        return f"{base}^{int(expr.exp)}"

    def _print_Float(self, expr):
        return repr(float(expr))

    def _print_Exp1(self, expr):
        return "exp(1)"

    def _print_Pi(self, expr):
        return "pi"


_PRINTER = ExpressionPrinter()


@dataclass(frozen=True)
class Expr:
    """A parsed component expression on R^d"""
    node: sp.Expr
    dimension: int
    _compiled: Callable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, '_compiled', sp.lambdify(variables(self.dimension), self.node, modules='math'))

    def __str__(self) -> str:
        return to_text(self)

    @property
    def is_zero(self) -> bool:
        return self.node == 0


def parse(text: str, dimension: int) -> Expr:
    if dimension < 1:
        raise DomainError(f"dimension must be positive, got {dimension}")
    return Expr(_Parser(text, dimension).parse(), dimension)


def to_text(e: Expr) -> str:
    return _PRINTER.doprint(e.node)


def evaluate(e: Expr, y: Sequence[float]) -> float:
    if len(y) != e.dimension:
        raise DomainError(f"point has {len(y)} coordinates, expression lives on R^{e.dimension}")
    try:
        value = float(e._compiled(*(float(v) for v in y)))
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise EvaluationError(f"cannot evaluate {to_text(e)} at {list(y)}: {exc}") from None
    if not math.isfinite(value):
        raise EvaluationError(f"{to_text(e)} is not finite at {list(y)}")
    return value


def diff(e: Expr, index: int) -> Expr:
    """Exact partial derivative with respect to y_index (1-based)"""
    if not 1 <= index <= e.dimension:
        raise DomainError(f"variable index {index} out of range for d={e.dimension}")
    return Expr(sp.diff(e.node, variables(e.dimension)[index - 1]), e.dimension)


def constant(value: float, dimension: int) -> Expr:
    return Expr(sp.Float(value) if not float(value).is_integer() else sp.Integer(int(value)), dimension)


def gradient(e: Expr) -> List[Expr]:
    return [diff(e, i) for i in range(1, e.dimension + 1)]


def evaluate_all(expressions: Sequence[Expr], y: Sequence[float]) -> np.ndarray:
    return np.array([evaluate(e, y) for e in expressions])
