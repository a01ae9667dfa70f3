"""
Arithmetic expressions for coefficient entries.

Grammar:

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := unary ('^' factor)?
    unary  := '-' unary | atom
    atom   := number | 'i' | 'pi' | ident | ident '(' expr ')' | '(' expr ')'

The AST is made of plain tuples:

    ("num", float)  ("i",)  ("pi",)  ("var", k)  ("param", name)
    ("neg", a)  (op, a, b) for op in + - * / ^  ("call", name, a)

Evaluation is vectorised: variables may be numpy arrays and the result is a
complex array of the broadcast shape.
"""

from __future__ import annotations

import math
import operator as op
import re
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import ExprParseError

Ast = tuple

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
OPERATIONS = {"+": op.add, "-": op.sub, "*": op.mul, "/": op.truediv, "^": op.pow}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),]))"
)
_VAR = re.compile(r"x([1-9][0-9]*)$")


@dataclass(frozen=True)
class _Token:
    kind: str   # num | ident | op | end
    text: str
    offset: int  # byte offset into the source


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
        if m is None or m.end() == pos:
            raise ExprParseError(f"unexpected character {text[start]!r}", _byte(text, start))
        kind = m.lastgroup or "op"
        tokens.append(_Token(kind, m.group(kind), _byte(text, m.start(kind))))
        pos = m.end()
    tokens.append(_Token("end", "", _byte(text, len(text))))
    return tokens


def _byte(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, n: int, params: Sequence[str]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.n = n
        self.params = set(params)

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str, message: str) -> None:
        if self.tok.text != text or self.tok.kind != "op":
            raise ExprParseError(message, self.tok.offset)
        self.advance()

    def parse(self) -> Ast:
        node = self.expr()
        if self.tok.kind != "end":
            if self.tok.text == ")":
                raise ExprParseError("unbalanced parentheses", self.tok.offset)
            raise ExprParseError(f"unexpected token {self.tok.text!r}", self.tok.offset)
        return node

    def expr(self) -> Ast:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            sym = self.advance().text
            node = (sym, node, self.term())
        return node

    def term(self) -> Ast:
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            sym = self.advance().text
            node = (sym, node, self.factor())
        return node

    def factor(self) -> Ast:
        base = self.unary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return ("^", base, self.factor())
        return base

    def unary(self) -> Ast:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return ("neg", self.unary())
        return self.atom()

    def atom(self) -> Ast:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprParseError("number out of range", tok.offset)
            return ("num", value)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")", "unbalanced parentheses")
            return node
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            is_call = self.tok.kind == "op" and self.tok.text == "("
            if is_call:
                if name not in FUNCTIONS:
                    raise ExprParseError(f"unknown function {name!r}", tok.offset)
                self.advance()
                arg = self.expr()
                if self.tok.text == ",":
                    raise ExprParseError(f"arity error: {name} takes one argument", self.tok.offset)
                self.expect(")", "unbalanced parentheses")
                return ("call", name, arg)
            if name in FUNCTIONS:
                raise ExprParseError(f"arity error: {name} needs an argument", tok.offset)
            if name == "i":
                return ("i",)
            if name == "pi":
                return ("pi",)
            var = _VAR.match(name)
            if var is not None:
                k = int(var.group(1))
                if k > self.n:
                    raise ExprParseError(f"unknown variable {name!r} (n = {self.n})", tok.offset)
                return ("var", k)
            if name in self.params:
                return ("param", name)
            if name.startswith("x") and name[1:].isdigit():
                raise ExprParseError(f"unknown variable {name!r}", tok.offset)
            raise ExprParseError(f"unknown identifier {name!r}", tok.offset)
        if tok.kind == "end":
            raise ExprParseError("unexpected end of expression", tok.offset)
        raise ExprParseError(f"unexpected token {tok.text!r}", tok.offset)


def parse_expr(text: str, n: int, params: Sequence[str] = ()) -> Ast:
    if not text or not text.strip():
        raise ExprParseError("empty expression", 0)
    if n < 1:
        raise ValueError(f"Dimension n must be >= 1, got {n}")
    return _Parser(text, n, params).parse()


def print_expr(node: Ast) -> str:
    """Fully parenthesised text that parses back to the same AST."""
    head = node[0]
    if head == "num":
        return repr(node[1])
    if head in ("i", "pi"):
        return head
    if head == "var":
        return f"x{node[1]}"
    if head == "param":
        return node[1]
    if head == "neg":
        return f"(-{print_expr(node[1])})"
    if head == "call":
        return f"{node[1]}({print_expr(node[2])})"
    return f"({print_expr(node[1])} {head} {print_expr(node[2])})"


def eval_ast(node: Ast, xs: Sequence[Any], params: Mapping[str, float] | None = None) -> Any:
    """Evaluate with xs[k-1] bound to x_k; arrays broadcast."""
    head = node[0]
    if head == "num":
        return np.complex128(node[1])
    if head == "i":
        return np.complex128(1j)
    if head == "pi":
        return np.complex128(math.pi)
    if head == "var":
        return np.asarray(xs[node[1] - 1], dtype=complex)
    if head == "param":
        if params is None or node[1] not in params:
            raise ValueError(f"No value bound for parameter {node[1]!r}")
        return np.complex128(params[node[1]])
    if head == "neg":
        return -eval_ast(node[1], xs, params)
    if head == "call":
        return FUNCTIONS[node[1]](eval_ast(node[2], xs, params))
    func = OPERATIONS[head]
    return func(eval_ast(node[1], xs, params), eval_ast(node[2], xs, params))


def evaluate(node: Ast, xs: Sequence[Any], params: Mapping[str, float] | None = None) -> np.ndarray:
    """eval_ast with floating-point warnings silenced; callers check finiteness."""
    with np.errstate(all="ignore"):
        value = eval_ast(node, xs, params)
    return np.asarray(value, dtype=complex)


def variables_used(node: Ast) -> set[int]:
    head = node[0]
    if head == "var":
        return {node[1]}
    out: set[int] = set()
    for child in node[1:]:
        if isinstance(child, tuple):
            out |= variables_used(child)
    return out
