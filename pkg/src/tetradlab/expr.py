"""Scalar expression language for coframe and field components.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = ("-" | "+") unary | power ;
    power   = primary [ "^" unary ] ;              (* right associative *)
    primary = number | name | func "(" expr ")" | "(" expr ")" ;
    func    = "sin" | "cos" | "tan" | "cot" | "sinh" | "cosh" | "tanh"
            | "exp" | "ln" | "sqrt" | "abs" ;
    number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
            | "." digits [ exponent ] ;

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)`` and
``2^-1`` is ``0.5``. ``pi`` is the only built-in constant. Names must be
declared as coordinates or parameters.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from . import jet as J
from .jet import Jet2

FUNCTIONS = ("sin", "cos", "tan", "cot", "sinh", "cosh", "tanh", "exp", "ln", "sqrt", "abs")
CONSTANTS = {"pi": math.pi}


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset, src=""):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset
        self.src = src


class UndeclaredSymbolError(ExprError):
    def __init__(self, name):
        super().__init__(f"undeclared symbol '{name}'")
        self.name = name


class ExprDomainError(ExprError):
    def __init__(self, message, node, point=None):
        where = "" if point is None else f" at point {tuple(float(x) for x in point)}"
        super().__init__(f"{message} in '{to_string(node)}'{where}")
        self.node = node
        self.point = point


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Sym, Neg, BinOp, Call]


@dataclass(frozen=True)
class Expr:
    """A parsed expression together with the symbols it was checked against."""

    root: Node
    coords: tuple
    params: tuple
    src: str = ""

    def __str__(self):
        return to_string(self.root)

    def free_symbols(self):
        return free_symbols(self)


# ---------------------------------------------------------------------------
# lexer / parser

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _tokenize(src):
    toks = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", _byte(src, pos), src)
        kind = m.lastgroup
        if kind != "ws":
            toks.append((kind, m.group(), pos))
        pos = m.end()
    toks.append(("end", "", len(src)))
    return toks


def _byte(src, pos):
    return len(src[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, src, symbols):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        self.symbols = symbols

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ExprSyntaxError(msg, _byte(self.src, tok[2]), self.src)

    def expect(self, text):
        t = self.peek()
        if t[1] != text or t[0] == "end":
            self.fail(f"expected '{text}'" + (f", found '{t[1]}'" if t[1] else ", found end of input"))
        return self.next()

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty expression")
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected '{self.peek()[1]}'")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.next()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.next()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] == "-":
            self.next()
            return Neg(self.unary())
        if t[0] == "op" and t[1] == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.next()
            return BinOp("^", base, self.unary())
        return base

    def primary(self):
        t = self.next()
        kind, text = t[0], t[1]
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCTIONS:
                if self.peek()[1] != "(":
                    self.fail(f"function '{text}' needs an argument in parentheses")
                self.next()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                self.fail(f"unknown function '{text}'", t)
            if text not in self.symbols and text not in CONSTANTS:
                raise UndeclaredSymbolError(text)
            return Sym(text)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            self.fail("unexpected end of input", t)
        self.fail(f"unexpected '{text}'", t)


def parse(src: str, coords: Sequence[str] = (), params: Sequence[str] = ()) -> Expr:
    """Parse ``src``; names must come from ``coords``, ``params`` or the constants."""
    coords = tuple(coords)
    params = tuple(params)
    clash = set(coords) & set(params)
    if clash:
        raise ExprError(f"symbols declared as both coordinate and parameter: {sorted(clash)}")
    root = _Parser(src, set(coords) | set(params)).parse()
    return Expr(root, coords, params, src)


# ---------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_UNARY = 3
_ATOM = 5


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _UNARY
    return _ATOM


def _num_str(v):
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_string(node) -> str:
    """Print with the minimum parentheses that reparse to the same tree."""
    if isinstance(node, Expr):
        node = node.root
    if isinstance(node, Num):
        return _num_str(node.value)
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    if isinstance(node, Neg):
        s = to_string(node.arg)
        return "-" + (s if _prec(node.arg) >= _UNARY else f"({s})")
    p = _PREC[node.op]
    ls, rs = to_string(node.left), to_string(node.right)
    if node.op == "^":
        if _prec(node.left) < _ATOM:
            ls = f"({ls})"
        if _prec(node.right) < _UNARY:
            rs = f"({rs})"
        return f"{ls}^{rs}"
    if _prec(node.left) < p:
        ls = f"({ls})"
    if _prec(node.right) <= p:
        rs = f"({rs})"
    return f"{ls} {node.op} {rs}"


def free_symbols(e) -> set:
    out = set()

    def walk(n):
        if isinstance(n, Sym):
            if n.name not in CONSTANTS:
                out.add(n.name)
        elif isinstance(n, Neg):
            walk(n.arg)
        elif isinstance(n, Call):
            walk(n.arg)
        elif isinstance(n, BinOp):
            walk(n.left)
            walk(n.right)

    walk(e.root if isinstance(e, Expr) else e)
    return out


# ---------------------------------------------------------------------------
# evaluation

_FUNCS = {
    "sin": J.sin, "cos": J.cos, "tan": J.tan, "cot": J.cot,
    "sinh": J.sinh, "cosh": J.cosh, "tanh": J.tanh,
    "exp": J.exp, "ln": J.log, "sqrt": J.sqrt, "abs": J.fabs,
}


class _Evaluator:
    def __init__(self, e, points, params, order, margin, bound, soft=False):
        self.e = e
        self.soft = soft
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.order = order
        self.margin = margin
        self.bound = bound
        self.env = {}
        for mu, name in enumerate(e.coords):
            self.env[name] = Jet2.coordinate(self.points, mu, order)
        params = dict(params or {})
        missing = [p for p in e.params if p not in params and p in free_symbols(e)]
        if missing:
            raise ExprError(f"no value given for parameter(s) {missing}")
        for p in e.params:
            if p in params:
                self.env[p] = float(params[p])
        for c, v in CONSTANTS.items():
            self.env.setdefault(c, v)
        self.unsafe = np.zeros(self.points.shape[0], dtype=bool)

    def bad(self, node, mask, msg):
        idx = int(np.flatnonzero(np.ravel(mask))[0])
        raise ExprDomainError(msg, node, self.points[idx])

    def check(self, node, mask, msg):
        mask = np.asarray(mask)
        if self.soft:
            self.unsafe |= np.broadcast_to(mask, self.unsafe.shape)
            return
        if mask.any():
            self.bad(node, np.broadcast_to(mask, self.points.shape[:1]), msg)

    def lift(self, x):
        if isinstance(x, Jet2):
            return x
        return Jet2.constant(np.full(self.points.shape[0], float(x)), self.order)

    def run(self, node):
        out = self.ev(node)
        return self.lift(out)

    def ev(self, node):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Sym):
            return self.env[node.name]
        if isinstance(node, Neg):
            r = self.ev(node.arg)
            return -r
        if isinstance(node, Call):
            return self.call(node)
        return self.binop(node)

    def finish(self, node, r):
        v = J.value_of(r)
        self.check(node, ~np.isfinite(v), "non-finite result")
        if self.bound is not None:
            big = np.abs(v) > self.bound
            if isinstance(r, Jet2) and r.grad is not None:
                big = big | (np.abs(r.grad).max(-1) > self.bound)
                if r.hess is not None:
                    big = big | (np.abs(r.hess).max((-1, -2)) > self.bound)
            self.check(node, big, "magnitude above bound")
        return r

    def call(self, node):
        u = self.ev(node.arg)
        v = J.value_of(u)
        m = self.margin
        f = node.func
        deriv = self.order >= 1 and isinstance(u, Jet2)
        if f == "sqrt":
            self.check(node, (v <= m) if (deriv or m > 0) else (v < 0), "sqrt of non-positive argument")
        elif f == "ln":
            self.check(node, v <= m, "log of non-positive argument")
        elif f == "tan":
            self.check(node, np.abs(np.cos(v)) <= max(m, 1e-300), "tan at a pole")
        elif f == "cot":
            self.check(node, np.abs(np.sin(v)) <= max(m, 1e-300), "cot at a pole")
        elif f == "abs" and deriv:
            self.check(node, np.abs(v) <= m, "abs at its kink")
        elif f in ("exp", "sinh", "cosh") and self.bound is not None:
            self.check(node, np.abs(v) > math.log(self.bound), "exp overflow guard")
        return self.finish(node, _FUNCS[f](u))

    def binop(self, node):
        a = self.ev(node.left)
        b = self.ev(node.right)
        op = node.op
        if op == "+":
            r = a + b
        elif op == "-":
            r = a - b
        elif op == "*":
            r = a * b
        elif op == "/":
            bv = J.value_of(b)
            self.check(node, np.abs(bv) <= self.margin, "division by zero")
            r = a / b
        else:
            r = self.power(node, a, b)
        return self.finish(node, r)

    def power(self, node, a, b):
        av = J.value_of(a)
        b_const = not isinstance(b, Jet2)
        if b_const:
            c = float(b)
            if c == int(c):
                if c < 0:
                    self.check(node, np.abs(av) <= self.margin, "zero to a negative power")
                if not isinstance(a, Jet2):
                    return float(np.power(float(a), c))
                return _int_power(a, int(c))
            self.check(node, av < self.margin, "non-integer power of a negative base")
            if c < 1 and isinstance(a, Jet2) and self.order >= 1:
                self.check(node, av <= 0, "derivative of fractional power at zero")
            if not isinstance(a, Jet2):
                return float(np.power(float(a), c))
            return a ** c
        self.check(node, av <= self.margin, "variable power of a non-positive base")
        return J.exp(b * J.log(self.lift(a) if not isinstance(a, Jet2) else a))


def _int_power(a, n):
    if n == 0:
        return a * 0.0 + 1.0
    if n < 0:
        return _int_power(a, -n).reciprocal()
    return a ** float(n)


def eval_jet(e: Expr, points, params: Mapping[str, float] | None = None, order: int = 2,
             margin: float = 0.0, bound: float | None = None) -> Jet2:
    """Evaluate at one point (4,) or a batch (N, 4); returns a Jet2 of shape (N,).

    ``margin`` widens every domain boundary (used to pick well-conditioned
    points) and ``bound`` rejects intermediate values or derivatives above that
    magnitude.
    """
    return _Evaluator(e, points, params, order, margin, bound).run(e.root)


def safe_mask(e: Expr, points, params: Mapping[str, float] | None = None, order: int = 2,
              margin: float = 0.0, bound: float | None = None) -> np.ndarray:
    """Boolean mask of the points where eval_jet would not raise a domain error."""
    ev = _Evaluator(e, points, params, order, margin, bound, soft=True)
    with np.errstate(all="ignore"):
        try:
            ev.run(e.root)
        except ArithmeticError:         # constant subexpression out of domain
            return np.zeros(ev.points.shape[0], dtype=bool)
    return ~ev.unsafe


def evaluate(e: Expr, points, params: Mapping[str, float] | None = None):
    """Plain values, shape (N,)."""
    return eval_jet(e, points, params, order=0).value


def compile_all(srcs, coords, params):
    """Parse a nested list of strings, keeping the nesting."""
    if isinstance(srcs, str):
        return parse(srcs, coords, params)
    return [compile_all(s, coords, params) for s in srcs]


__all__ = [
    "safe_mask", "Expr", "Num", "Sym", "Neg", "BinOp", "Call",
    "ExprError", "ExprSyntaxError", "UndeclaredSymbolError", "ExprDomainError",
    "parse", "to_string", "free_symbols", "eval_jet", "evaluate", "FUNCTIONS",
]
