"""A small arithmetic expression language for form coefficients and strata.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' INTEGER)?
    atom   := NUMBER | IDENT | '(' expr ')'

Trees are immutable and differentiate exactly, so Jacobians of
polynomial or rational input never go through finite differences.
"""
import re
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, ParseError


class Expr:
    __slots__ = ()
    prec = 100

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __neg__(self):
        return neg(self)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr
    prec = 3


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr
    prec = 1


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr
    prec = 1


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr
    prec = 2


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr
    prec = 2


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exp: int
    prec = 4


ZERO = Num(0.0)
ONE = Num(1.0)


def _lift(x):
    if isinstance(x, Expr):
        return x
    return Num(float(x))


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"""(?P<ws>\s+)
      | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>[-+*/^()])""",
    re.VERBOSE,
)


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", self._byte(pos),
                                 ("number", "identifier", "(", "-"))
            if m.lastgroup != "ws":
                self.tokens.append((m.lastgroup, m.group(), self._byte(pos)))
            pos = m.end()
        self.tokens.append(("eof", "", self._byte(len(text))))
        self.i = 0

    def _byte(self, char_index):
        return len(self.text[:char_index].encode("utf-8"))

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected):
        kind, text, offset = self.peek()
        what = "end of input" if kind == "eof" else repr(text)
        raise ParseError(f"unexpected {what}", offset, expected)

    def parse(self):
        tree = self.expr()
        if self.peek()[0] != "eof":
            self.fail(("+", "-", "*", "/", "^", "end of input"))
        return tree

    def expr(self):
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.term()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def term(self):
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.unary()
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, text, _ = self.peek()
            if kind != "num" or not text.isdigit():
                self.fail(("non-negative integer exponent",))
            self.take()
            return Pow(base, int(text))
        return base

    def atom(self):
        kind, text, _ = self.peek()
        if kind == "num":
            self.take()
            return Num(float(text))
        if kind == "ident":
            self.take()
            return Var(text)
        if kind == "op" and text == "(":
            self.take()
            inner = self.expr()
            if self.peek()[1] != ")":
                self.fail((")",))
            self.take()
            return inner
        self.fail(("number", "identifier", "(", "-"))


def parse_expression(text):
    """Parse ``text`` into an expression tree; raises :class:`ParseError`."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return Num(float(text))
    if not isinstance(text, str):
        raise ParseError(f"expected a string, got {type(text).__name__}", 0, ("string",))
    return _Parser(text).parse()


# --------------------------------------------------------------- printing

def _num_text(v):
    if v == int(v) and abs(v) < 1e15:
        return str(int(v)) if v >= 0 else f"-{int(-v)}"
    return repr(v)


def to_text(e):
    """Render with the minimum parentheses needed to reparse the same tree."""
    if isinstance(e, Num):
        s = _num_text(e.value)
        return f"({s})" if e.value < 0 or s.startswith("-") else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = to_text(e.arg)
        if e.arg.prec < Neg.prec:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Pow):
        base = to_text(e.base)
        bare = isinstance(e.base, Var) or (isinstance(e.base, Num) and not base.startswith("("))
        if not bare:
            base = f"({base})"
        return f"{base}^{e.exp}"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    left = to_text(e.left)
    right = to_text(e.right)
    if e.left.prec < e.prec:
        left = f"({left})"
    # left associativity: an equal-precedence right operand needs parentheses
    if e.right.prec <= e.prec:
        right = f"({right})"
    return f"{left} {op} {right}"


# ------------------------------------------------------------- evaluation

def evaluate(e, env, div_tol=0.0):
    """Evaluate at a point; ``env`` maps names to floats or numpy arrays."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise EvaluationError(f"unbound identifier {e.name!r}") from None
    if isinstance(e, Neg):
        return -evaluate(e.arg, env, div_tol)
    if isinstance(e, Pow):
        return evaluate(e.base, env, div_tol) ** e.exp
    a = evaluate(e.left, env, div_tol)
    b = evaluate(e.right, env, div_tol)
    if isinstance(e, Add):
        return a + b
    if isinstance(e, Sub):
        return a - b
    if isinstance(e, Mul):
        return a * b
    if np.any(np.abs(b) <= div_tol):
        raise EvaluationError(f"division by a value below {div_tol:g} in {to_text(e)}")
    return a / b


def free_vars(e):
    if isinstance(e, Num):
        return frozenset()
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Neg):
        return free_vars(e.arg)
    if isinstance(e, Pow):
        return free_vars(e.base)
    return free_vars(e.left) | free_vars(e.right)


# -------------------------------------------- simplifying constructors

def _is(e, v):
    return isinstance(e, Num) and e.value == v


def add(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return Add(a, b)


def sub(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    return Sub(a, b)


def mul(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    return Mul(a, b)


def div(a, b):
    if _is(a, 0.0):
        return ZERO
    if _is(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return Num(a.value / b.value)
    return Div(a, b)


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(a, k):
    if k == 0:
        return ONE
    if k == 1:
        return a
    if isinstance(a, Num):
        return Num(a.value ** k)
    return Pow(a, k)


def diff(e, name):
    """Exact partial derivative with respect to ``name``."""
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == name else ZERO
    if isinstance(e, Neg):
        return neg(diff(e.arg, name))
    if isinstance(e, Add):
        return add(diff(e.left, name), diff(e.right, name))
    if isinstance(e, Sub):
        return sub(diff(e.left, name), diff(e.right, name))
    if isinstance(e, Mul):
        return add(mul(diff(e.left, name), e.right), mul(e.left, diff(e.right, name)))
    if isinstance(e, Div):
        da, db = diff(e.left, name), diff(e.right, name)
        if _is(db, 0.0):
            return div(da, e.right)
        return div(sub(mul(da, e.right), mul(e.left, db)), power(e.right, 2))
    if isinstance(e, Pow):
        db = diff(e.base, name)
        if e.exp == 0 or _is(db, 0.0):
            return ZERO
        return mul(mul(Num(float(e.exp)), power(e.base, e.exp - 1)), db)
    raise TypeError(f"not an expression: {e!r}")


def is_constant(e):
    return not free_vars(e)


# -------------------------------------------------------------- compiling

def _py(e, slot):
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return f"_v[{slot[e.name]}]"
    if isinstance(e, Neg):
        return f"(-{_py(e.arg, slot)})"
    if isinstance(e, Pow):
        return f"({_py(e.base, slot)}**{e.exp})"
    if isinstance(e, Div):
        return f"_div({_py(e.left, slot)}, {_py(e.right, slot)})"
    op = {Add: "+", Sub: "-", Mul: "*"}[type(e)]
    return f"({_py(e.left, slot)} {op} {_py(e.right, slot)})"


def compile_exprs(exprs, names, div_tol=0.0):
    """Compile a flat list of trees into ``f(values) -> ndarray``.

    Equivalent to calling :func:`evaluate` on each tree with
    ``dict(zip(names, values))``; identifiers outside ``names`` raise
    :class:`EvaluationError` at compile time.
    """
    slot = {name: i for i, name in enumerate(names)}
    for e in exprs:
        missing = free_vars(e) - slot.keys()
        if missing:
            raise EvaluationError(f"unbound identifier(s) {sorted(missing)}")

    def _div(a, b):
        if abs(b) <= div_tol:
            raise EvaluationError(f"division by a value below {div_tol:g}")
        return a / b

    body = ", ".join(_py(e, slot) for e in exprs)
    code = compile(f"lambda _v: [{body}]", "<expr>", "eval")
    fn = eval(code, {"_div": _div, "__builtins__": {}})

    def call(values):
        return np.array(fn(list(map(float, values))), dtype=float)

    return call
