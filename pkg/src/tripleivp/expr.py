"""Small expression language over the variables ``x``, ``y`` and ``z``.

Integrands, limit functions and closed-form third derivatives are written as
plain text, e.g. ``sin(x+y+z)`` or ``8*sin(4*x) - 6*sin(2*x) + sin(x)``.

Grammar (whitespace-insensitive)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := NUMBER | 'pi' | VAR | FUNC '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.  A minus sign
directly in front of a number literal (not followed by ``^``) produces a
negative constant rather than a negation node.

Differentiating ``u^w`` uses the power rule when ``w`` is free of variables;
otherwise the rewrite ``u^w = exp(w*log(u))`` is differentiated instead, which
is only valid for ``u > 0``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import DomainError, ExpressionSyntaxError, UnboundVariable, UnknownIdentifier

VARIABLES = ("x", "y", "z")
UNARY_OPS = ("neg", "sin", "cos", "tan", "exp", "log", "sqrt")
BINARY_OPS = ("add", "sub", "mul", "div", "pow")
FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt")


class Expr:
    """Base class of the immutable expression tree."""

    __slots__ = ()

    def __str__(self):
        return to_text(self)

    # Operator overloads keep hand-built trees readable in tests and in
    # the derivative rules below.
    def __add__(self, other):
        return Binary("add", self, _lift(other))

    def __radd__(self, other):
        return Binary("add", _lift(other), self)

    def __sub__(self, other):
        return Binary("sub", self, _lift(other))

    def __rsub__(self, other):
        return Binary("sub", _lift(other), self)

    def __mul__(self, other):
        return Binary("mul", self, _lift(other))

    def __rmul__(self, other):
        return Binary("mul", _lift(other), self)

    def __truediv__(self, other):
        return Binary("div", self, _lift(other))

    def __rtruediv__(self, other):
        return Binary("div", _lift(other), self)

    def __pow__(self, other):
        return Binary("pow", self, _lift(other))

    def __neg__(self):
        return Unary("neg", self)


@dataclass(frozen=True, eq=True, repr=True)
class Constant(Expr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True, eq=True, repr=True)
class Variable(Expr):
    name: str

    def __post_init__(self):
        if self.name not in VARIABLES:
            raise ValueError(f"variable must be one of {VARIABLES}, got {self.name!r}")


@dataclass(frozen=True, eq=True, repr=True)
class Unary(Expr):
    op: str
    child: Expr

    def __post_init__(self):
        if self.op not in UNARY_OPS:
            raise ValueError(f"unknown unary operator {self.op!r}")


@dataclass(frozen=True, eq=True, repr=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown binary operator {self.op!r}")


def _lift(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return Constant(value)


X = Variable("x")
Y = Variable("y")
Z = Variable("z")
ZERO = Constant(0.0)
ONE = Constant(1.0)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # number | name | op | end
    text: str
    offset: int  # byte offset into the UTF-8 encoding


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    byte_pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", byte_pos)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(_Token(kind, chunk, byte_pos))
        pos = m.end()
        byte_pos += len(chunk.encode("utf-8"))
    tokens.append(_Token("end", "", byte_pos))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def peek(self, k=1):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text):
        if self.tok.text != text or self.tok.kind != "op":
            raise ExpressionSyntaxError(_describe(self.tok), self.tok.offset, {text})
        return self.advance()

    def parse(self):
        e = self.expr()
        if self.tok.kind != "end":
            raise ExpressionSyntaxError(
                _describe(self.tok), self.tok.offset, {"+", "-", "*", "/", "^", "end of input"}
            )
        return e

    def expr(self):
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = "add" if self.advance().text == "+" else "sub"
            e = Binary(op, e, self.term())
        return e

    def term(self):
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = "mul" if self.advance().text == "*" else "div"
            e = Binary(op, e, self.unary())
        return e

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            if self.tok.kind == "number" and not (self.peek().kind == "op" and self.peek().text == "^"):
                return Constant(-float(self.advance().text))
            return Unary("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return Binary("pow", base, self.unary())
        return base

    def atom(self):
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Constant(float(t.text))
        if t.kind == "name":
            self.advance()
            if t.text in VARIABLES:
                return Variable(t.text)
            if t.text == "pi":
                return Constant(math.pi)
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(t.text, arg)
            raise UnknownIdentifier(t.text, t.offset)
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        raise ExpressionSyntaxError(
            _describe(t), t.offset, {"number", "variable", "function", "pi", "(", "-"}
        )


def _describe(tok):
    if tok.kind == "end":
        return "unexpected end of input"
    return f"unexpected token {tok.text!r}"


def parse(text: str) -> Expr:
    """Parse expression text into a tree.

    Raises :class:`ExpressionSyntaxError` (with byte offset and the set of
    expected tokens) or :class:`UnknownIdentifier`.
    """
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0, {"number", "variable", "function", "pi", "(", "-"})
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}


def _prec(e):
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary) and e.op == "neg":
        return _PREC["neg"]
    if isinstance(e, Constant) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return 0  # negative literals always get parentheses as operands
    return 5


def _format_number(v):
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v)) if v != 0 or math.copysign(1.0, v) > 0 else "-0"
    return repr(v)


def to_text(e: Expr) -> str:
    """Render ``e`` so that ``parse(to_text(e)) == e``."""
    if isinstance(e, Constant):
        if math.isnan(e.value) or math.isinf(e.value):
            raise ValueError(f"cannot print non-finite constant {e.value}")
        return _format_number(e.value)
    if isinstance(e, Variable):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            inner = to_text(e.child)
            # "-(2)" keeps a negated literal distinct from a negative literal
            if _prec(e.child) < 3 or isinstance(e.child, Constant):
                inner = f"({inner})"
            return "-" + inner
        return f"{e.op}({to_text(e.child)})"
    p = _PREC[e.op]
    left, right = to_text(e.left), to_text(e.right)
    if e.op == "pow":
        if _prec(e.left) <= p:
            left = f"({left})"
        if _prec(e.right) < p:
            right = f"({right})"
    else:
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
    return f"{left}{_SYMBOL[e.op]}{right}"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bindings:
    x: float
    y: float | None = None
    z: float | None = None

    def get(self, name):
        v = getattr(self, name)
        if v is None:
            raise UnboundVariable(name)
        return v


def _div(a, b):
    if b == 0.0:
        raise DomainError("division by zero")
    return a / b


def _log(a):
    if a <= 0.0:
        raise DomainError(f"log of non-positive value {a!r}")
    return math.log(a)


def _sqrt(a):
    if a < 0.0:
        raise DomainError(f"sqrt of negative value {a!r}")
    return math.sqrt(a)


def _exp(a):
    try:
        return math.exp(a)
    except OverflowError:
        return math.inf


def _pow(a, b):
    if a == 0.0:
        if b == 0.0:
            raise DomainError("0^0 is undefined")
        if b < 0.0:
            raise DomainError("division by zero in power")
    elif a < 0.0 and not float(b).is_integer():
        raise DomainError(f"negative base {a!r} with non-integer exponent {b!r}")
    try:
        return math.pow(a, b)
    except OverflowError:
        return math.copysign(math.inf, a) if float(b) % 2.0 == 1.0 else math.inf


def _tan(a):
    return math.tan(a)


_UNARY_FN = {
    "neg": lambda a: -a,
    "sin": math.sin,
    "cos": math.cos,
    "tan": _tan,
    "exp": _exp,
    "log": _log,
    "sqrt": _sqrt,
}
_BINARY_FN = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": _div,
    "pow": _pow,
}


def evaluate(e: Expr, bindings: Bindings | Mapping[str, float] | None = None, **values) -> float:
    """Evaluate ``e`` in real floating-point arithmetic.

    Variables come from ``bindings`` (a :class:`Bindings` or a mapping) or
    keyword arguments; an unbound variable raises :class:`UnboundVariable`.
    """
    if bindings is None:
        env = values
    elif isinstance(bindings, Bindings):
        env = {k: getattr(bindings, k) for k in VARIABLES if getattr(bindings, k) is not None}
        env.update(values)
    else:
        env = dict(bindings, **values)
    return _eval(e, env)


def _eval(e, env):
    if isinstance(e, Constant):
        return e.value
    if isinstance(e, Variable):
        try:
            v = env[e.name]
        except KeyError:
            raise UnboundVariable(e.name) from None
        if v is None:
            raise UnboundVariable(e.name)
        return float(v)
    if isinstance(e, Unary):
        return _UNARY_FN[e.op](_eval(e.child, env))
    return _BINARY_FN[e.op](_eval(e.left, env), _eval(e.right, env))


def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Variable):
        return frozenset((e.name,))
    if isinstance(e, Constant):
        return frozenset()
    if isinstance(e, Unary):
        return free_vars(e.child)
    return free_vars(e.left) | free_vars(e.right)


def substitute(e: Expr, name: str, replacement: Expr) -> Expr:
    """Replace every occurrence of variable ``name`` by ``replacement``."""
    if isinstance(e, Variable):
        return replacement if e.name == name else e
    if isinstance(e, Constant):
        return e
    if isinstance(e, Unary):
        return Unary(e.op, substitute(e.child, name, replacement))
    return Binary(e.op, substitute(e.left, name, replacement), substitute(e.right, name, replacement))


# ---------------------------------------------------------------------------
# Simplification and differentiation
# ---------------------------------------------------------------------------


def _is_const(e, value=None):
    return isinstance(e, Constant) and (value is None or e.value == value)


def _fold(e):
    try:
        v = _eval(e, {})
    except DomainError:
        return e
    if math.isfinite(v):
        return Constant(v)
    return e


def simplify(e: Expr) -> Expr:
    """Bottom-up rewrite with a fixed rule set.

    Rules: constant folding (only when the result is finite and defined),
    ``0*e -> 0``, ``1*e -> e``, ``e+0 -> e``, ``e-0 -> e``, ``0-e -> -e``,
    ``e/1 -> e``, ``e^1 -> e``, ``e^0 -> 1`` and ``--e -> e``.  Every rule
    shrinks the tree, so one bottom-up pass reaches the normal form.
    """
    if isinstance(e, (Constant, Variable)):
        return e
    if isinstance(e, Unary):
        c = simplify(e.child)
        if e.op == "neg" and isinstance(c, Unary) and c.op == "neg":
            return c.child
        out = Unary(e.op, c)
        return _fold(out) if isinstance(c, Constant) else out

    a, b = simplify(e.left), simplify(e.right)
    if isinstance(a, Constant) and isinstance(b, Constant):
        folded = _fold(Binary(e.op, a, b))
        if isinstance(folded, Constant):
            return folded
    op = e.op
    if op == "mul":
        if _is_const(a, 0.0) or _is_const(b, 0.0):
            return ZERO
        if _is_const(a, 1.0):
            return b
        if _is_const(b, 1.0):
            return a
    elif op == "add":
        if _is_const(a, 0.0):
            return b
        if _is_const(b, 0.0):
            return a
    elif op == "sub":
        if _is_const(b, 0.0):
            return a
        if _is_const(a, 0.0):
            return simplify(Unary("neg", b))
    elif op == "div":
        if _is_const(b, 1.0):
            return a
    elif op == "pow":
        if _is_const(b, 1.0):
            return a
        if _is_const(b, 0.0):
            return ONE
    return Binary(op, a, b)


def differentiate(e: Expr, v: str) -> Expr:
    """Exact symbolic partial derivative with respect to ``v``, simplified."""
    if v not in VARIABLES:
        raise ValueError(f"cannot differentiate with respect to {v!r}")
    return simplify(_d(e, v))


def _d(e, v):
    if isinstance(e, Constant):
        return ZERO
    if isinstance(e, Variable):
        return ONE if e.name == v else ZERO
    if v not in free_vars(e):
        return ZERO
    if isinstance(e, Unary):
        u = e.child
        du = _d(u, v)
        op = e.op
        if op == "neg":
            return Unary("neg", du)
        if op == "sin":
            return Unary("cos", u) * du
        if op == "cos":
            return Unary("neg", Unary("sin", u)) * du
        if op == "tan":
            return du / Binary("pow", Unary("cos", u), Constant(2.0))
        if op == "exp":
            return e * du
        if op == "log":
            return du / u
        if op == "sqrt":
            return du / (Constant(2.0) * e)
        raise AssertionError(op)
    a, b = e.left, e.right
    if e.op == "add":
        return _d(a, v) + _d(b, v)
    if e.op == "sub":
        return _d(a, v) - _d(b, v)
    if e.op == "mul":
        return _d(a, v) * b + a * _d(b, v)
    if e.op == "div":
        return (_d(a, v) * b - a * _d(b, v)) / Binary("pow", b, Constant(2.0))
    # pow
    if not free_vars(b):
        return b * Binary("pow", a, simplify(b - ONE)) * _d(a, v)
    return _d(Unary("exp", b * Unary("log", a)), v)


# ---------------------------------------------------------------------------
# Compilation to fast callables
# ---------------------------------------------------------------------------

_PY_UNARY = {
    "neg": "(-{0})",
    "sin": "_sin({0})",
    "cos": "_cos({0})",
    "tan": "_tan({0})",
    "exp": "_exp({0})",
    "log": "_log({0})",
    "sqrt": "_sqrt({0})",
}
_PY_BINARY = {
    "add": "({0} + {1})",
    "sub": "({0} - {1})",
    "mul": "({0} * {1})",
    "div": "_div({0}, {1})",
    "pow": "_pow({0}, {1})",
}


def _codegen(e, unary, binary):
    if isinstance(e, Constant):
        return repr(e.value)
    if isinstance(e, Variable):
        return e.name
    if isinstance(e, Unary):
        return unary[e.op].format(_codegen(e.child, unary, binary))
    return binary[e.op].format(_codegen(e.left, unary, binary), _codegen(e.right, unary, binary))


def compile_scalar(e: Expr) -> Callable[[float, float, float], float]:
    """Return ``fn(x, y, z)`` computing ``e`` with the same semantics as :func:`evaluate`."""
    namespace = {
        "_sin": math.sin,
        "_cos": math.cos,
        "_tan": _tan,
        "_exp": _exp,
        "_log": _log,
        "_sqrt": _sqrt,
        "_div": _div,
        "_pow": _pow,
    }
    src = f"def _fn(x=None, y=None, z=None):\n    return {_codegen(e, _PY_UNARY, _PY_BINARY)}\n"
    exec(compile(src, "<expr>", "exec"), namespace)
    return namespace["_fn"]


def _np_div(a, b):
    if np.any(np.asarray(b) == 0.0):
        raise DomainError("division by zero")
    return a / b


def _np_log(a):
    if np.any(np.asarray(a) <= 0.0):
        raise DomainError("log of non-positive value")
    return np.log(a)


def _np_sqrt(a):
    if np.any(np.asarray(a) < 0.0):
        raise DomainError("sqrt of negative value")
    return np.sqrt(a)


def _np_pow(a, b):
    a_arr, b_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    if np.any((a_arr == 0.0) & (b_arr <= 0.0)):
        raise DomainError("0^w with w <= 0")
    if np.any((a_arr < 0.0) & (b_arr != np.floor(b_arr))):
        raise DomainError("negative base with non-integer exponent")
    with np.errstate(over="ignore"):
        return np.power(a_arr, b_arr)


def _np_exp(a):
    with np.errstate(over="ignore"):
        return np.exp(a)


_NP_UNARY = dict(_PY_UNARY)
_NP_BINARY = dict(_PY_BINARY)


def compile_vectorized(e: Expr) -> Callable[..., np.ndarray]:
    """Return ``fn(x, y=None, z=None)`` evaluating ``e`` elementwise on arrays."""
    namespace = {
        "_sin": np.sin,
        "_cos": np.cos,
        "_tan": np.tan,
        "_exp": _np_exp,
        "_log": _np_log,
        "_sqrt": _np_sqrt,
        "_div": _np_div,
        "_pow": _np_pow,
        "_np": np,
    }
    body = _codegen(e, _NP_UNARY, _NP_BINARY)
    src = (
        "def _fn(x=None, y=None, z=None):\n"
        "    _shape = _np.shape(x)\n"
        f"    return _np.broadcast_to(_np.asarray({body}, dtype=float), _shape).copy()\n"
    )
    exec(compile(src, "<expr-vec>", "exec"), namespace)
    return namespace["_fn"]
