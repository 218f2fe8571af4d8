"""Closed-form radial functions: parsing and exact 2-jet evaluation.

A ``RadialFunction`` is a parsed expression in the single variable ``r``.
Evaluation is done in forward mode on 2-jets ``(value, d1, d2)`` so every
consumer gets first and second derivatives exact to round-off, with no
finite differencing anywhere.

Grammar (loosest to tightest binding)::

    expr    :=  term  (('+' | '-') term)*
    term    :=  factor (('*' | '/') factor)*
    factor  :=  '-' factor | power
    power   :=  atom ('^' factor)?          # right associative
    atom    :=  number | 'r' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'

``^`` with a non-constant exponent is evaluated as ``exp(exponent*log(base))``
and therefore requires a positive base.
"""

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ExprSyntaxError, UnknownIdentifier

FUNCTIONS = ("exp", "log", "sqrt", "sinh", "cosh", "tanh", "sin", "cos")
CONSTANTS = {"pi": math.pi, "e": math.e}


# --- AST -----------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float

    def to_source(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var:
    def to_source(self):
        return "r"


@dataclass(frozen=True)
class Unary:
    op: str          # 'neg' or a function name
    arg: object

    def to_source(self):
        if self.op == "neg":
            return f"(-{self.arg.to_source()})"
        return f"{self.op}({self.arg.to_source()})"


@dataclass(frozen=True)
class Binary:
    op: str          # '+', '-', '*', '/', '^'
    left: object
    right: object

    def to_source(self):
        return f"({self.left.to_source()} {self.op} {self.right.to_source()})"


# --- tokenizer -----------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise ExprSyntaxError(f"unexpected character {stripped[0]!r}", bad_at)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append((m.group("op"), m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.peek()
        if tok[0] != kind:
            raise ExprSyntaxError(f"unexpected {tok[1]!r}" if tok[0] != "end"
                                  else "unexpected end of input",
                                  tok[2], expected={kind})
        return self.advance()

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected {tok[1]!r}", tok[2],
                                  expected={"end"})
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            node = Binary(op, node, self.factor())
        return node

    def factor(self):
        if self.peek()[0] == "-":
            self.advance()
            return Unary("neg", self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            return Binary("^", base, self.factor())
        return base

    def atom(self):
        kind, value, pos = self.peek()
        if kind == "num":
            self.advance()
            return Const(float(value))
        if kind == "ident":
            self.advance()
            if value == "r":
                return Var()
            if value in CONSTANTS:
                return Const(CONSTANTS[value])
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(value, arg)
            raise UnknownIdentifier(value, pos)
        if kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(
            f"unexpected {value!r}" if kind != "end" else "unexpected end of input",
            pos, expected={"num", "ident", "(", "-"})


# --- 2-jet arithmetic ----------------------------------------------------

class Jet2:
    """Value with first and second derivative w.r.t. r.

    Entries may be floats or numpy arrays (vectorized evaluation).
    """

    __slots__ = ("value", "d1", "d2")

    def __init__(self, value, d1=0.0, d2=0.0):
        self.value = value
        self.d1 = d1
        self.d2 = d2

    def __repr__(self):
        return f"Jet2({self.value}, {self.d1}, {self.d2})"

    def astuple(self):
        return (self.value, self.d1, self.d2)


def _jadd(a, b):
    return Jet2(a.value + b.value, a.d1 + b.d1, a.d2 + b.d2)


def _jsub(a, b):
    return Jet2(a.value - b.value, a.d1 - b.d1, a.d2 - b.d2)


def _jmul(a, b):
    return Jet2(a.value * b.value,
                a.d1 * b.value + a.value * b.d1,
                a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2)


def _jdiv(a, b):
    v = a.value / b.value
    d1 = (a.d1 - v * b.d1) / b.value
    d2 = (a.d2 - 2.0 * d1 * b.d1 - v * b.d2) / b.value
    return Jet2(v, d1, d2)


def _jchain(u, f, df, d2f):
    # f(u): d1 = f'(u) u', d2 = f'(u) u'' + f''(u) u'^2
    return Jet2(f, df * u.d1, df * u.d2 + d2f * u.d1 * u.d1)


def _jpow(a, b):
    if isinstance(b, Jet2) and np.all(b.d1 == 0.0) and np.all(b.d2 == 0.0):
        c = float(np.asarray(b.value).reshape(-1)[0]) if np.ndim(b.value) else float(b.value)
        if c == 0.0:
            one = 1.0 + 0.0 * a.value
            return Jet2(one, 0.0 * one, 0.0 * one)
        if c == 1.0:
            return a
        if c == round(c) or np.all(a.value > 0):
            v = a.value ** c
            dv = c * a.value ** (c - 1.0)
            if c == 2.0:
                d2v = 2.0 + 0.0 * v
            else:
                d2v = c * (c - 1.0) * a.value ** (c - 2.0)
            return _jchain(a, v, dv, d2v)
        raise DomainError("non-integer power of a non-positive base")
    # general case: exp(b * log a), requires a > 0
    if np.any(np.asarray(a.value) <= 0):
        raise DomainError("variable exponent requires a positive base")
    return _jexp(_jmul(b, _jlog(a)))


def _jexp(u):
    v = np.exp(u.value)
    return _jchain(u, v, v, v)


def _jlog(u):
    if np.any(np.asarray(u.value) <= 0):
        raise DomainError("log of a non-positive argument")
    v = np.log(u.value)
    return _jchain(u, v, 1.0 / u.value, -1.0 / (u.value * u.value))


def _jsqrt(u):
    if np.any(np.asarray(u.value) <= 0):
        raise DomainError("sqrt of a non-positive argument")
    v = np.sqrt(u.value)
    return _jchain(u, v, 0.5 / v, -0.25 / (v * u.value))


_UNARY = {
    "neg": lambda u: Jet2(-u.value, -u.d1, -u.d2),
    "exp": _jexp,
    "log": _jlog,
    "sqrt": _jsqrt,
    "sinh": lambda u: _jchain(u, np.sinh(u.value), np.cosh(u.value), np.sinh(u.value)),
    "cosh": lambda u: _jchain(u, np.cosh(u.value), np.sinh(u.value), np.cosh(u.value)),
    "tanh": lambda u: _jchain(u, np.tanh(u.value),
                              1.0 / np.cosh(u.value) ** 2,
                              -2.0 * np.tanh(u.value) / np.cosh(u.value) ** 2),
    "sin": lambda u: _jchain(u, np.sin(u.value), np.cos(u.value), -np.sin(u.value)),
    "cos": lambda u: _jchain(u, np.cos(u.value), -np.sin(u.value), -np.cos(u.value)),
}

_BINARY = {"+": _jadd, "-": _jsub, "*": _jmul, "/": _jdiv, "^": _jpow}


def _eval_ast(node, seed):
    if isinstance(node, Const):
        zero = 0.0 * seed.d1
        return Jet2(node.value + 0.0 * seed.value, zero, zero)
    if isinstance(node, Var):
        return seed
    if isinstance(node, Unary):
        return _UNARY[node.op](_eval_ast(node.arg, seed))
    return _BINARY[node.op](_eval_ast(node.left, seed),
                            _eval_ast(node.right, seed))


def eval_scalar(node, r, lib=math):
    """Evaluate just the value of an AST with an arbitrary math library.

    ``lib`` must provide exp/log/sqrt/sinh/cosh/tanh/sin/cos; passing
    ``mpmath`` gives arbitrary exponent range for magnitudes beyond the
    float range.
    """
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return r
    if isinstance(node, Unary):
        u = eval_scalar(node.arg, r, lib)
        if node.op == "neg":
            return -u
        return getattr(lib, node.op)(u)
    a = eval_scalar(node.left, r, lib)
    b = eval_scalar(node.right, r, lib)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return a ** b


def log_value(node, r):
    """log of a positive-valued AST at r, avoiding overflow structurally.

    Products become sums of logs, ``log(exp(x)) = x``, powers multiply the
    log, sums go through logaddexp.  Falls back to ``log(direct value)``
    for anything else; the result may be non-finite for adversarial
    expressions, in which case callers fall back to mpmath.
    """
    r = np.asarray(r, dtype=float)
    if isinstance(node, Binary):
        if node.op == "*":
            return log_value(node.left, r) + log_value(node.right, r)
        if node.op == "/":
            return log_value(node.left, r) - log_value(node.right, r)
        if node.op == "^":
            if isinstance(node.right, Const):
                return node.right.value * log_value(node.left, r)
            return eval_scalar(node.right, r, np) * log_value(node.left, r)
        if node.op == "+":
            return np.logaddexp(log_value(node.left, r),
                                log_value(node.right, r))
    if isinstance(node, Unary):
        if node.op == "exp":
            return np.asarray(eval_scalar(node.arg, r, np), dtype=float)
        if node.op == "sqrt":
            return 0.5 * log_value(node.arg, r)
        if node.op in ("sinh", "cosh"):
            x = np.asarray(eval_scalar(node.arg, r, np), dtype=float)
            ax = np.abs(x)
            # |x| - log 2 + log(1 -+ e^{-2|x|}); sinh assumed positive
            corr = np.log1p(-np.exp(-2.0 * ax)) if node.op == "sinh" \
                else np.log1p(np.exp(-2.0 * ax))
            return ax - math.log(2.0) + corr
    if isinstance(node, Var):
        return np.log(r)
    if isinstance(node, Const):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(node.value) + 0.0 * r
    with np.errstate(all="ignore"):
        return np.log(np.asarray(eval_scalar(node, r, np), dtype=float))


def _contains_var(node):
    if isinstance(node, Var):
        return True
    if isinstance(node, Unary):
        return _contains_var(node.arg)
    if isinstance(node, Binary):
        return _contains_var(node.left) or _contains_var(node.right)
    return False


def _log_jet_ast(node, seed):
    if isinstance(node, Binary):
        if node.op == "*":
            return _jadd(_log_jet_ast(node.left, seed),
                         _log_jet_ast(node.right, seed))
        if node.op == "/":
            return _jsub(_log_jet_ast(node.left, seed),
                         _log_jet_ast(node.right, seed))
        if node.op == "^":
            if not _contains_var(node.right):
                c = eval_scalar(node.right, 0.0)
                lj = _log_jet_ast(node.left, seed)
                return Jet2(c * lj.value, c * lj.d1, c * lj.d2)
            return _jmul(_eval_ast(node.right, seed),
                         _log_jet_ast(node.left, seed))
    if isinstance(node, Unary):
        if node.op == "exp":
            return _eval_ast(node.arg, seed)
        if node.op == "sqrt":
            lj = _log_jet_ast(node.arg, seed)
            return Jet2(0.5 * lj.value, 0.5 * lj.d1, 0.5 * lj.d2)
        if node.op in ("sinh", "cosh"):
            u = _eval_ast(node.arg, seed)
            x = u.value
            ax = np.abs(x)
            t = np.tanh(x)
            if node.op == "sinh":
                lv = ax - math.log(2.0) + np.log1p(-np.exp(-2.0 * ax))
                d1 = u.d1 / t                       # coth(x) x'
                d2 = u.d2 / t - (1.0 / (t * t) - 1.0) * u.d1 * u.d1
            else:
                lv = ax - math.log(2.0) + np.log1p(np.exp(-2.0 * ax))
                d1 = t * u.d1
                d2 = t * u.d2 + (1.0 - t * t) * u.d1 * u.d1
            return Jet2(lv, d1, d2)
    return _jlog(_eval_ast(node, seed))


def log_jet(node, r):
    """Jet2 of log f(r), computed structurally like ``log_value``.

    Gives the logarithmic derivative f'/f (and its derivative) where f
    itself over- or underflows; products become sums of log-jets, log
    cancels exp, hyperbolics reduce through tanh.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim == 0:
        seed = Jet2(float(r), 1.0, 0.0)
    else:
        seed = Jet2(r, np.ones_like(r), np.zeros_like(r))
    with np.errstate(all="ignore"):
        return _log_jet_ast(node, seed)


# --- public surface ------------------------------------------------------

@dataclass(frozen=True)
class RadialFunction:
    ast: object
    source_text: str

    def jet(self, r):
        """2-jet (value, d1, d2) at ``r``; ``r`` may be a float or an array."""
        r = np.asarray(r, dtype=float)
        if r.ndim == 0:
            r = float(r)
            seed = Jet2(r, 1.0, 0.0)
        else:
            seed = Jet2(r, np.ones_like(r), np.zeros_like(r))
        with np.errstate(all="ignore"):
            out = _eval_ast(self.ast, seed)
        for entry in out.astuple():
            if not np.all(np.isfinite(entry)):
                raise DomainError(
                    f"non-finite jet for {self.source_text!r} at r={r!r}")
        return out

    def __call__(self, r):
        return self.jet(r).value

    def d1(self, r):
        return self.jet(r).d1

    def d2(self, r):
        return self.jet(r).d2

    def canonical(self):
        """Fully parenthesized form that re-parses to an identical AST."""
        return self.ast.to_source()


def parse_expr(text):
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    ast = _Parser(text).parse()
    return RadialFunction(ast=ast, source_text=text)


def eval_jet(fn, r):
    return fn.jet(r)
