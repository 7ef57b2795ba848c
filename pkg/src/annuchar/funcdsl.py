"""Meromorphic function models.

Two representations are supported:

* :class:`RationalFunction` -- an exactly factored rational function
  ``scale * prod (z - root)**mult`` where positive multiplicities are zeros
  and negative ones are poles.
* :class:`ExpressionFunction` -- a parsed expression tree over ``z`` with
  ``+ - * / ^`` and ``exp``, enough to express functions with essential
  singularities such as ``exp(1/z)``.

Both evaluate on scalars or numpy arrays, expose an exact logarithmic
derivative, and support the two algebraic transforms used everywhere in the
characteristic machinery: subtraction of a constant and reciprocal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "DslError",
    "ParseError",
    "SingularPointError",
    "Const",
    "Var",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "IntPow",
    "Exp",
    "Neg",
    "ExprNode",
    "FunctionModel",
    "RationalFunction",
    "ExpressionFunction",
    "differentiate",
    "parse",
    "unparse",
    "rational",
    "constant",
    "MAX_EXPONENT",
    "SINGULARITY_RTOL",
]

# |factor or denominator| below SINGULARITY_RTOL * max(1, |z|) counts as "at"
# a zero/pole.  Scale-aware so points far from the origin are not flagged.
SINGULARITY_RTOL = 1e-12
MAX_EXPONENT = 64

_NAN = complex(np.nan, np.nan)


class DslError(Exception):
    """Base class for function-model errors."""


class ParseError(DslError):
    """Syntax error in the text DSL; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class SingularPointError(DslError):
    """Evaluation requested at (or too close to) a zero or pole."""


# ---------------------------------------------------------------------------
# Expression trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Add:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class Sub:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class Mul:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class Div:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class IntPow:
    base: "ExprNode"
    exponent: int


@dataclass(frozen=True)
class Exp:
    arg: "ExprNode"


@dataclass(frozen=True)
class Neg:
    arg: "ExprNode"


ExprNode = Union[Const, Var, Add, Sub, Mul, Div, IntPow, Exp, Neg]

_ZERO = Const(0j)
_ONE = Const(1 + 0j)


def _cutoff(z: np.ndarray) -> np.ndarray:
    return SINGULARITY_RTOL * np.maximum(1.0, np.abs(z))


def _eval_node(node: ExprNode, z: np.ndarray, cut: np.ndarray) -> np.ndarray:
    if isinstance(node, Const):
        return np.full(z.shape, complex(node.value))
    if isinstance(node, Var):
        return z
    if isinstance(node, Add):
        return _eval_node(node.left, z, cut) + _eval_node(node.right, z, cut)
    if isinstance(node, Sub):
        return _eval_node(node.left, z, cut) - _eval_node(node.right, z, cut)
    if isinstance(node, Mul):
        return _eval_node(node.left, z, cut) * _eval_node(node.right, z, cut)
    if isinstance(node, Div):
        num = _eval_node(node.left, z, cut)
        den = _eval_node(node.right, z, cut)
        bad = np.abs(den) <= cut
        if bad.any():
            out = num / np.where(bad, 1.0, den)
            out[bad] = _NAN
            return out
        return num / den
    if isinstance(node, IntPow):
        base = _eval_node(node.base, z, cut)
        if node.exponent >= 0:
            return base**node.exponent
        bad = np.abs(base) <= cut
        if bad.any():
            out = np.where(bad, 1.0, base) ** node.exponent
            out[bad] = _NAN
            return out
        return base**node.exponent
    if isinstance(node, Exp):
        return np.exp(_eval_node(node.arg, z, cut))
    if isinstance(node, Neg):
        return -_eval_node(node.arg, z, cut)
    raise TypeError(f"unknown node type {type(node).__name__}")


# Smart constructors: used when building derivative trees so they stay small.
def _add(l: ExprNode, r: ExprNode) -> ExprNode:
    if l == _ZERO:
        return r
    if r == _ZERO:
        return l
    if isinstance(l, Const) and isinstance(r, Const):
        return Const(l.value + r.value)
    return Add(l, r)


def _sub(l: ExprNode, r: ExprNode) -> ExprNode:
    if r == _ZERO:
        return l
    if isinstance(l, Const) and isinstance(r, Const):
        return Const(l.value - r.value)
    if l == _ZERO:
        return _neg(r)
    return Sub(l, r)


def _neg(a: ExprNode) -> ExprNode:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _mul(l: ExprNode, r: ExprNode) -> ExprNode:
    if l == _ZERO or r == _ZERO:
        return _ZERO
    if l == _ONE:
        return r
    if r == _ONE:
        return l
    if isinstance(l, Const) and isinstance(r, Const):
        return Const(l.value * r.value)
    return Mul(l, r)


def _div(l: ExprNode, r: ExprNode) -> ExprNode:
    if r == _ONE:
        return l
    if l == _ZERO:
        return _ZERO
    return Div(l, r)


def _intpow(base: ExprNode, n: int) -> ExprNode:
    if n == 0:
        return _ONE
    if n == 1:
        return base
    return IntPow(base, n)


def differentiate(node: ExprNode) -> ExprNode:
    """Structural derivative of an expression tree with respect to z."""
    if isinstance(node, Const):
        return _ZERO
    if isinstance(node, Var):
        return _ONE
    if isinstance(node, Add):
        return _add(differentiate(node.left), differentiate(node.right))
    if isinstance(node, Sub):
        return _sub(differentiate(node.left), differentiate(node.right))
    if isinstance(node, Mul):
        return _add(
            _mul(differentiate(node.left), node.right),
            _mul(node.left, differentiate(node.right)),
        )
    if isinstance(node, Div):
        num = _sub(
            _mul(differentiate(node.left), node.right),
            _mul(node.left, differentiate(node.right)),
        )
        return _div(num, _intpow(node.right, 2))
    if isinstance(node, IntPow):
        if node.exponent == 0:
            return _ZERO
        inner = _mul(_intpow(node.base, node.exponent - 1), differentiate(node.base))
        return _mul(Const(complex(node.exponent)), inner)
    if isinstance(node, Exp):
        return _mul(Exp(node.arg), differentiate(node.arg))
    if isinstance(node, Neg):
        return _neg(differentiate(node.arg))
    raise TypeError(f"unknown node type {type(node).__name__}")


def _tree_is_entire(node: ExprNode) -> bool:
    """True when the tree structurally has no poles (divisions and negative
    powers only by nonzero constants)."""
    if isinstance(node, (Const, Var)):
        return True
    if isinstance(node, (Add, Sub, Mul)):
        return _tree_is_entire(node.left) and _tree_is_entire(node.right)
    if isinstance(node, Div):
        return (
            _tree_is_entire(node.left)
            and isinstance(node.right, Const)
            and node.right.value != 0
        )
    if isinstance(node, IntPow):
        if node.exponent >= 0:
            return _tree_is_entire(node.base)
        return isinstance(node.base, Const) and node.base.value != 0
    if isinstance(node, Exp):
        return _tree_is_entire(node.arg)
    if isinstance(node, Neg):
        return _tree_is_entire(node.arg)
    return False


# ---------------------------------------------------------------------------
# Function models
# ---------------------------------------------------------------------------


class FunctionModel:
    """Shared evaluation interface for both representations.

    The array methods never raise on singular points: offending entries come
    back as NaN (the quadrature layer treats non-finite samples as singular).
    The scalar wrappers raise :class:`SingularPointError` instead.
    """

    def eval_array(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_deriv_array(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_abs_array(self, z: np.ndarray) -> np.ndarray:
        """log|f(z)| elementwise; -inf at zeros, +inf at poles."""
        with np.errstate(all="ignore"):
            return np.log(np.abs(self.eval_array(np.asarray(z, dtype=complex))))

    def eval(self, z: complex) -> complex:
        v = self.eval_array(np.asarray([complex(z)], dtype=complex))[0]
        if not (np.isfinite(v.real) and np.isfinite(v.imag)):
            raise SingularPointError(f"pole at z = {z!r}")
        return complex(v)

    def log_deriv(self, z: complex) -> complex:
        v = self.log_deriv_array(np.asarray([complex(z)], dtype=complex))[0]
        if not (np.isfinite(v.real) and np.isfinite(v.imag)):
            raise SingularPointError(f"zero or pole at z = {z!r}")
        return complex(v)

    def shift(self, a: complex) -> "FunctionModel":
        """Model of f - a."""
        raise NotImplementedError

    def reciprocal(self) -> "FunctionModel":
        """Model of 1/f."""
        raise NotImplementedError

    def exact_zeros_poles(self) -> Optional[list]:
        """Factor list for rational models, None for black-box expressions."""
        raise NotImplementedError

    def is_entire(self) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class RationalFunction(FunctionModel):
    """scale * prod (z - root)**mult with signed integer multiplicities."""

    scale: complex
    factors: tuple

    def __post_init__(self):
        scale = complex(self.scale)
        if scale == 0:
            raise ValueError("scale must be nonzero")
        factors = tuple((complex(b), int(m)) for b, m in self.factors)
        if any(m == 0 for _, m in factors):
            raise ValueError("multiplicities must be nonzero")
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "factors", factors)

    def eval_array(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        cut = _cutoff(z)
        out = np.full(z.shape, self.scale)
        bad = np.zeros(z.shape, dtype=bool)
        with np.errstate(all="ignore"):
            for b, m in self.factors:
                d = z - b
                if m < 0:
                    sing = np.abs(d) <= cut
                    if sing.any():
                        bad |= sing
                        d = np.where(sing, 1.0, d)
                out = out * d**m
        if bad.any():
            out[bad] = _NAN
        return out

    def log_deriv_array(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        cut = _cutoff(z)
        out = np.zeros(z.shape, dtype=complex)
        bad = np.zeros(z.shape, dtype=bool)
        with np.errstate(all="ignore"):
            for b, m in self.factors:
                d = z - b
                sing = np.abs(d) <= cut
                if sing.any():
                    bad |= sing
                    d = np.where(sing, 1.0, d)
                out = out + m / d
        if bad.any():
            out[bad] = _NAN
        return out

    def log_abs_array(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            out = np.full(z.shape, np.log(abs(self.scale)))
            for b, m in self.factors:
                out = out + m * np.log(np.abs(z - b))
        return out

    def as_tree(self) -> ExprNode:
        node: ExprNode = Const(self.scale)
        for b, m in self.factors:
            node = _mul(node, _intpow(Sub(Var(), Const(b)), m))
        return node

    def shift(self, a: complex) -> FunctionModel:
        if a == 0:
            return self
        return ExpressionFunction(_sub(self.as_tree(), Const(complex(a))))

    def reciprocal(self) -> "RationalFunction":
        return RationalFunction(1 / self.scale, tuple((b, -m) for b, m in self.factors))

    def exact_zeros_poles(self) -> list:
        return list(self.factors)

    def is_entire(self) -> bool:
        return all(m > 0 for _, m in self.factors)

    @property
    def zeros(self) -> tuple:
        return tuple((b, m) for b, m in self.factors if m > 0)

    @property
    def poles(self) -> tuple:
        """Poles as (location, positive multiplicity)."""
        return tuple((b, -m) for b, m in self.factors if m < 0)

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return RationalFunction(self.scale * other.scale, self.factors + other.factors)


@dataclass(frozen=True)
class ExpressionFunction(FunctionModel):
    """Parsed expression tree; the derivative tree is built once, eagerly."""

    tree: ExprNode

    def __post_init__(self):
        object.__setattr__(self, "_dtree", differentiate(self.tree))

    @property
    def derivative_tree(self) -> ExprNode:
        return self._dtree  # type: ignore[attr-defined]

    def eval_array(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            return _eval_node(self.tree, z, _cutoff(z))

    def log_deriv_array(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        cut = _cutoff(z)
        with np.errstate(all="ignore"):
            num = _eval_node(self._dtree, z, cut)  # type: ignore[attr-defined]
            den = _eval_node(self.tree, z, cut)
            bad = np.abs(den) <= cut
            if bad.any():
                out = num / np.where(bad, 1.0, den)
                out[bad] = _NAN
                return out
            return num / den

    def shift(self, a: complex) -> "ExpressionFunction":
        if a == 0:
            return self
        return ExpressionFunction(_sub(self.tree, Const(complex(a))))

    def reciprocal(self) -> "ExpressionFunction":
        return ExpressionFunction(_div(_ONE, self.tree))

    def exact_zeros_poles(self) -> Optional[list]:
        return None

    def is_entire(self) -> bool:
        return _tree_is_entire(self.tree)


def rational(scale: complex, factors: Sequence = ()) -> RationalFunction:
    """Build a factored rational function; factors are (root, multiplicity)."""
    return RationalFunction(complex(scale), tuple(factors))


def constant(c: complex) -> RationalFunction:
    return RationalFunction(complex(c), ())


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_NUM_RE = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z]+")


class _Token:
    __slots__ = ("kind", "value", "offset")

    def __init__(self, kind, value, offset):
        self.kind = kind
        self.value = value
        self.offset = offset


def _tokenize(text: str) -> list:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            m = _NUM_RE.match(text, i)
            if not m:
                raise ParseError("malformed number", i)
            value = float(m.group())
            j = m.end()
            if j < n and text[j] == "i":
                tokens.append(_Token("num", complex(0.0, value), i))
                i = j + 1
            else:
                tokens.append(_Token("num", complex(value, 0.0), i))
                i = j
            continue
        if ch.isalpha():
            m = _IDENT_RE.match(text, i)
            word = m.group()
            if word not in ("z", "i", "exp"):
                raise ParseError(f"unknown identifier {word!r}", i)
            tokens.append(_Token(word, word, i))
            i = m.end()
            continue
        if ch in "+-*/^()":
            tokens.append(_Token(ch, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", None, n))
    return tokens


class _Parser:
    """Recursive descent over:

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' int)?
    atom   := number | 'i' | 'z' | 'exp' '(' expr ')' | '(' expr ')' | '-' atom

    Sums/differences/negations of constants fold, so ``(1+2i)`` is the
    complex literal 1+2i and ``-2`` the literal -2.
    """

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}", tok.offset)
        return self.advance()

    def parse(self) -> ExprNode:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError("trailing input", tok.offset)
        return node

    def expr(self) -> ExprNode:
        node = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            rhs = self.term()
            if isinstance(node, Const) and isinstance(rhs, Const):
                node = Const(node.value + rhs.value if op == "+" else node.value - rhs.value)
            else:
                node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> ExprNode:
        node = self.factor()
        while self.peek().kind in ("*", "/"):
            tok = self.advance()
            rhs = self.factor()
            if tok.kind == "/":
                if isinstance(rhs, Const) and rhs.value == 0:
                    raise ParseError("division by zero constant", tok.offset)
                node = Div(node, rhs)
            else:
                node = Mul(node, rhs)
        return node

    def factor(self) -> ExprNode:
        node = self.atom()
        if self.peek().kind == "^":
            self.advance()
            node = IntPow(node, self.exponent())
        return node

    def exponent(self) -> int:
        negative = False
        if self.peek().kind == "-":
            self.advance()
            negative = True
        tok = self.expect("num")
        value = tok.value
        if value.imag != 0 or not float(value.real).is_integer():
            raise ParseError("exponent must be an integer", tok.offset)
        n = int(value.real)
        if negative:
            n = -n
        if abs(n) > MAX_EXPONENT:
            raise ParseError(f"exponent overflow (|n| > {MAX_EXPONENT})", tok.offset)
        return n

    def atom(self) -> ExprNode:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Const(tok.value)
        if tok.kind == "i":
            self.advance()
            return Const(1j)
        if tok.kind == "z":
            self.advance()
            return Var()
        if tok.kind == "exp":
            self.advance()
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return Exp(inner)
        if tok.kind == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if tok.kind == "-":
            self.advance()
            inner = self.atom()
            if isinstance(inner, Const):
                return Const(-inner.value)
            return Neg(inner)
        raise ParseError("expected a value", tok.offset)


def parse(text: str) -> ExpressionFunction:
    """Parse the text DSL into an expression-backed function model."""
    if not text or not text.strip():
        raise ParseError("empty input", 0)
    return ExpressionFunction(_Parser(text).parse())


# ---------------------------------------------------------------------------
# Unparser (inverse of parse up to constant folding)
# ---------------------------------------------------------------------------

_LEVEL_ADD = 1
_LEVEL_MUL = 2
_LEVEL_POW = 3
_LEVEL_ATOM = 4


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _fmt_const(c: complex) -> str:
    re_, im = c.real, c.imag
    if im == 0:
        return _fmt_float(re_) if re_ >= 0 else "-" + _fmt_float(-re_)
    if re_ == 0:
        return (_fmt_float(im) if im >= 0 else "-" + _fmt_float(-im)) + "i"
    sign = "+" if im >= 0 else "-"
    head = _fmt_float(re_) if re_ >= 0 else "-" + _fmt_float(-re_)
    return f"({head}{sign}{_fmt_float(abs(im))}i)"


def _node_level(node: ExprNode) -> int:
    if isinstance(node, (Add, Sub)):
        return _LEVEL_ADD
    if isinstance(node, (Mul, Div)):
        return _LEVEL_MUL
    if isinstance(node, IntPow):
        return _LEVEL_POW
    return _LEVEL_ATOM


def _unparse(node: ExprNode, min_level: int) -> str:
    if _node_level(node) < min_level:
        return "(" + _unparse(node, _LEVEL_ADD) + ")"
    if isinstance(node, Const):
        return _fmt_const(node.value)
    if isinstance(node, Var):
        return "z"
    if isinstance(node, Add):
        return _unparse(node.left, _LEVEL_ADD) + "+" + _unparse(node.right, _LEVEL_MUL)
    if isinstance(node, Sub):
        return _unparse(node.left, _LEVEL_ADD) + "-" + _unparse(node.right, _LEVEL_MUL)
    if isinstance(node, Mul):
        return _unparse(node.left, _LEVEL_MUL) + "*" + _unparse(node.right, _LEVEL_POW)
    if isinstance(node, Div):
        return _unparse(node.left, _LEVEL_MUL) + "/" + _unparse(node.right, _LEVEL_POW)
    if isinstance(node, IntPow):
        return _unparse(node.base, _LEVEL_ATOM) + "^" + str(node.exponent)
    if isinstance(node, Neg):
        return "-" + _unparse(node.arg, _LEVEL_ATOM)
    if isinstance(node, Exp):
        return "exp(" + _unparse(node.arg, _LEVEL_ADD) + ")"
    raise TypeError(f"unknown node type {type(node).__name__}")


def unparse(node: ExprNode) -> str:
    """Render a tree to DSL text; ``parse(unparse(t)).tree == t`` for trees
    already in parser-canonical form (folded constants)."""
    return _unparse(node, _LEVEL_ADD)
