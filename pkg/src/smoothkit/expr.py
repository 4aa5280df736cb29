"""Closed symbolic expression class with exact scalars.

The node kinds are fixed: constants in Q(sqrt2), variables, sums, products,
nonnegative integer powers, sin/cos, the flat gadget t -> exp(-1/t^2)
(extended by 0 at t = 0), absolute value, three-branch sign piecewise,
region-restricted reciprocal, and the Euclidean norm of a vector of
subexpressions.  The class is closed under differentiation away from guard
zero loci, which is what the certification machinery relies on.

Grammar (UTF-8 text): scalars `p/q` and `sqrt2`; variables `x0..x{n-1}` or
`t`; operators `+ - * ^` (nonnegative integer exponent); functions
`sin cos flat abs recip norm`; piecewise `cases(g; a, b, c)` selecting by
the sign of g.  The printer emits a fully parenthesized canonical form, and
parse(print(e)) equals e up to normal form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .field import ONE, SQRT2, ZERO, Scalar
from .polynomial import Polynomial


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class Expr:
    __slots__ = ()

    def __add__(self, other):
        return add(self, to_expr(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, mul(const(-1), to_expr(other)))

    def __rsub__(self, other):
        return add(to_expr(other), mul(const(-1), self))

    def __mul__(self, other):
        return mul(self, to_expr(other))

    __rmul__ = __mul__

    def __neg__(self):
        return mul(const(-1), self)

    def __pow__(self, n: int):
        return ipow(self, n)


@dataclass(frozen=True)
class Const(Expr):
    value: Scalar


@dataclass(frozen=True)
class Var(Expr):
    index: int


@dataclass(frozen=True)
class Sum(Expr):
    terms: tuple


@dataclass(frozen=True)
class Product(Expr):
    factors: tuple


@dataclass(frozen=True)
class IntPow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Sin(Expr):
    arg: Expr


@dataclass(frozen=True)
class Cos(Expr):
    arg: Expr


@dataclass(frozen=True)
class Flat(Expr):
    """t -> exp(-1/t^2) for t != 0, and exactly 0 at t = 0."""

    arg: Expr


@dataclass(frozen=True)
class Abs(Expr):
    arg: Expr


@dataclass(frozen=True)
class Recip(Expr):
    """1/u on the region u != 0; evaluation at a zero of u is an error."""

    arg: Expr


@dataclass(frozen=True)
class Norm(Expr):
    """Euclidean norm sqrt(sum of squares) of the argument vector."""

    args: tuple


@dataclass(frozen=True)
class Cases(Expr):
    """Piecewise by the sign of the guard: neg if g<0, zero if g=0, pos if g>0."""

    guard: Expr
    neg: Expr
    zero: Expr
    pos: Expr


@dataclass(frozen=True)
class Undefined(Expr):
    """Marker for a value with no globally valid formula (derivative gaps)."""


# ---------------------------------------------------------------------------
# Smart constructors


def const(x) -> Const:
    if isinstance(x, Scalar):
        return Const(x)
    return Const(Scalar.of(x))


E_ZERO = const(0)
E_ONE = const(1)
E_SQRT2 = Const(SQRT2)


def to_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction, Scalar)):
        return const(x)
    raise TypeError(f"cannot coerce {x!r} to Expr")


def var(i: int) -> Var:
    if i < 0:
        raise ExprError("variable index must be nonnegative")
    return Var(i)


def add(*terms) -> Expr:
    flat: list = []
    acc = ZERO
    for t in terms:
        t = to_expr(t)
        if isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    rest = []
    for t in flat:
        if isinstance(t, Const):
            acc = acc + t.value
        else:
            rest.append(t)
    if not acc.is_zero() or not rest:
        rest = ([Const(acc)] if not acc.is_zero() or not rest else []) + rest
    if len(rest) == 1:
        return rest[0]
    return Sum(tuple(rest))


def mul(*factors) -> Expr:
    flat: list = []
    acc = ONE
    for f in factors:
        f = to_expr(f)
        if isinstance(f, Product):
            flat.extend(f.factors)
        else:
            flat.append(f)
    rest = []
    for f in flat:
        if isinstance(f, Const):
            acc = acc * f.value
        else:
            rest.append(f)
    if acc.is_zero():
        return E_ZERO
    if not (acc - ONE).is_zero() or not rest:
        rest = [Const(acc)] + rest if (not (acc - ONE).is_zero() or not rest) else rest
    if len(rest) == 1:
        return rest[0]
    return Product(tuple(rest))


def ipow(base, n: int) -> Expr:
    base = to_expr(base)
    if n < 0:
        raise ExprError("IntPow exponent must be nonnegative; use recip for inverses")
    if n == 0:
        return E_ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        return Const(base.value**n)
    if isinstance(base, IntPow):
        return IntPow(base.base, base.exponent * n)
    return IntPow(base, n)


def sin(e) -> Expr:
    return Sin(to_expr(e))


def cos(e) -> Expr:
    return Cos(to_expr(e))


def flat(e) -> Expr:
    e = to_expr(e)
    if isinstance(e, Const) and e.value.is_zero():
        return E_ZERO
    return Flat(e)


def abs_(e) -> Expr:
    e = to_expr(e)
    if isinstance(e, Const):
        return Const(abs(e.value))
    return Abs(e)


def recip(e) -> Expr:
    e = to_expr(e)
    if isinstance(e, Const):
        return Const(e.value.inverse())
    return Recip(e)


def norm(*args) -> Expr:
    return Norm(tuple(to_expr(a) for a in args))


def cases(guard, neg, zero, pos) -> Expr:
    guard = to_expr(guard)
    neg, zero, pos = to_expr(neg), to_expr(zero), to_expr(pos)
    if neg == zero == pos:
        return neg
    return Cases(guard, neg, zero, pos)


# ---------------------------------------------------------------------------
# Tree utilities


def children(e: Expr) -> tuple:
    if isinstance(e, (Const, Var, Undefined)):
        return ()
    if isinstance(e, Sum):
        return e.terms
    if isinstance(e, Product):
        return e.factors
    if isinstance(e, IntPow):
        return (e.base,)
    if isinstance(e, (Sin, Cos, Flat, Abs, Recip)):
        return (e.arg,)
    if isinstance(e, Norm):
        return e.args
    if isinstance(e, Cases):
        return (e.guard, e.neg, e.zero, e.pos)
    raise TypeError(f"unknown node {e!r}")


def rebuild(e: Expr, kids: tuple) -> Expr:
    if isinstance(e, (Const, Var, Undefined)):
        return e
    if isinstance(e, Sum):
        return add(*kids)
    if isinstance(e, Product):
        return mul(*kids)
    if isinstance(e, IntPow):
        return ipow(kids[0], e.exponent)
    if isinstance(e, Sin):
        return sin(kids[0])
    if isinstance(e, Cos):
        return cos(kids[0])
    if isinstance(e, Flat):
        return flat(kids[0])
    if isinstance(e, Abs):
        return abs_(kids[0])
    if isinstance(e, Recip):
        return recip(kids[0])
    if isinstance(e, Norm):
        return norm(*kids)
    if isinstance(e, Cases):
        return cases(*kids)
    raise TypeError(f"unknown node {e!r}")


def node_kinds(e: Expr) -> set:
    kinds = {type(e).__name__}
    for c in children(e):
        kinds |= node_kinds(c)
    return kinds


def contains_kind(e: Expr, *types) -> bool:
    if isinstance(e, types):
        return True
    return any(contains_kind(c, *types) for c in children(e))


def max_var_index(e: Expr) -> int:
    if isinstance(e, Var):
        return e.index
    return max((max_var_index(c) for c in children(e)), default=-1)


def arity(e: Expr) -> int:
    """Minimal ambient dimension: one more than the largest variable index."""
    return max_var_index(e) + 1


def substitute(e: Expr, args) -> Expr:
    """Replace Var(i) by args[i]; the composition (e o args) as an expression."""
    if isinstance(e, Var):
        if e.index >= len(args):
            raise ExprError(
                f"substitution needs {e.index + 1} components, got {len(args)}"
            )
        return to_expr(args[e.index])
    kids = tuple(substitute(c, args) for c in children(e))
    return rebuild(e, kids)


compose = substitute


# ---------------------------------------------------------------------------
# Printer


def to_text(e: Expr) -> str:
    if isinstance(e, Const):
        v = e.value
        if v.b == 0:
            return str(v.a) if v.a >= 0 else f"(-{-v.a})"
        # General field elements print as a parenthesized sum the grammar accepts.
        parts = []
        if v.a != 0:
            parts.append(str(v.a))
        if v.b == 1:
            parts.append("sqrt2")
        elif v.b == -1:
            parts.append("-sqrt2")
        else:
            parts.append(f"{v.b}*sqrt2")
        inner = parts[0]
        for p in parts[1:]:
            inner = f"{inner} + {p}" if not p.startswith("-") else f"{inner} - {p[1:]}"
        return f"({inner})"
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Sum):
        return "(" + " + ".join(to_text(t) for t in e.terms) + ")"
    if isinstance(e, Product):
        return "(" + " * ".join(to_text(f) for f in e.factors) + ")"
    if isinstance(e, IntPow):
        return f"{to_text(e.base)}^{e.exponent}"
    if isinstance(e, Sin):
        return f"sin({to_text(e.arg)})"
    if isinstance(e, Cos):
        return f"cos({to_text(e.arg)})"
    if isinstance(e, Flat):
        return f"flat({to_text(e.arg)})"
    if isinstance(e, Abs):
        return f"abs({to_text(e.arg)})"
    if isinstance(e, Recip):
        return f"recip({to_text(e.arg)})"
    if isinstance(e, Norm):
        return "norm(" + ", ".join(to_text(a) for a in e.args) + ")"
    if isinstance(e, Cases):
        return (
            f"cases({to_text(e.guard)}; {to_text(e.neg)}, "
            f"{to_text(e.zero)}, {to_text(e.pos)})"
        )
    if isinstance(e, Undefined):
        return "undefined"
    raise TypeError(f"unknown node {e!r}")


# ---------------------------------------------------------------------------
# Parser: recursive descent with positions.

_FUNCTIONS = {"sin", "cos", "flat", "abs", "recip"}


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        self.skip_ws()
        if self.peek() != ch:
            raise ParseError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def number(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise ParseError("expected a number", start)
        return int(self.text[start : self.pos])

    def ident(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        return self.text[start : self.pos]


def parse_expr(text: str, dim: int) -> Expr:
    """Parse an expression over x0..x{dim-1} (or t when dim == 1)."""
    toks = _Tokens(text)
    e = _parse_sum(toks, dim)
    toks.skip_ws()
    if toks.pos != len(text):
        raise ParseError("unexpected trailing input", toks.pos)
    return e


def _parse_sum(toks: _Tokens, dim: int) -> Expr:
    terms = [_parse_term(toks, dim)]
    while True:
        ch = toks.peek()
        if ch == "+":
            toks.pos += 1
            terms.append(_parse_term(toks, dim))
        elif ch == "-":
            toks.pos += 1
            terms.append(mul(const(-1), _parse_term(toks, dim)))
        else:
            break
    return add(*terms)


def _parse_term(toks: _Tokens, dim: int) -> Expr:
    factors = [_parse_factor(toks, dim)]
    while toks.peek() == "*":
        toks.pos += 1
        factors.append(_parse_factor(toks, dim))
    return mul(*factors)


def _parse_factor(toks: _Tokens, dim: int) -> Expr:
    if toks.peek() == "-":
        toks.pos += 1
        return mul(const(-1), _parse_factor(toks, dim))
    e = _parse_atom(toks, dim)
    while toks.peek() == "^":
        toks.pos += 1
        if toks.peek() == "-":
            raise ParseError("exponents must be nonnegative integers", toks.pos)
        n = toks.number()
        e = ipow(e, n)
    return e


def _parse_atom(toks: _Tokens, dim: int) -> Expr:
    ch = toks.peek()
    if ch == "(":
        toks.pos += 1
        e = _parse_sum(toks, dim)
        toks.expect(")")
        return e
    if ch.isdigit():
        p = toks.number()
        if toks.peek() == "/":
            toks.pos += 1
            q = toks.number()
            if q == 0:
                raise ParseError("zero denominator", toks.pos)
            return const(Fraction(p, q))
        return const(p)
    start = toks.pos
    name = toks.ident()
    if not name:
        raise ParseError("expected an expression", start)
    if name == "sqrt2":
        return E_SQRT2
    if name == "t":
        if dim != 1:
            raise ParseError("variable 't' is only valid in dimension 1", start)
        return Var(0)
    if name.startswith("x") and name[1:].isdigit():
        idx = int(name[1:])
        if idx >= dim:
            raise ParseError(
                f"variable x{idx} out of range for dimension {dim}", start
            )
        return Var(idx)
    if name == "cases":
        toks.expect("(")
        g = _parse_sum(toks, dim)
        toks.expect(";")
        a = _parse_sum(toks, dim)
        toks.expect(",")
        b = _parse_sum(toks, dim)
        toks.expect(",")
        c = _parse_sum(toks, dim)
        toks.expect(")")
        return cases(g, a, b, c)
    if name == "norm":
        toks.expect("(")
        args = [_parse_sum(toks, dim)]
        while toks.peek() == ",":
            toks.pos += 1
            args.append(_parse_sum(toks, dim))
        toks.expect(")")
        return norm(*args)
    if name in _FUNCTIONS:
        toks.expect("(")
        a = _parse_sum(toks, dim)
        toks.expect(")")
        return {
            "sin": sin,
            "cos": cos,
            "flat": flat,
            "abs": abs_,
            "recip": recip,
        }[name](a)
    if name == "undefined":
        return Undefined()
    raise ParseError(f"unknown name {name!r}", start)


# ---------------------------------------------------------------------------
# Polynomial bridge and normal form


def expr_to_polynomial(e: Expr, nvars: int | None = None):
    """Convert the polynomial fragment to an exact Polynomial, else None."""
    if nvars is None:
        nvars = arity(e)

    def rec(e: Expr):
        if isinstance(e, Const):
            return Polynomial.constant(nvars, e.value)
        if isinstance(e, Var):
            return Polynomial.variable(nvars, e.index)
        if isinstance(e, Sum):
            out = Polynomial(nvars, ())
            for t in e.terms:
                p = rec(t)
                if p is None:
                    return None
                out = out + p
            return out
        if isinstance(e, Product):
            out = Polynomial.constant(nvars, ONE)
            for f in e.factors:
                p = rec(f)
                if p is None:
                    return None
                out = out * p
            return out
        if isinstance(e, IntPow):
            p = rec(e.base)
            return None if p is None else p**e.exponent
        return None

    return rec(e)


def polynomial_to_expr(p: Polynomial) -> Expr:
    terms = []
    for e, c in p.coeffs:
        factors = [Const(c)]
        for i, k in enumerate(e):
            if k:
                factors.append(ipow(Var(i), k))
        terms.append(mul(*factors))
    return add(*terms)


def _sort_key(e: Expr) -> tuple:
    return (type(e).__name__, to_text(e))


def normalize(e: Expr) -> Expr:
    """Canonical form: expand polynomial subtrees, fold constants, sort."""
    kids = tuple(normalize(c) for c in children(e))
    e = rebuild(e, kids)
    p = expr_to_polynomial(e)
    if p is not None:
        return polynomial_to_expr(p)
    if isinstance(e, Sum):
        return add(*sorted(e.terms, key=_sort_key))
    if isinstance(e, Product):
        collected: dict = {}
        order: list = []
        consts = ONE
        for f in sorted(e.factors, key=_sort_key):
            base, k = (f.base, f.exponent) if isinstance(f, IntPow) else (f, 1)
            if isinstance(base, Const):
                consts = consts * base.value**k
                continue
            if base not in collected:
                collected[base] = 0
                order.append(base)
            collected[base] += k
        factors = [ipow(b, collected[b]) for b in order]
        return mul(const(consts), *factors)
    if isinstance(e, Cases):
        if e.neg == e.pos == e.zero:
            return e.neg
        if isinstance(e.guard, Const):
            s = e.guard.value.sign()
            return e.neg if s < 0 else (e.pos if s > 0 else e.zero)
    if isinstance(e, Abs) and isinstance(e.arg, Abs):
        return e.arg
    return e


def equal_normal(e1: Expr, e2: Expr) -> bool:
    """Exact symbolic equality for the polynomial fragment, else structural
    equality of normal forms (sound when True; False may mean 'not decided')."""
    n1, n2 = normalize(e1), normalize(e2)
    if n1 == n2:
        return True
    nvars = max(arity(n1), arity(n2))
    p1, p2 = expr_to_polynomial(n1, nvars), expr_to_polynomial(n2, nvars)
    if p1 is not None and p2 is not None:
        return (p1 - p2).is_zero()
    return False
