"""Differentiation, evaluation, one-sided jets, and numeric probes.

Differentiation is total on the expression class away from guard zero loci.
For the flat gadget the extension by zero at the flat point is built into
the returned piecewise node, so iterated derivatives of flat chains remain
globally correct.  Differentiating `abs` or a piecewise node across its
guard locus yields an expression containing an `undefined` marker in the
middle branch; callers needing global validity must check
`derivative_valid_everywhere`.

The numeric probe protocol is fixed: finite-difference step ladder
{1e-2, 1e-3, 1e-4}, divergence growth factor 10, derivative order cap 4,
relative tolerance 1e-6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .expr import (
    Abs,
    Cases,
    Const,
    Cos,
    E_ZERO,
    Expr,
    Flat,
    IntPow,
    Norm,
    Product,
    Recip,
    Sin,
    Sum,
    Undefined,
    Var,
    abs_,
    add,
    cases,
    children,
    const,
    contains_kind,
    cos,
    flat,
    ipow,
    mul,
    norm,
    normalize,
    recip,
    sin,
    to_text,
)
from .field import Scalar

FD_STEPS = (1e-2, 1e-3, 1e-4)
GROWTH_FACTOR = 10.0
ORDER_CAP = 4
REL_TOL = 1e-6
DIVERGENCE_FLOOR = 1e3


class EvaluationError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# Evaluation: exact on the exact fragment, float elsewhere, never NaN.


def _as_value(x):
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int,)) or type(x).__name__ == "Fraction":
        return Scalar.of(x)
    if isinstance(x, float):
        if math.isnan(x):
            raise EvaluationError("NaN input")
        return x
    raise EvaluationError(f"bad point coordinate {x!r}")


def _to_float(v) -> float:
    return v.to_float() if isinstance(v, Scalar) else v


def _v_add(a, b):
    if isinstance(a, Scalar) and isinstance(b, Scalar):
        return a + b
    return _to_float(a) + _to_float(b)


def _v_mul(a, b):
    if isinstance(a, Scalar) and isinstance(b, Scalar):
        return a * b
    return _to_float(a) * _to_float(b)


def _v_sign(v) -> int:
    if isinstance(v, Scalar):
        return v.sign()
    if math.isnan(v):
        raise EvaluationError("NaN guard")
    return 0 if v == 0.0 else (1 if v > 0 else -1)


def evaluate(e: Expr, point):
    """Evaluate at a point of Scalars and/or floats.

    Exact (Scalar) result whenever every subexpression stays in the exact
    fragment; float otherwise.  Flat(0) is exactly 0.  Division by zero and
    NaN raise EvaluationError.
    """
    pt = tuple(_as_value(x) for x in point)

    def rec(e: Expr):
        if isinstance(e, Const):
            return e.value
        if isinstance(e, Var):
            if e.index >= len(pt):
                raise EvaluationError(
                    f"point has {len(pt)} coordinates, needs {e.index + 1}"
                )
            return pt[e.index]
        if isinstance(e, Sum):
            out = Scalar.of(0)
            for t in e.terms:
                out = _v_add(out, rec(t))
            return out
        if isinstance(e, Product):
            out = Scalar.of(1)
            for f in e.factors:
                out = _v_mul(out, rec(f))
            return out
        if isinstance(e, IntPow):
            v = rec(e.base)
            if isinstance(v, Scalar):
                return v**e.exponent
            try:
                r = v**e.exponent
            except OverflowError as exc:
                raise EvaluationError("overflow in power") from exc
            if math.isinf(r):
                raise EvaluationError("overflow in power")
            return r
        if isinstance(e, Sin):
            return math.sin(_to_float(rec(e.arg)))
        if isinstance(e, Cos):
            return math.cos(_to_float(rec(e.arg)))
        if isinstance(e, Flat):
            v = rec(e.arg)
            if isinstance(v, Scalar):
                if v.is_zero():
                    return Scalar.of(0)
                v = v.to_float()
            if v == 0.0:
                return 0.0
            vv = v * v
            if vv == 0.0:  # underflow: the true value is below float range
                return 0.0
            try:
                return math.exp(-1.0 / vv)
            except OverflowError:  # huge argument: exp(-tiny) ~ 1
                return 1.0
        if isinstance(e, Abs):
            v = rec(e.arg)
            return abs(v) if isinstance(v, Scalar) else abs(v)
        if isinstance(e, Recip):
            v = rec(e.arg)
            if isinstance(v, Scalar):
                if v.is_zero():
                    raise EvaluationError(
                        f"division by zero in recip({to_text(e.arg)})"
                    )
                return v.inverse()
            if v == 0.0:
                raise EvaluationError(f"division by zero in recip({to_text(e.arg)})")
            return 1.0 / v
        if isinstance(e, Norm):
            vals = [rec(a) for a in e.args]
            if all(isinstance(v, Scalar) for v in vals):
                if all(v.is_zero() for v in vals):
                    return Scalar.of(0)
                if len(vals) == 1:
                    return abs(vals[0])
            return math.sqrt(sum(_to_float(v) ** 2 for v in vals))
        if isinstance(e, Cases):
            s = _v_sign(rec(e.guard))
            branch = e.neg if s < 0 else (e.pos if s > 0 else e.zero)
            return rec(branch)
        if isinstance(e, Undefined):
            raise EvaluationError("evaluation of an undefined marker")
        raise TypeError(f"unknown node {e!r}")

    out = rec(e)
    if isinstance(out, float) and math.isnan(out):
        raise EvaluationError("NaN result")
    return out


def as_callable(e: Expr):
    def fn(*xs: float) -> float:
        return _to_float(evaluate(e, xs))

    return fn


# ---------------------------------------------------------------------------
# Differentiation


def _same_zero_locus(h: Expr, g: Expr) -> bool:
    """Syntactic check that h vanishes exactly where g does (h = c*g forms)."""
    if h == g:
        return True
    hn, gn = normalize(h), normalize(g)
    if hn == gn:
        return True
    if isinstance(hn, Product):
        rest = [f for f in hn.factors if not isinstance(f, Const)]
        if len(rest) == 1 and rest[0] == gn:
            return True
    if isinstance(gn, Product):
        rest = [f for f in gn.factors if not isinstance(f, Const)]
        if len(rest) == 1 and rest[0] == hn:
            return True
    return False


def flat_dominated_wrt_guard(e: Expr, g: Expr) -> bool:
    """True when every additive term of e carries a flat factor pinned to the
    zero locus of g, so e and all its derivatives tend to 0 on that locus."""
    en = normalize(e)
    if en == E_ZERO:
        return True
    terms = en.terms if isinstance(en, Sum) else (en,)

    def factor_qualifies(f: Expr) -> bool:
        if isinstance(f, IntPow):
            f = f.base
        if isinstance(f, Flat):
            return _same_zero_locus(f.arg, g)
        if isinstance(f, Cases) and _same_zero_locus(f.guard, g):
            return all(
                flat_dominated_wrt_guard(b, g) or normalize(b) == E_ZERO
                for b in (f.neg, f.zero, f.pos)
            )
        return False

    def term_ok(t: Expr) -> bool:
        factors = t.factors if isinstance(t, Product) else (t,)
        if not any(factor_qualifies(f) for f in factors):
            return False
        # Remaining factors may have at worst finite-order poles: every
        # reciprocal argument anywhere in the term must be pole-admissible.
        for f in factors:
            if contains_kind(f, Undefined):
                return False
            for q in _recip_args(f):
                if contains_kind(q, Flat, Abs, Cases, Recip, Undefined):
                    return False
                if normalize(q) == E_ZERO:
                    return False
        return True

    return all(term_ok(t) for t in terms)


def _recip_args(e: Expr):
    if isinstance(e, Recip):
        yield e.arg
    for c in children(e):
        yield from _recip_args(c)


def differentiate(e: Expr, var: int) -> Expr:
    """Partial derivative with respect to variable `var`.

    Valid away from guard zero loci; the result contains an `undefined`
    marker where no globally valid formula exists (abs kinks, branch jumps).
    For flat nodes the zero extension at the flat point is built in.
    """
    if isinstance(e, (Const, Undefined)):
        return E_ZERO if isinstance(e, Const) else Undefined()
    if isinstance(e, Var):
        return const(1) if e.index == var else E_ZERO
    if isinstance(e, Sum):
        return add(*[differentiate(t, var) for t in e.terms])
    if isinstance(e, Product):
        terms = []
        for i, f in enumerate(e.factors):
            df = differentiate(f, var)
            if df == E_ZERO:
                continue
            rest = e.factors[:i] + e.factors[i + 1 :]
            terms.append(mul(df, *rest))
        return add(*terms)
    if isinstance(e, IntPow):
        if e.exponent == 0:
            return E_ZERO
        return mul(
            const(e.exponent),
            ipow(e.base, e.exponent - 1),
            differentiate(e.base, var),
        )
    if isinstance(e, Sin):
        return mul(cos(e.arg), differentiate(e.arg, var))
    if isinstance(e, Cos):
        return mul(const(-1), sin(e.arg), differentiate(e.arg, var))
    if isinstance(e, Flat):
        u = e.arg
        core = mul(const(2), recip(ipow(u, 3)), Flat(u))
        gadget = cases(u, core, E_ZERO, core)
        return mul(gadget, differentiate(u, var))
    if isinstance(e, Abs):
        u = e.arg
        sign_gadget = cases(u, const(-1), Undefined(), const(1))
        return mul(sign_gadget, differentiate(u, var))
    if isinstance(e, Recip):
        u = e.arg
        return mul(const(-1), recip(ipow(u, 2)), differentiate(u, var))
    if isinstance(e, Norm):
        # d|A|/dx = (sum A_i dA_i) / |A|, valid off the zero locus of A.
        num = add(*[mul(a, differentiate(a, var)) for a in e.args])
        return mul(recip(norm(*e.args)), num)
    if isinstance(e, Cases):
        dn = differentiate(e.neg, var)
        dz = differentiate(e.zero, var)
        dp = differentiate(e.pos, var)
        zero_is_flat_value = isinstance(e.zero, Const)
        if (
            zero_is_flat_value
            and dz == E_ZERO
            and flat_dominated_wrt_guard(dn, e.guard)
            and flat_dominated_wrt_guard(dp, e.guard)
            and e.zero.value.is_zero()
            and flat_dominated_wrt_guard(e.neg, e.guard)
            and flat_dominated_wrt_guard(e.pos, e.guard)
        ):
            # Flat-pinned branches: one-sided derivative limits vanish on the
            # locus, so the zero extension stays globally correct.
            middle = E_ZERO
        else:
            middle = Undefined()
        return cases(e.guard, dn, middle, dp)
    raise TypeError(f"unknown node {e!r}")


def derivative_valid_everywhere(d: Expr) -> bool:
    return not contains_kind(d, Undefined)


def gradient(e: Expr, nvars: int) -> tuple:
    return tuple(differentiate(e, i) for i in range(nvars))


def nth_derivative(e: Expr, order: int, var: int = 0) -> Expr:
    for _ in range(order):
        e = differentiate(e, var)
    return e


# ---------------------------------------------------------------------------
# One-sided limits and jets (univariate)


@dataclass(frozen=True)
class Limit:
    status: str  # "value" | "diverges" | "unknown"
    value: object = None

    @property
    def is_value(self) -> bool:
        return self.status == "value"


def _try_eval(e: Expr, point):
    try:
        return evaluate(e, point)
    except EvaluationError:
        return None


def one_sided_sign(g: Expr, t0, side: int, depth: int = 8):
    """Sign of g(t) for t just off t0 on the given side; None if undecided."""
    v = _try_eval(g, (t0,))
    if v is not None:
        s = _v_sign(v)
        if s != 0:
            return s
        if normalize(g) == E_ZERO:
            return 0
        if depth <= 0:
            return None
        d = g
        for k in range(1, depth + 1):
            d = differentiate(d, 0)
            lim = one_sided_limit(d, t0, side, depth=depth - k)
            if lim.status == "value":
                s = _v_sign(lim.value)
                if s != 0:
                    return s if side > 0 else s * ((-1) ** k)
            elif lim.status != "value":
                if lim.status == "unknown":
                    return None
                return None
        return None
    return None


def resolve_side(e: Expr, t0, side: int, depth: int = 8):
    """Replace piecewise and abs nodes by the branch active just off t0 on
    the given side.  Returns None when a guard sign cannot be decided."""
    if isinstance(e, Cases):
        s = one_sided_sign(e.guard, t0, side, depth)
        if s is None:
            return None
        branch = e.neg if s < 0 else (e.pos if s > 0 else e.zero)
        return resolve_side(branch, t0, side, depth)
    if isinstance(e, Abs):
        inner = resolve_side(e.arg, t0, side, depth)
        if inner is None:
            return None
        s = one_sided_sign(e.arg, t0, side, depth)
        if s is None:
            return None
        if s == 0:
            return E_ZERO
        return inner if s > 0 else mul(const(-1), inner)
    if isinstance(e, Undefined):
        return None
    kids = []
    for c in children(e):
        rc = resolve_side(c, t0, side, depth)
        if rc is None:
            return None
        kids.append(rc)
    from .expr import rebuild

    return rebuild(e, tuple(kids))


def _term_flat_dominated_at(term: Expr, t0) -> bool:
    factors = term.factors if isinstance(term, Product) else (term,)

    def qualifies(f: Expr) -> bool:
        if isinstance(f, IntPow):
            f = f.base
        if not isinstance(f, Flat):
            return False
        h = f.arg
        v = _try_eval(h, (t0,))
        if v is None or _v_sign(v) != 0:
            return False
        return normalize(h) != E_ZERO

    if not any(qualifies(f) for f in factors):
        return False
    for q in _recip_args(term):
        if contains_kind(q, Flat, Abs, Cases, Recip, Undefined):
            return False
        if normalize(q) == E_ZERO:
            return False
    if contains_kind(term, Undefined):
        return False
    return True


def one_sided_limit(e: Expr, t0, side: int, depth: int = 6) -> Limit:
    """Limit of a univariate expression as t -> t0 from one side.

    Sound and incomplete: "value" and "diverges" results are certified for
    the supported shapes; everything else is "unknown".
    """
    er = resolve_side(e, t0, side, depth)
    if er is None:
        return Limit("unknown")
    v = _try_eval(er, (t0,))
    if v is not None:
        return Limit("value", v)
    # A pole was hit: decompose into additive terms.
    en = normalize(er)
    terms = en.terms if isinstance(en, Sum) else (en,)
    total = Scalar.of(0)
    divergent = 0
    for term in terms:
        tv = _try_eval(term, (t0,))
        if tv is not None:
            total = _v_add(total, tv)
            continue
        if _term_flat_dominated_at(term, t0):
            continue  # contributes 0
        # A genuine pole candidate: divergent if the non-pole part has a
        # finite nonzero limit.
        factors = term.factors if isinstance(term, Product) else (term,)
        pole, regular_ok = False, True
        for f in factors:
            base = f.base if isinstance(f, IntPow) else f
            if isinstance(base, Recip):
                qv = _try_eval(base.arg, (t0,))
                if qv is not None and _v_sign(qv) == 0:
                    if contains_kind(base.arg, Flat, Abs, Cases, Recip, Undefined):
                        regular_ok = False
                    else:
                        pole = True
                    continue
            fv = _try_eval(f, (t0,))
            if fv is None or _v_sign(fv) == 0:
                regular_ok = False
        if pole and regular_ok:
            divergent += 1
        else:
            return Limit("unknown")
    if divergent == 0:
        return Limit("value", total)
    if divergent == 1:
        return Limit("diverges")
    return Limit("unknown")


def one_sided_jet(e: Expr, t0, side: int, order: int) -> list:
    """Limits of e, e', ..., e^(order) as t -> t0 from the given side."""
    out = []
    d = e
    for k in range(order + 1):
        out.append(one_sided_limit(d, t0, side))
        if k < order:
            d = differentiate(d, 0)
    return out


# ---------------------------------------------------------------------------
# Numeric finite-difference probes


def _binom(n: int, k: int) -> int:
    return math.comb(n, k)


def central_difference(fn, x: float, order: int, h: float) -> float:
    total = 0.0
    for j in range(order + 1):
        t = x + (order / 2.0 - j) * h
        total += ((-1) ** j) * _binom(order, j) * fn(t)
    return total / h**order


def one_sided_difference(fn, x: float, order: int, h: float, side: int) -> float:
    total = 0.0
    for j in range(order + 1):
        t = x + side * j * h
        total += ((-1) ** (order - j)) * _binom(order, j) * fn(t)
    est = total / (side * h) ** order
    return est


def ladder_diverges(values, scale: float = 1.0) -> bool:
    """Growth by >= GROWTH_FACTOR at each refinement and a large final value.

    A first-order jump probed with decade steps grows by exactly 10, so a
    tiny relative slack absorbs float roundoff without weakening the test.
    """
    if len(values) < 2 or any(math.isnan(v) for v in values):
        return False
    for a, b in zip(values, values[1:]):
        if abs(a) == 0.0 or not (abs(b) >= GROWTH_FACTOR * abs(a) * (1.0 - 1e-6)):
            return False
    return abs(values[-1]) >= DIVERGENCE_FLOOR * (1.0 + abs(scale))


@dataclass(frozen=True)
class DivergenceRecord:
    """Self-contained dyadic divergence evidence at a point."""

    point: float
    order: int
    steps: tuple
    magnitudes: tuple
    kind: str  # "central" | "one-sided-mismatch"

    def to_json(self):
        return {
            "point": self.point,
            "order": self.order,
            "steps": list(self.steps),
            "magnitudes": list(self.magnitudes),
            "kind": self.kind,
        }


def dyadic_probe(e: Expr, x: float, max_order: int = ORDER_CAP):
    """Central-difference divergence probe at x; returns a record or None."""
    fn = as_callable(e)
    try:
        scale = abs(fn(x))
    except EvaluationError:
        return None
    for order in range(1, max_order + 1):
        vals = []
        ok = True
        for h in FD_STEPS:
            try:
                vals.append(abs(central_difference(fn, x, order, h)))
            except EvaluationError:
                ok = False
                break
        if ok and ladder_diverges(vals, scale):
            return DivergenceRecord(x, order, FD_STEPS, tuple(vals), "central")
    return None


def jump_divergence(e: Expr, x: float, deriv_order: int):
    """Divergence of the one-sided mismatch at order deriv_order + 1.

    Estimates the (deriv_order+1)-th derivative from each side and divides
    the gap by h; a jump in that derivative makes the ladder grow like 1/h.
    """
    fn = as_callable(e)
    vals = []
    scale = 0.0
    for h in FD_STEPS:
        try:
            fwd = one_sided_difference(fn, x + h, deriv_order + 1, h / 4.0, +1)
            bwd = one_sided_difference(fn, x - h, deriv_order + 1, h / 4.0, -1)
        except EvaluationError:
            return None
        scale = max(scale, min(abs(fwd), abs(bwd)))
        vals.append(abs(fwd - bwd) / h)
    if ladder_diverges(vals, 0.0):
        return DivergenceRecord(x, deriv_order + 1, FD_STEPS, tuple(vals), "one-sided-mismatch")
    return None
