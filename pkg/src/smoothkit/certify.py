"""Sound, incomplete smoothness certification for the expression class.

Certificates come from three rule families:

R1  closure: any expression built only from constants, variables, sums,
    products, integer powers, sin/cos, and flat nodes is smooth, because
    each node function is smooth and the class is closed under composition.

R2  flat domination: a product carrying a flat factor whose argument
    vanishes exactly on a locus Z, times a factor that is a quotient of
    polynomials/trig by powers of the norm with numerator degree at least
    the denominator degree, is smooth across Z with all derivatives zero
    there.  The flat factor decays faster than any finite-order pole grows,
    and differentiation preserves the shape.

R3  piecewise jet matching: a piecewise node is smooth up to order N when
    the one-sided jets at the guard locus agree symbolically, and smooth to
    all orders when both branches are flat-pinned to the locus.

Refutations (CertifiedNotCk) always carry an explicit point, the failing
derivative order, the one-sided evidence, and a dyadic finite-difference
divergence record reproducible from the record alone.  Unknown is the
fallback; a numeric probe cross-check demotes any would-be certificate that
contradicts the dyadic probe.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from . import calculus
from .calculus import (
    DivergenceRecord,
    Limit,
    ORDER_CAP,
    REL_TOL,
    _term_flat_dominated_at,
    as_callable,
    differentiate,
    dyadic_probe,
    evaluate,
    jump_divergence,
    one_sided_jet,
    one_sided_limit,
    resolve_side,
)
from .expr import (
    Abs,
    Cases,
    Const,
    E_ZERO,
    Expr,
    Flat,
    IntPow,
    Norm,
    Product,
    Recip,
    Sin,
    Cos,
    Sum,
    Undefined,
    Var,
    arity,
    children,
    contains_kind,
    expr_to_polynomial,
    mul,
    normalize,
    rebuild,
    substitute,
    to_text,
    var,
)
from .field import Scalar
from .verdicts import CertifiedNo, CertifiedYes, Unknown

MAX_JET_ORDER = 6


# ---------------------------------------------------------------------------
# Verdict types


@dataclass(frozen=True)
class CertifiedSmooth:
    trace: tuple = ()

    status = "certified_smooth"

    def to_json(self):
        return {"status": self.status, "trace": list(self.trace)}


@dataclass(frozen=True)
class CertifiedNotCk:
    """Not C^order at `point`: one-sided evidence plus divergence record."""

    point: tuple
    order: int
    left: object = None
    right: object = None
    divergence: DivergenceRecord | None = None
    detail: str = ""

    status = "certified_not_ck"

    def to_json(self):
        return {
            "status": self.status,
            "point": [_num(p) for p in self.point],
            "order": self.order,
            "left": _num(self.left),
            "right": _num(self.right),
            "divergence": self.divergence.to_json() if self.divergence else None,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class UnknownSmoothness:
    reason: str = ""

    status = "unknown"

    def to_json(self):
        return {"status": self.status, "reason": self.reason}


def _num(v):
    if v is None:
        return None
    if isinstance(v, Scalar):
        return str(v)
    return float(v)


def is_smooth(v) -> bool:
    return isinstance(v, CertifiedSmooth)


def is_not_ck(v) -> bool:
    return isinstance(v, CertifiedNotCk)


# ---------------------------------------------------------------------------
# Regions


@dataclass(frozen=True)
class Box:
    """Product of intervals with exact rational endpoints (None = unbounded)."""

    bounds: tuple  # tuple of (Scalar | None, Scalar | None)

    def contains(self, point) -> bool:
        for x, (lo, hi) in zip(point, self.bounds):
            xs = x if isinstance(x, Scalar) else None
            xf = x.to_float() if isinstance(x, Scalar) else float(x)
            if lo is not None and (xs < lo if xs is not None else xf < lo.to_float()):
                return False
            if hi is not None and (xs > hi if xs is not None else xf > hi.to_float()):
                return False
        return True


def box(*bounds) -> Box:
    out = []
    for lo, hi in bounds:
        out.append(
            (
                None if lo is None else Scalar.of(Fraction(lo)),
                None if hi is None else Scalar.of(Fraction(hi)),
            )
        )
    return Box(tuple(out))


def _sample_floats(region, nvars: int, count: int, seed: int):
    rng = random.Random(seed)
    pts = []
    for _ in range(count):
        coords = []
        for i in range(nvars):
            lo, hi = -2.0, 2.0
            if isinstance(region, Box) and i < len(region.bounds):
                blo, bhi = region.bounds[i]
                if blo is not None:
                    lo = max(lo, blo.to_float())
                if bhi is not None:
                    hi = min(hi, bhi.to_float())
            if hi < lo:
                lo, hi = hi, lo
            coords.append(rng.uniform(lo, hi))
        pts.append(tuple(coords))
    return pts


# ---------------------------------------------------------------------------
# Exact roots of low-degree univariate polynomial guards


def _frac_sqrt(q: Fraction):
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn = int(num**0.5)
    while rn * rn < num:
        rn += 1
    while rn * rn > num:
        rn -= 1
    if rn * rn != num:
        return None
    rd = int(den**0.5)
    while rd * rd < den:
        rd += 1
    while rd * rd > den:
        rd -= 1
    if rd * rd != den:
        return None
    return Fraction(rn, rd)


def sqrt_in_field(s: Scalar):
    """Exact square root in Q(sqrt2) when one exists, else None."""
    if s.sign() < 0:
        return None
    if s.is_zero():
        return Scalar.of(0)
    a, b = s.a, s.b
    if b == 0:
        r = _frac_sqrt(a)
        if r is not None:
            return Scalar.of(r)
        r = _frac_sqrt(a / 2)
        if r is not None:
            return Scalar(Fraction(0), r)
        return None
    d = _frac_sqrt(a * a - 2 * b * b)
    if d is None:
        return None
    for x2 in ((a + d) / 2, (a - d) / 2):
        x = _frac_sqrt(x2)
        if x is not None and x != 0:
            y = b / (2 * x)
            cand = Scalar(x, y)
            if ((cand * cand) - s).is_zero() and cand.sign() > 0:
                return cand
            cand = -cand
            if ((cand * cand) - s).is_zero() and cand.sign() > 0:
                return cand
    return None


def exact_roots(g: Expr):
    """All real roots of a univariate polynomial guard, or None if undecided."""
    p = expr_to_polynomial(normalize(g), 1)
    if p is None:
        return None
    coeffs: dict = {e[0]: c for e, c in p.coeffs}
    if not coeffs:
        return None  # identically zero: the locus is everything
    deg = max(coeffs)
    low = min(coeffs)
    roots = []
    if low > 0:
        roots.append(Scalar.of(0))
    shifted = {k - low: v for k, v in coeffs.items()}
    d = max(shifted)
    c0 = shifted.get(0, Scalar.of(0))
    c1 = shifted.get(1, Scalar.of(0))
    c2 = shifted.get(2, Scalar.of(0))
    if d == 0:
        pass
    elif d == 1:
        roots.append(-c0 / c1)
    elif d == 2:
        disc = c1 * c1 - Scalar.of(4) * c2 * c0
        sgn = disc.sign()
        if sgn < 0:
            pass
        elif sgn == 0:
            roots.append(-c1 / (Scalar.of(2) * c2))
        else:
            sq = sqrt_in_field(disc)
            if sq is None:
                return None
            roots.append((-c1 + sq) / (Scalar.of(2) * c2))
            roots.append((-c1 - sq) / (Scalar.of(2) * c2))
    else:
        return None
    uniq = []
    for r in roots:
        if not any((r - u).is_zero() for u in uniq):
            uniq.append(r)
    return uniq


# ---------------------------------------------------------------------------
# Pole handling


def _recip_args_of(e: Expr):
    out = []

    def rec(x: Expr):
        if isinstance(x, Recip):
            out.append(x.arg)
        for c in children(x):
            rec(c)

    rec(e)
    return out


def certified_nonvanishing(q: Expr, region, nvars: int):
    """A trace string when q provably has no zero on the region, else None."""
    qn = normalize(q)
    if isinstance(qn, Const):
        return None if qn.value.is_zero() else f"constant {to_text(qn)} is nonzero"
    p = expr_to_polynomial(qn, nvars)
    if p is not None and nvars <= 1:
        roots = exact_roots(qn)
        if roots is not None:
            inside = [r for r in roots if not isinstance(region, Box) or region.contains((r,))]
            if not inside:
                return f"{to_text(qn)} has no zero on the region"
            return None
    if p is not None:
        # Positive definite by inspection: even exponents, positive
        # coefficients, positive constant term.
        d = p.as_dict()
        const_term = d.get((0,) * p.nvars)
        if const_term is not None and const_term.sign() > 0:
            if all(
                all(k % 2 == 0 for k in e) and c.sign() > 0 for e, c in p.coeffs
            ):
                return f"{to_text(qn)} is a positive combination of even powers"
    return None


# ---------------------------------------------------------------------------
# R2: flat domination with norm-quotient boundedness


def _norm_var_tuple(e: Expr):
    """The common variable tuple of all norm nodes, or None."""
    tuples = set()

    def rec(x: Expr):
        if isinstance(x, Norm):
            if all(isinstance(a, Var) for a in x.args):
                tuples.add(tuple(a.index for a in x.args))
            else:
                tuples.add(None)
        for c in children(x):
            rec(c)

    rec(e)
    if len(tuples) != 1:
        return None
    t = tuples.pop()
    return t


def _poly_degree_with_norm(f: Expr, nvars: int, norm_vars):
    """Total degree of f as a polynomial in the variables and the norm symbol
    (norm counted with degree 1), or None when f is not of that shape."""

    def sub_norm(x: Expr):
        if isinstance(x, Norm) and tuple(
            a.index for a in x.args if isinstance(a, Var)
        ) == tuple(norm_vars) and all(isinstance(a, Var) for a in x.args):
            return Var(nvars)
        kids = tuple(sub_norm(c) for c in children(x))
        return rebuild(x, kids)

    g = sub_norm(f)
    p = expr_to_polynomial(g, nvars + 1)
    if p is None:
        return None
    return p.degree()


def flat_dominated_at_origin(e: Expr, nvars: int):
    """R2 classifier: every additive term is flat-pinned to the origin and
    its non-flat part is a bounded norm-quotient.  Returns a trace or None."""
    en = normalize(e)
    if en == E_ZERO:
        return "identically zero"
    norm_vars = _norm_var_tuple(en)
    terms = en.terms if isinstance(en, Sum) else (en,)
    origin = tuple(Scalar.of(0) for _ in range(nvars))
    traces = []
    for term in terms:
        factors = term.factors if isinstance(term, Product) else (term,)
        flat_ok = False
        num_deg = 0
        den_deg = 0
        for f in factors:
            base, k = (f.base, f.exponent) if isinstance(f, IntPow) else (f, 1)
            if isinstance(base, Flat):
                try:
                    hv = evaluate(base.arg, origin)
                except calculus.EvaluationError:
                    return None
                if isinstance(hv, Scalar) and hv.is_zero() and normalize(base.arg) != E_ZERO:
                    flat_ok = True
                    continue
                num_deg += 0  # a flat factor bounded away from its locus
                continue
            if isinstance(base, Recip):
                qdeg = (
                    _poly_degree_with_norm(base.arg, nvars, norm_vars)
                    if norm_vars is not None
                    else None
                )
                if qdeg is None:
                    return None
                if contains_kind(base.arg, Flat, Abs, Cases, Recip, Undefined):
                    return None
                den_deg += k * qdeg
                continue
            if isinstance(base, (Sin, Cos)):
                continue  # bounded
            fdeg = (
                _poly_degree_with_norm(base, nvars, norm_vars)
                if norm_vars is not None
                else None
            )
            if fdeg is None:
                p = expr_to_polynomial(base, nvars)
                if p is None:
                    return None
                fdeg = p.degree()
            num_deg += k * fdeg
        if not flat_ok:
            return None
        if num_deg < den_deg:
            return None
        traces.append(
            f"flat-dominated term with bounded quotient "
            f"(numerator degree {num_deg} >= denominator degree {den_deg})"
        )
    return "; ".join(traces)


# ---------------------------------------------------------------------------
# Guard collection and branch alternatives


def _guards(e: Expr):
    out = []

    def rec(x: Expr):
        if isinstance(x, Cases):
            out.append(x.guard)
        if isinstance(x, Abs):
            out.append(x.arg)
        for c in children(x):
            rec(c)

    rec(e)
    uniq = []
    for g in out:
        gn = normalize(g)
        if gn not in uniq:
            uniq.append(gn)
    return uniq


def _branch_alternatives(e: Expr, cap: int = 81):
    """All guard-free expressions obtained by resolving every piecewise and
    abs node to one branch; None when there are too many combinations."""
    alts = [e]
    done = False
    while not done:
        done = True
        nxt = []
        for a in alts:
            expanded = _expand_one(a)
            if expanded is None:
                nxt.append(a)
            else:
                done = False
                nxt.extend(expanded)
            if len(nxt) > cap:
                return None
        alts = nxt
    return alts


def _expand_one(e: Expr):
    """Expand the first Cases/Abs node found; None if there is none."""
    if isinstance(e, Cases):
        return [e.neg, e.zero, e.pos]
    if isinstance(e, Abs):
        return [e.arg, mul(Const(Scalar.of(-1)), e.arg)]
    kids = children(e)
    for i, c in enumerate(kids):
        sub = _expand_one(c)
        if sub is not None:
            out = []
            for s in sub:
                new_kids = kids[:i] + (s,) + kids[i + 1 :]
                out.append(rebuild(e, new_kids))
            return out
    return None


# ---------------------------------------------------------------------------
# Limit value comparison


def _values_agree(a, b):
    """True / False / None(undecided).  Exact when both values are exact."""
    if isinstance(a, Scalar) and isinstance(b, Scalar):
        return (a - b).is_zero()
    fa = a.to_float() if isinstance(a, Scalar) else float(a)
    fb = b.to_float() if isinstance(b, Scalar) else float(b)
    gap = abs(fa - fb)
    tol = REL_TOL * (1.0 + max(abs(fa), abs(fb)))
    if gap <= tol:
        return True
    if gap > 10 * tol:
        return False
    return None


# ---------------------------------------------------------------------------
# The certifier


def certify_smooth(
    e: Expr,
    region=None,
    seed: int = 0,
    max_jet_order: int = MAX_JET_ORDER,
    probe: bool = True,
):
    """Certify that e is C-infinity on the region (default: everywhere)."""
    en = normalize(e)
    if contains_kind(en, Undefined):
        return UnknownSmoothness("expression carries an undefined marker")
    nv = max(arity(en), 1)

    verdict = _certify(en, region, nv, seed, max_jet_order)
    if isinstance(verdict, CertifiedSmooth) and probe:
        record = _probe_region(en, region, nv, seed)
        if record is not None:
            return UnknownSmoothness(
                f"symbolic rule contradicted by dyadic probe at {record.point}"
            )
    return verdict


def _certify(en, region, nv, seed, max_jet_order):
    has_guards = contains_kind(en, Abs, Cases)
    has_poles = contains_kind(en, Recip, Norm)
    if not has_guards and not has_poles:
        return CertifiedSmooth(("R1: smooth node closure",))
    if not has_guards:
        return _certify_pole_only(en, region, nv)
    if nv <= 1:
        return _certify_univariate(en, region, seed, max_jet_order)
    return _certify_multivariate(en, region, nv, seed, max_jet_order)


def _certify_pole_only(en, region, nv):
    trace = []
    if contains_kind(en, Norm):
        r2 = flat_dominated_at_origin(en, nv)
        if r2 is not None:
            return CertifiedSmooth(
                ("R2: " + r2, "all derivatives vanish on the locus")
            )
        return UnknownSmoothness("norm nodes outside the flat-domination shape")
    undecided = []
    for q in _recip_args_of(en):
        cert = certified_nonvanishing(q, region, nv)
        if cert is not None:
            trace.append("pole-free: " + cert)
            continue
        undecided.append(q)
    if not undecided:
        return CertifiedSmooth(("R1 with region-restricted reciprocals",) + tuple(trace))
    if nv <= 1:
        # Poles at exact roots may still be killed by flat factors.
        roots: list = []
        for q in undecided:
            r = exact_roots(q)
            if r is None:
                return UnknownSmoothness(
                    f"cannot locate zeros of reciprocal argument {to_text(q)}"
                )
            roots.extend(r)
        for t0 in roots:
            if isinstance(region, Box) and not region.contains((t0,)):
                continue
            lim = one_sided_limit(en, t0, +1)
            lim2 = one_sided_limit(en, t0, -1)
            if not (
                _flat_dominated_whole(en, t0)
                and lim.is_value
                and lim2.is_value
            ):
                return UnknownSmoothness(
                    f"pole of {to_text(en)} at {t0} is not flat-dominated"
                )
            trace.append(f"R2: pole at {t0} flat-dominated, extends by 0")
        return CertifiedSmooth(tuple(trace))
    return UnknownSmoothness("multivariate pole not certified nonvanishing")


def _flat_dominated_whole(en, t0) -> bool:
    terms = en.terms if isinstance(en, Sum) else (en,)
    return all(
        _term_flat_dominated_at(t, t0) or _try_value(t, t0) is not None for t in terms
    )


def _try_value(e, t0):
    try:
        return evaluate(e, (t0,))
    except calculus.EvaluationError:
        return None


def _certify_univariate(en, region, seed, max_jet_order):
    guards = _guards(en)
    all_roots: list = []
    undecided_guards: list = []
    for g in guards:
        r = exact_roots(g)
        if r is None:
            undecided_guards.append(g)
        else:
            for t0 in r:
                if isinstance(region, Box) and not region.contains((t0,)):
                    continue
                if not any((t0 - u).is_zero() for u in all_roots):
                    all_roots.append(t0)

    trace = []
    undecided_locus = bool(undecided_guards)
    for t0 in sorted(all_roots, key=lambda s: s.to_float()):
        result = _analyze_locus(en, t0, max_jet_order)
        if isinstance(result, CertifiedNotCk):
            return result
        if result is None:
            undecided_locus = True
        else:
            trace.append(result)

    # Refutation scan for guards whose roots we cannot isolate exactly.
    for g in undecided_guards:
        hit = _numeric_guard_refutation(en, g, region, seed)
        if hit is not None:
            return hit

    if undecided_locus:
        return UnknownSmoothness(
            "guard loci not fully certified (undecided roots or partial jets)"
        )

    alts = _branch_alternatives(en)
    if alts is None:
        return UnknownSmoothness("too many branch combinations")
    for a in alts:
        an = normalize(a)
        if contains_kind(an, Undefined):
            return UnknownSmoothness("branch alternative carries undefined marker")
        if contains_kind(an, Abs, Cases):
            return UnknownSmoothness("nested guard resolution failed")
        sub = (
            CertifiedSmooth(("R1",))
            if not contains_kind(an, Recip, Norm)
            else _certify_pole_only(an, region, 1)
        )
        if not isinstance(sub, CertifiedSmooth):
            return UnknownSmoothness(
                f"branch alternative {to_text(an)} not certified: "
                + getattr(sub, "reason", "")
            )
    return CertifiedSmooth(("R3: all guard loci glue smoothly",) + tuple(trace))


def _analyze_locus(en, t0, max_jet_order):
    """CertifiedNotCk, a trace string for a fully certified locus, or None."""
    t0f = t0.to_float() if isinstance(t0, Scalar) else float(t0)
    v0 = _try_value(en, t0)
    jl = one_sided_jet(en, t0, -1, max_jet_order)
    jr = one_sided_jet(en, t0, +1, max_jet_order)
    for order in range(max_jet_order + 1):
        L, R = jl[order], jr[order]
        if L.status == "diverges" or R.status == "diverges":
            div = jump_divergence(en, t0f, max(order - 1, 0)) or _central_div(
                en, t0f, order
            )
            return CertifiedNotCk(
                (t0,),
                order,
                None if L.status != "value" else L.value,
                None if R.status != "value" else R.value,
                div,
                f"one-sided derivative of order {order} diverges",
            )
        if L.status == "unknown" or R.status == "unknown":
            return _flat_or_equal_locus(en, t0, v0)
        agree = _values_agree(L.value, R.value)
        if order == 0 and agree is True and v0 is not None:
            agree = _values_agree(L.value, v0)
            if agree is False:
                return CertifiedNotCk(
                    (t0,),
                    0,
                    L.value,
                    v0,
                    _central_div(en, t0f, 1),
                    "center value differs from one-sided limits",
                )
        if agree is False:
            return CertifiedNotCk(
                (t0,),
                order,
                L.value,
                R.value,
                jump_divergence(en, t0f, max(order - 1, 0)),
                f"one-sided jets differ at order {order}",
            )
        if agree is None:
            return _flat_or_equal_locus(en, t0, v0)
    return _flat_or_equal_locus(en, t0, v0) or None


def _flat_or_equal_locus(en, t0, v0):
    """All-orders certification at one locus, or None when undecided."""
    eL = resolve_side(en, t0, -1)
    eR = resolve_side(en, t0, +1)
    if eL is None or eR is None:
        return None
    zero_center = v0 is not None and (
        (isinstance(v0, Scalar) and v0.is_zero()) or v0 == 0.0
    )
    if zero_center and _flat_dominated_whole(normalize(eL), t0) and _flat_dominated_whole(
        normalize(eR), t0
    ):
        return f"locus {t0}: both branches flat-pinned, all derivatives vanish"
    from .expr import equal_normal

    if equal_normal(eL, eR):
        lim = one_sided_limit(eL, t0, +1)
        if (
            lim.is_value
            and v0 is not None
            and _values_agree(lim.value, v0) is True
        ):
            sub = _certify_pole_only(normalize(eL), None, 1) if contains_kind(
                normalize(eL), Recip, Norm
            ) else CertifiedSmooth()
            if isinstance(sub, CertifiedSmooth):
                return f"locus {t0}: branches coincide, no break"
    return None


def _central_div(en, x, order):
    fn = as_callable(en)
    vals = []
    try:
        for h in calculus.FD_STEPS:
            vals.append(abs(calculus.central_difference(fn, x, max(order, 1), h)))
    except calculus.EvaluationError:
        return None
    if calculus.ladder_diverges(vals, 0.0):
        return DivergenceRecord(x, max(order, 1), calculus.FD_STEPS, tuple(vals), "central")
    return None


def _numeric_guard_refutation(en, g, region, seed):
    """Bisection on sign changes of an undecided guard, then a dyadic jump
    probe at the numeric root.  Divergence certifies non-smoothness."""
    fn = as_callable(g)
    lo_, hi_ = -2.0, 2.0
    if isinstance(region, Box) and region.bounds:
        blo, bhi = region.bounds[0]
        if blo is not None:
            lo_ = blo.to_float()
        if bhi is not None:
            hi_ = min(2.0, bhi.to_float())
    rng = random.Random(seed)
    grid = sorted(rng.uniform(lo_, hi_) for _ in range(64))
    for a, b in zip(grid, grid[1:]):
        try:
            fa, fb = fn(a), fn(b)
        except calculus.EvaluationError:
            continue
        if fa == 0.0 or fb == 0.0 or (fa < 0) == (fb < 0):
            continue
        for _ in range(80):
            m = 0.5 * (a + b)
            try:
                fm = fn(m)
            except calculus.EvaluationError:
                break
            if fm == 0.0:
                a = b = m
                break
            if (fm < 0) == (fa < 0):
                a, fa = m, fm
            else:
                b, fb = m, fm
        root = 0.5 * (a + b)
        for order in range(ORDER_CAP):
            rec = jump_divergence(en, root, order)
            if rec is not None:
                return CertifiedNotCk(
                    (root,),
                    order + 1,
                    None,
                    None,
                    rec,
                    "dyadic divergence at a numerically located guard root",
                )
    return None


def _certify_multivariate(en, region, nv, seed, max_jet_order):
    # Wrapper pattern: cases(norm-like guard; A, 0, A) with A flat-dominated
    # at the origin certifies to all orders (the zero branch records the
    # limit value on the locus).
    if isinstance(en, Cases) and en.neg == en.pos:
        guard = normalize(en.guard)
        guard_is_norm = isinstance(guard, Norm) or (
            isinstance(guard, Product)
            and sum(1 for f in guard.factors if isinstance(f, Norm)) == 1
            and all(isinstance(f, (Norm, Const)) for f in guard.factors)
        )
        zero_branch_zero = isinstance(en.zero, Const) and en.zero.value.is_zero()
        if guard_is_norm and zero_branch_zero:
            r2 = flat_dominated_at_origin(en.pos, nv)
            if r2 is not None:
                return CertifiedSmooth(
                    (
                        "R2: " + r2,
                        "zero branch matches the vanishing limit on the locus",
                    )
                )
    # Flat-pinned piecewise with a multivariate guard.
    if isinstance(en, Cases):
        from .calculus import flat_dominated_wrt_guard

        if (
            isinstance(en.zero, Const)
            and en.zero.value.is_zero()
            and flat_dominated_wrt_guard(en.neg, en.guard)
            and flat_dominated_wrt_guard(en.pos, en.guard)
        ):
            alts = _branch_alternatives(en)
            if alts is not None and all(
                not contains_kind(normalize(a), Abs, Cases, Undefined) for a in alts
            ):
                return CertifiedSmooth(
                    ("R3: branches flat-pinned to the guard locus",)
                )
    # Refutation via seeded curve sections.
    hit = _section_refutation(en, region, nv, seed, max_jet_order)
    if hit is not None:
        return hit
    return UnknownSmoothness("no multivariate rule applies")


def _section_refutation(en, region, nv, seed, max_jet_order):
    rng = random.Random(seed + 1)
    base_points = [tuple(Scalar.of(0) for _ in range(nv))]
    for g in _guards(en):
        p = expr_to_polynomial(g, nv)
        if p is None:
            continue
        # For affine guards pick an exact point on the locus.
        d = p.as_dict()
        lin = [(i, d.get(tuple(1 if j == i else 0 for j in range(nv)), Scalar.of(0))) for i in range(nv)]
        c0 = d.get((0,) * nv, Scalar.of(0))
        nonzero = [(i, c) for i, c in lin if not c.is_zero()]
        if nonzero and all(sum(k for k in e) <= 1 for e, _ in p.coeffs):
            i, c = nonzero[0]
            pt = [Scalar.of(0)] * nv
            pt[i] = -c0 / c
            base_points.append(tuple(pt))
    for pt in base_points:
        if isinstance(region, Box) and not region.contains(pt):
            continue
        for _ in range(6):
            direction = [Scalar.of(Fraction(rng.randint(-3, 3))) for _ in range(nv)]
            if all(d.is_zero() for d in direction):
                direction[0] = Scalar.of(1)
            line = [Const(pt[i]) + Const(direction[i]) * var(0) for i in range(nv)]
            section = substitute(en, line)
            sub = _certify_univariate(normalize(section), None, seed, max_jet_order)
            if isinstance(sub, CertifiedNotCk):
                s0 = sub.point[0]
                sf = s0.to_float() if isinstance(s0, Scalar) else float(s0)
                witness_point = tuple(
                    pt[i].to_float() + direction[i].to_float() * sf for i in range(nv)
                )
                return CertifiedNotCk(
                    witness_point,
                    sub.order,
                    sub.left,
                    sub.right,
                    sub.divergence,
                    f"restriction to the line {', '.join(to_text(c) for c in line)} fails: "
                    + sub.detail,
                )
    return None


def _probe_region(en, region, nv, seed, count: int = 12):
    pts = _sample_floats(region, nv, count, seed + 7)
    if nv == 1:
        for (x,) in pts:
            rec = dyadic_probe(en, x)
            if rec is not None:
                return rec
        return None
    rng = random.Random(seed + 13)
    for pt in pts[:6]:
        direction = [rng.uniform(-1, 1) for _ in range(nv)]
        line = [
            Const(Scalar.of(Fraction(pt[i]).limit_denominator(10**6)))
            + Const(Scalar.of(Fraction(direction[i]).limit_denominator(10**6))) * var(0)
            for i in range(nv)
        ]
        section = substitute(en, line)
        rec = dyadic_probe(section, 0.0)
        if rec is not None:
            return rec
    return None


# ---------------------------------------------------------------------------
# Finite regularity classification


def ck_regularity(e: Expr, k: int, point) -> object:
    """Verdict on the claim: e is C^k at the point but not C^{k+1}.

    Certification is by symbolic one-sided jet comparison up to order k and a
    mismatch or divergence at order k + 1.
    """
    if k < 0:
        raise ValueError("order must be nonnegative")
    t0 = point if isinstance(point, Scalar) else Scalar.of(point)
    en = normalize(e)
    jl = one_sided_jet(en, t0, -1, k + 1)
    jr = one_sided_jet(en, t0, +1, k + 1)
    v0 = _try_value(en, t0)
    evidence = []
    for order in range(k + 1):
        L, R = jl[order], jr[order]
        if not (L.is_value and R.is_value):
            return Unknown(f"one-sided jet of order {order} undecided")
        agree = _values_agree(L.value, R.value)
        if order == 0 and agree and v0 is not None:
            agree = _values_agree(L.value, v0)
        if agree is not True:
            return CertifiedNo(
                {
                    "reason": f"not C^{order} at {t0}",
                    "order": order,
                    "left": _num(L.value),
                    "right": _num(R.value),
                }
            )
        evidence.append(f"order {order}: both one-sided values {_num(L.value)}")
    L, R = jl[k + 1], jr[k + 1]
    t0f = t0.to_float()
    if L.status == "diverges" or R.status == "diverges":
        rec = jump_divergence(en, t0f, k)
        return CertifiedYes(
            tuple(evidence)
            + (f"order {k + 1} one-sided derivative diverges",)
            + ((rec,) if rec else ())
        )
    if L.is_value and R.is_value:
        agree = _values_agree(L.value, R.value)
        if agree is False:
            rec = jump_divergence(en, t0f, k)
            return CertifiedYes(
                tuple(evidence)
                + (
                    f"order {k + 1} one-sided values differ: "
                    f"{_num(L.value)} vs {_num(R.value)}",
                )
                + ((rec,) if rec else ())
            )
        if agree is True:
            return CertifiedNo(
                {
                    "reason": f"one-sided jets also agree at order {k + 1}",
                    "order": k + 1,
                    "value": _num(L.value),
                }
            )
    return Unknown(f"order {k + 1} comparison undecided")
