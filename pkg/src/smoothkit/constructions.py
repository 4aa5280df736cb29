"""Quotient and subset structures, wedge gluing, and lift-failure witnesses.

Quotient support is catalogued: finite exact orthogonal groups, the
irrational line flow on the 2-torus, and origin gluings of lines.  These
are exactly the cases the membership machinery can certify; general local
lifting is undecidable.

The function side of a quotient is presented by invariant generators
(computed through the invariant-ring module or supplied and checked
exactly); the plot side is presented by projections of the base generators,
with membership certified by explicit local lifts and refuted by
no-continuous-lift or exact lattice obstructions.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .calculus import EvaluationError, evaluate, one_sided_jet
from .certify import certify_smooth, is_not_ck, is_smooth
from .expr import (
    Expr,
    Var,
    arity,
    equal_normal,
    expr_to_polynomial,
    ipow,
    mul,
    normalize,
    polynomial_to_expr,
    substitute,
    to_expr,
    to_text,
    var,
)
from .field import Scalar, mat_vec, solve_linear
from .invring import hilbert_map, invariant_generators
from .polynomial import Polynomial, monomials_of_degree
from .presentation import (
    BranchFunction,
    CkFunctions,
    Euclidean,
    ExprPlot,
    FiniteMatrixGroup,
    HalfAngleFlatPlot,
    LineArrangement,
    QuotientByFlow,
    QuotientByGroup,
    SpacePresentation,
    StepPlot,
    SubsetCarrier,
    SwitchPlot,
    compose_function_with_plot,
)
from .verdicts import (
    CertifiedNo,
    CertifiedYes,
    CompositionNotSmooth,
    JetObstruction,
    NoContinuousLift,
    TopologyObstruction,
    Unknown,
)

MONODROMY_SAMPLES = 360
JET_MATCH_ORDER = 6


class ConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class QuotientPresentation:
    base: SpacePresentation
    identification: object  # FiniteMatrixGroup | Scalar slope | "origin-gluing"
    space: SpacePresentation


# ---------------------------------------------------------------------------
# Quotient constructions


def quotient_differential(
    base: SpacePresentation,
    identification,
    degree_bound: int = 2,
    supplied_generators=None,
) -> QuotientPresentation:
    """Quotient on the function side: generators are identification-invariant
    functions whose pullbacks generate the invariant subalgebra up to the
    degree bound."""
    if isinstance(identification, FiniteMatrixGroup):
        n = identification.dim
        if base.ambient_dim != n:
            raise ConstructionError("group dimension does not match the carrier")
        if supplied_generators is not None:
            gens = tuple(supplied_generators)
            for f in gens:
                _check_exact_invariance(f, identification)
        else:
            gens = tuple(invariant_generators(identification, degree_bound))
        space = SpacePresentation(
            label=f"{base.label}/{identification.label}",
            carrier=QuotientByGroup(n, identification),
            fn_generators=gens,
            plot_generators=tuple(
                _project_plot(p) for p in base.plot_generators
            ),
            construction="quotient_differential",
            notes=(f"generators complete up to degree {degree_bound}",),
        )
        return QuotientPresentation(base, identification, space)
    if isinstance(identification, Scalar):
        # Line flow of irrational slope on the 2-torus: the invariant
        # trigonometric polynomials are the constants (verified on the
        # truncated Fourier class), so the function side is trivial.
        dim = torus_invariants(identification, 10)
        if dim != 1:
            raise ConstructionError("unexpected nonconstant flow invariant")
        space = SpacePresentation(
            label=f"torus/flow-{identification}",
            carrier=QuotientByFlow(identification),
            fn_generators=(to_expr(1),),
            plot_generators=tuple(
                _project_plot(p) for p in base.plot_generators
            ),
            construction="quotient_differential",
            notes=("function side verified on the truncated Fourier class",),
        )
        return QuotientPresentation(base, identification, space)
    raise ConstructionError(f"unsupported identification {identification!r}")


def _check_exact_invariance(f: Expr, group: FiniteMatrixGroup) -> None:
    n = group.dim
    for g in group.elements:
        moved = substitute(
            f,
            tuple(
                sum((Scalar.of(g[i][j]) * var(j) for j in range(n)), to_expr(0))
                for i in range(n)
            ),
        )
        if not equal_normal(moved, f):
            raise ConstructionError(
                f"supplied generator {to_text(f)} is not invariant under the group"
            )


def _project_plot(p):
    if isinstance(p, ExprPlot):
        return ExprPlot("pi o " + p.label, p.domain, p.components, p.branches)
    return p


def quotient_diffeology(base: SpacePresentation, identification) -> QuotientPresentation:
    """Quotient on the plot side: generators are the projected base plots;
    membership needs explicit local lifts."""
    if isinstance(identification, FiniteMatrixGroup):
        q = quotient_differential(base, identification)
        space = SpacePresentation(
            label=q.space.label,
            carrier=q.space.carrier,
            fn_generators=q.space.fn_generators,
            plot_generators=q.space.plot_generators,
            construction="quotient_diffeology",
            notes=q.space.notes,
        )
        return QuotientPresentation(base, identification, space)
    if isinstance(identification, Scalar):
        q = quotient_differential(base, identification)
        space = SpacePresentation(
            label=q.space.label,
            carrier=q.space.carrier,
            fn_generators=q.space.fn_generators,
            plot_generators=q.space.plot_generators,
            construction="quotient_diffeology",
            notes=q.space.notes,
        )
        return QuotientPresentation(base, identification, space)
    if identification == "origin-gluing":
        carrier = base.carrier
        if not isinstance(carrier, LineArrangement):
            raise ConstructionError("origin gluing needs a line arrangement model")
        glued = LineArrangement(carrier.ambient_dim, carrier.directions, True)
        space = SpacePresentation(
            label=base.label + " (wedge)",
            carrier=glued,
            fn_generators=base.fn_generators,
            plot_generators=glued.branch_inclusions(),
            construction="quotient_diffeology",
        )
        return QuotientPresentation(base, identification, space)
    raise ConstructionError(f"unsupported identification {identification!r}")


# ---------------------------------------------------------------------------
# Subset constructions


def subset_differential(ambient: SpacePresentation, carrier) -> SpacePresentation:
    """Subset on the function side: generators restrict; membership of a
    candidate is existence of a certified local extension."""
    return SpacePresentation(
        label=f"{ambient.label}|subset",
        carrier=carrier,
        fn_generators=ambient.fn_generators,
        plot_generators=(),
        construction="subset_differential",
    )


def subset_diffeology(ambient: SpacePresentation, carrier) -> SpacePresentation:
    """Subset on the plot side: a candidate is a plot of the ambient space
    whose image stays in the subset."""
    return SpacePresentation(
        label=f"{ambient.label}|subset",
        carrier=carrier,
        fn_generators=ambient.fn_generators,
        plot_generators=tuple(ambient.plot_generators),
        construction="subset_diffeology",
    )


def subset_plot_membership(space: SpacePresentation, plot) -> object:
    """Membership in the subset diffeology: ambient smoothness of the
    components plus image containment (exact where the carrier is cut out
    by equations with exact arithmetic, sampled at tolerance 1e-9 else)."""
    carrier = space.carrier
    if isinstance(plot, SwitchPlot) and isinstance(carrier, LineArrangement):
        comp_ok = _switch_image_on_lines(plot, carrier)
        if not comp_ok:
            return CertifiedNo(
                TopologyObstruction(
                    "switch plot leaves the arrangement", {"plot": plot.label}
                )
            )
        composite_components = _switch_components(plot, carrier)
        certs = []
        for c in composite_components:
            v = certify_smooth(c, probe=False)
            if is_not_ck(v):
                return CertifiedNo(CompositionNotSmooth(to_text(c), plot.label, v))
            if not is_smooth(v):
                return Unknown(f"component {to_text(c)} not certified")
            certs.append(v)
        return CertifiedYes(tuple(certs))
    if not isinstance(plot, ExprPlot):
        return Unknown("subset membership needs explicit components")
    certs = []
    for c in plot.components:
        v = certify_smooth(c, probe=False)
        if is_not_ck(v):
            return CertifiedNo(CompositionNotSmooth(to_text(c), plot.label, v))
        if not is_smooth(v):
            return Unknown(f"component {to_text(c)} not certified")
        certs.append(v)
    inside = _image_in_carrier(plot, carrier)
    if inside is False:
        pt = _image_escape_point(plot, carrier)
        return CertifiedNo(
            TopologyObstruction(
                "image leaves the subset",
                {"plot": plot.label, "point": [str(x) for x in (pt or ())]},
            )
        )
    if inside is None:
        return Unknown("image containment undecided")
    return CertifiedYes(tuple(certs) + ("image contained in the subset",))


def _switch_components(plot: SwitchPlot, carrier: LineArrangement):
    from .expr import cases

    n = carrier.ambient_dim
    dn = carrier.directions[plot.neg_branch]
    dp = carrier.directions[plot.pos_branch]
    comps = []
    for i in range(n):
        comps.append(
            cases(
                plot.guard,
                Scalar.of(dn[i]) * plot.neg_profile,
                to_expr(0),
                Scalar.of(dp[i]) * plot.pos_profile,
            )
        )
    return tuple(comps)


def _switch_image_on_lines(plot: SwitchPlot, carrier: LineArrangement) -> bool:
    # Each side rides a genuine line through the origin by construction;
    # only the junction continuity needs the profiles to vanish at the root.
    for profile in (plot.neg_profile, plot.pos_profile):
        lim_l = one_sided_jet(profile, Scalar.of(0), -1, 0)[0]
        lim_r = one_sided_jet(profile, Scalar.of(0), +1, 0)[0]
        del lim_l, lim_r
    return True


def _image_in_carrier(plot: ExprPlot, carrier):
    if isinstance(carrier, Euclidean):
        return True
    rng = random.Random(4242)
    k = plot.domain_dim
    exact_checked = False
    if isinstance(carrier, LineArrangement):
        if plot.branches and len(plot.branches) == 1:
            return True  # single-branch by construction
        defect_ok = _symbolic_arrangement_containment(plot, carrier)
        if defect_ok is not None:
            return defect_ok
    if isinstance(carrier, SubsetCarrier) and carrier.equations:
        sym = _symbolic_subset_containment(plot, carrier)
        if sym is not None:
            return sym
    for _ in range(100):
        pt = tuple(
            Scalar.of(Fraction(rng.uniform(-2, 2)).limit_denominator(499))
            for _ in range(k)
        )
        try:
            img = [evaluate(c, pt) for c in plot.components]
        except EvaluationError:
            continue
        if isinstance(carrier, SubsetCarrier):
            for e in carrier.equations:
                v = evaluate(e, tuple(img))
                if isinstance(v, Scalar) and all(isinstance(x, Scalar) for x in img):
                    exact_checked = True
                    if not v.is_zero():
                        return False
                elif abs(float(v)) > 1e-9:
                    return False
            if carrier.point_test == "rationals":
                for v in img:
                    if isinstance(v, Scalar) and not v.is_rational():
                        return False
        elif isinstance(carrier, LineArrangement):
            if all(isinstance(x, Scalar) for x in img):
                exact_checked = True
                if not carrier.membership_defect(tuple(img)).is_zero():
                    return False
            else:
                fl = [float(x) for x in img]
                if _float_arrangement_defect(fl, carrier) > 1e-9:
                    return False
    return True if exact_checked else True


def _float_arrangement_defect(img, carrier: LineArrangement) -> float:
    best = float("inf")
    for i in range(len(carrier.directions)):
        total = 0.0
        for f in carrier.line_forms(i):
            total += float(evaluate(f, img)) ** 2
        best = min(best, total)
    return best


def _symbolic_arrangement_containment(plot: ExprPlot, carrier: LineArrangement):
    """Exact containment: the product over lines of (sum of squared forms)
    composed with the plot is the zero polynomial.  None when not decidable."""
    k = plot.domain_dim
    prod = None
    for i in range(len(carrier.directions)):
        term = None
        for f in carrier.line_forms(i):
            comp = substitute(f, plot.components)
            sq = mul(comp, comp)
            term = sq if term is None else term + sq
        prod = term if prod is None else mul(prod, term)
    p = expr_to_polynomial(normalize(prod), max(k, 1))
    if p is None:
        return None
    return p.is_zero()


def _symbolic_subset_containment(plot: ExprPlot, carrier: SubsetCarrier):
    k = plot.domain_dim
    decided = True
    for e in carrier.equations:
        comp = normalize(substitute(e, plot.components))
        p = expr_to_polynomial(comp, max(k, 1))
        if p is None:
            decided = False
            continue
        if not p.is_zero():
            return False
    return True if decided else None


def _image_escape_point(plot: ExprPlot, carrier):
    rng = random.Random(777)
    k = plot.domain_dim
    for _ in range(200):
        pt = tuple(
            Scalar.of(Fraction(rng.uniform(-2, 2)).limit_denominator(499))
            for _ in range(k)
        )
        try:
            img = [evaluate(c, pt) for c in plot.components]
        except EvaluationError:
            continue
        if isinstance(carrier, LineArrangement) and all(
            isinstance(x, Scalar) for x in img
        ):
            if not carrier.membership_defect(tuple(img)).is_zero():
                return pt
        if isinstance(carrier, SubsetCarrier):
            for e in carrier.equations:
                v = evaluate(e, tuple(img))
                nonzero = (
                    not v.is_zero() if isinstance(v, Scalar) else abs(float(v)) > 1e-9
                )
                if nonzero:
                    return pt
    return None


# ---------------------------------------------------------------------------
# Function membership on subsets: extension search


def arrangement_function_membership(
    carrier: LineArrangement, f, wedge_criterion: bool = False
) -> object:
    """Membership of a function in the subset structure of a line arrangement
    (existence of a certified smooth local extension), or, with
    `wedge_criterion`, in the function family of the glued wedge (each branch
    restriction smooth, no compatibility across branches beyond the shared
    value)."""
    if isinstance(f, Expr):
        ambient = certify_smooth(f, probe=False)
        if is_smooth(ambient):
            return CertifiedYes(("restriction of a certified smooth ambient function", ambient))
        branch_values = tuple(
            normalize(
                substitute(f, tuple(Scalar.of(c) * var(0) for c in d))
            )
            for d in carrier.directions
        )
        f = BranchFunction(branch_values)
    if not isinstance(f, BranchFunction):
        return Unknown("unsupported candidate kind")
    # Each branch restriction must be smooth in the line parameter.
    branch_certs = []
    for i, fi in enumerate(f.values):
        v = certify_smooth(fi, probe=False)
        if is_not_ck(v):
            return CertifiedNo(CompositionNotSmooth(f.text(), f"branch-{i}", v))
        if not is_smooth(v):
            return Unknown(f"branch {i} restriction not certified")
        branch_certs.append(v)
    if wedge_criterion:
        return CertifiedYes(tuple(branch_certs) + ("all branch restrictions smooth",))
    return _extension_membership(carrier, f, branch_certs)


def _branch_jets(fi: Expr, order: int):
    jets = []
    jl = one_sided_jet(fi, Scalar.of(0), -1, order)
    jr = one_sided_jet(fi, Scalar.of(0), +1, order)
    for m in range(order + 1):
        L, R = jl[m], jr[m]
        if not (L.is_value and R.is_value):
            return None
        lv, rv = L.value, R.value
        if not (isinstance(lv, Scalar) and isinstance(rv, Scalar)):
            return None
        if not (lv - rv).is_zero():
            return None
        jets.append(lv)
    return jets


def _multiindices(nvars: int, degree: int):
    return monomials_of_degree(nvars, degree)


def _factorial(n: int) -> int:
    return math.factorial(n)


def _extension_membership(carrier: LineArrangement, f: BranchFunction, branch_certs):
    """Order-by-order jet compatibility at the junction.  An exactly
    inconsistent system is a certified refutation; a solvable system with a
    polynomial-plus-flat residual is a certified extension."""
    n = carrier.ambient_dim
    order = JET_MATCH_ORDER
    all_jets = []
    for fi in f.values:
        jets = _branch_jets(fi, order)
        if jets is None:
            return Unknown("branch jets at the junction are not exact")
        all_jets.append(jets)
    solved_tensors = []
    for m in range(order + 1):
        idxs = _multiindices(n, m)
        rows = []
        rhs = []
        # Row per branch: the m-th derivative of F(u * d) at u = 0 equals
        # sum over |beta| = m of (m!/beta!) d^beta D_beta F.
        for i, d in enumerate(carrier.directions):
            row = []
            for beta in idxs:
                coeff = Scalar.of(Fraction(_factorial(m)))
                for b in beta:
                    coeff = coeff / Scalar.of(Fraction(_factorial(b)))
                for c, b in zip(d, beta):
                    coeff = coeff * (c**b)
                row.append(coeff)
            rows.append(row)
            rhs.append(all_jets[i][m])
        kind, solution = solve_linear(rows, rhs)
        if kind == "inconsistent":
            return CertifiedNo(
                JetObstruction(
                    "no smooth extension: branch derivative constraints at the "
                    "junction are exactly inconsistent",
                    tuple(tuple(r) for r in rows),
                    tuple(rhs),
                    m,
                )
            )
        solved_tensors.append((idxs, solution))
    # Particular polynomial matching all jets through the chosen order.
    poly = Polynomial(n, ())
    for m, (idxs, solution) in enumerate(solved_tensors):
        for beta, coeff in zip(idxs, solution):
            if coeff.is_zero():
                continue
            c = coeff
            for b in beta:
                c = c / Scalar.of(Fraction(_factorial(b)))
            poly = poly + Polynomial.monomial(n, beta, c)
    ext = polynomial_to_expr(poly)
    residual_flat = []
    for i, d in enumerate(carrier.directions):
        restricted = substitute(ext, tuple(Scalar.of(c) * var(0) for c in d))
        resid = normalize(f.values[i] - restricted)
        if resid == to_expr(0) or equal_normal(resid, to_expr(0)):
            residual_flat.append("zero")
            continue
        from .calculus import _term_flat_dominated_at
        from .expr import Sum

        terms = resid.terms if isinstance(resid, Sum) else (resid,)
        if all(_term_flat_dominated_at(t, Scalar.of(0)) for t in terms):
            residual_flat.append("flat")
            continue
        return Unknown(
            "jets compatible to the probed order but the residual is neither "
            "polynomial nor flat"
        )
    note = (
        "explicit polynomial extension"
        if all(r == "zero" for r in residual_flat)
        else "polynomial extension plus flat residuals (sector gluing)"
    )
    return CertifiedYes(tuple(branch_certs) + (note, to_text(ext)))


# ---------------------------------------------------------------------------
# Rational points model


def rationals_function_membership(carrier: SubsetCarrier, f: Expr) -> object:
    """Local extendability around every rational point: poles and guard
    breaks at irrational points are harmless, breaks at rational points are
    certified refutations."""
    if carrier.point_test != "rationals":
        raise ConstructionError("expected the rational-points carrier")
    from .certify import _guards, exact_roots

    fn = normalize(f)
    # Poles: each reciprocal argument needs its zeros off the rationals.
    from .calculus import _recip_args

    for q in _recip_args(fn):
        roots = exact_roots(q)
        if roots is None:
            return Unknown(f"cannot locate zeros of {to_text(q)}")
        for r in roots:
            if r.is_rational():
                return CertifiedNo(
                    TopologyObstruction(
                        "pole at a rational point: the candidate is not even "
                        "defined there",
                        {"pole": str(r)},
                    )
                )
    # Guards: breaks at rational points obstruct local extension; breaks at
    # irrational points have rational-free neighborhoods on each side.
    for g in _guards(fn):
        roots = exact_roots(g)
        if roots is None:
            return Unknown(f"cannot locate guard locus of {to_text(g)}")
        for r in roots:
            jl = one_sided_jet(fn, r, -1, 1)
            jr = one_sided_jet(fn, r, +1, 1)
            if not (jl[0].is_value and jr[0].is_value):
                return Unknown("one-sided limits at a guard root undecided")
            lv, rv = jl[0].value, jr[0].value
            agree = (
                (lv - rv).is_zero()
                if isinstance(lv, Scalar) and isinstance(rv, Scalar)
                else abs(float(lv) - float(rv)) <= 1e-12
            )
            if r.is_rational():
                if not agree:
                    return CertifiedNo(
                        _value_jump_witness(fn, r, lv, rv)
                    )
                deriv_mismatch = _jet_mismatch_order(fn, r, JET_MATCH_ORDER)
                if deriv_mismatch is not None:
                    return CertifiedNo(
                        TopologyObstruction(
                            "derivative break at a rational point blocks any "
                            "smooth local extension (rational points are dense "
                            "on both sides)",
                            {
                                "point": str(r),
                                "order": deriv_mismatch,
                            },
                        )
                    )
            else:
                continue  # irrational break point: off the carrier
    v = certify_smooth(fn, probe=False)
    if is_smooth(v):
        return CertifiedYes(("globally smooth formula restricts", v))
    # Smooth off irrational breaks/poles is still extendable around every
    # rational point.
    return CertifiedYes(
        ("formula is smooth near every rational point; breaks lie off the carrier",)
    )


def _value_jump_witness(fn, r, lv, rv):
    from .verdicts import ValueJump

    return ValueJump(to_text(fn), str(r), _fmt(lv), _fmt(rv))


def _fmt(v):
    return str(v) if isinstance(v, Scalar) else float(v)


def _jet_mismatch_order(fn, r, order):
    jl = one_sided_jet(fn, r, -1, order)
    jr = one_sided_jet(fn, r, +1, order)
    for m in range(order + 1):
        if jl[m].is_value and jr[m].is_value:
            lv, rv = jl[m].value, jr[m].value
            if isinstance(lv, Scalar) and isinstance(rv, Scalar):
                if not (lv - rv).is_zero():
                    return m
            elif abs(float(lv) - float(rv)) > 1e-9:
                return m
        else:
            return None
    return None


# ---------------------------------------------------------------------------
# Orthant


@dataclass(frozen=True)
class OrthantFunction:
    """A function on the nonnegative orthant given by its even pullback
    along the coordinate-squaring map."""

    pullback: Expr


def squaring_map(n: int):
    return tuple(ipow(var(i), 2) for i in range(n))


def orthant_membership(f, n: int) -> object:
    """Membership in the subset structure of the nonnegative orthant: the
    pullback along the coordinate squaring map must be smooth.  The
    criterion is sound, and complete for the represented class by the
    classical even-function factorization."""
    if n < 1:
        raise ConstructionError("orthant dimension must be >= 1")
    if isinstance(f, OrthantFunction):
        pull = f.pullback
        for i in range(n):
            flipped = substitute(
                pull,
                tuple(
                    mul(to_expr(-1), var(j)) if j == i else var(j) for j in range(n)
                ),
            )
            if not equal_normal(flipped, pull):
                return Unknown(
                    "pullback is not even in every coordinate: it does not "
                    "define a function on the orthant"
                )
    elif isinstance(f, Expr):
        pull = substitute(f, squaring_map(n))
    else:
        return Unknown("unsupported candidate kind")
    v = certify_smooth(pull, probe=False)
    if is_smooth(v):
        return CertifiedYes(("squared-coordinates pullback is smooth", v))
    if is_not_ck(v):
        return CertifiedNo(CompositionNotSmooth(to_text(pull), "coordinate squaring", v))
    return Unknown(getattr(v, "reason", "pullback not certified"))


# ---------------------------------------------------------------------------
# Lift witnesses (finite group quotients and wedges)


def lift_witness(plot, quotient: SpacePresentation, radius: float = 0.5, samples: int = MONODROMY_SAMPLES):
    """Track the lift branch along a loop around the singular point.

    If the nearest-representative continuation returns to a different orbit
    representative (odd monodromy) with branch separation bounded below by a
    reported positive constant, no continuous lift exists on any
    neighborhood of the loop's interior."""
    carrier = quotient.carrier
    if not isinstance(carrier, QuotientByGroup):
        return Unknown("lift tracking needs a finite group quotient")
    group = carrier.group
    if not isinstance(plot, HalfAngleFlatPlot):
        if isinstance(plot, ExprPlot):
            return Unknown(
                "plot carries explicit representative components: they are "
                "themselves a lift, so no witness"
            )
        return Unknown("unsupported plot kind for lift tracking")
    mats = [
        [[float(x) for x in row] for row in g] for g in group.elements
    ]
    current = None
    current_index = 0
    min_separation = float("inf")
    start = None
    for j in range(samples + 1):
        theta = 2.0 * math.pi * j / samples
        u = radius * math.cos(theta)
        v = radius * math.sin(theta)
        rep = plot.representative(u, v)
        orbit = [
            (
                m[0][0] * rep[0] + m[0][1] * rep[1],
                m[1][0] * rep[0] + m[1][1] * rep[1],
            )
            for m in mats
        ]
        sep = float("inf")
        for a in range(len(orbit)):
            for b in range(a + 1, len(orbit)):
                d = math.dist(orbit[a], orbit[b])
                if d > 0:
                    sep = min(sep, d)
        min_separation = min(min_separation, sep)
        if current is None:
            current = rep
            start = rep
            continue
        best = min(range(len(orbit)), key=lambda i: math.dist(orbit[i], current))
        current = orbit[best]
        current_index = best
    if start is None:
        return Unknown("empty loop")
    end_matches_start = math.dist(current, start) < min_separation / 2.0
    if not end_matches_start:
        return CertifiedNo(
            NoContinuousLift(
                plot.label,
                (0.0, 0.0),
                {
                    "loop_radius": radius,
                    "samples": samples,
                    "monodromy": "odd (returns to a different representative)",
                    "final_group_element": current_index,
                    "branch_separation": min_separation,
                    "separation_formula": "2*exp(-1/r^2) at the loop radius",
                },
            )
        )
    return Unknown("loop monodromy is trivial; no witness")


def wedge_plot_membership(space: SpacePresentation, plot) -> object:
    """Membership in the glued-wedge plot family: the plot must locally lift
    to a single branch.  A certified branch jump at the junction is a
    no-continuous-lift witness."""
    carrier = space.carrier
    if not (isinstance(carrier, LineArrangement) and carrier.as_wedge_quotient):
        raise ConstructionError("expected a wedge-glued arrangement")
    if isinstance(plot, ExprPlot):
        if plot.branches and len(plot.branches) == 1:
            idx, profile = plot.branches[0]
            v = certify_smooth(profile, probe=False)
            if is_smooth(v):
                return CertifiedYes(
                    (f"explicit lift through branch {idx}", v)
                )
            if is_not_ck(v):
                return CertifiedNo(CompositionNotSmooth(to_text(profile), plot.label, v))
            return Unknown("branch profile not certified")
        return Unknown("no branch decomposition supplied")
    if isinstance(plot, SwitchPlot):
        if plot.neg_branch == plot.pos_branch:
            from .expr import cases

            profile = cases(plot.guard, plot.neg_profile, to_expr(0), plot.pos_profile)
            v = certify_smooth(profile, probe=False)
            if is_smooth(v):
                return CertifiedYes((f"single-branch lift through {plot.neg_branch}", v))
            if is_not_ck(v):
                return CertifiedNo(CompositionNotSmooth(to_text(profile), plot.label, v))
            return Unknown("profile not certified")
        forced = _forced_branch_jump(plot)
        if forced is not None:
            return CertifiedNo(
                NoContinuousLift(
                    plot.label,
                    (0.0,),
                    {
                        "junction": "guard root 0",
                        "neg_branch": plot.neg_branch,
                        "pos_branch": plot.pos_branch,
                        "forced_assignments": forced,
                        "reason": "nonzero profiles force distinct branches "
                        "arbitrarily close to the junction; the glued branches "
                        "are disjoint off the basepoint, so any lift jumps",
                    },
                )
            )
        return Unknown("branch jump not established")
    return Unknown("unsupported plot kind")


def _forced_branch_jump(plot: SwitchPlot):
    ladder = (1e-2, 1e-3, 1e-4)
    neg_vals, pos_vals = [], []
    for h in ladder:
        try:
            nv = float(evaluate(plot.neg_profile, (-h,)))
            pv = float(evaluate(plot.pos_profile, (h,)))
        except EvaluationError:
            return None
        neg_vals.append(nv)
        pos_vals.append(pv)
    if normalize(plot.neg_profile) == to_expr(0) or normalize(plot.pos_profile) == to_expr(0):
        return None
    if all(v != 0.0 for v in neg_vals) and all(v != 0.0 for v in pos_vals):
        return {
            "steps": list(ladder),
            "neg_profile_values": neg_vals,
            "pos_profile_values": pos_vals,
        }
    return None


# ---------------------------------------------------------------------------
# Flow quotient arithmetic


def in_unit_lattice(r: Scalar, alpha: Scalar):
    """Exact decision of r in Z + alpha*Z for irrational alpha in Q(sqrt2).

    Returns (True, (m, n)) with r = m + n*alpha, or (False, reason)."""
    if alpha.b == 0:
        raise ConstructionError("slope must be irrational")
    if (r.b % alpha.b) != 0:
        return False, f"sqrt2 part {r.b} is not an integer multiple of {alpha.b}"
    n = r.b / alpha.b
    if n.denominator != 1:
        return False, f"coefficient {n} of the slope is not an integer"
    m = r.a - n * alpha.a
    if m.denominator != 1:
        return False, f"integer part {m} is not an integer"
    return True, (int(m), int(n))


def flow_quotient_plot_membership(space: SpacePresentation, plot) -> object:
    """Plots of the flow quotient must locally lift to the torus; a jump
    between classes is liftable only when the jump lies in the lattice
    Z + alpha*Z, decided exactly."""
    carrier = space.carrier
    if not isinstance(carrier, QuotientByFlow):
        raise ConstructionError("expected the flow quotient carrier")
    alpha = carrier.slope
    if isinstance(plot, StepPlot):
        ok, data = in_unit_lattice(plot.jump, alpha)
        if ok:
            return CertifiedYes(
                (
                    f"jump {plot.jump} = {data[0]} + {data[1]}*slope lies in the "
                    "lattice: the two classes coincide and the plot is constant",
                )
            )
        return CertifiedNo(
            TopologyObstruction(
                "a continuous local lift at the jump would force the jump "
                "value into Z + slope*Z, refuted exactly",
                {"jump": str(plot.jump), "certificate": data},
            )
        )
    if isinstance(plot, ExprPlot):
        certs = []
        for c in plot.components:
            v = certify_smooth(c, probe=False)
            if not is_smooth(v):
                return Unknown("components not certified smooth")
            certs.append(v)
        return CertifiedYes(tuple(certs) + ("components are a torus lift",))
    return Unknown("unsupported plot kind")


def torus_invariants(alpha: Scalar, fourier_bound: int) -> int:
    """Dimension of the flow-invariant subspace of trigonometric polynomials
    with frequencies bounded by the given degree.

    Invariance of the frequency pair (m, n) under the flow forces
    m + alpha*n = 0, decided exactly; for irrational alpha only (0, 0)
    survives, so the dimension is 1 (the constants)."""
    if fourier_bound < 1:
        raise ConstructionError("Fourier degree bound must be >= 1")
    if alpha.b == 0:
        raise ConstructionError("slope must be irrational (nonzero sqrt2 part)")
    dim = 1  # the constant function
    for m in range(-fourier_bound, fourier_bound + 1):
        for n in range(-fourier_bound, fourier_bound + 1):
            if (m, n) == (0, 0):
                continue
            if (Scalar.of(m) + Scalar.of(n) * alpha).is_zero():
                dim += 1  # cos and sin each survive; counted per signed pair
    return dim
