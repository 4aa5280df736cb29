"""Finitely presented spaces: carriers plus generating functions and plots.

A presentation is a carrier description together with a finite family of
real-valued generator functions (a differential-structure presentation)
and/or a family of generator plots (a diffeology presentation).  Documents
are canonical JSON with integers and rationals as strings.

Carrier kinds:
  euclidean          R^n
  subset             a subset of R^n cut out by equations/inequalities,
                     optionally with generators of its vanishing ideal;
                     `point_test: "rationals"` marks the totally
                     disconnected rational-points model of the line
  line_arrangement   a union of lines through the origin; with
                     `wedge: true` the same point set is read as a wedge of
                     lines glued at the origin, whose plots must locally
                     lift to a single branch
  quotient_by_group  R^n modulo a finite exact orthogonal matrix group
  quotient_by_flow   the 2-torus modulo the line flow of irrational slope
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .certify import certify_smooth, is_not_ck
from .expr import (
    Expr,
    Var,
    arity,
    equal_normal,
    mul,
    normalize,
    parse_expr,
    substitute,
    to_expr,
    to_text,
    var,
)
from .field import ONE, ZERO, Scalar, identity_matrix, mat_eq, mat_mul, transpose


class PresentationError(ValueError):
    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


# ---------------------------------------------------------------------------
# Groups


@dataclass(frozen=True)
class FiniteMatrixGroup:
    label: str
    elements: tuple  # tuple of matrices (tuples of tuples of Scalar)

    @property
    def dim(self) -> int:
        return len(self.elements[0])

    @property
    def order(self) -> int:
        return len(self.elements)

    def validate(self, path: str = "$") -> None:
        n = self.dim
        mats = list(self.elements)
        if not any(mat_eq(m, identity_matrix(n)) for m in mats):
            raise PresentationError("group does not contain the identity", path)
        for i, g in enumerate(mats):
            if len(g) != n or any(len(row) != n for row in g):
                raise PresentationError(f"element {i} is not {n}x{n}", path)
            if not mat_eq(mat_mul(transpose(g), g), identity_matrix(n)):
                raise PresentationError(f"element {i} is not orthogonal", path)
            if not any(mat_eq(mat_mul(g, h), identity_matrix(n)) for h in mats):
                raise PresentationError(f"element {i} has no inverse in the list", path)
            for j, h in enumerate(mats):
                prod = mat_mul(g, h)
                if not any(mat_eq(prod, k) for k in mats):
                    raise PresentationError(
                        f"product of elements {i} and {j} is missing: not closed",
                        path,
                    )

    def to_json(self):
        return {
            "label": self.label,
            "matrices": [[[str(x) for x in row] for row in g] for g in self.elements],
        }


def group_from_json(doc: dict, label: str = "group") -> FiniteMatrixGroup:
    mats = []
    for g in doc["matrices"]:
        mats.append(tuple(tuple(Scalar.parse(x) for x in row) for row in g))
    grp = FiniteMatrixGroup(doc.get("label", label), tuple(mats))
    grp.validate()
    return grp


def load_group(path) -> FiniteMatrixGroup:
    doc = json.loads(Path(path).read_text())
    return group_from_json(doc, label=str(path))


def sign_flip_group(n: int) -> FiniteMatrixGroup:
    """(Z_2)^n acting by independent sign flips of the coordinates."""
    mats = []
    for mask in range(1 << n):
        mats.append(
            tuple(
                tuple(
                    (ONE if not (mask >> i) & 1 else -ONE) if i == j else ZERO
                    for j in range(n)
                )
                for i in range(n)
            )
        )
    return FiniteMatrixGroup(f"sign-flips-{n}", tuple(mats))


def antipodal_group(n: int) -> FiniteMatrixGroup:
    """The two-element group {I, -I} on R^n."""
    return FiniteMatrixGroup(
        f"antipodal-{n}",
        (identity_matrix(n), tuple(tuple(-x for x in row) for row in identity_matrix(n))),
    )


# ---------------------------------------------------------------------------
# Carriers


@dataclass(frozen=True)
class Euclidean:
    dim: int

    kind = "euclidean"

    @property
    def ambient_dim(self) -> int:
        return self.dim


@dataclass(frozen=True)
class SubsetCarrier:
    ambient_dim: int
    equations: tuple = ()
    inequalities: tuple = ()  # meaning e >= 0
    ideal_generators: tuple | None = None
    point_test: str = "equations"  # or "rationals"
    parametrizations: tuple = ()

    kind = "subset"


@dataclass(frozen=True)
class LineArrangement:
    """Union of distinct lines through the origin of R^2, or the coordinate
    axes of R^3.  With `as_wedge_quotient` the point set is a wedge of lines
    glued at the origin and plots must locally lift to single branches."""

    ambient_dim: int
    directions: tuple  # tuple of direction vectors (tuples of Scalar)
    as_wedge_quotient: bool = False

    kind = "line_arrangement"

    def line_forms(self, i: int) -> tuple:
        """Linear forms cutting out line i."""
        d = self.directions[i]
        n = self.ambient_dim
        if n == 2:
            return (d[1] * Var(0) + (-d[0]) * Var(1),)
        forms = []
        for j in range(n):
            if not d[j].is_zero():
                pivot = j
                break
        for j in range(n):
            if j == pivot:
                continue
            forms.append(d[pivot] * Var(j) + (-d[j]) * Var(pivot))
        return tuple(forms)

    def membership_defect(self, point) -> Scalar:
        """Zero iff the point lies on one of the lines (product of forms)."""
        from .calculus import evaluate

        total = ONE
        for i in range(len(self.directions)):
            value = ZERO
            for f in self.line_forms(i):
                v = evaluate(f, point)
                v = v if isinstance(v, Scalar) else Scalar.of(Fraction(v))
                value = value + v * v
            total = total * value
        return total

    def default_ideal_generators(self) -> tuple:
        if self.ambient_dim == 2:
            return (mul(*[self.line_forms(i)[0] for i in range(len(self.directions))]),)
        # Coordinate axes in R^3: pairwise coordinate products.
        return (
            mul(Var(0), Var(1)),
            mul(Var(1), Var(2)),
            mul(Var(0), Var(2)),
        )

    def branch_inclusions(self) -> tuple:
        out = []
        for i, d in enumerate(self.directions):
            comps = tuple(Scalar.of(c) * var(0) for c in d)
            out.append(
                ExprPlot(
                    label=f"branch-{i}",
                    domain=None,
                    components=tuple(normalize(c) for c in comps),
                    branches=((i, var(0)),),
                )
            )
        return tuple(out)


@dataclass(frozen=True)
class QuotientByGroup:
    inner_dim: int
    group: FiniteMatrixGroup

    kind = "quotient_by_group"

    @property
    def ambient_dim(self) -> int:
        return self.inner_dim


@dataclass(frozen=True)
class QuotientByFlow:
    """The 2-torus modulo [x, y] -> [x + t, y + slope * t]."""

    slope: Scalar

    kind = "quotient_by_flow"

    ambient_dim = 2


Carrier = "Euclidean | SubsetCarrier | LineArrangement | QuotientByGroup | QuotientByFlow"


# ---------------------------------------------------------------------------
# Plot generators and function generators


@dataclass(frozen=True)
class BoxDomain:
    bounds: tuple  # tuple of (Scalar | None, Scalar | None)

    @property
    def dims(self) -> int:
        return len(self.bounds)


@dataclass(frozen=True)
class ExprPlot:
    label: str
    domain: BoxDomain | None  # None = all of R^k
    components: tuple
    branches: tuple = ()  # optional branch profile for arrangements:
    # ((index, profile),) for single-branch, or
    # (guard, (idx_neg, profile_neg), (idx_pos, profile_pos)) via make_switch

    kind = "expr"

    @property
    def domain_dim(self) -> int:
        if self.domain is not None:
            return self.domain.dims
        return max((arity(c) for c in self.components), default=1)


@dataclass(frozen=True)
class SwitchPlot:
    """A curve into a line arrangement that rides one branch for t < 0 and
    another for t > 0, passing through the junction at t = 0."""

    label: str
    guard: Expr
    neg_branch: int
    neg_profile: Expr
    pos_branch: int
    pos_profile: Expr

    kind = "switch"

    domain_dim = 1


@dataclass(frozen=True)
class AllSmoothCurves:
    """Schema marker: the family of all smooth curves (wire generators)."""

    label: str = "all-smooth-curves"

    kind = "all_smooth_curves"

    domain_dim = 1


@dataclass(frozen=True)
class HalfAngleFlatPlot:
    """The flat half-angle parametrisation into the plane modulo a sign:
    (r cos t, r sin t) maps to the class of exp(-1/r^2)(cos t/2, sin t/2),
    and the origin maps to the class of the origin."""

    label: str = "half-angle-flat"

    kind = "half_angle_flat"

    domain_dim = 2

    def representative(self, u: float, v: float) -> tuple:
        import math

        r2 = u * u + v * v
        if r2 == 0.0:
            return (0.0, 0.0)
        theta = math.atan2(v, u)
        try:
            scale = math.exp(-1.0 / r2)
        except OverflowError:
            scale = 0.0
        return (scale * math.cos(theta / 2.0), scale * math.sin(theta / 2.0))


@dataclass(frozen=True)
class StepPlot:
    """A parametrisation of the flow quotient torus that jumps from the
    class of [0, 0] to the class of [0, r] at t = 0."""

    label: str
    jump: Scalar

    kind = "step"

    domain_dim = 1


@dataclass(frozen=True)
class BranchFunction:
    """A function on a line arrangement given by one univariate expression
    per branch, in the line's direction parameter; values agree at 0."""

    values: tuple

    def validate(self, path: str = "$") -> None:
        from .calculus import evaluate

        vals = [evaluate(v, (Scalar.of(0),)) for v in self.values]
        first = vals[0]
        for v in vals[1:]:
            f = first if isinstance(first, Scalar) else Scalar.of(0)
            if isinstance(first, Scalar) and isinstance(v, Scalar):
                if not (v - first).is_zero():
                    raise PresentationError(
                        "branch values disagree at the junction", path
                    )
            elif float(v) != float(first):
                raise PresentationError("branch values disagree at the junction", path)

    def text(self) -> str:
        return "[" + " | ".join(to_text(v) for v in self.values) + "]"


@dataclass(frozen=True)
class CkFunctions:
    """Schema marker: all k-times continuously differentiable functions on R."""

    k: int


# ---------------------------------------------------------------------------
# The presentation


@dataclass(frozen=True)
class SpacePresentation:
    label: str
    carrier: object
    fn_generators: tuple = ()
    plot_generators: tuple = ()
    construction: str = "raw"
    notes: tuple = ()

    @property
    def ambient_dim(self) -> int:
        return self.carrier.ambient_dim


def standard_space(n: int) -> SpacePresentation:
    """R^n with coordinate generators and the identity plot; the generated
    structures are the standard ones and they determine each other."""
    if n < 1:
        raise PresentationError(
            "carrier must be nonempty with n >= 1; points are modeled as subsets"
        )
    coords = tuple(var(i) for i in range(n))
    ident = ExprPlot("identity", None, coords)
    return SpacePresentation(
        label=f"R^{n}",
        carrier=Euclidean(n),
        fn_generators=coords,
        plot_generators=(ident,),
        construction="standard",
    )


# ---------------------------------------------------------------------------
# Composition helpers shared by the membership machinery


def compose_function_with_plot(f, p, carrier=None):
    """The composition f o p as an expression, or None when unsupported."""
    from .expr import cases

    if isinstance(f, Expr):
        if isinstance(p, ExprPlot):
            return substitute(f, p.components)
        if isinstance(p, SwitchPlot) and carrier is not None and isinstance(
            carrier, LineArrangement
        ):
            negc = tuple(
                Scalar.of(c) * p.neg_profile for c in carrier.directions[p.neg_branch]
            )
            posc = tuple(
                Scalar.of(c) * p.pos_profile for c in carrier.directions[p.pos_branch]
            )
            zero = substitute(f, tuple(to_expr(0) for _ in range(carrier.ambient_dim)))
            return cases(p.guard, substitute(f, negc), zero, substitute(f, posc))
        return None
    if isinstance(f, BranchFunction):
        if isinstance(p, ExprPlot) and p.branches and len(p.branches) == 1:
            idx, profile = p.branches[0]
            return substitute(f.values[idx], (profile,))
        if isinstance(p, SwitchPlot):
            from .calculus import evaluate

            center = evaluate(f.values[0], (Scalar.of(0),))
            return cases(
                p.guard,
                substitute(f.values[p.neg_branch], (p.neg_profile,)),
                to_expr(center if isinstance(center, Scalar) else Scalar.of(0)),
                substitute(f.values[p.pos_branch], (p.pos_profile,)),
            )
        return None
    return None


# ---------------------------------------------------------------------------
# JSON serialization (canonical field order, numbers as strings)


def _scalar_str(s: Scalar) -> str:
    return str(s)


def _domain_to_json(d: BoxDomain | None):
    if d is None:
        return None
    return {
        "dims": d.dims,
        "bounds": [
            [None if lo is None else str(lo), None if hi is None else str(hi)]
            for lo, hi in d.bounds
        ],
    }


def _domain_from_json(doc, path):
    if doc is None:
        return None
    bounds = []
    for pair in doc["bounds"]:
        lo = None if pair[0] is None else Scalar.parse(pair[0])
        hi = None if pair[1] is None else Scalar.parse(pair[1])
        bounds.append((lo, hi))
    return BoxDomain(tuple(bounds))


def carrier_to_json(c) -> dict:
    if isinstance(c, Euclidean):
        return {"kind": "euclidean", "dim": c.dim}
    if isinstance(c, SubsetCarrier):
        return {
            "kind": "subset",
            "ambient_dim": c.ambient_dim,
            "equations": [to_text(e) for e in c.equations],
            "inequalities": [to_text(e) for e in c.inequalities],
            "ideal_generators": None
            if c.ideal_generators is None
            else [to_text(e) for e in c.ideal_generators],
            "point_test": c.point_test,
        }
    if isinstance(c, LineArrangement):
        return {
            "kind": "line_arrangement",
            "ambient_dim": c.ambient_dim,
            "directions": [[str(x) for x in d] for d in c.directions],
            "wedge": c.as_wedge_quotient,
        }
    if isinstance(c, QuotientByGroup):
        return {
            "kind": "quotient_by_group",
            "inner_dim": c.inner_dim,
            "group": c.group.to_json(),
        }
    if isinstance(c, QuotientByFlow):
        return {"kind": "quotient_by_flow", "slope": str(c.slope)}
    raise PresentationError(f"unknown carrier {c!r}")


def carrier_from_json(doc: dict, path: str, base_dir=None):
    kind = doc.get("kind")
    if kind == "euclidean":
        return Euclidean(int(doc["dim"]))
    if kind == "subset":
        n = int(doc["ambient_dim"])
        eqs = tuple(parse_expr(s, n) for s in doc.get("equations", []))
        ineqs = tuple(parse_expr(s, n) for s in doc.get("inequalities", []))
        ideal = doc.get("ideal_generators")
        ideal_t = None if ideal is None else tuple(parse_expr(s, n) for s in ideal)
        return SubsetCarrier(
            n, eqs, ineqs, ideal_t, doc.get("point_test", "equations")
        )
    if kind == "line_arrangement":
        n = int(doc["ambient_dim"])
        dirs = tuple(tuple(Scalar.parse(x) for x in d) for d in doc["directions"])
        return LineArrangement(n, dirs, bool(doc.get("wedge", False)))
    if kind == "quotient_by_group":
        g = doc["group"]
        if isinstance(g, str):
            base = Path(base_dir) if base_dir else Path(".")
            group = load_group(base / g)
        else:
            group = group_from_json(g)
        return QuotientByGroup(int(doc["inner_dim"]), group)
    if kind == "quotient_by_flow":
        return QuotientByFlow(Scalar.parse(doc["slope"]))
    raise PresentationError(f"unknown carrier kind {kind!r}", path)


def _fn_gen_to_json(f):
    if isinstance(f, Expr):
        return to_text(f)
    if isinstance(f, BranchFunction):
        return {"branches": [to_text(v) for v in f.values]}
    if isinstance(f, CkFunctions):
        return {"schema": "ck", "k": f.k}
    raise PresentationError(f"unknown function generator {f!r}")


def _fn_gen_from_json(doc, dim: int, path: str):
    if isinstance(doc, str):
        return parse_expr(doc, dim)
    if isinstance(doc, dict) and "branches" in doc:
        return BranchFunction(tuple(parse_expr(s, 1) for s in doc["branches"]))
    if isinstance(doc, dict) and doc.get("schema") == "ck":
        return CkFunctions(int(doc["k"]))
    raise PresentationError(f"unknown function generator document {doc!r}", path)


def _plot_to_json(p):
    if isinstance(p, ExprPlot):
        out = {
            "label": p.label,
            "domain": _domain_to_json(p.domain),
            "components": [to_text(c) for c in p.components],
        }
        if p.branches:
            out["branches"] = [[i, to_text(prof)] for i, prof in p.branches]
        return out
    if isinstance(p, SwitchPlot):
        return {
            "label": p.label,
            "switch": {
                "guard": to_text(p.guard),
                "neg": [p.neg_branch, to_text(p.neg_profile)],
                "pos": [p.pos_branch, to_text(p.pos_profile)],
            },
        }
    if isinstance(p, AllSmoothCurves):
        return {"schema": "all-smooth-curves"}
    if isinstance(p, HalfAngleFlatPlot):
        return {"schema": "half-angle-flat"}
    if isinstance(p, StepPlot):
        return {"label": p.label, "step": {"jump": str(p.jump)}}
    raise PresentationError(f"unknown plot generator {p!r}")


def _plot_from_json(doc, ambient_dim: int, path: str):
    if isinstance(doc, dict) and doc.get("schema") == "all-smooth-curves":
        return AllSmoothCurves()
    if isinstance(doc, dict) and doc.get("schema") == "half-angle-flat":
        return HalfAngleFlatPlot()
    if isinstance(doc, dict) and "step" in doc:
        return StepPlot(doc.get("label", "step"), Scalar.parse(doc["step"]["jump"]))
    if isinstance(doc, dict) and "switch" in doc:
        sw = doc["switch"]
        return SwitchPlot(
            doc.get("label", "switch"),
            parse_expr(sw["guard"], 1),
            int(sw["neg"][0]),
            parse_expr(sw["neg"][1], 1),
            int(sw["pos"][0]),
            parse_expr(sw["pos"][1], 1),
        )
    if isinstance(doc, dict) and "components" in doc:
        domain = _domain_from_json(doc.get("domain"), path)
        k = domain.dims if domain is not None else None
        comps = []
        for s in doc["components"]:
            dim = k if k is not None else max(ambient_dim, 4)
            comps.append(parse_expr(s, dim))
        branches = tuple(
            (int(i), parse_expr(s, 1)) for i, s in doc.get("branches", [])
        )
        return ExprPlot(
            doc.get("label", "plot"), domain, tuple(comps), branches
        )
    raise PresentationError(f"unknown plot generator document {doc!r}", path)


def save_presentation(space: SpacePresentation) -> str:
    doc = {
        "label": space.label,
        "carrier": carrier_to_json(space.carrier),
        "fn_generators": [_fn_gen_to_json(f) for f in space.fn_generators],
        "plot_generators": [_plot_to_json(p) for p in space.plot_generators],
        "construction": space.construction,
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def load_presentation(document: str, base_dir=None) -> SpacePresentation:
    """Parse, validate, and return a presentation; violations carry paths."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise PresentationError(f"not valid JSON: {exc}", "$") from exc
    if "label" not in doc or "carrier" not in doc:
        raise PresentationError("missing required field 'label' or 'carrier'", "$")
    carrier = carrier_from_json(doc["carrier"], "$.carrier", base_dir)
    dim = carrier.ambient_dim
    fns = tuple(
        _fn_gen_from_json(f, dim, f"$.fn_generators[{i}]")
        for i, f in enumerate(doc.get("fn_generators", []))
    )
    plots = tuple(
        _plot_from_json(p, dim, f"$.plot_generators[{i}]")
        for i, p in enumerate(doc.get("plot_generators", []))
    )
    space = SpacePresentation(
        label=doc["label"],
        carrier=carrier,
        fn_generators=fns,
        plot_generators=plots,
        construction=doc.get("construction", "raw"),
    )
    validate_presentation(space)
    return space


def validate_presentation(space: SpacePresentation) -> None:
    carrier = space.carrier
    dim = carrier.ambient_dim
    if isinstance(carrier, QuotientByGroup):
        carrier.group.validate("$.carrier.group")
    if isinstance(carrier, QuotientByFlow) and carrier.slope.b == 0:
        raise PresentationError(
            "flow slope must be irrational (nonzero sqrt2 part)", "$.carrier.slope"
        )
    if isinstance(carrier, LineArrangement):
        for i, d in enumerate(carrier.directions):
            if all(x.is_zero() for x in d):
                raise PresentationError(f"direction {i} is zero", "$.carrier")
            for j in range(i):
                if _parallel(d, carrier.directions[j]):
                    raise PresentationError(
                        f"directions {j} and {i} are parallel", "$.carrier"
                    )
    for i, f in enumerate(space.fn_generators):
        if isinstance(f, Expr) and arity(f) > dim:
            raise PresentationError(
                f"function generator has arity {arity(f)} > carrier dimension {dim}",
                f"$.fn_generators[{i}]",
            )
        if isinstance(f, BranchFunction):
            if not isinstance(carrier, LineArrangement):
                raise PresentationError(
                    "branch functions require a line arrangement carrier",
                    f"$.fn_generators[{i}]",
                )
            if len(f.values) != len(carrier.directions):
                raise PresentationError(
                    "one branch value per line required", f"$.fn_generators[{i}]"
                )
            f.validate(f"$.fn_generators[{i}]")
    for i, p in enumerate(space.plot_generators):
        if isinstance(p, ExprPlot):
            if len(p.components) != dim:
                raise PresentationError(
                    f"plot has {len(p.components)} components, carrier needs {dim}",
                    f"$.plot_generators[{i}]",
                )
            k = p.domain_dim
            for c in p.components:
                if arity(c) > k:
                    raise PresentationError(
                        f"component arity {arity(c)} exceeds domain dimension {k}",
                        f"$.plot_generators[{i}]",
                    )
            _check_image_in_carrier(space, p, f"$.plot_generators[{i}]")
    _check_compatibility(space)


def _parallel(d1, d2) -> bool:
    n = len(d1)
    for i in range(n):
        for j in range(i + 1, n):
            if not (d1[i] * d2[j] - d1[j] * d2[i]).is_zero():
                return False
    return True


def _sample_domain_points(p: ExprPlot, count: int = 100):
    import random

    rng = random.Random(1729)
    k = p.domain_dim
    pts = []
    for _ in range(count):
        coords = []
        for i in range(k):
            lo, hi = -2.0, 2.0
            if p.domain is not None:
                blo, bhi = p.domain.bounds[i]
                if blo is not None:
                    lo = max(lo, blo.to_float() + 1e-9)
                if bhi is not None:
                    hi = min(hi, bhi.to_float() - 1e-9)
            coords.append(
                Scalar.of(Fraction(rng.uniform(lo, hi)).limit_denominator(997))
            )
        pts.append(tuple(coords))
    return pts


def _check_image_in_carrier(space, p: ExprPlot, path: str) -> None:
    from .calculus import EvaluationError, evaluate

    carrier = space.carrier
    if isinstance(carrier, Euclidean) or isinstance(
        carrier, (QuotientByGroup, QuotientByFlow)
    ):
        return
    for pt in _sample_domain_points(p, 100):
        try:
            img = [evaluate(c, pt) for c in p.components]
        except EvaluationError:
            continue
        if isinstance(carrier, SubsetCarrier):
            exact = all(isinstance(v, Scalar) for v in img)
            for e in carrier.equations:
                v = evaluate(e, tuple(img))
                if isinstance(v, Scalar) and exact:
                    if not v.is_zero():
                        raise PresentationError(
                            f"plot leaves the subset at {pt}", path
                        )
                elif abs(float(v)) > 1e-9:
                    raise PresentationError(f"plot leaves the subset at {pt}", path)
            if carrier.point_test == "rationals":
                for v in img:
                    if isinstance(v, Scalar) and not v.is_rational():
                        raise PresentationError(
                            f"plot value {v} is not a rational point", path
                        )
        elif isinstance(carrier, LineArrangement):
            defect = carrier.membership_defect(tuple(img)) if all(
                isinstance(v, Scalar) for v in img
            ) else None
            if defect is not None and not defect.is_zero():
                raise PresentationError(
                    f"plot leaves the line arrangement at {pt}", path
                )


def _check_compatibility(space: SpacePresentation) -> None:
    """Generating functions and plots supplied together must compose to
    certifiably-not-non-smooth maps (the defining compatibility condition)."""
    for i, f in enumerate(space.fn_generators):
        if not isinstance(f, (Expr, BranchFunction)):
            continue
        for j, p in enumerate(space.plot_generators):
            if not isinstance(p, (ExprPlot, SwitchPlot)):
                continue
            comp = compose_function_with_plot(f, p, space.carrier)
            if comp is None:
                continue
            verdict = certify_smooth(comp, probe=False)
            if is_not_ck(verdict):
                raise PresentationError(
                    "incompatible generators: composition "
                    f"of fn_generators[{i}] with plot_generators[{j}] is "
                    f"certified non-smooth at {verdict.point}",
                    "$",
                )
