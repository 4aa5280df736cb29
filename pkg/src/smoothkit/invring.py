"""Invariant rings of finite exact orthogonal matrix groups.

The Reynolds operator averages a polynomial over the group and projects
onto the invariant subalgebra.  Generators are computed degree by degree:
average every monomial, then discard whatever already lies in the span of
products of lower-degree generators, using exact linear algebra on
coefficient vectors.  Generator order is canonical (graded, then
lexicographic by leading monomial) so downstream expectations are
byte-stable.  A Hilbert map packages a generating set as a polynomial map
R^n -> R^m; by the classical smooth-invariant-theory results the quotient
by the group action embeds through it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import Expr, expr_to_polynomial, normalize, polynomial_to_expr, to_text
from .field import ONE, Scalar, ZERO, matrix_rank
from .polynomial import Polynomial, monomials_of_degree
from .presentation import FiniteMatrixGroup


class InvariantRingError(ValueError):
    pass


def reynolds(e: Expr, group: FiniteMatrixGroup) -> Expr:
    """Group average (1/|G|) sum_g e(g x), in expanded normal form."""
    n = group.dim
    p = expr_to_polynomial(normalize(e), n)
    if p is None:
        raise InvariantRingError(f"reynolds needs a polynomial, got {to_text(e)}")
    total = Polynomial(n, ())
    for g in group.elements:
        total = total + p.compose_linear(g)
    avg = total * Scalar.rational(1, group.order)
    return polynomial_to_expr(avg)


def is_invariant(p: Polynomial, group: FiniteMatrixGroup) -> bool:
    return all((p.compose_linear(g) - p).is_zero() for g in group.elements)


def _row_reduce_step(rows, vec):
    """Append vec to an exact row-echelon basis; True if it was independent."""
    v = list(vec)
    for pivot_col, row in rows:
        if not v[pivot_col].is_zero():
            factor = v[pivot_col]
            v = [x - factor * y for x, y in zip(v, row)]
    for col, x in enumerate(v):
        if not x.is_zero():
            inv = x.inverse()
            rows.append((col, [y * inv for y in v]))
            return True
    return False


def invariant_generators(group: FiniteMatrixGroup, degree_bound: int) -> list:
    """Minimal generating set of the invariant ring up to the degree bound,
    in canonical (graded, then lexicographic) order."""
    if degree_bound < 1:
        raise InvariantRingError("degree bound must be >= 1")
    n = group.dim
    generators: list = []  # list of Polynomial
    for degree in range(1, degree_bound + 1):
        basis = monomials_of_degree(n, degree)
        index = {e: i for i, e in enumerate(basis)}
        echelon: list = []
        # Span of products of lower-degree generators, in this degree.
        for prod in _generator_products(generators, degree):
            _row_reduce_step(echelon, prod.coefficient_vector(basis))
        # New invariants: Reynolds averages of the degree-d monomials.
        for mono in basis:
            cand_p = Polynomial.monomial(n, mono)
            avg = Polynomial(n, ())
            for g in group.elements:
                avg = avg + cand_p.compose_linear(g)
            avg = avg * Scalar.rational(1, group.order)
            if avg.is_zero():
                continue
            if _row_reduce_step(echelon, avg.coefficient_vector(basis)):
                generators.append(avg)
        del index
    generators.sort(key=lambda p: (p.degree(), tuple(-k for k in p.leading_monomial())))
    return [polynomial_to_expr(p) for p in generators]


def _generator_products(generators, degree: int):
    """All products of previously found generators with total degree equal
    to `degree` (each generator may repeat)."""
    out = []

    def rec(start: int, remaining: int, acc: Polynomial | None):
        for i in range(start, len(generators)):
            d = generators[i].degree()
            if d > remaining:
                continue
            prod = generators[i] if acc is None else acc * generators[i]
            if d == remaining:
                out.append(prod)
            else:
                rec(i, remaining - d, prod)

    rec(0, degree, None)
    return out


@dataclass(frozen=True)
class HilbertMap:
    """A generating set of the invariant ring packaged as a map R^n -> R^m.

    The report cites the classical result that every invariant smooth
    function factors smoothly through this map, which is why the quotient
    differential structure can be read as the subset structure on the image.
    """

    group: FiniteMatrixGroup
    generators: tuple
    degree_bound: int

    @property
    def target_dim(self) -> int:
        return len(self.generators)

    def validate(self) -> None:
        n = self.group.dim
        for g in self.generators:
            p = expr_to_polynomial(g, n)
            if p is None or not is_invariant(p, self.group):
                raise InvariantRingError(f"generator {to_text(g)} is not invariant")
        # Linear independence as polynomials.
        degs = sorted({expr_to_polynomial(g, n).degree() for g in self.generators})
        basis = []
        for d in degs:
            basis.extend(monomials_of_degree(n, d))
        rows = [
            expr_to_polynomial(g, n).coefficient_vector(tuple(basis))
            for g in self.generators
        ]
        if matrix_rank(rows) != len(self.generators):
            raise InvariantRingError("generators are linearly dependent")

    def to_json(self):
        return {
            "group": self.group.label,
            "generators": [to_text(g) for g in self.generators],
            "target_dim": self.target_dim,
            "complete_up_to_degree": self.degree_bound,
            "basis": "every invariant smooth function factors smoothly "
            "through this map (classical smooth invariant theory)",
        }


def hilbert_map(group: FiniteMatrixGroup, degree_bound: int) -> HilbertMap:
    gens = invariant_generators(group, degree_bound)
    h = HilbertMap(group, tuple(gens), degree_bound)
    h.validate()
    return h


def norm_square_map(n: int) -> Expr:
    """The catalogued full-orthogonal-group model x -> |x|^2 (not computed:
    the group is infinite; the generator is classical)."""
    from .expr import add, ipow, var

    return add(*[ipow(var(i), 2) for i in range(n)])


def cone_image_check(h: HilbertMap, change, samples: int = 1000) -> dict:
    """For the sign quotient of the plane: after the given linear change of
    coordinates on the target, the image of the Hilbert map satisfies
    z^2 = x^2 + y^2 with z >= 0.  The identity is checked symbolically and
    the sign at exact sample points.

    `change` is an exact invertible 3x3 matrix applied to (u, v, w) =
    (x^2, xy, y^2); rows give the new coordinates (x, y, z).
    """
    from .field import mat_inverse

    if len(change) != 3 or any(len(r) != 3 for r in change):
        raise InvariantRingError("change of coordinates must be 3x3")
    if mat_inverse(change) is None:
        raise InvariantRingError("change of coordinates must be invertible")
    if h.target_dim != 3:
        raise InvariantRingError("expected the 3-generator Hilbert map")
    n = h.group.dim
    gen_polys = [expr_to_polynomial(g, n) for g in h.generators]
    new_coords = []
    for i in range(3):
        acc = Polynomial(n, ())
        for j in range(3):
            acc = acc + gen_polys[j] * change[i][j]
        new_coords.append(acc)
    x, y, z = new_coords
    residual = z * z - x * x - y * y
    if not residual.is_zero():
        raise InvariantRingError(
            "cone identity fails symbolically: z^2 - x^2 - y^2 = "
            + to_text(polynomial_to_expr(residual))
        )
    # Sign check of z on exact sample points.
    import random

    rng = random.Random(271828)
    from fractions import Fraction

    bad = []
    for _ in range(samples):
        pt = tuple(
            Scalar.of(Fraction(rng.randint(-400, 400), rng.randint(1, 40)))
            for _ in range(n)
        )
        zv = z.eval_scalar(pt)
        if zv.sign() < 0:
            bad.append(pt)
    if bad:
        raise InvariantRingError(f"z-coordinate negative at {bad[0]}")
    return {
        "identity": "z^2 - x^2 - y^2 = 0 holds as an exact polynomial identity",
        "change": [[str(x_) for x_ in row] for row in change],
        "nonnegativity_samples": samples,
        "status": "certified",
    }


DEFAULT_CONE_CHANGE = (
    (ONE, ZERO, -ONE),  # x = u - w
    (ZERO, Scalar.of(2), ZERO),  # y = 2v
    (ONE, ZERO, ONE),  # z = u + w
)
