"""Computable invariants and refutation obstructions.

Zariski tangent dimension is defined operationally as the ambient dimension
minus the exact rank of the Jacobian of the supplied ideal generators; it
matches the intrinsic cotangent construction exactly when the supplied
generators generate the ideal of germs, which is the caller's
responsibility and is stamped on every report.

Rank obstructions refute membership in curve-generated plot families: a
plot that locally factors through curves has differential rank at most one
everywhere, so a single sampled point of rank two is a certified witness.

Line arrangements through the origin are compared by exact projective
equivalence of their slope sets; a certificate is an invertible matrix plus
a permutation, verified exactly.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .calculus import EvaluationError, differentiate, evaluate
from .expr import Expr, arity, normalize, to_text
from .field import Scalar, mat_inverse, mat_vec, matrix_rank
from .presentation import ExprPlot, SubsetCarrier, SpacePresentation
from .verdicts import (
    CertifiedNo,
    CertifiedYes,
    NotLocallyConstant,
    RankObstruction,
    Unknown,
)


class InvariantError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Zariski tangent dimension


@dataclass(frozen=True)
class TangentReport:
    point: tuple
    ambient_dim: int
    jacobian_rank: int
    tangent_dim: int
    assumption_note: str = (
        "ideal generators are trusted to generate the ideal of germs at the point"
    )

    def to_json(self):
        return {
            "point": [str(x) for x in self.point],
            "ambient_dim": self.ambient_dim,
            "jacobian_rank": self.jacobian_rank,
            "tangent_dim": self.tangent_dim,
            "assumption_note": self.assumption_note,
        }


def zariski_tangent_dim(space: SpacePresentation, point) -> TangentReport:
    """Tangent dimension at a point of a subset presentation, computed as
    ambient dimension minus the exact Jacobian rank of the ideal generators."""
    carrier = space.carrier
    pt = tuple(Scalar.of(x) if not isinstance(x, Scalar) else x for x in point)
    if isinstance(carrier, SubsetCarrier):
        gens = carrier.ideal_generators
        equations = carrier.equations
    elif hasattr(carrier, "default_ideal_generators"):
        gens = carrier.default_ideal_generators()
        equations = gens
    else:
        gens = None
        equations = ()
    n = carrier.ambient_dim
    if hasattr(carrier, "membership_defect"):
        if not carrier.membership_defect(pt).is_zero():
            raise InvariantError(f"point {point} is off the subset")
    else:
        for e in equations:
            v = evaluate(e, pt)
            if isinstance(v, Scalar):
                if not v.is_zero():
                    raise InvariantError(f"point {point} is off the subset")
            elif abs(float(v)) > 1e-9:
                raise InvariantError(f"point {point} is off the subset")
    if gens is None:
        if isinstance(carrier, SubsetCarrier) and not carrier.equations:
            # No equations: the full ambient space.
            return TangentReport(pt, n, 0, n, "no equations: full ambient tangent")
        raise InvariantError("ideal generators are required")
    rows = []
    for g in gens:
        row = []
        for j in range(n):
            v = evaluate(differentiate(g, j), pt)
            if not isinstance(v, Scalar):
                raise InvariantError("ideal generators must be exactly evaluable")
            row.append(v)
        rows.append(tuple(row))
    r = matrix_rank(rows)
    return TangentReport(pt, n, r, n - r)


# ---------------------------------------------------------------------------
# Rank obstruction


_COARSE_GRID = (
    (1, 0),
    (0, 1),
    (1, 1),
    (Fraction(1, 2), Fraction(1, 2)),
    (1, Fraction(-1, 2)),
    (Fraction(-1, 3), 1),
)


def rank_obstruction(plot, samples: int = 20, seed: int = 0):
    """First sampled point where the Jacobian of the plot has rank >= 2.

    Exact rank when the entries evaluate exactly; numeric rank at tolerance
    1e-8 otherwise.  Returns a RankObstruction witness or Unknown.
    """
    if not isinstance(plot, ExprPlot):
        return Unknown("rank analysis needs explicit components")
    comps = plot.components
    k = plot.domain_dim
    if k < 2 or len(comps) < 2:
        return Unknown("domain or target has dimension < 2: no rank-2 point exists")
    rng = random.Random(seed)
    points = [tuple(Scalar.of(Fraction(c)) for c in (pt + (0,) * k)[:k]) for pt in _COARSE_GRID]
    for _ in range(samples):
        points.append(
            tuple(
                Scalar.of(Fraction(rng.uniform(-2, 2)).limit_denominator(499))
                for _ in range(k)
            )
        )
    jac_exprs = [[differentiate(c, j) for j in range(k)] for c in comps]
    for pt in points:
        exact_rows = []
        float_rows = []
        exact = True
        try:
            for row in jac_exprs:
                vals = [evaluate(d, pt) for d in row]
                if not all(isinstance(v, Scalar) for v in vals):
                    exact = False
                float_rows.append([float(v) for v in vals])
                exact_rows.append(vals)
        except EvaluationError:
            continue
        if exact:
            r = matrix_rank([tuple(v) for v in exact_rows])
        else:
            sv = np.linalg.svd(np.array(float_rows, dtype=float), compute_uv=False)
            r = int(np.sum(sv > 1e-8))
        if r >= 2:
            return CertifiedNo(
                RankObstruction(
                    plot.label,
                    pt,
                    r,
                    tuple(tuple(row) for row in exact_rows),
                    exact,
                )
            )
    return Unknown("no sampled point of rank >= 2")


# ---------------------------------------------------------------------------
# Locally constant detection


def locally_constant_check(plot, target) -> object:
    """For curves into a totally disconnected carrier: a certified continuous
    nonconstant candidate violates the intermediate value theorem.

    Returns CertifiedNo(NotLocallyConstant), CertifiedYes (confirmed locally
    constant), or Unknown.
    """
    if not (isinstance(target, SubsetCarrier) and target.point_test == "rationals"):
        return Unknown("target is not marked totally disconnected")
    if not isinstance(plot, ExprPlot) or len(plot.components) != 1:
        return Unknown("locally-constant check needs a one-component curve")
    comp = normalize(plot.components[0])
    if arity(comp) == 0:
        return CertifiedYes(("syntactically constant",))
    from .certify import certify_smooth, is_smooth

    smooth = certify_smooth(comp, probe=False)
    if not is_smooth(smooth):
        return Unknown("candidate is not certified continuous; handled elsewhere")
    values = []
    params = []
    rng = random.Random(97)
    for _ in range(64):
        t = Scalar.of(Fraction(rng.uniform(-2, 2)).limit_denominator(499))
        try:
            v = evaluate(comp, (t,))
        except EvaluationError:
            continue
        for u, w in zip(params, values):
            same = (
                (v - w).is_zero()
                if isinstance(v, Scalar) and isinstance(w, Scalar)
                else abs(float(v) - float(w)) <= 1e-12
            )
            if not same:
                interval = (min(u, t, key=lambda s: s.to_float()), max(u, t, key=lambda s: s.to_float()))
                return CertifiedNo(
                    NotLocallyConstant(
                        plot.label,
                        (str(interval[0]), str(interval[1])),
                        (str(w), str(v)),
                    )
                )
        params.append(t)
        values.append(v)
    return Unknown("no distinct values found; constancy not syntactically evident")


# ---------------------------------------------------------------------------
# Linear equivalence of central line arrangements


INF = "inf"


@dataclass(frozen=True)
class EquivalenceCertificate:
    matrix: tuple
    permutation: tuple

    def to_json(self):
        return {
            "matrix": [[str(x) for x in row] for row in self.matrix],
            "permutation": list(self.permutation),
        }


@dataclass(frozen=True)
class CertifiedInequivalent:
    checked_permutations: int

    def to_json(self):
        return {
            "status": "certified_inequivalent",
            "checked_permutations": self.checked_permutations,
        }


def _direction(slope):
    """Homogeneous direction [a : b] of the line b x = a y ... i.e. the
    line of slope s has direction (1, s); the vertical line has (0, 1)."""
    if slope == INF:
        return (Scalar.of(0), Scalar.of(1))
    s = slope if isinstance(slope, Scalar) else Scalar.parse(str(slope))
    return (Scalar.of(1), s)


def _parallel_dirs(d1, d2) -> bool:
    return (d1[0] * d2[1] - d1[1] * d2[0]).is_zero()


def _map_three(src, dst):
    """The projective transformation of the line at infinity sending three
    distinct source directions to three distinct target directions, as an
    exact 2x2 matrix (unique up to scale), or None."""

    def frame(d1, d2, d3):
        # Solve u d1 + v d2 = d3; matrix [u d1 | v d2] sends the standard
        # frame e1, e2, e1 + e2 to d1, d2, d3 projectively.
        det = d1[0] * d2[1] - d1[1] * d2[0]
        if det.is_zero():
            return None
        u = (d3[0] * d2[1] - d3[1] * d2[0]) / det
        v = (d1[0] * d3[1] - d1[1] * d3[0]) / det
        if u.is_zero() or v.is_zero():
            return None
        return ((u * d1[0], v * d2[0]), (u * d1[1], v * d2[1]))

    A = frame(*src)
    B = frame(*dst)
    if A is None or B is None:
        return None
    A_inv = mat_inverse(A)
    if A_inv is None:
        return None
    from .field import mat_mul

    return mat_mul(B, A_inv)


def lines_equivalence(slopes_a, slopes_b):
    """Search all correspondences for an exact linear map of the plane
    carrying the first arrangement onto the second.

    Slopes are exact field elements or "inf".  For k >= 3 each permutation
    determines the matrix from the first three lines (up to scale) and the
    rest are checked exactly; the search is exhaustive, so failure of every
    permutation is a certificate of inequivalence.
    """
    a = [_direction(s) for s in slopes_a]
    b = [_direction(s) for s in slopes_b]
    for name, dirs in (("first", a), ("second", b)):
        for i in range(len(dirs)):
            for j in range(i + 1, len(dirs)):
                if _parallel_dirs(dirs[i], dirs[j]):
                    raise InvariantError(f"repeated slopes in the {name} arrangement")
    if len(a) != len(b) or not a:
        raise InvariantError("arrangements must have the same positive size")
    k = len(a)
    if k == 1:
        M = _map_three(
            (a[0], _perp(a[0]), _sum(a[0], _perp(a[0]))),
            (b[0], _perp(b[0]), _sum(b[0], _perp(b[0]))),
        )
        return EquivalenceCertificate(M, (0,))
    if k == 2:
        M = _map_three((a[0], a[1], _sum(a[0], a[1])), (b[0], b[1], _sum(b[0], b[1])))
        return EquivalenceCertificate(M, (0, 1))
    checked = 0
    for perm in itertools.permutations(range(k)):
        checked += 1
        M = _map_three((a[0], a[1], a[2]), (b[perm[0]], b[perm[1]], b[perm[2]]))
        if M is None:
            continue
        ok = True
        for i in range(k):
            img = mat_vec(M, a[i])
            if not _parallel_dirs(img, b[perm[i]]):
                ok = False
                break
        if ok:
            return EquivalenceCertificate(M, perm)
    return CertifiedInequivalent(checked)


def _perp(d):
    return (-d[1], d[0])


def _sum(d1, d2):
    return (d1[0] + d2[0], d1[1] + d2[1])


def cross_ratio(s1, s2, s3, s4) -> Scalar:
    """Exact cross ratio of four distinct slopes (projective invariant)."""
    d = [_direction(s) for s in (s1, s2, s3, s4)]

    def det(u, v):
        return u[0] * v[1] - u[1] * v[0]

    num = det(d[0], d[2]) * det(d[1], d[3])
    den = det(d[0], d[3]) * det(d[1], d[2])
    return num / den
