"""Exact arithmetic in the quadratic field Q(sqrt 2), plus exact linear algebra.

Every scalar in the package is a pair of rationals (a, b) standing for
a + b*sqrt(2).  Equality with zero is decidable (a = b = 0), and so is the
sign, which makes order comparisons and pivot selection exact.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

SQRT2_FLOAT = math.sqrt(2.0)

_RationalLike = "int | Fraction | Scalar"


@dataclass(frozen=True)
class Scalar:
    """An element a + b*sqrt(2) of Q(sqrt 2) with exact Fraction components."""

    a: Fraction
    b: Fraction

    @staticmethod
    def of(x) -> Scalar:
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction)):
            return Scalar(Fraction(x), Fraction(0))
        raise TypeError(f"cannot coerce {x!r} to Scalar")

    @staticmethod
    def rational(p, q=1) -> Scalar:
        return Scalar(Fraction(p, q), Fraction(0))

    @staticmethod
    def sqrt2() -> Scalar:
        return Scalar(Fraction(0), Fraction(1))

    @staticmethod
    def _coerce(other):
        if isinstance(other, Scalar):
            return other
        if isinstance(other, (int, Fraction)):
            return Scalar(Fraction(other), Fraction(0))
        return None

    def __add__(self, other):
        other = Scalar._coerce(other)
        if other is None:
            return NotImplemented
        return Scalar(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        other = Scalar._coerce(other)
        if other is None:
            return NotImplemented
        return Scalar(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        other = Scalar._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __neg__(self) -> Scalar:
        return Scalar(-self.a, -self.b)

    def __mul__(self, other):
        other = Scalar._coerce(other)
        if other is None:
            return NotImplemented
        return Scalar(
            self.a * other.a + 2 * self.b * other.b,
            self.a * other.b + self.b * other.a,
        )

    __rmul__ = __mul__

    def inverse(self) -> Scalar:
        # 1/(a + b*sqrt2) = (a - b*sqrt2) / (a^2 - 2 b^2); the norm is nonzero
        # for nonzero elements because sqrt2 is irrational.
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(sqrt2)")
        n = self.a * self.a - 2 * self.b * self.b
        return Scalar(self.a / n, -self.b / n)

    def __truediv__(self, other):
        other = Scalar._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = Scalar._coerce(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int) -> Scalar:
        if n < 0:
            return self.inverse() ** (-n)
        out = Scalar.of(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def sign(self) -> int:
        """Exact sign of a + b*sqrt(2)."""
        if self.a == 0 and self.b == 0:
            return 0
        if self.a >= 0 and self.b >= 0:
            return 1
        if self.a <= 0 and self.b <= 0:
            return -1
        # Mixed signs: compare a^2 with 2 b^2.
        d = self.a * self.a - 2 * self.b * self.b
        if self.a > 0:  # b < 0
            return 1 if d > 0 else (-1 if d < 0 else 0)
        # a < 0, b > 0
        return -1 if d > 0 else (1 if d < 0 else 0)

    def __abs__(self) -> Scalar:
        return -self if self.sign() < 0 else self

    def __lt__(self, other) -> bool:
        return (self - Scalar.of(other)).sign() < 0

    def __le__(self, other) -> bool:
        return (self - Scalar.of(other)).sign() <= 0

    def __gt__(self, other) -> bool:
        return (self - Scalar.of(other)).sign() > 0

    def __ge__(self, other) -> bool:
        return (self - Scalar.of(other)).sign() >= 0

    def to_float(self) -> float:
        return float(self.a) + float(self.b) * SQRT2_FLOAT

    __float__ = to_float

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        bs = "sqrt2" if self.b == 1 else ("-sqrt2" if self.b == -1 else f"{self.b}*sqrt2")
        if self.a == 0:
            return bs
        sep = "+" if self.b > 0 else ""
        return f"{self.a}{sep}{bs}" if sep else f"{self.a}{bs}"

    def __repr__(self) -> str:
        return f"Scalar({self.a!r}, {self.b!r})"

    @staticmethod
    def parse(text: str) -> Scalar:
        """Parse 'p/q', 'sqrt2', and signed sums/products of those.

        Accepts forms such as '3', '-1/2', 'sqrt2', '-sqrt2', '1/2*sqrt2',
        '1+sqrt2', '1/2-3/4*sqrt2'.  Used for matrix entries and point
        coordinates in JSON documents.
        """
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty scalar literal")
        # Split into signed summands.
        parts = re.findall(r"[+-]?[^+-]+", s)
        total = Scalar.of(0)
        for part in parts:
            sign = 1
            if part.startswith("+"):
                part = part[1:]
            elif part.startswith("-"):
                sign = -1
                part = part[1:]
            if not part:
                raise ValueError(f"malformed scalar literal {text!r}")
            factors = part.split("*")
            value = Scalar.of(sign)
            for f in factors:
                if f == "sqrt2":
                    value = value * Scalar.sqrt2()
                else:
                    value = value * Scalar(Fraction(f), Fraction(0))
            total = total + value
        return total


ZERO = Scalar.of(0)
ONE = Scalar.of(1)
SQRT2 = Scalar.sqrt2()

Matrix = "tuple[tuple[Scalar, ...], ...]"
Vector = "tuple[Scalar, ...]"


def mat(rows) -> tuple:
    return tuple(tuple(Scalar.of(x) if not isinstance(x, Scalar) else x for x in row) for row in rows)


def identity_matrix(n: int) -> tuple:
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def mat_mul(A, B) -> tuple:
    n, k, m = len(A), len(B), len(B[0])
    assert len(A[0]) == k
    return tuple(
        tuple(sum((A[i][s] * B[s][j] for s in range(k)), ZERO) for j in range(m))
        for i in range(n)
    )


def mat_vec(A, v) -> tuple:
    return tuple(sum((A[i][j] * v[j] for j in range(len(v))), ZERO) for i in range(len(A)))


def transpose(A) -> tuple:
    return tuple(tuple(A[i][j] for i in range(len(A))) for j in range(len(A[0])))


def mat_eq(A, B) -> bool:
    return len(A) == len(B) and all(
        len(ra) == len(rb) and all((x - y).is_zero() for x, y in zip(ra, rb))
        for ra, rb in zip(A, B)
    )


def matrix_rank(rows) -> int:
    """Exact rank over Q(sqrt2) by Gaussian elimination with exact pivots."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    nrows, ncols = len(m), len(m[0])
    rank = 0
    row = 0
    for col in range(ncols):
        pivot = None
        for r in range(row, nrows):
            if not m[r][col].is_zero():
                pivot = r
                break
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        inv = m[row][col].inverse()
        m[row] = [x * inv for x in m[row]]
        for r in range(nrows):
            if r != row and not m[r][col].is_zero():
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[row])]
        rank += 1
        row += 1
        if row == nrows:
            break
    return rank


def solve_linear(A, b):
    """Solve A x = b exactly.

    Returns ("unique", x), ("underdetermined", x) with one particular
    solution, or ("inconsistent", None).
    """
    nrows = len(A)
    ncols = len(A[0]) if nrows else 0
    m = [list(A[i]) + [b[i]] for i in range(nrows)]
    pivots = []
    row = 0
    for col in range(ncols):
        pivot = None
        for r in range(row, nrows):
            if not m[r][col].is_zero():
                pivot = r
                break
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        inv = m[row][col].inverse()
        m[row] = [x * inv for x in m[row]]
        for r in range(nrows):
            if r != row and not m[r][col].is_zero():
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[row])]
        pivots.append(col)
        row += 1
        if row == nrows:
            break
    for r in range(row, nrows):
        if not m[r][ncols].is_zero():
            return "inconsistent", None
    x = [ZERO] * ncols
    for r, col in enumerate(pivots):
        x[col] = m[r][ncols]
    kind = "unique" if len(pivots) == ncols else "underdetermined"
    return kind, tuple(x)


def mat_inverse(A):
    """Exact inverse via Gauss-Jordan; returns None for singular matrices."""
    n = len(A)
    m = [list(A[i]) + [ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    row = 0
    for col in range(n):
        pivot = None
        for r in range(row, n):
            if not m[r][col].is_zero():
                pivot = r
                break
        if pivot is None:
            return None
        m[row], m[pivot] = m[pivot], m[row]
        inv = m[row][col].inverse()
        m[row] = [x * inv for x in m[row]]
        for r in range(n):
            if r != row and not m[r][col].is_zero():
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[row])]
        row += 1
    return tuple(tuple(m[i][n:]) for i in range(n))
