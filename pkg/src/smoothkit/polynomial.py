"""Exact multivariate polynomials over Q(sqrt2).

Internal normal form for the polynomial fragment of the expression class:
a mapping from exponent tuples to nonzero Scalar coefficients.  Monomial
order is graded lexicographic, which fixes a canonical printing order and a
canonical generator order for invariant rings.
"""

from __future__ import annotations

from dataclasses import dataclass

from .field import ONE, ZERO, Scalar


def _grlex_key(expo: tuple) -> tuple:
    return (sum(expo), expo)


@dataclass(frozen=True)
class Polynomial:
    nvars: int
    coeffs: tuple  # tuple of (exponent tuple, Scalar), grlex-descending

    @staticmethod
    def from_dict(nvars: int, d: dict) -> Polynomial:
        items = [(e, c) for e, c in d.items() if not c.is_zero()]
        items.sort(key=lambda t: _grlex_key(t[0]), reverse=True)
        return Polynomial(nvars, tuple(items))

    @staticmethod
    def constant(nvars: int, c: Scalar) -> Polynomial:
        return Polynomial.from_dict(nvars, {(0,) * nvars: c})

    @staticmethod
    def variable(nvars: int, i: int) -> Polynomial:
        e = tuple(1 if j == i else 0 for j in range(nvars))
        return Polynomial.from_dict(nvars, {e: ONE})

    @staticmethod
    def monomial(nvars: int, expo: tuple, c: Scalar = ONE) -> Polynomial:
        return Polynomial.from_dict(nvars, {tuple(expo): c})

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        return max((sum(e) for e, _ in self.coeffs), default=0)

    def __add__(self, other: Polynomial) -> Polynomial:
        d = self.as_dict()
        for e, c in other.coeffs:
            d[e] = d.get(e, ZERO) + c
        return Polynomial.from_dict(self.nvars, d)

    def __neg__(self) -> Polynomial:
        return Polynomial(self.nvars, tuple((e, -c) for e, c in self.coeffs))

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other) -> Polynomial:
        if isinstance(other, Scalar):
            if other.is_zero():
                return Polynomial(self.nvars, ())
            return Polynomial.from_dict(
                self.nvars, {e: c * other for e, c in self.coeffs}
            )
        d: dict = {}
        for e1, c1 in self.coeffs:
            for e2, c2 in other.coeffs:
                e = tuple(a + b for a, b in zip(e1, e2))
                d[e] = d.get(e, ZERO) + c1 * c2
        return Polynomial.from_dict(self.nvars, d)

    def __pow__(self, n: int) -> Polynomial:
        out = Polynomial.constant(self.nvars, ONE)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def eval_scalar(self, point) -> Scalar:
        total = ZERO
        for e, c in self.coeffs:
            term = c
            for x, k in zip(point, e):
                term = term * (Scalar.of(x) ** k)
            total = total + term
        return total

    def derivative(self, var: int) -> Polynomial:
        d: dict = {}
        for e, c in self.coeffs:
            if e[var] == 0:
                continue
            e2 = tuple(k - 1 if j == var else k for j, k in enumerate(e))
            d[e2] = d.get(e2, ZERO) + c * Scalar.of(e[var])
        return Polynomial.from_dict(self.nvars, d)

    def compose(self, args) -> Polynomial:
        """Substitute args[i] (a Polynomial) for variable i."""
        assert len(args) == self.nvars
        nv = args[0].nvars if args else self.nvars
        out = Polynomial(nv, ())
        for e, c in self.coeffs:
            term = Polynomial.constant(nv, c)
            for i, k in enumerate(e):
                if k:
                    term = term * (args[i] ** k)
            out = out + term
        return out

    def compose_linear(self, M) -> Polynomial:
        """Substitute x_i -> (M x)_i, i.e. evaluate the polynomial at M x."""
        n = self.nvars
        args = []
        for i in range(n):
            d = {}
            for j in range(n):
                if not M[i][j].is_zero():
                    e = tuple(1 if t == j else 0 for t in range(n))
                    d[e] = M[i][j]
            args.append(Polynomial.from_dict(n, d))
        return self.compose(args)

    def coefficient_vector(self, basis) -> tuple:
        d = self.as_dict()
        return tuple(d.get(e, ZERO) for e in basis)

    def leading_monomial(self):
        return self.coeffs[0][0] if self.coeffs else None


def monomials_of_degree(nvars: int, degree: int) -> list:
    """All exponent tuples of total degree `degree`, grlex order (lex desc)."""
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for k in range(remaining, -1, -1):
            rec(prefix + (k,), remaining - k, slots - 1)

    if nvars == 0:
        return [()] if degree == 0 else []
    rec((), degree, nvars)
    return out


def monomials_up_to_degree(nvars: int, degree: int) -> list:
    out = []
    for d in range(degree + 1):
        out.extend(monomials_of_degree(nvars, d))
    return out
