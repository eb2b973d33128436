"""Sparse bivariate polynomials and planar polynomial vector fields.

Coefficients are stored in dictionaries keyed by exponent pairs ``(i, j)``
standing for the monomial ``x**i * y**j``.  Any numeric type that supports
``+ - *`` works as a coefficient; the compactification code relies on
:class:`fractions.Fraction` to keep blow-up chains exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Tuple

Exponent = Tuple[int, int]

__all__ = ["Poly", "PolyField2", "exact"]


def exact(value) -> Fraction:
    """Convert a float/int/Fraction to an exact :class:`Fraction`."""
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


def _clean(terms: Mapping[Exponent, object]) -> Dict[Exponent, object]:
    return {k: v for k, v in terms.items() if v != 0}


class Poly:
    """Immutable sparse polynomial in two variables."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Exponent, object] | None = None):
        self.terms: Dict[Exponent, object] = _clean(dict(terms or {}))

    # construction helpers
    @classmethod
    def const(cls, value) -> "Poly":
        return cls({(0, 0): value})

    @classmethod
    def var(cls, index: int) -> "Poly":
        return cls({(1, 0): 1} if index == 0 else {(0, 1): 1})

    @classmethod
    def affine(cls, cx, cy, c0=0) -> "Poly":
        return cls({(1, 0): cx, (0, 1): cy, (0, 0): c0})

    # arithmetic
    def __add__(self, other):
        other = other if isinstance(other, Poly) else Poly.const(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Poly) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly({k: v * other for k, v in self.terms.items()})
        out: Dict[Exponent, object] = {}
        for (i1, j1), v1 in self.terms.items():
            for (i2, j2), v2 in other.terms.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + v1 * v2
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"Poly({dict(sorted(self.terms.items()))})"

    # queries
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=0)

    @property
    def low_degree(self) -> int:
        """Smallest total degree carried by a nonzero term."""
        return min((i + j for i, j in self.terms), default=0)

    def homogeneous(self, k: int) -> "Poly":
        return Poly({e: v for e, v in self.terms.items() if sum(e) == k})

    def coeff(self, i: int, j: int):
        return self.terms.get((i, j), 0)

    def __call__(self, x, y):
        total = 0
        for (i, j), v in self.terms.items():
            total += v * x**i * y**j
        return total

    def map_coeffs(self, fn) -> "Poly":
        return Poly({k: fn(v) for k, v in self.terms.items()})

    def diff(self, var: int) -> "Poly":
        out = {}
        for (i, j), v in self.terms.items():
            if var == 0 and i:
                out[(i - 1, j)] = v * i
            elif var == 1 and j:
                out[(i, j - 1)] = v * j
        return Poly(out)

    def compose(self, px: "Poly", py: "Poly") -> "Poly":
        """Substitute ``x -> px`` and ``y -> py``."""
        xs, ys = _powers(px, max((i for i, _ in self.terms), default=0)), \
            _powers(py, max((j for _, j in self.terms), default=0))
        out = Poly()
        for (i, j), v in self.terms.items():
            out = out + xs[i] * ys[j] * v
        return out

    def common_monomial(self) -> Exponent:
        """Largest monomial ``x**i y**j`` dividing every term."""
        if not self.terms:
            return (0, 0)
        return (min(i for i, _ in self.terms), min(j for _, j in self.terms))

    def divide_monomial(self, i: int, j: int) -> "Poly":
        out = {}
        for (p, q), v in self.terms.items():
            if p < i or q < j:
                raise ValueError(f"x^{i} y^{j} does not divide term x^{p} y^{q}")
            out[(p - i, q - j)] = v
        return Poly(out)

    def shift_monomial(self, i: int, j: int) -> "Poly":
        return Poly({(p + i, q + j): v for (p, q), v in self.terms.items()})

    def univariate(self, var: int, at) -> Dict[int, object]:
        """Coefficients in ``var`` after fixing the other variable to ``at``."""
        out: Dict[int, object] = {}
        for (i, j), v in self.terms.items():
            k, other = (i, j) if var == 0 else (j, i)
            out[k] = out.get(k, 0) + v * at**other
        return {k: v for k, v in out.items() if v != 0}


def _powers(p: Poly, n: int):
    out = [Poly.const(1)]
    for _ in range(n):
        out.append(out[-1] * p)
    return out


@dataclass(frozen=True)
class PolyField2:
    """Planar polynomial vector field ``(P, Q)``.

    ``degree`` is derived from the coefficients; ``chart`` optionally tags the
    field with the Poincare chart it is expressed in.
    """

    P: Poly
    Q: Poly
    chart: str | None = field(default=None, compare=False)

    @classmethod
    def from_coeffs(cls, p: Mapping[Exponent, object],
                    q: Mapping[Exponent, object], chart=None) -> "PolyField2":
        return cls(Poly(p), Poly(q), chart)

    @property
    def degree(self) -> int:
        return max(self.P.degree, self.Q.degree)

    @property
    def low_degree(self) -> int:
        """Order ``m`` of the lowest nonvanishing homogeneous part."""
        parts = [p.low_degree for p in (self.P, self.Q) if not p.is_zero()]
        return min(parts, default=0)

    def is_zero(self) -> bool:
        return self.P.is_zero() and self.Q.is_zero()

    def __call__(self, x, y):
        return self.P(x, y), self.Q(x, y)

    def scale(self, factor) -> "PolyField2":
        return PolyField2(self.P * factor, self.Q * factor, self.chart)

    def jacobian(self, x, y):
        return ((self.P.diff(0)(x, y), self.P.diff(1)(x, y)),
                (self.Q.diff(0)(x, y), self.Q.diff(1)(x, y)))

    def as_float(self) -> "PolyField2":
        return PolyField2(self.P.map_coeffs(float), self.Q.map_coeffs(float),
                          self.chart)

    def max_abs_coeff(self) -> float:
        vals = [abs(v) for v in list(self.P.terms.values())
                + list(self.Q.terms.values())]
        return float(max(vals, default=0))

