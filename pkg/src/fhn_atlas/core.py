"""The three-parameter FitzHugh-Nagumo family and its elementary calculus.

The family is::

    x' = c * (y - (x**3 / 3 - x))
    y' = -(x - a + b * y) / c

with ``c != 0``.  Everything here is a pure function of ``Params`` and a
``State``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .polyfield import PolyField2, exact

__all__ = [
    "Params", "State", "eval_field", "jacobian", "divergence",
    "apply_kappa", "to_polynomial",
]


@dataclass(frozen=True)
class Params:
    """A member ``(a, b, c)`` of the family; ``c = 0`` is rejected."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"parameter {name}={value!r} is not finite")
        if self.c == 0:
            raise DomainError("c must be nonzero: the model divides by c")

    def replace(self, **changes) -> "Params":
        values = {"a": self.a, "b": self.b, "c": self.c}
        values.update(changes)
        return Params(**values)

    def reversed(self) -> "Params":
        """Parameters whose forward flow is the backward flow of ``self``."""
        return Params(self.a, self.b, -self.c)

    def as_tuple(self):
        return (self.a, self.b, self.c)


class State(NamedTuple):
    x: float
    y: float


def eval_field(params: Params, s) -> tuple[float, float]:
    x, y = s
    a, b, c = params.a, params.b, params.c
    return (c * (y - (x**3 / 3.0 - x)), -(x - a + b * y) / c)


def jacobian(params: Params, s) -> np.ndarray:
    x = s[0]
    c, b = params.c, params.b
    return np.array([[c - c * x * x, c], [-1.0 / c, -b / c]])


def divergence(params: Params, s) -> float:
    x = s[0]
    c = params.c
    return c - c * x * x - params.b / c


def apply_kappa(s) -> State:
    """The involution ``(x, y) -> (-x, -y)``; a symmetry of the family when a = 0."""
    return State(-s[0], -s[1])


def to_polynomial(params: Params, exact_coeffs: bool = False) -> PolyField2:
    """Expand the vector field into monomial coefficients.

    With ``exact_coeffs`` the coefficients are :class:`~fractions.Fraction`
    values obtained from the binary floats in ``params`` without rounding.
    """
    if exact_coeffs:
        a, b, c = exact(params.a), exact(params.b), exact(params.c)
        third = Fraction(1, 3)
        inv_c = 1 / c
    else:
        a, b, c = params.a, params.b, params.c
        third = 1.0 / 3.0
        inv_c = 1.0 / c
    p = {(0, 1): c, (1, 0): c, (3, 0): -c * third}
    q = {(0, 0): a * inv_c, (1, 0): -inv_c, (0, 1): -b * inv_c}
    return PolyField2.from_coeffs(p, q)
