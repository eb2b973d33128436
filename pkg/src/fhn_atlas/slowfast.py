"""Slow-fast form of the family for large |c|, folds and canard asymptotics.

With ``eps = 1/c**2`` and slow time ``tau = t/c`` the system reads::

    eps * x' = f(x, y) = y - (x**3/3 - x)
          y' = g(x, y) = -(x - a + b*y)

The critical manifold is the cubic ``f = 0``.  Its stability along the fast
direction is decided by the sign of ``df/dx = 1 - x**2`` only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .core import Params, State
from .errors import DomainError, StiffnessBudgetExceeded

__all__ = [
    "SlowFastForm", "to_slow_fast", "CriticalPoint", "critical_point",
    "FoldPointRec", "fold_analysis", "LFunctions", "CanardData",
    "canard_coefficients", "CASE_A_INPUTS", "CASE_B_INPUTS", "canard_curve",
    "hopf_canard_separation", "CanardVerification", "verify_canard",
]

FOLD_TOL = 1e-12


@dataclass(frozen=True)
class SlowFastForm:
    epsilon: float
    params: Params

    def f(self, x: float, y: float) -> float:
        return y - (x**3 / 3.0 - x)

    def g(self, x: float, y: float) -> float:
        p = self.params
        return -(x - p.a + p.b * y)

    def slow_time_field(self, s):
        """Right-hand side in slow time: ``(f/eps, g)``."""
        x, y = s
        return (self.f(x, y) / self.epsilon, self.g(x, y))


def to_slow_fast(params: Params) -> SlowFastForm:
    return SlowFastForm(1.0 / params.c**2, params)


@dataclass(frozen=True)
class CriticalPoint:
    x: float
    y: float
    branch: str  # "L", "M", "R" or "fold"
    fast_stability: str  # "attracting", "repelling" or "degenerate"


def critical_point(x: float) -> CriticalPoint:
    y = x**3 / 3.0 - x
    slope = 1.0 - x * x  # df/dx on the critical manifold
    if slope == 0:
        return CriticalPoint(x, y, "fold", "degenerate")
    branch = "M" if abs(x) < 1 else ("R" if x > 1 else "L")
    return CriticalPoint(x, y, branch, "repelling" if slope > 0 else "attracting")


@dataclass(frozen=True)
class FoldPointRec:
    location: State
    is_regular_fold: bool
    is_singular_fold: bool
    is_regular_singular: bool
    g_value: float
    parameter: str


def fold_analysis(params: Params, parameter: Optional[str] = None) -> List[FoldPointRec]:
    """Classify the two folds ``(-1, 2/3)`` and ``(1, -2/3)``.

    ``parameter`` names the unfolding parameter used in the regularity
    condition ``dg/dparameter != 0``; it defaults to ``b`` for a = 0 and to
    ``a`` otherwise.
    """
    if parameter is None:
        parameter = "b" if params.a == 0 else "a"
    sf = to_slow_fast(params)
    out = []
    for x in (-1.0, 1.0):
        y = x**3 / 3.0 - x
        # fold conditions: f = 0, df/dx = 1 - x^2 = 0, d2f/dx2 = -2x != 0, df/dy = 1
        is_fold = abs(sf.f(x, y)) < FOLD_TOL and (1 - x * x) == 0 and -2 * x != 0
        g = sf.g(x, y)
        singular = is_fold and abs(g) < FOLD_TOL
        dg_dx = -1.0
        dg_dpar = {"a": 1.0, "b": -y, "c": 0.0}[parameter]
        out.append(FoldPointRec(State(x, y), is_fold and not singular, singular,
                                singular and dg_dx != 0 and dg_dpar != 0, g,
                                parameter))
    return out


@dataclass(frozen=True)
class LFunctions:
    """Values at the origin of the normal-form factors and their x-derivatives."""

    l1: Fraction
    l2: Fraction
    l3: Fraction
    l4: Fraction
    l5: Fraction
    l6: Fraction
    dl1: Fraction = Fraction(0)
    dl2: Fraction = Fraction(0)
    dl3: Fraction = Fraction(0)
    dl4: Fraction = Fraction(0)
    dl5: Fraction = Fraction(0)
    dl6: Fraction = Fraction(0)


# a = 0 near b = 3/2, in coordinates centred at the right fold
CASE_A_INPUTS = LFunctions(l1=Fraction(-1), l2=Fraction(-1), l3=Fraction(0),
                           l4=Fraction(1), l5=Fraction(1), l6=Fraction(-3, 2),
                           dl2=Fraction(-1, 3))
# b = 0, with l2 = 1 + x/3
CASE_B_INPUTS = LFunctions(l1=Fraction(-1), l2=Fraction(1), l3=Fraction(0),
                           l4=Fraction(1), l5=Fraction(1), l6=Fraction(0),
                           dl2=Fraction(1, 3))


@dataclass(frozen=True)
class CanardData:
    inputs: LFunctions
    A: Fraction
    B: Fraction
    lambda_c: Fraction  # coefficient of eps in the canard parameter
    lambda_H: Fraction  # coefficient of eps in the Hopf parameter


def canard_coefficients(l: LFunctions) -> CanardData:
    """Exact A and B from the normal-form factors."""
    q = {k: Fraction(v) for k, v in vars(l).items()}
    A = (-q["dl1"] + 3 * q["dl2"] - 2 * q["dl4"] + 2 * q["l6"]) / 8
    B = (q["dl3"] + q["l6"]) / 2
    return CanardData(l, A, B, -(B + A), -B)


_CASES = {"A": (Fraction(3, 2), CASE_A_INPUTS), "B": (Fraction(0), CASE_B_INPUTS)}


def canard_curve(case: str, eps: float) -> float:
    """Leading-order canard parameter: ``b_c`` for case A, ``a_c`` for case B."""
    if case not in _CASES:
        raise DomainError(f"unknown case {case!r}")
    if not 0 < eps <= 0.25:
        raise DomainError("eps must lie in (0, 0.25]")
    base, inputs = _CASES[case]
    return float(base) + float(canard_coefficients(inputs).lambda_c) * eps


def hopf_parameter(case: str, eps: float) -> float:
    base, inputs = _CASES[case]
    return float(base) + float(canard_coefficients(inputs).lambda_H) * eps


def hopf_canard_separation(eps: float) -> float:
    """``b_c - b_H`` to leading order for case A."""
    if not 0 <= eps <= 0.25:
        raise DomainError("eps must lie in [0, 0.25]")
    data = canard_coefficients(CASE_A_INPUTS)
    return float(data.lambda_c - data.lambda_H) * eps


@dataclass(frozen=True)
class CanardVerification:
    tracked_slow_time: float
    max_distance: float
    params: Params


def verify_canard(case: str, eps: float, param: float, c_sign: int = 1,
                  start_x: float = 1.5, horizon: float = 3.0,
                  sample_dt: float = 1e-4, rtol: float = 1e-11,
                  atol: float = 1e-12) -> CanardVerification:
    """Time an orbit spends next to the repelling middle branch.

    The full system is integrated in slow time with an implicit Radau
    scheme from the attracting branch point above ``x = start_x``.  An
    instant counts as tracking when ``|x| < 1 - sqrt(eps)`` (outside the
    fold neighbourhoods, where ``1 - x**2 > 0``) and the vertical distance to
    the critical manifold is below ``5 eps``.  The longest such interval is
    reported together with the largest distance inside it.
    """
    if case not in _CASES:
        raise DomainError(f"unknown case {case!r}")
    if c_sign != 1:
        raise DomainError("only c > 0 is supported")
    if not 0 < eps <= 0.05:
        raise StiffnessBudgetExceeded("eps above 0.05 is outside the stiff budget")
    c = 1.0 / math.sqrt(eps)
    params = Params(0.0, param, c) if case == "A" else Params(param, 0.0, c)
    sf = to_slow_fast(params)

    def rhs(t, s):
        return sf.slow_time_field(s)

    def jac(t, s):
        x = s[0]
        return np.array([[(1 - x * x) / eps, 1 / eps], [-1.0, -params.b]])

    y0 = start_x**3 / 3.0 - start_x
    sol = solve_ivp(rhs, (0.0, horizon), [start_x, y0], method="Radau",
                    rtol=rtol, atol=atol, jac=jac, dense_output=True)
    if sol.status != 0:
        raise StiffnessBudgetExceeded(sol.message)
    n = int(round(horizon / sample_dt)) + 1
    t = np.linspace(0.0, horizon, n)
    X, Y = sol.sol(t)
    dist = np.abs(Y - (X**3 / 3.0 - X))
    mask = (np.abs(X) < 1.0 - math.sqrt(eps)) & (dist < 5 * eps)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return CanardVerification(0.0, 0.0, params)
    runs = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1)
    best = max(runs, key=len)
    tracked = float(t[best[-1]] - t[best[0]]) if best.size > 1 else 0.0
    return CanardVerification(tracked, float(dist[best].max()), params)
