"""Finite equilibria of the family and their linear classification."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .core import Params, State, eval_field, jacobian
from .errors import DomainError, NotAnEquilibrium, RootFindingFailure

__all__ = [
    "ZERO_TOL", "Equilibrium", "CubicData", "cubic_data", "find_equilibria",
    "closed_form_eigenvalues", "classify_equilibrium", "classify_matrix",
    "eigen_discriminant", "belyakov_crossing",
]

ZERO_TOL = 1e-9
RESIDUAL_TOL = 1e-9

CLASSES = (
    "saddle", "stable-node", "unstable-node", "stable-focus", "unstable-focus",
    "non-hyperbolic-pure-imaginary", "non-hyperbolic-double-zero",
    "semi-hyperbolic",
)


@dataclass(frozen=True)
class Equilibrium:
    location: State
    eigenvalues: Tuple[complex, complex]
    trace: float
    determinant: float
    classification: str
    label: str = "generic"

    @property
    def stable(self) -> bool:
        return self.classification in ("stable-node", "stable-focus")

    @property
    def unstable(self) -> bool:
        return self.classification in ("unstable-node", "unstable-focus")

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "x": self.location.x,
            "y": self.location.y,
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "trace": self.trace,
            "determinant": self.determinant,
            "classification": self.classification,
        }


@dataclass(frozen=True)
class CubicData:
    """``H(x) = h3 x^3 + h1 x + h0`` whose roots are the equilibrium abscissae."""

    coefficients: Tuple[float, float, float, float]  # (h3, h2, h1, h0)
    discriminant: float
    real_roots: Tuple[float, ...]

    def __call__(self, x: float) -> float:
        h3, h2, h1, h0 = self.coefficients
        return ((h3 * x + h2) * x + h1) * x + h0


def _sort_eigs(eigs) -> Tuple[complex, complex]:
    pair = sorted((complex(z) for z in eigs), key=lambda z: (z.real, z.imag))
    return pair[0], pair[1]


def cubic_data(params: Params) -> CubicData:
    """Cubic in ``x`` obtained by eliminating ``y = (a - x)/b``; needs b != 0."""
    a, b, c = params.a, params.b, params.c
    if b == 0:
        raise DomainError("the equilibrium cubic is only defined for b != 0")
    h3, h1, h0 = -c / 3.0, c * (1.0 - 1.0 / b), a * c / b
    disc = -4.0 * h3 * h1**3 - 27.0 * h3**2 * h0**2
    # companion-matrix eigenvalues
    roots = np.roots([h3, 0.0, h1, h0])
    scale = 1.0 + max(abs(r) for r in roots)
    real = []
    for r in roots:
        if abs(r.imag) <= 1e-7 * scale:
            real.append(_polish(h3, h1, h0, r.real))
    if disc < 0 or len(real) == 0:
        # exactly one real root; keep the one with the smallest imaginary part
        r = min(roots, key=lambda z: abs(z.imag))
        real = [_polish(h3, h1, h0, r.real)]
    real = sorted(real)
    # merge numerically coincident roots (double root on the discriminant zero set)
    merged: List[float] = []
    for r in real:
        if merged and abs(r - merged[-1]) < 1e-7 * (1 + abs(r)):
            continue
        merged.append(r)
    for r in merged:
        if abs(((h3 * r) * r + h1) * r + h0) > 1e-10 * (1 + abs(r) ** 3) * max(1.0, abs(h3), abs(h1), abs(h0)):
            raise RootFindingFailure(f"cubic root {r!r} has residual above tolerance")
    return CubicData((h3, 0.0, h1, h0), float(disc), tuple(float(r) for r in merged))


def _polish(h3, h1, h0, x):
    for _ in range(3):
        f = ((h3 * x) * x + h1) * x + h0
        df = 3 * h3 * x * x + h1
        if df == 0:
            break
        step = f / df
        x -= step
        if abs(step) < 1e-16 * (1 + abs(x)):
            break
    return x


def find_equilibria(params: Params) -> List[Equilibrium]:
    """All real equilibria, sorted by x."""
    a, b, c = params.a, params.b, params.c
    locs: List[Tuple[State, str]] = []
    if a == 0:
        locs.append((State(0.0, 0.0), "E1"))
        if b < 0 or b > 1:
            x3 = math.sqrt(3.0 * (b - 1.0) / b)
            locs.append((State(-x3, x3 / b), "E2"))
            locs.append((State(x3, -x3 / b), "E3"))
    elif b == 0:
        locs.append((State(a, -a + a**3 / 3.0), "E1"))
    else:
        cub = cubic_data(params)
        for r in cub.real_roots:
            # (a - r)/b amplifies the root error by 1/|b|; the cubic does not
            y = r**3 / 3.0 - r if abs(b) <= 1 else (a - r) / b
            locs.append((State(r, y), "generic"))
    try:
        out = [classify_equilibrium(params, s, label) for s, label in locs]
    except OverflowError as exc:
        raise RootFindingFailure("equilibria lie beyond the floating-point range") from exc
    return sorted(out, key=lambda e: e.location.x)


def closed_form_eigenvalues(params: Params, which: str) -> Tuple[complex, complex]:
    """Eigenvalues at E1, E2 or E3 for a = 0 from their closed forms."""
    if params.a != 0:
        raise DomainError("closed-form eigenvalues are available for a = 0 only")
    b, c = params.b, params.c
    if which == "E1":
        rad = (c * c + b) ** 2 - 4.0 * c * c
        root = cmath.sqrt(rad)
        lam = ((c * c - b + root) / (2 * c), (c * c - b - root) / (2 * c))
    elif which in ("E2", "E3"):
        if 0 <= b < 1:
            raise DomainError(f"{which} does not exist for b in [0, 1)")
        c2, c4 = c * c, c**4
        rad = 4 * c4 * b * b - 12 * c4 * b - 4 * c2 * b**3 + 9 * c4 + 2 * c2 * b * b + b**4
        root = cmath.sqrt(rad)
        base = 3 * c2 - b * b - 2 * c2 * b
        lam = ((base + root) / (2 * c * b), (base - root) / (2 * c * b))
    else:
        raise DomainError(f"unknown equilibrium label {which!r}")
    return _sort_eigs(lam)


def eigen_discriminant(m) -> float:
    tr = m[0][0] + m[1][1]
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return tr * tr - 4.0 * det


def classify_matrix(m, tol: float = ZERO_TOL) -> str:
    """Linear type of a 2x2 matrix under the zero tolerance ``tol``."""
    tr = m[0][0] + m[1][1]
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if abs(det) < tol:
        return "non-hyperbolic-double-zero" if abs(tr) < tol else "semi-hyperbolic"
    if det < 0:
        return "saddle"
    if abs(tr) < tol:
        return "non-hyperbolic-pure-imaginary"
    stab = "stable" if tr < 0 else "unstable"
    kind = "node" if tr * tr - 4.0 * det >= 0 else "focus"
    return f"{stab}-{kind}"


def classify_equilibrium(params: Params, loc, label: str = "generic") -> Equilibrium:
    loc = State(float(loc[0]), float(loc[1]))
    fx, fy = eval_field(params, loc)
    scale = 1.0 + abs(loc.x) ** 3 + abs(loc.y)
    if math.hypot(fx, fy) > RESIDUAL_TOL * scale:
        raise NotAnEquilibrium(f"{tuple(loc)} has field residual {math.hypot(fx, fy):.3e}")
    m = jacobian(params, loc)
    tr = float(m[0, 0] + m[1, 1])
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    eigs = _sort_eigs(np.linalg.eigvals(m))
    return Equilibrium(loc, eigs, tr, det, classify_matrix(m), label)


def _pick(params: Params, which: str) -> Equilibrium:
    eqs = find_equilibria(params)
    for e in eqs:
        if e.label == which:
            return e
    if which == "generic" and len(eqs) == 1:
        return eqs[0]
    raise DomainError(f"equilibrium {which} does not exist at {params}")


def _lerp(p: Params, q: Params, s: float) -> Params:
    return Params(float(p.a + s * (q.a - p.a)), float(p.b + s * (q.b - p.b)),
                  float(p.c + s * (q.c - p.c)))


def belyakov_crossing(path: Sequence[Params], which: str = "E1",
                      tol: float = 1e-10) -> List[Params]:
    """Points on a parameter path where an equilibrium changes between node and focus.

    Consecutive path entries are treated as straight segments.  A crossing is
    reported only if the trace keeps its sign across the bracketing segment,
    which excludes Hopf points and saddle transitions.
    """

    def data(p):
        m = jacobian(p, _pick(p, which).location)
        return eigen_discriminant(m), m[0, 0] + m[1, 1]

    out: List[Params] = []
    path = list(path)
    if len(path) < 2:
        return out
    prev = data(path[0])
    for p, q in zip(path[:-1], path[1:]):
        cur = data(q)
        (d0, t0), (d1, t1) = prev, cur
        prev = cur
        if d0 == 0 or d0 * d1 >= 0 or t0 * t1 <= 0:
            continue
        lo, hi = 0.0, 1.0
        span = max(abs(q.a - p.a), abs(q.b - p.b), abs(q.c - p.c))
        while (hi - lo) * span > tol:
            mid = 0.5 * (lo + hi)
            dm, _ = data(_lerp(p, q, mid))
            if dm == 0:
                lo = hi = mid
                break
            if (dm > 0) == (d0 > 0):
                lo = mid
            else:
                hi = mid
        out.append(_lerp(p, q, 0.5 * (lo + hi)))
    return out
