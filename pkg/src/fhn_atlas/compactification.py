"""Poincare compactification, infinite equilibria and the blow-up chain at infinity.

Chart fields are polynomial after clearing the ``v**d`` denominators; the
degree ``d`` used is the algebraic degree of the input field.  The FHN chain
keeps :class:`fractions.Fraction` coefficients built from the exact binary
values of ``a``, ``b`` and ``c`` so that every substitution is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from .core import Params, to_polynomial
from .errors import (CenterManifoldOrderTooHigh, ChainMismatch, DomainError,
                     NotAnEquilibrium)
from .polyfield import Poly, PolyField2, exact

__all__ = [
    "Chart", "ChartField", "compactify", "InfiniteEquilibrium",
    "infinite_equilibria", "antipode", "CharacteristicDirections",
    "characteristic_directions", "BlowUpStep", "vertical_blowup",
    "linear_substitution", "translate", "SemiHyperbolicResult",
    "classify_semihyperbolic", "BlowdownChain", "fhn_blowdown_chain",
    "verify_step", "DisplayCheck", "TildePoint", "CHAIN_RESIDUAL_TOL",
]

CHAIN_RESIDUAL_TOL = 1e-9
MAX_CENTER_ORDER = 5


class Chart(str, Enum):
    U1 = "U1"
    U2 = "U2"
    U3 = "U3"
    V1 = "V1"
    V2 = "V2"
    V3 = "V3"

    @property
    def index(self) -> int:
        return int(self.value[1])

    @property
    def is_v(self) -> bool:
        return self.value[0] == "V"


@dataclass(frozen=True)
class ChartField:
    chart: Chart
    field: PolyField2
    degree: int


def _chart_image(p: Poly, d: int, index: int) -> Poly:
    """``v**d * p(x, y)`` with ``(x, y) = (1/v, u/v)`` (U1) or ``(u/v, 1/v)`` (U2)."""
    out: Dict[Tuple[int, int], object] = {}
    for (i, j), coef in p.terms.items():
        upow = j if index == 1 else i
        key = (upow, d - i - j)
        out[key] = out.get(key, 0) + coef
    return Poly(out)


def compactify(fld: PolyField2, chart) -> ChartField:
    """Expression of the compactified field in one of the six local charts."""
    chart = Chart(chart)
    if fld.is_zero():
        raise DomainError("cannot compactify the zero field")
    d = fld.degree
    u, v = Poly.var(0), Poly.var(1)
    k = chart.index
    if k == 3:
        P, Q = fld.P, fld.Q
    else:
        tp, tq = _chart_image(fld.P, d, k), _chart_image(fld.Q, d, k)
        if k == 1:
            P, Q = tq - u * tp, -(v * tp)
        else:
            P, Q = tp - u * tq, -(v * tq)
    if chart.is_v and (d - 1) % 2 == 1:
        P, Q = -P, -Q
    return ChartField(chart, PolyField2(P, Q, chart.value), d)


@dataclass(frozen=True)
class InfiniteEquilibrium:
    chart: Chart
    u: object
    eigenvalues: Tuple[complex, complex]
    classification: str

    def to_json(self) -> dict:
        return {
            "chart": self.chart.value,
            "u": float(self.u),
            "eigenvalues": [[complex(z).real, complex(z).imag] for z in self.eigenvalues],
            "classification": self.classification,
        }


def _real_roots(coeffs_by_power: Dict[int, object]) -> List[object]:
    """Real roots of a univariate polynomial; exact zero is kept exact."""
    if not coeffs_by_power:
        return []
    roots: List[object] = []
    low = min(coeffs_by_power)
    reduced = {k - low: v for k, v in coeffs_by_power.items()}
    if low > 0:
        roots.append(Fraction(0))
    deg = max(reduced)
    if deg == 0:
        return roots
    arr = [float(reduced.get(k, 0)) for k in range(deg, -1, -1)]
    for r in np.roots(arr):
        if abs(r.imag) < 1e-9 * (1 + abs(r)):
            roots.append(float(r.real))
    return sorted(roots, key=float)


def _classify_pair(l1, l2, tol=1e-12) -> str:
    z = [complex(l1), complex(l2)]
    zero = [abs(w) <= tol for w in z]
    if all(zero):
        return "linearly-zero"
    if any(zero):
        return "semi-hyperbolic-other"
    if z[0].real * z[1].real < 0:
        return "saddle"
    return "node-unstable" if z[0].real > 0 else "node-stable"


def infinite_equilibria(fld: PolyField2) -> List[InfiniteEquilibrium]:
    """Infinite singular points in U1 plus the U2 origin when it is singular.

    The antipodal partners in the V charts follow from :func:`antipode`.
    Triangular Jacobians give the eigenvalues; a semi-hyperbolic point is
    refined through the centre manifold of the chart field, and a linearly
    zero one is only reported (it needs blow-ups).
    """
    if fld.is_zero():
        raise DomainError("field is identically zero")
    d = fld.degree
    Pd, Qd = fld.P.homogeneous(d), fld.Q.homogeneous(d)
    t = Poly.var(0)
    one = Poly.const(1)
    F = Qd.compose(one, t) - t * Pd.compose(one, t)
    if F.is_zero():
        raise DomainError("the equator is filled with singular points")
    out: List[InfiniteEquilibrium] = []
    u1 = compactify(fld, Chart.U1).field
    for r in _real_roots(F.univariate(0, 0)):
        l1 = F.diff(0)(r, 0)
        l2 = -Pd(1, r)
        cls = _refine(u1, (r, 0), _classify_pair(l1, l2))
        out.append(InfiniteEquilibrium(Chart.U1, r, _sorted(l1, l2), cls))
    # the U2 origin is the only equator point not covered by U1
    if Pd(0, 1) == 0:
        G = Pd.compose(t, one) - t * Qd.compose(t, one)
        l1 = G.diff(0)(0, 0)
        l2 = -Qd(0, 1)
        u2 = compactify(fld, Chart.U2).field
        cls = _refine(u2, (0, 0), _classify_pair(l1, l2))
        if cls == "linearly-zero" and any(x != 0 for row in u2.jacobian(0, 0) for x in row):
            cls = "nilpotent"
        out.append(InfiniteEquilibrium(Chart.U2, Fraction(0), _sorted(l1, l2), cls))
    return out


def _sorted(l1, l2):
    pair = sorted((l1, l2), key=lambda z: (complex(z).real, complex(z).imag))
    return pair[0], pair[1]


def _refine(chart_field: PolyField2, point, cls: str) -> str:
    if cls != "semi-hyperbolic-other":
        return cls
    try:
        return classify_semihyperbolic(chart_field, point).classification
    except CenterManifoldOrderTooHigh:
        return cls


def antipode(eq: InfiniteEquilibrium, degree: int) -> InfiniteEquilibrium:
    """Diametrically opposite point; the field there is scaled by ``(-1)**(d-1)``."""
    s = -1 if (degree - 1) % 2 else 1
    l1, l2 = eq.eigenvalues
    chart = Chart("V" + eq.chart.value[1]) if not eq.chart.is_v else Chart("U" + eq.chart.value[1])
    cls = eq.classification
    if s < 0:
        cls = {"node-stable": "node-unstable", "node-unstable": "node-stable"}.get(cls, cls)
    return InfiniteEquilibrium(chart, eq.u, _sorted(s * l1, s * l2), cls)


@dataclass(frozen=True)
class CharacteristicDirections:
    """Real linear factors ``alpha*x1 + beta*x2`` of the characteristic polynomial."""

    polynomial: Poly
    factors: Tuple[Tuple[Tuple[object, object], int], ...]  # ((alpha, beta), multiplicity)
    degenerate: bool

    @property
    def angles(self) -> List[float]:
        """Direction angles in [0, pi) of the lines ``alpha*x1 + beta*x2 = 0``."""
        return [math.atan2(float(al), -float(be)) % math.pi for (al, be), _ in self.factors]


def characteristic_directions(fld: PolyField2) -> CharacteristicDirections:
    """Factors of ``x1*Q_m - x2*P_m`` for the lowest order ``m`` at the origin."""
    m = fld.low_degree
    if m == 0 and not fld.is_zero():
        raise DomainError("the origin is not a singular point")
    x1, x2 = Poly.var(0), Poly.var(1)
    T = x1 * fld.Q.homogeneous(m) - x2 * fld.P.homogeneous(m)
    if T.is_zero():
        return CharacteristicDirections(T, (), True)
    factors = []
    # multiplicity of the factor x1 is its smallest power in T
    k = min(i for i, _ in T.terms)
    if k:
        factors.append(((Fraction(1), Fraction(0)), k))
    # remaining factors x2 - t*x1 with t a root of T(1, t)
    poly_t = {j: v for (i, j), v in T.terms.items()}
    for r in _real_roots(poly_t):
        factors.append(((-r, Fraction(1)), _multiplicity(poly_t, r)))
    merged = []
    for f in factors:
        if not any(_same_factor(f[0], g[0]) for g in merged):
            merged.append(f)
    return CharacteristicDirections(T, tuple(merged), False)


def _same_factor(p, q) -> bool:
    return abs(float(p[0]) * float(q[1]) - float(p[1]) * float(q[0])) < 1e-12


def _multiplicity(coeffs: Dict[int, object], r) -> int:
    mult = 0
    cur = dict(coeffs)
    while cur:
        val = sum(v * r**k for k, v in cur.items())
        if abs(float(val)) > 1e-9 * (1 + sum(abs(float(v)) for v in cur.values())):
            break
        mult += 1
        cur = {k - 1: v * k for k, v in cur.items() if k}
    return max(mult, 1)


# ---------------------------------------------------------------------------
# blow-up steps


@dataclass(frozen=True)
class BlowUpStep:
    """One substitution of the chain.

    ``kind`` is one of vertical-blowup, direction-translation,
    point-translation, common-factor-rescale or truncation.  ``before_division``
    keeps the field before the common factor was cancelled (vertical
    blow-ups only) and ``dropped`` the terms removed by a truncation.
    """

    kind: str
    parameters: dict
    parent: PolyField2
    result: PolyField2
    removed_factor: Tuple[int, int] = (0, 0)
    before_division: Optional[PolyField2] = None
    dropped: Optional[PolyField2] = None
    label: str = ""


def vertical_blowup(fld: PolyField2, label: str = "") -> BlowUpStep:
    """``(x1, x2) -> (x1, z*x1)`` followed by division by ``x1**(m-1)``."""
    m = fld.low_degree
    if m == 0:
        raise DomainError("vertical blow-up needs a singular origin")
    x1, z = Poly.var(0), Poly.var(1)
    P = fld.P.compose(x1, z * x1)
    Q = fld.Q.compose(x1, z * x1)
    Zdot = (Q - z * P).divide_monomial(1, 0)
    blown = PolyField2(P, Zdot)
    k = m - 1
    result = PolyField2(P.divide_monomial(k, 0), Zdot.divide_monomial(k, 0))
    return BlowUpStep("vertical-blowup", {"m": m}, fld, result, (k, 0), blown,
                      label=label)


def linear_substitution(fld: PolyField2, matrix, shift=(0, 0), kind="direction-translation",
                        label: str = "") -> BlowUpStep:
    """New coordinates ``(U, V)`` with ``(x, y) = M (U, V) + shift``."""
    (m11, m12), (m21, m22) = [[exact(v) for v in row] for row in matrix]
    s1, s2 = exact(shift[0]), exact(shift[1])
    det = m11 * m22 - m12 * m21
    if det == 0:
        raise DomainError("singular substitution matrix")
    px = Poly.affine(m11, m12, s1)
    py = Poly.affine(m21, m22, s2)
    P, Q = fld.P.compose(px, py), fld.Q.compose(px, py)
    newP = (P * m22 - Q * m12) * (Fraction(1) / det)
    newQ = (Q * m11 - P * m21) * (Fraction(1) / det)
    params = {"matrix": ((m11, m12), (m21, m22)), "shift": (s1, s2)}
    return BlowUpStep(kind, params, fld, PolyField2(newP, newQ), label=label)


def translate(fld: PolyField2, point, label: str = "") -> BlowUpStep:
    return linear_substitution(fld, ((1, 0), (0, 1)), point, "point-translation", label)


def _abs_eval(p: Poly, x: float, y: float) -> float:
    return sum(abs(float(v)) * abs(x) ** i * abs(y) ** j for (i, j), v in p.terms.items())


def verify_step(step: BlowUpStep, samples: int = 20, seed: int = 0) -> float:
    """Largest relative residual of the step relation at random points in [-1, 1]^2."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(samples, 2))
    par, res = step.parent.as_float(), step.result.as_float()
    worst = 0.0
    for x, y in pts:
        x, y = float(x), float(y)
        if step.kind == "vertical-blowup":
            k = step.removed_factor[0]
            P, Q = par.P(x, x * y), par.Q(x, x * y)
            lhs = (P, (Q - y * P) / x)
            r = res(x, y)
            rhs = (r[0] * x**k, r[1] * x**k)
            scale = (_abs_eval(par.P, x, x * y),
                     (_abs_eval(par.Q, x, x * y) + abs(y) * _abs_eval(par.P, x, x * y)) / abs(x))
        elif step.kind in ("direction-translation", "point-translation"):
            (m11, m12), (m21, m22) = [[float(v) for v in row] for row in step.parameters["matrix"]]
            s1, s2 = (float(v) for v in step.parameters["shift"])
            X, Y = m11 * x + m12 * y + s1, m21 * x + m22 * y + s2
            r = res(x, y)
            lhs = par(X, Y)
            rhs = (m11 * r[0] + m12 * r[1], m21 * r[0] + m22 * r[1])
            sc = (_abs_eval(par.P, X, Y), _abs_eval(par.Q, X, Y))
            scale = sc
        elif step.kind == "common-factor-rescale":
            i, j = step.removed_factor
            r = res(x, y)
            lhs = par(x, y)
            rhs = (r[0] * x**i * y**j, r[1] * x**i * y**j)
            scale = (_abs_eval(par.P, x, y), _abs_eval(par.Q, x, y))
        elif step.kind == "truncation":
            r, dr = res(x, y), step.dropped.as_float()(x, y)
            lhs = par(x, y)
            rhs = (r[0] + dr[0], r[1] + dr[1])
            scale = (_abs_eval(par.P, x, y), _abs_eval(par.Q, x, y))
        else:
            raise DomainError(f"unknown step kind {step.kind!r}")
        for l_, r_, s_ in zip(lhs, rhs, scale):
            worst = max(worst, abs(l_ - r_) / max(s_, 1e-300))
    return worst


# ---------------------------------------------------------------------------
# semi-hyperbolic points


@dataclass(frozen=True)
class SemiHyperbolicResult:
    classification: str  # saddle, node-stable, node-unstable or saddle-node
    order: int
    coefficient: object
    hyperbolic_eigenvalue: object
    center_manifold: Tuple[object, ...]  # graph coefficients along the hyperbolic eigenvector


def _truncate_uni(coeffs: Dict[int, object], n: int) -> Dict[int, object]:
    return {k: v for k, v in coeffs.items() if k <= n}


def _uni_mul(p, q, n):
    out: Dict[int, object] = {}
    for i, a in p.items():
        for j, b in q.items():
            if i + j <= n:
                out[i + j] = out.get(i + j, 0) + a * b
    return out


def _substitute_graph(poly: Poly, h: Dict[int, object], n: int) -> Dict[int, object]:
    """``poly(p, h(p))`` as a univariate series truncated at degree ``n``."""
    powers = [{0: Fraction(1)}]
    maxj = max((j for _, j in poly.terms), default=0)
    for _ in range(maxj):
        powers.append(_uni_mul(powers[-1], h, n))
    out: Dict[int, object] = {}
    for (i, j), v in poly.terms.items():
        for k, w in powers[j].items():
            if i + k <= n:
                out[i + k] = out.get(i + k, 0) + v * w
    return out


def classify_semihyperbolic(fld: PolyField2, point, max_order: int = MAX_CENTER_ORDER,
                            tol: float = 0.0) -> SemiHyperbolicResult:
    """Leading term of the centre-manifold flow at an equilibrium with one zero eigenvalue.

    The point is moved to the origin and the linear part is diagonalised;
    the graph ``q = h(p)`` is solved order by order and the first nonzero
    coefficient ``g_k p**k`` of the reduced flow decides the type together
    with the sign of the hyperbolic eigenvalue.
    """
    pu, pv = exact(point[0]), exact(point[1])
    shifted = translate(fld, (pu, pv)).result
    if any(abs(float(x)) > 1e-9 for x in (shifted.P.coeff(0, 0), shifted.Q.coeff(0, 0))):
        raise NotAnEquilibrium(f"{point} is not an equilibrium of the field")
    (j11, j12), (j21, j22) = shifted.jacobian(0, 0)
    tr, det = j11 + j22, j11 * j22 - j12 * j21
    if det != 0 or tr == 0:
        raise DomainError("the point does not have exactly one zero eigenvalue")
    lam = tr
    # kernel vector e0 and eigenvector e1 for lam
    e0 = (j12, -j11) if (j11 != 0 or j12 != 0) else (j22, -j21)
    # scale the centre direction so its leading component is 1
    lead = e0[0] if e0[0] != 0 else e0[1]
    e0 = (e0[0] / lead, e0[1] / lead)
    e1 = (j12, lam - j11) if (j12 != 0 or lam - j11 != 0) else (lam - j22, j21)
    M = ((e0[0], e1[0]), (e0[1], e1[1]))
    diag = linear_substitution(shifted, M).result
    Fp, Fq = diag.P, diag.Q
    # drop the exact linear part lam*q from Fq to get the nonlinear remainder
    Nq = Fq - Poly({(0, 1): lam})
    h: Dict[int, object] = {}
    for k in range(2, max_order):
        fp = _substitute_graph(Fp, h, k)
        nq = _substitute_graph(Nq, h, k)
        dh = {i - 1: i * v for i, v in h.items()}
        lhs = _uni_mul(dh, fp, k)
        h[k] = (lhs.get(k, 0) - nq.get(k, 0)) / lam
        h = {i: v for i, v in h.items() if v != 0}
    red = _substitute_graph(Fp, h, max_order)
    for k in range(1, max_order + 1):
        g = red.get(k, 0)
        if g != 0 and abs(float(g)) > tol:
            if k % 2 == 0:
                cls = "saddle-node"
            elif g * lam < 0:
                cls = "saddle"
            else:
                cls = "node-stable" if lam < 0 else "node-unstable"
            return SemiHyperbolicResult(cls, k, g, lam,
                                        tuple(h.get(i, 0) for i in range(2, max_order)))
    raise CenterManifoldOrderTooHigh(
        f"reduced flow vanishes up to degree {max_order} at {point}")


# ---------------------------------------------------------------------------
# FHN chain


@dataclass(frozen=True)
class DisplayCheck:
    label: str
    status: str  # match, mismatch or not-transcribed
    detail: str = ""


@dataclass(frozen=True)
class TildePoint:
    name: str
    location: Tuple[object, object]
    eigenvalues: Tuple[object, object]
    classification: str

    def to_json(self) -> dict:
        return {"name": self.name, "u": float(self.location[0]), "v": float(self.location[1]),
                "eigenvalues": [float(z) for z in self.eigenvalues],
                "classification": self.classification}


@dataclass(frozen=True)
class BlowdownChain:
    params: Params
    chart_field: PolyField2
    steps: Tuple[BlowUpStep, ...]
    residuals: Tuple[float, ...]
    points: Tuple[TildePoint, ...]
    e6: Optional[SemiHyperbolicResult]
    e6_error: str = ""
    display: Tuple[DisplayCheck, ...] = field(default_factory=tuple)

    def step(self, label: str) -> BlowUpStep:
        for s in self.steps:
            if s.label == label:
                return s
        raise KeyError(label)

    def point(self, name: str) -> TildePoint:
        for p in self.points:
            if p.name == name:
                return p
        raise KeyError(name)


def _divide_by_v_minus(p: Poly, root) -> Poly:
    """Exact quotient of ``p`` by ``(y - root)``; raises if the remainder is nonzero."""
    by_u: Dict[int, Dict[int, object]] = {}
    for (i, j), v in p.terms.items():
        by_u.setdefault(i, {})[j] = v
    out: Dict[Tuple[int, int], object] = {}
    for i, col in by_u.items():
        n = max(col)
        carry = 0
        quot: Dict[int, object] = {}
        for j in range(n, 0, -1):
            carry = col.get(j, 0) + carry * root
            quot[j - 1] = carry
        if col.get(0, 0) + carry * root != 0:
            raise ValueError("nonzero remainder")
        for j, v in quot.items():
            if v != 0:
                out[(i, j)] = v
    return Poly(out)


def _truncate_s6(full: PolyField2, label: str) -> BlowUpStep:
    """Keep the factors ``u*(. )`` and ``v*(v-1)*(. )`` to first order inside."""
    u, v = Poly.var(0), Poly.var(1)
    A = full.P.divide_monomial(1, 0)
    B = _divide_by_v_minus(full.Q.divide_monomial(0, 1), 1)
    lowA = A.homogeneous(0) + A.homogeneous(1)
    lowB = B.homogeneous(0) + B.homogeneous(1)
    trunc = PolyField2(u * lowA, v * (v - 1) * lowB)
    dropped = PolyField2(full.P - trunc.P, full.Q - trunc.Q)
    return BlowUpStep("truncation", {"keep": "first order inside the factored form"},
                      full, trunc, dropped=dropped, label=label)


def _display_fields(a, b, c):
    """Transcriptions of the displayed chain systems, used only for the mismatch report."""
    ic = 1 / c
    chart = PolyField2.from_coeffs(
        {(2, 2): ic, (1, 3): -a * ic, (3, 0): -c / 3, (1, 2): b * ic + c, (0, 2): c},
        {(1, 3): ic, (0, 4): -a * ic, (0, 3): b * ic})
    s1_raw = PolyField2.from_coeffs(
        {(4, 3): -a * ic, (4, 2): ic, (3, 2): c + b * ic, (2, 2): c, (3, 0): -c / 3},
        {(2, 3): -c, (1, 3): -c, (2, 1): c / 3})
    s1 = PolyField2.from_coeffs(
        {(3, 3): -a * ic, (3, 2): ic, (2, 2): c + b * ic, (1, 2): c, (2, 0): -c / 3},
        {(1, 3): -c, (0, 3): -c, (1, 1): c / 3})
    c2 = c * c
    s2p = {(1, 1): 3 * c2, (2, 0): -c2, (0, 2): -2 * c2, (1, 2): 3 * c2, (2, 2): 3 * b + 3 * c2,
           (3, 2): Fraction(3), (0, 3): -6 * c2, (1, 3): -6 * b - 9 * c2, (2, 3): Fraction(-9),
           (3, 3): -3 * a, (0, 4): 3 * b + 6 * c2, (1, 4): Fraction(9), (2, 4): 9 * a,
           (0, 5): Fraction(-3), (1, 5): -9 * a, (0, 6): 3 * a}
    s2 = PolyField2(Poly(s2p) * (1 / (3 * c)),
                    Poly({(1, 1): Fraction(1), (0, 2): Fraction(-1), (0, 3): Fraction(-3),
                          (1, 3): Fraction(-3), (0, 4): Fraction(3)}) * (c / 3))
    # s3: u3 * (...) / (3c) and v3 (1 - v3) (...) / (3c)
    s3a = {(0, 1): 3 * c2, (0, 0): -c2, (0, 2): -2 * c2, (1, 2): 3 * c2, (2, 2): 3 * b + 3 * c2,
           (3, 2): Fraction(3), (1, 3): -6 * c2, (2, 3): -6 * b - 9 * c2, (3, 3): Fraction(-9),
           (4, 3): -3 * a, (2, 4): 3 * b + 6 * c2, (3, 4): Fraction(9), (4, 4): 9 * a,
           (3, 5): Fraction(-3), (4, 5): -9 * a, (4, 6): 3 * a}
    s3b = {(0, 0): 2 * c2, (0, 1): -2 * c2, (1, 2): -6 * c2, (2, 2): -3 * b - 6 * c2,
           (3, 2): Fraction(-3), (2, 3): 3 * b + 6 * c2, (3, 3): Fraction(6), (4, 3): 3 * a,
           (3, 4): Fraction(-3), (4, 4): -6 * a, (4, 5): 3 * a}
    u, v = Poly.var(0), Poly.var(1)
    s3 = PolyField2(u * Poly(s3a) * (1 / (3 * c)),
                    v * (1 - v) * Poly(s3b) * (1 / (3 * c)))
    s6 = PolyField2(u * Poly({(0, 0): 3 * c2, (0, 1): -11 * c2}) * (-1 / (3 * c)),
                    v * (v - 1) * Poly({(0, 0): -9 * c2, (0, 1): 6 * c2}) * (1 / (3 * c)))
    return {"chart": chart, "s1-raw": s1_raw, "s1": s1, "s2": s2, "s3": s3, "s6": s6}


def _diff_terms(got: PolyField2, shown: PolyField2) -> str:
    parts = []
    for name, g, s in (("first", got.P, shown.P), ("second", got.Q, shown.Q)):
        d = g - s
        if not d.is_zero():
            keys = sorted(d.terms)[:6]
            parts.append(f"{name} component differs in monomials {keys}")
    return "; ".join(parts)


def _raw_chain(params: Params) -> Tuple[PolyField2, List[BlowUpStep]]:
    fld = to_polynomial(params, exact_coeffs=True)
    u2 = compactify(fld, Chart.U2).field
    shear = ((1, -1), (0, 1))
    steps: List[BlowUpStep] = []
    s = vertical_blowup(u2, "s1")
    steps.append(s)
    s = linear_substitution(s.result, shear, label="s2")
    steps.append(s)
    s = vertical_blowup(s.result, "s3")
    steps.append(s)
    s = translate(s.result, (0, 1), "s4")
    steps.append(s)
    s = linear_substitution(s.result, shear, label="s5")
    steps.append(s)
    s = vertical_blowup(s.result, "s6-full")
    steps.append(s)
    steps.append(_truncate_s6(s.result, "s6"))
    return u2, steps


def fhn_blowdown_chain(params: Params, samples: int = 20, seed: int = 0,
                       tol: float = CHAIN_RESIDUAL_TOL) -> BlowdownChain:
    """Blow-up chain at the origin of chart U2, each step checked numerically.

    Steps: blow-up (s1-raw -> s1), shear ``(u1, v1) = (u2 - v2, v2)`` (s2),
    blow-up (s3), translation ``(u3, v3) = (u4, 1 + v4)`` (s4), shear
    ``(u4, v4) = (u5 - v5, v5)`` (s5), blow-up (s6) and the displayed
    truncation.  Equilibria on ``u6 = 0`` are classified with the full field.
    """
    u2, steps = _raw_chain(params)
    full6 = steps[5].result

    residuals = []
    for idx, st in enumerate(steps):
        r = verify_step(st, samples, seed + idx)
        if not r < tol:
            raise ChainMismatch(idx, r)
        residuals.append(r)

    s3 = steps[2].result
    points = [_tilde(s3, "E1~", (0, 0)), _tilde(s3, "E2~", (0, 1))]
    for name, vv in (("E4~", Fraction(0)), ("E5~", Fraction(1)), ("E6~", Fraction(3, 2))):
        points.append(_tilde(full6, name, (0, vv)))
    e6, err = None, ""
    try:
        e6 = classify_semihyperbolic(full6, (0, Fraction(3, 2)))
        points[-1] = TildePoint("E6~", (0, Fraction(3, 2)), points[-1].eigenvalues,
                                e6.classification)
    except CenterManifoldOrderTooHigh as exc:
        err = str(exc)

    display = _display_report(params, steps)
    return BlowdownChain(params, u2, tuple(steps), tuple(residuals), tuple(points), e6,
                         err, display)


def _tilde(fld: PolyField2, name: str, loc) -> TildePoint:
    (j11, j12), (j21, j22) = fld.jacobian(*loc)
    tr, det = j11 + j22, j11 * j22 - j12 * j21
    if j12 == 0 or j21 == 0:
        eigs = _sorted(j11, j22)
    else:
        disc = tr * tr - 4 * det
        r = math.sqrt(float(disc)) if disc >= 0 else complex(0, math.sqrt(-float(disc)))
        eigs = _sorted((tr + r) / 2, (tr - r) / 2)
    cls = _classify_pair(*eigs, tol=0)
    return TildePoint(name, (exact(loc[0]), exact(loc[1])), eigs, cls)


def _display_report(params: Params, steps) -> Tuple[DisplayCheck, ...]:
    shown = _display_fields(exact(params.a), exact(params.b), exact(params.c))
    got = {
        "chart": steps[0].parent, "s1-raw": steps[0].before_division, "s1": steps[0].result,
        "s2": steps[1].result, "s3": steps[2].result, "s6": steps[6].result,
    }
    out = []
    for key in ("chart", "s1-raw", "s1", "s2", "s3", "s6"):
        g, sh = got[key], shown[key]
        if g == sh:
            out.append(DisplayCheck(key, "match"))
        else:
            out.append(DisplayCheck(key, "mismatch", _diff_terms(g, sh)))
    # the displayed s5 has no a-terms; compare against the a = 0 derivation
    if params.a != 0:
        s5_zero = _raw_chain(params.replace(a=0.0))[1][4].result
        if steps[4].result != s5_zero:
            out.append(DisplayCheck("s5", "mismatch",
                                    "derived field carries terms in a that the display lacks"))
        else:
            out.append(DisplayCheck("s5", "match", "no a-dependence at this parameter"))
    else:
        out.append(DisplayCheck("s5", "not-transcribed", "a = 0: the a-free display is not compared"))
    out.append(DisplayCheck("s4", "not-transcribed",
                            "display contains unreadable tokens; derived field used"))
    return tuple(out)
