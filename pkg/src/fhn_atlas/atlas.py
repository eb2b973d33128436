"""Bifurcation and transition curves, Lyapunov coefficients and region signatures."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import Params, State, apply_kappa, jacobian, to_polynomial
from .equilibria import Equilibrium, ZERO_TOL, cubic_data, find_equilibria
from .errors import (CycleProbeTimeout, DegenerateCenterManifold, DomainError,
                     NoCycleFound, NotOnHopfCurve, StepSizeUnderflow)
from .parallel import thread_map

__all__ = [
    "CurveId", "CurvePoint", "eval_curve", "OrderingCheck", "curve_ordering_check",
    "LyapunovResult", "first_lyapunov", "PitchforkReduction", "pitchfork_reduction",
    "HopfCaseC", "hopf_condition_caseC", "RegionSignature", "classify_region",
    "bendixson_excludes_cycles", "dh_expression", "dh_sqrt_factor_root",
    "tf23_roots",
]


class CurveId(str, Enum):
    TP = "TP"
    TF1 = "TF1"
    TH1 = "TH1"
    TF23_minus = "TF23_minus"
    TF23_plus = "TF23_plus"
    TH23 = "TH23"
    DH = "DH"
    SNL_plus = "SNL_plus"
    SNL_minus = "SNL_minus"
    TFb0 = "TFb0"
    THb0_minus = "THb0_minus"
    THb0_plus = "THb0_plus"
    TH_caseC = "TH_caseC"


CASE_CURVES = {
    "A": (CurveId.TP, CurveId.TF1, CurveId.TH1, CurveId.TF23_minus,
          CurveId.TF23_plus, CurveId.TH23, CurveId.DH, CurveId.SNL_plus,
          CurveId.SNL_minus),
    "B": (CurveId.TFb0, CurveId.THb0_minus, CurveId.THb0_plus),
    "C": (CurveId.TH_caseC,),
}


@dataclass(frozen=True)
class CurvePoint:
    """One curve evaluation.

    ``c`` is the abscissa the curve was evaluated at; for ``TFb0`` this is
    the parameter ``a`` and ``value`` is the corresponding ``c``.  For the
    other Case B curves ``value`` is ``a``; for everything else it is ``b``.
    """

    curve: CurveId
    c: float
    value: float
    valid: bool


def tf23_roots(c: float) -> List[float]:
    """Real roots in b of both quadratic factors of the E2/E3 Belyakov locus."""
    roots = []
    for s in (1.0, -1.0):
        p = s * 2 * c - 2 * c * c
        q = 3 * c * c
        disc = p * p - 4 * q
        if disc < 0:
            continue
        r = math.sqrt(disc)
        # cancellation-free pair of roots
        big = (-p + math.copysign(r, -p)) / 2
        if big != 0:
            roots.extend([big, q / big])
        else:
            roots.extend([0.0, 0.0])
    return sorted(roots)


def _snl(c: float, sign: float) -> float:
    k = abs(c)
    return c * c + sign * k * math.sqrt(c * c - 1)


def eval_curve(curve, c: float, *, sign: int = 1, a: float = 0.5,
               strict: bool = False) -> CurvePoint:
    """Evaluate a transition or bifurcation curve.

    ``sign`` picks the branch of the two-signed formulas ``TF1`` and
    ``TFb0``.  ``a`` is only used by ``TH_caseC``, which returns the ``b`` in
    (0, 1) where the Case C Hopf condition holds at the given ``c``.
    """
    curve = CurveId(curve)
    if curve is not CurveId.TFb0 and c == 0:
        raise DomainError("curves are parameterized by c != 0")
    nan = math.nan
    if curve is CurveId.TP:
        value, valid = 1.0, True
    elif curve is CurveId.TF1:
        value, valid = -c * c + sign * 2 * c, True
    elif curve is CurveId.TH1:
        value, valid = c * c, abs(c) < 1
    elif curve in (CurveId.TF23_minus, CurveId.TF23_plus):
        adm = [r for r in tf23_roots(c) if r > 1]
        if adm:
            value = min(adm) if curve is CurveId.TF23_minus else max(adm)
            valid = True
        else:
            value, valid = nan, False
    elif curve is CurveId.TH23:
        k = abs(c)
        value = 3 * k / (k + math.sqrt(k * k + 3))  # = |c|(-|c| + sqrt(c^2 + 3))
        valid = value > 1
    elif curve is CurveId.DH:
        c2 = c * c
        value = 34 * c2 / (10 * c2 + math.sqrt(100 * c2 * c2 + 476 * c2))
        valid = value > 1
    elif curve in (CurveId.SNL_plus, CurveId.SNL_minus):
        if abs(c) >= 1:
            value = _snl(c, 1.0 if curve is CurveId.SNL_plus else -1.0)
            valid = True
        else:
            value, valid = nan, False
    elif curve is CurveId.TFb0:
        if abs(c * c - 1) > 0:
            value, valid = sign * 2 / (c * c - 1), True
        else:
            value, valid = nan, False
    elif curve is CurveId.THb0_minus:
        value, valid = -1.0, True
    elif curve is CurveId.THb0_plus:
        value, valid = 1.0, True
    else:
        value, valid = _caseC_b(a, c)
    if strict and not valid:
        raise DomainError(f"{curve.value} is not defined at {c}")
    return CurvePoint(curve, float(c), float(value), bool(valid))


def _caseC_b(a: float, c: float) -> Tuple[float, bool]:
    if not a > 0:
        return math.nan, False

    def g(b):
        x = cubic_data(Params(a, b, c)).real_roots[0]
        return c * c * (1 - x * x) - b

    grid = np.linspace(1e-6, 1 - 1e-6, 41)
    vals = [g(b) for b in grid]
    for lo, hi, glo, ghi in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if glo == 0:
            return float(lo), True
        if glo * ghi < 0:
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                gm = g(mid)
                if (gm > 0) == (glo > 0):
                    lo, glo = mid, gm
                else:
                    hi = mid
                if hi - lo < 1e-15:
                    break
            return float(0.5 * (lo + hi)), True
    return math.nan, False


def dh_expression(b: float, c: float) -> float:
    """Full approximate double-homoclinic expression (real part of the root)."""
    lead = (7 * b * b + 10 * b * c * c - 17 * c * c) / (15 * c**3)
    rad = (-7 * b * b + 5 * b * c * c + 2 * c * c) / (5 * b)
    return lead * math.sqrt(rad) if rad >= 0 else math.nan


def dh_sqrt_factor_root(c: float) -> float:
    """Positive zero in b of the square-root factor; diagnostic only."""
    c2 = c * c
    return (5 * c2 + math.sqrt(25 * c2 * c2 + 56 * c2)) / 14


ORDERING = (CurveId.TF23_minus, CurveId.TH23, CurveId.DH, CurveId.SNL_plus,
            CurveId.TF23_plus)


@dataclass(frozen=True)
class OrderingCheck:
    c: float
    points: Tuple[CurvePoint, ...]  # in the expected order
    holds: bool

    @property
    def values(self) -> Tuple[float, ...]:
        return tuple(p.value for p in self.points)


def curve_ordering_check(c: float) -> OrderingCheck:
    pts = tuple(eval_curve(cid, c) for cid in ORDERING)
    vals = [p.value for p in pts]
    holds = all(p.valid for p in pts) and all(
        u <= v for u, v in zip(vals[:-1], vals[1:]))
    return OrderingCheck(float(c), pts, holds)


# ---------------------------------------------------------------------------
# Hopf points

@dataclass(frozen=True)
class LyapunovResult:
    omega: float
    R1: float
    R2: float
    l: float
    transversality: float
    parameter: str

    def to_json(self) -> dict:
        return {"omega": self.omega, "R1": self.R1, "R2": self.R2, "l": self.l,
                "transversality": self.transversality, "parameter": self.parameter}


def _derivative_tensors(params: Params, loc) -> Tuple[np.ndarray, np.ndarray]:
    """Second and third derivative tensors of the field at ``loc``."""
    field_ = to_polynomial(params)
    x, y = loc
    D2 = np.zeros((2, 2, 2))
    D3 = np.zeros((2, 2, 2, 2))
    for comp, poly in enumerate((field_.P, field_.Q)):
        for i in range(2):
            pi = poly.diff(i)
            for j in range(2):
                pij = pi.diff(j)
                D2[comp, i, j] = pij(x, y)
                for k in range(2):
                    D3[comp, i, j, k] = pij.diff(k)(x, y)
    return D2, D3


def _trace_gradient(params: Params, loc, parameter: str) -> float:
    """Derivative of the trace at the equilibrium along the equilibrium branch."""
    a, b, c = params.a, params.b, params.c
    x, y = loc
    J = jacobian(params, loc)
    if parameter == "a":
        dF, dTr = np.array([0.0, 1.0 / c]), 0.0
    elif parameter == "b":
        dF, dTr = np.array([0.0, -y / c]), -1.0 / c
    elif parameter == "c":
        dF = np.array([y - x**3 / 3 + x, (x - a + b * y) / (c * c)])
        dTr = 1 - x * x + b / (c * c)
    else:
        raise DomainError(f"unknown parameter {parameter!r}")
    dX = -np.linalg.solve(J, dF)
    return dTr + (-2 * c * x) * dX[0]


def first_lyapunov(params: Params, eq, parameter: Optional[str] = None,
                   tol: float = 1e-8) -> LyapunovResult:
    """First Lyapunov coefficient at a Hopf equilibrium.

    The linear part is brought to the rotation ``(u', v') = (-w v, w u)`` by
    the basis ``(p, J p / w)`` with ``p = (1/2, 0)``, after which the usual
    second and third derivative combinations of the transformed nonlinear
    terms give ``l = (R1 + w R2) / (16 w)``.  ``transversality`` is the rate of
    change of the real part of the eigenvalues along the equilibrium branch
    with respect to ``parameter`` (default ``a`` when b = 0, else ``b``).
    """
    loc = eq.location if isinstance(eq, Equilibrium) else State(*eq)
    J = jacobian(params, loc)
    tr = J[0, 0] + J[1, 1]
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    scale = max(1.0, float(np.abs(J).max()))
    if abs(tr) > tol * scale or det <= 0:
        raise NotOnHopfCurve(f"trace {tr:.3e}, determinant {det:.3e}")
    omega = math.sqrt(det)
    p = np.array([0.5, 0.0])
    T = np.column_stack([p, J @ p / omega])
    Ti = np.linalg.inv(T)
    D2, D3 = _derivative_tensors(params, loc)
    # tensors of the transformed nonlinearity in (u, v)
    E2 = np.einsum("ai,ijk,jm,kn->amn", Ti, D2, T, T)
    E3 = np.einsum("ai,ijkl,jm,kn,lo->amno", Ti, D3, T, T, T)
    f2, g2 = E2
    f3, g3 = E3
    fuu, fuv, fvv = f2[0, 0], f2[0, 1], f2[1, 1]
    guu, guv, gvv = g2[0, 0], g2[0, 1], g2[1, 1]
    R1 = fuv * (fuu + fvv) - guv * (guu + gvv) - fuu * guu + fvv * gvv
    R2 = f3[0, 0, 0] + f3[0, 1, 1] + g3[0, 0, 1] + g3[1, 1, 1]
    l = (R1 + omega * R2) / (16 * omega)
    if parameter is None:
        parameter = "a" if params.b == 0 else "b"
    trans = 0.5 * _trace_gradient(params, loc, parameter)
    return LyapunovResult(float(omega), float(R1), float(R2), float(l),
                          float(trans), parameter)


@dataclass(frozen=True)
class PitchforkReduction:
    """Reduced flow ``x' = linear * x + cubic * x**3`` on the centre manifold."""

    linear: float
    cubic: float
    mu: float

    def equilibrium_count(self) -> int:
        if self.cubic == 0 or self.linear == 0:
            return 1
        return 3 if -self.linear / self.cubic > 0 else 1


def pitchfork_reduction(params: Params) -> PitchforkReduction:
    """Centre-manifold reduction at the origin near b = 1 for a = 0.

    The reduced coordinate is the projection onto the left null vector of the
    b = 1 Jacobian normalized as ``(1, c**2)``.  Quadratic terms vanish at
    the origin, so the cubic coefficient is the projected third derivative
    and the linear coefficient is the first-order eigenvalue shift in
    ``mu = b - 1``.
    """
    if params.a != 0:
        raise DomainError("the pitchfork reduction is for a = 0")
    c = params.c
    if abs(c * c - 1) < 1e-6:
        raise DegenerateCenterManifold("c**2 = 1: the zero eigenvalue is double")
    mu = params.b - 1.0
    J0 = jacobian(params.replace(b=1.0), (0.0, 0.0))
    w = np.array([1.0, c * c])
    # right null vector of J0 scaled so that w . v = 1
    v = np.array([J0[0, 1], -J0[0, 0]])
    v = v / (w @ v)
    _, D3 = _derivative_tensors(params.replace(b=1.0), (0.0, 0.0))
    cubic = float(w @ np.einsum("ijkl,j,k,l->i", D3, v, v, v)) / 6.0
    dJ = np.array([[0.0, 0.0], [0.0, -1.0 / c]])  # derivative of J in b
    linear = float(w @ dJ @ v) * mu
    return PitchforkReduction(linear, cubic, mu)


@dataclass(frozen=True)
class HopfCaseC:
    on_curve: bool
    c_critical: Optional[float]
    x_star: float

    def to_json(self) -> dict:
        return {"on_curve": self.on_curve, "c_critical": self.c_critical,
                "x_star": self.x_star}


def hopf_condition_caseC(params: Params, tol: float = ZERO_TOL) -> HopfCaseC:
    """Hopf condition ``c**2 = b / (1 - x*^2)`` for a > 0, 0 < b < 1.

    ``c_critical`` is the positive root; the negative one is its mirror under
    the time reversal ``c -> -c``.
    """
    a, b, c = params.a, params.b, params.c
    if not (a > 0 and 0 < b < 1):
        raise DomainError("Case C needs a > 0 and 0 < b < 1")
    xs = cubic_data(params).real_roots[0]
    if xs * xs >= 1:
        return HopfCaseC(False, None, float(xs))
    crit = math.sqrt(b / (1 - xs * xs))
    tr = c * (1 - xs * xs) - b / c
    return HopfCaseC(bool(abs(tr) < tol), float(crit), float(xs))


def bendixson_excludes_cycles(params: Params) -> bool:
    """True when the divergence is negative everywhere (b > c**2)."""
    return params.b > params.c ** 2


# ---------------------------------------------------------------------------
# region signatures

@dataclass(frozen=True)
class RegionSignature:
    equilibrium_count: int
    classifications: Tuple[str, ...]
    kappa_symmetric: bool
    limit_cycle_count: Optional[int] = None
    cycles: Tuple[Tuple[float, bool], ...] = field(default=())  # (amplitude, stable)

    def to_json(self) -> dict:
        out = {
            "equilibrium_count": self.equilibrium_count,
            "classifications": list(self.classifications),
            "kappa_symmetric": self.kappa_symmetric,
            "limit_cycle_count": self.limit_cycle_count,
        }
        if self.limit_cycle_count is not None:
            out["cycles"] = [{"x_amplitude": amp, "stable": st}
                             for amp, st in self.cycles]
        return out


def _kappa_symmetric(eqs: Sequence[Equilibrium], a: float) -> bool:
    if a != 0:
        return False
    for e in eqs:
        image = apply_kappa(e.location)
        if not any(math.dist(image, f.location) < 1e-9
                   and f.classification == e.classification for f in eqs):
            return False
    return True


def probe_seeds(eqs: Sequence[Equilibrium], count: int = 12, radius: float = 3.0,
                phase: float = 0.0, offset: float = 1e-3) -> List[State]:
    """Ring of initial conditions plus small offsets around every equilibrium."""
    seeds = [State(radius * math.cos(phase + 2 * math.pi * k / count),
                   radius * math.sin(phase + 2 * math.pi * k / count))
             for k in range(count)]
    for e in eqs:
        x, y = e.location
        seeds.extend([State(x + offset, y), State(x - offset, y)])
    return seeds


def _near_known(state, cycles, tol=1e-3) -> bool:
    for cyc in cycles:
        d = np.hypot(cyc.points[:, 0] - state[0], cyc.points[:, 1] - state[1])
        if d.min() < tol:
            return True
    return False


def probe_cycles(params: Params, seeds: Sequence, max_time: float = 500.0):
    """Distinct limit cycles reached from ``seeds`` forward or backward in time.

    Jobs run in batches of the configured worker count; within a batch every
    transient may stop early once it reaches a cycle found by an earlier
    batch.
    """
    from .dynamics import Tolerances, _stop_at_stable, find_limit_cycle, integrate
    from .parallel import worker_count

    eqs = find_equilibria(params)
    eqs_rev = find_equilibria(params.reversed())
    jobs = [(s, bw) for s in seeds for bw in (False, True)]
    found: list = []

    def transient(job, known):
        s, bw = job
        at_rest = _stop_at_stable(eqs_rev if bw else eqs)
        same = [cy for cy in known if cy.stable != bw]
        count = [0]

        def stop(t, y):
            reason = at_rest(t, y)
            if reason:
                return reason
            count[0] += 1
            if same and count[0] % 10 == 0 and _near_known(y, same, 1e-4):
                return "converged-to-cycle"
            return None

        try:
            return integrate(params, s, max_time, Tolerances(1e-9, 1e-9),
                             backward=bw, stop=stop)
        except StepSizeUnderflow as exc:
            raise CycleProbeTimeout(str(exc)) from exc

    batch = worker_count()
    for start in range(0, len(jobs), batch):
        chunk = jobs[start:start + batch]
        known = list(found)
        segments = thread_map(lambda job: transient(job, known), chunk)
        for (s, bw), seg in zip(chunk, segments):
            if seg.terminal_reason != "time-limit":
                continue
            if _near_known(seg.final, found):
                continue
            try:
                cyc = find_limit_cycle(params, seg.final,
                                       direction="backward" if bw else "forward",
                                       transient=1.0)
            except NoCycleFound:
                continue
            except StepSizeUnderflow as exc:
                raise CycleProbeTimeout(str(exc)) from exc
            if not _duplicate(cyc, found):
                found.append(cyc)
    found.sort(key=lambda cy: (round(cy.x_amplitude, 6), round(cy.centroid[0], 6)))
    return found


def _duplicate(cyc, found, tol=1e-3) -> bool:
    for other in found:
        if (abs(cyc.x_amplitude - other.x_amplitude) < tol
                and math.dist(cyc.centroid, other.centroid) < tol):
            return True
    return False


def classify_region(params: Params, probe: bool = False,
                    initial_conditions: Optional[Sequence] = None,
                    seed: int = 0, max_time: float = 500.0) -> RegionSignature:
    """Equilibrium signature of a parameter point, optionally with a cycle count.

    The default probe uses 12 points on a radius-3 ring, rotated by a phase
    drawn from ``seed``, plus small offsets around each equilibrium.  The
    cycle count is a lower bound.
    """
    eqs = find_equilibria(params)
    classes = tuple(sorted(e.classification for e in eqs))
    sym = _kappa_symmetric(eqs, params.a)
    if not probe:
        return RegionSignature(len(eqs), classes, sym)
    if initial_conditions is None:
        phase = float(np.random.default_rng(seed).uniform(0, 2 * math.pi / 12))
        initial_conditions = probe_seeds(eqs, phase=phase)
    cycles = probe_cycles(params, initial_conditions, max_time)
    return RegionSignature(len(eqs), classes, sym, len(cycles),
                           tuple((round(c.x_amplitude, 6), c.stable) for c in cycles))
