"""Trajectories, limit cycles and separatrix shooting.

Integration uses an embedded Dormand-Prince 5(4) pair with a PI step-size
controller, written against plain numpy vectors so that several copies of
the planar system can share one step sequence.  Sharing steps keeps finite
differences of the return map smooth in the initial condition.

Backward time is handled through the reversal ``c -> -c``, which maps the
vector field to its negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .core import Params, State, divergence, eval_field, jacobian
from .equilibria import Equilibrium, find_equilibria
from .errors import (NoCycleFound, SectionNotReached, SeparatrixEscaped,
                     StepSizeUnderflow, DomainError)

__all__ = [
    "Tolerances", "OrbitSegment", "LimitCycle", "integrate", "dopri_steps",
    "find_limit_cycle", "floquet", "return_map", "winding_number",
    "separatrix_gap", "locate_double_homoclinic", "ESCAPE_RADIUS",
]

ESCAPE_RADIUS = 1e6
# smallest return-map slope the difference quotient resolves at step 1e-6
MULTIPLIER_FLOOR = 1e-8

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200,
               22 / 525, -1 / 40])


@dataclass(frozen=True)
class Tolerances:
    rtol: float = 1e-9
    atol: float = 1e-9
    max_steps: int = 2_000_000
    h_max: float = math.inf


@dataclass
class OrbitSegment:
    """Accepted integrator nodes of one trajectory.

    ``t`` is elapsed time in the direction of integration; ``direction`` is
    -1 for backward orbits.
    """

    t: np.ndarray
    states: np.ndarray
    accepted_steps: int
    rejected_steps: int
    terminal_reason: str
    direction: int = 1

    @property
    def final(self) -> State:
        return State(float(self.states[-1, 0]), float(self.states[-1, 1]))

    def __len__(self):
        return len(self.t)


@dataclass
class LimitCycle:
    period: float
    points: np.ndarray
    floquet_multiplier: float
    x_amplitude: float
    stable: bool
    section_x: float
    anchor: State
    residual: float
    divergence_multiplier: float
    multiplier_resolved: bool = True
    params: Params = field(repr=False, default=None)

    @property
    def max_abs_x(self) -> float:
        return float(np.max(np.abs(self.points[:, 0])))

    @property
    def centroid(self) -> Tuple[float, float]:
        pts = self.points[:-1]
        return float(pts[:, 0].mean()), float(pts[:, 1].mean())

    def to_json(self) -> dict:
        return {
            "period": self.period,
            "floquet_multiplier": self.floquet_multiplier,
            "x_amplitude": self.x_amplitude,
            "stable": self.stable,
        }


class _Stats:
    __slots__ = ("accepted", "rejected")

    def __init__(self):
        self.accepted = 0
        self.rejected = 0


def _rk_step(fun, t, y, f0, h):
    """One Dormand-Prince step; returns (y_new, f_new, error_vector)."""
    k = np.empty((7, y.size))
    k[0] = f0
    for s in range(1, 7):
        k[s] = fun(t + _C[s] * h, y + h * (_A[s] @ k[:s]))
    y_new = y + h * (_A[6] @ k[:6])
    k[6] = fun(t + h, y_new)
    return y_new, k[6], h * (_E @ k)


def _initial_step(fun, t, y, f0, rtol, atol):
    # floor keeps the heuristic finite for pure relative control
    scale = np.maximum(atol, 1e-12) + np.abs(y) * rtol
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y + h0 * f0
    f1 = fun(t + h0, y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def dopri_steps(fun: Callable, t0: float, y0, rtol: float = 1e-9,
                atol: float = 1e-9, t_end: float = math.inf,
                h_max: float = math.inf, max_steps: int = 2_000_000,
                stats: Optional[_Stats] = None
                ) -> Iterator[Tuple[float, np.ndarray, np.ndarray, float, np.ndarray, np.ndarray]]:
    """Yield accepted steps ``(t, y, f, t_new, y_new, f_new)``.

    The generator stops once ``t_end`` is reached; consumers may stop it
    earlier.  Raises :class:`StepSizeUnderflow` when the controller asks for a
    step below the floating-point resolution of ``t``.
    """
    stats = stats if stats is not None else _Stats()
    t = float(t0)
    y = np.array(y0, dtype=float)
    f = fun(t, y)
    h = min(_initial_step(fun, t, y, f, rtol, atol), h_max)
    err_prev = 1e-4
    steps = 0
    while t < t_end:
        if steps >= max_steps:
            return
        h = min(h, t_end - t, h_max)
        if h <= 4e-16 * max(1.0, abs(t)):
            raise StepSizeUnderflow(
                f"step size {h:.3e} underflowed at t={t:.6g}; the problem is "
                "too stiff for the explicit integrator, use the slow-fast "
                "stiff harness for epsilon-scaled systems")
        y_new, f_new, err = _rk_step(fun, t, y, f, h)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        e = math.sqrt(float(np.mean((err / scale) ** 2)))
        if not math.isfinite(e):
            stats.rejected += 1
            h *= 0.2
            continue
        if e <= 1.0:
            e = max(e, 1e-10)
            fac = 0.9 * e ** -0.17 * err_prev ** 0.08
            fac = min(5.0, max(0.2, fac))
            t_new = t + h if t_end - t - h > 1e-14 * max(1.0, abs(t_end)) else t_end
            stats.accepted += 1
            steps += 1
            yield t, y, f, t_new, y_new, f_new
            t, y, f = t_new, y_new, f_new
            err_prev = e
            h *= fac
        else:
            stats.rejected += 1
            h *= max(0.2, 0.9 * e ** -0.2)


def _planar(params: Params) -> Callable:
    a, b, c = params.a, params.b, params.c
    ic = 1.0 / c

    def fun(t, s):
        x, y = s[0], s[1]
        return np.array([c * (y - x * x * x / 3.0 + x), -(x - a + b * y) * ic])

    return fun


def _with_offsets(params: Params, h: float) -> Callable:
    """Base orbit, its divergence integral and two scaled neighbours.

    Layout ``[x, y, D, U+, V+, U-, V-]`` where the neighbour started at
    ``x +/- h`` sits at ``(x, y) +/- h (U, V)``.  The neighbour equations are
    the exact differences of the cubic field divided by ``h``, so nothing
    cancels when the orbits contract onto each other.
    """
    a, b, c = params.a, params.b, params.c
    ic = 1.0 / c

    def fun(t, Y):
        x, y = Y[0], Y[1]
        out = np.empty(7)
        out[0] = c * (y - x * x * x / 3.0 + x)
        out[1] = -(x - a + b * y) * ic
        out[2] = c - c * x * x - b * ic
        for k, sg in ((3, h), (5, -h)):
            u, v = Y[k], Y[k + 1]
            du = sg * u
            out[k] = c * (v - u * (3 * x * x + 3 * x * du + du * du) / 3.0 + u)
            out[k + 1] = -(u + b * v) * ic
        return out

    return fun


def integrate(params: Params, s0, t_end: float, tol: Tolerances = Tolerances(),
              backward: bool = False,
              stop: Optional[Callable[[float, np.ndarray], Optional[str]]] = None
              ) -> OrbitSegment:
    """Integrate from ``s0`` for elapsed time ``t_end``.

    ``stop(t, state)`` may return a terminal-reason string to end early.
    Orbits leaving the radius :data:`ESCAPE_RADIUS` end with ``escaped-radius``.
    """
    if not t_end > 0:
        raise DomainError("t_end must be positive")
    p = params.reversed() if backward else params
    fun = _planar(p)
    stats = _Stats()
    ts = [0.0]
    ys = [np.array(s0, dtype=float)]
    reason = "time-limit"
    for _, _, _, t1, y1, _ in dopri_steps(fun, 0.0, ys[0], tol.rtol, tol.atol,
                                          t_end, tol.h_max, tol.max_steps, stats):
        ts.append(t1)
        ys.append(y1)
        if abs(y1[0]) > ESCAPE_RADIUS or abs(y1[1]) > ESCAPE_RADIUS:
            reason = "escaped-radius"
            break
        if stop is not None:
            r = stop(t1, y1)
            if r:
                reason = r
                break
    return OrbitSegment(np.array(ts), np.array(ys), stats.accepted,
                        stats.rejected, reason, -1 if backward else 1)


def winding_number(points: np.ndarray, centre) -> float:
    """Signed number of turns the polyline makes around ``centre``."""
    d = points - np.asarray(centre, dtype=float)
    ang = np.arctan2(d[:, 1], d[:, 0])
    dang = np.diff(ang)
    dang = (dang + np.pi) % (2 * np.pi) - np.pi
    return float(dang.sum() / (2 * np.pi))


def _refine_crossing(fun, t, y, f, h, idx, level, g0, g1):
    """Time fraction and state where component ``idx`` equals ``level``."""
    s = h * g0 / (g0 - g1)
    ys = None
    for _ in range(8):
        ys, fs, _ = _rk_step(fun, t, y, f, s)
        g = ys[idx] - level
        ds = g / fs[idx] if fs[idx] != 0 else 0.0
        s_new = min(max(s - ds, 0.0), h)
        if abs(s_new - s) <= 1e-15 * max(1.0, h):
            s = s_new
            break
        s = s_new
    ys, _, _ = _rk_step(fun, t, y, f, s)
    return t + s, ys


@dataclass
class ReturnData:
    x_return: float
    time: float
    divergence_integral: float
    slope: float
    samples: np.ndarray


def return_map(params: Params, x0: float, anchor, fd_step: float = 1e-6,
               rtol: float = 1e-12, atol: float = 1e-12,
               t_max: float = 1e4) -> ReturnData:
    """First return to the section ``{y = y*, x > x*}`` through ``anchor``.

    Alongside the return point this yields the central difference
    ``(P(x0 + h) - P(x0 - h)) / 2h`` with ``h = fd_step``, computed from
    neighbour orbits that share the step sequence of the base orbit.
    """
    ystar = float(anchor[1])
    h = fd_step
    fun = _with_offsets(params, h)
    Y0 = np.array([float(x0), ystar, 0.0, 1.0, 0.0, 1.0, 0.0])
    sgn = -1.0 if params.c > 0 else 1.0  # sign of dy/dt on the section
    samples = [(Y0[0], Y0[1])]
    # neighbour offsets may contract by many orders of magnitude over one
    # turn, so they are controlled by relative error only
    atols = np.array([atol, atol, atol, 1e-300, 1e-300, 1e-300, 1e-300])
    for t, y, f, t1, y1, f1 in dopri_steps(fun, 0.0, Y0, rtol, atols, t_max):
        if abs(y1[0]) > ESCAPE_RADIUS or abs(y1[1]) > ESCAPE_RADIUS:
            raise NoCycleFound("return-map orbit escaped")
        g0, g1 = sgn * (y[1] - ystar), sgn * (y1[1] - ystar)
        if g0 < 0 <= g1:
            tc, yc = _refine_crossing(fun, t, y, f, t1 - t, 1, ystar,
                                      y[1] - ystar, y1[1] - ystar)
            samples.append((yc[0], ystar))
            fx, fy = fun(tc, yc)[:2]
            # each neighbour reaches the section after a time shift of order
            # h*V/fy; to first order its abscissa moves by fx times that shift
            dp = yc[3] - fx / fy * yc[4]
            dm = yc[5] - fx / fy * yc[6]
            slope = 0.5 * (dp + dm)
            return ReturnData(float(yc[0]), float(tc), float(yc[2]),
                              float(slope), np.array(samples))
        samples.append((y1[0], y1[1]))
    raise NoCycleFound("orbit did not return to the section")


def _stop_at_stable(eqs: List[Equilibrium], radius: float = 1e-6):
    sinks = [np.array(e.location) for e in eqs if e.stable]

    def stop(t, y):
        for s in sinks:
            if abs(y[0] - s[0]) < radius and abs(y[1] - s[1]) < radius:
                return "converged-to-point"
        return None

    return stop


def _enclosed(eqs: List[Equilibrium], tail: np.ndarray) -> List[Equilibrium]:
    return [e for e in eqs if abs(winding_number(tail, e.location)) > 0.5]


def find_limit_cycle(params: Params, s0, direction: str = "auto",
                     transient: float = 500.0, fd_step: float = 1e-6,
                     residual_tol: float = 1e-9, rtol: float = 1e-12,
                     atol: float = 1e-12) -> LimitCycle:
    """Locate the periodic orbit that attracts ``s0`` forward or backward in time.

    With ``direction="auto"`` forward time is tried first, then backward.
    """
    if direction not in ("auto", "forward", "backward"):
        raise DomainError(f"unknown direction {direction!r}")
    tries = {"auto": (False, True), "forward": (False,),
             "backward": (True,)}[direction]
    last: Exception = NoCycleFound("no attempt made")
    for backward in tries:
        try:
            return _find_cycle(params, s0, backward, transient, fd_step,
                               residual_tol, rtol, atol)
        except NoCycleFound as exc:
            last = exc
    raise last


def _find_cycle(params, s0, backward, transient, fd_step, residual_tol,
                rtol, atol) -> LimitCycle:
    p = params.reversed() if backward else params
    eqs = find_equilibria(params)
    eqs_p = find_equilibria(p)
    seg = integrate(params, s0, transient, Tolerances(1e-9, 1e-9),
                    backward=backward, stop=_stop_at_stable(eqs_p))
    if seg.terminal_reason != "time-limit":
        raise NoCycleFound(f"orbit {seg.terminal_reason}")
    # tail of the transient: long enough to make at least one turn
    tail = integrate(p, seg.final, 100.0, Tolerances(1e-10, 1e-10)).states
    inside = _enclosed(eqs, tail)
    if not inside:
        raise NoCycleFound("tail encloses no equilibrium")
    centroid = tail.mean(axis=0)
    anchor_eq = min(inside, key=lambda e: math.dist(e.location, centroid))
    xstar, ystar = anchor_eq.location
    # starting point on the section: last crossing of the tail
    xs_on = []
    sgn = -1.0 if p.c > 0 else 1.0
    for u, v in zip(tail[:-1], tail[1:]):
        g0, g1 = sgn * (u[1] - ystar), sgn * (v[1] - ystar)
        if g0 < 0 <= g1:
            w = g0 / (g0 - g1)
            xs_on.append(u[0] + w * (v[0] - u[0]))
    if not xs_on:
        raise NoCycleFound("tail never crosses the section")
    x = xs_on[-1]
    if x <= xstar:
        raise NoCycleFound("section crossing on the wrong side of the anchor")
    res = math.inf
    for _ in range(40):
        rd = return_map(p, x, (xstar, ystar), fd_step, rtol, atol)
        res = rd.x_return - x
        if abs(res) < 0.01 * residual_tol:
            break
        denom = rd.slope - 1.0
        if denom == 0:
            raise NoCycleFound("flat return map")
        dx = -res / denom
        room = 0.5 * (x - xstar)
        if abs(dx) > room:
            dx = math.copysign(room, dx)
        x += dx
        if x - xstar < 1e-6:
            raise NoCycleFound("return map collapsed onto the equilibrium")
    if abs(res) >= residual_tol:
        raise NoCycleFound(f"return-map Newton stalled at residual {res:.2e}")
    mult = rd.slope
    div_mult = math.exp(rd.divergence_integral)
    resolved = abs(mult) >= MULTIPLIER_FLOOR
    if not resolved:
        # below the floor the difference quotient is dominated by rounding in
        # the component along the flow; only the divergence integral is usable
        mult = div_mult
    if backward:
        mult, div_mult = 1.0 / mult, 1.0 / div_mult
    if not mult > 0:
        raise NoCycleFound("non-positive multiplier")
    samples = rd.samples
    pts = np.vstack([samples, samples[:1]])
    if backward:
        pts = pts[::-1].copy()
    # radius-3 sanity: reject tiny loops that are integration noise
    amp = float(pts[:, 0].max() - pts[:, 0].min())
    if amp < 1e-6:
        raise NoCycleFound("cycle amplitude below resolution")
    if not _enclosed(eqs, pts):
        raise NoCycleFound("converged loop encloses no equilibrium")
    return LimitCycle(period=rd.time, points=pts, floquet_multiplier=mult,
                      x_amplitude=amp, stable=mult < 1.0, section_x=x,
                      anchor=State(xstar, ystar), residual=abs(res),
                      divergence_multiplier=div_mult,
                      multiplier_resolved=resolved, params=params)


def floquet(params: Params, cycle: LimitCycle, fd_step: float = 1e-6,
            rtol: float = 1e-12, atol: float = 1e-12) -> float:
    """Nontrivial multiplier from a central difference of the return map."""
    return return_map(params, cycle.section_x, cycle.anchor, fd_step,
                      rtol, atol).slope


def divergence_multiplier(params: Params, cycle: LimitCycle,
                          rtol: float = 1e-12, atol: float = 1e-12) -> float:
    """``exp`` of the divergence integrated once around the cycle."""
    rd = return_map(params, cycle.section_x, cycle.anchor, rtol=rtol, atol=atol)
    return math.exp(rd.divergence_integral)


# separatrices of the origin (a = 0, b > 1)

def _saddle_directions(params: Params):
    J = jacobian(params, (0.0, 0.0))
    w, V = np.linalg.eig(J)
    iu, is_ = int(np.argmax(w.real)), int(np.argmin(w.real))
    vu, vs = V[:, iu].real, V[:, is_].real
    if vu[0] < 0:
        vu = -vu
    if vs[0] < 0:
        vs = -vs
    return vu / np.linalg.norm(vu), vs / np.linalg.norm(vs)


def _first_crossing(params, s0, backward, xsec, ylim, side, rtol, atol, t_max):
    """First crossing of ``x = xsec`` with ``side * (y - ylim) < 0``."""
    p = params.reversed() if backward else params
    fun = _planar(p)
    for t, y, f, t1, y1, f1 in dopri_steps(fun, 0.0, s0, rtol, atol, t_max):
        if abs(y1[0]) > ESCAPE_RADIUS or abs(y1[1]) > ESCAPE_RADIUS:
            raise SeparatrixEscaped("separatrix left the escape radius")
        g0, g1 = y[0] - xsec, y1[0] - xsec
        if g0 * g1 < 0 or (g1 == 0 and g0 != 0):
            _, yc = _refine_crossing(fun, t, y, f, t1 - t, 0, xsec, g0, g1)
            if side * (yc[1] - ylim) < 0:
                return float(yc[1])
    raise SectionNotReached("separatrix did not reach the section")


def separatrix_gap(params: Params, offset: float = 1e-7, branch: int = 1,
                   rtol: float = 1e-11, atol: float = 1e-13,
                   t_max: float = 200.0) -> float:
    """Signed gap between the unstable and stable separatrices of the origin.

    With ``branch=1`` the unstable branch leaving towards x > 0 is shot
    forward and the stable branch arriving from x > 0 is shot backward, both
    to their first crossing of the half-line ``x = x(E3), y < y(E3)``.  The
    gap is the difference of the crossing ordinates.  ``branch=-1`` shoots
    the mirror-image branches to the mirror half-line and reflects the
    result, so for a = 0 both branches give the same value.
    """
    if params.a != 0:
        raise DomainError("separatrix_gap requires a = 0")
    b = params.b
    if not b > 1:
        raise DomainError("the origin is a saddle only for b > 1")
    if branch not in (1, -1):
        raise DomainError("branch must be +1 or -1")
    vu, vs = _saddle_directions(params)
    x3 = math.sqrt(3.0 * (b - 1.0) / b)
    y3 = -x3 / b
    su, ss = branch * offset * vu, branch * offset * vs
    xsec, ylim = branch * x3, branch * y3
    yu = _first_crossing(params, su, False, xsec, ylim, branch, rtol, atol, t_max)
    ys = _first_crossing(params, ss, True, xsec, ylim, branch, rtol, atol, t_max)
    return branch * (yu - ys)


def locate_double_homoclinic(c: float, bracket: Tuple[float, float] = (1.30, 1.45),
                             tol: float = 1e-8, offset: float = 1e-7) -> float:
    """Bisection on :func:`separatrix_gap` in ``b`` at fixed ``c`` (a = 0)."""
    lo, hi = bracket
    glo = separatrix_gap(Params(0.0, lo, c), offset)
    ghi = separatrix_gap(Params(0.0, hi, c), offset)
    if glo * ghi > 0:
        raise DomainError(f"gap does not change sign on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gm = separatrix_gap(Params(0.0, mid, c), offset)
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)
