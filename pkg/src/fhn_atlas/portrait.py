"""Phase portraits on the Poincare disc, written as SVG with a CSV sample table."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .compactification import Chart, antipode, infinite_equilibria
from .core import Params, to_polynomial
from .dynamics import Tolerances, integrate
from .equilibria import find_equilibria
from .errors import AtlasError, DomainError
from .parallel import thread_map

__all__ = [
    "DiscPoint", "project_to_disc", "sample_nullclines", "PortraitSpec",
    "PortraitResult", "render_portrait", "CANVAS", "DISC_RADIUS", "CLIP_RADIUS",
]

CANVAS = 1000
DISC_RADIUS = 480
CLIP_RADIUS = 0.999
CSV_HEADER = "traj_id,t,x,y,X,Y"


class DiscPoint(NamedTuple):
    """Point of the closed unit disc; the boundary circle is infinity."""

    X: float
    Y: float


def project_to_disc(s) -> DiscPoint:
    """Upper-hemisphere projection ``(x, y) / sqrt(1 + x^2 + y^2)``."""
    x, y = float(s[0]), float(s[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise DomainError("state must be finite")
    scale = math.hypot(1.0, math.hypot(x, y))
    return DiscPoint(x / scale, y / scale)


def sample_nullclines(params: Params, x_range: Tuple[float, float] = (-25.0, 25.0),
                      n: int = 801) -> Tuple[np.ndarray, np.ndarray]:
    """The cubic ``y = x^3/3 - x`` sampled uniformly in x, and the line ``x - a + b y = 0``.

    The line comes back as its two end points: over ``x_range`` when b != 0,
    or as the vertical segment ``x = a`` spanning the cubic's y-range when b = 0.
    """
    if n < 2:
        raise DomainError("need at least two samples")
    x0, x1 = x_range
    xs = np.linspace(x0, x1, n)
    cubic = np.column_stack([xs, xs**3 / 3.0 - xs])
    a, b = params.a, params.b
    if b != 0:
        line = np.array([[x0, (a - x0) / b], [x1, (a - x1) / b]])
    else:
        ylo, yhi = cubic[:, 1].min(), cubic[:, 1].max()
        line = np.array([[a, ylo], [a, yhi]])
    return cubic, line


@dataclass(frozen=True)
class PortraitSpec:
    params: Params
    initial_conditions: Optional[Tuple[Tuple[float, float], ...]] = None
    rings: Tuple[Tuple[int, float], ...] = ((12, 0.5), (12, 3.0))
    horizon: float = 30.0
    include_cycles: bool = True
    nullclines: bool = True
    nullclines_only: bool = False
    stroke_width: float = 1.2
    arrowheads: bool = True
    equator: bool = True

    def __post_init__(self):
        if not self.horizon > 0:
            raise DomainError("horizon must be positive")
        if not self.nullclines_only and not self.seeds():
            raise DomainError("at least one initial condition is required")

    def seeds(self) -> List[Tuple[float, float]]:
        if self.nullclines_only:
            return []
        if self.initial_conditions is not None:
            return [(float(x), float(y)) for x, y in self.initial_conditions]
        out = []
        for count, radius in self.rings:
            for k in range(count):
                th = 2 * math.pi * k / count
                out.append((radius * math.cos(th), radius * math.sin(th)))
        return out


@dataclass
class PortraitResult:
    svg: str
    csv: str
    errors: List[str] = field(default_factory=list)


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def _screen(X: float, Y: float) -> Tuple[float, float]:
    c = CANVAS / 2
    return c + DISC_RADIUS * X, c - DISC_RADIUS * Y


def _path_d(points: Sequence[Tuple[float, float]]) -> str:
    parts = []
    for i, (X, Y) in enumerate(points):
        sx, sy = _screen(X, Y)
        parts.append(f"{'M' if i == 0 else 'L'}{sx:.3f},{sy:.3f}")
    return " ".join(parts)


def _clip_run(states: np.ndarray) -> np.ndarray:
    """Leading part of the samples that stays inside the clip radius."""
    r = np.hypot(states[:, 0], states[:, 1])
    disc_r = r / np.sqrt(1.0 + r * r)
    bad = np.flatnonzero(disc_r > CLIP_RADIUS)
    return states if bad.size == 0 else states[: bad[0]]


def _trajectory(params: Params, s0, horizon: float):
    r_clip = CLIP_RADIUS / math.sqrt(1 - CLIP_RADIUS**2)

    def stop(t, y):
        return "escaped-radius" if math.hypot(y[0], y[1]) > r_clip else None

    tol = Tolerances(rtol=1e-8, atol=1e-10)
    fwd = integrate(params, s0, horizon, tol, stop=stop)
    bwd = integrate(params, s0, horizon, tol, backward=True, stop=stop)
    tb = -np.asarray(bwd.t)[::-1]
    sb = _clip_run(np.asarray(bwd.states))[::-1]
    tb = tb[len(tb) - len(sb):]
    sf = _clip_run(np.asarray(fwd.states))
    tf = np.asarray(fwd.t)[: len(sf)]
    return np.concatenate([tb, tf[1:]]), np.vstack([sb, sf[1:]])


_GLYPH_CLASS = {
    "stable-node": "eq-stable", "stable-focus": "eq-stable",
    "unstable-node": "eq-unstable", "unstable-focus": "eq-unstable",
    "saddle": "eq-saddle",
}


def _equilibrium_glyph(X, Y, cls: str) -> str:
    sx, sy = _screen(X, Y)
    r = 7
    if cls == "eq-stable":
        return f'<circle class="{cls}" cx="{sx:.3f}" cy="{sy:.3f}" r="{r}" fill="black" stroke="black"/>'
    if cls == "eq-saddle":
        return (f'<g class="{cls}"><path d="M{sx - r:.3f},{sy:.3f} A{r},{r} 0 0 1 {sx + r:.3f},{sy:.3f} Z" '
                f'fill="black"/><circle cx="{sx:.3f}" cy="{sy:.3f}" r="{r}" fill="none" stroke="black"/></g>')
    return f'<circle class="{cls}" cx="{sx:.3f}" cy="{sy:.3f}" r="{r}" fill="white" stroke="black"/>'


def _equator_points(params: Params) -> List[Tuple[float, float, str]]:
    fld = to_polynomial(params, exact_coeffs=True)
    out = []
    for eq in infinite_equilibria(fld):
        for e in (eq, antipode(eq, fld.degree)):
            if e.chart in (Chart.U1, Chart.V1):
                X, Y = 1.0, float(e.u)
            else:
                X, Y = float(e.u), 1.0
            if e.chart.is_v:
                X, Y = -X, -Y
            n = math.hypot(X, Y)
            out.append((X / n, Y / n, e.classification))
    return out


def render_portrait(spec: PortraitSpec) -> PortraitResult:
    params = spec.params
    seeds = spec.seeds()
    errors: List[str] = []

    def run(s0):
        try:
            return _trajectory(params, s0, spec.horizon)
        except AtlasError as exc:
            return exc

    trajs = thread_map(run, seeds)
    rows: List[Tuple[int, np.ndarray, np.ndarray, str]] = []
    for i, tr in enumerate(trajs):
        if isinstance(tr, Exception):
            errors.append(f"trajectory {i}: {type(tr).__name__}: {tr}")
            continue
        rows.append((i, tr[0], tr[1], "traj"))
    if spec.include_cycles and not spec.nullclines_only:
        from .atlas import probe_cycles, probe_seeds
        try:
            eqs = find_equilibria(params)
            for k, cyc in enumerate(probe_cycles(params, probe_seeds(eqs))):
                # one period from a point on the loop gives timed samples
                seg = integrate(params, cyc.points[0], cyc.period, Tolerances(1e-10, 1e-10))
                rows.append((len(seeds) + k, np.asarray(seg.t), np.asarray(seg.states), "cycle"))
        except AtlasError as exc:
            errors.append(f"cycle probe: {type(exc).__name__}: {exc}")

    csv = io.StringIO()
    csv.write(CSV_HEADER + "\n")
    for tid, t, states, _ in rows:
        for tt, (x, y) in zip(t, states):
            X, Y = project_to_disc((x, y))
            csv.write(",".join([str(tid), _fmt(tt), _fmt(x), _fmt(y), _fmt(X), _fmt(Y)]) + "\n")

    sw = spec.stroke_width
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{CANVAS}" height="{CANVAS}" '
        f'viewBox="0 0 {CANVAS} {CANVAS}">',
        f'<desc>phase portrait a={_fmt(params.a)} b={_fmt(params.b)} c={_fmt(params.c)}</desc>',
    ]
    if spec.arrowheads:
        out.append('<defs><marker id="arrow" viewBox="0 0 10 10" refX="5" refY="5" '
                   'markerWidth="6" markerHeight="6" orient="auto-start-reverse">'
                   '<path d="M0,0 L10,5 L0,10 z" fill="steelblue"/></marker></defs>')
    c = CANVAS / 2
    if spec.equator:
        out.append(f'<circle class="equator" cx="{c:.3f}" cy="{c:.3f}" r="{DISC_RADIUS}" '
                   f'fill="none" stroke="black" stroke-width="{2 * sw:g}"/>')
    if spec.nullclines or spec.nullclines_only:
        cubic, line = sample_nullclines(params)
        t = np.linspace(0.0, 1.0, 801)[:, None]
        dense_line = line[0] + t * (line[1] - line[0])
        for name, poly in (("nullcline-cubic", cubic), ("nullcline-line", dense_line)):
            pts = [project_to_disc(p) for p in poly]
            pts = [p for p in pts if math.hypot(*p) <= CLIP_RADIUS]
            out.append(f'<path class="nullcline {name}" d="{_path_d(pts)}" fill="none" '
                       f'stroke="gray" stroke-dasharray="6,4" stroke-width="{sw:g}"/>')
    marker = ' marker-end="url(#arrow)"' if spec.arrowheads else ""
    for tid, _, states, kind in rows:
        pts = [project_to_disc(p) for p in states]
        if len(pts) < 2:
            continue
        colour = "firebrick" if kind == "cycle" else "steelblue"
        width = 2 * sw if kind == "cycle" else sw
        out.append(f'<path class="{kind}" id="{kind}-{tid}" d="{_path_d(pts)}" fill="none" '
                   f'stroke="{colour}" stroke-width="{width:g}"{marker if kind == "traj" else ""}/>')
    for eq in find_equilibria(params):
        X, Y = project_to_disc(eq.location)
        out.append(_equilibrium_glyph(X, Y, _GLYPH_CLASS.get(eq.classification, "eq-other")))
    for X, Y, cls in _equator_points(params):
        sx, sy = _screen(X, Y)
        out.append(f'<rect class="inf-eq {cls}" x="{sx - 5:.3f}" y="{sy - 5:.3f}" width="10" '
                   f'height="10" fill="orange" stroke="black"/>')
    for msg in errors:
        out.append(f"<!-- {msg.replace('--', '- -')} -->")
    out.append("</svg>")
    return PortraitResult("\n".join(out) + "\n", csv.getvalue(), errors)
