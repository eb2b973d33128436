from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from fhn_atlas import DomainError, Params, to_polynomial
from fhn_atlas.compactification import (BlowUpStep, Chart, antipode, characteristic_directions,
                                        classify_semihyperbolic, compactify, fhn_blowdown_chain,
                                        infinite_equilibria, linear_substitution, verify_step,
                                        vertical_blowup)
from fhn_atlas import compactification as comp
from fhn_atlas.errors import CenterManifoldOrderTooHigh, ChainMismatch
from fhn_atlas.polyfield import Poly, PolyField2, exact

u, v = sp.symbols("u v")
X, Y = sp.symbols("x y")


def _to_sympy(poly: Poly, s=u, t=v):
    return sum(sp.Rational(c.numerator, c.denominator) * s**i * t**j
               for (i, j), c in poly.terms.items())


def _same(poly: Poly, expr, s=u, t=v) -> bool:
    return sp.expand(_to_sympy(poly, s, t) - expr) == 0


def _sym_params(p):
    return tuple(sp.Rational(exact(x).numerator, exact(x).denominator) for x in p.as_tuple())


def _sym_field(p):
    a, b, c = _sym_params(p)
    return c * (Y - (X**3 / 3 - X)), -(X - a + b * Y) / c


# chart fields from the coordinate change itself, not from the monomial rule
def _sympy_chart(P, Q, d, chart):
    if chart == "U1":
        sub = {X: 1 / v, Y: u / v}
        udot = (Q - (Y / X) * P) / X   # u = y/x
        vdot = -P / X**2               # v = 1/x
    else:
        sub = {X: u / v, Y: 1 / v}
        udot = (P - (X / Y) * Q) / Y   # u = x/y
        vdot = -Q / Y**2               # v = 1/y
    scale = v ** (d - 1)
    return (sp.expand(sp.simplify(scale * udot.subs(sub, simultaneous=True))),
            sp.expand(sp.simplify(scale * vdot.subs(sub, simultaneous=True))))


@pytest.mark.parametrize("p", [Params(0, 1, 1), Params(0.5, -2.0, 1.5), Params(-1.25, 0.75, -3.0)])
@pytest.mark.parametrize("chart", ["U1", "U2"])
def test_chart_fields_match_sympy(p, chart):
    fld = to_polynomial(p, exact_coeffs=True)
    got = compactify(fld, chart).field
    P, Q = _sym_field(p)
    want = _sympy_chart(P, Q, 3, chart)
    assert _same(got.P, want[0]) and _same(got.Q, want[1])


def test_generic_field_chart_and_antipodal_sign():
    # degree 2 field: the V charts flip the field
    fld = PolyField2.from_coeffs({(2, 0): Fraction(1), (0, 1): Fraction(-2)},
                                 {(1, 1): Fraction(3), (0, 0): Fraction(1)})
    P = X**2 - 2 * Y
    Q = 3 * X * Y + 1
    for k in (1, 2):
        got = compactify(fld, f"U{k}").field
        want = _sympy_chart(P, Q, 2, f"U{k}")
        assert _same(got.P, want[0]) and _same(got.Q, want[1])
        vf = compactify(fld, f"V{k}").field
        assert _same(vf.P, -want[0]) and _same(vf.Q, -want[1])
    with pytest.raises(DomainError):
        compactify(PolyField2(Poly(), Poly()), "U1")


@pytest.mark.parametrize("p", [Params(0, 1, 1), Params(0.3, -2, 2), Params(1, 0, -0.5)])
def test_infinite_equilibria_of_the_family(p):
    eqs = infinite_equilibria(to_polynomial(p, exact_coeffs=True))
    c = exact(p.c)
    assert [e.chart for e in eqs] == [Chart.U1, Chart.U2]
    assert eqs[0].eigenvalues == (c / 3, c / 3)
    assert eqs[0].classification == ("node-unstable" if p.c > 0 else "node-stable")
    assert eqs[1].classification == "linearly-zero"
    anti = antipode(eqs[0], 3)
    assert anti.chart is Chart.V1 and anti.eigenvalues == eqs[0].eigenvalues


def test_antipode_flips_stability_in_even_degree():
    fld = PolyField2.from_coeffs({(1, 0): Fraction(1)}, {(2, 0): Fraction(1), (0, 2): Fraction(-1)})
    eqs = infinite_equilibria(fld)
    for e in eqs:
        a = antipode(e, fld.degree)
        assert tuple(sorted(a.eigenvalues)) == tuple(sorted(-z for z in e.eigenvalues))


def test_characteristic_directions():
    # x' = x, y' = 2y: T = x1 * 2 x2 - x2 * x1 = x1 x2
    cd = characteristic_directions(PolyField2.from_coeffs({(1, 0): Fraction(1)},
                                                          {(0, 1): Fraction(2)}))
    assert not cd.degenerate
    assert sorted(cd.angles) == pytest.approx([0.0, np.pi / 2])
    # radial field: every direction is characteristic
    radial = PolyField2.from_coeffs({(1, 0): Fraction(1)}, {(0, 1): Fraction(1)})
    assert characteristic_directions(radial).degenerate


@pytest.mark.parametrize("P,Q,cls,order", [
    ({(2, 0): 1}, {(0, 1): -1}, "saddle-node", 2),
    ({(3, 0): 1}, {(0, 1): -1}, "saddle", 3),
    ({(3, 0): -1}, {(0, 1): -1}, "node-stable", 3),
    ({(3, 0): 1}, {(0, 1): 1}, "node-unstable", 3),
    # centre manifold y = x^2 bends the reduced flow: x' = x y -> x^3
    ({(1, 1): 1}, {(0, 1): -1, (2, 0): 1}, "saddle", 3),
])
def test_semihyperbolic_textbook_cases(P, Q, cls, order):
    fld = PolyField2.from_coeffs({k: Fraction(w) for k, w in P.items()},
                                 {k: Fraction(w) for k, w in Q.items()})
    res = classify_semihyperbolic(fld, (0, 0))
    assert (res.classification, res.order) == (cls, order)


def test_semihyperbolic_gives_up_beyond_max_order():
    fld = PolyField2.from_coeffs({(7, 0): Fraction(1)}, {(0, 1): Fraction(-1)})
    with pytest.raises(CenterManifoldOrderTooHigh):
        classify_semihyperbolic(fld, (0, 0))


# independent chain in sympy for the chart U2 origin
def _blow(F, G):
    Fu = sp.expand(F.subs(v, u * v))
    return Fu, sp.expand((G.subs(v, u * v) - v * Fu) / u)


def _div(F, G):
    return sp.expand(sp.cancel(F / u)), sp.expand(sp.cancel(G / u))


def _lin(F, G, M):
    s, t = sp.symbols("s t")
    sub = {u: M[0][0] * s + M[0][1] * t + M[0][2], v: M[1][0] * s + M[1][1] * t + M[1][2]}
    inv = sp.Matrix([[M[0][0], M[0][1]], [M[1][0], M[1][1]]]).inv()
    nf = inv * sp.Matrix([F.subs(sub, simultaneous=True), G.subs(sub, simultaneous=True)])
    back = {s: u, t: v}
    return sp.expand(nf[0].subs(back, simultaneous=True)), sp.expand(nf[1].subs(back, simultaneous=True))


def _sympy_chain(p):
    P, Q = _sym_field(p)
    F, G = _sympy_chart(P, Q, 3, "U2")
    F, G = _div(*_blow(F, G))
    F, G = _lin(F, G, [[1, -1, 0], [0, 1, 0]])
    F, G = _div(*_blow(F, G))
    s3 = (F, G)
    F, G = _lin(F, G, [[1, 0, 0], [0, 1, 1]])
    F, G = _lin(F, G, [[1, -1, 0], [0, 1, 0]])
    F, G = _div(*_blow(F, G))
    return s3, (F, G)


def _trunc(expr, n):
    poly = sp.Poly(sp.expand(expr), u)
    return sum(c * u**m for (m,), c in poly.terms() if m <= n)


def _compose_truncated(F, hv, n):
    """``F(u, hv(u))`` up to ``u**n``."""
    poly = sp.Poly(F, u, v)
    powers = [sp.Integer(1)]
    for _ in range(poly.degree(v)):
        powers.append(_trunc(powers[-1] * hv, n))
    return _trunc(sum(c * u**i * powers[j] for (i, j), c in poly.terms()), n)


def _sympy_center_manifold(F, G, order=5):
    """Leading term of the reduced flow on the graph ``v = 3/2 + h(u)``, order by order."""
    h = sp.Symbol("h")
    hv = sp.Rational(3, 2)
    for k in range(1, order):
        trial = hv + h * u**k
        eqn = sp.diff(trial, u) * _compose_truncated(F, trial, k) - _compose_truncated(G, trial, k)
        co = sp.expand(eqn).coeff(u, k)
        hv = hv + sp.solve(co, h)[0] * u**k
    red = _compose_truncated(F, hv, order)
    for k in range(1, order + 1):
        if red.coeff(u, k) != 0:
            return k, red.coeff(u, k)
    return None, 0


@pytest.mark.parametrize("p", [Params(0, 1, 1), Params(0.75, -1.5, 2), Params(0.75, 0.0, 2),
                               Params(-0.25, 2.5, -1.5)])
def test_chain_matches_sympy(p):
    chain = fhn_blowdown_chain(p)
    s3, s6 = _sympy_chain(p)
    assert _same(chain.step("s3").result.P, s3[0])
    assert _same(chain.step("s3").result.Q, s3[1])
    assert _same(chain.step("s6-full").result.P, s6[0])
    assert _same(chain.step("s6-full").result.Q, s6[1])


@pytest.mark.parametrize("p", [Params(0, 1, 1), Params(0.75, -1.5, 2), Params(0.75, 0.0, 2),
                               Params(-0.25, 2.5, -1.5), Params(0.0, 0.0, -1.5)])
def test_center_manifold_matches_sympy(p):
    _, (F, G) = _sympy_chain(p)
    order, coef = _sympy_center_manifold(F, G)
    e6 = fhn_blowdown_chain(p).e6
    assert e6.order == order
    assert sp.Rational(e6.coefficient.numerator, e6.coefficient.denominator) == coef
    b, c = exact(p.b), exact(p.c)
    if b != 0:
        assert e6.coefficient == -b / (8 * c)
    else:
        assert e6.coefficient == Fraction(-3, 32) / c


def test_e6_classes_from_the_derived_flow():
    cls = {(b, c): fhn_blowdown_chain(Params(0.2, b, c)).point("E6~").classification
           for b in (-1.0, 0.0, 1.0) for c in (-1.5, 2.0)}
    assert cls[(1.0, 2.0)] == cls[(1.0, -1.5)] == "saddle"
    assert cls[(0.0, 2.0)] == cls[(0.0, -1.5)] == "saddle"
    assert cls[(-1.0, 2.0)] == "node-unstable"
    assert cls[(-1.0, -1.5)] == "node-stable"


def test_tilde_points():
    chain = fhn_blowdown_chain(Params(0.3, 0.4, 2.0))
    c = Fraction(2)
    assert chain.point("E1~").eigenvalues == (-c / 3, 2 * c / 3)
    assert chain.point("E1~").classification == "saddle"
    assert chain.point("E4~").eigenvalues == (-c, 3 * c)
    assert chain.point("E5~").eigenvalues == (-c, 2 * c / 3)
    assert chain.point("E6~").eigenvalues == (0, 3 * c / 2)
    with pytest.raises(KeyError):
        chain.point("E9~")


def test_display_checks():
    status = {d.label: d.status for d in fhn_blowdown_chain(Params(0.0, 1.3, 2.0)).display}
    for key in ("chart", "s1-raw", "s1", "s2", "s3", "s6"):
        assert status[key] == "match", key
    assert status["s4"] == "not-transcribed"
    status = {d.label: d.status for d in fhn_blowdown_chain(Params(0.5, 1.3, 2.0)).display}
    assert status["s5"] == "mismatch"


def test_verify_step_detects_a_wrong_result():
    fld = to_polynomial(Params(0.2, 1.1, 1.3), exact_coeffs=True)
    good = linear_substitution(fld, ((1, -1), (0, 1)))
    assert verify_step(good) < 1e-12
    bad = BlowUpStep(good.kind, good.parameters, good.parent, good.result.scale(Fraction(11, 10)))
    assert verify_step(bad) > 1e-3
    blown = vertical_blowup(compactify(fld, "U2").field)
    assert verify_step(blown) < 1e-12


def test_chain_mismatch_reports_the_step(monkeypatch):
    real = comp._raw_chain

    def corrupt(params):
        u2, steps = real(params)
        st = steps[3]
        steps[3] = BlowUpStep(st.kind, st.parameters, st.parent, st.result.scale(2), label=st.label)
        return u2, steps

    monkeypatch.setattr(comp, "_raw_chain", corrupt)
    with pytest.raises(ChainMismatch) as info:
        fhn_blowdown_chain(Params(0.1, 1.0, 1.0))
    assert info.value.step_index == 3 and info.value.residual > 1e-9
