"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the terminal summary.  Criteria with several parts report every part in the
bracketed detail and pass only if all parts pass.
"""

import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from _report import report
from oracles import VDP_MAX_ABS_X
from fhn_atlas import Params, closed_form_eigenvalues, find_equilibria, jacobian
from fhn_atlas.atlas import (CASE_CURVES, CurveId, classify_region, curve_ordering_check,
                             eval_curve, first_lyapunov, hopf_condition_caseC)
from fhn_atlas.compactification import (Chart, compactify, fhn_blowdown_chain,
                                        infinite_equilibria)
from fhn_atlas.core import to_polynomial
from fhn_atlas.dynamics import find_limit_cycle, locate_double_homoclinic
from fhn_atlas.polyfield import PolyField2, exact
from fhn_atlas.slowfast import (CASE_A_INPUTS, CASE_B_INPUTS, canard_coefficients,
                                canard_curve, verify_canard)


def _parts(items):
    return "; ".join(f"{name}: {'ok' if ok else 'FAILED'} ({info})" for name, ok, info in items)


def _near_curve(b, c):
    if abs(b) < 1e-3 or abs(b - 1) < 1e-3:
        return True
    for cid in CASE_CURVES["A"]:
        for sign in ((1, -1) if cid is CurveId.TF1 else (1,)):
            v = eval_curve(cid, c, sign=sign).value
            if math.isfinite(v) and abs(b - v) < 1e-3:
                return True
    return False


def test_criterion_01_eigenvalue_closed_forms():
    t0 = time.perf_counter()
    cs = np.concatenate([np.linspace(-2, -0.1, 25), np.linspace(0.1, 2, 25)])
    worst, count = 0.0, 0
    for b in np.linspace(-4, 4, 50):
        for c in cs:
            b, c = float(b), float(c)
            if _near_curve(b, c):
                continue
            p = Params(0.0, b, c)
            for e in find_equilibria(p):
                closed = closed_form_eigenvalues(p, e.label)
                num = sorted(np.linalg.eigvals(jacobian(p, e.location)),
                             key=lambda z: (z.real, z.imag))
                worst = max(worst, max(abs(complex(u) - complex(v)) for u, v in zip(closed, num)))
                count += 1
    elapsed = time.perf_counter() - t0
    ok = report(1, "eigenvalue closed forms", worst < 1e-10 and elapsed < 5,
                f"{count} equilibria, max error {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_02_double_zero_point():
    p = Params(0.0, 1.0, 1.0)
    J = jacobian(p, (0.0, 0.0))
    eigs = [e for e in find_equilibria(p) if e.label == "E1"][0].eigenvalues
    closed = closed_form_eigenvalues(p, "E1")
    jac_ok = np.array_equal(J, np.array([[1.0, 1.0], [-1.0, -1.0]]))
    eig_ok = all(abs(z) < 1e-12 for z in (*eigs, *closed))
    ok = report(2, "double-zero point", jac_ok and eig_ok,
                f"J={J.tolist()}, max |lambda|={max(abs(z) for z in (*eigs, *closed)):.1e}")
    assert ok


def _trace_at(p, label=None):
    eqs = find_equilibria(p)
    e = eqs[0] if label is None else [q for q in eqs if q.label == label][0]
    return e.trace


def test_criterion_03_hopf_trace_residuals():
    t0 = time.perf_counter()
    worst = {}
    cs1 = np.concatenate([np.linspace(-0.95, -0.05, 25), np.linspace(0.05, 0.95, 25)])
    worst["TH1"] = max(abs(_trace_at(Params(0.0, c * c, c), "E1")) for c in map(float, cs1))
    cs23 = np.linspace(1.05, 5.0, 50)
    res = []
    for c in map(float, cs23):
        b = c * (-c + math.sqrt(c * c + 3))
        assert b > 1
        res.append(abs(_trace_at(Params(0.0, b, c), "E3")))
        res.append(abs(_trace_at(Params(0.0, b, c), "E2")))
    worst["TH23"] = max(res)
    csb = np.concatenate([np.linspace(-3, -0.1, 25), np.linspace(0.1, 3, 25)])
    worst["a=+-1"] = max(abs(_trace_at(Params(s, 0.0, float(c)))) for c in csb for s in (1.0, -1.0))
    rng = np.random.default_rng(3)
    res, n = [], 0
    while n < 50:
        a, b = float(rng.uniform(0.02, 0.6)), float(rng.uniform(0.05, 0.95))
        h = hopf_condition_caseC(Params(a, b, 1.0))
        if h.c_critical is None:
            continue
        res.append(abs(_trace_at(Params(a, b, h.c_critical))))
        n += 1
    worst["caseC"] = max(res)
    elapsed = time.perf_counter() - t0
    ok = all(v < 1e-10 for v in worst.values()) and elapsed < 2
    ok = report(3, "Hopf-curve trace residuals", ok,
                ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", {elapsed:.2f} s")
    assert ok


def test_criterion_04_lyapunov_coefficients():
    parts = []
    for c in (0.3, 0.5, 0.7):
        p = Params(0.0, c * c, c)
        e = [q for q in find_equilibria(p) if q.label == "E1"][0]
        l = first_lyapunov(p, e).l
        want = c / (32 * (c * c - 1))
        # b below c^2 makes the origin unstable: the side of a supercritical cycle
        cyc = find_limit_cycle(Params(0.0, c * c - 0.02, c), (0.05, 0.0))
        contraction = math.log(cyc.floquet_multiplier)
        parts.append((f"A c={c}", abs(l - want) < 1e-9 and np.sign(l) == np.sign(contraction),
                      f"l={l:.6g}, log multiplier {contraction:.3g}"))
    for c in (1.0, 2.0, 4.0):
        p = Params(1.0, 0.0, c)
        l = first_lyapunov(p, find_equilibria(p)[0]).l
        want = -c / 32
        a = 1.0 - 0.02
        cyc = find_limit_cycle(Params(a, 0.0, c), (a + 0.05, a**3 / 3 - a))
        contraction = math.log(cyc.floquet_multiplier)
        parts.append((f"B c={c}", abs(l - want) < 1e-9 and np.sign(l) == np.sign(contraction),
                      f"l={l:.6g}, log multiplier {contraction:.3g}"))
    ok = report(4, "first Lyapunov coefficients", all(p[1] for p in parts), _parts(parts))
    assert ok


def test_criterion_05_pitchfork():
    below = find_equilibria(Params(0.0, 0.99, 2.0))
    above = find_equilibria(Params(0.0, 1.01, 2.0))
    b = 1.01
    xs = math.sqrt(3 * (b - 1) / b)
    want = {"E2": (-xs, xs / b), "E3": (xs, -xs / b)}
    err = max(math.dist(e.location, want[e.label]) for e in above if e.label in want)
    ok = len(below) == 1 and len(above) == 3 and err < 1e-12
    ok = report(5, "pitchfork at b = 1", ok,
                f"{len(below)} equilibria at b=0.99, {len(above)} at b=1.01, error {err:.1e}")
    assert ok


def test_criterion_06_curve_ordering():
    parts = []
    for c in (2, 3, 5, 10):
        chk = curve_ordering_check(c)
        parts.append((f"c={c}", chk.holds, ", ".join(f"{v:.5f}" for v in chk.values)))
    limits = [(CurveId.TF23_minus, 1.5), (CurveId.TH23, 1.5), (CurveId.DH, 1.7)]
    for cid, target in limits:
        v = eval_curve(cid, 1e3).value
        parts.append((f"{cid.value}(1e3)", abs(v - target) < 1e-2, f"{v:.5f} vs {target}"))
    ok = report(6, "curve ordering and large-c limits", all(p[1] for p in parts), _parts(parts))
    assert ok


def test_criterion_07_double_homoclinic():
    t0 = time.perf_counter()
    b_h = locate_double_homoclinic(2.0)
    elapsed = time.perf_counter() - t0
    dh = eval_curve(CurveId.DH, 2.0).value
    ok = abs(b_h - dh) < 2e-2 and elapsed < 30
    ok = report(7, "double homoclinic near DH", ok,
                f"bisection b={b_h:.6f}, DH(2)={dh:.6f}, gap {abs(b_h - dh):.4f}, {elapsed:.1f} s")
    assert ok


def test_criterion_08_bendixson():
    cs = np.concatenate([np.linspace(-2, -0.2, 5), np.linspace(0.2, 2, 5)])
    offsets = np.linspace(0.1, 2.0, 10)
    found = []
    for c in map(float, cs):
        for d in map(float, offsets):
            sig = classify_region(Params(0.0, c * c + d, c), probe=True)
            if sig.limit_cycle_count:
                found.append((c, c * c + d, sig.limit_cycle_count))
    ok = report(8, "Bendixson region has no cycles", not found,
                f"100 grid points, cycles at {found}" if found else "100 grid points, 0 cycles")
    assert ok


def test_criterion_09_canards():
    t0 = time.perf_counter()
    eps = 0.01
    da, db = canard_coefficients(CASE_A_INPUTS), canard_coefficients(CASE_B_INPUTS)
    parts = [
        ("A,B case A", (da.A, da.B) == (Fraction(-1, 2), Fraction(-3, 4)), f"A={da.A}, B={da.B}"),
        ("A case B", db.A == 1, f"A={db.A}"),
    ]
    b_c = canard_curve("A", eps)
    at_bc = verify_canard("A", eps, b_c).tracked_slow_time
    at_16 = verify_canard("A", eps, 1.6).tracked_slow_time
    parts.append((f"tracked at b={b_c:g}", at_bc >= 0.5, f"{at_bc:.3f}"))
    parts.append(("tracked at b=1.6", at_16 < 0.1, f"{at_16:.3f}"))
    grid = b_c + eps * np.arange(-5, 6)
    tracked = [verify_canard("A", eps, float(b)).tracked_slow_time for b in grid]
    peak = float(grid[int(np.argmax(tracked))])
    parts.append(("grid maximum", abs(peak - b_c) <= eps * (1 + 1e-9),
                  f"max {max(tracked):.3f} at b={peak:.4f}"))
    elapsed = time.perf_counter() - t0
    parts.append(("runtime", elapsed < 60, f"{elapsed:.1f} s"))
    ok = report(9, "canard coefficients and tracking", all(p[1] for p in parts), _parts(parts))
    assert ok


# sign table for the centre-manifold point of the last blow-up chart
_E6_TABLE = {
    (1, 1): "saddle", (1, -1): "saddle",
    (-1, -1): "node-unstable", (-1, 1): "node-stable",
    (0, 1): "node-stable", (0, -1): "node-stable",
}


def test_criterion_10_compactification():
    parts = []
    rng = np.random.default_rng(10)
    ok_u1 = True
    for _ in range(10):
        a, b = (float(v) for v in rng.uniform(-3, 3, 2))
        c = float(rng.choice([-1, 1]) * rng.uniform(0.2, 3))
        A, B, C = exact(a), exact(b), exact(c)
        u1 = compactify(to_polynomial(Params(a, b, c), exact_coeffs=True), Chart.U1).field
        shown = PolyField2.from_coeffs(
            {(2, 2): -C, (1, 2): -B / C - C, (0, 3): A / C, (0, 2): -1 / C, (1, 0): C / 3},
            {(1, 3): -C, (0, 3): -C, (0, 1): C / 3})
        ok_u1 &= u1.P == shown.P and u1.Q == shown.Q
    parts.append(("U1 field", ok_u1, "10 random triples, exact"))

    ok_inf = True
    for a, b, c in ((0.0, 1.0, 1.0), (0.4, -2.0, -1.5), (-1.0, 0.0, 2.0)):
        eqs = infinite_equilibria(to_polynomial(Params(a, b, c), exact_coeffs=True))
        C = exact(c)
        u1 = [e for e in eqs if e.chart is Chart.U1]
        u2 = [e for e in eqs if e.chart is Chart.U2]
        ok_inf &= (len(eqs) == 2 and len(u1) == 1 and u1[0].u == 0
                   and tuple(u1[0].eigenvalues) == (C / 3, C / 3)
                   and len(u2) == 1 and u2[0].u == 0 and tuple(u2[0].eigenvalues) == (0, 0))
    parts.append(("infinite equilibria", ok_inf, "U1 origin (c/3, c/3) and degenerate U2 origin"))

    worst, ok_chain, ok_eigs = 0.0, True, True
    for k in range(50):
        a, b = (float(v) for v in rng.uniform(-3, 3, 2))
        c = float(rng.choice([-1, 1]) * rng.uniform(0.2, 3))
        chain = fhn_blowdown_chain(Params(a, b, c), seed=k)
        worst = max(worst, max(chain.residuals))
        ok_chain &= all(r < 1e-9 for r in chain.residuals)
        C = exact(c)
        want = {"E4~": (-C, 3 * C), "E5~": (2 * C / 3, -C), "E6~": (0, 3 * C / 2)}
        for name, pair in want.items():
            ok_eigs &= sorted(chain.point(name).eigenvalues) == sorted(pair)
    parts.append(("chain residuals", ok_chain, f"50 triples, max {worst:.1e}"))
    parts.append(("E4~/E5~/E6~ eigenvalues", ok_eigs, "exact"))

    mism = []
    for b in (-1.0, 0.0, 1.0):
        for c in (-1.5, 1.0, 2.0):
            got = fhn_blowdown_chain(Params(0.5, b, c)).point("E6~").classification
            want = _E6_TABLE[(int(np.sign(b)), int(np.sign(c)))]
            if got != want:
                mism.append(f"b={b:g},c={c:g}: {got} vs {want}")
    parts.append(("E6~ table", not mism, "; ".join(mism) if mism else "9 samples agree"))
    ok = report(10, "compactification and blow-up chain", all(p[1] for p in parts), _parts(parts))
    assert ok


def test_criterion_11_van_der_pol():
    cyc = find_limit_cycle(Params(0.0, 0.0, 1.0), (0.5, 0.0))
    rel = abs(cyc.max_abs_x - VDP_MAX_ABS_X) / VDP_MAX_ABS_X
    ok = report(11, "Van der Pol cycle", cyc.stable and rel < 0.01,
                f"max|x|={cyc.max_abs_x:.6f} vs oracle {VDP_MAX_ABS_X:.6f}, stable={cyc.stable}")
    assert ok


_CLI_RUNS = {
    "classify": ["classify", "--a", "0", "--b", "0.5", "--c", "1", "--probe-cycles"],
    "curves": ["curves", "--case", "A", "--c-min", "-2", "--c-max", "2", "--steps", "9"],
    "region-sweep": ["region-sweep", "--case", "A", "--b-range", "0.5", "3",
                     "--c-range", "0.5", "2", "--grid", "2", "--probe-cycles"],
    "canard": ["canard", "--case", "A", "--eps", "0.01", "--verify"],
    "infinity": ["infinity", "--a", "0.3", "--b", "-1", "--c", "2"],
    "portrait": ["portrait", "--a", "0", "--b", "0.5", "--c", "1", "--horizon", "10"],
    "verify-chain": ["verify-chain", "--a", "1", "--b", "2", "--c", "-3"],
}


def _run_cli(argv, tmp):
    extra = []
    if argv[0] == "portrait":
        extra = ["--out", str(tmp / "p.svg"), "--csv", str(tmp / "p.csv")]
    proc = subprocess.run([sys.executable, "-m", "fhn_atlas", *argv, *extra],
                          capture_output=True, check=False, cwd=tmp)
    blobs = [proc.returncode, proc.stdout, proc.stderr]
    if argv[0] == "portrait":
        blobs += [(tmp / "p.svg").read_bytes(), (tmp / "p.csv").read_bytes()]
    return blobs


def test_criterion_12_determinism(tmp_path):
    parts = []
    for name, argv in _CLI_RUNS.items():
        first = _run_cli(argv, tmp_path)
        second = _run_cli(argv, tmp_path)
        parts.append((name, first == second and first[0] == 0, f"exit {first[0]}"))
    ok = report(12, "CLI determinism", all(p[1] for p in parts), _parts(parts))
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
