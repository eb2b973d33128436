"""Command-line entry point: ``fhn-atlas <subcommand> ...``.

JSON goes to stdout (or ``--output``), CSV for the tabular subcommands.
Argument errors exit with status 2, computational failures with status 1;
both print a one-line JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .atlas import CASE_CURVES, CurveId, classify_region, eval_curve
from .compactification import (antipode, fhn_blowdown_chain, infinite_equilibria)
from .core import Params, to_polynomial
from .equilibria import find_equilibria
from .errors import AtlasError, ChainMismatch
from .parallel import thread_map
from .portrait import PortraitSpec, render_portrait
from .slowfast import canard_curve, verify_canard

__all__ = ["main", "build_parser", "run"]


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def _decimal(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal number: {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return value


def _nonzero_c(text: str) -> float:
    value = _decimal(text)
    if value == 0:
        raise argparse.ArgumentTypeError(
            "c = 0 is outside the model's domain (the field divides by c)")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--a", type=_decimal, required=True)
    p.add_argument("--b", type=_decimal, required=True)
    p.add_argument("--c", type=_nonzero_c, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fhn-atlas", description="Numerical atlas of the FitzHugh-Nagumo family.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--output", help="write the main output here instead of stdout")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized probes (default 0)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="equilibria and region signature")
    _add_params(p)
    p.add_argument("--probe-cycles", action="store_true")

    p = sub.add_parser("curves", help="bifurcation and transition curves as CSV")
    p.add_argument("--case", choices=sorted(CASE_CURVES), required=True)
    p.add_argument("--c-min", type=_decimal, required=True)
    p.add_argument("--c-max", type=_decimal, required=True)
    p.add_argument("--steps", type=_positive_int, required=True)
    p.add_argument("--a", type=_decimal, default=0.5, help="a for the case C Hopf curve")

    p = sub.add_parser("region-sweep", help="region signatures over a (b, c) grid as CSV")
    p.add_argument("--case", choices=["A"], required=True)
    p.add_argument("--b-range", type=_decimal, nargs=2, required=True, metavar=("B0", "B1"))
    p.add_argument("--c-range", type=_decimal, nargs=2, required=True, metavar=("C0", "C1"))
    p.add_argument("--grid", type=_positive_int, required=True)
    p.add_argument("--probe-cycles", action="store_true")

    p = sub.add_parser("canard", help="asymptotic canard parameter")
    p.add_argument("--case", choices=["A", "B"], required=True)
    p.add_argument("--eps", type=_decimal, required=True)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--param", type=_decimal, help="parameter for --verify (default: the canard value)")

    p = sub.add_parser("infinity", help="infinite equilibria and the blow-up chain")
    _add_params(p)

    p = sub.add_parser("portrait", help="Poincare-disc portrait as SVG (and CSV)")
    _add_params(p)
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.add_argument("--horizon", type=_decimal, default=30.0)
    p.add_argument("--nullclines-only", action="store_true")
    p.add_argument("--no-cycles", action="store_true")

    p = sub.add_parser("verify-chain", help="per-step residuals of the blow-up chain")
    _add_params(p)
    p.add_argument("--samples", type=_positive_int, default=20)
    return parser


def _params(ns) -> Params:
    return Params(ns.a, ns.b, ns.c)


def _params_json(p: Params) -> dict:
    return {"a": p.a, "b": p.b, "c": p.c}


def _cmd_classify(ns) -> dict:
    p = _params(ns)
    eqs = find_equilibria(p)
    region = classify_region(p, probe=ns.probe_cycles, seed=ns.seed)
    return {"command": "classify", "params": _params_json(p),
            "equilibria": [e.to_json() for e in eqs], "region": region.to_json()}


def _fmt(v: float) -> str:
    return "nan" if math.isnan(v) else repr(float(v))


def _cmd_curves(ns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["curve_id", "c", "value", "valid"])
    cs = np.linspace(ns.c_min, ns.c_max, ns.steps) if ns.steps > 1 else np.array([ns.c_min])
    for cid in CASE_CURVES[ns.case]:
        signed = cid in (CurveId.TF1, CurveId.TFb0)
        for sign in ((1, -1) if signed else (1,)):
            name = cid.value + (("_plus" if sign > 0 else "_minus") if signed else "")
            for c in cs:
                c = float(c)
                if c == 0 and cid is not CurveId.TFb0:
                    w.writerow([name, _fmt(c), "nan", "false"])
                    continue
                pt = eval_curve(cid, c, sign=sign, a=ns.a)
                w.writerow([name, _fmt(c), _fmt(pt.value), "true" if pt.valid else "false"])
    return buf.getvalue()


def _cmd_region_sweep(ns) -> str:
    bs = np.linspace(*ns.b_range, ns.grid)
    cs = np.linspace(*ns.c_range, ns.grid)
    points = [(float(b), float(c)) for c in cs for b in bs]

    def one(bc):
        b, c = bc
        return classify_region(Params(0.0, b, c), probe=ns.probe_cycles, seed=ns.seed)

    sigs = thread_map(one, points)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["b", "c", "equilibrium_count", "classifications", "kappa_symmetric",
                "limit_cycle_count", "cycles"])
    for (b, c), s in zip(points, sigs):
        cyc = ";".join(f"{amp!r}:{'stable' if st else 'unstable'}" for amp, st in s.cycles)
        w.writerow([_fmt(b), _fmt(c), s.equilibrium_count, ";".join(s.classifications),
                    "true" if s.kappa_symmetric else "false",
                    "" if s.limit_cycle_count is None else s.limit_cycle_count, cyc])
    return buf.getvalue()


def _cmd_canard(ns) -> dict:
    value = canard_curve(ns.case, ns.eps)
    key = "b_c" if ns.case == "A" else "a_c"
    out = {"command": "canard", "case": ns.case, "eps": ns.eps, key: value}
    if ns.verify:
        param = value if ns.param is None else ns.param
        res = verify_canard(ns.case, ns.eps, param)
        out.update({"param": param, "tracked_slow_time": res.tracked_slow_time,
                    "max_distance": res.max_distance})
    return out


def _complex_pair(z) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def _cmd_infinity(ns) -> dict:
    p = _params(ns)
    fld = to_polynomial(p, exact_coeffs=True)
    pts = []
    for eq in infinite_equilibria(fld):
        pts.append(eq.to_json())
        pts.append(antipode(eq, fld.degree).to_json())
    chain = fhn_blowdown_chain(p, seed=ns.seed)
    e6 = chain.point("E6~")
    e6_json = {"classification": e6.classification,
               "eigenvalues": [float(z) for z in e6.eigenvalues]}
    if chain.e6 is not None:
        e6_json.update({"order": chain.e6.order, "coefficient": float(chain.e6.coefficient)})
    else:
        e6_json["error"] = chain.e6_error
    return {
        "command": "infinity", "params": _params_json(p), "infinite_equilibria": pts,
        "chain": [{"index": i, "label": s.label, "kind": s.kind, "residual": r}
                  for i, (s, r) in enumerate(zip(chain.steps, chain.residuals))],
        "display_checks": [{"label": d.label, "status": d.status, "detail": d.detail}
                           for d in chain.display],
        "blowup_points": [t.to_json() for t in chain.points],
        "E6": e6_json,
    }


def _cmd_portrait(ns) -> dict:
    p = _params(ns)
    spec = PortraitSpec(p, horizon=ns.horizon, nullclines_only=ns.nullclines_only,
                        include_cycles=not ns.no_cycles)
    res = render_portrait(spec)
    with open(ns.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(res.svg)
    if ns.csv:
        with open(ns.csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(res.csv)
    return {"command": "portrait", "params": _params_json(p), "svg": ns.out,
            "csv": ns.csv, "errors": res.errors}


def _cmd_verify_chain(ns) -> dict:
    p = _params(ns)
    chain = fhn_blowdown_chain(p, samples=ns.samples, seed=ns.seed)
    return {"command": "verify-chain", "params": _params_json(p), "passed": True,
            "steps": [{"index": i, "label": s.label, "kind": s.kind, "residual": r}
                      for i, (s, r) in enumerate(zip(chain.steps, chain.residuals))]}


_COMMANDS = {
    "classify": _cmd_classify, "curves": _cmd_curves, "region-sweep": _cmd_region_sweep,
    "canard": _cmd_canard, "infinity": _cmd_infinity, "portrait": _cmd_portrait,
    "verify-chain": _cmd_verify_chain,
}


def _emit_error(kind: str, message: str, extra: Optional[dict] = None) -> None:
    payload = {"error": kind, "message": message}
    if extra:
        payload.update(extra)
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except _ArgError as exc:
        _emit_error("usage", str(exc))
        return 2
    try:
        result = _COMMANDS[ns.command](ns)
    except ChainMismatch as exc:
        _emit_error("ChainMismatch", str(exc),
                    {"step_index": exc.step_index, "residual": exc.residual})
        return 1
    except (AtlasError, ValueError, ZeroDivisionError, OverflowError) as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 1
    text = result if isinstance(result, str) else json.dumps(result, indent=2, sort_keys=True) + "\n"
    if ns.output:
        with open(ns.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
