"""Command-line interface and deterministic report generation.

Subcommands: params, solve, sweep, period, convergence, phase-portrait,
spectrum, selfcheck.  All numeric output is serialized with 17 significant
digits in CSV (full float64 round-trip) and lossless shortest-repr in JSON;
identical flags produce byte-identical files.  Exit codes: 0 success,
1 usage error, 2 numerical non-convergence, 3 selfcheck invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import __version__, functionals, stability
from .errors import InvalidParameter, NumericalError
from .params import make_params
from .portrait import build_portrait
from .selfcheck import run_selfcheck
from .solver import orbit_for_period, shoot, sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_SELFCHECK = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with code 2; we map to 1
        raise UsageError(message)


def _provenance(n: int, **extra: float) -> str:
    parts = [f"qdelaunay {__version__}", f"n={n}"]
    parts += [f"{k}={format(v, '.17g')}" for k, v in extra.items()]
    return "# " + " ".join(parts)


def _meta(n: int, **extra: float) -> dict:
    meta = {"artifact": "qdelaunay", "version": __version__, "n": n}
    meta.update(extra)
    return meta


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _native(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _json_dumps(payload) -> str:
    return json.dumps(payload, indent=1, sort_keys=True, default=_native) + "\n"


def _orbit_summary(params, orbit) -> dict:
    return {
        "a": orbit.a,
        "b": orbit.b,
        "T_a": orbit.t_a,
        "eps_a": orbit.eps_a,
        "H": orbit.h,
        "I_a": orbit.i_a,
        "Y": functionals.invariant_value(params, orbit),
        "defect": orbit.defect,
        "max_drift": orbit.max_drift,
    }


def _csv_rows_to_json(csv_text: str) -> list[dict]:
    lines = [ln for ln in csv_text.strip().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return [
        {k: (float(v) if _is_float(v) else v)
         for k, v in zip(header, ln.split(","))}
        for ln in lines[1:]
    ]


def _is_float(txt: str) -> bool:
    try:
        float(txt)
        return True
    except ValueError:
        return False


def build_parser() -> _Parser:
    parser = _Parser(prog="qdelaunay", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, tol_default=1e-9):
        p.add_argument("--n", type=int, required=True, help="dimension, >= 5")
        p.add_argument("--tol", type=float, default=tol_default,
                       help="shooting tolerance on the matching objective")
        p.add_argument("--out", type=str, default=None,
                       help="primary output file (stdout when omitted)")
        p.add_argument("--json", action="store_true",
                       help="mirror CSV output as JSON")

    p = sub.add_parser("params", help="dimension constants as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", type=str, default=None)

    p = sub.add_parser("solve", help="one periodic orbit by its maximum a")
    add_common(p)
    p.add_argument("--a", type=float, required=True)

    p = sub.add_parser("sweep", help="orbit family over an a-grid")
    add_common(p)
    p.add_argument("--a-min", type=float, required=True)
    p.add_argument("--a-max", type=float, required=True)
    p.add_argument("--count", type=int, required=True)

    p = sub.add_parser("period", help="orbit matching a prescribed period")
    add_common(p)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--period-tol", type=float, default=1e-6)

    p = sub.add_parser("convergence", help="invariant values approaching the sphere")
    add_common(p)
    p.add_argument("--kmax", type=int, required=True,
                   help="largest k in a = 1 - 10^-k (1 <= kmax <= 4)")

    p = sub.add_parser("phase-portrait", help="orbit projections in the (v, v') plane")
    add_common(p)
    p.add_argument("--a", type=str, required=True,
                   help="comma-separated list of Delaunay parameters")
    p.add_argument("--sphere", action="store_true",
                   help="include the homoclinic loop")
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("spectrum", help="linearized spectrum on an l-fold cover")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", type=str, default=None)

    p = sub.add_parser("selfcheck", help="run every module invariant")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", type=str, default=None)
    return parser


def cmd_params(args) -> int:
    params = make_params(args.n)
    payload = dict(asdict(params))
    payload["meta"] = _meta(args.n)
    _emit(_json_dumps(payload), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    params = make_params(args.n)
    orbit = shoot(params, args.a, args.tol)
    csv_text = _provenance(args.n, tol=args.tol) + "\n" + orbit.to_csv(params)
    _emit(csv_text, args.out)
    summary = {"meta": _meta(args.n, tol=args.tol), "orbit": _orbit_summary(params, orbit)}
    if args.json and args.out:
        with open(args.out + ".json", "w") as fh:
            fh.write(_json_dumps({"meta": summary["meta"],
                                  "rows": _csv_rows_to_json(csv_text)}))
    sys.stdout.write(_json_dumps(summary))
    return EXIT_OK


def cmd_sweep(args) -> int:
    params = make_params(args.n)
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    grid = np.linspace(args.a_min, args.a_max, args.count)
    report = sweep(params, grid, args.tol)
    csv_text = _provenance(args.n, tol=args.tol) + "\n" + report.to_csv()
    _emit(csv_text, args.out)
    if args.json and args.out:
        with open(args.out + ".json", "w") as fh:
            fh.write(_json_dumps({"meta": _meta(args.n, tol=args.tol),
                                  "rows": _csv_rows_to_json(csv_text)}))
    summary = {
        "meta": _meta(args.n, tol=args.tol),
        "verdicts": report.verdicts,
        "audits": report.audits,
        "failures": [
            {"a": a, "error": kind, "message": msg}
            for a, kind, msg in report.failures
        ],
        "y_values": report.y_values,
    }
    sys.stdout.write(_json_dumps(summary))
    if report.failures:
        for a, kind, msg in report.failures:
            print(f"sweep: grid point a={a} failed with {kind}: {msg}",
                  file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_period(args) -> int:
    params = make_params(args.n)
    orbit = orbit_for_period(params, args.T, args.period_tol, args.tol)
    csv_text = _provenance(args.n, tol=args.tol) + "\n" + orbit.to_csv(params)
    _emit(csv_text, args.out)
    summary = {"meta": _meta(args.n, tol=args.tol),
               "orbit": _orbit_summary(params, orbit)}
    sys.stdout.write(_json_dumps(summary))
    return EXIT_OK


def convergence_study(params, k_max: int, tol: float = 1e-9) -> dict:
    """Invariant values along a_k = 1 - 10^-k, k = 1..k_max.

    Returns rows of (a, T_a, I_a, Y, Y / y_sph) plus the verdict that the
    ratio increases strictly toward 1 from below.  Row-level failures are
    recorded without aborting the study.
    """
    if not 1 <= k_max <= 4:
        raise InvalidParameter("k_max must lie in [1, 4]")
    rows = []
    failures = []
    b_hint = None
    for k in range(1, k_max + 1):
        a = 1.0 - 10.0 ** (-k)
        try:
            orb = shoot(params, a, tol, b_hint=b_hint)
            b_hint = orb.b
            y = functionals.invariant_value(params, orb)
            rows.append({
                "k": k, "a": a, "T_a": orb.t_a, "I_a": orb.i_a, "Y": y,
                "Y_over_Ysph": y / params.y_sph,
            })
        except (InvalidParameter, NumericalError) as exc:
            failures.append({"k": k, "a": a, "error": type(exc).__name__,
                             "message": str(exc)})
    ratios = [r["Y_over_Ysph"] for r in rows]
    verdict = {
        "increasing": all(r2 > r1 for r1, r2 in zip(ratios, ratios[1:])),
        "below_sphere": all(r < 1.0 for r in ratios),
        "final_ratio": ratios[-1] if ratios else None,
    }
    return {"n": params.n, "y_sph": params.y_sph, "rows": rows,
            "failures": failures, "verdict": verdict}


def cmd_convergence(args) -> int:
    params = make_params(args.n)
    study = convergence_study(params, args.kmax, args.tol)
    lines = [_provenance(args.n, tol=args.tol), "a,T_a,I_a,Y,Y_over_Ysph"]
    for r in study["rows"]:
        cells = (r["a"], r["T_a"], r["I_a"], r["Y"], r["Y_over_Ysph"])
        lines.append(",".join(format(float(c), ".17g") for c in cells))
    _emit("\n".join(lines) + "\n", args.out)
    summary = {"meta": _meta(args.n, tol=args.tol), **study}
    sys.stdout.write(_json_dumps(summary))
    return EXIT_NUMERICAL if study["failures"] else EXIT_OK


def cmd_phase_portrait(args) -> int:
    params = make_params(args.n)
    try:
        a_list = [float(x) for x in args.a.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --a list: {exc}") from exc
    portrait = build_portrait(params, a_list, include_sphere=args.sphere,
                              tol=args.tol)
    text = portrait.to_csv() if args.format == "csv" else portrait.to_json() + "\n"
    if args.format == "csv":
        text = _provenance(args.n, tol=args.tol) + "\n" + text
    _emit(text, args.out)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    params = make_params(args.n)
    orbit = shoot(params, args.a, args.tol)
    report = stability.discretized_spectrum(params, orbit=orbit, l=args.l,
                                            grid_n=args.grid)
    payload = {
        "meta": _meta(args.n, tol=args.tol),
        "operator": report.operator,
        "a": report.a,
        "l": report.l_copies,
        "circumference": report.circumference,
        "grid_n": report.grid_n,
        "eigenvalues": [float(x) for x in report.eigenvalues],
        "negative_count": report.negative_count,
        "near_zero": report.near_zero,
        "translation_overlap": report.translation_overlap,
    }
    _emit(_json_dumps(payload), args.out)
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    report = run_selfcheck(args.n)
    _emit(_json_dumps(report.to_dict()), args.out)
    if not report.ok():
        for c in report.failures():
            print(f"selfcheck: {c.name} failed: {c.detail}", file=sys.stderr)
        return EXIT_SELFCHECK
    return EXIT_OK


_COMMANDS = {
    "params": cmd_params,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "period": cmd_period,
    "convergence": cmd_convergence,
    "phase-portrait": cmd_phase_portrait,
    "spectrum": cmd_spectrum,
    "selfcheck": cmd_selfcheck,
}


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidParameter as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        cmd = argv[0] if argv else "?"
        print(f"numerical failure in '{cmd}': {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
