"""Command-line front end.

Exit codes: 0 success / controllable, 1 error, 2 uncontrollable (``analyze``)
or a failed reproduction check (``verify-paper``).
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import asdict, replace

import numpy as np

from . import __version__
from . import controllability as ctl
from .allocation import PimSingular
from .config import (
    analysis_eta,
    load_config,
    params_from_config,
    scenario_from_config,
    write_report,
    dumps_canonical,
)
from .model import AirframeParams, single_failure
from .sets import DegenerateSet, SamplingExhausted
from .simulator import ConfigError, run_scenario, write_csv

EXIT_OK, EXIT_ERROR, EXIT_UNCONTROLLABLE = 0, 1, 2

_SET_KIND = {"u0": ctl.EXACT_U0, "ua": ctl.ALLOCATED_UA}


def _doc(args) -> dict:
    return load_config(args.config) if args.config else load_config({})


def _report_or_error(fn, *a, **kw):
    try:
        return fn(*a, **kw).to_dict()
    except (PimSingular, DegenerateSet) as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}


def cmd_analyze(args) -> int:
    doc = _doc(args)
    params = params_from_config(doc)
    eta = analysis_eta(doc)
    analysis = doc.get("analysis", {})
    system = analysis.get("system", "full")
    set_kind = args.set_kind or analysis.get("set_kind", "u0")
    samples = args.samples or analysis.get("samples", 10_000)
    seed = args.seed if args.seed is not None else analysis.get("seed", 0)

    if system == "full":
        primary = ctl.check_full(params, eta) if set_kind == "u0" else ctl.check_full_allocated(params, eta)
    else:
        primary = ctl.check_degraded(params, eta, _SET_KIND[set_kind])

    cases = {
        "full_u0": _report_or_error(ctl.check_full, params, eta),
        "full_ua": _report_or_error(ctl.check_full_allocated, params, eta),
        "degraded_u0": _report_or_error(ctl.check_degraded, params, eta, ctl.EXACT_U0),
        "degraded_ua": _report_or_error(ctl.check_degraded, params, eta, ctl.ALLOCATED_UA),
    }
    inclusion = {}
    for name, degraded in (("full", False), ("degraded", True)):
        try:
            inclusion[name] = {"violations": ctl.inclusion_test(params, eta, samples, seed, degraded=degraded)}
        except (PimSingular, DegenerateSet, SamplingExhausted) as exc:
            inclusion[name] = {"error": f"{type(exc).__name__}: {exc}"}
    inclusion["samples"] = samples
    inclusion["seed"] = seed

    thresholds = {}
    failed = [i + 1 for i in range(6) if eta[i] == 0.0]
    if len(failed) == 1:
        thresholds = _threshold_entry(params, failed[0])

    report = {
        "tool_version": __version__,
        "input": doc,
        "eta": eta,
        "system": system,
        "set_kind": set_kind,
        "controllable": primary.controllable,
        "primary": primary.to_dict(),
        "cases": cases,
        "inclusion": inclusion,
        "thresholds": thresholds,
    }
    text = dumps_canonical(report)
    if args.out:
        write_report(report, args.out)
    else:
        sys.stdout.write(text)
    verdict = "controllable" if primary.controllable else "uncontrollable"
    print(f"{system} system, {set_kind}: {verdict} (margin {primary.margin:.6g})", file=sys.stderr)
    return EXIT_OK if primary.controllable else EXIT_UNCONTROLLABLE


def _threshold_entry(params: AirframeParams, rotor: int) -> dict:
    return {
        "rotor": rotor,
        "lift_threshold_n": ctl.degraded_lift_threshold(params, rotor),
        "lift_threshold_analytic_n": 5.0 / 18.0 * params.weight_n,
        "thrust_threshold_n": ctl.degraded_thrust_threshold(params, rotor),
        "thrust_threshold_analytic_n": 18.0 / 5.0 * params.max_lift_n,
    }


def cmd_threshold(args) -> int:
    params = params_from_config(_doc(args))
    rotors = [args.rotor] if args.rotor else range(1, 7)
    entries = [_threshold_entry(params, i) for i in rotors]
    out = csv.writer(sys.stdout, delimiter="\t", lineterminator="\n")
    out.writerow(["rotor", "K_star_n", "K_analytic_n", "T_star_n", "T_analytic_n"])
    for e in entries:
        out.writerow([e["rotor"], f"{e['lift_threshold_n']:.10g}", f"{e['lift_threshold_analytic_n']:.10g}",
                      f"{e['thrust_threshold_n']:.10g}", f"{e['thrust_threshold_analytic_n']:.10g}"])
    if args.out:
        write_report({"tool_version": __version__, "params": asdict(params), "thresholds": entries}, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if not args.config:
        raise ConfigError("simulate needs --config (a scenario file or one of fig2..fig5)")
    doc = load_config(args.config)
    dcs = None if args.dcs is None else args.dcs == "on"
    scenario = scenario_from_config(doc, dcs=dcs)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    trace = run_scenario(scenario)
    decimation = args.decimation or doc.get("decimation", 1)
    if args.csv:
        rows = write_csv(trace, args.csv, decimation)
        print(f"wrote {rows} rows to {args.csv}", file=sys.stderr)
    if args.svg:
        from .plotting import plot_trace
        plot_trace(trace, args.svg, title=scenario.name or str(args.config))
        print(f"wrote {args.svg}", file=sys.stderr)
    m = trace.metrics
    print(f"classification\t{trace.classification}")
    for key in sorted(m):
        print(f"{key}\t{m[key]:.6g}")
    expected = doc.get("expected_classification")
    if expected:
        print(f"expected\t{expected}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    doc = _doc(args)
    params = params_from_config(doc)
    rotor = args.rotor or 2
    eta = single_failure(rotor)
    k_ref = 5.0 / 18.0 * params.weight_n
    lo = args.kmin if args.kmin is not None else 0.5 * k_ref
    hi = args.kmax if args.kmax is not None else 2.0 * k_ref
    rows = []
    for K in np.linspace(lo, hi, args.points):
        p = params.replace(max_lift_n=float(K))
        ua = ctl.check_degraded(p, eta, ctl.ALLOCATED_UA)
        u0 = ctl.check_degraded(p, eta, ctl.EXACT_U0)
        rows.append({
            "max_lift_n": float(K),
            "controllable_ua": ua.controllable, "margin_ua": ua.margin,
            "controllable_u0": u0.controllable, "margin_u0": u0.margin,
        })
    header = ["max_lift_n", "controllable_ua", "margin_ua", "controllable_u0", "margin_u0"]
    fh = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(r["max_lift_n"]), int(r["controllable_ua"]), repr(r["margin_ua"]),
                        int(r["controllable_u0"]), repr(r["margin_u0"])])
    finally:
        if fh is not sys.stdout:
            fh.close()
    if args.svg:
        from .plotting import plot_sweep
        plot_sweep(rows, args.svg, analytic=k_ref, rotor=rotor)
    return EXIT_OK


def cmd_verify_paper(args) -> int:
    from .verify import run_all
    params = params_from_config(_doc(args))
    results = run_all(params)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_UNCONTROLLABLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hexactrl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario JSON file or bundled name fig2..fig5")
        p.add_argument("--seed", type=int)
        return p

    p = common(sub.add_parser("analyze", help="controllability report for one configuration"))
    p.add_argument("config_path", nargs="?", help="same as --config")
    p.add_argument("--set-kind", choices=("u0", "ua"))
    p.add_argument("--samples", type=int)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_analyze)

    p = common(sub.add_parser("threshold", help="minimum rotor lift / maximum hover thrust per failed rotor"))
    p.add_argument("config_path", nargs="?")
    p.add_argument("--rotor", type=int, choices=range(1, 7))
    p.add_argument("--out")
    p.set_defaults(func=cmd_threshold)

    p = common(sub.add_parser("simulate", help="run a fault-injection scenario"))
    p.add_argument("config_path", nargs="?")
    p.add_argument("--csv")
    p.add_argument("--svg")
    p.add_argument("--dcs", choices=("on", "off"))
    p.add_argument("--decimation", type=int)
    p.set_defaults(func=cmd_simulate)

    p = common(sub.add_parser("sweep", help="degraded-set margins over a grid of maximum lifts"))
    p.add_argument("config_path", nargs="?")
    p.add_argument("--rotor", type=int, choices=range(1, 7))
    p.add_argument("--kmin", type=float)
    p.add_argument("--kmax", type=float)
    p.add_argument("--points", type=int, default=61)
    p.add_argument("--csv")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_sweep)

    p = common(sub.add_parser("verify-paper", help="run every reproduction check"))
    p.set_defaults(func=cmd_verify_paper)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config_path", None) and not args.config:
        args.config = args.config_path
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError, PimSingular, DegenerateSet, SamplingExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
