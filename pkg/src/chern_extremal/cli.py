"""Command line front end: scenario in, fields and a JSON report out.

Commands: solve, verify, calabi, sweep, report.  Every run creates a
fresh directory <out>/<scenario-name>-<timestamp>/ and refreshes a
`latest` pointer next to it.  Exit codes: 0 all checks in tolerance,
2 a tolerance check failed (report still written), 1 hard error.

The report JSON splits into three keys: "scenario" (echo of the parsed
input), "results" (deterministic given scenario + seed), and "volatile"
(timestamps, runtimes, versions).  Byte-identical reruns are a supported
invariant for the first two sections.
"""
from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import time

import numpy as np

from . import __version__
from .calabi import calabi_functional, second_variation, variation_at
from .checks import CheckResult, run_identity_suite
from .errors import ChernExtremalError
from .extremal import extremal_factor
from .gauduchon import gauduchon_factor
from .grid import GridSpec, ScalarField, random_band_limited, integrate
from .operators import KrylovConfig
from .scenario import (Scenario, Tolerances, conformal_factor_field,
                       export_csv, load_scenario, realize, write_field)

_CSV_LIMIT = 65536  # full-grid CSV only below this point count


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError("not JSON serializable: %r" % type(obj))


def payload_bytes(report: dict) -> bytes:
    """The deterministic part of a report, canonically serialized."""
    payload = {"scenario": report["scenario"], "results": report["results"]}
    return json.dumps(payload, sort_keys=True, default=_json_default).encode()


def _make_run_dir(out_root: str, name: str) -> str:
    os.makedirs(out_root, exist_ok=True)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    base = os.path.join(out_root, "%s-%s" % (name, stamp))
    path = base
    k = 1
    while os.path.exists(path):
        k += 1
        path = "%s-%d" % (base, k)
    os.makedirs(path)
    return path


def _point_latest(out_root: str, run_dir: str) -> None:
    latest = os.path.join(out_root, "latest")
    if os.path.islink(latest) or os.path.isfile(latest):
        os.remove(latest)
    elif os.path.isdir(latest):
        shutil.rmtree(latest)
    try:
        os.symlink(os.path.basename(run_dir), latest)
    except OSError:
        shutil.copytree(run_dir, latest)


def _emit(quiet: bool, text: str) -> None:
    if not quiet:
        print(text)


def _check_line(c: CheckResult) -> str:
    return "%-38s %-4s residual %.3e  tol %.1e" % (
        c.name, "pass" if c.passed else "FAIL", c.residual, c.tol)


def _dump_field(f, stem: str, run_dir: str, files: dict) -> None:
    path = os.path.join(run_dir, stem + ".cexf")
    write_field(f, path)
    files[stem] = os.path.basename(path)
    if f.spec.npts <= _CSV_LIMIT:
        csv_path = os.path.join(run_dir, stem + ".csv")
        export_csv(f, csv_path)
        files[stem + "_csv"] = os.path.basename(csv_path)


def _solve_config(tol: Tolerances) -> KrylovConfig:
    return KrylovConfig(tol=tol.solver)


def _analytic_error(sc: Scenario, factor: ScalarField) -> float | None:
    """sup |f - (-phi)| modulo constants, when the class has a closed form."""
    if sc.metric.kind not in ("flat", "conformal_flat"):
        return None
    if sc.metric.kind == "flat":
        target = np.zeros(sc.grid.shape)
    else:
        target = -conformal_factor_field(sc.metric, sc.grid).values
    diff = factor.values - target
    return float(np.max(diff) - np.min(diff))


def _run_solve(sc: Scenario, run_dir: str, quiet: bool) -> tuple:
    grid = sc.grid
    metric = realize(sc.metric, grid)
    cfg = _solve_config(sc.tolerances)
    res = extremal_factor(metric, cfg, tol_source=sc.tolerances.source,
                          seed=sc.seed)

    files = {}
    _dump_field(res.gauduchon.factor, "f_G", run_dir, files)
    _dump_field(res.factor, "f_E", run_dir, files)
    _dump_field(res.scalar, "s_E", run_dir, files)

    c_n = calabi_functional(res.metric, float(grid.n))
    checks = [
        CheckResult("gauduchon-defect", res.gauduchon.defect_realized,
                    sc.tolerances.identity,
                    res.gauduchon.defect_realized <= sc.tolerances.identity),
        CheckResult("extremal-el-residual", res.el_residual,
                    sc.tolerances.end_to_end,
                    res.el_residual <= sc.tolerances.end_to_end),
    ]
    analytic = _analytic_error(sc, res.factor)
    if analytic is not None:
        checks.append(CheckResult("extremal-analytic-factor", analytic,
                                  sc.tolerances.end_to_end,
                                  analytic <= sc.tolerances.end_to_end))

    results = {
        "task": "solve",
        "volume_in": metric.volume(),
        "volume_out": res.metric.volume(),
        "mean_curvature": res.mean_curvature,
        "volume_shift": res.volume_shift,
        "el_residual": res.el_residual,
        "scalar_sup": float(np.max(np.abs(res.scalar.values))),
        "calabi_n": c_n,
        "gauduchon": res.reports["gauduchon"].as_dict(),
        "poisson": res.reports["poisson"].as_dict(),
        "files": files,
        "checks": [c.as_dict() for c in checks],
    }
    if analytic is not None:
        results["analytic_factor_error"] = analytic

    for c in checks:
        _emit(quiet, _check_line(c))
    _emit(quiet, "C_n(extremal) = %.6e   el residual = %.6e"
          % (c_n, res.el_residual))
    return results, all(c.passed for c in checks)


def _run_verify(sc: Scenario, run_dir: str, quiet: bool) -> tuple:
    metric = realize(sc.metric, sc.grid)
    cfg = _solve_config(sc.tolerances)
    gd = gauduchon_factor(metric, cfg, tol_source=sc.tolerances.source)
    checks = run_identity_suite(metric, seed=sc.seed,
                                identity_tol=sc.tolerances.identity,
                                config=cfg, gauduchon=gd)
    for c in checks:
        _emit(quiet, _check_line(c))
    results = {
        "task": "verify",
        "gauduchon_defect_input": gd.defect_input,
        "gauduchon_defect_realized": gd.defect_realized,
        "checks": [c.as_dict() for c in checks],
    }
    return results, all(c.passed for c in checks)


def _run_calabi(sc: Scenario, run_dir: str, quiet: bool,
                p_override=None, t_override=None) -> tuple:
    grid = sc.grid
    metric = realize(sc.metric, grid)
    p_list = tuple(p_override) if p_override else (sc.task.p_list or (2.0, float(grid.n)))
    t_list = tuple(t_override) if t_override else sc.task.t_list

    directions = [random_band_limited(grid, sc.seed + 101 * k,
                                      max(1, min(3, grid.N // 4)), 0.5)
                  for k in range(3)]

    checks = []
    functional = {}
    variations = []
    for p in p_list:
        functional["%g" % p] = calabi_functional(metric, float(p))
        for t in t_list:
            for k, f_dir in enumerate(directions):
                rep = variation_at(metric, f_dir, float(p), float(t),
                                   tolerance=sc.tolerances.end_to_end)
                variations.append(dict(rep.as_dict(), direction=k))
                name = "variation-p%g-t%g-dir%d" % (p, t, k)
                # relative error with a denominator floor: when the true
                # derivative is 0 (flat metric) the comparison is against
                # FD roundoff, so judge |formula - fd| <= tol * 0.01 there
                err = (abs(rep.formula_value - rep.fd_value)
                       / max(abs(rep.fd_value), 1e-2))
                checks.append(CheckResult(name, err,
                                          sc.tolerances.end_to_end,
                                          err <= sc.tolerances.end_to_end,
                                          detail="rel %.3e" % rep.rel_error))
    sv_min = min(second_variation(metric, f, t) for f in directions
                 for t in t_list)
    checks.append(CheckResult("second-variation-nonnegative",
                              max(0.0, -sv_min), 1e-12,
                              sv_min >= -1e-12,
                              detail="min %.6e" % sv_min))
    for c in checks:
        _emit(quiet, _check_line(c))
    results = {
        "task": "calabi",
        "p": list(p_list), "t": list(t_list),
        "functional": functional,
        "variations": variations,
        "second_variation_min": sv_min,
        "checks": [c.as_dict() for c in checks],
    }
    return results, all(c.passed for c in checks)


def _run_sweep(sc: Scenario, run_dir: str, quiet: bool) -> tuple:
    n_list = sc.task.n_list or (8, 16, 32)
    analytic = sc.metric.kind in ("flat", "conformal_flat")
    rows = []
    for N in n_list:
        sub = Scenario(name=sc.name, n=sc.n, N=int(N), metric=sc.metric,
                       task=sc.task, tolerances=sc.tolerances, seed=sc.seed)
        grid = sub.grid
        metric = realize(sub.metric, grid)
        cfg = _solve_config(sub.tolerances)
        res = extremal_factor(metric, cfg, tol_source=sc.tolerances.source,
                              seed=sc.seed)
        if analytic:
            err = _analytic_error(sub, res.factor)
        else:
            # no closed form: track the identity-based errors instead
            err = max(res.gauduchon.defect_realized, res.el_residual)
        rows.append({"N": int(N), "error": float(err),
                     "el_residual": res.el_residual,
                     "gauduchon_defect": res.gauduchon.defect_realized,
                     "scalar_sup": float(np.max(np.abs(res.scalar.values)))})
        _emit(quiet, "N=%-3d error %.6e  el %.3e  defect %.3e"
              % (N, err, res.el_residual, res.gauduchon.defect_realized))

    errors = [r["error"] for r in rows]
    floor = 1e-12
    worst_rise = 0.0
    for a, b in zip(errors, errors[1:]):
        worst_rise = max(worst_rise, b - max(a, floor))
    mono = CheckResult("sweep-monotone-decrease", max(0.0, worst_rise), floor,
                       worst_rise <= 0.0,
                       detail="errors " + " ".join("%.3e" % e for e in errors))
    decay = errors[0] / max(errors[-1], 1e-300)
    _emit(quiet, _check_line(mono))
    _emit(quiet, "decay factor N=%d to N=%d: %.3e" % (n_list[0], n_list[-1], decay))
    results = {
        "task": "sweep",
        "rows": rows,
        "decay_factor": decay,
        "analytic_reference": analytic,
        "checks": [mono.as_dict()],
    }
    return results, mono.passed


def _pretty_report(path: str) -> int:
    with open(path) as fh:
        doc = json.load(fh)
    sc = doc.get("scenario", {})
    print("scenario %s  n=%s N=%s seed=%s task=%s"
          % (sc.get("name"), sc.get("n"), sc.get("N"), sc.get("seed"),
             (sc.get("task") or {}).get("kind")))
    results = doc.get("results", {})
    failed = False
    for c in results.get("checks", []):
        line = "%-38s %-4s residual %.3e  tol %.1e" % (
            c.get("name"), "pass" if c.get("passed") else "FAIL",
            float(c.get("residual", float("nan"))), float(c.get("tol", float("nan"))))
        print(line)
        failed = failed or not c.get("passed")
    for key in ("calabi_n", "el_residual", "mean_curvature", "decay_factor"):
        if key in results:
            print("%s = %.6e" % (key, float(results[key])))
    vol = doc.get("volatile", {})
    if vol.get("timestamp"):
        print("recorded at %s (%.1fs)" % (vol["timestamp"],
                                          float(vol.get("runtime_seconds", 0.0))))
    return 2 if failed else 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenario", help="path to a scenario TOML file")
    p.add_argument("--out", default="runs", help="output root directory")
    p.add_argument("--tol", type=float, default=None,
                   help="override every tolerance in the ladder uniformly")
    p.add_argument("--seed", type=int, default=None,
                   help="override the scenario seed")
    p.add_argument("--quiet", action="store_true", help="suppress progress lines")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="chern-extremal",
        description="Extremal Hermitian metrics in a conformal class on the "
                    "discretized complex torus")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    for name, helptext in [
            ("solve", "run the two-stage extremal pipeline, dump fields"),
            ("verify", "run the full identity suite against the metric"),
            ("calabi", "curvature power functionals and their variations"),
            ("sweep", "grid refinement study across a list of N")]:
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        if name == "calabi":
            p.add_argument("--p", default=None,
                           help="comma separated exponents, e.g. 2,3.5")
            p.add_argument("--t", default=None,
                           help="comma separated ray parameters, e.g. 0,0.1")

    pr = sub.add_parser("report", help="pretty-print a stored report")
    pr.add_argument("path", help="path to a report.json")
    return ap


def _parse_float_list(raw: str, flag: str) -> list:
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise ChernExtremalError("%s expects comma separated numbers, got %r"
                                 % (flag, raw))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            return _pretty_report(args.path)

        sc = load_scenario(args.scenario)
        if args.seed is not None:
            sc = Scenario(sc.name, sc.n, sc.N, sc.metric, sc.task,
                          sc.tolerances, args.seed)
        if args.tol is not None:
            if args.tol <= 0:
                raise ChernExtremalError("--tol must be positive")
            sc = Scenario(sc.name, sc.n, sc.N, sc.metric, sc.task,
                          sc.tolerances.override_all(args.tol, "cli"), sc.seed)

        run_dir = _make_run_dir(args.out, sc.name)
        started = time.time()
        if args.command == "solve":
            results, passed = _run_solve(sc, run_dir, args.quiet)
        elif args.command == "verify":
            results, passed = _run_verify(sc, run_dir, args.quiet)
        elif args.command == "calabi":
            p_list = _parse_float_list(args.p, "--p") if args.p else None
            t_list = _parse_float_list(args.t, "--t") if args.t else None
            results, passed = _run_calabi(sc, run_dir, args.quiet, p_list, t_list)
        else:
            results, passed = _run_sweep(sc, run_dir, args.quiet)

        report = {
            "scenario": sc.as_dict(),
            "results": results,
            "volatile": {
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
                "runtime_seconds": time.time() - started,
                "versions": {"package": __version__,
                             "numpy": np.__version__},
            },
        }
        report_path = os.path.join(run_dir, "report.json")
        with open(report_path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
        _point_latest(args.out, run_dir)
        _emit(args.quiet, "report: %s" % report_path)
        return 0 if passed else 2
    except ChernExtremalError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
