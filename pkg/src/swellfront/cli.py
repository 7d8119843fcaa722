"""Command-line harness: run, verify, compare, sweep, convergence, plotdata.

Exit codes (total, one per error path):

    0  success / all checks passed
    1  verification, comparison, or convergence thresholds not met
    2  config parse error or precondition failure
    3  assumption validation failure
    4  solver error (front collapse, boundary solve)
    5  run directory hash mismatch (tampered or incomplete run)

The environment variable SWELLFRONT_SEED is reserved and unused: every
code path is deterministic, so there is nothing to seed.  It is
documented here to preempt confusion.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .configio import (
    LoadedConfig,
    apply_override,
    dump_config,
    load_config,
    parse_config_dict,
)
from .errors import (
    AssumptionViolationError,
    ConfigError,
    SwellfrontError,
)
from .frontfix import polynomial_mms, run as run_frontfix, run_mms, self_convergence
from .fronttrack import run_oracle
from .landau import FixedProfile, to_physical
from .model import validate_assumptions
from .runio import (
    load_result,
    sha256_file,
    write_result,
)
from .verify import VerificationThresholds, check_bounds, check_front_bounds, verify_run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_SOLVER = 4
EXIT_HASH = 5

SWEEP_CAP_DEFAULT = 10_000
COMPARE_FRONT_REL_TOL = 0.01   # fraction of (s0 - a)

SELF_ORDER_S_MIN = 0.8
SELF_ORDER_U_RANGE = (0.8, 2.2)
MMS_RATIO_MIN = 1.7


def _float_repr(x) -> str:
    return repr(float(x))


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _solve(loaded: LoadedConfig, solver: str):
    if solver == "oracle":
        cfg = loaded.scheme
        if loaded.oracle_m is not None or loaded.oracle_dt is not None:
            cfg = replace(cfg,
                          m=loaded.oracle_m or cfg.m,
                          dt=loaded.oracle_dt or cfg.dt)
        return run_oracle(loaded.instance, cfg)
    return run_frontfix(loaded.instance, loaded.scheme)


def _cheap_verification(result, instance) -> dict:
    """Bound and front checks only (no refinement companion)."""
    try:
        th = VerificationThresholds.from_instance(instance, solver=result.solver)
    except AssumptionViolationError as exc:
        return {"skipped": f"thresholds not definable: {exc}"}
    checks = [check_bounds(result, th)] + check_front_bounds(result, th)
    return {
        "all_pass": all(c.passed for c in checks),
        "checks": [{"name": c.name, "passed": c.passed,
                    "worst_violation": c.worst_violation} for c in checks],
    }


def _write_manifest(out_dir: Path, loaded: LoadedConfig, solver: str,
                    outputs: dict, validation, verification_summary: dict,
                    duration: float, config_echo: str) -> Path:
    scheme = loaded.scheme
    manifest = {
        "tool": "swellfront",
        "version": __version__,
        "solver": solver,
        "config_echo": config_echo,
        "scheme": {"m": scheme.m, "dt": scheme.dt, "coupling": scheme.coupling,
                   "stride": scheme.snapshot_stride,
                   "enforce_assumptions": loaded.enforce_assumptions},
        "outputs": {name: Path(p).name for name, p in outputs.items()},
        "hashes": {Path(p).name: sha256_file(p) for p in outputs.values()},
        "validation": {
            "all_pass": validation.all_pass,
            "checks": [{"name": c.name, "passed": c.passed, "message": c.message}
                       for c in validation.checks],
        },
        "verification_summary": verification_summary,
        "duration_seconds": duration,
    }
    path = out_dir / "manifest.json"
    _write_json(path, manifest)
    return path


def cmd_run(args) -> int:
    try:
        loaded = load_config(args.config)
    except ConfigError as exc:
        logger.error("config error: %s", exc)
        return EXIT_CONFIG
    if args.stride is not None:
        loaded = replace(loaded, scheme=replace(loaded.scheme,
                                                snapshot_stride=args.stride))

    report = validate_assumptions(loaded.instance)
    if not report.all_pass:
        if loaded.enforce_assumptions:
            print(report.to_text())
            logger.error("assumption validation failed; refusing to run")
            return EXIT_VALIDATION
        logger.warning("assumption validation failed; running anyway "
                       "(enforce_assumptions = false):\n%s", report.to_text())

    t0 = time.perf_counter()
    try:
        result = _solve(loaded, args.solver)
    except SwellfrontError as exc:
        logger.error("solver error: %s", exc)
        return EXIT_SOLVER
    duration = time.perf_counter() - t0

    out_dir = Path(args.out)
    outputs = write_result(result, out_dir)
    summary = _cheap_verification(result, loaded.instance)
    _write_manifest(out_dir, loaded, args.solver, outputs, report, summary,
                    duration, loaded.raw_text)
    worst = max((c["worst_violation"] for c in summary.get("checks", [])), default=0.0)
    print(f"run complete: solver={args.solver} s(T)={_float_repr(result.final_front)} "
          f"worst bound excursion={_float_repr(worst)} out={out_dir}")
    return EXIT_OK


def _check_run_dir(run_dir: Path):
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.is_file():
        raise ConfigError(f"no manifest.json in {run_dir}")
    manifest = json.loads(manifest_path.read_text())
    for name, expected in manifest.get("hashes", {}).items():
        target = run_dir / name
        if not target.is_file() or sha256_file(target) != expected:
            return manifest, name
    return manifest, None


def cmd_verify(args) -> int:
    run_dir = Path(args.run_dir)
    try:
        manifest, bad = _check_run_dir(run_dir)
    except ConfigError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    if bad is not None:
        logger.error("hash mismatch for %s: run is tampered or incomplete", bad)
        return EXIT_HASH

    try:
        loaded = parse_config_dict(tomllib.loads(manifest["config_echo"]),
                                   raw_text=manifest["config_echo"])
        result = load_result(run_dir / manifest["outputs"]["result_json"])
    except (ConfigError, KeyError, tomllib.TOMLDecodeError) as exc:
        logger.error("cannot reload run: %s", exc)
        return EXIT_CONFIG

    try:
        report = verify_run(result, loaded.instance, refine=not args.no_refine)
    except AssumptionViolationError as exc:
        logger.error("thresholds not definable for this instance: %s", exc)
        return EXIT_VALIDATION
    except SwellfrontError as exc:
        logger.error("solver error during refinement companion: %s", exc)
        return EXIT_SOLVER

    (run_dir / "verification.json").write_text(report.to_json_text())
    (run_dir / "verification.txt").write_text(report.to_text())
    print(report.to_text(), end="")
    return EXIT_OK if report.overall else EXIT_CHECK_FAILED


def cmd_compare(args) -> int:
    try:
        loaded = load_config(args.config)
    except ConfigError as exc:
        logger.error("config error: %s", exc)
        return EXIT_CONFIG
    report = validate_assumptions(loaded.instance)
    if not report.all_pass and loaded.enforce_assumptions:
        print(report.to_text())
        return EXIT_VALIDATION

    oracle_m = loaded.oracle_m or loaded.scheme.m
    oracle_dt = loaded.oracle_dt or loaded.scheme.dt
    if oracle_m != loaded.scheme.m or oracle_dt != loaded.scheme.dt:
        logger.warning("solver resolutions are mismatched (frontfix M=%d dt=%r, "
                       "oracle M=%d dt=%r); comparison still executes",
                       loaded.scheme.m, loaded.scheme.dt, oracle_m, oracle_dt)

    try:
        res_ff = _solve(loaded, "frontfix")
        res_or = _solve(loaded, "oracle")
    except SwellfrontError as exc:
        logger.error("solver error: %s", exc)
        return EXIT_SOLVER

    oracle_fronts = np.interp(res_ff.times, res_or.times, res_or.fronts)
    front_distance = float(np.max(np.abs(res_ff.fronts - oracle_fronts)))

    m_common = min(res_ff.m, res_or.m)
    y = np.linspace(0.0, 1.0, m_common + 1)
    u_ff = np.interp(y, np.linspace(0, 1, res_ff.m + 1), res_ff.final_profile)
    u_or = np.interp(y, np.linspace(0, 1, res_or.m + 1), res_or.final_profile)
    diff = u_ff - u_or
    w = np.full(m_common + 1, 1.0 / m_common)
    w[0] = w[-1] = 0.5 / m_common
    profile_distance = float(np.sqrt(np.sum(w * diff * diff)))

    gap0 = loaded.instance.init.s0 - loaded.instance.params.a
    tol = COMPARE_FRONT_REL_TOL * gap0
    ok = front_distance <= tol
    payload = {
        "front_distance_max": front_distance,
        "front_tolerance": tol,
        "final_profile_l2_distance": profile_distance,
        "within_tolerance": ok,
    }
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_json(out_dir / "comparison.json", payload)
    print(f"solver comparison: max|s_ff - s_or|={_float_repr(front_distance)} "
          f"(tolerance {_float_repr(tol)}), final-profile L2 distance="
          f"{_float_repr(profile_distance)}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _sweep_cell(job) -> dict:
    """Run one sweep cell in a worker process; returns one index row."""
    cell_id, base_data, paths, values, cell_dir_str = job
    cell_dir = Path(cell_dir_str)
    row = {"cell": cell_id,
           "params": {p: v for p, v in zip(paths, values)},
           "status": "ok", "final_s": "", "all_pass": "",
           "worst_bound_violation": "", "worst_front_violation": "",
           "worst_speed_violation": ""}
    try:
        data = base_data
        for p, v in zip(paths, values):
            data = apply_override(data, p, v)
        echo = dump_config(data)
        loaded = parse_config_dict(data, raw_text=echo)
    except ConfigError as exc:
        row["status"] = f"config-error: {exc}"
        return row

    report = validate_assumptions(loaded.instance)
    if not report.all_pass and loaded.enforce_assumptions:
        row["status"] = "invalid-input"
        return row

    t0 = time.perf_counter()
    try:
        result = run_frontfix(loaded.instance, loaded.scheme)
    except SwellfrontError as exc:
        row["status"] = f"solver-error: {type(exc).__name__}"
        return row
    duration = time.perf_counter() - t0

    outputs = write_result(result, cell_dir)
    summary = _cheap_verification(result, loaded.instance)
    _write_manifest(cell_dir, loaded, "frontfix", outputs, report, summary,
                    duration, echo)
    by_name = {c["name"]: c["worst_violation"] for c in summary.get("checks", [])}
    row["final_s"] = _float_repr(result.final_front)
    row["all_pass"] = str(summary.get("all_pass", False)).lower()
    row["worst_bound_violation"] = _float_repr(by_name.get("solution_bounds", 0.0))
    row["worst_front_violation"] = _float_repr(
        max(by_name.get("front_lower_bound", 0.0), by_name.get("front_growth_bound", 0.0)))
    row["worst_speed_violation"] = _float_repr(by_name.get("front_speed_bound", 0.0))
    return row


def cmd_sweep(args) -> int:
    spec_path = Path(args.spec)
    try:
        if not spec_path.is_file():
            raise ConfigError(f"sweep spec not found: {spec_path}")
        spec = tomllib.loads(spec_path.read_text())
        sweep_sec = spec.get("sweep", {})
        base_rel = sweep_sec["base_config"]
        axes = spec.get("axes", [])
        if not axes:
            raise ConfigError("sweep spec defines no [[axes]]")
        paths = [ax["path"] for ax in axes]
        value_lists = [ax["values"] for ax in axes]
        cap = int(sweep_sec.get("cap", SWEEP_CAP_DEFAULT))
        width = args.width or int(sweep_sec.get("width", 1))
        base_path = (spec_path.parent / base_rel).resolve()
        base_text = base_path.read_text()
        base_data = tomllib.loads(base_text)
        parse_config_dict(base_data, raw_text=base_text)  # fail fast
    except (ConfigError, KeyError, OSError, tomllib.TOMLDecodeError) as exc:
        logger.error("sweep spec error: %s", exc)
        return EXIT_CONFIG

    n_cells = 1
    for vals in value_lists:
        n_cells *= len(vals)
    if n_cells > cap:
        logger.error("sweep product %d exceeds cap %d", n_cells, cap)
        return EXIT_CONFIG

    out_dir = Path(args.out)
    cells_dir = out_dir / "cells"
    cells_dir.mkdir(parents=True, exist_ok=True)
    jobs = []
    for cell_id, values in enumerate(itertools.product(*value_lists)):
        cell_dir = cells_dir / f"cell_{cell_id:04d}"
        jobs.append((cell_id, base_data, paths, list(values), str(cell_dir)))

    if width > 1:
        with ProcessPoolExecutor(max_workers=width) as pool:
            rows = list(pool.map(_sweep_cell, jobs))
    else:
        rows = [_sweep_cell(job) for job in jobs]
    rows.sort(key=lambda r: r["cell"])

    header = (["cell"] + paths
              + ["status", "final_s", "all_pass", "worst_bound_violation",
                 "worst_front_violation", "worst_speed_violation"])
    lines = [",".join(header)]
    for row in rows:
        cells = [str(row["cell"])]
        cells += [_float_repr(row["params"][p]) if isinstance(row["params"][p], (int, float))
                  else str(row["params"][p]) for p in paths]
        cells += [row["status"], row["final_s"], row["all_pass"],
                  row["worst_bound_violation"], row["worst_front_violation"],
                  row["worst_speed_violation"]]
        lines.append(",".join(cells))
    (out_dir / "sweep_index.csv").write_text("\n".join(lines) + "\n")

    ok = all(r["status"] == "ok" and r["all_pass"] == "true" for r in rows)
    n_ok = sum(1 for r in rows if r["status"] == "ok")
    print(f"sweep complete: {len(rows)} cells, {n_ok} ran, "
          f"index at {out_dir / 'sweep_index.csv'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_convergence(args) -> int:
    if args.levels < 3:
        logger.error("convergence study needs at least 3 levels, got %d", args.levels)
        return EXIT_CONFIG
    try:
        loaded = load_config(args.config)
    except ConfigError as exc:
        logger.error("config error: %s", exc)
        return EXIT_CONFIG
    report = validate_assumptions(loaded.instance)
    if not report.all_pass and loaded.enforce_assumptions:
        print(report.to_text())
        return EXIT_VALIDATION

    try:
        if args.mode == "self":
            table = self_convergence(loaded.instance, loaded.scheme, args.levels)
        else:
            instance = loaded.instance
            ms = polynomial_mms(s0=instance.init.s0,
                                base=instance.phi.eval(instance.init.s0))
            table = run_mms(instance, loaded.scheme, ms, levels=args.levels)
    except SwellfrontError as exc:
        logger.error("solver error: %s", exc)
        return EXIT_SOLVER

    text = table.to_csv_text()
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")

    if table.exact:
        print("convergence: errors at machine floor, flagged exact")
        return EXIT_OK
    if args.mode == "self":
        ok = (table.orders_s[-1] >= SELF_ORDER_S_MIN
              and SELF_ORDER_U_RANGE[0] <= table.orders_u[-1] <= SELF_ORDER_U_RANGE[1])
    else:
        ok = (all(r >= MMS_RATIO_MIN for r in table.ratios_u())
              and all(r >= MMS_RATIO_MIN for r in table.ratios_s()))
    print(f"convergence thresholds {'met' if ok else 'NOT met'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_plotdata(args) -> int:
    run_dir = Path(args.run_dir)
    try:
        manifest, bad = _check_run_dir(run_dir)
    except ConfigError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    if bad is not None:
        logger.error("hash mismatch for %s: run is tampered or incomplete", bad)
        return EXIT_HASH

    try:
        loaded = parse_config_dict(tomllib.loads(manifest["config_echo"]),
                                   raw_text=manifest["config_echo"])
        result = load_result(run_dir / manifest["outputs"]["result_json"])
    except (ConfigError, KeyError, tomllib.TOMLDecodeError) as exc:
        logger.error("cannot reload run: %s", exc)
        return EXIT_CONFIG

    instance = loaded.instance
    try:
        th = VerificationThresholds.from_instance(instance, solver=result.solver)
    except AssumptionViolationError as exc:
        logger.error("thresholds not definable for this instance: %s", exc)
        return EXIT_VALIDATION

    plots = run_dir / "plots"
    plots.mkdir(exist_ok=True)

    lines = ["t,s,s_star,front_cap"]
    for i in range(result.times.size):
        lines.append(",".join(_float_repr(v) for v in (
            result.times[i], result.fronts[i], th.sstar, th.front_cap)))
    (plots / "front_trajectory.csv").write_text("\n".join(lines) + "\n")

    lines = ["t,u_at_a,u_at_s,u_min,u_max"]
    for i in range(result.times.size):
        lines.append(",".join(_float_repr(v) for v in (
            result.times[i], result.u_left[i], result.u_right[i],
            th.u_min, th.u_max)))
    (plots / "boundary_values.csv").write_text("\n".join(lines) + "\n")

    lines = ["t,z,u"]
    a = instance.params.a
    for snap in result.snapshots:
        phys = to_physical(FixedProfile(values=snap.values), snap.s, a)
        z = phys.grid(a)
        for zj, uj in zip(z, phys.values):
            lines.append(f"{_float_repr(snap.t)},{_float_repr(zj)},{_float_repr(uj)}")
    (plots / "profiles.csv").write_text("\n".join(lines) + "\n")

    print(f"plot data written to {plots}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swellfront",
        description="Simulate and audit the one-dimensional swelling front problem.",
        epilog="SWELLFRONT_SEED is reserved and unused (all runs are deterministic).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one solver on one config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--solver", choices=["frontfix", "oracle"], default="frontfix")
    p.add_argument("--stride", type=int, default=None, help="snapshot stride override")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="audit a completed run directory")
    p.add_argument("run_dir")
    p.add_argument("--no-refine", action="store_true",
                   help="skip the refinement companion (cheap checks only)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="run both solvers and compare trajectories")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="run a parameter sweep from a sweep spec")
    p.add_argument("spec")
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=None, help="max parallel runs")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("convergence", help="grid-convergence study")
    p.add_argument("--config", required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--mode", choices=["self", "mms"], default="self")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("plotdata", help="emit plot-ready CSV files for a run")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_plotdata)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s",
                        stream=sys.stderr)
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
