"""Config-driven command line: certify, simulate, sweep, oracle-check, gn-estimate.

Exit codes: 0 success, 1 malformed config or missing file, 2 infeasible
certificate, 3 run terminated early (blow-up guard or solver failure; partial
outputs are still written).  Set ZKDAMPER_LOG=debug|info for verbosity.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .certificate import InfeasibleError
from .diagnostics import DegenerateWindowError, fit_decay_rate, gn_estimate, observability_ratio
from .fields import ScalarField, write_field
from .scenario import (
    ConfigError,
    Scenario,
    certificate_from_config,
    load_config,
    params_from_config,
    scenario_from_config,
)
from .stepper import Trajectory, oracle_compare, simulate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_ABORTED = 3

CSV_HEADER = "t,E_total,E_state,E_delay,V_lyap,V1,V2,flux_x0,flux_y0,linf_state"

log = logging.getLogger("zkdamper")


def fmt17(x: float) -> str:
    return f"{x:.17g}"


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return None if not math.isfinite(x) else x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def write_json(path: str | None, payload: dict) -> str:
    text = json.dumps(_json_ready(payload), indent=2, allow_nan=False)
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text + "\n")
    return text


def write_trajectory_csv(path: str, traj: Trajectory) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in traj.records:
            fh.write(",".join(fmt17(v) for v in rec.csv_values()) + "\n")


def summarize(traj: Trajectory, scenario: Scenario) -> dict:
    rate = intercept = resid = None
    times = np.asarray(traj.times)
    try:
        rate, intercept, resid = fit_decay_rate(times, traj.e_total)
    except (DegenerateWindowError, ValueError):
        pass
    obs = observability_ratio(times, traj.records)
    cert = scenario.certificate if scenario.attach_certificate else None
    return {
        "rate_fit": rate,
        "rate_residual": resid,
        "theta_cert": cert.theta if cert else None,
        "kappa_cert": cert.kappa if cert else None,
        "envelope_violations": traj.meta.get("envelope_violations"),
        "status": traj.status,
        "rate_intercept": intercept,
        "K_emp": obs.K_emp,
        "obs_lhs": obs.lhs,
        "obs_rhs": obs.rhs,
        "obs_flag": obs.flag,
        "energy_mode": scenario.energy_mode,
        "feedback_mode": scenario.feedback.mode,
        "floor_on": scenario.floor_on,
        "data_h_norm": traj.meta.get("data_h_norm"),
        "radius_ok": traj.meta.get("radius_ok"),
        "max_l2": traj.meta.get("max_l2"),
        "l2h1_integral": traj.meta.get("l2h1_integral"),
        "seed": scenario.seed,
        "n_records": len(traj.records),
    }


def run_simulation(scenario: Scenario) -> tuple[Trajectory, dict]:
    setup = scenario.build_setup()
    traj = simulate(setup)
    summary = summarize(traj, scenario)
    if scenario.csv_path:
        write_trajectory_csv(scenario.csv_path, traj)
    if scenario.summary_path:
        write_json(scenario.summary_path, summary)
    if scenario.snapshot_dir and traj.snapshots:
        snap_dir = Path(scenario.snapshot_dir)
        snap_dir.mkdir(parents=True, exist_ok=True)
        for i, (t, field) in enumerate(traj.snapshots):
            write_field(snap_dir / f"state_{i:05d}.txt", field)
    return traj, summary


def cmd_certify(args) -> int:
    try:
        cfg = load_config(args.config)
        params, _, _ = params_from_config(cfg)
        cert = certificate_from_config(cfg, params)
    except InfeasibleError as exc:
        payload = {
            "xi": None, "eta": None, "sigma": None, "theta": None, "kappa": None,
            "T0": None, "nu": None, "Tmin": None, "r_max": None,
            "feasible": False, "assumed_constants": {},
            "diagnostics": {"reason": str(exc)},
        }
        out = _certificate_output_path(args)
        text = write_json(out, payload)
        print(text)
        return EXIT_INFEASIBLE
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG

    text = write_json(_certificate_output_path(args), cert.to_json_dict())
    print(text)
    return EXIT_OK if cert.feasible else EXIT_INFEASIBLE


def _certificate_output_path(args) -> str | None:
    if getattr(args, "out", None):
        return args.out
    try:
        cfg = load_config(args.config)
        if cfg.has_option("output", "certificate"):
            return cfg.get("output", "certificate")
    except ConfigError:
        pass
    return None


def cmd_simulate(args) -> int:
    try:
        scenario = scenario_from_config(load_config(args.config), seed=args.seed)
        traj, summary = run_simulation(scenario)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    print(write_json(None, summary))
    return EXIT_OK if traj.status == "completed" else EXIT_ABORTED


SWEEP_AXES = {
    "b_inf": ("feedback", "b_amplitude"),
    "mu2": ("feedback", "mu2"),
    "h": ("delay", "h"),
    "amplitude": ("init", "amplitude"),
}


def run_sweep_point(config_path: str, axis: str, value: float, seed: int) -> dict:
    """One sweep row; infeasible parameter combinations are reported, not run."""
    cfg = load_config(config_path)
    section, key = SWEEP_AXES[axis]
    if not cfg.has_section(section):
        cfg.add_section(section)
    cfg.set(section, key, repr(value))
    try:
        scenario = scenario_from_config(cfg, seed=seed)
    except (ConfigError, InfeasibleError) as exc:
        return {"value": value, "rate_fit": None, "envelope_violations": None,
                "status": "infeasible", "detail": str(exc)}
    _, summary = run_sweep_scenario(scenario)
    return {"value": value, "rate_fit": summary["rate_fit"],
            "envelope_violations": summary["envelope_violations"],
            "status": summary["status"], "detail": ""}


def run_sweep_scenario(scenario: Scenario) -> tuple[Trajectory, dict]:
    # per-point runs never write the scenario's own output files
    scenario.csv_path = None
    scenario.summary_path = None
    scenario.snapshot_dir = None
    return run_simulation(scenario)


def cmd_sweep(args) -> int:
    if args.axis not in SWEEP_AXES:
        log.error("unknown sweep axis %r; choose from %s", args.axis, sorted(SWEEP_AXES))
        return EXIT_CONFIG
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError:
        log.error("bad --values list %r", args.values)
        return EXIT_CONFIG
    if not values:
        log.error("empty --values list")
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        out_csv = cfg.get("output", "csv") if cfg.has_option("output", "csv") else None
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG

    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(
                pool.map(
                    run_sweep_point,
                    [args.config] * len(values),
                    [args.axis] * len(values),
                    values,
                    [args.seed] * len(values),
                )
            )
    else:
        rows = [run_sweep_point(args.config, args.axis, v, args.seed) for v in values]

    lines = ["value,rate_fit,envelope_violations,status"]
    for row in rows:
        rate = fmt17(row["rate_fit"]) if row["rate_fit"] is not None else "nan"
        viol = str(row["envelope_violations"]) if row["envelope_violations"] is not None else ""
        lines.append(f"{fmt17(row['value'])},{rate},{viol},{row['status']}")
    text = "\n".join(lines) + "\n"
    if out_csv:
        Path(out_csv).parent.mkdir(parents=True, exist_ok=True)
        Path(out_csv).write_text(text)
    print(text, end="")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    try:
        cfg = load_config(args.config)
        scenario = scenario_from_config(cfg, seed=args.seed)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    line = scenario.make_history()
    try:
        rep = oracle_compare(
            scenario.grid, scenario.params, scenario.feedback, scenario.n_rho,
            scenario.zeta0, line, T=scenario.scheme.t_end, dt=scenario.scheme.dt,
        )
    except ValueError as exc:
        log.error("oracle check refused: %s", exc)
        return EXIT_CONFIG
    payload = {"rel_error": rep.rel_error, "rel_error_half": rep.rel_error_half,
               "ratio": rep.ratio}
    text = write_json(scenario.summary_path, payload)
    print(text)
    return EXIT_OK


def cmd_gn_estimate(args) -> int:
    try:
        cfg = load_config(args.config)
        _, grid, _ = params_from_config(cfg)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    rng = np.random.default_rng(args.seed)
    fields = []
    for _ in range(args.ensemble):
        f = ScalarField.zeros(grid)
        X, Y = grid.meshgrid()
        for _ in range(4):
            kx, ky = rng.integers(1, 5, size=2)
            amp = rng.standard_normal()
            f.values += amp * np.sin(kx * np.pi * X / grid.L) * np.sin(ky * np.pi * Y / grid.L)
        if np.max(np.abs(f.values)) > 0:
            fields.append(f)
    c_emp = gn_estimate(fields)
    payload = {"C_emp": c_emp, "ensemble": len(fields) + 1, "seed": args.seed,
               "nx": grid.nx, "ny": grid.ny}
    out = None
    if cfg.has_option("output", "summary"):
        out = cfg.get("output", "summary")
    text = write_json(out, payload)
    print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zkdamper",
        description="Delayed, damped ZK equation: certificates, simulation, diagnostics",
    )
    parser.add_argument("--version", action="version", version=f"zkdamper {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="scenario config file")
        p.add_argument("--seed", type=int, default=0, help="seed recorded in outputs")

    p = sub.add_parser("certify", help="evaluate a stability certificate")
    add_common(p)
    p.add_argument("--out", help="certificate JSON path (overrides [output] certificate)")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="run one scenario, write CSV + JSON summary")
    add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="sweep one parameter axis over a value list")
    add_common(p)
    p.add_argument("--axis", required=True, help=f"one of {sorted(SWEEP_AXES)}")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--jobs", type=int, default=1, help="concurrent runs")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle-check", help="stepper vs dense matrix exponential")
    add_common(p)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("gn-estimate", help="empirical Gagliardo-Nirenberg constant")
    add_common(p)
    p.add_argument("--ensemble", type=int, default=16, help="random fields in the ensemble")
    p.set_defaults(func=cmd_gn_estimate)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("ZKDAMPER_LOG", "warning").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        log.error("missing file: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
