"""Command-line driver: ``simulate``, ``check`` and ``constants``.

Exit status: 0 success, 1 configuration or I/O error, 2 failed check suite,
3 divergence guard or non-finite output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Callable

from . import checks
from .config import RegimeWarning, SimConfig, load_config
from .constants import estimate_constants, space_norm
from .dynamics import SimulationOptions, SystemState, build_initial_state, simulate
from .errors import ConfigurationError, DivergenceError
from .io import write_checkpoint, write_csv
from .lattice import MomentumLattice, build_lattice
from .newton import NucleusState

__all__ = ["main", "build_system", "run_simulate", "run_check", "run_constants"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SUITE = 2
EXIT_DIVERGENCE = 3


def build_system(cfg: SimConfig) -> tuple[MomentumLattice, SystemState]:
    lat = build_lattice(cfg.lambda_cutoff, cfg.n_per_axis)
    nuclei = [NucleusState.gaussian(n.z, n.m, n.sigma, n.x0, n.v0) for n in cfg.nuclei]
    init = cfg.initial_state
    s0 = build_initial_state(
        init.kind, lat, nuclei, q=init.q, epsilon=init.epsilon, seed=init.seed, alpha=cfg.alpha
    )
    return lat, s0


def _require_finite(values: dict, where: str) -> None:
    for key, val in values.items():
        if isinstance(val, float) and not math.isfinite(val):
            raise DivergenceError(f"non-finite value {key}={val} in {where}")


def run_simulate(cfg: SimConfig, out_dir=None, echo: Callable[[str], None] = print) -> int:
    out = Path(out_dir if out_dir is not None else cfg.output.path)
    out.mkdir(parents=True, exist_ok=True)
    _, s0 = build_system(cfg)
    opts = SimulationOptions(
        retraction=cfg.integrator.retraction,
        retraction_period=cfg.integrator.retraction_period,
        sample_every=cfg.output.sample_every,
        divergence_bound=cfg.integrator.divergence_bound,
        keep_states=False,
    )
    traj = simulate(s0, cfg.dt, cfg.t_final, cfg.alpha, opts)
    write_csv(out / "trajectory.csv", traj.header, traj.rows)
    write_checkpoint(out / "final_q.bdfq", traj.final.q)
    last = traj.rows[-1]
    summary = {
        "steps": traj.steps,
        "dt": traj.dt,
        "t_final": float(last[0]),
        "energy_initial": float(traj.rows[0][1]),
        "energy_final": float(last[1]),
        "energy_drift": traj.energy_drift(),
        "charge_drift": traj.charge_drift(),
        "projector_residual_final": float(last[3]),
        "hs_norm_final": float(last[4]),
        "warnings": list(cfg.warnings),
    }
    _require_finite(summary, "summary")
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    for key in ("energy_drift", "charge_drift", "projector_residual_final"):
        echo(f"{key}: {summary[key]:.6e}")
    return EXIT_OK


def run_check(cfg: SimConfig, suite: str, echo: Callable[[str], None] = print) -> int:
    lat, s0 = build_system(cfg)
    runners = {"invariants": checks.invariants_suite, "oracle": checks.oracle_suite, "order": checks.order_suite}
    if suite not in runners:
        raise ConfigurationError(f"unknown suite {suite!r}")
    results = runners[suite](cfg, s0)
    first_failure = None
    for r in results:
        echo(r.line())
        if not math.isfinite(r.value):
            raise DivergenceError(f"non-finite measurement in property {r.name!r}")
        if not r.passed and first_failure is None:
            first_failure = r
    if first_failure is not None:
        echo(f"FAILED: {first_failure.name}")
        return EXIT_SUITE
    echo(f"all {len(results)} properties passed")
    return EXIT_OK


def run_constants(cfg: SimConfig, echo: Callable[[str], None] = print) -> int:
    lat, s0 = build_system(cfg)
    qn = space_norm(lat, s0.q.mat)
    c = cfg.constants
    report = estimate_constants(lat, s0.nuclei, cfg.alpha, c.c_e, qn, c.samples, c.seed)
    data = report.as_dict()
    for key, val in data.items():
        if isinstance(val, float) and math.isnan(val):
            raise DivergenceError(f"non-finite constant {key}")
        echo(f"{key}: {val}")
    tau = report.tau_admissible
    echo(f"dt_within_tau: {cfg.dt <= tau}")
    echo(f"t_final_within_tau: {cfg.t_final <= tau}")
    first, second = report.satisfies(tau, cfg.alpha, s0.nuclei) if math.isfinite(tau) else (True, True)
    echo(f"tau_satisfies_inequality_1: {first}")
    echo(f"tau_satisfies_inequality_2: {second}")
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bdfdyn", description="Cutoff BDF dynamics with classical nuclei.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="integrate and write trajectory.csv, summary.json and final_q.bdfq")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=None, help="output directory (default: output.path from the config)")
    c = sub.add_parser("check", help="run a property suite")
    c.add_argument("--config", required=True)
    c.add_argument("--suite", required=True, choices=["invariants", "oracle", "order"])
    k = sub.add_parser("constants", help="estimate the local-existence constants")
    k.add_argument("--config", required=True)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RegimeWarning)
            cfg = load_config(args.config)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        if args.command == "simulate":
            return run_simulate(cfg, args.out)
        if args.command == "check":
            return run_check(cfg, args.suite)
        return run_constants(cfg)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
