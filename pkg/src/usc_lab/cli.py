"""Command-line surface.

Subcommands: solve, sweep, calibrate, separate, gen-profiles, dump-lp.
Exit codes: 0 success, 1 infeasible/diagnostic failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import harness, io, model
from .formulation import build_lp
from .lp import write_mps
from .model import PolicySpec


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="usc-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI config file (defaults to the bundled scenario)")
        p.add_argument("--family", type=int, choices=(1, 2, 3, 4), help="renewable-share constraint family override")
        p.add_argument("--slcr", choices=model.SLCR_LEVELS, help="storage-loss coverage override")
        p.add_argument("--phi", type=float, help="renewable share target override")
        p.add_argument("--horizon", type=int, help="horizon override (hours)")
        p.add_argument("--seed", type=int, help="profile seed override")
        p.add_argument("--backend", choices=("embedded", "scipy"), help="LP backend override")
        p.add_argument("--out", default="out", help="output directory")

    p_solve = sub.add_parser("solve", help="solve one scenario and write result files")
    common(p_solve)

    p_sweep = sub.add_parser("sweep", help="run a one-axis sensitivity sweep")
    common(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=harness.SWEEP_AXES)
    p_sweep.add_argument("--grid", required=True, help="comma-separated increasing values")
    p_sweep.add_argument("--variants", default="1a,1b,1c", help="comma-separated variant labels, e.g. 1a,1c")

    p_cal = sub.add_parser("calibrate", help="find the complete-SLCR phi matching a reported share")
    common(p_cal)
    p_cal.add_argument("--target", type=float, required=True)
    p_cal.add_argument("--report-family", type=int, default=1, choices=(1, 2, 3, 4))
    p_cal.add_argument("--report-slcr", default="proportionate", choices=model.SLCR_LEVELS)
    p_cal.add_argument("--tol", type=float, default=1e-3)

    p_sep = sub.add_parser("separate", help="factor-separation table (cycling vs ambition)")
    common(p_sep)

    p_gen = sub.add_parser("gen-profiles", help="write synthetic pv/wind profiles to CSV")
    p_gen.add_argument("--seed", type=int, default=42)
    p_gen.add_argument("--horizon", type=int, default=672)
    p_gen.add_argument("--out", default="profiles.csv")

    p_dump = sub.add_parser("dump-lp", help="write the scenario LP in MPS format")
    common(p_dump)
    p_dump.add_argument("--free-names", action="store_true", help="free-format MPS with semantic names")
    return parser


def _load(args) -> tuple[model.Scenario, io.RunConfig]:
    scenario, run_cfg = io.load_config(args.config)
    if args.horizon is not None or args.seed is not None:
        horizon = args.horizon if args.horizon is not None else scenario.horizon
        seed = args.seed if args.seed is not None else run_cfg.seed
        scenario = model.default_scenario(horizon=horizon, seed=seed, policy=scenario.policy)
        run_cfg = dataclasses.replace(run_cfg, seed=seed)
    if args.family is not None or args.slcr is not None or args.phi is not None:
        pol = scenario.policy
        family = args.family if args.family is not None else (pol.family or 1)
        slcr = args.slcr if args.slcr is not None else (pol.slcr or "complete")
        phi = args.phi if args.phi is not None else (pol.phi if pol.phi is not None else 0.8)
        scenario = dataclasses.replace(scenario, policy=PolicySpec.renewable_share(family, slcr, phi))
    if args.backend is not None:
        run_cfg = dataclasses.replace(run_cfg, backend=args.backend)
    return scenario, run_cfg


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "gen-profiles":
            path = io.write_profiles(args.seed, args.horizon, args.out)
            print(f"wrote {path}")
            return 0

        scenario, run_cfg = _load(args)

        if args.command == "dump-lp":
            problem, _ = build_lp(scenario)
            out = Path(args.out)
            if out.suffix != ".mps":
                out.mkdir(parents=True, exist_ok=True)
                out = out / "problem.mps"
            out.write_text(write_mps(problem, free=args.free_names))
            print(f"wrote {out}")
            return 0

        if args.command == "solve":
            run = harness.solve_scenario(
                scenario, backend=run_cfg.backend, feas_tol=run_cfg.feas_tol, opt_tol=run_cfg.opt_tol
            )
            files = io.write_results(run, args.out)
            if run.status != "optimal":
                print(f"solve finished: {run.status}; wrote {files['results']}", file=sys.stderr)
                return 1
            print(
                f"optimal, objective {run.solution.objective:.6e}, "
                f"cycling hours {run.cycling.hours}; wrote {len(files)} files to {args.out}"
            )
            return 0

        if args.command == "sweep":
            grid = tuple(float(v) for v in args.grid.split(","))
            variants = tuple(model.parse_variant(v.strip()) for v in args.variants.split(","))
            spec = harness.SweepSpec(base=scenario, axis=args.axis, grid=grid, variants=variants)
            rows = harness.run_sweep(spec, backend=run_cfg.backend)
            path = io.write_sweep(rows, args.out)
            bad = [r for r in rows if r.status != "optimal"]
            print(f"wrote {path} ({len(rows)} rows, {len(bad)} non-optimal)")
            return 1 if len(bad) == len(rows) else 0

        if args.command == "calibrate":
            pol = scenario.policy
            if pol.kind != "renewable_share":
                pol = PolicySpec.renewable_share(1, "complete", args.target)
            base = dataclasses.replace(
                scenario,
                policy=PolicySpec.renewable_share(pol.family, "complete", pol.phi if pol.phi is not None else args.target),
            )
            result = harness.calibrate_equivalent_target(
                base, args.target, (args.report_family, args.report_slcr),
                tol=args.tol, backend=run_cfg.backend,
            )
            for phi, share in result.trace:
                print(f"  phi={phi:.6f} -> reported {share:.6f}")
            status = "converged" if result.converged else f"FAILED ({result.message})"
            print(f"calibration {status}: phi={result.phi:.6f} reports {result.reported:.6f}")
            return 0 if result.converged else 1

        if args.command == "separate":
            pol = scenario.policy
            phi = args.phi if args.phi is not None else (pol.phi if pol.phi is not None else 0.8)
            table = harness.factor_separation(scenario, phi, backend=run_cfg.backend)
            tech_names = list(table.columns[0].capacities)
            print("column, phi, slcr, objective, curtailment, storage_loss, cycling_energy, "
                  + ", ".join(f"cap_{n}" for n in tech_names))
            for col in table.columns:
                caps = ", ".join(f"{col.capacities[n]:.1f}" for n in tech_names)
                print(
                    f"{col.label}, {col.phi:.4f}, {col.slcr}, {col.objective:.6e}, "
                    f"{col.curtailment:.4e}, {col.storage_loss:.4e}, {col.cycling_energy:.4e}, {caps}"
                )
            return 0
    except (io.ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


def main() -> None:  # console entry point
    sys.exit(cli_main())
