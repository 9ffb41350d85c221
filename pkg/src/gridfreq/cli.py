"""Command-line driver: batch scenario runs, profile synthesis, comparisons.

Subcommands:
    run             run scenarios from a manifest (or flags) and export results
    synth-profiles  resample a minute-resolution series to 1 s
    compare         compare two metrics JSON files
    validate        validate a grid config and scenario files

Exit codes: 0 success, 2 validation error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import engine, grid, metrics, profiles

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2


def _load_model(spec: str) -> grid.GridModel:
    if spec == "ieee39":
        return grid.ieee39()
    return grid.load_grid_config(spec)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _run_one(args):
    model, scenario, outdir = args
    tr = engine.run_scenario(model, scenario)
    m = metrics.compute_metrics(tr)
    metrics.export_results(tr, m, outdir)
    return scenario.name, m


def cmd_run(args) -> int:
    if args.manifest:
        doc = yaml.safe_load(Path(args.manifest).read_text())
        grid_spec = doc.get("grid", "ieee39")
        scenario_paths = doc.get("scenarios", [])
        outdir = Path(doc.get("output_dir", args.out))
        jobs = int(doc.get("jobs", args.jobs))
        seed = doc.get("seed")
        base = Path(args.manifest).parent
        scenario_paths = [str((base / p)) if not os.path.isabs(p) else p
                          for p in scenario_paths]
    else:
        grid_spec = args.grid
        scenario_paths = args.scenario or []
        outdir = Path(args.out)
        jobs = args.jobs
        seed = args.seed

    if not scenario_paths:
        print("error: no scenarios given", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        model = _load_model(grid_spec)
        scenarios = []
        for p in scenario_paths:
            sc = engine.load_scenario(p)
            if seed is not None:
                sc = engine.Scenario(name=sc.name, case=sc.case, events=sc.events,
                                     duration_s=sc.duration_s, dt_s=sc.dt_s,
                                     seed=int(seed), output_dt_s=sc.output_dt_s)
            sc.validate_against(model)
            scenarios.append(sc)
    except (grid.GridConfigError, engine.ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    outdir.mkdir(parents=True, exist_ok=True)
    work = [(model, sc, outdir / sc.name) for sc in scenarios]
    results = {}
    try:
        if jobs > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as ex:
                for name, m in ex.map(_run_one, work):
                    results[name] = m
        else:
            for item in work:
                name, m = _run_one(item)
                results[name] = m
    except Exception as exc:  # noqa: BLE001 - surface any scenario failure
        print(f"error: scenario run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    lines = ["scenario  case  R_ls     T_ls[s]   EENS[MWh]"]
    for sc in scenarios:
        m = results[sc.name]
        lines.append(f"{sc.name:<9} {m.case:<5} {m.r_ls:<8.1%} "
                     f"{m.t_ls_s:<9.1f} {m.eens_mwh:.3f}")
    summary = "\n".join(lines) + "\n"
    (outdir / "summary.txt").write_text(summary)
    print(summary, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# synth-profiles
# ---------------------------------------------------------------------------

def cmd_synth_profiles(args) -> int:
    try:
        if args.input:
            src = profiles.read_minute_csv(args.input)
        else:
            src = profiles.synthetic_minute_walk(
                n_minutes=args.minutes, start=args.start,
                sigma=args.walk_sigma, seed=args.seed)
        pu = profiles.resample_wind(
            src, profiles.NoiseParams(sigma=args.sigma, seed=args.seed))
        out = (profiles.scale_wind(pu, args.rating)
               if args.rating else pu)
        profiles.write_second_csv(out, args.output)
    except (profiles.ProfileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"wrote {len(out)} samples to {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def cmd_compare(args) -> int:
    try:
        a = metrics.load_metrics(args.a)
        b = metrics.load_metrics(args.b)
    except (metrics.MetricsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(metrics.format_comparison(metrics.compare_cases(a, b)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        model = _load_model(args.grid)
        print(f"grid ok: {len(model.buses)} buses, {len(model.lines)} lines, "
              f"{len(model.generators)} generators")
        for p in args.scenario or []:
            sc = engine.load_scenario(p)
            sc.validate_against(model)
            print(f"scenario ok: {sc.name} (case {sc.case}, "
                  f"{len(sc.events)} events, {sc.duration_s:.0f}s)")
    except (grid.GridConfigError, engine.ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gridfreq", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    default_out = os.environ.get("GRIDFREQ_OUTPUT_DIR", "results")

    p = sub.add_parser("run", help="run scenarios and export results")
    p.add_argument("--manifest", help="YAML manifest (grid, scenarios, output_dir, jobs, seed)")
    p.add_argument("--grid", default="ieee39", help="grid config path or 'ieee39'")
    p.add_argument("--scenario", action="append", help="scenario YAML (repeatable)")
    p.add_argument("--out", default=default_out, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="parallel scenario workers")
    p.add_argument("--seed", type=int, help="override the scenario seeds")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("synth-profiles", help="resample a minute series to 1 s")
    p.add_argument("--input", help="minute-resolution CSV (timestamp, p.u. value)")
    p.add_argument("--minutes", type=int, default=11,
                   help="synthetic source length when no input is given")
    p.add_argument("--start", type=float, default=0.8,
                   help="synthetic source starting level, p.u.")
    p.add_argument("--walk-sigma", type=float, default=0.03,
                   help="synthetic source per-minute step std")
    p.add_argument("--sigma", type=float, default=0.002,
                   help="per-second increment std")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rating", type=float, help="scale output by this MW rating")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth_profiles)

    p = sub.add_parser("compare", help="compare two metrics JSON files")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="validate configs without running")
    p.add_argument("--grid", default="ieee39")
    p.add_argument("--scenario", action="append")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
