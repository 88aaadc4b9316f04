"""Command-line entry point: ``searelax <subcommand> --config run.json [--out PATH] [--format csv|json] [--seed N]``.

Exit codes: 0 success, 1 domain error (infeasible request, failed check),
2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import io
from .equilibria import classify_stability, enumerate_feasible_masks, solve_canonical, solve_partial
from .errors import ConfigError, SearelaxError
from .integrator import integrate, integrate_lemanska
from .scenarios import equilibrium_families, es_scan, perturb_factors, seven_trajectory_study
from .state import Distribution
from .twolevel import LEMANSKA, SEA, closed_form, entropy_rate_two_level, lemanska_path, rate_two_level

COMMANDS = ("equilibrium", "masks", "relax", "compare-lemanska", "two-level", "study-seven", "scan-es", "families", "check")
NEEDS_SPECTRUM = {"equilibrium", "masks", "relax", "compare-lemanska", "study-seven", "scan-es", "families"}


def _spectrum(cfg: io.RunConfig) -> np.ndarray:
    io.require(cfg, "spectrum")
    return np.array(cfg.spectrum)


def _initial_state(cfg: io.RunConfig, e: np.ndarray) -> Distribution:
    if cfg.initial is not None and cfg.perturbation is not None:
        raise ConfigError("give either 'initial' or 'perturbation', not both")
    if cfg.initial is not None:
        if len(cfg.initial.p) != e.size:
            raise ConfigError(f"initial.p has {len(cfg.initial.p)} entries for {e.size} levels")
        return Distribution(cfg.initial.p)
    if cfg.perturbation is not None:
        return perturb_factors(e, cfg.perturbation)[1]
    raise ConfigError("missing required field 'initial' (or 'perturbation')")


def _solution_record(sol, e) -> dict:
    return {
        "kind": sol.kind,
        "mask": sol.mask.as_ints(),
        "beta": sol.beta,
        "beta_defined": sol.beta_defined,
        "E": sol.energy,
        "S": sol.entropy,
        "stability": classify_stability(sol, e).value,
        "p": sol.probs,
    }


def cmd_equilibrium(cfg, args) -> int:
    e = _spectrum(cfg)
    io.require(cfg, "equilibrium")
    req = cfg.equilibrium
    sol = solve_canonical(e, req.E) if req.mask is None else solve_partial(e, req.E, req.mask)
    if args.out is None:
        print(f"kind: {sol.kind}")
        print(f"mask: {sol.mask}")
        print(f"beta = {sol.beta!r}" + ("" if sol.beta_defined else " (arbitrary: single occupied energy)"))
        print(f"E = {sol.energy!r}")
        print(f"S = {sol.entropy!r}")
        print("p = " + " ".join(io.fmt_csv(x) for x in sol.probs))
        return 0
    if args.format == "json":
        io.emit(io.dumps_json(_solution_record(sol, e)), args.out)
    else:
        io.write_table(["level", "energy", "p"], [(i + 1, e[i], sol.probs[i]) for i in range(e.size)], "csv", args.out)
    return 0


def cmd_masks(cfg, args) -> int:
    e = _spectrum(cfg)
    io.require(cfg, "masks")
    E = cfg.masks.E
    header = ["mask", "occupied", "beta", "S"] + [f"p_{i + 1}" for i in range(e.size)]
    rows = []
    for m in enumerate_feasible_masks(e, E):
        sol = solve_partial(e, E, m)
        rows.append([str(m), m.count, sol.beta if sol.beta_defined else None, sol.entropy, *sol.probs])
    io.write_table(header, rows, args.format, args.out, {"E": E})
    return 0


def cmd_relax(cfg, args) -> int:
    e = _spectrum(cfg)
    p0 = _initial_state(cfg, e)
    traj = integrate(p0, e, cfg.tau, cfg.integrator, cfg.kB)
    io.write_trajectory(traj, args.format, args.out, cfg.source)
    print(f"{traj.terminal_status} at t = {traj.t_end:.6g} after {traj.diagnostics.steps} steps", file=sys.stderr)
    return 0


def cmd_compare_lemanska(cfg, args) -> int:
    e = _spectrum(cfg)
    p0 = _initial_state(cfg, e)
    sea = integrate(p0, e, cfg.tau, cfg.integrator, cfg.kB)
    lem = integrate_lemanska(p0, e, cfg.integrator, cfg.lemanska, cfg.kB)
    if args.format == "json":
        doc = {"sea": io.trajectory_json(sea), "lemanska": io.trajectory_json(lem), "config": cfg.source}
        io.emit(io.dumps_json(doc), args.out)
    else:
        header = io.trajectory_columns(e.size) + ["model"]
        rows = list(io.trajectory_rows(sea, ("sea",))) + list(io.trajectory_rows(lem, ("lemanska",)))
        io.write_table(header, rows, "csv", args.out)
    return 0


def cmd_two_level(cfg, args) -> int:
    req = cfg.two_level
    t = np.linspace(req.t_min, req.t_max, req.n_points) * cfg.tau
    p_sea = closed_form(req.p0, t, cfg.tau)
    p_lem = lemanska_path(req.p0, t / cfg.tau, req.upsilon, req.step)
    rows = []
    for k in range(t.size):
        ps, pl = float(p_sea[k]), float(p_lem[k])
        lem_ok = 0.0 < pl < 1.0
        rows.append([
            t[k], ps, rate_two_level(ps, SEA, cfg.tau), entropy_rate_two_level(ps, SEA, cfg.tau, cfg.kB),
            pl if lem_ok else None,
            rate_two_level(pl, LEMANSKA, upsilon=req.upsilon) if lem_ok else None,
            entropy_rate_two_level(pl, LEMANSKA, kB=cfg.kB, upsilon=req.upsilon) if lem_ok else None,
        ])
    header = ["t", "p_sea", "dp_dt_sea", "dS_dt_sea", "p_lemanska", "dp_dt_lemanska", "dS_dt_lemanska"]
    io.write_table(header, rows, args.format, args.out, {"p0": req.p0, "tau": cfg.tau, "upsilon": req.upsilon})
    return 0


def cmd_study_seven(cfg, args) -> int:
    e = _spectrum(cfg)
    runs = seven_trajectory_study(e, cfg.study.E, cfg.study.lam, cfg.tau, cfg.integrator, kB=cfg.kB)
    target = solve_canonical(e, cfg.study.E).probs
    n = e.size
    header = (["run", "mask", "forward_status", "forward_t_end", "forward_dist_to_canonical",
               "backward_status", "backward_t_end"] + [f"primordial_{i + 1}" for i in range(n)]
              + [f"p0_{i + 1}" for i in range(n)])
    rows = []
    for k, r in enumerate(runs, start=1):
        dist = float(np.max(np.abs(r.forward.terminal_state.probs - target)))
        rows.append([k, str(r.mask), r.forward.terminal_status, r.forward.t_end, dist,
                     r.backward.terminal_status, r.backward.t_end, *r.primordial.probs, *r.p0.probs])
    io.write_table(header, rows, args.format, args.out, {"E": cfg.study.E, "lambda": cfg.study.lam})
    return 0


def cmd_scan_es(cfg, args) -> int:
    e = _spectrum(cfg)
    scan_cfg = cfg.scan
    if args.seed is not None:
        scan_cfg = replace(scan_cfg, rng_seed=args.seed)
    elif "rng_seed" not in cfg.source.get("scan", {}):
        scan_cfg = replace(scan_cfg, rng_seed=cfg.rng_seed)
    scan = es_scan(e, scan_cfg, cfg.tau, cfg.kB)
    io.write_table(io.SCAN_COLUMNS, scan.rows(), args.format, args.out, {"rng_seed": scan_cfg.rng_seed})
    return 0


def cmd_families(cfg, args) -> int:
    e = _spectrum(cfg)
    rows = []
    for fam in equilibrium_families(e, cfg.families.resolution, cfg.kB):
        for E, S, b in zip(fam.energies, fam.entropies, fam.betas):
            rows.append([str(fam.mask), E, S, b if not fam.isolated else None])
    io.write_table(["mask", "E", "S", "beta"], rows, args.format, args.out)
    return 0


def cmd_check(cfg, args) -> int:
    from .checks import run_all

    results = run_all()
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


HANDLERS = {
    "equilibrium": cmd_equilibrium,
    "masks": cmd_masks,
    "relax": cmd_relax,
    "compare-lemanska": cmd_compare_lemanska,
    "two-level": cmd_two_level,
    "study-seven": cmd_study_seven,
    "scan-es": cmd_scan_es,
    "families": cmd_families,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="searelax", description="Steepest-entropy-ascent relaxation on a finite spectrum.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=name != "check", help="JSON run configuration")
        p.add_argument("--out", default=None, help="output path (default: config output_path, else stdout)")
        p.add_argument("--format", choices=io.FORMATS, default=None)
        p.add_argument("--seed", type=int, default=None, help="override rng_seed")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = io.load_config(args.config) if args.config else io.RunConfig()
        if args.seed is not None:
            cfg = replace(cfg, rng_seed=args.seed)
        if args.command in NEEDS_SPECTRUM:
            io.require(cfg, "spectrum")
        args.out = args.out if args.out is not None else cfg.output_path
        args.format = args.format or cfg.output_format
        return HANDLERS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SearelaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
