"""End-to-end acceptance checks, shared by ``searelax check`` and the test suite.

Each ``check_*`` function measures the relevant quantities and returns a
:class:`CheckResult` whose ``metrics`` hold the raw numbers, so callers can
apply (or report) the thresholds themselves.
"""

from __future__ import annotations

import json
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import sea_rhs, sea_rhs_determinant, sea_rhs_sqrt, variational_check
from .equilibria import enumerate_feasible_masks, solve_canonical, solve_partial
from .functionals import entropy, entropy_rate, entropy_rate_fd, massieu_report
from .integrator import BACKWARD, CONVERGED, FORWARD, IntegratorConfig, first_passage, integrate
from .scenarios import EsScanConfig, equilibrium_families, es_scan, family_slope, primordial_multiset, seven_trajectory_study
from .twolevel import closed_form, transit_time

REFERENCE_LEVELS = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])
REFERENCE_E = 0.4
REFERENCE_BETA = 0.7321
REFERENCE_PROBS = np.array([0.3474, 0.2722, 0.2133, 0.1671])
PRIMORDIAL = {(0.4, 0.0, 0.6, 0.0): 2, (0.6, 0.0, 0.0, 0.4): 3, (0.0, 0.9, 0.0, 0.1): 2}
FLAT_PAIR = np.array([0.0, 0.0])


@dataclass
class CheckResult:
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    elapsed: float = 0.0
    trajectories: list = field(default_factory=list, repr=False)

    def line(self) -> str:
        shown = ", ".join(f"{k}={_short(v)}" for k, v in self.metrics.items())
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name} ({self.elapsed:.2f}s) {shown}"


def _short(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


def _rel(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale if scale > 0 else 0.0


def check_canonical() -> CheckResult:
    t0 = time.perf_counter()
    sol = solve_canonical(REFERENCE_LEVELS, REFERENCE_E)
    beta_err = abs(sol.beta - REFERENCE_BETA)
    p_err = float(np.max(np.abs(sol.probs - REFERENCE_PROBS)))
    dt = time.perf_counter() - t0
    return CheckResult("1 canonical regression", beta_err <= 5e-5 and p_err <= 5e-5 and dt < 1.0,
                       {"beta": sol.beta, "beta_err": beta_err, "p_err": p_err}, dt)


def check_two_level(p0s=(0.01, 0.25, 0.499), step: float = 1e-3, horizon: float = 5.0) -> CheckResult:
    t0 = time.perf_counter()
    errs, trajs = {}, []
    for p0 in p0s:
        worst = 0.0
        for direction in (FORWARD, BACKWARD):
            cfg = IntegratorConfig(step=step, max_time=horizon, direction=direction, record_every=10,
                                   convergence_tol=1e-300, boundary_floor=1e-300)
            tr = integrate([1.0 - p0, p0], FLAT_PAIR, cfg=cfg)
            trajs.append(tr)
            worst = max(worst, float(np.max(np.abs(tr.probs[:, 1] - closed_form(p0, tr.times)))))
            if abs(abs(tr.t_end) - horizon) > 1e-9:
                worst = math.inf
        errs[f"err_p0={p0}"] = worst
    dt = time.perf_counter() - t0
    return CheckResult("2 two-level oracle", all(v < 1e-8 for v in errs.values()) and dt < 5.0, errs, dt, trajs)


def check_transit_times(ns=range(2, 7), step: float = 1e-3) -> CheckResult:
    t0 = time.perf_counter()
    law_err, num_err = 0.0, 0.0
    passages = []
    for n in ns:
        p_from, p_to = 10.0 ** (-2 * n), 1e-2
        exact = transit_time(p_from, p_to)
        law_err = max(law_err, abs(exact - math.log(n)) / math.log(n))
        fp = first_passage([1.0 - p_from, p_from], FLAT_PAIR, 1, p_to, step=step)
        passages.append(fp)
        numeric = fp.time
        num_err = max(num_err, abs(numeric - exact) / exact)
    dt = time.perf_counter() - t0
    return CheckResult("3 transit-time law", law_err < 0.10 and num_err < 1e-6,
                       {"max_rel_dev_from_ln_n": law_err, "max_rel_err_integrator": num_err}, dt, passages)


def check_seven(cfg: IntegratorConfig = IntegratorConfig(max_time=30.0)) -> CheckResult:
    """Forward runs must be within tolerance at t = cfg.max_time (30 tau by default)."""
    t0 = time.perf_counter()
    runs = seven_trajectory_study(REFERENCE_LEVELS, REFERENCE_E, 0.9, cfg=cfg)
    target = solve_canonical(REFERENCE_LEVELS, REFERENCE_E).probs
    fwd_err = max(float(np.max(np.abs(r.forward.terminal_state.probs - target))) for r in runs)
    # match each primordial state to the nearest reference state
    found: dict = {}
    prim_err = 0.0
    refs = [np.array(k) for k in PRIMORDIAL]
    for r in runs:
        q = r.primordial.probs
        d = [float(np.max(np.abs(q - ref))) for ref in refs]
        k = int(np.argmin(d))
        prim_err = max(prim_err, d[k])
        found[tuple(refs[k])] = found.get(tuple(refs[k]), 0) + 1
    multiset_ok = found == {tuple(np.array(k)): v for k, v in PRIMORDIAL.items()}
    dt = time.perf_counter() - t0
    trajs = [r.forward for r in runs] + [r.backward for r in runs]
    ok = fwd_err < 1e-4 and prim_err < 1e-3 and multiset_ok and dt < 30.0
    return CheckResult("4 seven-trajectory study", ok,
                       {"max_forward_err": fwd_err, "max_primordial_err": prim_err, "multiset_match": multiset_ok,
                        "primordial": str(primordial_multiset(runs))}, dt, trajs)


def check_dual_routes(n_states: int = 1000, seed: int = 0) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    e = REFERENCE_LEVELS
    rhs_dev = rate_dev = mm_dev = 0.0
    for _ in range(n_states):
        p = rng.dirichlet(np.ones(e.size))
        a = sea_rhs(p, e).dp_dt
        d = sea_rhs_determinant(p, e)
        y = np.sqrt(p)
        s = 2.0 * y * sea_rhs_sqrt(y / np.linalg.norm(y), e).dy_dt
        rhs_dev = max(rhs_dev, _rel(a, d), _rel(a, s))
        rate_dev = max(rate_dev, _rel(entropy_rate(p, e), entropy_rate_fd(p, e)))
        rep = massieu_report(p, e, with_rate=False)
        mm_dev = max(mm_dev, _rel(rep.cov_MM, rep.cov_SS - rep.beta ** 2 * rep.cov_EE))
    dt = time.perf_counter() - t0
    return CheckResult("5 dual-route equivalence", rhs_dev < 1e-12 and rate_dev < 1e-10 and mm_dev < 1e-10,
                       {"rhs_rel_dev": rhs_dev, "rate_rel_dev": rate_dev, "massieu_identity_rel_dev": mm_dev}, dt)


def masked_runs() -> list:
    """Forward and backward runs from a state with an empty level, for the zero-preservation check."""
    p0 = np.array([0.5, 0.3, 0.0, 0.2])
    return [integrate(p0, REFERENCE_LEVELS, cfg=IntegratorConfig(direction=d, max_time=20.0, record_every=10))
            for d in (FORWARD, BACKWARD)]


def check_conservation(trajectories) -> CheckResult:
    """Invariant drift, entropy monotonicity and zero preservation over the given runs."""
    t0 = time.perf_counter()
    norm = energy = drop = 0.0
    zeros_kept = True
    for tr in trajectories:
        dg = tr.diagnostics
        norm = max(norm, dg.max_norm_drift)
        energy = max(energy, dg.max_energy_drift)
        drop = max(drop, dg.max_entropy_decrease)
        if not hasattr(tr, "samples"):
            continue
        P = tr.probs
        z = P[0] == 0.0
        if np.any(P[:, z] != 0.0):
            zeros_kept = False
    dt = time.perf_counter() - t0
    ok = norm < 1e-9 and energy < 1e-9 and drop <= 1e-10 and zeros_kept
    return CheckResult("6 conservation and monotonicity", ok,
                       {"max_norm_drift": norm, "max_rel_energy_drift": energy, "max_entropy_drop_per_step": drop,
                        "zeros_kept": zeros_kept, "runs": len(trajectories)}, dt)


def check_variational(n_states: int = 20, n_dirs: int = 10_000, seed: int = 0) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for k in range(n_states):
        y = np.sqrt(rng.dirichlet(np.ones(REFERENCE_LEVELS.size)))
        y /= np.linalg.norm(y)
        res = variational_check(y, REFERENCE_LEVELS, n_dirs, rng_seed=seed * 1000 + k)
        worst = max(worst, res.max_competitor - res.sea_value)
    dt = time.perf_counter() - t0
    return CheckResult("7 variational maximality", worst <= 1e-12, {"max_competitor_excess": worst}, dt)


def leak_state(sol, level: int, amount: float, spec) -> np.ndarray:
    """Move ``amount`` onto an empty level, taken from the lowest and highest occupied levels so E is unchanged."""
    e = np.asarray(spec, dtype=float)
    p = sol.probs.copy()
    occ = np.flatnonzero(p > 0)
    lo, hi = occ[np.argmin(e[occ])], occ[np.argmax(e[occ])]
    # solve d_lo + d_hi = -amount, e_lo d_lo + e_hi d_hi = -e_level amount
    A = np.array([[1.0, 1.0], [e[lo], e[hi]]])
    d_lo, d_hi = np.linalg.solve(A, [-amount, -e[level] * amount])
    p[level] += amount
    p[lo] += d_lo
    p[hi] += d_hi
    return p


def check_fixed_points_and_instability() -> CheckResult:
    t0 = time.perf_counter()
    e = REFERENCE_LEVELS
    sols = [solve_canonical(e, REFERENCE_E)] + [solve_partial(e, REFERENCE_E, m) for m in enumerate_feasible_masks(e, REFERENCE_E)]
    worst = max(float(np.max(np.abs(sea_rhs(s.probs, e).dp_dt))) for s in sols)
    pe = solve_partial(e, REFERENCE_E, [1, 1, 0, 1])
    p0 = leak_state(pe, 2, 1e-6, e)
    tr = integrate(p0, e, cfg=IntegratorConfig(max_time=100.0))
    gain = entropy(tr.terminal_state) - pe.entropy
    dist = float(np.max(np.abs(tr.terminal_state.probs - sols[0].probs)))
    dt = time.perf_counter() - t0
    ok = worst < 1e-10 and tr.terminal_status == CONVERGED and gain > 0 and dist < 1e-6
    return CheckResult("8 fixed points and instability", ok,
                       {"max_rhs_at_equilibria": worst, "n_equilibria": len(sols), "entropy_gain": gain,
                        "leak_end_dist_to_canonical": dist}, dt, [tr])


def check_es_scan(resolution: int = 40, samples: int = 200, seed: int = 0) -> CheckResult:
    t0 = time.perf_counter()
    e = REFERENCE_LEVELS
    cfg = EsScanConfig(entropy_resolution=resolution, samples_per_point=samples, rng_seed=seed)
    scan = es_scan(e, cfg)
    pts = scan.points
    canon = [p.s_dot_max for i, p in enumerate(pts) if i % resolution == resolution - 1]
    interior = [p.s_dot_max for i, p in enumerate(pts) if 0 < i % resolution < resolution - 1]
    slope_err = 0.0
    for fam in equilibrium_families(e, 8):
        if fam.isolated:
            continue
        for E in fam.energies[1:-1]:
            fd, kb_beta = family_slope(e, float(E), fam.mask)
            slope_err = max(slope_err, abs(fd - kb_beta))
    dt = time.perf_counter() - t0
    ok = max(canon) < 1e-8 and min(interior) > 0 and slope_err < 1e-6 and dt < 60.0
    return CheckResult("9 E-S scan sanity", ok,
                       {"max_rate_on_canonical": max(canon), "min_interior_rate": min(interior),
                        "max_slope_err": slope_err, "grid": f"{len(scan.energies)}x{resolution}"}, dt)


DETERMINISM_CONFIGS = {
    "equilibrium": {"spectrum": ["0", "1/3", "2/3", "1"], "equilibrium": {"E": 0.4}, "output_format": "json"},
    "relax": {"spectrum": ["0", "1/3", "2/3", "1"], "perturbation": {"lambda": 0.9, "mask": [1, 1, 0, 1], "E": 0.4},
              "integrator": {"max_time": 5.0}},
    "two-level": {"two_level": {"p0": 0.25}},
    "scan-es": {"spectrum": ["0", "1/3", "2/3", "1"], "scan": {"entropy_resolution": 6, "samples_per_point": 20}, "rng_seed": 7},
    "compare-lemanska": {"spectrum": [0, 0], "initial": {"p": [0.75, 0.25]}, "integrator": {"max_time": 3.0},
                         "output_format": "json"},
}


def check_determinism() -> CheckResult:
    from .cli import main

    t0 = time.perf_counter()
    mismatched = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for cmd, doc in DETERMINISM_CONFIGS.items():
            cfg_path = tmp / f"{cmd}.json"
            cfg_path.write_text(json.dumps(doc))
            outs = []
            for k in range(2):
                out = tmp / f"{cmd}_{k}.out"
                code = main([cmd, "--config", str(cfg_path), "--out", str(out)])
                outs.append(out.read_bytes() if code == 0 and out.exists() else None)
            if outs[0] is None or outs[0] != outs[1]:
                mismatched.append(cmd)
    dt = time.perf_counter() - t0
    return CheckResult("10 determinism", not mismatched,
                       {"commands": len(DETERMINISM_CONFIGS), "mismatched": ",".join(mismatched) or "none"}, dt)


def run_all() -> list[CheckResult]:
    out = [check_canonical()]
    c2, c3, c4 = check_two_level(), check_transit_times(), check_seven()
    out += [c2, c3, c4]
    out.append(check_dual_routes())
    out.append(check_conservation(c2.trajectories + c3.trajectories + c4.trajectories + masked_runs()))
    out.append(check_variational())
    out.append(check_fixed_points_and_instability())
    out.append(check_es_scan())
    out.append(check_determinism())
    return out
