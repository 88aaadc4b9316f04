"""Experimental setups: perturbed initial states, the seven-mask relaxation study,
and energy-entropy diagram data (equilibrium families and maximal entropy production).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .equilibria import EquilibriumSolution, all_masks, is_feasible, solve_canonical, solve_partial
from .errors import ConfigError, InfeasibleError, InvalidStateError
from .functionals import entropy, entropy_rate_batch, safe_log
from .integrator import (
    BACKWARD,
    FORWARD,
    ConvergenceReport,
    IntegratorConfig,
    Trajectory,
    convergence_report,
    integrate,
)
from .state import Distribution, OccupationMask, as_levels, as_mask, mask_of

# The seven occupation patterns of the reference study, in its trajectory order.
SEVEN_MASKS = tuple(
    OccupationMask.from_ints(m)
    for m in ([1, 0, 1, 0], [1, 1, 1, 0], [1, 0, 0, 1], [1, 1, 0, 1], [1, 0, 1, 1], [0, 1, 0, 1], [0, 1, 1, 1])
)


@dataclass(frozen=True)
class PerturbationSpec:
    lam: float
    mask: OccupationMask
    E: float

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise InvalidStateError(f"lambda must lie in (0, 1), got {self.lam!r}")
        object.__setattr__(self, "mask", as_mask(self.mask))


def perturb_factors(spec, pspec: PerturbationSpec) -> tuple[np.ndarray, Distribution]:
    """Energy-preserving factors f_j = 1 - lam + lam p_pe_j / p_se_j and the perturbed state f p_se / sum(f p_se)."""
    e = as_levels(spec)
    if not is_feasible(e, pspec.E, pspec.mask):
        raise InfeasibleError(f"mask {pspec.mask} admits no equilibrium at E = {pspec.E!r}")
    se = solve_canonical(e, pspec.E).probs
    pe = solve_partial(e, pspec.E, pspec.mask).probs
    f = 1.0 - pspec.lam + pspec.lam * pe / se
    q = f * se
    return f, Distribution(q / np.sum(q))


def perturbed_mixture(spec, pspec: PerturbationSpec) -> np.ndarray:
    """Same state assembled directly as lam p_pe + (1 - lam) p_se."""
    e = as_levels(spec)
    return pspec.lam * solve_partial(e, pspec.E, pspec.mask).probs + (1.0 - pspec.lam) * solve_canonical(e, pspec.E).probs


@dataclass(frozen=True)
class StudyRun:
    mask: OccupationMask
    p0: Distribution
    forward: Trajectory
    backward: Trajectory
    convergence: Optional[ConvergenceReport]

    @property
    def primordial(self) -> Distribution:
        return self.backward.terminal_state


def seven_trajectory_study(spec, E: float = 0.4, lam: float = 0.9, tau: float = 1.0,
                           cfg: IntegratorConfig = IntegratorConfig(), masks=SEVEN_MASKS, kB: float = 1.0) -> list[StudyRun]:
    """Forward and backward runs from lam p_pe(E, mask) + (1 - lam) p_se(E) for each mask.

    ``cfg`` supplies step and tolerances; its direction is overridden per run.
    """
    e = as_levels(spec)
    target = solve_canonical(e, E)
    runs = []
    for m in masks:
        _, p0 = perturb_factors(e, PerturbationSpec(lam, m, E))
        fwd = integrate(p0, e, tau, replace(cfg, direction=FORWARD), kB)
        bwd = integrate(p0, e, tau, replace(cfg, direction=BACKWARD), kB)
        conv = convergence_report(fwd, target) if fwd.terminal_status == "converged_equilibrium" else None
        runs.append(StudyRun(as_mask(m), p0, fwd, bwd, conv))
    return runs


def primordial_multiset(runs, decimals: int = 3) -> dict[tuple, int]:
    """Count backward terminal states, rounded to ``decimals``."""
    out: dict[tuple, int] = {}
    for r in runs:
        key = tuple(float(x) for x in np.round(r.primordial.probs, decimals) + 0.0)
        out[key] = out.get(key, 0) + 1
    return out


# ---------------------------------------------------------------------------
# energy-entropy diagram

@dataclass(frozen=True)
class EsScanConfig:
    energy_grid: tuple = ()
    entropy_resolution: int = 40
    samples_per_point: int = 200
    rng_seed: int = 0
    optimizer_iters: int = 20
    entropy_tol: float = 1e-10
    newton_iters: int = 50

    def __post_init__(self):
        object.__setattr__(self, "energy_grid", tuple(float(x) for x in self.energy_grid))
        if self.entropy_resolution < 2:
            raise ConfigError("entropy_resolution must be at least 2")
        if self.samples_per_point < 1 or self.optimizer_iters < 0:
            raise ConfigError("samples_per_point must be >= 1 and optimizer_iters >= 0")
        if not self.entropy_tol > 0:
            raise ConfigError("entropy_tol must be positive")

    def grid_for(self, spec) -> np.ndarray:
        """The configured energies, or ``entropy_resolution`` evenly spaced interior energies."""
        e = as_levels(spec)
        lo, hi = float(e.min()), float(e.max())
        if not self.energy_grid:
            return np.linspace(lo, hi, self.entropy_resolution + 2)[1:-1]
        g = np.array(self.energy_grid)
        if np.any(g <= lo) or np.any(g >= hi):
            raise ConfigError(f"energy grid values must lie strictly inside ({lo!r}, {hi!r})")
        return g


def energy_vertices(spec, E: float) -> np.ndarray:
    """Vertices of {p >= 0, sum p = 1, e.p = E}: two-level mixtures straddling E and levels sitting at E."""
    e = as_levels(spec)
    n = e.size
    tol = 1e-12 * max(float(np.max(np.abs(e))), 1.0)
    verts = []
    for i in range(n):
        if abs(e[i] - E) <= tol:
            v = np.zeros(n)
            v[i] = 1.0
            verts.append(v)
    for i in range(n):
        for j in range(n):
            if e[i] < E - tol and e[j] > E + tol:
                v = np.zeros(n)
                v[i] = (e[j] - E) / (e[j] - e[i])
                v[j] = (E - e[i]) / (e[j] - e[i])
                verts.append(v)
    if not verts:
        raise InfeasibleError(f"E = {E!r} lies outside the spectrum range")
    return np.array(verts)


def entropy_bounds(spec, E: float) -> tuple[float, float, np.ndarray, np.ndarray]:
    """(S_min, S_max, minimizing vertex, canonical state) at energy E.

    Entropy is concave, so its minimum over the energy slice of the simplex
    sits at a vertex.
    """
    e = as_levels(spec)
    V = energy_vertices(e, E)
    S_v = -np.sum(V * safe_log(V), axis=1)
    k = int(np.argmin(S_v))
    top = solve_canonical(e, E).probs
    return float(S_v[k]), entropy(top), V[k], top


def _entropies(P: np.ndarray) -> np.ndarray:
    return -np.sum(P * safe_log(P), axis=1)


def correct_entropy(Q: np.ndarray, S_target: float, top: np.ndarray, bottom: np.ndarray,
                    tol: float = 1e-10, max_iter: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Move each row of Q along a straight segment (inside the energy slice) onto S = S_target.

    Rows below the target move toward ``top`` (the entropy maximizer), rows
    above it toward ``bottom``; concavity of S along either segment gives a
    single crossing. Safeguarded Newton: a Newton step is taken when it stays
    inside the current bracket, bisection otherwise. Returns (P, converged).
    """
    Q = np.atleast_2d(Q)
    S0 = _entropies(Q)
    up = S0 < S_target
    D = np.where(up[:, None], top[None, :] - Q, bottom[None, :] - Q)
    lo = np.zeros(len(Q))
    hi = np.ones(len(Q))
    t = np.zeros(len(Q))
    sign0 = np.sign(S0 - S_target)
    P = Q.copy()
    f = S0 - S_target
    done = np.abs(f) <= tol
    for _ in range(max_iter):
        if done.all():
            break
        lnp = safe_log(P)
        df = -np.sum(D * (lnp + 1.0) * (P > 0), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_new = t - f / df
        bad = ~np.isfinite(t_new) | (t_new <= lo) | (t_new >= hi)
        t_new = np.where(bad, 0.5 * (lo + hi), t_new)
        t = np.where(done, t, t_new)
        P = np.where(done[:, None], P, Q + t[:, None] * D)
        P = np.maximum(P, 0.0)
        f = _entropies(P) - S_target
        same = np.sign(f) == sign0
        lo = np.where(~done & same, t, lo)
        hi = np.where(~done & ~same, t, hi)
        done = done | (np.abs(f) <= tol)
    return P, done


@dataclass(frozen=True)
class ScanPoint:
    E: float
    S: float
    s_dot_max: float
    samples_used: int
    noise_p95: float
    inside: bool = True
    best: Optional[np.ndarray] = None


def _sample_point(e, E, S, rng, cfg: EsScanConfig, bounds, tau, kB) -> ScanPoint:
    S_min, S_max, bottom, top = bounds
    tol = cfg.entropy_tol
    if not S_min - tol <= S <= S_max + tol:
        return ScanPoint(E, S, float("nan"), 0, float("nan"), inside=False)
    # the level set collapses to a single state at either end
    if abs(S - S_max) <= tol:
        rate = float(entropy_rate_batch(top[None, :], e, kB, tau)[0])
        return ScanPoint(E, S, rate, 1, 0.0, best=top)
    if abs(S - S_min) <= tol:
        rate = float(entropy_rate_batch(bottom[None, :], e, kB, tau)[0])
        return ScanPoint(E, S, rate, 1, 0.0, best=bottom)
    V = energy_vertices(e, E)
    W = rng.dirichlet(np.ones(len(V)), size=cfg.samples_per_point)
    P, ok = correct_entropy(W @ V, S, top, bottom, tol, cfg.newton_iters)
    P = P[ok]
    if len(P) == 0:
        return ScanPoint(E, S, float("nan"), 0, float("nan"))
    rates = entropy_rate_batch(P, e, kB, tau)
    k = int(np.argmax(rates))
    best, best_rate = P[k], float(rates[k])
    best, best_rate = _local_ascent(e, best, best_rate, S, top, bottom, rng, cfg, tau, kB)
    noise = float(best_rate - np.percentile(rates, 95))
    return ScanPoint(E, S, best_rate, int(len(P)), noise, best=best)


def _local_ascent(e, p, rate, S, top, bottom, rng, cfg: EsScanConfig, tau, kB):
    """Random-direction hill climb inside the (normalization, energy, entropy) level set."""
    if cfg.optimizer_iters == 0:
        return p, rate
    n = e.size
    A = np.vstack([np.ones(n), e])
    # orthonormal basis of the directions keeping sum p and e.p fixed
    _, _, vt = np.linalg.svd(A)
    null = vt[2:]
    if null.size == 0:
        return p, rate
    step = 0.1 * float(np.min(p[p > 0])) if np.any(p > 0) else 0.1
    for _ in range(cfg.optimizer_iters):
        d = rng.standard_normal(len(null)) @ null
        cand = p + step * d / np.linalg.norm(d)
        if np.any(cand < 0):
            step *= 0.5
            continue
        cand, ok = correct_entropy(cand[None, :], S, top, bottom, cfg.entropy_tol, cfg.newton_iters)
        r = float(entropy_rate_batch(cand, e, kB, tau)[0])
        if ok[0] and r > rate:
            p, rate = cand[0], r
            step *= 1.5
        else:
            step *= 0.5
    return p, rate


@dataclass(frozen=True)
class EsScan:
    points: list
    energies: np.ndarray

    def rows(self):
        for pt in self.points:
            yield pt.E, pt.S, pt.s_dot_max, pt.samples_used, pt.noise_p95


def es_scan(spec, cfg: EsScanConfig = EsScanConfig(), tau: float = 1.0, kB: float = 1.0) -> EsScan:
    """Sampled maximal entropy production on an (E, S) grid.

    For each energy the entropy axis runs from S_min(E) to the canonical
    S_max(E) inclusive, ``entropy_resolution`` points. Grid point k draws from
    its own stream ``default_rng([rng_seed, k])``.
    """
    e = as_levels(spec)
    grid = cfg.grid_for(e)
    points = []
    idx = 0
    for E in grid:
        bounds = entropy_bounds(e, float(E))
        # sampling works with S/kB; reported S carries kB
        for S in np.linspace(bounds[0], bounds[1], cfg.entropy_resolution):
            rng = np.random.default_rng([cfg.rng_seed, idx])
            pt = _sample_point(e, float(E), float(S), rng, cfg, bounds, tau, kB)
            points.append(replace(pt, S=float(kB * S)))
            idx += 1
    return EsScan(points, grid)


def s_dot_max(spec, E: float, S: float, cfg: EsScanConfig = EsScanConfig(), tau: float = 1.0, kB: float = 1.0) -> ScanPoint:
    """Single-point query; points outside the attainable region come back with inside=False."""
    e = as_levels(spec)
    if not float(e.min()) < E < float(e.max()):
        return ScanPoint(E, S, float("nan"), 0, float("nan"), inside=False)
    rng = np.random.default_rng([cfg.rng_seed, 0])
    pt = _sample_point(e, E, S / kB, rng, cfg, entropy_bounds(e, E), tau, kB)
    return replace(pt, S=S)


@dataclass(frozen=True)
class Family:
    mask: OccupationMask
    energies: np.ndarray
    entropies: np.ndarray
    betas: np.ndarray

    @property
    def isolated(self) -> bool:
        return self.energies.size == 1


def equilibrium_families(spec, resolution: int = 50, kB: float = 1.0) -> list[Family]:
    """S_pe(E) along every mask's open occupied-energy range; degenerate masks give single points."""
    if resolution < 1:
        raise ConfigError("resolution must be >= 1")
    e = as_levels(spec)
    out = []
    for m in all_masks(e.size):
        occ = e[m.array]
        lo, hi = float(occ.min()), float(occ.max())
        if hi - lo <= 1e-12 * max(float(np.max(np.abs(e))), 1.0):
            sol = solve_partial(e, lo, m)
            out.append(Family(m, np.array([sol.energy]), np.array([kB * sol.entropy]), np.array([0.0])))
            continue
        Es = np.linspace(lo, hi, resolution + 2)[1:-1]
        sols = [solve_partial(e, float(E), m) for E in Es]
        out.append(Family(m, Es, np.array([kB * s.entropy for s in sols]), np.array([s.beta for s in sols])))
    return out


def family_slope(spec, E: float, mask, h: float = 1e-5, kB: float = 1.0) -> tuple[float, float]:
    """(central-difference dS_pe/dE, kB beta_pe) at E for the given mask."""
    e = as_levels(spec)
    s_plus = solve_partial(e, E + h, mask).entropy
    s_minus = solve_partial(e, E - h, mask).entropy
    return kB * (s_plus - s_minus) / (2.0 * h), kB * solve_partial(e, E, mask).beta
