"""Fixed-step RK4 integration of the rate equations, forward and backward in time."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _kernels as K
from .dynamics import LemanskaConfig, lemanska_rhs
from .errors import ConfigError, InvalidStateError, SearelaxError
from .functionals import FunctionalReport, degeneracy_threshold, massieu_report, safe_log
from .state import Distribution, as_levels, as_probs

FORWARD = "forward"
BACKWARD = "backward"
SQRT_SPACE = "sqrt_space"
PROB_SPACE = "prob_space"

CONVERGED = "converged_equilibrium"
REACHED_BOUNDARY = "reached_boundary"
MAX_TIME = "max_time"
DRIFT_ABORT = "drift_abort"

_STATUS = {
    K.STATUS_CONVERGED: CONVERGED,
    K.STATUS_BOUNDARY: REACHED_BOUNDARY,
    K.STATUS_DRIFT: DRIFT_ABORT,
    K.STATUS_NEGATIVE: DRIFT_ABORT,
}


@dataclass(frozen=True)
class IntegratorConfig:
    step: float = 1e-3
    max_time: float = 50.0
    direction: str = FORWARD
    record_every: int = 100
    convergence_tol: float = 1e-10
    boundary_floor: float = 1e-9
    drift_abort: float = 1e-6
    coordinate_space: str = SQRT_SPACE
    renormalize: bool = True

    def __post_init__(self):
        if self.direction not in (FORWARD, BACKWARD):
            raise ConfigError(f"direction must be 'forward' or 'backward', got {self.direction!r}")
        if self.coordinate_space not in (SQRT_SPACE, PROB_SPACE):
            raise ConfigError(f"coordinate_space must be 'sqrt_space' or 'prob_space', got {self.coordinate_space!r}")
        if not (self.step > 0 and self.max_time > 0):
            raise ConfigError("step and max_time must be positive")
        if self.step > self.max_time:
            raise ConfigError(f"step {self.step} exceeds max_time {self.max_time}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ConfigError("record_every must be an integer >= 1")
        for name in ("convergence_tol", "boundary_floor", "drift_abort"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")

    @property
    def sign(self) -> float:
        return 1.0 if self.direction == FORWARD else -1.0


@dataclass(frozen=True)
class Sample:
    t: float
    p: np.ndarray
    report: FunctionalReport


@dataclass(frozen=True)
class Diagnostics:
    steps: int
    max_norm_drift: float
    max_energy_drift: float
    max_entropy_decrease: float
    clamped: bool = False
    message: str = ""


@dataclass(frozen=True)
class Trajectory:
    samples: list
    terminal_status: str
    terminal_state: Distribution
    direction: str
    diagnostics: Diagnostics
    config: IntegratorConfig = field(default_factory=IntegratorConfig)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def probs(self) -> np.ndarray:
        return np.array([s.p for s in self.samples])

    @property
    def entropies(self) -> np.ndarray:
        return np.array([s.report.S for s in self.samples])

    @property
    def entropy_rates(self) -> np.ndarray:
        return np.array([s.report.entropy_rate for s in self.samples])

    @property
    def t_end(self) -> float:
        return self.samples[-1].t

    def with_samples(self, samples) -> "Trajectory":
        return replace(self, samples=list(samples))


def _energy_scale(e: np.ndarray, E0: float) -> float:
    scale = max(abs(E0), float(np.max(np.abs(e))))
    return scale if scale > 0 else 1.0


def _run(x0, p0, mode, e, tau, cfg, report, upsilon=0.5, log_floor=1e-300):
    x = np.array(x0, dtype=float)
    occupied = p0 > 0
    E0 = float(np.sum(e * p0))
    escale = _energy_scale(e, E0)
    eps = degeneracy_threshold(e)
    diag = np.zeros(4)
    n_total = int(math.ceil(cfg.max_time / cfg.step - 1e-9))
    sign = cfg.sign

    def probs_of(v):
        return v * v if mode == K.MODE_SEA_SQRT else v.copy()

    samples = [Sample(0.0, probs_of(x), report(probs_of(x)))]
    steps, status, message = 0, MAX_TIME, ""
    while steps < n_total:
        n = min(int(cfg.record_every), n_total - steps)
        done, code = K.advance(x, mode, e, tau, upsilon, log_floor, eps, cfg.step, sign, n,
                               cfg.convergence_tol, cfg.boundary_floor, occupied, E0, escale,
                               cfg.drift_abort, cfg.renormalize, diag)
        steps += done
        if done:
            p = probs_of(x)
            samples.append(Sample(sign * steps * cfg.step, p, report(p)))
        if code != K.STATUS_RUNNING:
            status = _STATUS[code]
            if code == K.STATUS_NEGATIVE:
                message = f"a probability reached zero or below at t = {sign * (steps + 1) * cfg.step:.6g}; cannot continue backward"
            elif code == K.STATUS_DRIFT:
                message = f"invariant drift exceeded {cfg.drift_abort:g} at t = {sign * steps * cfg.step:.6g}"
            break
    p = probs_of(x)
    if status == REACHED_BOUNDARY:
        p = np.where(p < cfg.boundary_floor, 0.0, p)
    terminal = Distribution.normalized(np.maximum(p, 0.0))
    d = Diagnostics(steps, float(diag[K.D_NORM]), float(diag[K.D_ENERGY]), float(diag[K.D_ENTROPY_DROP]),
                    bool(diag[K.D_CLAMPED]), message)
    return Trajectory(samples, status, terminal, cfg.direction, d, cfg)


def integrate(p0, spec, tau: float = 1.0, cfg: IntegratorConfig = IntegratorConfig(), kB: float = 1.0) -> Trajectory:
    """Integrate the SEA rate equation from ``p0`` in the configured direction.

    Forward runs stop when max|dp/dt| < convergence_tol. Backward runs stop
    once an initially occupied level has dropped below ``boundary_floor`` and
    the surviving levels are stationary; the terminal state then has the
    extinct levels zeroed and is renormalized.
    """
    p0 = as_probs(p0 if isinstance(p0, Distribution) else Distribution(p0))
    e = as_levels(spec)
    if p0.size != e.size:
        raise InvalidStateError(f"length mismatch: {p0.size} probabilities vs {e.size} levels")
    if not tau > 0:
        raise InvalidStateError("tau must be positive")

    def report(p):
        return massieu_report(p, e, kB=kB, tau=tau)

    if cfg.coordinate_space == SQRT_SPACE:
        return _run(np.sqrt(p0), p0, K.MODE_SEA_SQRT, e, tau, cfg, report)
    return _run(p0, p0, K.MODE_SEA_PROB, e, tau, cfg, report)


def integrate_lemanska(p0, spec, cfg: IntegratorConfig = IntegratorConfig(), lcfg: LemanskaConfig = LemanskaConfig(),
                       kB: float = 1.0) -> Trajectory:
    """Integrate the Lemanska-Jaeger comparison equation (always in probability space).

    Reports carry that equation's own entropy production, -kB sum(ln p dp/dt).
    """
    p0 = as_probs(p0 if isinstance(p0, Distribution) else Distribution(p0))
    e = as_levels(spec)
    if cfg.direction == BACKWARD and np.any(p0 <= 0):
        raise InvalidStateError("backward Lemanska runs need a strictly positive initial distribution")

    def report(p):
        rep = massieu_report(p, e, kB=kB)
        dp = lemanska_rhs(p, e, lcfg).dp_dt
        rate = float(-kB * np.sum(np.log(np.maximum(p, lcfg.log_floor)) * dp))
        return replace(rep, entropy_rate=rate)

    cfg = replace(cfg, coordinate_space=PROB_SPACE)
    traj = _run(p0, p0, K.MODE_LEMANSKA, e, 1.0, cfg, report, lcfg.upsilon, lcfg.log_floor)
    if np.any(p0 < lcfg.log_floor):
        traj = replace(traj, diagnostics=replace(traj.diagnostics, clamped=True))
    return traj


@dataclass(frozen=True)
class FirstPassage:
    time: float
    diagnostics: Diagnostics


def first_passage(p0, spec, index: int, level: float, tau: float = 1.0, step: float = 1e-3,
                  max_time: float = 100.0, coordinate_space: str = SQRT_SPACE, max_refine: int = 200) -> FirstPassage:
    """Forward time at which p[index] first reaches ``level`` (approached from below).

    RK4 steps of size ``step`` until the crossing is bracketed, then the last
    step is refined by bisection on the sub-step length. Drift diagnostics
    cover the full steps taken.
    """
    p0 = as_probs(p0)
    e = as_levels(spec)
    mode = K.MODE_SEA_SQRT if coordinate_space == SQRT_SPACE else K.MODE_SEA_PROB
    x = np.sqrt(p0) if mode == K.MODE_SEA_SQRT else np.array(p0, dtype=float)
    eps = degeneracy_threshold(e)
    diag = np.zeros(4)
    k1 = np.empty_like(x)
    E0 = float(np.sum(e * p0))
    escale = _energy_scale(e, E0)

    def value(v):
        return v[index] ** 2 if mode == K.MODE_SEA_SQRT else v[index]

    def probs_of(v):
        return v * v if mode == K.MODE_SEA_SQRT else v

    def finish(t, steps):
        return FirstPassage(t, Diagnostics(steps, norm, energy, drop))

    norm = energy = drop = 0.0
    S_old = float(K._entropy(probs_of(x)))
    if value(x) >= level:
        return finish(0.0, 0)
    t = 0.0
    n_max = int(math.ceil(max_time / step))
    for k in range(n_max):
        K.rhs(x, mode, e, tau, 0.5, 1e-300, eps, k1, diag)
        xn = K.rk4_step(x, k1, mode, e, tau, 0.5, 1e-300, eps, step, True, diag)
        if value(xn) >= level:
            lo, hi = 0.0, step
            for _ in range(max_refine):
                mid = 0.5 * (lo + hi)
                if mid in (lo, hi):
                    break
                if value(K.rk4_step(x, k1, mode, e, tau, 0.5, 1e-300, eps, mid, True, diag)) >= level:
                    hi = mid
                else:
                    lo = mid
            return finish(t + 0.5 * (lo + hi), k)
        pn = probs_of(xn)
        norm = max(norm, abs(1.0 - float(np.sum(pn))))
        energy = max(energy, abs(float(np.sum(e * pn)) - E0) / escale)
        S_new = float(K._entropy(pn))
        drop = max(drop, S_old - S_new)
        S_old = S_new
        x = xn
        t += step
    raise SearelaxError(f"level {level!r} not reached within t = {max_time}")


def first_passage_time(p0, spec, index: int, level: float, tau: float = 1.0, step: float = 1e-3,
                       max_time: float = 100.0, coordinate_space: str = SQRT_SPACE) -> float:
    return first_passage(p0, spec, index, level, tau, step, max_time, coordinate_space).time


@dataclass(frozen=True)
class ConvergenceReport:
    final_distance: float
    time_to_threshold: Optional[float]
    threshold: float


def convergence_report(traj: Trajectory, target, threshold: float = 1e-6) -> ConvergenceReport:
    """Sup-norm distance to ``target`` at the end, and first recorded time within ``threshold``."""
    if traj.terminal_status != CONVERGED:
        raise SearelaxError(f"trajectory did not converge (status {traj.terminal_status})")
    q = as_probs(target.distribution if hasattr(target, "distribution") else target)
    dist = np.max(np.abs(traj.probs - q[None, :]), axis=1)
    hit = np.flatnonzero(dist <= threshold)
    t_hit = float(traj.times[hit[0]]) if hit.size else None
    final = float(np.max(np.abs(traj.terminal_state.probs - q)))
    return ConvergenceReport(final, t_hit, threshold)


def entropy_production_check(p, spec, dp_dt, kB: float = 1.0) -> float:
    """(dp/dt, -kB (ln p + 1)): the entropy production implied by a rate vector."""
    p = as_probs(p)
    return float(np.sum(np.asarray(dp_dt) * -kB * (safe_log(p) + 1.0) * (p > 0)))
