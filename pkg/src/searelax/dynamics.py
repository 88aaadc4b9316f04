"""Right-hand sides of the relaxation equations.

Three equivalent evaluations of the steepest-entropy-ascent (SEA) rate
equation are provided so they can be cross-checked against each other:

* :func:`sea_rhs` -- closed algebraic form in probability space,
* :func:`sea_rhs_determinant` -- ratio of a 3x3 and a 2x2 determinant per component,
* :func:`sea_rhs_sqrt` -- projection of the entropy gradient in square-root space.

The Lemanska-Jaeger comparison equation lives in :func:`lemanska_rhs`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateError, InvalidStateError
from .functionals import (
    DEGENERATE,
    NONDEGENERATE,
    _det2,
    beta_alpha_sums,
    degeneracy_threshold,
    gradients,
    safe_log,
)
from .state import as_coords, as_levels, as_probs


@dataclass(frozen=True)
class RhsResult:
    dp_dt: np.ndarray
    dy_dt: np.ndarray
    branch: str
    a: Optional[float]
    b: Optional[float]
    xi: float


def _dy_from_dp(p: np.ndarray, dp: np.ndarray) -> np.ndarray:
    y = np.sqrt(p)
    return np.where(p > 0, dp / (2.0 * np.where(p > 0, y, 1.0)), 0.0)


def sea_rhs(p, spec, tau: float = 1.0, kB: float = 1.0) -> RhsResult:
    """dp/dt = -(1/tau) [p ln p + alpha p + beta e p], or the reduced form when degenerate."""
    p, e = as_probs(p), as_levels(spec)
    plnp = p * safe_log(p)
    beta, alpha = beta_alpha_sums(p, e)
    if beta is None:
        L = np.sum(plnp)
        dp = -(plnp - p * L) / tau
        dy = _dy_from_dp(p, dp)
        # multiplier of y in the y-space form is (s', y) = -2 kB (L + 1)
        return RhsResult(dp, dy, DEGENERATE, float(-2.0 * kB * (L + 1.0)), None, float(dy @ dy))
    dp = -(plnp + alpha * p + beta * e * p) / tau
    dy = _dy_from_dp(p, dp)
    return RhsResult(dp, dy, NONDEGENERATE, 2.0 * kB * (alpha - 1.0), kB * beta, float(dy @ dy))


def sea_rhs_determinant(p, spec, tau: float = 1.0) -> np.ndarray:
    """Component-wise cofactor expansion of the determinant-ratio form of the rate equation."""
    p, e = as_probs(p), as_levels(spec)
    plnp = p * safe_log(p)
    U = np.sum(p)
    E = np.sum(e * p)
    Q = np.sum(e * e * p)
    L = np.sum(plnp)
    M1 = np.sum(e * plnp)
    den = _det2(U, E, E, Q)
    if np.sum(p * (e - E) ** 2) <= degeneracy_threshold(e):
        raise DegenerateError("energy variance vanishes; determinant form undefined")
    # first row (p_j ln p_j, p_j, e_j p_j); rows 2-3 are the moment sums
    num = plnp * _det2(U, E, E, Q) - p * _det2(L, E, M1, Q) + e * p * _det2(L, U, M1, E)
    return -num / (den * tau)


def sea_rhs_sqrt(y, spec, tau: float = 1.0, kB: float = 1.0) -> RhsResult:
    """dy/dt = s'_perp / (4 kB tau), s'_perp the part of grad S orthogonal to span{y, e'}."""
    y, e = as_coords(y), as_levels(spec)
    g = gradients(y, e, kB)
    s, ep = g.s_grad, g.e_grad
    yy, ye, ee = y @ y, y @ ep, ep @ ep
    sy, se = s @ y, s @ ep
    p = y * y
    E = np.sum(e * p) / yy
    if np.sum(p * (e - E) ** 2) / yy <= degeneracy_threshold(e):
        c = sy / yy
        dy = (s - c * y) / (4.0 * kB * tau)
        return RhsResult(2.0 * y * dy, dy, DEGENERATE, float(c), None, float(dy @ dy))
    gram = yy * ee - ye * ye
    a = (sy * ee - se * ye) / gram
    b = (se * yy - sy * ye) / gram
    dy = (s - a * y - b * ep) / (4.0 * kB * tau)
    return RhsResult(2.0 * y * dy, dy, NONDEGENERATE, float(a), float(b), float(dy @ dy))


@dataclass(frozen=True)
class LemanskaConfig:
    upsilon: float = 0.5
    log_floor: float = 1e-300

    def __post_init__(self):
        if not (np.isfinite(self.upsilon) and self.upsilon > 0):
            raise InvalidStateError(f"upsilon must be finite and positive, got {self.upsilon}")
        if not self.log_floor > 0:
            raise InvalidStateError(f"log_floor must be positive, got {self.log_floor}")


@dataclass(frozen=True)
class LemanskaRhs:
    dp_dt: np.ndarray
    clamped: bool


def lemanska_multipliers(lnp: np.ndarray, e: np.ndarray) -> tuple[float, float]:
    """Unweighted least-squares multipliers (a_L, b_L) that keep sum(dp) = sum(e dp) = 0.

    For a flat spectrum the energy constraint coincides with normalization and
    only a_L = -mean(ln p) survives.
    """
    n = e.size
    se, see = np.sum(e), np.sum(e * e)
    sl, sel = np.sum(lnp), np.sum(e * lnp)
    d = n * see - se * se
    span = float(np.max(e) - np.min(e))
    if span == 0.0 or d <= 1e-12 * (n * span) ** 2:
        return float(-sl / n), 0.0
    a = (se * sel - sl * see) / d
    b = (sl * se - n * sel) / d
    return float(a), float(b)


def lemanska_rhs(p, spec, cfg: LemanskaConfig = LemanskaConfig()) -> LemanskaRhs:
    """dp_j/dt = -upsilon [ln p_j + a_L + b_L e_j], logs evaluated at max(p_j, log_floor)."""
    p, e = as_probs(p), as_levels(spec)
    clamped = bool(np.any(p < cfg.log_floor))
    lnp = np.log(np.maximum(p, cfg.log_floor))
    a, b = lemanska_multipliers(lnp, e)
    return LemanskaRhs(-cfg.upsilon * (lnp + a + b * e), clamped)


@dataclass(frozen=True)
class VariationalResult:
    sea_value: float
    max_competitor: float
    n_samples: int

    @property
    def margin(self) -> float:
        return self.sea_value - self.max_competitor


def constrained_directions(y, spec, n: int, norm: float, rng: np.random.Generator) -> np.ndarray:
    """``n`` random vectors orthogonal to y and e', each rescaled to length ``norm``."""
    y, e = as_coords(y), as_levels(spec)
    basis = []
    for v in (y, 2.0 * e * y):
        w = v - sum((v @ q) * q for q in basis)
        nrm = np.linalg.norm(w)
        if nrm > 1e-14:
            basis.append(w / nrm)
    V = rng.standard_normal((n, y.size))
    for q in basis:
        V -= np.outer(V @ q, q)
    V *= norm / np.linalg.norm(V, axis=1, keepdims=True)
    return V


def variational_check(y, spec, n_samples: int = 10_000, rng_seed: int = 0, tau: float = 1.0, kB: float = 1.0) -> VariationalResult:
    """Compare the SEA entropy production with random equal-norm admissible directions."""
    y, e = as_coords(y), as_levels(spec)
    rhs = sea_rhs_sqrt(y, e, tau, kB)
    if rhs.branch == DEGENERATE:
        raise DegenerateError("variational check needs y and e' linearly independent")
    s = gradients(y, e, kB).s_grad
    norm = float(np.sqrt(rhs.xi))
    # relative to the entropy gradient: rounding leaves ~1e-17 at exact fixed points
    if norm <= 1e-13 * float(np.linalg.norm(s)) / (4.0 * kB * tau):
        raise InvalidStateError("state is a fixed point: the SEA direction vanishes")
    rng = np.random.default_rng(rng_seed)
    V = constrained_directions(y, e, n_samples, norm, rng)
    return VariationalResult(float(rhs.dy_dt @ s), float(np.max(V @ s)), n_samples)
