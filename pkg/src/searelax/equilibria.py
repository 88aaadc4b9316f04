"""Canonical and partially-canonical equilibria at prescribed mean energy."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InfeasibleError, InvalidStateError
from .functionals import entropy
from .state import Distribution, OccupationMask, as_levels, as_mask

CANONICAL = "canonical"
PARTIALLY_CANONICAL = "partially_canonical"
SINGLE_LEVEL = "single_level"

MAX_ENUMERATION_LEVELS = 24
# relative tolerance for "E equals an energy level" and "levels coincide"
LEVEL_TOL = 1e-12


class Stability(str, enum.Enum):
    E_CONDITIONALLY_STABLE = "E_conditionally_stable"
    DELTA_E_CONDITIONALLY_STABLE_ONLY = "delta_E_conditionally_stable_only"


@dataclass(frozen=True)
class EquilibriumSolution:
    distribution: Distribution
    beta: float
    mask: OccupationMask
    energy: float
    entropy: float
    kind: str
    beta_defined: bool = True

    @property
    def probs(self) -> np.ndarray:
        return self.distribution.probs


def _weights(beta: float, e: np.ndarray) -> np.ndarray:
    x = -beta * e
    w = np.exp(x - np.max(x))
    return w / np.sum(w)


def _mean_energy_at(beta: float, e: np.ndarray) -> float:
    return float(np.sum(e * _weights(beta, e)))


def _solve_beta(e: np.ndarray, E: float, tol: float, max_doublings: int = 1100, max_bisections: int = 2200) -> float:
    """Bisection for E(beta) = E; E(beta) is strictly decreasing for a nonflat spectrum.

    Bisects until the bracket can no longer shrink, so the answer is as exact
    as double precision allows; ``tol`` is the acceptance bound on the residual.
    """
    B = 1.0
    for _ in range(max_doublings):
        if _mean_energy_at(-B, e) >= E >= _mean_energy_at(B, e):
            break
        B *= 2.0
    else:
        raise ConvergenceError(f"could not bracket inverse temperature for E = {E!r}")
    lo, hi = -B, B
    best, best_r = 0.0, math.inf
    for _ in range(max_bisections):
        mid = 0.5 * (lo + hi)
        r = _mean_energy_at(mid, e) - E
        if abs(r) < best_r:
            best, best_r = mid, abs(r)
        if r == 0.0 or mid == lo or mid == hi:
            break
        if r > 0:
            lo = mid
        else:
            hi = mid
    if best_r <= tol:
        return best
    raise ConvergenceError(f"bisection stalled at residual {best_r:.3e} > tol {tol:g}")


def _scale(e: np.ndarray) -> float:
    return max(float(np.max(np.abs(e))), 1.0)


def solve_partial(spec, E: float, mask, tol: float = 1e-12) -> EquilibriumSolution:
    """Canonical form restricted to the occupied levels of ``mask``, with mean energy E.

    Feasible when E lies strictly inside the occupied energy range, or when
    every occupied level has energy E (then beta is arbitrary and reported 0).
    """
    e = as_levels(spec)
    mask = as_mask(mask)
    if len(mask) != e.size:
        raise InvalidStateError(f"mask length {len(mask)} does not match {e.size} levels")
    m = mask.array
    occ = e[m]
    lo, hi = float(occ.min()), float(occ.max())
    eps = LEVEL_TOL * _scale(e)
    kind = CANONICAL if mask.is_full else PARTIALLY_CANONICAL
    if hi - lo <= eps:
        if abs(E - lo) > eps:
            raise InfeasibleError(f"occupied levels of {mask} all sit at {lo!r}; E = {E!r} unreachable")
        p = np.where(m, 1.0 / mask.count, 0.0)
        if mask.count == 1:
            kind = SINGLE_LEVEL
        return EquilibriumSolution(Distribution(p), 0.0, mask, float(np.sum(e * p)), entropy(p), kind, beta_defined=False)
    if not lo < E < hi:
        raise InfeasibleError(f"E = {E!r} outside the open occupied-energy range ({lo!r}, {hi!r}) of {mask}")
    beta = _solve_beta(occ, E, tol)
    p = np.zeros_like(e)
    p[m] = _weights(beta, occ)
    return EquilibriumSolution(Distribution(p), beta, mask, float(np.sum(e * p)), entropy(p), kind)


def solve_canonical(spec, E: float, tol: float = 1e-12) -> EquilibriumSolution:
    e = as_levels(spec)
    if not float(e.min()) < E < float(e.max()):
        raise InfeasibleError(f"E = {E!r} outside the open spectrum range ({float(e.min())!r}, {float(e.max())!r})")
    return solve_partial(e, E, OccupationMask((True,) * e.size), tol)


def is_feasible(spec, E: float, mask) -> bool:
    e = as_levels(spec)
    m = as_mask(mask).array
    occ = e[m]
    lo, hi = float(occ.min()), float(occ.max())
    eps = LEVEL_TOL * _scale(e)
    if hi - lo <= eps:
        return abs(E - lo) <= eps
    return lo < E < hi


def all_masks(n: int):
    """Every nonempty mask on n levels, ordered by occupied count, then 1-before-0 lexicographically."""
    if n > MAX_ENUMERATION_LEVELS:
        raise InvalidStateError(f"exhaustive mask enumeration limited to N <= {MAX_ENUMERATION_LEVELS}, got {n}")
    masks = [bits for bits in itertools.product((True, False), repeat=n) if any(bits)]
    masks.sort(key=lambda bits: (sum(bits), tuple(not b for b in bits)))
    return [OccupationMask(bits) for bits in masks]


def enumerate_feasible_masks(spec, E: float) -> list[OccupationMask]:
    """Every non-full mask admitting an equilibrium of the canonical form at energy E."""
    e = as_levels(spec)
    return [m for m in all_masks(e.size) if not m.is_full and is_feasible(e, E, m)]


def classify_stability(sol: EquilibriumSolution, spec=None) -> Stability:
    if sol.mask.is_full:
        return Stability.E_CONDITIONALLY_STABLE
    return Stability.DELTA_E_CONDITIONALLY_STABLE_ONLY
