"""Scalar functionals of an occupation distribution and their y-space gradients.

Conventions: ``0 ln 0 = 0`` is applied explicitly (probabilities are never
floored), ``kB`` and ``tau`` default to 1. Sums go through ``np.sum``, which
uses pairwise summation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidStateError
from .state import as_coords, as_levels, as_probs

DEGENERACY_REL = 1e-12

NONDEGENERATE = "nondegenerate"
DEGENERATE = "degenerate"


def degeneracy_threshold(levels) -> float:
    """Threshold on the energy variance below which the degenerate branch applies.

    The variance scales with the square of the spectrum span, so the threshold
    is relative to it; a flat spectrum gets the bare constant.
    """
    e = as_levels(levels)
    span = float(np.max(e) - np.min(e))
    return DEGENERACY_REL * span * span if span > 0 else DEGENERACY_REL


def _check_lengths(p: np.ndarray, e: np.ndarray) -> None:
    if p.shape[-1] != e.shape[-1]:
        raise InvalidStateError(f"length mismatch: {p.shape[-1]} probabilities vs {e.shape[-1]} levels")


def safe_log(p: np.ndarray) -> np.ndarray:
    """ln p where p > 0 and 0 elsewhere, so that p * safe_log(p) honours 0 ln 0 = 0."""
    p = np.asarray(p, dtype=float)
    return np.log(np.where(p > 0, p, 1.0))


def mean_energy(p, spec) -> float:
    p, e = as_probs(p), as_levels(spec)
    _check_lengths(p, e)
    return float(np.sum(e * p))


def normalization(p) -> float:
    return float(np.sum(as_probs(p)))


def entropy(p, kB: float = 1.0) -> float:
    p = as_probs(p)
    return float(-kB * np.sum(p * safe_log(p)))


@dataclass(frozen=True)
class GradientSet:
    e_grad: np.ndarray
    u_grad: np.ndarray
    s_grad: np.ndarray


def gradients(y, spec, kB: float = 1.0) -> GradientSet:
    """Gradients of E(y), U(y), S(y) with respect to the square-root coordinates."""
    y, e = as_coords(y), as_levels(spec)
    _check_lengths(y, e)
    s_grad = -2.0 * kB * (y * safe_log(y * y) + y)
    return GradientSet(e_grad=2.0 * e * y, u_grad=2.0 * y, s_grad=s_grad)


def covariances(p, spec, kB: float = 1.0) -> tuple[float, float, float]:
    """Return (<dE dE>, <dS dS>, <dE dS>) for the distribution."""
    p, e = as_probs(p), as_levels(spec)
    _check_lengths(p, e)
    lnp = safe_log(p)
    E = np.sum(e * p)
    S = -kB * np.sum(p * lnp)
    de = e - E
    ds = -kB * lnp - S
    # terms with p_i = 0 vanish through the factor p_i
    cov_ee = float(np.sum(p * de * de))
    cov_ss = float(np.sum(p * ds * ds))
    cov_es = float(np.sum(p * de * ds))
    return cov_ee, cov_ss, cov_es


def is_degenerate(p, spec) -> bool:
    cov_ee, _, _ = covariances(p, spec)
    return cov_ee <= degeneracy_threshold(spec)


def beta_alpha(p, spec, kB: float = 1.0) -> tuple[Optional[float], Optional[float]]:
    """Nonequilibrium inverse temperature and Massieu coefficient from fluctuations.

    beta = <dE dS> / (kB <dE dE>),  alpha = S/kB - beta E.
    Returns ``(None, None)`` when the energy variance is below the degeneracy
    threshold: the caller should switch to the degenerate dynamics.
    """
    p, e = as_probs(p), as_levels(spec)
    cov_ee, _, cov_es = covariances(p, e, kB)
    if cov_ee <= degeneracy_threshold(e):
        return None, None
    beta = cov_es / (kB * cov_ee)
    alpha = entropy(p, kB) / kB - beta * mean_energy(p, e)
    return beta, alpha


def beta_alpha_sums(p, spec) -> tuple[Optional[float], Optional[float]]:
    """Same functionals evaluated from the raw moment sums of the rate equation."""
    p, e = as_probs(p), as_levels(spec)
    _check_lengths(p, e)
    plnp = p * safe_log(p)
    E = np.sum(e * p)
    Q = np.sum(e * e * p)
    L = np.sum(plnp)
    M1 = np.sum(e * plnp)
    # branch decided on the centred variance, as everywhere else
    if np.sum(p * (e - E) ** 2) <= degeneracy_threshold(e):
        return None, None
    var = Q - E * E
    alpha = (E * M1 - L * Q) / var
    beta = (L * E - M1) / var
    return float(beta), float(alpha)


def _det2(a, b, c, d):
    return a * d - b * c


def _det3(m):
    (a, b, c), (d, e, f), (g, h, i) = m
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def entropy_rate(p, spec, kB: float = 1.0, tau: float = 1.0) -> float:
    """dS/dt as a ratio of Gram determinants (a single 2x2 Gram determinant when degenerate)."""
    p, e = as_probs(p), as_levels(spec)
    _check_lengths(p, e)
    lnp = safe_log(p)
    plnp = p * lnp
    U = np.sum(p)
    E = np.sum(e * p)
    Q = np.sum(e * e * p)
    L = np.sum(plnp)
    LL = np.sum(plnp * lnp)
    M1 = np.sum(e * plnp)
    cov_ee = np.sum(p * (e - E) ** 2)
    if cov_ee <= degeneracy_threshold(e):
        return float(kB / tau * _det2(LL, L, L, U))
    num = _det3(((LL, L, M1), (L, U, E), (M1, E, Q)))
    den = _det2(U, E, E, Q)
    return float(kB / tau * num / den)


def entropy_rate_fd(p, spec, kB: float = 1.0, tau: float = 1.0) -> float:
    """dS/dt from the fluctuations of the generalized Massieu function (or of S when degenerate)."""
    rep = massieu_report(p, spec, kB=kB, tau=tau, with_rate=False)
    if rep.cov_MM is None:
        return rep.cov_SS / (kB * tau)
    return rep.cov_MM / (kB * tau)


@dataclass(frozen=True)
class FunctionalReport:
    E: float
    U: float
    S: float
    beta: Optional[float]
    alpha: Optional[float]
    massieu: Optional[float]
    cov_EE: float
    cov_SS: float
    cov_ES: float
    cov_MM: Optional[float]
    entropy_rate: float
    branch: str

    @property
    def degenerate(self) -> bool:
        return self.branch == DEGENERATE


def massieu_report(p, spec, kB: float = 1.0, tau: float = 1.0, with_rate: bool = True) -> FunctionalReport:
    """Every functional of ``p`` in one pass.

    In the degenerate branch ``beta``, ``alpha``, ``massieu`` and ``cov_MM``
    are ``None`` and the entropy itself plays the Massieu role.
    """
    p, e = as_probs(p), as_levels(spec)
    _check_lengths(p, e)
    lnp = safe_log(p)
    E = float(np.sum(e * p))
    S = float(-kB * np.sum(p * lnp))
    cov_ee, cov_ss, cov_es = covariances(p, e, kB)
    rate = entropy_rate(p, e, kB, tau) if with_rate else float("nan")
    if cov_ee <= degeneracy_threshold(e):
        return FunctionalReport(E, float(np.sum(p)), S, None, None, None, cov_ee, cov_ss, cov_es, None, rate, DEGENERATE)
    beta = cov_es / (kB * cov_ee)
    alpha = S / kB - beta * E
    M = kB * alpha
    dm = -kB * lnp - kB * beta * e - M
    cov_mm = float(np.sum(p * dm * dm))
    return FunctionalReport(E, float(np.sum(p)), S, beta, alpha, M, cov_ee, cov_ss, cov_es, cov_mm, rate, NONDEGENERATE)


def entropy_rate_batch(P: np.ndarray, spec, kB: float = 1.0, tau: float = 1.0) -> np.ndarray:
    """Row-wise :func:`entropy_rate` for an (M, N) stack of distributions."""
    P = np.asarray(P, dtype=float)
    e = as_levels(spec)
    _check_lengths(P, e)
    lnp = safe_log(P)
    plnp = P * lnp
    U = P.sum(axis=1)
    E = P @ e
    Q = P @ (e * e)
    L = plnp.sum(axis=1)
    LL = (plnp * lnp).sum(axis=1)
    M1 = plnp @ e
    cov_ee = np.sum(P * (e[None, :] - E[:, None]) ** 2, axis=1)
    num = _det3(((LL, L, M1), (L, U, E), (M1, E, Q)))
    den = _det2(U, E, E, Q)
    degen = cov_ee <= degeneracy_threshold(e)
    safe_den = np.where(degen, 1.0, den)
    return kB / tau * np.where(degen, _det2(LL, L, L, U), num / safe_den)
