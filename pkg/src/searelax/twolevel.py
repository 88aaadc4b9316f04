"""Closed-form relaxation of two levels sharing one energy.

``p`` is the occupation of the second level; the first holds ``1 - p``. With
equal energies the SEA equation reduces to tau dp/dt = p(1-p) ln((1-p)/p),
which integrates in closed form. The Lemanska-Jaeger comparison reduces to
dp/dt = (upsilon/2) ln((1-p)/p).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit

from .errors import InvalidStateError

SEA = "sea"
LEMANSKA = "lemanska"


def _check_p0(p0: float) -> None:
    if not 0.0 <= p0 <= 1.0:
        raise InvalidStateError(f"p0 must lie in [0, 1], got {p0!r}")


def closed_form(p0: float, t, tau: float = 1.0):
    """p(t) = 1 / (1 + r^exp(-t/tau)), r = (1 - p0)/p0; p0 in {0, 1} stays put."""
    _check_p0(p0)
    t = np.asarray(t, dtype=float)
    if p0 in (0.0, 1.0):
        return np.full_like(t, p0)[()]
    r = (1.0 - p0) / p0
    with np.errstate(over="ignore"):
        return (1.0 / (1.0 + r ** np.exp(-t / tau)))[()]


def closed_form_tanh(p0: float, t, tau: float = 1.0):
    """Same solution written as 1/2 - 1/2 tanh(exp(-t/tau) ln(r) / 2)."""
    _check_p0(p0)
    t = np.asarray(t, dtype=float)
    if p0 in (0.0, 1.0):
        return np.full_like(t, p0)[()]
    lr = math.log((1.0 - p0) / p0)
    with np.errstate(over="ignore"):
        return (0.5 - 0.5 * np.tanh(0.5 * np.exp(-t / tau) * lr))[()]


def closed_form_stable(p0: float, t, tau: float = 1.0):
    """Logistic evaluation that keeps full relative precision for p(t) near 0."""
    _check_p0(p0)
    t = np.asarray(t, dtype=float)
    if p0 in (0.0, 1.0):
        return np.full_like(t, p0)[()]
    lr = math.log1p(-p0) - math.log(p0)
    with np.errstate(over="ignore"):
        return expit(-np.exp(-t / tau) * lr)[()]


def transit_time(p_from: float, p_to: float, tau: float = 1.0) -> float:
    """Exact time for the SEA solution to go from p_from to p_to (both on one side of 1/2)."""
    for name, v in (("p_from", p_from), ("p_to", p_to)):
        if not (0.0 < v < 1.0) or v == 0.5:
            raise InvalidStateError(f"{name} = {v!r} must lie in (0, 1/2) or (1/2, 1)")
    if (p_from < 0.5) != (p_to < 0.5):
        raise InvalidStateError("the trajectory never crosses 1/2; p_from and p_to must be on the same side")
    l_from = math.log1p(-p_from) - math.log(p_from)
    l_to = math.log1p(-p_to) - math.log(p_to)
    return tau * math.log(l_from / l_to)


def rate_two_level(p, model: str = SEA, tau: float = 1.0, upsilon: float = 0.5):
    """dp/dt for either model."""
    p = np.asarray(p, dtype=float)
    if model == SEA:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where((p > 0) & (p < 1), p * (1.0 - p) * np.log((1.0 - p) / p), 0.0) / tau
        return out[()]
    if model == LEMANSKA:
        _interior(p)
        return (0.5 * upsilon * np.log((1.0 - p) / p))[()]
    raise InvalidStateError(f"unknown model {model!r}")


def _interior(p: np.ndarray) -> None:
    if np.any((p <= 0) | (p >= 1)):
        raise InvalidStateError("the Lemanska entropy production diverges at p = 0 and p = 1")


def entropy_rate_two_level(p, model: str = SEA, tau: float = 1.0, kB: float = 1.0, upsilon: float = 0.5):
    """dS/dt: kB p(1-p) ln^2((1-p)/p) / tau for SEA, kB (upsilon/2) ln^2((1-p)/p) for Lemanska."""
    p = np.asarray(p, dtype=float)
    if model == SEA:
        if np.any((p < 0) | (p > 1)):
            raise InvalidStateError("p must lie in [0, 1]")
        with np.errstate(divide="ignore", invalid="ignore"):
            lr = np.log((1.0 - p) / p)
            out = np.where((p > 0) & (p < 1), kB * p * (1.0 - p) * lr * lr / tau, 0.0)
        return out[()]
    if model == LEMANSKA:
        _interior(p)
        lr = np.log((1.0 - p) / p)
        return (kB * 0.5 * upsilon * lr * lr)[()]
    raise InvalidStateError(f"unknown model {model!r}")


def lemanska_path(p0: float, t, upsilon: float = 0.5, step: float = 1e-3):
    """Numerical Lemanska solution (no closed form) on the time grid ``t``, by fixed-step RK4 from t = 0.

    Entries after the solution leaves (0, 1) are NaN; this happens on backward
    runs, where the rate stays finite as p reaches 0.
    """
    if not 0.0 < p0 < 1.0:
        raise InvalidStateError(f"p0 must lie in (0, 1), got {p0!r}")
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, np.nan)

    def f(p):
        return 0.5 * upsilon * math.log((1.0 - p) / p)

    for sign in (1.0, -1.0):
        idx = np.flatnonzero(sign * t >= 0)
        idx = idx[np.argsort(sign * t[idx])]
        p, now = p0, 0.0
        for k in idx:
            target = abs(t[k])
            while now < target - 1e-12 and 0.0 < p < 1.0:
                h = min(step, target - now)
                try:
                    k1 = f(p)
                    k2 = f(p + 0.5 * sign * h * k1)
                    k3 = f(p + 0.5 * sign * h * k2)
                    k4 = f(p + sign * h * k3)
                except (ValueError, ZeroDivisionError):
                    p = float("nan")
                    break
                p += sign * h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
                now += h
            if not 0.0 < p < 1.0:
                break
            out[k] = p
    return out[()]
