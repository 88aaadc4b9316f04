"""Compiled fixed-step RK4 kernels used by :mod:`searelax.integrator`.

These mirror the reference numpy implementations in :mod:`searelax.dynamics`
(tests pin them against each other) but run the inner loop without Python
overhead. kB cancels out of every rate equation, so it does not appear here.
"""

import math

import numpy as np
from numba import njit

MODE_SEA_SQRT = 0
MODE_SEA_PROB = 1
MODE_LEMANSKA = 2

STATUS_RUNNING = 0
STATUS_CONVERGED = 1
STATUS_BOUNDARY = 2
STATUS_DRIFT = 3
STATUS_NEGATIVE = 4

# diag slots
D_NORM = 0
D_ENERGY = 1
D_ENTROPY_DROP = 2
D_CLAMPED = 3


@njit(cache=True)
def sea_sqrt_rhs(y, e, tau, eps_deg, out):
    n = y.size
    yy = 0.0
    ye = 0.0
    ee = 0.0
    sy = 0.0
    se = 0.0
    ep_sum = 0.0
    for i in range(n):
        yi = y[i]
        pi = yi * yi
        si = -2.0 * (2.0 * yi * math.log(yi) + yi) if yi > 0.0 else 0.0
        epi = 2.0 * e[i] * yi
        out[i] = si
        yy += pi
        ye += yi * epi
        ee += epi * epi
        sy += si * yi
        se += si * epi
        ep_sum += e[i] * pi
    ebar = ep_sum / yy
    var = 0.0
    for i in range(n):
        d = e[i] - ebar
        var += y[i] * y[i] * d * d
    var /= yy
    if var <= eps_deg:
        c = sy / yy
        for i in range(n):
            out[i] = (out[i] - c * y[i]) / (4.0 * tau)
        return
    gram = yy * ee - ye * ye
    a = (sy * ee - se * ye) / gram
    b = (se * yy - sy * ye) / gram
    for i in range(n):
        out[i] = (out[i] - a * y[i] - b * 2.0 * e[i] * y[i]) / (4.0 * tau)


@njit(cache=True)
def sea_prob_rhs(p, e, tau, eps_deg, out):
    n = p.size
    U = 0.0
    E = 0.0
    Q = 0.0
    L = 0.0
    M1 = 0.0
    for i in range(n):
        pi = p[i]
        plnp = pi * math.log(pi) if pi > 0.0 else 0.0
        out[i] = plnp
        U += pi
        E += e[i] * pi
        Q += e[i] * e[i] * pi
        L += plnp
        M1 += e[i] * plnp
    ebar = E / U
    var = 0.0
    for i in range(n):
        d = e[i] - ebar
        var += p[i] * d * d
    if var <= eps_deg:
        for i in range(n):
            out[i] = -(out[i] - p[i] * L) / tau
        return
    den = U * Q - E * E
    alpha = (E * M1 - L * Q) / den
    beta = (L * E - M1 * U) / den
    for i in range(n):
        out[i] = -(out[i] + alpha * p[i] + beta * e[i] * p[i]) / tau


@njit(cache=True)
def lemanska_rhs(p, e, upsilon, log_floor, out, diag):
    n = p.size
    se = 0.0
    see = 0.0
    sl = 0.0
    sel = 0.0
    emin = e[0]
    emax = e[0]
    for i in range(n):
        pi = p[i]
        if pi < log_floor:
            diag[D_CLAMPED] = 1.0
            pi = log_floor
        lp = math.log(pi)
        out[i] = lp
        se += e[i]
        see += e[i] * e[i]
        sl += lp
        sel += e[i] * lp
        emin = min(emin, e[i])
        emax = max(emax, e[i])
    d = n * see - se * se
    span = emax - emin
    if span == 0.0 or d <= 1e-12 * (n * span) ** 2:
        a = -sl / n
        b = 0.0
    else:
        a = (se * sel - sl * see) / d
        b = (sl * se - n * sel) / d
    for i in range(n):
        out[i] = -upsilon * (out[i] + a + b * e[i])


@njit(cache=True)
def rhs(x, mode, e, tau, upsilon, log_floor, eps_deg, out, diag):
    if mode == MODE_SEA_SQRT:
        sea_sqrt_rhs(x, e, tau, eps_deg, out)
    elif mode == MODE_SEA_PROB:
        sea_prob_rhs(x, e, tau, eps_deg, out)
    else:
        lemanska_rhs(x, e, upsilon, log_floor, out, diag)


@njit(cache=True)
def rk4_step(x, k1, mode, e, tau, upsilon, log_floor, eps_deg, h, renorm, diag):
    """One classical RK4 step of signed size ``h`` given k1 = f(x); returns the new state."""
    n = x.size
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    for i in range(n):
        tmp[i] = x[i] + 0.5 * h * k1[i]
    rhs(tmp, mode, e, tau, upsilon, log_floor, eps_deg, k2, diag)
    for i in range(n):
        tmp[i] = x[i] + 0.5 * h * k2[i]
    rhs(tmp, mode, e, tau, upsilon, log_floor, eps_deg, k3, diag)
    for i in range(n):
        tmp[i] = x[i] + h * k3[i]
    rhs(tmp, mode, e, tau, upsilon, log_floor, eps_deg, k4, diag)
    xn = np.empty(n)
    for i in range(n):
        xn[i] = x[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0
    if mode == MODE_SEA_SQRT and renorm:
        s = 0.0
        for i in range(n):
            s += xn[i] * xn[i]
        s = math.sqrt(s)
        for i in range(n):
            xn[i] /= s
    return xn


@njit(cache=True)
def _probs(x, mode):
    if mode == MODE_SEA_SQRT:
        return x * x
    return x.copy()


@njit(cache=True)
def _entropy(p):
    s = 0.0
    for i in range(p.size):
        if p[i] > 0.0:
            s -= p[i] * math.log(p[i])
    return s


@njit(cache=True)
def advance(x, mode, e, tau, upsilon, log_floor, eps_deg, h, sign, nsteps, conv_tol,
            boundary_floor, occupied, E0, escale, drift_abort, renorm, diag):
    """Advance ``x`` in place by up to ``nsteps`` RK4 steps, stopping on a terminal event.

    Returns (steps taken, status code). Termination tests run on the state at
    the start of each step, using k1 = f(x).
    """
    n = x.size
    k1 = np.empty(n)
    hs = sign * h
    p = _probs(x, mode)
    S_old = _entropy(p)
    for k in range(nsteps):
        rhs(x, mode, e, tau, upsilon, log_floor, eps_deg, k1, diag)
        if sign > 0:
            rate = 0.0
            for i in range(n):
                pd = 2.0 * x[i] * k1[i] if mode == MODE_SEA_SQRT else k1[i]
                rate = max(rate, abs(pd))
            if rate < conv_tol:
                return k, STATUS_CONVERGED
        else:
            below = False
            for i in range(n):
                if occupied[i] and p[i] < boundary_floor:
                    below = True
            if below:
                rate = 0.0
                for i in range(n):
                    if p[i] >= boundary_floor:
                        pd = 2.0 * x[i] * k1[i] if mode == MODE_SEA_SQRT else k1[i]
                        rate = max(rate, abs(pd))
                if rate < conv_tol:
                    return k, STATUS_BOUNDARY
        xn = rk4_step(x, k1, mode, e, tau, upsilon, log_floor, eps_deg, hs, renorm, diag)
        pn = _probs(xn, mode)
        if mode == MODE_LEMANSKA and sign < 0:
            for i in range(n):
                if pn[i] <= 0.0:
                    return k, STATUS_NEGATIVE
        total = 0.0
        energy = 0.0
        for i in range(n):
            total += pn[i]
            energy += e[i] * pn[i]
        nd = abs(1.0 - total)
        ed = abs(energy - E0) / escale
        diag[D_NORM] = max(diag[D_NORM], nd)
        diag[D_ENERGY] = max(diag[D_ENERGY], ed)
        S_new = _entropy(pn)
        # entropy decrease measured in forward physical time
        drop = (S_old - S_new) if sign > 0 else (S_new - S_old)
        diag[D_ENTROPY_DROP] = max(diag[D_ENTROPY_DROP], drop)
        for i in range(n):
            x[i] = xn[i]
        p = pn
        S_old = S_new
        if nd > drift_abort or ed > drift_abort:
            return k + 1, STATUS_DRIFT
    return nsteps, STATUS_RUNNING
