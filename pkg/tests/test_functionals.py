import math

import numpy as np
import pytest
from hypothesis import given

from searelax.equilibria import enumerate_feasible_masks, solve_canonical, solve_partial
from searelax.errors import InvalidStateError
from searelax.functionals import (
    DEGENERATE,
    beta_alpha,
    beta_alpha_sums,
    covariances,
    degeneracy_threshold,
    entropy,
    entropy_rate,
    entropy_rate_batch,
    entropy_rate_fd,
    gradients,
    massieu_report,
    mean_energy,
)

from conftest import LEVELS, distributions, masked_distributions

# reference values computed with 40-digit mpmath
BETA_04 = 0.7320769755739336968
P_04 = [0.3474396108772016670, 0.2722076542389774577, 0.2132658588904400837, 0.1670868759933807916]
H_QUARTER = 0.5623351446188083503
SEA_RATE_QUARTER = 0.2263029301523591208


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def test_mean_energy_examples():
    assert mean_energy([1, 0, 0, 0], LEVELS) == 0.0
    assert mean_energy([0.25] * 4, LEVELS) == pytest.approx(0.5, abs=1e-15)
    assert abs(mean_energy([0.3474, 0.2722, 0.2133, 0.1671], LEVELS) - 0.4) < 1e-4


def test_mean_energy_length_mismatch():
    with pytest.raises(InvalidStateError):
        mean_energy([0.5, 0.5], LEVELS)


def test_entropy_examples():
    assert entropy([1.0, 0.0]) == 0.0
    assert entropy([0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-15)
    assert entropy([0.25, 0.75]) == pytest.approx(H_QUARTER, abs=1e-15)
    assert entropy([0.5, 0.5], kB=2.0) == pytest.approx(2 * math.log(2))


def test_gradient_examples():
    g = gradients([1.0, 0.0], [0.0, 1.0])
    np.testing.assert_array_equal(g.e_grad, [0.0, 0.0])
    np.testing.assert_array_equal(g.u_grad, [2.0, 0.0])
    np.testing.assert_array_equal(g.s_grad, [-2.0, 0.0])
    h = math.sqrt(0.5)
    g = gradients([h, h], [0.0, 1.0])
    expected = -2.0 * h * (math.log(0.5) + 1.0)
    np.testing.assert_allclose(g.s_grad, [expected, expected], rtol=1e-15)


def _S_of_y(y):
    p = y * y
    return -np.sum(np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0))


@given(distributions(n=4))
def test_gradients_match_finite_differences(p):
    y = np.sqrt(p)
    g = gradients(y, LEVELS)
    h = 1e-6
    for i in range(y.size):
        d = np.zeros_like(y)
        d[i] = h
        fd_s = (_S_of_y(y + d) - _S_of_y(y - d)) / (2 * h)
        fd_e = (np.sum(LEVELS * (y + d) ** 2) - np.sum(LEVELS * (y - d) ** 2)) / (2 * h)
        fd_u = (np.sum((y + d) ** 2) - np.sum((y - d) ** 2)) / (2 * h)
        assert abs(g.s_grad[i] - fd_s) < 1e-6
        assert abs(g.e_grad[i] - fd_e) < 1e-6
        assert abs(g.u_grad[i] - fd_u) < 1e-6


def test_covariance_examples():
    assert covariances([1, 0, 0, 0], LEVELS) == (0.0, 0.0, 0.0)
    assert covariances([0.5, 0.5], [0.0, 1.0])[0] == pytest.approx(0.25)
    sol = solve_canonical(LEVELS, 0.4)
    ee, _, es = covariances(sol.probs, LEVELS)
    assert es == pytest.approx(sol.beta * ee, rel=1e-10)
    assert abs(es / ee - 0.7321) < 1e-3


@given(distributions(n=4))
def test_covariances_match_textbook_forms(p):
    ee, ss, es = covariances(p, LEVELS, kB=1.3)
    lnp = np.log(p)
    assert ee == pytest.approx(np.sum(p * LEVELS ** 2) - np.sum(p * LEVELS) ** 2, abs=1e-13)
    assert ss == pytest.approx(1.3 ** 2 * (np.sum(p * lnp ** 2) - np.sum(p * lnp) ** 2), abs=1e-12)
    assert ee >= 0 and ss >= 0


def test_beta_at_reference_canonical():
    beta, alpha = beta_alpha(P_04, LEVELS)
    assert abs(beta - 0.7321) < 5e-5
    assert beta == pytest.approx(BETA_04, rel=1e-12)


def test_beta_undefined_on_flat_spectrum():
    assert beta_alpha([0.5, 0.5], [1.0, 1.0]) == (None, None)
    assert beta_alpha_sums([0.5, 0.5], [1.0, 1.0]) == (None, None)


def test_degeneracy_threshold_scales_with_span():
    assert degeneracy_threshold([0.0, 2.0]) == pytest.approx(4e-12)
    assert degeneracy_threshold([3.0, 3.0]) == 1e-12


@given(distributions(n=4))
def test_beta_alpha_two_routes_agree(p):
    b1, a1 = beta_alpha(p, LEVELS)
    b2, a2 = beta_alpha_sums(p, LEVELS)
    assert rel(b1, b2) < 1e-10 or abs(b1 - b2) < 1e-10
    assert rel(a1, a2) < 1e-10


def test_alpha_has_no_constant_offset():
    # alpha from the sums must equal S/kB - beta E, not 1 + S/kB - beta E
    p = np.array([0.6, 0.25, 0.1, 0.05])
    beta, alpha = beta_alpha_sums(p, LEVELS)
    assert alpha == pytest.approx(entropy(p) - beta * mean_energy(p, LEVELS), rel=1e-12)


def test_massieu_vanishes_at_canonical():
    rep = massieu_report(solve_canonical(LEVELS, 0.4).probs, LEVELS)
    assert rep.cov_MM < 1e-10
    assert abs(rep.entropy_rate) < 1e-12


@pytest.mark.parametrize("mask", [m.as_ints() for m in enumerate_feasible_masks(LEVELS, 0.4)])
def test_massieu_vanishes_at_partial_equilibria(mask):
    rep = massieu_report(solve_partial(LEVELS, 0.4, mask).probs, LEVELS)
    assert rep.cov_MM < 1e-10
    assert abs(rep.entropy_rate) < 1e-10


@given(distributions(n=4))
def test_massieu_identity(p):
    rep = massieu_report(p, LEVELS, kB=1.0)
    assert rep.massieu == pytest.approx(rep.S - rep.beta * rep.E, rel=1e-12, abs=1e-14)
    rhs = rep.cov_SS - rep.beta ** 2 * rep.cov_EE
    assert abs(rep.cov_MM - rhs) <= 1e-10 * max(rep.cov_MM, rhs, 1e-300) or abs(rep.cov_MM - rhs) < 1e-15


def test_degenerate_report_flags():
    rep = massieu_report([0.75, 0.25], [2.0, 2.0])
    assert rep.branch == DEGENERATE and rep.degenerate
    assert rep.beta is None and rep.alpha is None and rep.massieu is None and rep.cov_MM is None


def test_entropy_rate_two_level_degenerate():
    assert entropy_rate([0.75, 0.25], [0.0, 0.0]) == pytest.approx(SEA_RATE_QUARTER, rel=1e-14)
    assert entropy_rate([0.75, 0.25], [0.0, 0.0], kB=2.0, tau=4.0) == pytest.approx(SEA_RATE_QUARTER / 2, rel=1e-14)


def test_entropy_rate_zero_at_canonical():
    assert abs(entropy_rate(solve_canonical(LEVELS, 0.3).probs, LEVELS)) < 1e-12


@given(distributions(n=4))
def test_entropy_rate_gram_equals_fluctuation_form(p):
    a, b = entropy_rate(p, LEVELS), entropy_rate_fd(p, LEVELS)
    assert a >= -1e-12
    assert abs(a - b) <= 1e-10 * max(a, b) + 1e-15


@given(masked_distributions())
def test_entropy_rate_nonnegative_with_zeros(p):
    assert entropy_rate(p, LEVELS) >= -1e-12
    assert entropy_rate_fd(p, LEVELS) >= -1e-12


def test_entropy_rate_degenerate_branch_uses_entropy_fluctuations():
    p = np.array([0.1, 0.2, 0.7])
    e = np.array([1.0, 1.0, 1.0])
    _, ss, _ = covariances(p, e)
    assert entropy_rate(p, e) == pytest.approx(ss, rel=1e-10)
    assert entropy_rate_fd(p, e) == pytest.approx(ss, rel=1e-12)


@given(distributions(n=5))
def test_entropy_maximal_at_uniform_over_mask(p):
    assert entropy(p) <= math.log(5) + 1e-15


def test_entropy_rate_batch_matches_scalar():
    rng = np.random.default_rng(3)
    P = rng.dirichlet(np.ones(4), size=50)
    P[0] = solve_canonical(LEVELS, 0.4).probs
    P[1] = [0.5, 0.0, 0.5, 0.0]
    batch = entropy_rate_batch(P, LEVELS)
    np.testing.assert_allclose(batch, [entropy_rate(p, LEVELS) for p in P], rtol=1e-12, atol=1e-15)
