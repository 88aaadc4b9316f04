import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from searelax.dynamics import sea_rhs
from searelax.equilibria import (
    CANONICAL,
    PARTIALLY_CANONICAL,
    SINGLE_LEVEL,
    Stability,
    all_masks,
    classify_stability,
    enumerate_feasible_masks,
    is_feasible,
    solve_canonical,
    solve_partial,
)
from searelax.errors import InfeasibleError, InvalidStateError
from searelax.functionals import entropy
from searelax.integrator import CONVERGED, IntegratorConfig, integrate
from searelax.state import OccupationMask

from conftest import LEVELS

BETA_04 = 0.7320769755739336968
P_04 = [0.3474396108772016670, 0.2722076542389774577, 0.2132658588904400837, 0.1670868759933807916]


def test_canonical_reference():
    sol = solve_canonical(LEVELS, 0.4)
    assert abs(sol.beta - 0.7321) < 5e-5
    assert np.max(np.abs(sol.probs - [0.3474, 0.2722, 0.2133, 0.1671])) < 5e-5
    # against the high-precision oracle
    assert sol.beta == pytest.approx(BETA_04, rel=1e-13)
    np.testing.assert_allclose(sol.probs, P_04, rtol=1e-13)
    assert sol.kind == CANONICAL


def test_canonical_at_spectrum_midpoint_is_uniform():
    sol = solve_canonical(LEVELS, 0.5)
    np.testing.assert_allclose(sol.probs, 0.25, atol=1e-15)
    assert abs(sol.beta) < 1e-13


def test_two_level_inverse_temperature():
    assert solve_canonical([0.0, 1.0], 0.4).beta == pytest.approx(math.log(1.5), rel=1e-13)


def test_canonical_rejects_out_of_range():
    for E in (0.0, 1.0, -0.1, 2.0):
        with pytest.raises(InfeasibleError):
            solve_canonical(LEVELS, E)


def test_partial_examples():
    np.testing.assert_allclose(solve_partial(LEVELS, 0.4, [1, 0, 1, 0]).probs, [0.4, 0, 0.6, 0], atol=1e-15)
    np.testing.assert_allclose(solve_partial(LEVELS, 0.4, [0, 1, 0, 1]).probs, [0, 0.9, 0, 0.1], atol=1e-15)
    sol = solve_partial(LEVELS, 1.0 / 3.0, [0, 1, 0, 0])
    np.testing.assert_array_equal(sol.probs, [0, 1, 0, 0])
    assert sol.kind == SINGLE_LEVEL and sol.beta == 0.0 and not sol.beta_defined


def test_partial_degenerate_mask_is_uniform():
    sol = solve_partial([1.0, 0.0, 1.0], 1.0, [1, 0, 1])
    np.testing.assert_array_equal(sol.probs, [0.5, 0.0, 0.5])
    assert not sol.beta_defined


def test_partial_infeasible():
    with pytest.raises(InfeasibleError):
        solve_partial(LEVELS, 0.4, [1, 1, 0, 0])
    with pytest.raises(InfeasibleError):
        solve_partial(LEVELS, 0.4, [0, 1, 0, 0])
    with pytest.raises(InvalidStateError):
        solve_partial(LEVELS, 0.4, [0, 0, 0, 0])
    with pytest.raises(InvalidStateError):
        solve_partial(LEVELS, 0.4, [1, 1])


def test_partial_solution_has_canonical_form():
    sol = solve_partial(LEVELS, 0.4, [1, 1, 0, 1])
    assert sol.kind == PARTIALLY_CANONICAL
    w = np.exp(-sol.beta * LEVELS) * np.array([1, 1, 0, 1])
    np.testing.assert_allclose(sol.probs, w / w.sum(), rtol=1e-12, atol=0)
    assert sol.probs[2] == 0.0
    assert abs(sol.energy - 0.4) < 1e-14


def test_enumeration_at_reference_energy():
    masks = [m.as_ints() for m in enumerate_feasible_masks(LEVELS, 0.4)]
    for m in ([1, 1, 1, 0], [1, 1, 0, 1], [1, 0, 1, 1], [0, 1, 1, 1], [1, 0, 1, 0], [1, 0, 0, 1], [0, 1, 0, 1]):
        assert m in masks
    assert [1, 1, 0, 0] not in masks
    assert [1, 1, 1, 1] not in masks
    # [0,1,1,0] is feasible too: occupied range (1/3, 2/3) contains 0.4
    assert [0, 1, 1, 0] in masks
    assert len(masks) == 8


def test_enumeration_order():
    masks = [m.as_ints() for m in enumerate_feasible_masks(LEVELS, 0.4)]
    counts = [sum(m) for m in masks]
    assert counts == sorted(counts)
    assert masks[:4] == [[1, 0, 1, 0], [1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 0, 1]]


def test_enumeration_two_level_midpoint_is_empty():
    assert enumerate_feasible_masks([0.0, 1.0], 0.5) == []


def test_enumeration_size_limit():
    with pytest.raises(InvalidStateError):
        all_masks(25)


def test_stability_classification():
    assert classify_stability(solve_canonical(LEVELS, 0.4), LEVELS) == Stability.E_CONDITIONALLY_STABLE
    part = solve_partial(LEVELS, 0.4, [1, 1, 0, 1])
    assert classify_stability(part, LEVELS) == Stability.DELTA_E_CONDITIONALLY_STABLE_ONLY
    single = solve_partial(LEVELS, 2.0 / 3.0, [0, 0, 1, 0])
    assert classify_stability(single) == Stability.DELTA_E_CONDITIONALLY_STABLE_ONLY
    assert Stability.E_CONDITIONALLY_STABLE.value == "E_conditionally_stable"


@given(st.floats(0.01, 0.99))
def test_canonical_is_fixed_point(E):
    sol = solve_canonical(LEVELS, E, tol=1e-12)
    assert np.max(np.abs(sea_rhs(sol.probs, LEVELS).dp_dt)) < 1e-11
    assert abs(sol.energy - E) <= 1e-12


@given(st.floats(0.01, 0.98), st.floats(1e-4, 0.01))
def test_beta_decreasing_in_energy(E, dE):
    assert solve_canonical(LEVELS, E).beta > solve_canonical(LEVELS, E + dE).beta


@given(st.floats(0.01, 0.99))
def test_full_mask_matches_canonical(E):
    a = solve_canonical(LEVELS, E)
    b = solve_partial(LEVELS, E, [1, 1, 1, 1])
    np.testing.assert_allclose(a.probs, b.probs, atol=1e-12)


@given(st.floats(0.02, 0.98))
def test_every_feasible_mask_solves_to_fixed_point(E):
    for m in enumerate_feasible_masks(LEVELS, E):
        sol = solve_partial(LEVELS, E, m)
        assert np.max(np.abs(sea_rhs(sol.probs, LEVELS).dp_dt)) < 1e-10
        assert np.all(sol.probs[~m.array] == 0.0)


def test_large_beta_does_not_overflow():
    e = np.array([0.0, 100.0, 200.0])
    sol = solve_canonical(e, 1e-3)
    assert np.all(np.isfinite(sol.probs)) and sol.beta > 0
    sol = solve_canonical(e, 200.0 - 1e-3)
    assert np.all(np.isfinite(sol.probs)) and sol.beta < 0


def test_feasibility_helper():
    assert is_feasible(LEVELS, 0.4, OccupationMask.from_ints([0, 1, 1, 0]))
    assert not is_feasible(LEVELS, 0.4, [1, 1, 0, 0])
    assert is_feasible(LEVELS, 1.0, [0, 0, 0, 1])


def test_leak_onto_empty_level_escapes_to_higher_entropy():
    pe = solve_partial(LEVELS, 0.4, [1, 1, 0, 1])
    eps = 1e-6
    p0 = pe.probs.copy()
    # energy-compensated leak of eps onto level 3, taken from levels 1 and 4
    p0[2] += eps
    p0[0] -= eps / 3
    p0[3] -= 2 * eps / 3
    assert abs(np.sum(LEVELS * p0) - 0.4) < 1e-15
    tr = integrate(p0, LEVELS, cfg=IntegratorConfig(max_time=100.0))
    assert tr.terminal_status == CONVERGED
    assert entropy(tr.terminal_state) > pe.entropy + 0.1
    np.testing.assert_allclose(tr.terminal_state.probs, solve_canonical(LEVELS, 0.4).probs, atol=1e-6)


def test_partial_reference_oracle():
    sol = solve_partial(LEVELS, 0.4, [1, 1, 0, 1])
    assert sol.beta == pytest.approx(0.2633948735730092030, rel=1e-13)
    np.testing.assert_allclose(sol.probs[[0, 1, 3]], [0.37252494235982077, 0.34121258646026884, 0.28626247117991039],
                               rtol=1e-13)
