import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from searelax.errors import InvalidStateError
from searelax.state import (
    Distribution,
    EnergySpectrum,
    OccupationMask,
    SqrtState,
    mask_of,
    to_probs,
    to_sqrt,
    validate_distribution,
)

from conftest import distributions, masked_distributions


def test_validate_accepts_symmetric():
    assert validate_distribution([0.5, 0.5]).ok


def test_validate_reports_sum():
    rep = validate_distribution([0.5, 0.6])
    assert not rep.ok
    assert rep.total == pytest.approx(1.1)
    assert "sum" in rep.message


def test_validate_reports_negative_index():
    rep = validate_distribution([1.0, -1e-15, 0.0])
    assert not rep.ok
    assert rep.negative_indices == (1,)


@pytest.mark.parametrize("bad", [[np.nan, 1.0], [], [[0.5, 0.5]], "abc"])
def test_validate_is_total(bad):
    assert not validate_distribution(bad).ok


def test_to_sqrt_examples():
    np.testing.assert_array_equal(to_sqrt([1.0, 0.0]).coords, [1.0, 0.0])
    y = to_sqrt([0.25, 0.75]).coords
    np.testing.assert_allclose(y, [0.5, 0.8660254037844386], rtol=0, atol=1e-15)
    np.testing.assert_allclose(y ** 2, [0.25, 0.75], atol=1e-15)


def test_to_sqrt_reference_canonical():
    y = to_sqrt([0.3474, 0.2722, 0.2133, 0.1671]).coords
    assert abs(np.sum(y * y) - 1.0) < 1e-12


def test_to_probs_examples():
    np.testing.assert_array_equal(to_probs([1.0, 0.0]).probs, [1.0, 0.0])
    np.testing.assert_allclose(to_probs([np.sqrt(0.5), np.sqrt(0.5)]).probs, [0.5, 0.5], atol=1e-16)


def test_mask_examples():
    assert mask_of([0.5, 0.5, 0, 0]).as_ints() == [1, 1, 0, 0]
    assert mask_of([0.5, 0.5, 1e-14, 0], 1e-12).as_ints() == [1, 1, 0, 0]
    assert mask_of([0.3474, 0.2722, 0.2133, 0.1671]).is_full


def test_empty_mask_rejected():
    with pytest.raises(InvalidStateError):
        mask_of([1e-14, 1e-14], 1e-12)
    with pytest.raises(InvalidStateError):
        OccupationMask((False, False))


def test_type_invariants():
    with pytest.raises(InvalidStateError):
        EnergySpectrum([1.0])
    with pytest.raises(InvalidStateError):
        EnergySpectrum([0.0, np.inf])
    with pytest.raises(InvalidStateError):
        Distribution([0.5, 0.6])
    with pytest.raises(InvalidStateError):
        SqrtState([0.5, 0.5])
    with pytest.raises(InvalidStateError):
        to_sqrt([0.7, 0.7])


def test_spectrum_kept_in_given_order():
    spec = EnergySpectrum([1.0, 0.0, 1.0])
    np.testing.assert_array_equal(spec.levels, [1.0, 0.0, 1.0])
    assert spec.span == 1.0
    assert len(spec) == 3


def test_arrays_are_read_only():
    d = Distribution([0.5, 0.5])
    with pytest.raises(ValueError):
        d.probs[0] = 1.0


def test_mask_string_form():
    assert str(OccupationMask.from_ints([1, 0, 1, 0])) == "[1,0,1,0]"


@given(distributions(n=5))
def test_sqrt_round_trip_on_probabilities(p):
    back = to_probs(to_sqrt(p)).probs
    assert np.max(np.abs(back - p)) <= 1e-15


@given(distributions(n=5))
def test_sqrt_round_trip_on_coordinates(p):
    y = to_sqrt(p).coords
    again = to_sqrt(to_probs(y)).coords
    assert np.max(np.abs(again - y)) <= 1e-15


@given(masked_distributions(), st.sampled_from([0.0, 1e-12, 1e-3]))
def test_mask_idempotent(p, thr):
    m = mask_of(p, thr)
    # apply the mask and take it again
    q = np.where(m.array, p, 0.0)
    assert mask_of(q, thr) == m


@given(distributions(n=6))
def test_validate_accepts_to_probs_output(p):
    assert validate_distribution(to_probs(to_sqrt(p))).ok
