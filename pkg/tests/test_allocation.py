import numpy as np
import pytest
from hypothesis import given, strategies as st

from hexactrl.allocation import (
    PimSingular,
    allocate,
    full_allocation,
    hover_distribution,
    pim,
    reduced_allocation,
    saturate,
)
from hexactrl.model import AirframeParams, build_full_effectiveness, build_reduced_effectiveness, single_failure

positive_etas = st.lists(st.floats(0.05, 1.0), min_size=6, max_size=6).map(np.array)


def test_reduced_rotor2_thrust_column(params):
    P = reduced_allocation(params, single_failure(2)).P
    np.testing.assert_allclose(P[:, 0], [5 / 18, 0, 5 / 18, 1 / 6, 1 / 9, 1 / 6], atol=1e-12)
    assert P[:, 0].sum() == pytest.approx(1.0, abs=1e-12)


@given(positive_etas)
def test_right_inverse_full(eta):
    p = AirframeParams()
    H = build_full_effectiveness(p, eta)
    assert np.max(np.abs(H @ pim(H).P - np.eye(4))) <= 1e-10


@pytest.mark.parametrize("rotor", range(1, 7))
def test_right_inverse_reduced_single_failures(params, rotor):
    H = build_reduced_effectiveness(params, single_failure(rotor))
    P = pim(H).P
    assert np.max(np.abs(H @ P - np.eye(3))) <= 1e-10
    assert not np.any(P[rotor - 1])


def test_opposite_pair_failure_is_singular(params):
    eta = np.array([0, 1, 1, 0, 1, 1.0])
    H = build_full_effectiveness(params, eta)
    # Oracle: the surviving columns only span three dimensions.
    assert np.linalg.matrix_rank(H) == 3
    with pytest.raises(PimSingular):
        pim(H)


def test_hover_lifts_after_rotor2_failure(params, weight):
    f = hover_distribution(reduced_allocation(params, single_failure(2)), [weight, 0, 0])
    np.testing.assert_allclose(f, weight * np.array([5 / 18, 0, 5 / 18, 1 / 6, 1 / 9, 1 / 6]), atol=1e-12)
    assert f.max() == pytest.approx(4.1786, abs=1e-4)
    assert f.max() < params.max_lift_n


def test_nominal_hover_is_uniform(params, weight):
    P = full_allocation(params)
    f = allocate(P, [weight, 0, 0, 0])
    np.testing.assert_allclose(f, weight / 6, rtol=1e-12)
    assert weight / 6 == pytest.approx(2.5072, abs=1e-4)
    np.testing.assert_allclose(build_full_effectiveness(params) @ f, [weight, 0, 0, 0], atol=1e-12)


def test_zero_command(params):
    assert not np.any(allocate(full_allocation(params), np.zeros(4)))
    assert not np.any(hover_distribution(full_allocation(params), np.zeros(4)))


def test_dimension_mismatch(params):
    with pytest.raises(ValueError):
        allocate(full_allocation(params), np.zeros(3))


@given(st.lists(st.floats(-50, 50), min_size=4, max_size=4), st.lists(st.floats(-50, 50), min_size=4, max_size=4),
       st.floats(-3, 3), st.floats(-3, 3))
def test_allocate_is_linear(F1, F2, a, b):
    P = full_allocation(AirframeParams())
    F1, F2 = np.array(F1), np.array(F2)
    np.testing.assert_allclose(allocate(P, a * F1 + b * F2), a * allocate(P, F1) + b * allocate(P, F2), atol=1e-9)


def test_saturate():
    f, flags = saturate([1.0, 2.0], 6.0)
    np.testing.assert_array_equal(f, [1.0, 2.0])
    assert not flags.any()
    f, flags = saturate([-1.0, 8.0, 3.0], 6.0)
    np.testing.assert_array_equal(f, [0.0, 6.0, 3.0])
    np.testing.assert_array_equal(flags, [True, True, False])
