import numpy as np
import pytest
from hypothesis import given, strategies as st

from kawahara_control.spectrum import (
    CANONICAL,
    MAX_INDEX,
    DispersionParams,
    collision_classes,
    eigenvalue,
    eigenvalue_sequence,
    has_collisions,
    min_gap,
    sorted_gaps,
    symbol,
)


def test_canonical_moduli_small_k():
    # k * (k^4 + k^2 - 1) for k = 1..5
    expected = {1: 1.0, 2: 38.0, 3: 267.0, 4: 1084.0, 5: 3245.0}
    for k, nu in expected.items():
        assert symbol(CANONICAL, k) == nu
        assert eigenvalue(CANONICAL, k) == 1j * nu


def test_eigenvalues_purely_imaginary_and_conjugate_symmetric():
    seq = eigenvalue_sequence(CANONICAL, 30)
    for k in range(-30, 31):
        lam = seq[k]
        assert lam.real == 0.0
        # bitwise symmetry, not approximate
        assert seq[-k] + lam == 0.0


def test_sequence_rejects_bad_truncations():
    with pytest.raises(ValueError):
        eigenvalue_sequence(CANONICAL, 0)
    with pytest.raises(ValueError):
        eigenvalue_sequence(CANONICAL, MAX_INDEX + 1)


def test_beta_must_be_nonzero():
    with pytest.raises(ValueError):
        DispersionParams(beta=0.0)


def test_canonical_has_no_collisions():
    classes = collision_classes(CANONICAL, 50)
    assert all(len(c) == 1 for c in classes)
    assert not has_collisions(CANONICAL, 50)


def test_degenerate_parameters_produce_collisions():
    # gamma = 2 makes nu_1 = 1*(1 + 1 - 2) = 0 = nu_0 = nu_{-1}
    params = DispersionParams(gamma=2.0)
    classes = collision_classes(params, 5)
    zero_class = next(c for c in classes if 0 in c)
    assert sorted(zero_class) == [-1, 0, 1]
    assert has_collisions(params, 5)


def test_min_gap_matches_brute_force():
    seq = eigenvalue_sequence(CANONICAL, 50)
    nus = sorted(
        symbol(CANONICAL, k) for k in range(-50, 51) if symbol(CANONICAL, k) != 0
    )
    brute = min(b - a for a, b in zip(nus, nus[1:]))
    assert min_gap(seq) == brute == 2.0


def test_sorted_gaps_increase_away_from_origin():
    seq = eigenvalue_sequence(CANONICAL, 50)
    gaps = sorted_gaps(seq)
    mid = gaps.size // 2  # central gap (-1, 1)
    right = gaps[mid:]
    left = gaps[: mid + 1][::-1]
    assert np.all(np.diff(right) > 0)
    assert np.all(np.diff(left) > 0)


@given(
    k=st.integers(min_value=-100, max_value=100),
    gamma=st.floats(-3, 3, allow_nan=False),
    alpha=st.floats(-3, 3, allow_nan=False),
    beta=st.floats(0.1, 3, allow_nan=False),
)
def test_symbol_is_odd_in_k(k, gamma, alpha, beta):
    params = DispersionParams(gamma, alpha, beta)
    assert symbol(params, -k) == -symbol(params, k)
