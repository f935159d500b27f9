from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oddborel.series import (BandMatrixRational, ConsistencyError, OscillatorSpec, RSExpansion,
                             potential_matrix, rs_expand, scaled_position_matrix,
                             second_order_oracle)


def test_spec_invariants():
    s = OscillatorSpec(2, 1)
    assert s.q == Fraction(3, 2)
    assert s.power == 5 and s.unperturbed == 3
    with pytest.raises(ValueError):
        OscillatorSpec(0)
    with pytest.raises(ValueError):
        OscillatorSpec(1, -1)


def test_scaled_position_small():
    assert scaled_position_matrix(0).n == 0
    X = scaled_position_matrix(3)
    assert X.to_rows() == [[0, Fraction(1, 2), 0], [1, 0, 1], [0, 1, 0]]


@given(st.integers(1, 40))
def test_position_similarity(N):
    # product of the two off-diagonals is the squared symmetric entry (m+1)/2
    X = scaled_position_matrix(N)
    for m in range(N - 1):
        assert X[m, m + 1] * X[m + 1, m] == Fraction(m + 1, 2)


def test_potential_k1():
    V = potential_matrix(1, 4)
    assert all(V[i, i] == 0 for i in range(4))
    assert V[0, 1] == Fraction(3, 4)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 20))
def test_potential_structure(k, N):
    V = potential_matrix(k, N)
    for r in range(N):
        for c in range(N):
            if abs(r - c) > 2 * k + 1 or (r - c) % 2 == 0:
                assert V[r, c] == 0


def test_potential_matches_padded_power_entrywise():
    # block of the power on a larger basis must not depend on the padding
    assert potential_matrix(2, 6) == potential_matrix(2, 12).block(6)


def test_band_setitem_outside_band():
    B = BandMatrixRational(4, 1)
    with pytest.raises(IndexError):
        B[0, 3] = 1


def test_low_orders():
    e = rs_expand(OscillatorSpec(1), 6)
    assert e.a == [1, 0, Fraction(-11, 16), 0, Fraction(-465, 256), 0, Fraction(-39709, 4096)]
    assert rs_expand(OscillatorSpec(1), 0).a == [1]


def test_rejects_negative_order():
    with pytest.raises(ValueError):
        rs_expand(OscillatorSpec(1), -1)


@pytest.mark.parametrize("k,j,want", [(1, 0, Fraction(-11, 16)), (1, 1, Fraction(-71, 16))])
def test_oracle_values(k, j, want):
    assert second_order_oracle(OscillatorSpec(k, j)) == want


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("j", [0, 1, 2, 3])
def test_a2_matches_oracle(k, j):
    spec = OscillatorSpec(k, j)
    assert rs_expand(spec, 2).a[2] == second_order_oracle(spec)


def test_support_bound_and_normalisation():
    spec = OscillatorSpec(2, 1)
    e = rs_expand(spec, 8, keep_states=True)
    for s, u in enumerate(e.state_corrections):
        top = spec.j + spec.power * s
        assert all(c == 0 for c in u[top + 1:])
        if s:
            assert u[spec.j] == 0


def test_deterministic():
    spec = OscillatorSpec(2, 2)
    assert rs_expand(spec, 12).a == rs_expand(spec, 12).a


def test_constant_sign():
    a = rs_expand(OscillatorSpec(1), 20).a
    assert all(a[s] < 0 for s in range(2, 21, 2))


def test_partial_sum():
    e = rs_expand(OscillatorSpec(1), 4)
    assert e.partial_sum(Fraction(1, 10), 3) == 1 - Fraction(11, 1600)
    with pytest.raises(ValueError):
        RSExpansion(OscillatorSpec(1), 3, [1])


def test_consistency_error_is_runtime_error():
    assert issubclass(ConsistencyError, RuntimeError)
