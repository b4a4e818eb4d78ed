import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from breitrabi.spin_algebra import HalfInteger, projections, rotation_matrix, spin_operators

SPINS = [HalfInteger(t) for t in range(0, 10)]


def test_half_integer_parsing_and_arithmetic():
    assert HalfInteger.of("3/2") == HalfInteger(3)
    assert HalfInteger.of(1.5).twice == 3
    assert HalfInteger.of(Fraction(-1, 2)) == -HalfInteger(1)
    assert HalfInteger(1) + HalfInteger(3) == 2
    assert str(HalfInteger(-3)) == "-3/2"
    assert HalfInteger(2).signed() == "+1"
    assert HalfInteger(0).signed() == "0"
    with pytest.raises(ValueError):
        HalfInteger.of(0.25)


def test_projections_order():
    assert [str(m) for m in projections(HalfInteger(3))] == ["3/2", "1/2", "-1/2", "-3/2"]
    with pytest.raises(ValueError):
        projections(HalfInteger(-1))


def test_spin_half_matrices():
    ops = spin_operators("1/2")
    np.testing.assert_array_equal(ops.Jz, np.diag([0.5, -0.5]))
    assert ops.Jplus[0, 1] == 1.0


def test_spin_three_halves_ladder_entry():
    # <3/2|J+|1/2> = sqrt(3), the source of the sqrt(3)A/2 sodium coupling
    ops = spin_operators("3/2")
    assert ops.Jplus[0, 1] == pytest.approx(math.sqrt(3), abs=1e-15)


def test_negative_spin_rejected():
    with pytest.raises(ValueError):
        spin_operators(HalfInteger(-1))


@pytest.mark.parametrize("j", SPINS, ids=str)
def test_operator_identities(j):
    ops = spin_operators(j)
    n = ops.dim
    np.testing.assert_array_equal(ops.Jplus, ops.Jminus.conj().T)
    np.testing.assert_array_equal(ops.Jz, np.diag(np.diag(ops.Jz)))
    comm = ops.Jx @ ops.Jy - ops.Jy @ ops.Jx
    assert np.abs(comm - 1j * ops.Jz).max() <= 1e-14
    j2 = ops.Jx @ ops.Jx + ops.Jy @ ops.Jy + ops.Jz @ ops.Jz
    assert np.abs(j2 - j.value * (j.value + 1) * np.eye(n)).max() <= 1e-13
    top = np.zeros(n)
    top[0] = 1.0
    bottom = np.zeros(n)
    bottom[-1] = 1.0
    assert not np.any(ops.Jplus @ top)
    assert not np.any(ops.Jminus @ bottom)


def test_rotation_identity_and_spin_flip():
    np.testing.assert_allclose(rotation_matrix("3/2", 0.0, 0.0), np.eye(4), atol=1e-15)
    u = rotation_matrix("1/2", math.pi, 0.0)
    flipped = u @ np.array([1.0, 0.0])
    assert abs(flipped[0]) < 1e-15
    assert abs(abs(flipped[1]) - 1.0) < 1e-15


@settings(max_examples=60, deadline=None)
@given(twice=st.integers(0, 9), theta=st.floats(0, math.pi), phi=st.floats(0, 2 * math.pi))
def test_rotation_unitary_and_axis(twice, theta, phi):
    j = HalfInteger(twice)
    ops = spin_operators(j)
    u = rotation_matrix(j, theta, phi)
    assert np.abs(u.conj().T @ u - np.eye(ops.dim)).max() <= 1e-13
    n = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
    assert np.abs(u @ ops.Jz @ u.conj().T - ops.component(n)).max() <= 1e-12
