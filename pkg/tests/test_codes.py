import numpy as np
import pytest

from risbody.codes import (
    CodeConstraintError,
    dft_code_assignment,
    random_phase_profile,
    verify_code_constraints,
)


def test_smallest_code():
    np.testing.assert_allclose(dft_code_assignment(1, 2)[:, 0], np.array([1, -1]) / np.sqrt(2), atol=1e-15)


def test_two_sensors_four_symbols():
    code = dft_code_assignment(2, 4)
    t = np.arange(4)
    for m in (1, 2):
        np.testing.assert_allclose(code[:, m - 1], np.exp(-2j * np.pi * m * t / 4) / 2, atol=1e-15)
    assert abs(np.vdot(code[:, 0], code[:, 1])) < 1e-15


@pytest.mark.parametrize("m, t", [(2, 2), (3, 1), (4, 4)])
def test_insufficient_symbols(m, t):
    with pytest.raises(CodeConstraintError, match="insufficient symbols for separability"):
        dft_code_assignment(m, t)


@pytest.mark.parametrize("m, t", [(1, 2), (2, 3), (2, 16), (5, 8)])
def test_dft_code_satisfies_constraints(m, t):
    assert verify_code_constraints(dft_code_assignment(m, t)).max() < 1e-12


def test_all_ones_column_violates_zero_sum():
    res = verify_code_constraints(np.ones((4, 1)) / 2)
    assert res.zero_sum > 0.5
    assert res.unit_energy < 1e-15


def test_duplicated_columns_fully_correlated():
    col = dft_code_assignment(1, 4)
    res = verify_code_constraints(np.hstack([col, col]))
    assert res.cross_correlation == pytest.approx(1.0)


def test_profile_deterministic_and_unit_modulus():
    a, b = random_phase_profile(7, 400), random_phase_profile(7, 400)
    np.testing.assert_array_equal(a.coefficients, b.coefficients)
    np.testing.assert_allclose(np.abs(a.coefficients), 1.0, atol=1e-15)
    assert len(a) == 400
    assert not np.array_equal(a.phases, random_phase_profile(8, 400).phases)


def test_profile_phase_mean():
    phases = random_phase_profile(0, 100_000).phases
    assert abs(phases.mean() - np.pi) < 0.02


def test_profile_needs_elements():
    with pytest.raises(ValueError):
        random_phase_profile(0, 0)
