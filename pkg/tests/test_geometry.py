import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risbody.geometry import (
    ArrayLayout,
    EulerAngles,
    Pose,
    direction_between,
    element_positions,
    fraunhofer_distance,
    grid_layout,
    linear_layout,
    planar_array_layout,
    rotation_derivative,
    rotation_derivatives,
    rotation_from_euler,
    square_fraunhofer_distance,
    square_layout,
)

angle = st.floats(-np.pi, np.pi, allow_nan=False)


def test_zero_angles_give_identity():
    np.testing.assert_array_equal(rotation_from_euler(EulerAngles(0, 0, 0)), np.eye(3))


def test_quarter_turn_about_z():
    q = rotation_from_euler(EulerAngles(np.pi / 2, 0, 0))
    np.testing.assert_allclose(q @ [1, 0, 0], [0, 1, 0], atol=1e-12)


def test_random_rotations_orthonormal():
    rng = np.random.default_rng(0)
    for a in rng.uniform(-np.pi, np.pi, (1000, 3)):
        q = rotation_from_euler(EulerAngles(*a))
        np.testing.assert_allclose(q.T @ q, np.eye(3), atol=1e-12)
        assert abs(np.linalg.det(q) - 1) < 1e-12


def test_angles_wrap():
    e = EulerAngles(3 * np.pi / 2, -np.pi, 2 * np.pi)
    assert e.yaw == pytest.approx(-np.pi / 2)
    assert e.pitch == pytest.approx(np.pi)
    assert e.roll == pytest.approx(0.0, abs=1e-15)


def test_yaw_derivative_at_origin_is_generator():
    expected = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]])
    np.testing.assert_allclose(rotation_derivative(EulerAngles(0, 0, 0), 1), expected, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(angle, angle, angle, st.sampled_from([1, 2, 3]))
def test_rotation_derivative_matches_central_difference(yaw, pitch, roll, axis):
    h = 1e-6
    a = np.array([yaw, pitch, roll])
    shift = np.eye(3)[axis - 1] * h
    fd = (rotation_from_euler(a + shift) - rotation_from_euler(a - shift)) / (2 * h)
    analytic = rotation_derivative(EulerAngles(*a), axis)
    assert np.max(np.abs(analytic - fd)) < 1e-6 * max(1.0, np.max(np.abs(analytic)))


def test_derivative_of_zero_offset_is_zero():
    d = rotation_derivative(EulerAngles(0.3, -0.2, 1.1), 2)
    np.testing.assert_array_equal(d @ np.zeros(3), np.zeros(3))


def test_rotation_derivatives_stack():
    a = EulerAngles(0.1, 0.2, 0.3)
    stack = rotation_derivatives(a)
    for k in range(3):
        np.testing.assert_array_equal(stack[k], rotation_derivative(a, k + 1))


@pytest.mark.parametrize("axis", [0, 4, -1])
def test_invalid_axis(axis):
    with pytest.raises(ValueError):
        rotation_derivative(EulerAngles(0, 0, 0), axis)


def test_direction_polar_axis():
    d = direction_between([0, 0, 0], [0, 0, 1])
    assert d.distance == 1.0
    assert d.elevation == pytest.approx(0.0)


def test_direction_equatorial_axis():
    d = direction_between([0, 0, 0], [1, 0, 0])
    assert d.distance == 1.0
    assert d.azimuth == pytest.approx(0.0)
    assert d.elevation == pytest.approx(np.pi / 2)


def test_direction_between_setup_positions():
    d = direction_between([0, 0, 4], [2, 2, 4])
    assert d.distance == pytest.approx(2 * np.sqrt(2))
    np.testing.assert_allclose(d.unit, [1 / np.sqrt(2), 1 / np.sqrt(2), 0], atol=1e-15)


def test_direction_degenerate():
    with pytest.raises(ValueError, match="degenerate direction"):
        direction_between([1, 2, 3], [1, 2, 3])


@pytest.mark.parametrize(
    "side, wavelength, expected",
    [(0.08, 0.03, 0.853), (0.08, 0.003, 8.53), (0.03, 0.003, 1.2)],
)
def test_fraunhofer_values(side, wavelength, expected):
    assert square_fraunhofer_distance(side, wavelength) == pytest.approx(expected, abs=5e-3)


def test_fraunhofer_formula():
    assert fraunhofer_distance(0.5, 0.01) == pytest.approx(2 * 0.25 / 0.01)


@pytest.mark.parametrize("args", [(0.0, 0.003), (0.1, 0.0), (-1.0, 0.003)])
def test_fraunhofer_rejects_nonpositive(args):
    with pytest.raises(ValueError):
        fraunhofer_distance(*args)


def test_square_layout_counts():
    for side, per_side in [(0.03, 20), (0.05, 33), (0.08, 53)]:
        layout = square_layout(side, 1.5e-3)
        assert layout.count == per_side**2
        np.testing.assert_allclose(layout.offsets.mean(axis=0), 0.0, atol=1e-15)
        assert np.all(layout.offsets[:, 2] == 0.0)


def test_planar_receiver_grid_is_nested():
    small, large = planar_array_layout(8, 1.5e-3), planar_array_layout(16, 1.5e-3)
    assert small.count == 8 and large.count == 16
    assert planar_array_layout(1, 1.5e-3).count == 1
    assert grid_layout(2, 4, 1.0).count == 8
    assert linear_layout(3, 1.0).count == 3
    spacing = np.diff(np.unique(large.offsets[:, 0]))
    np.testing.assert_allclose(spacing, 1.5e-3)


def test_identity_pose_returns_offsets():
    layout = square_layout(0.03, 1.5e-3)
    np.testing.assert_array_equal(element_positions(layout, Pose([0, 0, 0], EulerAngles(0, 0, 0))), layout.offsets)


def test_translation_shifts_offsets():
    layout = square_layout(0.03, 1.5e-3)
    p = np.array([2.0, 2.0, 4.0])
    np.testing.assert_allclose(element_positions(layout, Pose(p, EulerAngles(0, 0, 0))), layout.offsets + p, atol=0)


@settings(max_examples=25, deadline=None)
@given(angle, angle, angle)
def test_rotation_preserves_distances(yaw, pitch, roll):
    layout = ArrayLayout(np.random.default_rng(3).normal(size=(6, 3)) * 0.01, 1e-3)
    moved = element_positions(layout, Pose([1.0, -2.0, 0.5], EulerAngles(yaw, pitch, roll)))
    before = np.linalg.norm(layout.offsets[:, None] - layout.offsets[None], axis=-1)
    after = np.linalg.norm(moved[:, None] - moved[None], axis=-1)
    np.testing.assert_allclose(after, before, atol=1e-12)
