"""Positions, directions, rotations and array layouts.

Rotations use the intrinsic Z-Y-X (yaw, pitch, roll) convention::

    Q(yaw, pitch, roll) = Rz(yaw) @ Ry(pitch) @ Rx(roll)

so a local offset ``s`` maps to the global frame as ``Q @ s``. Directions use
azimuth measured in the x-y plane from +x and elevation measured from +z, i.e.
``unit = [cos(az) sin(el), sin(az) sin(el), cos(el)]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


def _wrap(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = -((-angle + np.pi) % (2 * np.pi) - np.pi)
    return float(wrapped)


@dataclass(frozen=True)
class EulerAngles:
    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0

    def __post_init__(self):
        for name in ("yaw", "pitch", "roll"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} angle must be finite, got {value}")
            object.__setattr__(self, name, _wrap(value))

    @classmethod
    def from_array(cls, values) -> "EulerAngles":
        yaw, pitch, roll = np.asarray(values, dtype=float).reshape(3)
        return cls(yaw, pitch, roll)

    def as_array(self) -> np.ndarray:
        return np.array([self.yaw, self.pitch, self.roll])


@dataclass(frozen=True, eq=False)
class Pose:
    position: np.ndarray
    angles: EulerAngles = field(default_factory=EulerAngles)

    def __post_init__(self):
        position = np.asarray(self.position, dtype=float).reshape(3)
        if not np.all(np.isfinite(position)):
            raise ValueError("pose position must be finite")
        object.__setattr__(self, "position", position)
        if not isinstance(self.angles, EulerAngles):
            object.__setattr__(self, "angles", EulerAngles.from_array(self.angles))


@dataclass(frozen=True, eq=False)
class Direction:
    distance: float
    unit: np.ndarray
    azimuth: float
    elevation: float


@dataclass(frozen=True, eq=False)
class ArrayLayout:
    """Element offsets in the local frame of an array, one row per element.

    ``side_length`` is set for square layouts only.
    """

    offsets: np.ndarray
    spacing: float
    side_length: float | None = None

    def __post_init__(self):
        offsets = np.asarray(self.offsets, dtype=float).reshape(-1, 3)
        if len(offsets) == 0:
            raise ValueError("layout needs at least one element")
        object.__setattr__(self, "offsets", offsets)

    @property
    def count(self) -> int:
        return len(self.offsets)

    @property
    def aperture(self) -> float:
        """Largest distance between two elements."""
        extent = self.offsets.max(axis=0) - self.offsets.min(axis=0)
        return float(np.linalg.norm(extent))


def _centered(count: int, spacing: float) -> np.ndarray:
    return (np.arange(count) - (count - 1) / 2.0) * spacing


def grid_layout(rows: int, cols: int, spacing: float) -> ArrayLayout:
    """Centered ``rows x cols`` grid in the local x-y plane (cols along x)."""
    if rows < 1 or cols < 1:
        raise ValueError("grid needs at least one row and one column")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    x, y = np.meshgrid(_centered(cols, spacing), _centered(rows, spacing))
    offsets = np.column_stack([x.ravel(), y.ravel(), np.zeros(x.size)])
    return ArrayLayout(offsets, spacing)


def square_layout(side_length: float, spacing: float) -> ArrayLayout:
    """Square surface of side ``side_length`` with ``round(L / spacing)`` elements per side."""
    if side_length <= 0 or spacing <= 0:
        raise ValueError("side length and spacing must be positive")
    per_side = max(1, int(round(side_length / spacing)))
    layout = grid_layout(per_side, per_side, spacing)
    return ArrayLayout(layout.offsets, spacing, side_length)


def planar_array_layout(count: int, spacing: float) -> ArrayLayout:
    """Near-square planar array with ``count`` antennas.

    Rows are the largest divisor of ``count`` not above its square root, so
    powers of two give nested grids (4x8 contains 4x4, 8x8 contains 4x8).
    """
    if count < 1:
        raise ValueError("antenna count must be >= 1")
    rows = max(d for d in range(1, int(np.sqrt(count)) + 1) if count % d == 0)
    return grid_layout(rows, count // rows, spacing)


def linear_layout(count: int, spacing: float, axis: int = 0) -> ArrayLayout:
    if count < 1:
        raise ValueError("antenna count must be >= 1")
    offsets = np.zeros((count, 3))
    offsets[:, axis] = _centered(count, spacing)
    return ArrayLayout(offsets, spacing)


def _rz(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _ry(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rx(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _drz(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[-s, -c, 0.0], [c, -s, 0.0], [0.0, 0.0, 0.0]])


def _dry(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[-s, 0.0, c], [0.0, 0.0, 0.0], [-c, 0.0, -s]])


def _drx(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[0.0, 0.0, 0.0], [0.0, -s, -c], [0.0, c, -s]])


def _as_angles(angles) -> EulerAngles:
    return angles if isinstance(angles, EulerAngles) else EulerAngles.from_array(angles)


def rotation_from_euler(angles) -> np.ndarray:
    a = _as_angles(angles)
    return _rz(a.yaw) @ _ry(a.pitch) @ _rx(a.roll)


def rotation_derivative(angles, axis_index: int) -> np.ndarray:
    """Partial derivative of the rotation matrix w.r.t. one Euler angle.

    ``axis_index`` is 1 for yaw (z), 2 for pitch (y) and 3 for roll (x).
    """
    a = _as_angles(angles)
    if axis_index == 1:
        return _drz(a.yaw) @ _ry(a.pitch) @ _rx(a.roll)
    if axis_index == 2:
        return _rz(a.yaw) @ _dry(a.pitch) @ _rx(a.roll)
    if axis_index == 3:
        return _rz(a.yaw) @ _ry(a.pitch) @ _drx(a.roll)
    raise ValueError(f"axis_index must be 1, 2 or 3, got {axis_index}")


def rotation_derivatives(angles) -> np.ndarray:
    """Stack of the three angle derivatives, shape (3, 3, 3)."""
    return np.stack([rotation_derivative(angles, i) for i in (1, 2, 3)])


def direction_between(p, q) -> Direction:
    """Distance, unit vector and spherical angles of the ray from ``p`` to ``q``."""
    delta = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    distance = float(np.linalg.norm(delta))
    if distance == 0.0:
        raise ValueError("degenerate direction: coincident points")
    unit = delta / distance
    azimuth = float(np.arctan2(unit[1], unit[0]))
    elevation = float(np.arccos(np.clip(unit[2], -1.0, 1.0)))
    return Direction(distance, unit, azimuth, elevation)


def fraunhofer_distance(aperture_diameter: float, wavelength: float) -> float:
    """Near/far-field boundary ``2 D^2 / lambda``."""
    if aperture_diameter <= 0 or wavelength <= 0:
        raise ValueError("aperture and wavelength must be positive")
    return 2.0 * aperture_diameter**2 / wavelength


def square_fraunhofer_distance(side_length: float, wavelength: float) -> float:
    """Fraunhofer distance of a square surface, using its diagonal as aperture."""
    if side_length <= 0:
        raise ValueError("side length must be positive")
    return fraunhofer_distance(side_length * np.sqrt(2.0), wavelength)


def element_positions(layout: ArrayLayout, pose: Pose) -> np.ndarray:
    """Global element positions ``p + Q s`` (one row per element)."""
    rotation = rotation_from_euler(pose.angles)
    return pose.position + layout.offsets @ rotation.T
