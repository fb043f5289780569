"""Received-signal model for one transmitter, M on-body RIS sensors and an N_U-antenna receiver.

The noise-free sample on antenna ``u``, subcarrier ``n`` and OFDM symbol ``t``
is ``mu[t, u, n] = h[t, u] * x[n]`` where ``h[t, u]`` is the LOS response plus
the RIS responses weighted by the fast-varying code ``gamma[t, m]``. Delays
enter through the carrier phase only, so ``h`` does not depend on ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    SPEED_OF_LIGHT,
    ArrayLayout,
    Direction,
    Pose,
    direction_between,
    element_positions,
    fraunhofer_distance,
    rotation_from_euler,
    square_fraunhofer_distance,
)

REGIMES = ("near", "far")


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class OfdmNumerology:
    carrier_hz: float
    subcarriers: int = 256
    subcarrier_spacing_hz: float = 120e3
    symbols: int = 16
    noise_psd_w_per_hz: float = dbm_to_watts(-174.0)
    tx_power_w: float = dbm_to_watts(23.0)

    def __post_init__(self):
        if self.carrier_hz <= 0 or self.subcarrier_spacing_hz <= 0:
            raise ValueError("carrier and subcarrier spacing must be positive")
        if self.subcarriers < 1 or self.symbols < 1:
            raise ValueError("need at least one subcarrier and one symbol")
        if self.noise_psd_w_per_hz <= 0 or self.tx_power_w <= 0:
            raise ValueError("noise PSD and transmit power must be positive")

    @classmethod
    def from_wavelength(cls, wavelength: float, **kwargs) -> "OfdmNumerology":
        return cls(SPEED_OF_LIGHT / wavelength, **kwargs)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def noise_variance(self) -> float:
        """Noise power per subcarrier sample, ``N0 * delta_f``."""
        return self.noise_psd_w_per_hz * self.subcarrier_spacing_hz

    @property
    def pilot_amplitude(self) -> float:
        return float(np.sqrt(self.tx_power_w / self.subcarriers))

    def pilots(self) -> np.ndarray:
        return np.full(self.subcarriers, self.pilot_amplitude, dtype=complex)


@dataclass(frozen=True, eq=False)
class RisSensor:
    layout: ArrayLayout
    pose: Pose
    profile: np.ndarray
    gain: complex

    def __post_init__(self):
        profile = np.asarray(self.profile, dtype=complex).ravel()
        if len(profile) != self.layout.count:
            raise ValueError(
                f"profile has {len(profile)} entries, layout has {self.layout.count} elements"
            )
        if not np.allclose(np.abs(profile), 1.0, atol=1e-12):
            raise ValueError("reflection coefficients must have unit modulus")
        object.__setattr__(self, "profile", profile)
        object.__setattr__(self, "gain", complex(self.gain))

    def element_positions(self) -> np.ndarray:
        return element_positions(self.layout, self.pose)

    def fraunhofer_distance(self, wavelength: float) -> float:
        if self.layout.side_length is not None:
            return square_fraunhofer_distance(self.layout.side_length, wavelength)
        if self.layout.aperture == 0.0:
            return 0.0
        return fraunhofer_distance(self.layout.aperture, wavelength)


@dataclass(frozen=True, eq=False)
class Receiver:
    position: np.ndarray
    layout: ArrayLayout

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))

    @property
    def antennas(self) -> int:
        return self.layout.count

    def antenna_positions(self) -> np.ndarray:
        # receiver axes are aligned with the global frame
        return self.position + self.layout.offsets


@dataclass(frozen=True)
class NearFieldCheck:
    sensor: int
    fraunhofer_m: float
    receiver_distance_m: float

    @property
    def receiver_in_near_field(self) -> bool:
        return self.receiver_distance_m < self.fraunhofer_m


@dataclass(frozen=True, eq=False)
class SignalModel:
    numerology: OfdmNumerology
    transmitter: np.ndarray
    receiver: Receiver
    sensors: tuple
    los_gain: complex
    regime: str = "near"
    near_field_checks: tuple = field(init=False)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        object.__setattr__(self, "transmitter", np.asarray(self.transmitter, dtype=float).reshape(3))
        object.__setattr__(self, "sensors", tuple(self.sensors))
        object.__setattr__(self, "los_gain", complex(self.los_gain))
        lam = self.numerology.wavelength
        checks = tuple(
            NearFieldCheck(
                m + 1,
                s.fraunhofer_distance(lam),
                float(np.linalg.norm(self.receiver.position - s.pose.position)),
            )
            for m, s in enumerate(self.sensors)
        )
        object.__setattr__(self, "near_field_checks", checks)

    @property
    def num_sensors(self) -> int:
        return len(self.sensors)

    @property
    def wavenumber(self) -> float:
        return 2 * np.pi / self.numerology.wavelength


def _require_regime(model: SignalModel, regime: str):
    if model.regime != regime:
        raise ValueError(f"expected a {regime}-field model, got {model.regime!r}")


def near_field_steering(source, positions, wavelength: float) -> np.ndarray:
    """Spherical-wavefront response ``exp(-j 2 pi d_r / lambda)`` from ``source`` to each position."""
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    distances = np.linalg.norm(positions - np.asarray(source, dtype=float), axis=-1)
    if np.any(distances == 0.0):
        raise ValueError("source coincides with an element position")
    return np.exp(-2j * np.pi * distances / wavelength)


def split_distance(baseline, offsets):
    """Return ``(|b|, |b + s| - |b|)`` for a baseline ``b`` and small offsets ``s``.

    The excess is computed without cancellation, which keeps carrier phases of
    long paths accurate to well below a nanoradian.
    """
    baseline = np.asarray(baseline, dtype=float)
    ref = float(np.linalg.norm(baseline))
    full = np.linalg.norm(baseline + offsets, axis=-1)
    excess = (2.0 * (offsets @ baseline) + np.sum(offsets * offsets, axis=-1)) / (full + ref)
    return ref, excess


def far_field_steering(direction, offsets, wavelength: float) -> np.ndarray:
    """Plane-wave response ``exp(-j 2 pi / lambda * unit . s_r)``.

    ``direction`` is a :class:`Direction` or a unit vector.
    """
    unit = direction.unit if isinstance(direction, Direction) else np.asarray(direction, dtype=float)
    offsets = np.atleast_2d(np.asarray(offsets, dtype=float))
    return np.exp(-2j * np.pi / wavelength * (offsets @ unit))


def pathloss_gain(d1, d2, wavelength, gain_tx, gain_rx, q0) -> float:
    """Amplitude gain of a reflected path with exponent ``q0 + 1`` on both hops.

    ``gain_tx`` and ``gain_rx`` are linear antenna gains.
    """
    if np.any(np.asarray(d1) <= 0) or np.any(np.asarray(d2) <= 0):
        raise ValueError("distances must be positive")
    return (
        wavelength**2 * np.sqrt(gain_tx) * np.sqrt(gain_rx)
        / (32 * np.pi * d1 ** (q0 + 1) * d2 ** (q0 + 1))
    )


def los_pathloss_gain(distance, wavelength, gain_tx, gain_rx, q0) -> float:
    if np.any(np.asarray(distance) <= 0):
        raise ValueError("distances must be positive")
    return wavelength**2 * np.sqrt(gain_tx) * np.sqrt(gain_rx) / (32 * np.pi * distance ** (q0 + 1))


# -- per-path responses (pilot and fast-varying code excluded) --------------

def los_response(model: SignalModel) -> np.ndarray:
    """LOS contribution per receive antenna, shape (N_U,)."""
    lam = model.numerology.wavelength
    if model.regime == "near":
        return model.los_gain * near_field_steering(
            model.transmitter, model.receiver.antenna_positions(), lam
        )
    direction = direction_between(model.transmitter, model.receiver.position)
    a_ub = far_field_steering(direction, model.receiver.layout.offsets, lam)
    return model.los_gain * a_ub * np.exp(-2j * np.pi * direction.distance / lam)


def ris_response(model: SignalModel, index: int) -> np.ndarray:
    """Contribution of sensor ``index`` (0-based) per receive antenna, shape (N_U,)."""
    sensor = model.sensors[index]
    lam = model.numerology.wavelength
    if model.regime == "near":
        offsets = sensor.layout.offsets @ rotation_from_euler(sensor.pose.angles).T
        k = 2 * np.pi / lam
        ref_in, excess_in = split_distance(sensor.pose.position - model.transmitter, offsets)
        lever = offsets[None, :, :] - model.receiver.layout.offsets[:, None, :]
        ref_out, excess_out = split_distance(sensor.pose.position - model.receiver.position, lever)
        incident = np.exp(-1j * k * excess_in)
        outgoing = np.exp(-1j * k * excess_out)
        return (
            sensor.gain
            * np.exp(-1j * k * (ref_in + ref_out))
            * (outgoing @ (sensor.profile * incident))
        )
    to_sensor = direction_between(model.transmitter, sensor.pose.position)
    to_receiver = direction_between(sensor.pose.position, model.receiver.position)
    offsets = sensor.layout.offsets @ rotation_from_euler(sensor.pose.angles).T
    a_ur = far_field_steering(to_receiver, model.receiver.layout.offsets, lam)
    a_ru = far_field_steering(to_receiver, offsets, lam)
    a_rb = far_field_steering(to_sensor, offsets, lam)
    centroid_phase = np.exp(-2j * np.pi * (to_sensor.distance + to_receiver.distance) / lam)
    return sensor.gain * a_ur * (a_ru.conj() @ (sensor.profile * a_rb)) * centroid_phase


def path_responses(model: SignalModel) -> np.ndarray:
    """Rows: LOS, then one row per sensor. Shape (M + 1, N_U)."""
    rows = [los_response(model)] + [ris_response(model, m) for m in range(model.num_sensors)]
    return np.vstack(rows)


def _check_code(model: SignalModel, codes) -> np.ndarray:
    codes = np.asarray(codes, dtype=complex)
    if model.num_sensors == 0:
        return np.zeros((model.numerology.symbols, 0), dtype=complex)
    codes = codes.reshape(-1, model.num_sensors)
    if codes.shape[0] != model.numerology.symbols:
        raise ValueError(
            f"code has {codes.shape[0]} symbols, numerology expects {model.numerology.symbols}"
        )
    return codes


def channel_matrix(model: SignalModel, codes) -> np.ndarray:
    """``h[t, u]`` such that ``mu[t, u, n] = h[t, u] * x[n]``; shape (T, N_U)."""
    codes = _check_code(model, codes)
    paths = path_responses(model)
    return paths[0][None, :] + codes @ paths[1:]


def received_mean(model: SignalModel, codes) -> np.ndarray:
    """Full noise-free signal, shape (T, N_U, N)."""
    return channel_matrix(model, codes)[:, :, None] * model.numerology.pilots()[None, None, :]


def _check_index(name, value, upper):
    if not 0 <= value < upper:
        raise IndexError(f"{name}={value} out of range [0, {upper})")


def noise_free_signal(model: SignalModel, codes, t: int, u: int, n: int) -> complex:
    """Near-field noise-free sample for symbol ``t``, antenna ``u``, subcarrier ``n`` (0-based)."""
    _require_regime(model, "near")
    codes = _check_code(model, codes)
    _check_index("t", t, model.numerology.symbols)
    _check_index("u", u, model.receiver.antennas)
    _check_index("n", n, model.numerology.subcarriers)
    paths = path_responses(model)[:, u]
    h = paths[0] + codes[t] @ paths[1:]
    return complex(h * model.numerology.pilots()[n])


def far_field_signal(model: SignalModel, codes, t: int, n: int) -> np.ndarray:
    """Far-field noise-free samples on all antennas for symbol ``t``, subcarrier ``n``."""
    _require_regime(model, "far")
    codes = _check_code(model, codes)
    _check_index("t", t, model.numerology.symbols)
    _check_index("n", n, model.numerology.subcarriers)
    paths = path_responses(model)
    return (paths[0] + codes[t] @ paths[1:]) * model.numerology.pilots()[n]
