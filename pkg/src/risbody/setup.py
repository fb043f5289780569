"""Default system parameters and construction of seeded signal models."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import (
    OfdmNumerology,
    Receiver,
    RisSensor,
    SignalModel,
    db_to_linear,
    dbm_to_watts,
    los_pathloss_gain,
    pathloss_gain,
)
from .codes import random_phase_profile
from .geometry import SPEED_OF_LIGHT, EulerAngles, Pose, planar_array_layout, square_layout


@dataclass(frozen=True)
class SensorPlacement:
    position: tuple
    angles: tuple


DEFAULT_SENSORS = (
    SensorPlacement((2.0, 2.0, 4.0), (0.1, 0.2, 0.1)),
    SensorPlacement((2.0, 2.3, 4.0), (0.15, 0.12, 0.1)),
)


@dataclass(frozen=True)
class SystemSetup:
    """Everything needed to build a :class:`SignalModel` except the swept values."""

    wavelength_m: float = 3e-3
    subcarriers: int = 256
    subcarrier_spacing_hz: float = 120e3
    symbols: int = 16
    p_tx_dbm: float = 23.0
    n0_dbm_per_hz: float = -174.0
    element_spacing_m: float = 1.5e-3
    rx_spacing_m: float = 1.5e-3
    g_b_db: float = 20.0
    g_u_db: float = 20.0
    q0: float = 0.285
    transmitter: tuple = (0.0, 0.0, 4.0)
    receiver: tuple = (2.0, 3.0, 4.0)
    sensors: tuple = field(default=DEFAULT_SENSORS)

    def numerology(self, carrier_hz: float | None = None) -> OfdmNumerology:
        carrier = SPEED_OF_LIGHT / self.wavelength_m if carrier_hz is None else carrier_hz
        return OfdmNumerology(
            carrier_hz=carrier,
            subcarriers=self.subcarriers,
            subcarrier_spacing_hz=self.subcarrier_spacing_hz,
            symbols=self.symbols,
            noise_psd_w_per_hz=dbm_to_watts(self.n0_dbm_per_hz),
            tx_power_w=dbm_to_watts(self.p_tx_dbm),
        )


def build_model(
    setup: SystemSetup,
    n_u: int,
    side_length: float,
    seed: int,
    regime: str = "near",
    carrier_hz: float | None = None,
) -> SignalModel:
    """Signal model for one sweep point.

    Gain phases come from ``default_rng(seed)``; the phase profile of sensor
    ``m`` (1-based) from ``default_rng([seed, m])``. Gain magnitudes follow
    the pathloss model evaluated at the centroids.
    """
    numerology = setup.numerology(carrier_hz)
    lam = numerology.wavelength
    g_b, g_u = db_to_linear(setup.g_b_db), db_to_linear(setup.g_u_db)
    p_b = np.asarray(setup.transmitter, dtype=float)
    p_u = np.asarray(setup.receiver, dtype=float)
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2 * np.pi, len(setup.sensors) + 1)

    layout = square_layout(side_length, setup.element_spacing_m)
    sensors = []
    for m, placement in enumerate(setup.sensors, start=1):
        p_r = np.asarray(placement.position, dtype=float)
        magnitude = pathloss_gain(
            np.linalg.norm(p_r - p_b), np.linalg.norm(p_u - p_r), lam, g_b, g_u, setup.q0
        )
        profile = random_phase_profile([seed, m], layout.count)
        sensors.append(
            RisSensor(
                layout=layout,
                pose=Pose(p_r, EulerAngles.from_array(placement.angles)),
                profile=profile.coefficients,
                gain=magnitude * np.exp(1j * phases[m]),
            )
        )
    los_magnitude = los_pathloss_gain(np.linalg.norm(p_u - p_b), lam, g_b, g_u, setup.q0)
    receiver = Receiver(p_u, planar_array_layout(n_u, setup.rx_spacing_m))
    return SignalModel(
        numerology=numerology,
        transmitter=p_b,
        receiver=receiver,
        sensors=tuple(sensors),
        los_gain=los_magnitude * np.exp(1j * phases[0]),
        regime=regime,
    )
