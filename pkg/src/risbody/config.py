"""Experiment configuration files (TOML).

Every physical quantity carries its unit in the key name. See
``risbody/data/default.toml`` for the full schema with defaults.
"""
from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .channel import REGIMES
from .setup import SensorPlacement, SystemSetup


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ReferenceCurve:
    label: str
    quantity: str
    value: float


@dataclass(frozen=True)
class ExperimentConfig:
    setup: SystemSetup
    n_u: tuple
    l_r_m: tuple
    f_c_hz: tuple
    seeds: tuple
    regime: str = "near"
    sensors: tuple = (1,)
    identifiability_tol: float = 1e-9
    fraunhofer_f_c_hz: tuple = ()
    fraunhofer_l_r_m: tuple = ()
    reference_curves: tuple = ()
    sha256: str = field(default="", compare=False)

    def with_overrides(self, seed=None, regime=None) -> "ExperimentConfig":
        out = self
        if seed is not None:
            out = replace(out, seeds=(int(seed),))
        if regime is not None:
            if regime not in REGIMES:
                raise ConfigError(f"regime must be one of {REGIMES}")
            out = replace(out, regime=regime)
        return out

    @property
    def carriers(self) -> tuple:
        """Carrier frequencies for scenario sweeps; ``None`` means the numerology default."""
        return self.f_c_hz or (None,)


QUANTITIES = ("orientation_rad", "position_m")
FRAUNHOFER_F_C_HZ = (10e9, 30e9, 60e9, 100e9)
FRAUNHOFER_L_R_M = tuple(round(0.03 + 0.005 * i, 3) for i in range(11))


def _get(section: dict, key: str, default, kind=float):
    value = section.get(key, default)
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot interpret {value!r}") from exc


def _vector(section: dict, key: str, default) -> tuple:
    value = section.get(key, default)
    try:
        out = tuple(float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: expected three numbers, got {value!r}") from exc
    if len(out) != 3:
        raise ConfigError(f"{key}: expected three numbers, got {value!r}")
    return out


def _positive_list(values, key: str, kind=float) -> tuple:
    try:
        out = tuple(kind(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: invalid list {values!r}") from exc
    if any(v <= 0 for v in out):
        raise ConfigError(f"{key}: all entries must be positive")
    return out


def parse_config(data: dict, sha256: str = "") -> ExperimentConfig:
    defaults = SystemSetup()
    num = data.get("numerology", {})
    chan = data.get("channel", {})
    geo = data.get("geometry", {})
    sweep = data.get("sweep", {})
    fraun = data.get("fraunhofer", {})

    sensors = geo.get("sensors")
    if sensors is None:
        placements = defaults.sensors
    else:
        if not sensors:
            raise ConfigError("geometry.sensors: need at least one sensor")
        placements = tuple(
            SensorPlacement(_vector(s, "p_r_m", None), _vector(s, "phi_rad", (0.0, 0.0, 0.0)))
            for s in sensors
        )

    setup = SystemSetup(
        wavelength_m=_get(num, "wavelength_m", defaults.wavelength_m),
        subcarriers=_get(num, "subcarriers", defaults.subcarriers, int),
        subcarrier_spacing_hz=_get(num, "subcarrier_spacing_hz", defaults.subcarrier_spacing_hz),
        symbols=_get(num, "symbols", defaults.symbols, int),
        p_tx_dbm=_get(num, "p_tx_dbm", defaults.p_tx_dbm),
        n0_dbm_per_hz=_get(num, "n0_dbm_per_hz", defaults.n0_dbm_per_hz),
        element_spacing_m=_get(chan, "element_spacing_m", defaults.element_spacing_m),
        rx_spacing_m=_get(chan, "rx_spacing_m", defaults.rx_spacing_m),
        g_b_db=_get(chan, "g_b_db", defaults.g_b_db),
        g_u_db=_get(chan, "g_u_db", defaults.g_u_db),
        q0=_get(chan, "q0", defaults.q0),
        transmitter=_vector(geo, "p_b_m", defaults.transmitter),
        receiver=_vector(geo, "p_u_m", defaults.receiver),
        sensors=placements,
    )
    for name in ("wavelength_m", "subcarrier_spacing_hz", "element_spacing_m", "rx_spacing_m"):
        if getattr(setup, name) <= 0:
            raise ConfigError(f"{name} must be positive")
    if setup.subcarriers < 1 or setup.symbols < 1:
        raise ConfigError("subcarriers and symbols must be >= 1")
    points = [setup.transmitter, setup.receiver] + [s.position for s in placements]
    for i, p in enumerate(points):
        for q in points[i + 1:]:
            if p == q:
                raise ConfigError(f"coincident positions {p}: all distances must be positive")

    regime = sweep.get("regime", "near")
    if regime not in REGIMES:
        raise ConfigError(f"sweep.regime must be one of {REGIMES}")
    seeds = tuple(int(s) for s in sweep.get("seeds", range(11)))
    if not seeds:
        raise ConfigError("sweep.seeds must not be empty")
    report = tuple(int(s) for s in sweep.get("sensors", range(1, len(placements) + 1)))
    if any(not 1 <= s <= len(placements) for s in report):
        raise ConfigError(f"sweep.sensors must lie in 1..{len(placements)}")

    curves = []
    for entry in data.get("reference_curves", []):
        try:
            curve = ReferenceCurve(str(entry["label"]), str(entry["quantity"]), float(entry["value"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"reference_curves: malformed entry {entry!r}") from exc
        if curve.quantity not in QUANTITIES:
            raise ConfigError(f"reference_curves: quantity must be one of {QUANTITIES}")
        curves.append(curve)

    return ExperimentConfig(
        setup=setup,
        n_u=_positive_list(sweep.get("n_u", [1, 2, 4, 8, 16, 32, 64]), "sweep.n_u", int),
        l_r_m=_positive_list(sweep.get("l_r_m", [0.03, 0.05, 0.08]), "sweep.l_r_m"),
        f_c_hz=_positive_list(sweep.get("f_c_hz", []), "sweep.f_c_hz"),
        seeds=seeds,
        regime=regime,
        sensors=report,
        identifiability_tol=_get(sweep, "identifiability_tol", 1e-9),
        fraunhofer_f_c_hz=_positive_list(fraun.get("f_c_hz", FRAUNHOFER_F_C_HZ), "fraunhofer.f_c_hz"),
        fraunhofer_l_r_m=_positive_list(fraun.get("l_r_m", FRAUNHOFER_L_R_M), "fraunhofer.l_r_m"),
        reference_curves=tuple(curves),
        sha256=sha256,
    )


def loads(text: str) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    return parse_config(data, hashlib.sha256(text.encode()).hexdigest())


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)


def default_config_text() -> str:
    return resources.files("risbody").joinpath("data/default.toml").read_text()


def default_config() -> ExperimentConfig:
    return loads(default_config_text())
