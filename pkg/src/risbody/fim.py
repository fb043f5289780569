"""Analytic signal derivatives, Fisher information assembly and a finite-difference oracle.

Two parameterizations are supported:

``rest``
    Sensor positions known. LOS gain (real, imaginary), then per sensor the
    three Euler angles and the gain (real, imaginary).
``exercise``
    Per sensor: position (3), Euler angles (3), gain (real, imaginary).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace

import numpy as np

from . import channel as ch
from .geometry import EulerAngles, Pose, direction_between, rotation_derivatives, rotation_from_euler

SCENARIOS = ("rest", "exercise")
POSITION = ("x", "y", "z")
ANGLES = ("yaw", "pitch", "roll")
GAINS = ("beta_re", "beta_im")
_LABEL = re.compile(r"^(\w+)\[(\d+)\]$")


@dataclass(frozen=True)
class ParamVector:
    scenario: str
    regime: str
    labels: tuple

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("parameter labels must be unique")

    def __len__(self):
        return len(self.labels)

    def index(self, labels) -> list:
        if isinstance(labels, str):
            labels = [labels]
        return [self.labels.index(label) for label in labels]

    def path_labels(self, path: int, kinds=None) -> list:
        """Labels of path ``path`` (0 = LOS), optionally restricted to some kinds."""
        out = []
        for label in self.labels:
            kind, index = parse_label(label)
            if index == path and (kinds is None or kind in kinds):
                out.append(label)
        return out

    @property
    def paths(self) -> list:
        return sorted({parse_label(label)[1] for label in self.labels})


def parse_label(label: str) -> tuple:
    match = _LABEL.match(label)
    if match is None:
        raise ValueError(f"malformed parameter label {label!r}")
    return match.group(1), int(match.group(2))


def param_vector(scenario: str, regime: str, num_sensors: int) -> ParamVector:
    if scenario not in SCENARIOS:
        raise ValueError(f"scenario must be one of {SCENARIOS}, got {scenario!r}")
    if regime not in ch.REGIMES:
        raise ValueError(f"regime must be one of {ch.REGIMES}, got {regime!r}")
    labels = []
    if scenario == "rest":
        labels += [f"{g}[0]" for g in GAINS]
    for m in range(1, num_sensors + 1):
        kinds = ANGLES + GAINS if scenario == "rest" else POSITION + ANGLES + GAINS
        labels += [f"{k}[{m}]" for k in kinds]
    return ParamVector(scenario, regime, tuple(labels))


@dataclass(frozen=True, eq=False)
class Jacobian:
    """Derivatives of the noise-free signal.

    ``channel[t, u, k]`` is the derivative of ``h[t, u]`` w.r.t. parameter
    ``k``; the full derivative of ``mu[t, u, n]`` is ``channel[t, u, k] * pilots[n]``.
    """

    channel: np.ndarray
    pilots: np.ndarray
    params: ParamVector

    def __post_init__(self):
        if self.channel.ndim != 3 or self.channel.shape[2] != len(self.params):
            raise ValueError(
                f"jacobian shape {self.channel.shape} does not match {len(self.params)} parameters"
            )

    def dense(self) -> np.ndarray:
        """Rows ordered by (t, u, n), one column per parameter."""
        full = self.channel[:, :, None, :] * self.pilots[None, None, :, None]
        return full.reshape(-1, len(self.params))

    def column(self, label: str) -> np.ndarray:
        return self.channel[:, :, self.params.index(label)[0]]


@dataclass(frozen=True, eq=False)
class FimMatrix:
    matrix: np.ndarray
    params: ParamVector

    def block(self, rows, cols=None) -> np.ndarray:
        cols = rows if cols is None else cols
        return self.matrix[np.ix_(self.params.index(rows), self.params.index(cols))]

    def entry(self, row: str, col: str) -> float:
        return float(self.block([row], [col])[0, 0])


# -- analytic derivatives -----------------------------------------------------

def _near_path_derivatives(model, sensor_index: int, with_position: bool) -> np.ndarray:
    """d h_m[u] / d [position?, angles, beta_re, beta_im], shape (N_U, 5 or 8)."""
    sensor = model.sensors[sensor_index]
    k = model.wavenumber
    elements = sensor.element_positions()
    antennas = model.receiver.antenna_positions()

    to_element = elements - model.transmitter
    d_in = np.linalg.norm(to_element, axis=1)
    grad_in = to_element / d_in[:, None]                      # d d_in / d p_r
    from_antenna = elements[None, :, :] - antennas[:, None, :]
    d_out = np.linalg.norm(from_antenna, axis=2)
    grad_out = from_antenna / d_out[:, :, None]               # d d_out / d p_r
    grad = grad_in[None, :, :] + grad_out                     # (N_U, N_R, 3)

    terms = np.exp(-1j * k * (d_in[None, :] + d_out)) * sensor.profile[None, :]
    scale = -1j * k * sensor.gain

    # element displacement per unit angle: dQ/dphi_i @ s_r
    levers = np.einsum("iab,rb->ira", rotation_derivatives(sensor.pose.angles), sensor.layout.offsets)
    d_angle = np.einsum("urk,irk->uri", grad, levers)
    columns = []
    if with_position:
        columns.append(scale * np.einsum("ur,urk->uk", terms, grad))
    columns.append(scale * np.einsum("ur,uri->ui", terms, d_angle))
    g = terms.sum(axis=1)
    columns.append(np.column_stack([g, 1j * g]))
    return np.hstack(columns)


def _far_path_derivatives(model, sensor_index: int, with_position: bool) -> np.ndarray:
    """Plane-wave counterpart of :func:`_near_path_derivatives`."""
    sensor = model.sensors[sensor_index]
    k = model.wavenumber
    p_r = sensor.pose.position
    incident = direction_between(model.transmitter, p_r)
    outgoing = direction_between(p_r, model.receiver.position)
    rotation = rotation_from_euler(sensor.pose.angles)
    s_r = sensor.layout.offsets @ rotation.T
    s_u = model.receiver.layout.offsets

    # phase path length per (antenna, element)
    path = (
        incident.distance
        + outgoing.distance
        + (s_u @ outgoing.unit)[:, None]
        - (s_r @ outgoing.unit)[None, :]
        + (s_r @ incident.unit)[None, :]
    )
    terms = np.exp(-1j * k * path) * sensor.profile[None, :]
    scale = -1j * k * sensor.gain

    levers = np.einsum("iab,rb->ira", rotation_derivatives(sensor.pose.angles), sensor.layout.offsets)
    d_angle = levers @ (incident.unit - outgoing.unit)        # (3, N_R)
    columns = []
    if with_position:
        proj_in = (np.eye(3) - np.outer(incident.unit, incident.unit)) / incident.distance
        proj_out = (np.eye(3) - np.outer(outgoing.unit, outgoing.unit)) / outgoing.distance
        lever = s_u[:, None, :] - s_r[None, :, :]
        d_pos = (
            (incident.unit - outgoing.unit)[None, None, :]
            - lever @ proj_out
            + (s_r @ proj_in)[None, :, :]
        )
        columns.append(scale * np.einsum("ur,urk->uk", terms, d_pos))
    columns.append(scale * terms @ d_angle.T)
    g = terms.sum(axis=1)
    columns.append(np.column_stack([g, 1j * g]))
    return np.hstack(columns)


def _los_derivatives(model) -> np.ndarray:
    unit = ch.los_response(replace(model, los_gain=1.0))
    return np.column_stack([unit, 1j * unit])


def _analytic(model, codes, params: ParamVector) -> Jacobian:
    if params.regime != model.regime:
        raise ValueError(f"parameter regime {params.regime!r} does not match model regime {model.regime!r}")
    codes = np.asarray(codes, dtype=complex).reshape(model.numerology.symbols, model.num_sensors)
    path_derivatives = _near_path_derivatives if model.regime == "near" else _far_path_derivatives
    with_position = params.scenario == "exercise"
    T, n_u = model.numerology.symbols, model.receiver.antennas
    out = np.zeros((T, n_u, len(params)), dtype=complex)
    for path in params.paths:
        cols = params.index(params.path_labels(path))
        if path == 0:
            out[:, :, cols] = _los_derivatives(model)[None, :, :]
        else:
            d = path_derivatives(model, path - 1, with_position)
            out[:, :, cols] = codes[:, path - 1][:, None, None] * d[None, :, :]
    return Jacobian(out, model.numerology.pilots(), params)


def derivatives_scenario1_near(model, codes, params: ParamVector | None = None) -> Jacobian:
    params = params or param_vector("rest", "near", model.num_sensors)
    if model.regime != "near":
        raise ValueError("regime mismatch: near-field derivatives need a near-field model")
    return _analytic(model, codes, params)


def derivatives_scenario1_far(model, codes, params: ParamVector | None = None) -> Jacobian:
    params = params or param_vector("rest", "far", model.num_sensors)
    if model.regime != "far":
        raise ValueError("regime mismatch: far-field derivatives need a far-field model")
    return _analytic(model, codes, params)


def derivatives_scenario2_near(model, codes, params: ParamVector | None = None) -> Jacobian:
    params = params or param_vector("exercise", "near", model.num_sensors)
    if model.regime != "near":
        raise ValueError("regime mismatch: near-field derivatives need a near-field model")
    return _analytic(model, codes, params)


def derivatives_scenario2_far(model, codes, params: ParamVector | None = None) -> Jacobian:
    params = params or param_vector("exercise", "far", model.num_sensors)
    if model.regime != "far":
        raise ValueError("regime mismatch: far-field derivatives need a far-field model")
    return _analytic(model, codes, params)


def jacobian(model, codes, scenario: str) -> Jacobian:
    """Analytic Jacobian for ``scenario`` in the model's own regime."""
    dispatch = {
        ("rest", "near"): derivatives_scenario1_near,
        ("rest", "far"): derivatives_scenario1_far,
        ("exercise", "near"): derivatives_scenario2_near,
        ("exercise", "far"): derivatives_scenario2_far,
    }
    return dispatch[scenario, model.regime](model, codes)


def assemble_fim(jac: Jacobian, noise_variance: float) -> FimMatrix:
    """``J = 2 / N0 * sum_{t,u,n} Re{d mu^H d mu}``.

    Pilots are factored out: the subcarrier sum contributes ``sum_n |x[n]|^2``.
    """
    if noise_variance <= 0:
        raise ValueError("noise variance must be positive")
    h = jac.channel.reshape(-1, jac.channel.shape[2])
    energy = float(np.sum(np.abs(jac.pilots) ** 2))
    gram = np.real(h.conj().T @ h)
    matrix = 2.0 / noise_variance * energy * 0.5 * (gram + gram.T)
    return FimMatrix(matrix, jac.params)


def fisher_information(model, codes, scenario: str) -> FimMatrix:
    return assemble_fim(jacobian(model, codes, scenario), model.numerology.noise_variance)


# -- finite-difference oracle -------------------------------------------------

DEFAULT_STEPS = {"position": 1e-6, "angle": 1e-6, "gain": 1e-6}


def perturb(model, label: str, delta: float):
    """Copy of ``model`` with parameter ``label`` shifted by ``delta``."""
    kind, path = parse_label(label)
    if path == 0:
        if kind == "beta_re":
            return replace(model, los_gain=model.los_gain + delta)
        if kind == "beta_im":
            return replace(model, los_gain=model.los_gain + 1j * delta)
        raise ValueError(f"LOS path has no parameter {kind!r}")
    sensors = list(model.sensors)
    sensor = sensors[path - 1]
    if kind in GAINS:
        shift = delta if kind == "beta_re" else 1j * delta
        sensor = replace(sensor, gain=sensor.gain + shift)
    elif kind in POSITION:
        position = sensor.pose.position.copy()
        position[POSITION.index(kind)] += delta
        sensor = replace(sensor, pose=Pose(position, sensor.pose.angles))
    elif kind in ANGLES:
        angles = sensor.pose.angles.as_array()
        angles[ANGLES.index(kind)] += delta
        sensor = replace(sensor, pose=Pose(sensor.pose.position, EulerAngles.from_array(angles)))
    else:
        raise ValueError(f"unknown parameter kind {kind!r}")
    sensors[path - 1] = sensor
    return replace(model, sensors=tuple(sensors))


def _step_for(model, label: str, steps: dict) -> float:
    kind, path = parse_label(label)
    if kind in POSITION:
        return steps["position"]
    if kind in ANGLES:
        return steps["angle"]
    gain = model.los_gain if path == 0 else model.sensors[path - 1].gain
    return steps["gain"] * max(abs(gain), 1e-300) if abs(gain) > 0 else steps["gain"]


def fd_oracle(model, codes, params: ParamVector, steps: dict | None = None) -> Jacobian:
    """Central-difference Jacobian of :func:`channel.channel_matrix`."""
    steps = {**DEFAULT_STEPS, **(steps or {})}
    if any(v <= 0 for v in steps.values()):
        raise ValueError("finite-difference steps must be positive")
    T, n_u = model.numerology.symbols, model.receiver.antennas
    out = np.zeros((T, n_u, len(params)), dtype=complex)
    for i, label in enumerate(params.labels):
        h = _step_for(model, label, steps)
        plus = ch.channel_matrix(perturb(model, label, h), codes)
        minus = ch.channel_matrix(perturb(model, label, -h), codes)
        out[:, :, i] = (plus - minus) / (2 * h)
    return Jacobian(out, model.numerology.pilots(), params)


def relative_errors(analytic: Jacobian, reference: Jacobian) -> dict:
    """Per-parameter ``max|a - r| / max|r|`` (absolute error when the reference column is zero)."""
    out = {}
    for i, label in enumerate(analytic.params.labels):
        a, r = analytic.channel[:, :, i], reference.channel[:, :, i]
        scale = np.max(np.abs(r))
        err = np.max(np.abs(a - r))
        out[label] = float(err / scale) if scale > 0 else float(err)
    return out


def projected_efim(jac: Jacobian, noise_variance: float, retained, nuisance) -> np.ndarray:
    """EFIM of ``retained`` computed by projecting out the ``nuisance`` columns.

    Mathematically equal to the Schur complement of :func:`assemble_fim`, but
    free of the cancellation that subtracting two nearly equal Gramians
    causes when the effective information is many orders below the raw one.
    """
    h = jac.channel.reshape(-1, jac.channel.shape[2])
    real = np.vstack([h.real, h.imag])
    a = real[:, jac.params.index(list(retained))]
    b = real[:, jac.params.index(list(nuisance))]
    if b.shape[1]:
        q, _ = np.linalg.qr(b)
        a = a - q @ (q.T @ a)
    energy = float(np.sum(np.abs(jac.pilots) ** 2))
    gram = a.T @ a
    return 2.0 / noise_variance * energy * 0.5 * (gram + gram.T)
