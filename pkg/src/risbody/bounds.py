"""Effective FIMs, identifiability and position/orientation error bounds."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import fim as fim_mod
from .fim import ANGLES, GAINS, POSITION, FimMatrix

DEFAULT_TOL = 1e-9
# eigenvalues below this fraction of the pre-elimination block norm are roundoff
RESOLUTION = 1e-12


class SingularNuisanceError(np.linalg.LinAlgError):
    def __init__(self, smallest_eigenvalue: float):
        super().__init__(f"nuisance block singular (smallest eigenvalue {smallest_eigenvalue:.3e})")
        self.smallest_eigenvalue = smallest_eigenvalue


class NotIdentifiableError(ValueError):
    def __init__(self, lambda_min: float):
        super().__init__(f"parameters not identifiable (lambda_min = {lambda_min:.3e})")
        self.lambda_min = lambda_min


@dataclass(frozen=True, eq=False)
class Efim:
    matrix: np.ndarray
    retained: tuple
    nuisance: tuple = ()
    reference_norm: float | None = None

    def __post_init__(self):
        matrix = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        object.__setattr__(self, "matrix", 0.5 * (matrix + matrix.T))
        if self.retained and len(self.retained) != len(matrix):
            raise ValueError("retained labels do not match the matrix size")

    @property
    def relative_norm(self) -> float:
        """Spectral norm relative to the retained block before elimination."""
        norm = float(np.linalg.norm(self.matrix, 2))
        if not self.reference_norm:
            return norm
        return norm / self.reference_norm


class Verdict(NamedTuple):
    identifiable: bool
    lambda_min: float


def eigen_extremes(matrix) -> tuple:
    """``(lambda_max, lambda_min)`` of the symmetrized matrix."""
    matrix = np.asarray(matrix.matrix if isinstance(matrix, Efim) else matrix, dtype=float)
    w = np.linalg.eigvalsh(0.5 * (matrix + matrix.T))
    return float(w[-1]), float(w[0])


def schur_complement(fim: FimMatrix, retained, nuisance=None) -> Efim:
    """``J_AA - J_AB J_BB^-1 J_BA``; nuisance defaults to every non-retained label."""
    retained = tuple(retained)
    if nuisance is None:
        nuisance = tuple(label for label in fim.params.labels if label not in retained)
    nuisance = tuple(nuisance)
    a = fim.block(retained)
    reference = float(np.linalg.norm(a, 2))
    if not nuisance:
        return Efim(a, retained, nuisance, reference)
    b = fim.block(retained, nuisance)
    c = fim.block(nuisance)
    w = np.linalg.eigvalsh(c)
    if w[0] <= RESOLUTION * max(abs(w[-1]), np.finfo(float).tiny):
        raise SingularNuisanceError(float(w[0]))
    return Efim(a - b @ np.linalg.solve(c, b.T), retained, nuisance, reference)


def _unit_group(label: str) -> str:
    try:
        kind = fim_mod.parse_label(label)[0]
    except ValueError:
        return ""
    if kind in POSITION:
        return "m"
    if kind in ANGLES:
        return "rad"
    return kind


def unit_scaling(efim: Efim) -> np.ndarray:
    """Per-entry scale making each unit group's mean diagonal one.

    Entries sharing a unit (all positions, all angles) share one factor, so
    the result depends only on the physics and not on the choice of units.
    Unlabelled matrices form a single group.
    """
    diag = np.diag(efim.matrix)
    groups = [_unit_group(label) for label in efim.retained] or [""] * len(diag)
    scale = np.ones(len(diag))
    for group in set(groups):
        mask = np.array([g == group for g in groups])
        mean = float(np.mean(diag[mask]))
        if mean > 0:
            scale[mask] = 1.0 / np.sqrt(mean)
    return scale


def identifiability_verdict(efim: Efim, tol: float = DEFAULT_TOL) -> Verdict:
    """Positive definiteness: ``lambda_min > tol * lambda_max``.

    When the EFIM mixes units (metres and radians) the eigenvalue ratio is
    taken after :func:`unit_scaling`; for a single unit this is the plain
    ratio. An EFIM whose norm is below ``tol`` times the norm of the block it
    came from is pure roundoff and never identifiable. The returned
    ``lambda_min`` is that of the unscaled matrix.
    """
    lam_max, lam_min = eigen_extremes(efim)
    if lam_max <= 0:
        return Verdict(False, lam_min)
    if efim.reference_norm and lam_max <= tol * efim.reference_norm:
        return Verdict(False, lam_min)
    if np.any(np.diag(efim.matrix) <= 0):
        return Verdict(False, lam_min)
    scale = unit_scaling(efim)
    s_max, s_min = eigen_extremes(efim.matrix * np.outer(scale, scale))
    return Verdict(bool(s_min > tol * s_max), lam_min)


def _inverse(efim: Efim, tol: float) -> np.ndarray:
    verdict = identifiability_verdict(efim, tol)
    if not verdict.identifiable:
        raise NotIdentifiableError(verdict.lambda_min)
    return np.linalg.inv(efim.matrix)


def oeb_scenario1(efim: Efim, tol: float = DEFAULT_TOL) -> float:
    """Root-trace orientation bound in radians."""
    return float(np.sqrt(np.trace(_inverse(efim, tol))))


def peb_oeb_scenario2(efim: Efim, tol: float = DEFAULT_TOL) -> tuple:
    """Root-trace position (m) and orientation (rad) bounds from an EFIM ordered [p, angles]."""
    if efim.matrix.shape != (6, 6):
        raise ValueError("expected a 6x6 EFIM ordered [position, angles]")
    inverse = _inverse(efim, tol)
    return float(np.sqrt(np.trace(inverse[:3, :3]))), float(np.sqrt(np.trace(inverse[3:, 3:])))


@dataclass(frozen=True)
class BoundReport:
    scenario: str
    regime: str
    sensor: int
    n_u: int
    side_length_m: float
    carrier_hz: float
    seed: int | None
    identifiable: bool
    lambda_max: float
    lambda_min: float
    efim_ratio: float
    oeb_rad: float = float("inf")
    peb_m: float = float("inf")
    receiver_in_near_field: bool = True

    @property
    def oeb_trace(self) -> float:
        return self.oeb_rad**2

    @property
    def peb_trace(self) -> float:
        return self.peb_m**2


def sensor_efim(fim: FimMatrix, sensor: int) -> Efim:
    """EFIM of one sensor's geometric parameters, eliminating its gain."""
    geometric = fim.params.path_labels(sensor, POSITION + ANGLES)
    gains = fim.params.path_labels(sensor, GAINS)
    return schur_complement(fim, geometric, gains)


def _resolved(value: float, efim: Efim) -> float:
    floor = RESOLUTION * (efim.reference_norm or 0.0)
    return 0.0 if abs(value) <= floor else value


def report_from_fim(fim, model, scenario: str, sensor: int, seed=None, tol: float = DEFAULT_TOL) -> BoundReport:
    """Bound report for sensor ``sensor`` (1-based) from a precomputed FIM.

    For non-identifiable points, eigenvalues below the roundoff floor are
    reported as exactly zero.
    """
    efim = sensor_efim(fim, sensor)
    lam_max, lam_min = eigen_extremes(efim)
    verdict = identifiability_verdict(efim, tol)
    layout = model.sensors[sensor - 1].layout
    check = model.near_field_checks[sensor - 1]
    fields = dict(
        scenario=scenario,
        regime=model.regime,
        sensor=sensor,
        n_u=model.receiver.antennas,
        side_length_m=float(layout.side_length) if layout.side_length else float("nan"),
        carrier_hz=model.numerology.carrier_hz,
        seed=seed,
        identifiable=verdict.identifiable,
        lambda_max=_resolved(lam_max, efim),
        lambda_min=lam_min if verdict.identifiable else _resolved(lam_min, efim),
        efim_ratio=efim.relative_norm,
        receiver_in_near_field=check.receiver_in_near_field,
    )
    if verdict.identifiable:
        if scenario == "rest":
            fields["oeb_rad"] = oeb_scenario1(efim, tol)
        else:
            fields["peb_m"], fields["oeb_rad"] = peb_oeb_scenario2(efim, tol)
    return BoundReport(**fields)


def evaluate(model, codes, scenario: str, sensor: int = 1, seed=None, tol: float = DEFAULT_TOL) -> BoundReport:
    """Bounds for sensor ``sensor`` (1-based) of ``model``."""
    fim = fim_mod.fisher_information(model, codes, scenario)
    return report_from_fim(fim, model, scenario, sensor, seed, tol)


def evaluate_sensors(model, codes, scenario: str, sensors=(1,), seed=None, tol: float = DEFAULT_TOL) -> list:
    """One report per sensor, sharing a single FIM evaluation."""
    fim = fim_mod.fisher_information(model, codes, scenario)
    return [report_from_fim(fim, model, scenario, s, seed, tol) for s in sensors]
