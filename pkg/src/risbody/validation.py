"""Oracle checks run by the ``validate`` subcommand.

Every check is isolated: an exception inside one check is reported as a
failure of that check's module rather than aborting the suite. Functions are
looked up through their modules at call time so that tests can inject faults.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import bounds, channel, codes, fim, geometry
from .config import ExperimentConfig
from .setup import build_model

FD_TOL = 1e-6
NULLITY_TOL = 1e-9
SEPARABILITY_TOL = 1e-9
SYMMETRY_TOL = 1e-10
REGIME_TOL = 1e-3
HOMOGENEITY_TOL = 1e-9
ROUTE_TOL = 1e-6


class Check(NamedTuple):
    module: str
    name: str
    tolerance: float
    observed: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} [{self.module}] {self.name}: observed {self.observed:.3e}, tolerance {self.tolerance:.1e}"
        return f"{text} ({self.detail})" if self.detail else text


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def lines(self) -> list:
        return [c.line() for c in self.checks]


def _run(module: str, name: str, tolerance: float, fn) -> Check:
    """``fn`` returns the observed residual; passing means ``observed < tolerance``."""
    try:
        observed = float(fn())
    except Exception as exc:  # reported, not raised
        return Check(module, name, tolerance, float("nan"), False, f"{type(exc).__name__}: {exc}")
    return Check(module, name, tolerance, observed, bool(observed < tolerance))


def _code(config: ExperimentConfig):
    return codes.dft_code_assignment(len(config.setup.sensors), config.setup.symbols)


# -- individual checks ------------------------------------------------------

def rotation_residual(samples: int = 1000, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for angles in rng.uniform(-np.pi, np.pi, (samples, 3)):
        q = geometry.rotation_from_euler(geometry.EulerAngles(*angles))
        worst = max(worst, np.max(np.abs(q.T @ q - np.eye(3))), abs(np.linalg.det(q) - 1.0))
    return worst


def rotation_derivative_error(samples: int = 100, seed: int = 1, step: float = 1e-6) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for angles in rng.uniform(-3.0, 3.0, (samples, 3)):
        base = geometry.EulerAngles(*angles)
        for axis in (1, 2, 3):
            shift = np.zeros(3)
            shift[axis - 1] = step
            plus = geometry.rotation_from_euler(geometry.EulerAngles(*(angles + shift)))
            minus = geometry.rotation_from_euler(geometry.EulerAngles(*(angles - shift)))
            fd = (plus - minus) / (2 * step)
            worst = max(worst, np.max(np.abs(geometry.rotation_derivative(base, axis) - fd)))
    return worst


def code_residual(config: ExperimentConfig) -> float:
    return codes.verify_code_constraints(_code(config)).max()


def regime_consistency(config: ExperimentConfig, n_u: int = 4, seed: int = 0) -> float:
    """Near/far per-sample relative mismatch with transmitter and receiver at 1000 d_f."""
    setup = config.setup
    side = max(config.l_r_m)
    anchor = np.asarray(setup.sensors[0].position)
    d_f = geometry.square_fraunhofer_distance(side, setup.wavelength_m)

    def pushed(point):
        offset = np.asarray(point) - anchor
        return tuple(anchor + offset / np.linalg.norm(offset) * 1000.0 * d_f)

    far_setup = replace(setup, transmitter=pushed(setup.transmitter), receiver=pushed(setup.receiver))
    code = _code(config)
    near = channel.channel_matrix(build_model(far_setup, n_u, side, seed, "near"), code)
    far = channel.channel_matrix(build_model(far_setup, n_u, side, seed, "far"), code)
    return float(np.max(np.abs(near - far) / np.abs(near)))


def derivative_error(config: ExperimentConfig, scenario: str, regime: str, seeds, n_u: int = 4) -> float:
    code = _code(config)
    worst = 0.0
    for seed in seeds:
        model = build_model(config.setup, n_u, min(config.l_r_m), seed, regime)
        analytic = fim.jacobian(model, code, scenario)
        reference = fim.fd_oracle(model, code, analytic.params)
        worst = max(worst, max(fim.relative_errors(analytic, reference).values()))
    return worst


def _fims(config: ExperimentConfig, seeds, n_u_values=(4, 8), regime="near"):
    code = _code(config)
    for scenario in fim.SCENARIOS:
        for n_u in n_u_values:
            for seed in seeds:
                model = build_model(config.setup, n_u, min(config.l_r_m), seed, regime)
                yield fim.fisher_information(model, code, scenario)


def separability_residual(config: ExperimentConfig, seeds) -> float:
    worst = 0.0
    for j in _fims(config, seeds):
        scale = np.max(np.abs(np.diag(j.matrix)))
        paths = j.params.paths
        for a in paths:
            for b in paths:
                if a < b:
                    block = j.block(j.params.path_labels(a), j.params.path_labels(b))
                    worst = max(worst, np.max(np.abs(block)) / scale)
    return worst


def symmetry_residual(config: ExperimentConfig, seeds) -> float:
    worst = 0.0
    for j in _fims(config, seeds):
        m = j.matrix
        worst = max(worst, np.max(np.abs(m - m.T)) / np.max(np.abs(m)))
    return worst


def psd_residual(config: ExperimentConfig, seeds) -> float:
    """Most negative eigenvalue relative to the largest (zero for PSD)."""
    worst = 0.0
    for j in _fims(config, seeds):
        w = np.linalg.eigvalsh(j.matrix)
        worst = max(worst, -w[0] / w[-1])
    return worst


def gain_symmetry_residual(config: ExperimentConfig, seeds, los_only: bool = False) -> float:
    """``|J_bR,bR - J_bI,bI|`` or ``|J_bR,bI|`` relative to ``J_bR,bR`` per path."""
    worst = 0.0
    for j in _fims(config, seeds):
        paths = [p for p in j.params.paths if p == 0 or not los_only]
        for p in paths:
            re, im = f"beta_re[{p}]", f"beta_im[{p}]"
            if re not in j.params.labels:
                continue
            scale = j.entry(re, re)
            if los_only:
                worst = max(worst, abs(j.entry(re, im)) / scale)
            else:
                worst = max(worst, abs(scale - j.entry(im, im)) / scale)
    return worst


def far_nullity(config: ExperimentConfig, seeds) -> float:
    code = _code(config)
    worst = 0.0
    for side in config.l_r_m:
        for n_u in [n for n in config.n_u if n <= 32] or [1]:
            for seed in seeds:
                model = build_model(config.setup, n_u, side, seed, "far")
                j = fim.fisher_information(model, code, "rest")
                for sensor in range(1, model.num_sensors + 1):
                    worst = max(worst, bounds.sensor_efim(j, sensor).relative_norm)
    return worst


def single_antenna_nullity(config: ExperimentConfig, seeds) -> float:
    code = _code(config)
    worst = 0.0
    for side in config.l_r_m:
        for seed in seeds:
            model = build_model(config.setup, 1, side, seed, "near")
            j = fim.fisher_information(model, code, "rest")
            for sensor in range(1, model.num_sensors + 1):
                worst = max(worst, bounds.sensor_efim(j, sensor).relative_norm)
    return worst


def route_agreement(config: ExperimentConfig, seeds, n_u: int = 8) -> float:
    """Schur complement versus column projection, relative spectral difference."""
    code = _code(config)
    worst = 0.0
    for seed in seeds:
        model = build_model(config.setup, n_u, max(config.l_r_m), seed, "near")
        jac = fim.jacobian(model, code, "rest")
        j = fim.assemble_fim(jac, model.numerology.noise_variance)
        for sensor in range(1, model.num_sensors + 1):
            efim = bounds.sensor_efim(j, sensor)
            projected = fim.projected_efim(
                jac, model.numerology.noise_variance, efim.retained, efim.nuisance
            )
            worst = max(worst, np.linalg.norm(efim.matrix - projected, 2) / np.linalg.norm(projected, 2))
    return worst


def snr_homogeneity(config: ExperimentConfig, seed: int = 0) -> float:
    """Doubling N0 must scale every finite bound by sqrt(2)."""
    setup = config.setup
    doubled = replace(setup, n0_dbm_per_hz=setup.n0_dbm_per_hz + 10 * np.log10(2.0))
    code = _code(config)
    n_u, side = max(config.n_u), max(config.l_r_m)
    worst, compared = 0.0, 0
    for scenario in fim.SCENARIOS:
        base = bounds.evaluate_sensors(build_model(setup, n_u, side, seed), code, scenario, config.sensors)
        noisy = bounds.evaluate_sensors(build_model(doubled, n_u, side, seed), code, scenario, config.sensors)
        for a, b in zip(base, noisy):
            for name in ("oeb_rad", "peb_m"):
                x, y = getattr(a, name), getattr(b, name)
                if np.isfinite(x) and np.isfinite(y):
                    worst = max(worst, abs(y / x - np.sqrt(2.0)))
                    compared += 1
    if not compared:
        raise ValueError("no identifiable point to compare")
    return worst


def run_validation_suite(config: ExperimentConfig, seeds=None) -> ValidationReport:
    seeds = tuple(seeds if seeds is not None else config.seeds[:2])
    checks = [
        _run("geometry", "rotation orthonormality", 1e-12, rotation_residual),
        _run("geometry", "rotation derivative vs finite differences", FD_TOL, rotation_derivative_error),
        _run("ris-codes", "DFT code constraint residual", 1e-12, lambda: code_residual(config)),
        _run("channel", "near/far consistency at 1000 d_f", REGIME_TOL, lambda: regime_consistency(config)),
    ]
    for scenario in fim.SCENARIOS:
        for regime in channel.REGIMES:
            checks.append(_run(
                "fim", f"analytic vs finite-difference Jacobian ({scenario}, {regime})", FD_TOL,
                lambda s=scenario, r=regime: derivative_error(config, s, r, seeds),
            ))
    checks += [
        _run("fim", "cross-path block separability", SEPARABILITY_TOL, lambda: separability_residual(config, seeds)),
        _run("fim", "FIM symmetry", SYMMETRY_TOL, lambda: symmetry_residual(config, seeds)),
        _run("fim", "FIM positive semidefinite", SYMMETRY_TOL, lambda: psd_residual(config, seeds)),
        _run("fim", "J_beta_re = J_beta_im", NULLITY_TOL, lambda: gain_symmetry_residual(config, seeds)),
        _run("fim", "LOS beta_re/beta_im cross term", NULLITY_TOL,
             lambda: gain_symmetry_residual(config, seeds, los_only=True)),
        _run("bounds", "far-field orientation EFIM nullity", NULLITY_TOL, lambda: far_nullity(config, seeds)),
        _run("bounds", "single-antenna near-field EFIM nullity", NULLITY_TOL,
             lambda: single_antenna_nullity(config, seeds)),
        _run("bounds", "Schur complement vs projection", ROUTE_TOL, lambda: route_agreement(config, seeds)),
        _run("bounds", "bounds scale as 1/sqrt(SNR)", HOMOGENEITY_TOL, lambda: snr_homogeneity(config)),
    ]
    return ValidationReport(tuple(checks))
