"""Seeded parameter sweeps with deterministic CSV output and a run manifest."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import evaluate_sensors
from .codes import dft_code_assignment
from .config import ConfigError, ExperimentConfig
from .geometry import SPEED_OF_LIGHT, square_fraunhofer_distance
from .setup import build_model

FRAUNHOFER_COLUMNS = ("f_c_hz", "wavelength_m", "l_r_m", "aperture_m", "d_f_m")
_COMMON = (
    "experiment", "config_sha256", "scenario", "regime", "f_c_hz", "wavelength_m",
    "n_u", "l_r_m", "seed", "sensor", "identifiable",
)
_TAIL = ("lambda_max", "lambda_min", "efim_ratio", "d_f_m", "receiver_in_near_field")
SCENARIO1_COLUMNS = _COMMON + ("oeb_rad", "oeb_trace_rad2") + _TAIL
SCENARIO2_COLUMNS = _COMMON + ("peb_m", "peb_trace_m2", "oeb_rad", "oeb_trace_rad2") + _TAIL
REFERENCE_COLUMNS = ("label", "quantity", "value")


@dataclass(frozen=True)
class SweepResult:
    experiment: str
    columns: tuple
    rows: list
    config_sha256: str
    seeds: tuple
    wall_time_s: float = 0.0
    version: str = __version__
    extra: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        return [row[name] for row in self.rows]

    def to_csv(self) -> str:
        return format_csv(self.columns, self.rows)


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def format_csv(columns, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    return buffer.getvalue()


def run_fraunhofer_curve(config: ExperimentConfig) -> SweepResult:
    """Fraunhofer distance of square wrist-size surfaces for each carrier."""
    start = time.perf_counter()
    if not config.fraunhofer_f_c_hz or not config.fraunhofer_l_r_m:
        raise ConfigError("fraunhofer: f_c_hz and l_r_m must both be non-empty")
    rows = []
    for f_c in config.fraunhofer_f_c_hz:
        lam = SPEED_OF_LIGHT / f_c
        for l_r in sorted(config.fraunhofer_l_r_m):
            rows.append(dict(
                f_c_hz=f_c,
                wavelength_m=lam,
                l_r_m=l_r,
                aperture_m=l_r * np.sqrt(2.0),
                d_f_m=square_fraunhofer_distance(l_r, lam),
            ))
    return SweepResult(
        "fraunhofer", FRAUNHOFER_COLUMNS, rows, config.sha256, (),
        wall_time_s=time.perf_counter() - start,
    )


@dataclass(frozen=True)
class _Point:
    scenario: str
    regime: str
    f_c_hz: float | None
    n_u: int
    l_r_m: float
    seed: int


def sweep_points(config: ExperimentConfig, scenario: str) -> list:
    """Sweep points in deterministic config order."""
    return [
        _Point(scenario, config.regime, f_c, n_u, l_r, seed)
        for f_c in config.carriers
        for l_r in config.l_r_m
        for n_u in config.n_u
        for seed in config.seeds
    ]


def evaluate_point(config: ExperimentConfig, point: _Point) -> list:
    """Rows (one per reported sensor) for a single sweep point."""
    setup = config.setup
    codes = dft_code_assignment(len(setup.sensors), setup.symbols)
    model = build_model(setup, point.n_u, point.l_r_m, point.seed, point.regime, point.f_c_hz)
    reports = evaluate_sensors(
        model, codes, point.scenario, config.sensors, point.seed, config.identifiability_tol
    )
    lam = model.numerology.wavelength
    rows = []
    for report in reports:
        check = model.near_field_checks[report.sensor - 1]
        row = dict(
            scenario=report.scenario,
            regime=report.regime,
            f_c_hz=report.carrier_hz,
            wavelength_m=lam,
            n_u=report.n_u,
            l_r_m=point.l_r_m,
            seed=point.seed,
            sensor=report.sensor,
            identifiable=bool(report.identifiable),
            oeb_rad=report.oeb_rad,
            oeb_trace_rad2=report.oeb_trace,
            peb_m=report.peb_m,
            peb_trace_m2=report.peb_trace,
            lambda_max=report.lambda_max,
            lambda_min=report.lambda_min,
            efim_ratio=report.efim_ratio,
            d_f_m=check.fraunhofer_m,
            receiver_in_near_field=bool(report.receiver_in_near_field),
        )
        rows.append(row)
    return rows


def _evaluate_star(args):
    return evaluate_point(*args)


def _run_sweep(config: ExperimentConfig, scenario: str, experiment: str, columns, parallel: int) -> SweepResult:
    start = time.perf_counter()
    # fail fast on code and geometry preconditions before dispatching workers
    dft_code_assignment(len(config.setup.sensors), config.setup.symbols)
    points = sweep_points(config, scenario)
    jobs = [(config, p) for p in points]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            chunks = list(pool.map(_evaluate_star, jobs))
    else:
        chunks = [_evaluate_star(job) for job in jobs]
    rows = []
    for chunk in chunks:
        for row in chunk:
            row.update(experiment=experiment, config_sha256=config.sha256)
            rows.append(row)
    return SweepResult(
        experiment, columns, rows, config.sha256, config.seeds,
        wall_time_s=time.perf_counter() - start,
        extra=dict(regime=config.regime, parallel=parallel),
    )


def run_scenario1_sweep(config: ExperimentConfig, parallel: int = 1) -> SweepResult:
    """Orientation bounds with known positions, swept over carriers, sizes, antennas and seeds."""
    return _run_sweep(config, "rest", "scenario1", SCENARIO1_COLUMNS, parallel)


def run_scenario2_sweep(config: ExperimentConfig, parallel: int = 1) -> SweepResult:
    """Position and orientation bounds with both unknown."""
    return _run_sweep(config, "exercise", "scenario2", SCENARIO2_COLUMNS, parallel)


def reference_rows(config: ExperimentConfig) -> list:
    return [dict(label=c.label, quantity=c.quantity, value=c.value) for c in config.reference_curves]


def write_outputs(result: SweepResult, config: ExperimentConfig, out_dir) -> dict:
    """Write ``<experiment>.csv``, optional reference curves and ``<experiment>.manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    csv_path = out / f"{result.experiment}.csv"
    text = result.to_csv()
    csv_path.write_bytes(text.encode())
    files[csv_path.name] = hashlib.sha256(text.encode()).hexdigest()
    if config.reference_curves:
        ref_text = format_csv(REFERENCE_COLUMNS, reference_rows(config))
        ref_path = out / "reference_curves.csv"
        ref_path.write_bytes(ref_text.encode())
        files[ref_path.name] = hashlib.sha256(ref_text.encode()).hexdigest()
    manifest = dict(
        experiment=result.experiment,
        version=result.version,
        config_sha256=result.config_sha256,
        seeds=list(result.seeds),
        rows=len(result.rows),
        files=files,
        wall_time_s=result.wall_time_s,
        **result.extra,
    )
    manifest_path = out / f"{result.experiment}.manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def medians(result: SweepResult, value: str, by=("l_r_m", "n_u"), sensor: int = 1) -> dict:
    """Median of ``value`` over seeds, keyed by the ``by`` columns."""
    groups = {}
    for row in result.rows:
        if row["sensor"] != sensor:
            continue
        groups.setdefault(tuple(row[k] for k in by), []).append(row[value])
    return {key: float(np.median(vals)) for key, vals in groups.items()}
