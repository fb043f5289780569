"""RIS reflection codes.

The fast-varying part is a ``T x M`` complex matrix (one column per sensor,
one row per OFDM symbol). The slow-varying part is a per-element phase profile.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class CodeConstraintError(ValueError):
    pass


class CodeResiduals(NamedTuple):
    zero_sum: float
    unit_energy: float
    cross_correlation: float

    def max(self) -> float:
        return max(self)


def dft_code_assignment(num_sensors: int, num_symbols: int) -> np.ndarray:
    """Assign DFT columns 1..M (scaled by 1/sqrt(T)) to the M sensors.

    Column 0 (the constant column) is skipped because it does not sum to zero.
    """
    if num_sensors < 0:
        raise ValueError("number of sensors must be non-negative")
    if num_symbols <= num_sensors:
        raise CodeConstraintError(
            f"insufficient symbols for separability: T={num_symbols} must exceed M={num_sensors}"
        )
    t = np.arange(num_symbols)[:, None]
    m = np.arange(1, num_sensors + 1)[None, :]
    return np.exp(-2j * np.pi * m * t / num_symbols) / np.sqrt(num_symbols)


def verify_code_constraints(code) -> CodeResiduals:
    """Largest violation of each separability constraint over all columns."""
    code = np.atleast_2d(np.asarray(code, dtype=complex))
    if code.size == 0:
        return CodeResiduals(0.0, 0.0, 0.0)
    zero_sum = float(np.max(np.abs(code.sum(axis=0))))
    gram = code.conj().T @ code
    unit_energy = float(np.max(np.abs(np.real(np.diag(gram)) - 1.0)))
    off = gram - np.diag(np.diag(gram))
    cross = float(np.max(np.abs(off))) if code.shape[1] > 1 else 0.0
    return CodeResiduals(zero_sum, unit_energy, cross)


@dataclass(frozen=True, eq=False)
class SlowVaryingProfile:
    phases: np.ndarray

    @property
    def coefficients(self) -> np.ndarray:
        return np.exp(1j * self.phases)

    def __len__(self):
        return len(self.phases)


def random_phase_profile(seed, element_count: int) -> SlowVaryingProfile:
    """Phases drawn i.i.d. uniform on [0, 2 pi).

    ``seed`` is anything ``numpy.random.default_rng`` accepts, e.g. an int or a
    list of ints such as ``[seed, sensor_index]``.
    """
    if element_count < 1:
        raise ValueError("profile needs at least one element")
    rng = np.random.default_rng(seed)
    return SlowVaryingProfile(rng.uniform(0.0, 2 * np.pi, element_count))
