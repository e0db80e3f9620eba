"""Shared fixtures: the two canonical full-size runs are expensive (one dense
2601x2601 eigensolve each), so they are built once per session."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from osc_engine.config import EngineConfig, canonical_config
from osc_engine.coupling import InteractionMatrix, assemble_matrix
from osc_engine.dynamics import (
    EnergyRecord,
    SpectralHamiltonian,
    assemble_hamiltonian,
    energy_series,
    spectral_decompose,
)


@dataclass(frozen=True)
class CanonicalRun:
    config: EngineConfig
    phi: InteractionMatrix
    hamiltonian: np.ndarray
    spectral: SpectralHamiltonian
    records: list[EnergyRecord]


def _build(geometry: str) -> CanonicalRun:
    config = canonical_config(geometry)
    phi = assemble_matrix(config)
    h = assemble_hamiltonian(config, phi)
    spectral = spectral_decompose(h)
    records = energy_series(config, phi, spectral)
    return CanonicalRun(config, phi, h, spectral, records)


@pytest.fixture(scope="session")
def canonical_parallel() -> CanonicalRun:
    return _build("parallel")


@pytest.fixture(scope="session")
def canonical_perpendicular() -> CanonicalRun:
    return _build("perpendicular")
