"""Indexing for the truncated two-mode Fock basis and uncoupled energies.

The composite basis |j,k> is flattened row-major (j outer, k inner) so that
oscillator-1 blocks are contiguous, matching the Kronecker structure used by
the coupling assembly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_N_MAX = 50


@dataclass(frozen=True)
class ModeTruncation:
    """Shared per-mode truncation: levels 0..n_max are kept for each oscillator."""

    n_max: int = DEFAULT_N_MAX

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return self.n_max + 1

    @property
    def total_dim(self) -> int:
        return self.dim * self.dim


@dataclass(frozen=True)
class CompositeIndex:
    """A basis state |j,k> together with its flat row index."""

    j: int
    k: int
    flat: int


def flat_index(j: int, k: int, trunc: ModeTruncation) -> int:
    """Flat row index of |j,k>; inverse of unflatten."""
    if not (0 <= j <= trunc.n_max and 0 <= k <= trunc.n_max):
        raise IndexError(f"level pair ({j},{k}) outside truncation n_max={trunc.n_max}")
    return j * trunc.dim + k


def unflatten(flat: int, trunc: ModeTruncation) -> tuple[int, int]:
    """Recover (j,k) from a flat index."""
    if not (0 <= flat < trunc.total_dim):
        raise IndexError(f"flat index {flat} outside basis of size {trunc.total_dim}")
    return divmod(flat, trunc.dim)


def composite_index(j: int, k: int, trunc: ModeTruncation) -> CompositeIndex:
    return CompositeIndex(j, k, flat_index(j, k, trunc))


def free_energy(j: int, k: int, omega: float) -> float:
    """Uncoupled energy (j + 1/2) + omega*(k + 1/2), in units of hbar*Omega_1."""
    return (j + 0.5) + omega * (k + 0.5)


def free_energy_diag(trunc: ModeTruncation, omega: float) -> np.ndarray:
    """Vector of free energies over the flat composite basis."""
    levels = np.arange(trunc.dim)
    e1 = levels + 0.5
    e2 = omega * (levels + 0.5)
    return (e1[:, None] + e2[None, :]).ravel()


def forbidden_mask(trunc: ModeTruncation, geometry: str) -> np.ndarray:
    """Boolean mask over the flat basis of states unreachable from |0,0>.

    The Gaussian coupling conserves total parity (parallel geometry) or each
    oscillator's parity separately (perpendicular geometry).
    """
    levels = np.arange(trunc.dim)
    odd = (levels % 2).astype(bool)
    if geometry == "parallel":
        return (odd[:, None] ^ odd[None, :]).ravel()
    if geometry == "perpendicular":
        return (odd[:, None] | odd[None, :]).ravel()
    raise ValueError(f"unknown geometry {geometry!r}")
