"""Hamiltonian assembly, spectral decomposition and unitary time evolution.

Time is measured in oscillator-1 periods, so the propagator over an interval
tau is exp(-2*pi*i*H*tau).  Propagation happens in the eigenbasis (transform
once, apply phases, transform back); the repeated short-step operator of a
step-by-step integration is kept as a verification mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import flat_index, free_energy_diag
from .config import EngineConfig
from .coupling import InteractionMatrix

TWO_PI = 2.0 * np.pi


def assemble_hamiltonian(config: EngineConfig, phi: InteractionMatrix) -> np.ndarray:
    """H = diag of free energies + interaction matrix, over the flat basis."""
    if phi.trunc != config.truncation:
        raise ValueError(
            f"interaction matrix truncation {phi.trunc} does not match config {config.truncation}"
        )
    h = phi.values.copy()
    diag = free_energy_diag(config.truncation, config.omega)
    h[np.diag_indices_from(h)] += diag
    return h


@dataclass(frozen=True)
class SpectralHamiltonian:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns) of H."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def spectral_decompose(h: np.ndarray) -> SpectralHamiltonian:
    """Full symmetric eigendecomposition; the one expensive linear-algebra step."""
    try:
        evals, evecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        scale = float(np.abs(h).max())
        raise RuntimeError(
            f"eigensolver failed on {h.shape[0]}x{h.shape[0]} matrix "
            f"(max |entry| = {scale:.3e}): {exc}"
        ) from exc
    return SpectralHamiltonian(evals, evecs)


def ground_state(config: EngineConfig) -> np.ndarray:
    """|0,0> as a complex amplitude vector over the flat basis."""
    psi = np.zeros(config.truncation.total_dim, dtype=complex)
    psi[flat_index(0, 0, config.truncation)] = 1.0
    return psi


def propagate(spec: SpectralHamiltonian, psi0: np.ndarray, tau: float) -> np.ndarray:
    """psi(tau) = V exp(-2*pi*i*E*tau) V^T psi0; exact at any tau."""
    coeff = spec.eigenvectors.T @ psi0
    coeff = coeff * np.exp(-1j * TWO_PI * spec.eigenvalues * tau)
    return spec.eigenvectors @ coeff


def _real_matmul(mat: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """mat @ cols for real mat and complex cols via two real GEMMs.

    Copies the strided real/imag views into contiguous buffers; matmul on a
    strided view falls off the BLAS fast path and is ~100x slower.
    """
    real = mat @ np.ascontiguousarray(cols.real)
    imag = mat @ np.ascontiguousarray(cols.imag)
    return real + 1j * imag


def evolve_on_grid(spec: SpectralHamiltonian, psi0: np.ndarray, taus: np.ndarray) -> np.ndarray:
    """States at every grid time as columns of a (total_dim, len(taus)) array."""
    coeff = spec.eigenvectors.T @ psi0
    phases = np.exp(-1j * TWO_PI * np.outer(spec.eigenvalues, taus))
    modes = coeff[:, None] * phases
    return _real_matmul(spec.eigenvectors, modes)


def step_operator(spec: SpectralHamiltonian, dtau: float) -> np.ndarray:
    """Dense U(dtau) for repeated application, as in a step-by-step integration."""
    if not dtau > 0:
        raise ValueError(f"dtau must be > 0, got {dtau}")
    phases = np.exp(-1j * TWO_PI * spec.eigenvalues * dtau)
    return (spec.eigenvectors * phases) @ spec.eigenvectors.T


def tau_grid(config: EngineConfig) -> np.ndarray:
    """The output grid {0, dtau, ..., tau_end}."""
    n_steps = int(round(config.tau_end / config.dtau))
    return np.arange(n_steps + 1) * config.dtau


@dataclass(frozen=True)
class EnergyRecord:
    """Observables at one grid time, including post-measurement averages."""

    tau: float
    e_total: float
    e_free: float
    e_int: float
    e_int_post: float
    e_total_post: float
    p00: float
    tracked_probs: tuple[float, ...]


def energy_series(
    config: EngineConfig,
    phi: InteractionMatrix,
    spec: SpectralHamiltonian,
    psi0: np.ndarray | None = None,
    tracked: tuple[tuple[int, int], ...] | None = None,
) -> list[EnergyRecord]:
    """Energies, post-measurement averages and occupations over the time grid.

    e_int_post is the interaction energy averaged over projective-measurement
    outcomes, sum_jk P_jk <j,k|Phi|j,k>; the free part is unchanged by the
    projection, so e_total_post = e_free + e_int_post.
    """
    if psi0 is None:
        psi0 = ground_state(config)
    if tracked is None:
        tracked = config.tracked_or_default()
    trunc = config.truncation
    taus = tau_grid(config)
    states = evolve_on_grid(spec, psi0, taus)
    probs = states.real**2 + states.imag**2

    h0_diag = free_energy_diag(trunc, config.omega)
    phi_diag = phi.diagonal
    e_free = h0_diag @ probs
    phi_states = _real_matmul(phi.values, states)
    e_int = np.einsum("at,at->t", states.conj(), phi_states).real
    e_int_post = phi_diag @ probs
    p00 = probs[flat_index(0, 0, trunc)]
    tracked_rows = probs[[flat_index(j, k, trunc) for j, k in tracked], :]

    records = []
    for i, tau in enumerate(taus):
        records.append(
            EnergyRecord(
                tau=float(tau),
                e_total=float(e_free[i] + e_int[i]),
                e_free=float(e_free[i]),
                e_int=float(e_int[i]),
                e_int_post=float(e_int_post[i]),
                e_total_post=float(e_free[i] + e_int_post[i]),
                p00=float(p00[i]),
                tracked_probs=tuple(float(x) for x in tracked_rows[:, i]),
            )
        )
    return records


def energy_series_header(tracked: tuple[tuple[int, int], ...]) -> str:
    cols = ["tau", "e_total", "e_free", "e_int", "e_int_post", "e_total_post", "p00"]
    cols += [f"p_{j}_{k}" for j, k in tracked]
    return ",".join(cols)


def write_energy_series_csv(
    path, records: list[EnergyRecord], tracked: tuple[tuple[int, int], ...]
) -> None:
    """Time-series CSV, one row per grid point, 15 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(energy_series_header(tracked) + "\n")
        for rec in records:
            row = [
                rec.tau, rec.e_total, rec.e_free, rec.e_int,
                rec.e_int_post, rec.e_total_post, rec.p00, *rec.tracked_probs,
            ]
            fh.write(",".join(f"{x:.15g}" for x in row) + "\n")


def min_p00_tau(records: list[EnergyRecord]) -> float:
    """Grid time at which the ground-state occupation is lowest."""
    best = min(records, key=lambda rec: rec.p00)
    return best.tau


def truncation_diagnostic(
    config: EngineConfig, shrink: int = 10, warn_above: float = 1e-4
) -> dict:
    """Convergence guard: rerun at n_max - shrink and compare p00 over the grid.

    Returns {n_max, n_max_ref, max_dp00}; warns when the difference exceeds
    warn_above.  Intended for small-to-moderate truncations; reruns assembly
    and the eigensolve at both sizes.
    """
    import warnings
    from dataclasses import replace

    from .basis import ModeTruncation
    from .coupling import assemble_matrix

    n_ref = config.truncation.n_max - shrink
    if n_ref < 1:
        raise ValueError(f"shrunk truncation must keep n_max >= 1, got {n_ref}")
    small = replace(config, truncation=ModeTruncation(n_ref))

    def p00_curve(cfg: EngineConfig) -> np.ndarray:
        phi = assemble_matrix(cfg)
        spec = spectral_decompose(assemble_hamiltonian(cfg, phi))
        recs = energy_series(cfg, phi, spec, tracked=())
        return np.array([rec.p00 for rec in recs])

    max_dp00 = float(np.max(np.abs(p00_curve(config) - p00_curve(small))))
    if max_dp00 > warn_above:
        warnings.warn(
            f"truncation check: max |dp00| = {max_dp00:.3e} between n_max={config.truncation.n_max} "
            f"and n_max={n_ref}; results may not be converged",
            stacklevel=2,
        )
    return {"n_max": config.truncation.n_max, "n_max_ref": n_ref, "max_dp00": max_dp00}
