"""Measurement-fueled two-oscillator quantum engine simulator."""

from .basis import (
    CompositeIndex,
    ModeTruncation,
    composite_index,
    flat_index,
    forbidden_mask,
    free_energy,
    free_energy_diag,
    unflatten,
)
from .config import (
    CouplingSpec,
    EngineConfig,
    canonical_config,
    load_config,
    validate_config,
)
from .coupling import (
    InteractionMatrix,
    assemble_matrix,
    assemble_or_load,
    element_oracle_2d,
    element_parallel,
    element_perpendicular,
    matrix_cache_key,
    phi_gamma_gaussian,
    sigma_kernel,
    xi,
)
from .dynamics import (
    EnergyRecord,
    SpectralHamiltonian,
    assemble_hamiltonian,
    energy_series,
    ground_state,
    min_p00_tau,
    propagate,
    spectral_decompose,
    step_operator,
    tau_grid,
    truncation_diagnostic,
)
from .measurement import (
    CycleLedger,
    OutcomeDistribution,
    cycle_rng,
    outcome_distribution,
    post_measurement_energies,
    realspace_density,
    run_cycles,
    sample_outcome,
    summarize_cycles,
)
from .specfun import (
    QuadratureRule,
    gauss_hermite_rule,
    hermite_function,
    hermite_functions,
    hyp2f1_terminating,
    laguerre,
    log_factorial,
)

__version__ = "0.1.0"
