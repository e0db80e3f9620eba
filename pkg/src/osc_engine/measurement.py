"""Projective-measurement statistics, real-space densities and engine cycles.

A cycle is: couple at tau=0 from |0,0>, evolve to tau_measure, project onto a
product Fock state, decouple, extract the excitation energy.  Every cycle
restarts from |0,0>, so cycles are i.i.d.; each one draws from its own
counter-based Philox stream keyed by (seed, cycle index) so batches are
reproducible regardless of evaluation order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .basis import ModeTruncation, flat_index, free_energy, free_energy_diag, unflatten
from .config import EngineConfig
from .coupling import InteractionMatrix
from .dynamics import SpectralHamiltonian, ground_state, propagate
from .specfun import hermite_functions


@dataclass
class OutcomeDistribution:
    """Born probabilities P_jk = |Psi_jk|^2 over the composite basis."""

    probs: np.ndarray
    trunc: ModeTruncation

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (self.trunc.total_dim,):
            raise ValueError(
                f"probability vector has shape {self.probs.shape}, "
                f"expected ({self.trunc.total_dim},)"
            )
        self._cdf = None

    @property
    def cdf(self) -> np.ndarray:
        if self._cdf is None:
            self._cdf = np.cumsum(self.probs)
        return self._cdf


def outcome_distribution(psi: np.ndarray, trunc: ModeTruncation) -> OutcomeDistribution:
    """Measurement statistics of a normalized Fock-basis state."""
    probs = np.abs(np.asarray(psi)) ** 2
    total = probs.sum()
    if not math.isclose(total, 1.0, abs_tol=1e-8):
        raise ValueError(f"state is not normalized: sum of probabilities = {total}")
    return OutcomeDistribution(probs, trunc)


def cycle_rng(seed: int, cycle: int) -> np.random.Generator:
    """Counter-based per-cycle stream: Philox keyed by seed, counter by cycle."""
    return np.random.Generator(np.random.Philox(key=seed, counter=cycle << 192))


def sample_outcome(dist: OutcomeDistribution, rng: np.random.Generator) -> tuple[int, int]:
    """Draw one (j,k) outcome by inverse CDF over the flat probability vector."""
    cdf = dist.cdf
    total = cdf[-1]
    if not total > 0:
        raise ValueError("degenerate outcome distribution: probabilities sum to 0")
    flat = int(np.searchsorted(cdf, rng.random() * total, side="right"))
    flat = min(flat, dist.trunc.total_dim - 1)
    return unflatten(flat, dist.trunc)


def post_measurement_energies(
    dist: OutcomeDistribution, phi_diag: np.ndarray, omega: float
) -> tuple[float, float, float]:
    """(e_int_post, e_free_post, e_total_post) averaged over outcomes."""
    if phi_diag.shape != dist.probs.shape:
        raise ValueError("phi_diag and probability vector have different lengths")
    e_int = float(dist.probs @ phi_diag)
    e_free = float(dist.probs @ free_energy_diag(dist.trunc, omega))
    return e_int, e_free, e_int + e_free


def realspace_density(
    psi: np.ndarray, x1: np.ndarray, x2: np.ndarray, lam: float, trunc: ModeTruncation
) -> np.ndarray:
    """Two-oscillator position density on a tensor grid; rows follow x1.

    rho(x1,x2) = |sum_jk Psi_jk psi_j(x1) psi_k(x2/lambda)/sqrt(lambda)|^2.
    """
    psi_mat = np.asarray(psi).reshape(trunc.dim, trunc.dim)
    w1 = hermite_functions(trunc.n_max, np.asarray(x1, float))
    w2 = hermite_functions(trunc.n_max, np.asarray(x2, float) / lam) / math.sqrt(lam)
    amp = w1.T @ psi_mat @ w2
    return amp.real**2 + amp.imag**2


@dataclass(frozen=True)
class CycleLedger:
    """Energy bookkeeping of one engine cycle."""

    cycle: int
    tau_measure: float
    outcome: tuple[int, int]
    e_switch_on: float      # <0,0|Phi|0,0>, released when the coupling turns on
    e_decouple_cost: float  # |<j,k|Phi|j,k>| paid to switch the coupling off
    w_extract: float        # j + omega*k, excitation energy available as work
    e_measure_input: float  # post-measurement total minus pre-measurement <H>
    w_net: float            # w_extract + |e_switch_on| - e_decouple_cost


def run_cycles(
    config: EngineConfig,
    phi: InteractionMatrix,
    spec: SpectralHamiltonian,
    tau_measure: float,
    n_cycles: int,
    seed: int | None = None,
) -> list[CycleLedger]:
    """Monte Carlo engine cycles, all measured at the same grid time.

    Every cycle evolves |0,0> to tau_measure and projects; the evolved state
    is identical across cycles, so it is computed once and outcomes are drawn
    from per-cycle Philox streams.
    """
    if n_cycles < 1:
        raise ValueError(f"n_cycles must be >= 1, got {n_cycles}")
    n_grid = round(tau_measure / config.dtau)
    if not math.isclose(n_grid * config.dtau, tau_measure, abs_tol=1e-12):
        raise ValueError(f"tau_measure = {tau_measure} is not on the dtau = {config.dtau} grid")
    if seed is None:
        seed = config.seed
    trunc = config.truncation
    psi = propagate(spec, ground_state(config), tau_measure)
    dist = outcome_distribution(psi, trunc)
    phi_diag = phi.diagonal

    e_switch_on = float(phi_diag[flat_index(0, 0, trunc)])
    phi_psi = phi.values @ np.ascontiguousarray(psi.real) + 1j * (
        phi.values @ np.ascontiguousarray(psi.imag)
    )
    e_total_pre = float(
        (psi.conj() @ phi_psi).real + dist.probs @ free_energy_diag(trunc, config.omega)
    )

    ledgers = []
    for cycle in range(n_cycles):
        j, k = sample_outcome(dist, cycle_rng(seed, cycle))
        decouple = abs(float(phi_diag[flat_index(j, k, trunc)]))
        extract = free_energy(j, k, config.omega) - free_energy(0, 0, config.omega)
        e_post = free_energy(j, k, config.omega) + float(phi_diag[flat_index(j, k, trunc)])
        ledgers.append(
            CycleLedger(
                cycle=cycle,
                tau_measure=tau_measure,
                outcome=(j, k),
                e_switch_on=e_switch_on,
                e_decouple_cost=decouple,
                w_extract=extract,
                e_measure_input=e_post - e_total_pre,
                w_net=extract + abs(e_switch_on) - decouple,
            )
        )
    return ledgers


CYCLES_CSV_HEADER = "cycle,tau_measure,j,k,e_switch_on,e_decouple_cost,w_extract,e_measure_input,w_net"


def write_cycles_csv(path, ledgers: list[CycleLedger]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CYCLES_CSV_HEADER + "\n")
        for led in ledgers:
            row = [
                str(led.cycle),
                f"{led.tau_measure:.15g}",
                str(led.outcome[0]),
                str(led.outcome[1]),
                f"{led.e_switch_on:.15g}",
                f"{led.e_decouple_cost:.15g}",
                f"{led.w_extract:.15g}",
                f"{led.e_measure_input:.15g}",
                f"{led.w_net:.15g}",
            ]
            fh.write(",".join(row) + "\n")


def _mean_and_se(values: np.ndarray) -> dict:
    n = len(values)
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return {"mean": mean, "standard_error": se}


def summarize_cycles(ledgers: list[CycleLedger]) -> dict:
    """Aggregate statistics: means with standard errors plus the outcome histogram."""
    n = len(ledgers)
    outcomes = [led.outcome for led in ledgers]
    excited = np.array([outcome != (0, 0) for outcome in outcomes], dtype=float)
    histogram: dict[str, int] = {}
    for j, k in outcomes:
        key = f"{j},{k}"
        histogram[key] = histogram.get(key, 0) + 1
    histogram = dict(sorted(histogram.items(), key=lambda item: (-item[1], item[0])))
    return {
        "n_cycles": n,
        "tau_measure": ledgers[0].tau_measure if ledgers else None,
        "excited_fraction": _mean_and_se(excited),
        "w_extract": _mean_and_se(np.array([led.w_extract for led in ledgers])),
        "w_net": _mean_and_se(np.array([led.w_net for led in ledgers])),
        "e_decouple_cost": _mean_and_se(np.array([led.e_decouple_cost for led in ledgers])),
        "e_measure_input": _mean_and_se(np.array([led.e_measure_input for led in ledgers])),
        "outcome_histogram": histogram,
    }


def write_cycle_summary(path, summary: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
