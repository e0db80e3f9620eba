"""Engine configuration and validation.

All physics is expressed in oscillator-1 units: energies in hbar*Omega_1,
lengths in l_1, time in oscillator-1 periods.  The canonical run of both
geometries uses Phi_0 = -10, sigma = 1/2, omega = lambda = 1, n_max = 50 and
a time grid of step 0.001 over one period.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Any

from .basis import DEFAULT_N_MAX, ModeTruncation, free_energy

GEOMETRIES = ("parallel", "perpendicular")

DEFAULT_PHI0 = -10.0
DEFAULT_SIGMA = 0.5
DEFAULT_DTAU = 0.001
DEFAULT_TAU_END = 1.0
DEFAULT_SEED = 7
DEFAULT_TRACKED_ENERGY_CUT = 5.0
DEFAULT_DENSITY_EXTENT = 6.0
DEFAULT_DENSITY_POINTS = 201
N_SNAPSHOTS = 4


@dataclass(frozen=True)
class CouplingSpec:
    """Gaussian interaction: amplitude phi0 (in hbar*Omega_1) and width sigma (in l_1)."""

    geometry: str = "parallel"
    phi0: float = DEFAULT_PHI0
    sigma: float = DEFAULT_SIGMA

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"geometry must be one of {GEOMETRIES}, got {self.geometry!r}")
        if not (self.sigma > 0):
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not math.isfinite(self.phi0):
            raise ValueError(f"phi0 must be finite, got {self.phi0}")


@dataclass(frozen=True)
class EngineConfig:
    """Full description of one engine setup and its simulation grid."""

    omega: float = 1.0
    lam: float = 1.0
    truncation: ModeTruncation = field(default_factory=ModeTruncation)
    coupling: CouplingSpec = field(default_factory=CouplingSpec)
    dtau: float = DEFAULT_DTAU
    tau_end: float = DEFAULT_TAU_END
    seed: int = DEFAULT_SEED
    # optional output knobs; None means "use the documented default"
    tracked_states: tuple[tuple[int, int], ...] | None = None
    snapshot_taus: tuple[float, ...] | None = None
    density_extent: float = DEFAULT_DENSITY_EXTENT
    density_points: int = DEFAULT_DENSITY_POINTS

    def __post_init__(self):
        if not (self.omega > 0):
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if not (self.lam > 0):
            raise ValueError(f"lambda must be > 0, got {self.lam}")
        if not (self.dtau > 0):
            raise ValueError(f"dtau must be > 0, got {self.dtau}")
        if self.tau_end < self.dtau:
            raise ValueError(f"tau_end must be >= dtau, got {self.tau_end} < {self.dtau}")

    def tracked_or_default(self) -> tuple[tuple[int, int], ...]:
        """Tracked Fock states; default is every |j,k> with free energy <= 5."""
        if self.tracked_states is not None:
            return self.tracked_states
        states = [
            (j, k)
            for j in range(self.truncation.dim)
            for k in range(self.truncation.dim)
            if free_energy(j, k, self.omega) <= DEFAULT_TRACKED_ENERGY_CUT
        ]
        return tuple(sorted(states, key=lambda jk: (free_energy(*jk, self.omega), jk)))

    def snapshot_taus_or_default(self) -> tuple[float, ...]:
        """Snapshot times; default is four evenly spaced points across [0, tau_end]."""
        if self.snapshot_taus is not None:
            return self.snapshot_taus
        step = self.tau_end / (N_SNAPSHOTS - 1)
        return tuple(i * step for i in range(N_SNAPSHOTS))

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "geometry": self.coupling.geometry,
            "phi0": self.coupling.phi0,
            "sigma": self.coupling.sigma,
            "omega": self.omega,
            "lambda": self.lam,
            "n_max": self.truncation.n_max,
            "dtau": self.dtau,
            "tau_end": self.tau_end,
            "seed": self.seed,
            "density_extent": self.density_extent,
            "density_points": self.density_points,
        }
        if self.tracked_states is not None:
            d["tracked_states"] = [list(jk) for jk in self.tracked_states]
        if self.snapshot_taus is not None:
            d["snapshot_taus"] = list(self.snapshot_taus)
        return d


_SCALAR_KEYS = {
    "geometry": str,
    "phi0": float,
    "sigma": float,
    "omega": float,
    "lambda": float,
    "n_max": int,
    "dtau": float,
    "tau_end": float,
    "seed": int,
    "density_extent": float,
    "density_points": int,
}


def _reject(field_name: str, constraint: str):
    raise ValueError(f"config field {field_name!r}: {constraint}")


def validate_config(raw: dict[str, Any]) -> EngineConfig:
    """Build a fully defaulted EngineConfig from a flat JSON-style document.

    Rejections name the offending field.  An empty document yields the
    canonical parallel configuration.  A repulsive coupling (phi0 > 0) is
    simulable and only triggers a warning.
    """
    if not isinstance(raw, dict):
        raise ValueError("config document must be a JSON object")
    known = set(_SCALAR_KEYS) | {"tracked_states", "snapshot_taus"}
    for key in raw:
        if key not in known:
            _reject(key, "unknown field")

    vals: dict[str, Any] = {}
    for key, kind in _SCALAR_KEYS.items():
        if key not in raw:
            continue
        value = raw[key]
        if kind is int and isinstance(value, float) and not value.is_integer():
            _reject(key, f"expected an integer, got {value!r}")
        if kind in (int, float) and isinstance(value, (str, bool)):
            _reject(key, f"expected {kind.__name__}, got {value!r}")
        try:
            vals[key] = kind(value)
        except (TypeError, ValueError):
            _reject(key, f"expected {kind.__name__}, got {value!r}")

    geometry = vals.get("geometry", "parallel")
    if geometry not in GEOMETRIES:
        _reject("geometry", f"must be one of {GEOMETRIES}")
    phi0 = vals.get("phi0", DEFAULT_PHI0)
    if not math.isfinite(phi0):
        _reject("phi0", "must be finite")
    if phi0 > 0:
        warnings.warn(
            "phi0 > 0 selects a repulsive coupling; the engine cycle assumes attraction",
            stacklevel=2,
        )
    sigma = vals.get("sigma", DEFAULT_SIGMA)
    if sigma <= 0:
        _reject("sigma", "must be > 0")
    omega = vals.get("omega", 1.0)
    if omega <= 0:
        _reject("omega", "must be > 0")
    lam = vals.get("lambda", 1.0)
    if lam <= 0:
        _reject("lambda", "must be > 0")
    n_max = vals.get("n_max", DEFAULT_N_MAX)
    if n_max < 1:
        _reject("n_max", "must be >= 1")
    dtau = vals.get("dtau", DEFAULT_DTAU)
    if dtau <= 0:
        _reject("dtau", "must be > 0")
    tau_end = vals.get("tau_end", DEFAULT_TAU_END)
    if tau_end < dtau:
        _reject("tau_end", "must be >= dtau")
    seed = vals.get("seed", DEFAULT_SEED)
    if seed < 0:
        _reject("seed", "must be >= 0")
    density_points = vals.get("density_points", DEFAULT_DENSITY_POINTS)
    if density_points < 2:
        _reject("density_points", "must be >= 2")
    density_extent = vals.get("density_extent", DEFAULT_DENSITY_EXTENT)
    if density_extent <= 0:
        _reject("density_extent", "must be > 0")

    tracked = None
    if "tracked_states" in raw:
        try:
            tracked = tuple((int(j), int(k)) for j, k in raw["tracked_states"])
        except (TypeError, ValueError):
            _reject("tracked_states", "expected a list of [j,k] pairs")
        for j, k in tracked:
            if not (0 <= j <= n_max and 0 <= k <= n_max):
                _reject("tracked_states", f"state ({j},{k}) outside truncation")

    snapshots = None
    if "snapshot_taus" in raw:
        try:
            snapshots = tuple(float(t) for t in raw["snapshot_taus"])
        except (TypeError, ValueError):
            _reject("snapshot_taus", "expected a list of times")
        for t in snapshots:
            if not (0 <= t <= tau_end):
                _reject("snapshot_taus", f"time {t} outside [0, tau_end]")

    return EngineConfig(
        omega=omega,
        lam=lam,
        truncation=ModeTruncation(n_max),
        coupling=CouplingSpec(geometry, phi0, sigma),
        dtau=dtau,
        tau_end=tau_end,
        seed=seed,
        tracked_states=tracked,
        snapshot_taus=snapshots,
        density_extent=density_extent,
        density_points=density_points,
    )


def load_config(path) -> EngineConfig:
    """Read and validate a JSON config file."""
    with open(path, encoding="utf-8") as fh:
        return validate_config(json.load(fh))


def canonical_config(geometry: str = "parallel", n_max: int = DEFAULT_N_MAX) -> EngineConfig:
    """The canonical run of either geometry: Phi0=-10, sigma=1/2, omega=lambda=1."""
    return EngineConfig(truncation=ModeTruncation(n_max), coupling=CouplingSpec(geometry=geometry))
