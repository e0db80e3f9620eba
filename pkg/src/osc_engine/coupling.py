"""Interaction matrix elements <u,v|Phi|j,k> for the Gaussian coupling.

Parallel geometry reduces the 2D integral to a single Fourier-space
quadrature over products of displacement-type overlap kernels; the
perpendicular geometry factorizes into two Gaussian-overlap kernels with a
closed form in a terminating hypergeometric sum.  A brute-force 2D
tensor-grid oracle is kept alongside as the independent ground truth.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .basis import ModeTruncation
from .config import CouplingSpec, EngineConfig
from .specfun import (
    QuadratureRule,
    cached_rule,
    hermite_functions,
    hyp2f1_terminating,
    laguerre,
    log_factorial,
    log_factorial_table,
)

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_I_POWERS = (1.0 + 0.0j, -1.0j, -1.0 + 0.0j, 1.0j)  # (-i)^m for m mod 4

# above this order the alternating hypergeometric sum loses precision;
# switch to exact Gauss-Hermite quadrature of the same integral
SIGMA_CLOSED_FORM_MAX = 20


def phi_gamma_gaussian(gamma, spec: CouplingSpec):
    """Fourier amplitude of the parallel Gaussian coupling: Phi0*sigma*e^{-g^2 s^2/2}/sqrt(2pi)."""
    if spec.geometry != "parallel":
        raise ValueError("Fourier amplitude is defined for the parallel geometry only")
    gamma = np.asarray(gamma, dtype=float)
    out = spec.phi0 * spec.sigma / _SQRT_2PI * np.exp(-0.5 * (gamma * spec.sigma) ** 2)
    return float(out) if out.ndim == 0 else out


def _xi_modulus(g, u: int, j: int):
    """Real factor R of the Fourier overlap kernel; Xi(g,u,j) = (-i)^{|u-j|} R(g,u,j)."""
    if u < 0 or j < 0:
        raise ValueError(f"levels must be >= 0, got ({u},{j})")
    if u < j:
        u, j = j, u
    m = u - j
    g = np.asarray(g, dtype=float)
    x = 0.5 * g * g
    lag = laguerre(j, m, x)
    if m == 0:
        return np.exp(-0.5 * x) * lag
    with np.errstate(divide="ignore"):
        logmag = -0.5 * x + 0.5 * (log_factorial(j) - log_factorial(u)) + m * np.log(
            np.abs(g) / _SQRT2
        )
    val = np.exp(logmag) * lag
    if m & 1:
        val = np.where(g < 0, -val, val)
    return val


def xi(g, u: int, j: int) -> complex:
    """Overlap kernel of two oscillator eigenstates with a plane-wave factor.

    Closed form e^{-g^2/4} sqrt(j!/u!) (g/(i sqrt2))^{u-j} L_j^{u-j}(g^2/2)
    for u >= j; symmetric in (u, j) because the wavefunctions are real.
    """
    m = abs(u - j)
    return complex(_I_POWERS[m % 4] * float(_xi_modulus(g, u, j)))


def sigma_kernel(al2: float, u: int, j: int) -> float:
    """Gaussian-weight overlap of two oscillator eigenstates.

    al2 is the dimensionless product alpha*l^2.  Zero whenever u+j is odd;
    closed form in a terminating hypergeometric sum for orders <= 20, exact
    Gauss-Hermite quadrature above that.
    """
    if not al2 > 0:
        raise ValueError(f"al2 must be > 0, got {al2}")
    if u < 0 or j < 0:
        raise ValueError(f"levels must be >= 0, got ({u},{j})")
    if (u + j) & 1:
        return 0.0
    if max(u, j) <= SIGMA_CLOSED_FORM_MAX:
        return _sigma_closed_form(al2, u, j)
    return _sigma_quadrature(al2, u, j)


def _sigma_closed_form(al2: float, u: int, j: int) -> float:
    s = (u + j) // 2
    z = (1.0 + al2) / (2.0 * al2)
    hyp = hyp2f1_terminating(u, j, 0.5 * (1 - u - j), z)
    logmag = (
        log_factorial(u + j)
        - log_factorial(s)
        - 0.5 * (log_factorial(u) + log_factorial(j))
        - 0.5 * (u + j + 1) * math.log1p(al2)
        + s * math.log(0.5 * al2)
    )
    return (-1.0) ** s * math.exp(logmag) * hyp


def _sigma_quadrature(al2: float, u: int, j: int, rule: QuadratureRule | None = None) -> float:
    if rule is None:
        rule = cached_rule((u + j) // 2 + 8)
    scale = 1.0 / math.sqrt(1.0 + al2)
    y = rule.nodes * scale
    h = hermite_functions(max(u, j), y, weighted=False)
    return scale * float(np.dot(rule.weights, h[u] * h[j]))


def element_parallel(
    u: int, v: int, j: int, k: int, spec: CouplingSpec, lam: float,
    rule: QuadratureRule | None = None,
) -> float:
    """<u,v|Phi(x1-x2)|j,k> by exact Gauss-Hermite quadrature in Fourier space.

    The full Gaussian weight (coupling width plus both kernel envelopes) is
    absorbed into the substitution, leaving a polynomial integrand of degree
    u+j+v+k that the rule integrates exactly.
    """
    if spec.geometry != "parallel":
        raise ValueError("element_parallel requires a parallel-geometry spec")
    degree = u + j + v + k
    if rule is None:
        rule = cached_rule(max(degree // 2 + 8, 16))
    if 2 * rule.n_nodes - 1 < degree:
        raise ValueError(
            f"rule with {rule.n_nodes} nodes cannot integrate levels "
            f"({u},{v},{j},{k}) exactly; need >= {degree // 2 + 1} nodes"
        )
    m1 = abs(u - j)
    m2 = abs(v - k)
    if (m1 + m2) & 1:
        return 0.0
    scale = math.sqrt(0.5 * spec.sigma**2 + 0.25 * (1.0 + lam * lam))
    gammas = rule.nodes / scale
    weights = rule.scaled_weights * phi_gamma_gaussian(gammas, spec) / scale
    total = float(np.dot(weights, _xi_modulus(gammas, u, j) * _xi_modulus(lam * gammas, v, k)))
    if ((m1 - m2) // 2) & 1:
        total = -total
    return total


def element_perpendicular(u: int, v: int, j: int, k: int, spec: CouplingSpec, lam: float) -> float:
    """<u,v|Phi(x1^2+x2^2)|j,k> as a product of two Gaussian-overlap kernels."""
    if spec.geometry != "perpendicular":
        raise ValueError("element_perpendicular requires a perpendicular-geometry spec")
    inv2s2 = 0.5 / spec.sigma**2
    return spec.phi0 * sigma_kernel(inv2s2, u, j) * sigma_kernel(lam * lam * inv2s2, v, k)


@dataclass(frozen=True)
class InteractionMatrix:
    """Dense real symmetric matrix of the coupling over the composite basis."""

    values: np.ndarray
    spec: CouplingSpec
    trunc: ModeTruncation
    lam: float
    omega: float

    @property
    def diagonal(self) -> np.ndarray:
        return self.values.diagonal()


def _sigma_table(al2: float, dim: int) -> np.ndarray:
    table = np.zeros((dim, dim))
    for u in range(dim):
        for j in range(u, dim):
            if (u + j) & 1:
                continue
            val = sigma_kernel(al2, j, u)
            table[u, j] = val
            table[j, u] = val
    return table


def assembly_rule(trunc: ModeTruncation) -> QuadratureRule:
    """Fixed rule for full-matrix assembly: 2*n_max+8 nodes (exceeds exactness)."""
    return cached_rule(2 * trunc.n_max + 8)


def assemble_matrix(config: EngineConfig, backend: str | None = None) -> InteractionMatrix:
    """Assemble the full interaction matrix for the configured geometry.

    Parity-forbidden entries are exact zeros and the result is bit-exactly
    symmetric.  backend selects the hot-kernel implementation (numba/numpy);
    None follows the OSC_ENGINE_PURE_NUMPY environment flag.
    """
    trunc = config.truncation
    spec = config.coupling
    dim = trunc.dim
    if spec.phi0 == 0.0:
        values = np.zeros((trunc.total_dim, trunc.total_dim))
    elif spec.geometry == "perpendicular":
        inv2s2 = 0.5 / spec.sigma**2
        s1 = _sigma_table(inv2s2, dim)
        s2 = s1 if config.lam == 1.0 else _sigma_table(config.lam**2 * inv2s2, dim)
        values = spec.phi0 * np.kron(s1, s2)
    else:
        rule = assembly_rule(trunc)
        scale = math.sqrt(0.5 * spec.sigma**2 + 0.25 * (1.0 + config.lam**2))
        gammas = rule.nodes / scale
        logfact = log_factorial_table(trunc.n_max)
        r1 = _kernels.xi_table(gammas, dim, logfact, backend)
        r2 = r1 if config.lam == 1.0 else _kernels.xi_table(config.lam * gammas, dim, logfact, backend)
        wq = rule.scaled_weights * phi_gamma_gaussian(gammas, spec) / scale
        values = _kernels.contract_parallel(r1, r2, wq, dim, backend)
    return InteractionMatrix(values, spec, trunc, config.lam, config.omega)


# ---------------------------------------------------------------------------
# Independent 2D oracle: direct tensor-grid quadrature of the defining
# integral, used only as ground truth in tests.
# ---------------------------------------------------------------------------


def _phi_grid(spec: CouplingSpec, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    inv2s2 = 0.5 / spec.sigma**2
    if spec.geometry == "parallel":
        d = x1[:, None] - x2[None, :]
        return spec.phi0 * np.exp(-d * d * inv2s2)
    r2 = x1[:, None] ** 2 + x2[None, :] ** 2
    return spec.phi0 * np.exp(-r2 * inv2s2)


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    dx = x[1] - x[0]
    w = np.full(x.shape, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


def element_oracle_2d(
    u: int, v: int, j: int, k: int, spec: CouplingSpec, lam: float,
    grid_points: int = 801, extent: float = 10.0,
) -> float:
    """Brute-force 2D quadrature of the defining integral (ground truth for tests)."""
    x1 = np.linspace(-extent, extent, grid_points)
    x2 = np.linspace(-extent, extent, grid_points)
    w1 = _trapezoid_weights(x1)
    w2 = _trapezoid_weights(x2)
    p1 = hermite_functions(max(u, j), x1)
    p2 = hermite_functions(max(v, k), x2 / lam) / math.sqrt(lam)
    f1 = p1[u] * p1[j] * w1
    f2 = p2[v] * p2[k] * w2
    return float(f1 @ _phi_grid(spec, x1, x2) @ f2)


def oracle_table_2d(
    levels: int, spec: CouplingSpec, lam: float,
    grid_points: int = 801, extent: float = 10.0,
) -> np.ndarray:
    """All oracle elements with u,v,j,k < levels as a 4D array [u,v,j,k]."""
    x1 = np.linspace(-extent, extent, grid_points)
    x2 = np.linspace(-extent, extent, grid_points)
    w1 = _trapezoid_weights(x1)
    w2 = _trapezoid_weights(x2)
    p1 = hermite_functions(levels - 1, x1)
    p2 = hermite_functions(levels - 1, x2 / lam) / math.sqrt(lam)
    f1 = (p1[:, None, :] * p1[None, :, :] * w1).reshape(levels * levels, -1)
    f2 = (p2[:, None, :] * p2[None, :, :] * w2).reshape(levels * levels, -1)
    table = f1 @ _phi_grid(spec, x1, x2) @ f2.T  # [(u,j), (v,k)]
    return table.reshape(levels, levels, levels, levels).transpose(0, 2, 1, 3)


# ---------------------------------------------------------------------------
# Disk cache: binary upper triangle + JSON sidecar, keyed by a content hash
# of the physics that determines the matrix.
# ---------------------------------------------------------------------------

CACHE_MAGIC = b"PHIM"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sIIBddd")
_GEOMETRY_CODES = {"parallel": 0, "perpendicular": 1}
_GEOMETRY_NAMES = {code: name for name, code in _GEOMETRY_CODES.items()}


class MatrixCacheError(RuntimeError):
    """Raised when a cache file is unreadable or inconsistent."""


def matrix_cache_key(config: EngineConfig) -> str:
    spec = config.coupling
    payload = json.dumps(
        {
            "geometry": spec.geometry,
            "phi0": float(spec.phi0).hex(),
            "sigma": float(spec.sigma).hex(),
            "lambda": float(config.lam).hex(),
            "n_max": config.truncation.n_max,
            "format": CACHE_VERSION,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def default_cache_dir() -> Path:
    import os

    env = os.environ.get("OSC_ENGINE_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "osc-engine"


def save_matrix(phi: InteractionMatrix, path: Path) -> None:
    """Write header + row-major f64 upper triangle, plus a JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _HEADER.pack(
        CACHE_MAGIC,
        CACHE_VERSION,
        phi.trunc.n_max,
        _GEOMETRY_CODES[phi.spec.geometry],
        phi.spec.phi0,
        phi.spec.sigma,
        phi.lam,
    )
    iu = np.triu_indices(phi.trunc.total_dim)
    data = np.ascontiguousarray(phi.values[iu], dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())
    sidecar = {
        "magic": CACHE_MAGIC.decode(),
        "version": CACHE_VERSION,
        "n_max": phi.trunc.n_max,
        "geometry": phi.spec.geometry,
        "phi0": phi.spec.phi0,
        "sigma": phi.spec.sigma,
        "lambda": phi.lam,
        "total_dim": phi.trunc.total_dim,
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n", encoding="utf-8")


def load_matrix(path: Path, config: EngineConfig) -> InteractionMatrix:
    """Load a cached matrix and verify it matches the config exactly."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise MatrixCacheError(f"cannot read cache file {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise MatrixCacheError(f"cache file {path} is truncated")
    magic, version, n_max, geom_code, phi0, sigma, lam = _HEADER.unpack_from(raw)
    if magic != CACHE_MAGIC or version != CACHE_VERSION:
        raise MatrixCacheError(f"cache file {path} has wrong magic/version")
    geometry = _GEOMETRY_NAMES.get(geom_code)
    spec = config.coupling
    matches = (
        geometry == spec.geometry
        and n_max == config.truncation.n_max
        and phi0 == spec.phi0
        and sigma == spec.sigma
        and lam == config.lam
    )
    if not matches:
        raise MatrixCacheError(f"cache file {path} does not match the requested config")
    total_dim = config.truncation.total_dim
    n_upper = total_dim * (total_dim + 1) // 2
    expected = _HEADER.size + 8 * n_upper
    if len(raw) != expected:
        raise MatrixCacheError(f"cache file {path} has wrong size ({len(raw)} != {expected})")
    data = np.frombuffer(raw, dtype="<f8", count=n_upper, offset=_HEADER.size)
    values = np.zeros((total_dim, total_dim))
    iu = np.triu_indices(total_dim)
    values[iu] = data
    values.T[iu] = data
    return InteractionMatrix(values, spec, config.truncation, config.lam, config.omega)


def assemble_or_load(
    config: EngineConfig,
    cache_dir: Path | None = None,
    use_cache: bool = True,
    backend: str | None = None,
) -> tuple[InteractionMatrix, dict]:
    """Assemble the interaction matrix, going through the disk cache.

    Returns the matrix and a cache-info dict {key, path, hit}.  Corrupt cache
    files trigger a warning and a recompute.
    """
    key = matrix_cache_key(config)
    cache_dir = default_cache_dir() if cache_dir is None else Path(cache_dir)
    path = cache_dir / f"{key}.phim"
    info = {"key": key, "path": str(path), "hit": False}
    if use_cache and path.exists():
        try:
            phi = load_matrix(path, config)
            info["hit"] = True
            return phi, info
        except MatrixCacheError as exc:
            warnings.warn(f"interaction-matrix cache ignored: {exc}", stacklevel=2)
    phi = assemble_matrix(config, backend=backend)
    if use_cache:
        save_matrix(phi, path)
    return phi, info
