"""Stable special-function kernels: normalized Hermite functions, generalized
Laguerre polynomials, terminating Gaussian hypergeometric sums, log-factorials
and Gauss-Hermite quadrature rules.

Everything here is built for oscillator levels up to ~100 without overflow:
factorial ratios live in log space and Hermite functions use the normalized
three-term recurrence instead of raw polynomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

_LOG_FACT_MAX = 200
# ln(n!) for n = 0..200 by cumulative summation of logs
_LOG_FACT = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, _LOG_FACT_MAX + 1)))))

SQRT_PI = math.sqrt(math.pi)


def log_factorial(n: int) -> float:
    """ln(n!) from the precomputed table (0 <= n <= 200)."""
    if n < 0:
        raise ValueError(f"log_factorial requires n >= 0, got {n}")
    if n > _LOG_FACT_MAX:
        raise ValueError(f"log_factorial table covers n <= {_LOG_FACT_MAX}, got {n}")
    return float(_LOG_FACT[n])


def log_factorial_table(n_max: int) -> np.ndarray:
    """View of the ln(n!) table up to n_max, for vectorized kernels."""
    if not 0 <= n_max <= _LOG_FACT_MAX:
        raise ValueError(f"n_max must be in [0, {_LOG_FACT_MAX}], got {n_max}")
    return _LOG_FACT[: n_max + 1]


def hermite_functions(n_max: int, y, weighted: bool = True) -> np.ndarray:
    """All normalized oscillator eigenfunctions psi_0..psi_n_max at points y.

    Returns an array of shape (n_max+1,) + shape(y).  With weighted=False the
    Gaussian e^{-y^2/2} is left out, giving the orthonormal-polynomials part
    (what a quadrature rule with weight e^{-y^2} wants to see).
    """
    if n_max < 0:
        raise ValueError(f"level must be >= 0, got {n_max}")
    y = np.asarray(y, dtype=float)
    out = np.empty((n_max + 1,) + y.shape)
    out[0] = math.pi ** -0.25 * (np.exp(-0.5 * y * y) if weighted else 1.0)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * y * out[0]
    for n in range(2, n_max + 1):
        out[n] = y * math.sqrt(2.0 / n) * out[n - 1] - math.sqrt((n - 1) / n) * out[n - 2]
    return out


def hermite_function(n: int, y):
    """psi_n(y) = H_n(y) e^{-y^2/2} / sqrt(2^n n! sqrt(pi)) via the normalized recurrence."""
    values = hermite_functions(n, y)[n]
    return float(values) if values.ndim == 0 else values


def laguerre(m: int, a: int, x):
    """Generalized Laguerre polynomial L_m^a(x) by the three-term recurrence in m."""
    if m < 0:
        raise ValueError(f"laguerre degree must be >= 0, got {m}")
    if m + a < 0:
        raise ValueError(f"laguerre requires m + a >= 0, got m={m}, a={a}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if m == 0:
        return float(prev) if prev.ndim == 0 else prev
    cur = 1.0 + a - x
    for i in range(2, m + 1):
        prev, cur = cur, ((2 * i - 1 + a - x) * cur - (i - 1 + a) * prev) / i
    return float(cur) if cur.ndim == 0 else cur


def hyp2f1_terminating(u: int, j: int, c: float, z: float) -> float:
    """F(-u, -j; c; z) summed over its min(u,j)+1 terms with Pochhammer ratios.

    The first two parameters are the non-positive integers -u and -j, so the
    series terminates; c must avoid the non-positive integers reachable by
    the sum (guarded, though half-integer c from the overlap kernels never
    hits them).
    """
    if u < 0 or j < 0:
        raise ValueError(f"u and j must be >= 0, got u={u}, j={j}")
    n_terms = min(u, j)
    total = 1.0
    term = 1.0
    for n in range(n_terms):
        denom = c + n
        if denom == 0:
            raise ValueError(f"hypergeometric parameter c={c} hits a pole at term {n}")
        term *= (n - u) * (n - j) * z / (denom * (n + 1))
        total += term
    return total


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule: sum(w_i p(y_i)) = integral p(y) e^{-y^2} dy for deg p <= 2n-1."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "gauss-hermite"
    # w_i e^{y_i^2}, for integrands carrying their own Gaussian decay
    scaled_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.nodes) != len(self.weights) or len(self.nodes) < 1:
            raise ValueError("nodes and weights must have equal length >= 1")
        if np.any(self.weights == 0.0):
            raise ValueError("quadrature weights underflowed; rule is too large")
        object.__setattr__(self, "scaled_weights", self.weights * np.exp(self.nodes**2))

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)


def gauss_hermite_rule(n_nodes: int) -> QuadratureRule:
    """Gauss-Hermite nodes/weights by Golub-Welsch on the Jacobi tridiagonal matrix."""
    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes}")
    if n_nodes == 1:
        return QuadratureRule(np.zeros(1), np.array([SQRT_PI]))
    off_diag = np.sqrt(np.arange(1, n_nodes) / 2.0)
    # stev (QR iteration) resolves the ~e^{-y^2} first components of the
    # extreme eigenvectors; the default stemr driver underflows them to 0
    nodes, vecs = eigh_tridiagonal(np.zeros(n_nodes), off_diag, lapack_driver="stev")
    weights = SQRT_PI * vecs[0] ** 2
    # enforce the exact +/- symmetry of the rule (kills odd integrands bit-exactly)
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return QuadratureRule(nodes, weights)


@lru_cache(maxsize=32)
def cached_rule(n_nodes: int) -> QuadratureRule:
    return gauss_hermite_rule(n_nodes)
