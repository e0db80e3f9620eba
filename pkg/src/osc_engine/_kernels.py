"""Hot kernels for interaction-matrix assembly.

Two interchangeable backends: numba-jitted loops (default when numba is
importable) and a vectorized pure-numpy path.  Set OSC_ENGINE_PURE_NUMPY=1
to force the numpy path; an explicit backend argument overrides both.
The backends must agree to roundoff (tested) and both write exact zeros at
parity-forbidden entries.
"""

from __future__ import annotations

import math
import os

import numpy as np

_SQRT2 = math.sqrt(2.0)

FORCE_NUMPY = os.environ.get("OSC_ENGINE_PURE_NUMPY", "").strip() not in ("", "0")

try:
    from numba import config as _numba_config
    from numba import njit, prange

    # workqueue is always available; avoids noisy TBB version probing
    _numba_config.THREADING_LAYER = "workqueue"
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not FORCE_NUMPY


def active_backend(backend: str | None = None) -> str:
    """Resolve the backend name: explicit argument > env flag > availability."""
    if backend is not None:
        if backend not in ("numba", "numpy"):
            raise ValueError(f"backend must be 'numba' or 'numpy', got {backend!r}")
        if backend == "numba" and not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return backend
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Fourier overlap kernel tables: R[i, u, j] is the real modulus part of
# Xi(g_i, u, j) = (-i)^{|u-j|} R; built from the Laguerre recurrence with
# factorial ratios in log space.
# ---------------------------------------------------------------------------


def _xi_table_numpy(gs: np.ndarray, dim: int, logfact: np.ndarray) -> np.ndarray:
    nn = gs.shape[0]
    x = 0.5 * gs * gs
    base = -0.5 * x
    with np.errstate(divide="ignore"):
        logg = np.log(np.abs(gs) / _SQRT2)
    out = np.empty((nn, dim, dim))
    for m in range(dim):
        if m == 0:
            pref = np.exp(base)
        else:
            pref = np.exp(base + m * logg)  # exp(-inf) -> 0 at g = 0
            if m & 1:
                pref = np.where(gs < 0, -pref, pref)
        lag_prev = np.zeros(nn)
        lag_cur = np.zeros(nn)
        for j in range(dim - m):
            if j == 0:
                lag = np.ones(nn)
            elif j == 1:
                lag = 1.0 + m - x
            else:
                lag = ((2 * j - 1 + m - x) * lag_cur - (j - 1 + m) * lag_prev) / j
            lag_prev, lag_cur = lag_cur, lag
            val = math.exp(0.5 * (logfact[j] - logfact[j + m])) * pref * lag
            out[:, j + m, j] = val
            out[:, j, j + m] = val
    return out


def _contract_parallel_numpy(
    r1: np.ndarray, r2: np.ndarray, wq: np.ndarray, dim: int
) -> np.ndarray:
    nn = wq.shape[0]
    pairs = dim * dim
    a = (r1.reshape(nn, pairs) * wq[:, None]).T
    g = a @ r2.reshape(nn, pairs)  # [(u,j), (v,k)]
    m = np.ascontiguousarray(
        g.reshape(dim, dim, dim, dim).transpose(0, 2, 1, 3).reshape(pairs, pairs)
    )
    m *= _parity_sign_mask(dim)
    # mirror the upper triangle for bit-exact symmetry
    upper = np.triu(m)
    return upper + np.triu(m, 1).T


def _parity_sign_mask(dim: int) -> np.ndarray:
    """mask[u,v,j,k] = 0 for odd (u-j)+(v-k), else (-1)^{(|u-j|-|v-k|)/2}."""
    lev = np.arange(dim)
    m1 = np.abs(lev[:, None] - lev[None, :])
    big1 = m1[:, None, :, None]
    big2 = m1[None, :, None, :]
    allowed = (big1 + big2) % 2 == 0
    sign = np.where((big1 - big2) // 2 % 2 == 0, 1.0, -1.0)
    return np.where(allowed, sign, 0.0).reshape(dim * dim, dim * dim)


if HAVE_NUMBA:

    @njit(cache=True)
    def _xi_table_numba(gs, dim, logfact):  # pragma: no cover - exercised via dispatch
        nn = gs.shape[0]
        out = np.empty((nn, dim, dim))
        for i in range(nn):
            g = gs[i]
            x = 0.5 * g * g
            for m in range(dim):
                if m == 0:
                    logpow = 0.0
                    sgn = 1.0
                elif g == 0.0:
                    for j in range(dim - m):
                        out[i, j + m, j] = 0.0
                        out[i, j, j + m] = 0.0
                    continue
                else:
                    logpow = m * math.log(abs(g) / _SQRT2)
                    sgn = -1.0 if (g < 0.0 and (m & 1) == 1) else 1.0
                lag_prev = 0.0
                lag_cur = 0.0
                for j in range(dim - m):
                    if j == 0:
                        lag_cur = 1.0
                    elif j == 1:
                        lag_prev = lag_cur
                        lag_cur = 1.0 + m - x
                    else:
                        lag_new = ((2 * j - 1 + m - x) * lag_cur - (j - 1 + m) * lag_prev) / j
                        lag_prev = lag_cur
                        lag_cur = lag_new
                    val = sgn * math.exp(
                        -0.5 * x + 0.5 * (logfact[j] - logfact[j + m]) + logpow
                    ) * lag_cur
                    out[i, j + m, j] = val
                    out[i, j, j + m] = val
        return out

    @njit(parallel=True, cache=True)
    def _contract_parallel_numba(r1, r2, wq, dim):  # pragma: no cover - via dispatch
        pairs = dim * dim
        nn = wq.shape[0]
        out = np.zeros((pairs, pairs))
        for a in prange(pairs):
            u = a // dim
            v = a - u * dim
            for b in range(a, pairs):
                j = b // dim
                k = b - j * dim
                m1 = u - j if u >= j else j - u
                m2 = v - k if v >= k else k - v
                if (m1 + m2) & 1:
                    continue
                acc = 0.0
                for i in range(nn):
                    acc += wq[i] * r1[i, u, j] * r2[i, v, k]
                if ((m1 - m2) // 2) & 1:
                    acc = -acc
                out[a, b] = acc
                out[b, a] = acc
        return out


def xi_table(gs, dim, logfact, backend: str | None = None) -> np.ndarray:
    """R table of shape (n_nodes, dim, dim), symmetric in the level axes."""
    gs = np.ascontiguousarray(gs, dtype=np.float64)
    logfact = np.ascontiguousarray(logfact, dtype=np.float64)
    if active_backend(backend) == "numba":
        return _xi_table_numba(gs, dim, logfact)
    return _xi_table_numpy(gs, dim, logfact)


def contract_parallel(r1, r2, wq, dim, backend: str | None = None) -> np.ndarray:
    """Contract two kernel tables with quadrature weights into the flat matrix."""
    wq = np.ascontiguousarray(wq, dtype=np.float64)
    if active_backend(backend) == "numba":
        return _contract_parallel_numba(r1, r2, wq, dim)
    return _contract_parallel_numpy(r1, r2, wq, dim)
