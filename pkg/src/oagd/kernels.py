"""Hot numeric kernels behind the windowed hypergradient fast paths.

Both kernels exist twice: a numba-jitted version and a vectorized numpy
version with identical semantics. The OAGD_BACKEND environment variable
("numba" or "numpy") picks the implementation; the default is numba when it
imports, numpy otherwise. benchmarks/kernel_bench.py compares the two.

sm_window_accumulate exploits that the inner Hessians of the regression
problems are rank-one-plus-diagonal, a_s a_s^T + D with D shared across the
window, so each linear solve collapses to Sherman-Morrison:

    (D + a a^T)^{-1} v = D^{-1} v - D^{-1} a (a^T D^{-1} v) / (1 + a^T D^{-1} a)

which costs O(d2) per window term instead of a dense O(d2^3) factorization.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def active_backend() -> str:
    """Resolve the kernel backend from OAGD_BACKEND ("numba" or "numpy")."""
    value = os.environ.get("OAGD_BACKEND", "").strip().lower()
    if value == "":
        return "numba" if NUMBA_AVAILABLE else "numpy"
    if value not in ("numba", "numpy"):
        raise ValueError(f"OAGD_BACKEND must be 'numba' or 'numpy', got {value!r}")
    if value == "numba" and not NUMBA_AVAILABLE:
        raise ValueError("OAGD_BACKEND=numba but numba is not installed")
    return value


def sm_window_accumulate_numpy(A, A_val, b_val, d_inv, y, u):
    """acc = sum_i u_i * (D + a_i a_i^T)^{-1} a_val_i (a_val_i^T y - b_val_i).

    A, A_val: (m, d2) rows newest-first; d_inv: 1/diag(D); u: (m,) weights.
    """
    r = A_val @ y - b_val
    G = A_val * r[:, None]
    DG = G * d_inv[None, :]
    DA = A * d_inv[None, :]
    num = np.einsum("ij,ij->i", A, DG)
    den = 1.0 + np.einsum("ij,ij->i", A, DA)
    V = DG - DA * (num / den)[:, None]
    return u @ V


@njit(cache=True)
def sm_window_accumulate_numba(A, A_val, b_val, d_inv, y, u):  # pragma: no cover - measured via dispatcher
    m, d2 = A.shape
    acc = np.zeros(d2)
    for i in range(m):
        r = -b_val[i]
        for j in range(d2):
            r += A_val[i, j] * y[j]
        num = 0.0
        den = 1.0
        for j in range(d2):
            num += A[i, j] * d_inv[j] * A_val[i, j] * r
            den += A[i, j] * d_inv[j] * A[i, j]
        scale = num / den
        for j in range(d2):
            acc[j] += u[i] * d_inv[j] * (A_val[i, j] * r - A[i, j] * scale)
    return acc


def quad_window_reduce_numpy(s, u, xpy):
    """sum_i u_i * (xpy + s_i) for the scalar quadratic family."""
    return float(u @ (xpy + s))


@njit(cache=True)
def quad_window_reduce_numba(s, u, xpy):  # pragma: no cover - measured via dispatcher
    acc = 0.0
    for i in range(s.shape[0]):
        acc += u[i] * (xpy + s[i])
    return acc


def sm_window_accumulate(A, A_val, b_val, d_inv, y, u):
    A = np.ascontiguousarray(A, dtype=float)
    A_val = np.ascontiguousarray(A_val, dtype=float)
    b_val = np.ascontiguousarray(b_val, dtype=float)
    d_inv = np.ascontiguousarray(d_inv, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    u = np.ascontiguousarray(u, dtype=float)
    if active_backend() == "numba":
        return sm_window_accumulate_numba(A, A_val, b_val, d_inv, y, u)
    return sm_window_accumulate_numpy(A, A_val, b_val, d_inv, y, u)


def quad_window_reduce(s, u, xpy):
    s = np.ascontiguousarray(s, dtype=float)
    u = np.ascontiguousarray(u, dtype=float)
    if active_backend() == "numba":
        return float(quad_window_reduce_numba(s, u, float(xpy)))
    return quad_window_reduce_numpy(s, u, float(xpy))
