"""Batched complex tridiagonal (Thomas) solves for the per-wavenumber systems.

Each row of the (nk, ny) inputs is an independent tridiagonal system in y.
The factor/substitute split lets the caller reuse the elimination coefficients
while the matrix (i.e. the time step) is unchanged. The operators assembled in
this package are strictly diagonally dominant, so elimination cannot break
down; the pivot check is defensive.
"""

from __future__ import annotations

import numba as nb
import numpy as np

__all__ = ["factor", "solve_factored", "solve", "apply_operator"]


@nb.njit(cache=True)
def _factor_kernel(lower, diag, upper, cprime, binv):  # pragma: no cover - jitted
    nk, ny = diag.shape
    for ik in range(nk):
        beta = diag[ik, 0]
        if beta == 0.0:
            return ik
        binv[ik, 0] = 1.0 / beta
        for j in range(1, ny):
            cprime[ik, j] = upper[ik, j - 1] * binv[ik, j - 1]
            beta = diag[ik, j] - lower[ik, j] * cprime[ik, j]
            if beta == 0.0:
                return ik
            binv[ik, j] = 1.0 / beta
    return -1


@nb.njit(cache=True)
def _solve_kernel(lower, cprime, binv, rhs, out):  # pragma: no cover - jitted
    nk, ny = rhs.shape
    for ik in range(nk):
        out[ik, 0] = rhs[ik, 0] * binv[ik, 0]
        for j in range(1, ny):
            out[ik, j] = (rhs[ik, j] - lower[ik, j] * out[ik, j - 1]) * binv[ik, j]
        for j in range(ny - 2, -1, -1):
            out[ik, j] = out[ik, j] - cprime[ik, j + 1] * out[ik, j + 1]


def factor(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray):
    """Forward-elimination coefficients (cprime, binv) for later solves."""
    cprime = np.zeros_like(diag)
    binv = np.empty_like(diag)
    bad = _factor_kernel(lower, diag, upper, cprime, binv)
    if bad >= 0:
        raise RuntimeError(f"tridiagonal elimination broke down in system {bad}")
    return cprime, binv


def solve_factored(lower: np.ndarray, cprime: np.ndarray, binv: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    out = np.empty_like(rhs)
    _solve_kernel(lower, cprime, binv, rhs, out)
    return out


def solve(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """One-shot batched solve of the systems diag*x + lower*x_{j-1} + upper*x_{j+1} = rhs."""
    cprime, binv = factor(lower, diag, upper)
    return solve_factored(lower, cprime, binv, rhs)


def apply_operator(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Matrix-vector product of the same batched tridiagonal operator (residual checks)."""
    out = diag * x
    out[:, 1:] += lower[:, 1:] * x[:, :-1]
    out[:, :-1] += upper[:, :-1] * x[:, 1:]
    return out
