"""Shear-adapted energy functionals and decay-rate fitting.

For each x-wavenumber k != 0 the weighted energy of a slice f(y) is

    Phi_k[f] = ||f||^2 + ||sqrt(alpha) f_y||^2
               + 2 k Re<i beta u' f, f_y> + k^2 ||sqrt(gamma) u' f||^2,

with A- and k-dependent weights

    alpha = eps_alpha A^{-2/3} |k|^{-2/3},
    beta  = eps_beta  A^{-1/3} |k|^{-4/3},
    gamma = eps_gamma |k|^{-2},

and 8 beta^2 <= alpha gamma, which makes the cross term subordinate, so
Phi_k >= ||f||^2 / 2 always (in fact Phi_k >= ||f||^2). Slice inner products
carry the 2pi x-Parseval weight, <g,h> = 2pi int conj(g) h dy (trapezoid), so
sums of Phi_k over all k != 0 compare directly with physical L^2 norms: the
composite functional

    F = sum_{k!=0} Phi_k[n] + Phi_k[d_y c] + Phi_k[d_x c] + A|k| Phi_k[c]

dominates ||n_neq||_2^2 + ||grad c_neq||_2^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, SpectralSlice, ddy_values, forward_rfft
from .model import ModelParams, PKSState, ShearProfile

__all__ = [
    "HypoMultipliers",
    "DecayFit",
    "multipliers",
    "phi_k",
    "functional_F",
    "fit_decay_rate",
    "scaling_slope",
]


@dataclass(frozen=True)
class HypoMultipliers:
    """Weight prefactors; the defaults satisfy 8 eps_beta^2 <= eps_alpha eps_gamma."""

    eps_alpha: float = 0.01
    eps_beta: float = 0.003
    eps_gamma: float = 0.01

    def __post_init__(self) -> None:
        for label in ("eps_alpha", "eps_beta", "eps_gamma"):
            v = getattr(self, label)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{label} must be a positive real, got {v}")
        lhs = 8.0 * self.eps_beta**2
        rhs = self.eps_alpha * self.eps_gamma
        if lhs > rhs:
            raise ValueError(
                "cross-term weight too large: need 8*eps_beta^2 <= eps_alpha*eps_gamma, "
                f"got {lhs:.3e} > {rhs:.3e}"
            )


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential rate: value ~ C exp(-rate * t) on the window."""

    rate: float
    window: tuple[float, float]
    r_squared: float
    n_samples: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.rate):
            raise ValueError("fitted rate must be finite")
        if not self.window[0] < self.window[1]:
            raise ValueError(f"window must satisfy lo < hi, got {self.window}")
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValueError(f"r_squared must lie in [0,1], got {self.r_squared}")


def multipliers(A: float, k: int, eps: HypoMultipliers = HypoMultipliers()) -> tuple[float, float, float]:
    """Weights (alpha, beta, gamma) for advection strength A and wavenumber k != 0."""
    if not (np.isfinite(A) and A > 0):
        raise ValueError(f"A must be a positive real, got {A}")
    if k == 0:
        raise ValueError("the zero mode carries no shear weights; k must be nonzero")
    ak = abs(float(k))
    alpha = eps.eps_alpha * A ** (-2.0 / 3.0) * ak ** (-2.0 / 3.0)
    beta = eps.eps_beta * A ** (-1.0 / 3.0) * ak ** (-4.0 / 3.0)
    gamma = eps.eps_gamma * ak ** (-2.0)
    return alpha, beta, gamma


def _phi_batch(
    prof: np.ndarray,
    ks: np.ndarray,
    u1: np.ndarray,
    wy: np.ndarray,
    dy: float,
    A: float,
    eps: HypoMultipliers,
) -> np.ndarray:
    """Phi_k for a batch of slices prof (nk, ny) at positive wavenumbers ks."""
    ks = ks.astype(float)
    alpha = eps.eps_alpha * A ** (-2.0 / 3.0) * ks ** (-2.0 / 3.0)
    beta = eps.eps_beta * A ** (-1.0 / 3.0) * ks ** (-4.0 / 3.0)
    gamma = eps.eps_gamma * ks ** (-2.0)
    w2pi = 2.0 * np.pi * wy
    dprof = ddy_values(prof, dy, order=1)
    absf2 = (prof.real**2 + prof.imag**2) @ w2pi
    absdf2 = (dprof.real**2 + dprof.imag**2) @ w2pi
    uf2 = ((prof.real**2 + prof.imag**2) * u1**2) @ w2pi
    cross = (np.imag(np.conj(prof) * dprof) * u1) @ w2pi
    return absf2 + alpha * absdf2 + 2.0 * ks * beta * cross + ks**2 * gamma * uf2


def phi_k(
    slc: SpectralSlice,
    shear: ShearProfile,
    A: float,
    eps: HypoMultipliers = HypoMultipliers(),
) -> float:
    """Weighted slice energy Phi_k; rejects the zero mode."""
    if slc.k == 0:
        raise ValueError("Phi is defined for nonzero wavenumbers only")
    grid = slc.grid
    prof = slc.profile[None, :]
    ks = np.array([abs(slc.k)])
    # Phi_{-k} = Phi_k for slices of real fields; use |k| with the conjugate profile
    if slc.k < 0:
        prof = np.conj(prof)
    return float(_phi_batch(prof, ks, shear.u1, grid.wy, grid.dy, A, eps)[0])


def functional_F(
    state: PKSState,
    shear: ShearProfile,
    params: ModelParams,
    eps: HypoMultipliers = HypoMultipliers(),
) -> dict:
    """Composite fluctuation functional and its four component sums.

    Returns a dict with keys ``total``, ``n``, ``dyc``, ``dxc``, ``Akc`` and the
    per-wavenumber array ``phi_n`` (Phi_k of the density fluctuation for
    k = 1..nx/2; the -k partner is equal and is accounted for in the sums).
    Exactly zero for x-independent states.
    """
    grid = state.grid
    dy, wy = grid.dy, grid.wy
    spec_n = forward_rfft(state.n.values)[1:]
    spec_c = forward_rfft(state.c.values)[1:]
    ks = grid.kx[1:].astype(float)
    # each |k| < nx/2 appears as +-k; the Nyquist slice is its own partner
    mult = np.full(ks.shape, 2.0)
    mult[-1] = 1.0

    phi_n = _phi_batch(spec_n, ks, shear.u1, wy, dy, params.A, eps)
    phi_dyc = _phi_batch(ddy_values(spec_c, dy, order=1), ks, shear.u1, wy, dy, params.A, eps)
    phi_dxc = _phi_batch(1j * ks[:, None] * spec_c, ks, shear.u1, wy, dy, params.A, eps)
    phi_c = _phi_batch(spec_c, ks, shear.u1, wy, dy, params.A, eps)

    f_n = float(mult @ phi_n)
    f_dyc = float(mult @ phi_dyc)
    f_dxc = float(mult @ phi_dxc)
    f_akc = float(mult @ (params.A * ks * phi_c))
    return {
        "total": f_n + f_dyc + f_dxc + f_akc,
        "n": f_n,
        "dyc": f_dyc,
        "dxc": f_dxc,
        "Akc": f_akc,
        "phi_n": phi_n,
    }


def fit_decay_rate(
    times: np.ndarray,
    values: np.ndarray,
    window: tuple[float, float] | None = None,
) -> DecayFit:
    """Least-squares exponential decay rate of a positive series on a time window.

    Fits log(values) against t; ``rate`` is minus the slope (positive for decay).
    Requires at least 10 strictly positive samples in the window. A constant
    series fits exactly with rate 0.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise ValueError("times and values must be 1-D arrays of equal length")
    if window is None:
        sel = np.ones(times.shape, dtype=bool)
        window = (float(times.min()), float(times.max())) if times.size else (0.0, 0.0)
    else:
        lo, hi = float(window[0]), float(window[1])
        if not lo < hi:
            raise ValueError(f"window must satisfy lo < hi, got ({lo}, {hi})")
        sel = (times >= lo) & (times <= hi)
        window = (lo, hi)
    t = times[sel]
    v = values[sel]
    if t.size < 10:
        raise ValueError(f"insufficient data: {t.size} samples in window, need >= 10")
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValueError("insufficient data: series must be strictly positive and finite on the window")
    logv = np.log(v)
    tbar = t.mean()
    lbar = logv.mean()
    dt = t - tbar
    denom = float(dt @ dt)
    if denom == 0.0:
        raise ValueError("insufficient data: window collapses to a single time")
    slope = float(dt @ (logv - lbar)) / denom
    resid = logv - (lbar + slope * dt)
    ss_tot = float(np.sum((logv - lbar) ** 2))
    ss_res = float(resid @ resid)
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return DecayFit(rate=-slope, window=window, r_squared=r2, n_samples=int(t.size))


def scaling_slope(a_values: np.ndarray, rates: np.ndarray) -> float:
    """Log-log slope of rate(A) across an advection-strength sweep (>= 3 points)."""
    a_values = np.asarray(a_values, dtype=float)
    rates = np.asarray(rates, dtype=float)
    if a_values.shape != rates.shape or a_values.ndim != 1:
        raise ValueError("a_values and rates must be 1-D arrays of equal length")
    if a_values.size < 3:
        raise ValueError(f"need at least 3 sweep points, got {a_values.size}")
    if np.any(a_values <= 0) or np.any(rates <= 0):
        raise ValueError("scaling slope needs positive A values and positive rates")
    la = np.log(a_values)
    lr = np.log(rates)
    da = la - la.mean()
    return float(da @ (lr - lr.mean()) / (da @ da))
