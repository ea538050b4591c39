"""Tensor grid on the periodic strip: spectral x on the torus, finite differences in y.

The domain is T x [-Ly, Ly] with x in [0, 2pi) sampled on nx equispaced nodes and
y sampled on ny nodes including both walls. The x-transform follows the convention

    fhat_k = (1/2pi) int_T f e^{-ikx} dx,      f = sum_k fhat_k e^{ikx},

which for equispaced samples is numpy's ``norm="forward"`` FFT; a single mode
cos(3x) g(y) therefore lands on the k = +-3 slices with profile g/2 each.
Quadrature is exact in x (periodic trapezoid) and trapezoidal in y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "SpectralSlice",
    "transform_x",
    "slice_at",
    "ddx",
    "ddy",
    "ddy_values",
    "integrate",
    "lp_norm",
    "mode_split",
    "dealias",
]


@dataclass(frozen=True)
class Grid:
    """Uniform nx-by-ny grid; x periodic (node 2pi excluded), y includes both walls."""

    nx: int
    ny: int
    Ly: float

    def __post_init__(self) -> None:
        nx, ny, Ly = self.nx, self.ny, self.Ly
        if nx < 8 or (nx & (nx - 1)) != 0:
            raise ValueError(f"nx must be a power of two >= 8, got {nx}")
        if ny < 17:
            raise ValueError(f"ny must be >= 17, got {ny}")
        if not (np.isfinite(Ly) and Ly > 0):
            raise ValueError(f"Ly must be a positive real, got {Ly}")
        object.__setattr__(self, "dx", 2.0 * np.pi / nx)
        object.__setattr__(self, "dy", 2.0 * Ly / (ny - 1))
        object.__setattr__(self, "x", 2.0 * np.pi * np.arange(nx) / nx)
        object.__setattr__(self, "y", np.linspace(-Ly, Ly, ny))
        # rfft wavenumbers 0..nx/2 (integers; the torus has circumference 2pi)
        object.__setattr__(self, "kx", np.arange(nx // 2 + 1))
        # trapezoid weights in y, wall nodes carry dy/2
        wy = np.full(ny, self.dy)
        wy[0] = wy[-1] = 0.5 * self.dy
        wy.setflags(write=False)
        object.__setattr__(self, "wy", wy)
        # 2/3-rule mask on the rfft axis: keep |k| <= nx//3
        keep = self.kx <= nx // 3
        keep.setflags(write=False)
        object.__setattr__(self, "dealias_keep", keep)

    @property
    def wavenumbers(self) -> range:
        """Full signed wavenumber range -nx/2+1 .. nx/2."""
        return range(-self.nx // 2 + 1, self.nx // 2 + 1)


@dataclass
class Field:
    """Real scalar field sampled on a :class:`Grid` as an (nx, ny) array."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        shape = (self.grid.nx, self.grid.ny)
        if vals.shape != shape:
            raise ValueError(f"field values must have shape {shape}, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        self.values = vals

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


@dataclass
class SpectralSlice:
    """Single-wavenumber x-Fourier coefficient, a complex profile over y."""

    grid: Grid
    k: int
    profile: np.ndarray

    def __post_init__(self) -> None:
        prof = np.asarray(self.profile, dtype=complex)
        if prof.shape != (self.grid.ny,):
            raise ValueError(
                f"slice profile must have shape ({self.grid.ny},), got {prof.shape}"
            )
        if abs(self.k) > self.grid.nx // 2:
            raise ValueError(f"|k| must be <= nx/2 = {self.grid.nx // 2}, got k={self.k}")
        self.profile = prof


# -- transforms ---------------------------------------------------------------


def forward_rfft(values: np.ndarray) -> np.ndarray:
    """Half-spectrum coefficients (nx//2+1, ny) under the (1/2pi)-integral convention."""
    return np.fft.rfft(values, axis=0, norm="forward")


def inverse_rfft(spec: np.ndarray, nx: int) -> np.ndarray:
    """Inverse of :func:`forward_rfft` back to an (nx, ny) real array."""
    return np.fft.irfft(spec, n=nx, axis=0, norm="forward")


def transform_x(obj, direction: str = "forward"):
    """Exact FFT in x: Field -> {k: SpectralSlice} or the inverse.

    Forward returns one slice per signed wavenumber k = -nx/2+1 .. nx/2 (the
    Nyquist mode carries the positive label). Inverse accepts the slice mapping
    (or any iterable of slices) and reconstructs the real field; the slices must
    be conjugate-symmetric, fhat_{-k} = conj(fhat_k).
    """
    if direction == "forward":
        if not isinstance(obj, Field):
            raise TypeError("forward transform expects a Field")
        grid = obj.grid
        spec = np.fft.fft(obj.values, axis=0, norm="forward")
        return {
            k: SpectralSlice(grid, k, spec[k % grid.nx].copy())
            for k in grid.wavenumbers
        }
    if direction == "inverse":
        slices = list(obj.values()) if isinstance(obj, dict) else list(obj)
        if not slices:
            raise ValueError("inverse transform needs at least one slice")
        grid = slices[0].grid
        spec = np.zeros((grid.nx, grid.ny), dtype=complex)
        for s in slices:
            if s.grid is not grid and s.grid != grid:
                raise ValueError("slices live on different grids")
            spec[s.k % grid.nx] = s.profile
        out = np.fft.ifft(spec, axis=0, norm="forward")
        scale = max(np.max(np.abs(out.real)), 1.0)
        if np.max(np.abs(out.imag)) > 1e-9 * scale:
            raise ValueError("slices are not conjugate-symmetric; inverse is not real")
        return Field(grid, out.real.copy())
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def slice_at(field: Field, k: int) -> SpectralSlice:
    """Single spectral slice of a real field (cheaper than a full transform_x)."""
    grid = field.grid
    if abs(k) > grid.nx // 2:
        raise ValueError(f"|k| must be <= nx/2 = {grid.nx // 2}, got k={k}")
    spec = forward_rfft(field.values)
    prof = spec[abs(k)].copy()
    if k < 0:
        prof = np.conj(prof)
    return SpectralSlice(grid, k, prof)


# -- derivatives --------------------------------------------------------------


def ddx(field: Field) -> Field:
    """Exact spectral x-derivative (mode k multiplied by ik, Nyquist dropped)."""
    grid = field.grid
    spec = forward_rfft(field.values)
    spec *= 1j * grid.kx[:, None]
    spec[-1] = 0.0  # the unpaired Nyquist mode has no meaningful odd derivative
    return Field(grid, inverse_rfft(spec, grid.nx))


def ddy_values(values: np.ndarray, dy: float, order: int = 1) -> np.ndarray:
    """Second-order y-derivative along the last axis, one-sided at the walls.

    Works for real or complex arrays of any leading shape; needs ny >= 5 so the
    wall stencils do not straddle the whole interval.
    """
    ny = values.shape[-1]
    if ny < 5:
        raise ValueError(f"ny must be >= 5 for second-order stencils, got {ny}")
    out = np.empty_like(values)
    if order == 1:
        out[..., 1:-1] = (values[..., 2:] - values[..., :-2]) / (2.0 * dy)
        out[..., 0] = (-3.0 * values[..., 0] + 4.0 * values[..., 1] - values[..., 2]) / (2.0 * dy)
        out[..., -1] = (3.0 * values[..., -1] - 4.0 * values[..., -2] + values[..., -3]) / (2.0 * dy)
    elif order == 2:
        out[..., 1:-1] = (values[..., 2:] - 2.0 * values[..., 1:-1] + values[..., :-2]) / dy**2
        out[..., 0] = (
            2.0 * values[..., 0] - 5.0 * values[..., 1] + 4.0 * values[..., 2] - values[..., 3]
        ) / dy**2
        out[..., -1] = (
            2.0 * values[..., -1] - 5.0 * values[..., -2] + 4.0 * values[..., -3] - values[..., -4]
        ) / dy**2
    else:
        raise ValueError(f"order must be 1 or 2, got {order}")
    return out


def ddy(field: Field, order: int = 1) -> Field:
    """Finite-difference y-derivative of a field (central interior, one-sided walls)."""
    return Field(field.grid, ddy_values(field.values, field.grid.dy, order))


# -- quadrature and norms -----------------------------------------------------


def integrate(field: Field) -> float:
    """Integral over T x [-Ly, Ly]: exact in x, trapezoid in y."""
    grid = field.grid
    return float(grid.dx * (field.values.sum(axis=0) @ grid.wy))


def lp_norm(field: Field, p) -> float:
    """L^p norm under the same quadrature; p is a real >= 1 or inf."""
    if p == np.inf or p == "inf":
        return float(np.max(np.abs(field.values)))
    p = float(p)
    if p < 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    grid = field.grid
    mass = grid.dx * (np.abs(field.values) ** p).sum(axis=0) @ grid.wy
    return float(mass ** (1.0 / p))


def mode_split(field: Field) -> tuple[np.ndarray, Field]:
    """Split into (x-average profile over y, fluctuation field with zero x-mean)."""
    zero = field.values.mean(axis=0)
    nonzero = Field(field.grid, field.values - zero[None, :])
    return zero, nonzero


# -- dealiasing ---------------------------------------------------------------


def dealias(field: Field) -> Field:
    """Project onto the 2/3-rule band |k| <= nx//3 (used before forming products)."""
    grid = field.grid
    spec = forward_rfft(field.values)
    spec[~grid.dealias_keep] = 0.0
    return Field(grid, inverse_rfft(spec, grid.nx))
