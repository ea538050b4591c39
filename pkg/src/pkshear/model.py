"""Chemotaxis-with-shear model: parameters, shear profiles, state, spatial operators.

The evolved system, in the fast time unit where the shear term is O(1):

    dn/dt = (1/A) lap(n) - u(y) dn/dx - (1/A) div(n grad c)
    dc/dt = (1/A) (lap(c) + n - c) - u(y) dc/dx        (dynamic chemical)
    0     = lap(c) + n - c                              (quasi-static chemical)

x-derivatives are spectral, y-derivatives are second-order finite differences
with a no-flux (zero wall flux) closure written in flux form, so the trapezoid
mass functional of n is conserved exactly by the divergence terms. One fast
time unit equals 1/A units of the unscaled clock.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Field, Grid, ddx, forward_rfft, inverse_rfft
from . import tridiag

__all__ = [
    "ModelParams",
    "ShearProfile",
    "PKSState",
    "build_shear",
    "chemotaxis_flux",
    "assemble_rhs",
    "chem_elliptic_solve",
    "CRITICAL_MASS",
]

# L1-critical mass of the flowless aggregation system on the whole plane
CRITICAL_MASS = 8.0 * np.pi

SHEAR_NAMES = ("couette", "tanh_perturbed", "custom")


@dataclass(frozen=True)
class ModelParams:
    """Model constants: advection strength A, chemical mode, target mass."""

    A: float
    epsilon: int = 1
    mass_target: float | None = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.A) and self.A > 0):
            raise ValueError(f"A must be a positive real, got {self.A}")
        if self.epsilon not in (0, 1):
            raise ValueError(f"epsilon selects the chemical mode and must be 0 or 1, got {self.epsilon}")
        if self.mass_target is not None and not self.mass_target > 0:
            raise ValueError(f"mass_target must be positive when set, got {self.mass_target}")


@dataclass(frozen=True)
class ShearProfile:
    """Shear u(y) with its first three y-derivatives sampled on the grid.

    Monotonicity (min u' > 0) is required whenever the amplitude is nonzero;
    amplitude 0 is the documented flow-off baseline where the advection term
    vanishes identically.
    """

    grid: Grid
    name: str
    amplitude: float
    u: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray

    def __post_init__(self) -> None:
        ny = self.grid.ny
        for label in ("u", "u1", "u2", "u3"):
            arr = np.asarray(getattr(self, label), dtype=float)
            if arr.shape != (ny,):
                raise ValueError(f"{label} must have shape ({ny},), got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{label} must be finite")
            object.__setattr__(self, label, arr)

    @property
    def max_speed(self) -> float:
        return float(np.max(np.abs(self.u)))


def build_shear(grid: Grid, name: str, params: dict | None = None) -> ShearProfile:
    """Construct a validated shear profile.

    Profiles: ``couette`` (u = y), ``tanh_perturbed`` (u = y + a tanh y, |a| < 1),
    ``custom`` (callables or arrays for u and optionally u1, u2, u3; missing
    derivatives are filled by finite differences). Extra params: ``amplitude``
    (default 1.0, >= 0; scales u and its derivatives; 0 switches the flow off)
    and ``w2inf_cap`` (bound on max(|u'|,|u''|,|u'''|), default 100).
    """
    params = dict(params or {})
    if name not in SHEAR_NAMES:
        raise ValueError(f"unknown shear profile {name!r}; valid names: {', '.join(SHEAR_NAMES)}")
    amplitude = float(params.pop("amplitude", 1.0))
    if not (np.isfinite(amplitude) and amplitude >= 0):
        raise ValueError(f"shear amplitude must be >= 0, got {amplitude}")
    cap = float(params.pop("w2inf_cap", 100.0))
    y = grid.y

    if name == "couette":
        u = y.copy()
        u1 = np.ones_like(y)
        u2 = np.zeros_like(y)
        u3 = np.zeros_like(y)
    elif name == "tanh_perturbed":
        a = float(params.pop("a", 0.5))
        if abs(a) >= 1:
            raise ValueError(f"tanh_perturbed requires |a| < 1 to stay monotone, got a={a}")
        th = np.tanh(y)
        sech2 = 1.0 / np.cosh(y) ** 2
        u = y + a * th
        u1 = 1.0 + a * sech2
        u2 = -2.0 * a * sech2 * th
        u3 = -2.0 * a * (sech2**2 - 2.0 * sech2 * th**2)
    else:
        arrays = {}
        for label in ("u", "u1", "u2", "u3"):
            val = params.pop(label, None)
            if callable(val):
                arrays[label] = np.asarray(val(y), dtype=float)
            elif val is not None:
                arrays[label] = np.asarray(val, dtype=float)
        if "u" not in arrays:
            raise ValueError("custom shear requires at least 'u' (callable or array)")
        from .grid import ddy_values

        prev = arrays["u"]
        for label in ("u1", "u2", "u3"):
            if label not in arrays:
                arrays[label] = ddy_values(prev, grid.dy, order=1)
            prev = arrays[label]
        u, u1, u2, u3 = arrays["u"], arrays["u1"], arrays["u2"], arrays["u3"]

    if params:
        raise ValueError(f"unrecognized shear params: {sorted(params)}")

    u, u1, u2, u3 = amplitude * u, amplitude * u1, amplitude * u2, amplitude * u3
    if amplitude > 0:
        if np.min(u1) <= 0:
            raise ValueError(
                f"shear must be strictly increasing (min u' = {np.min(u1):.3g} <= 0); "
                "decreasing profiles are rejected, not flipped"
            )
        w2inf = max(np.max(np.abs(u1)), np.max(np.abs(u2)), np.max(np.abs(u3)))
        if w2inf > cap:
            raise ValueError(f"shear derivative bound {w2inf:.3g} exceeds the cap {cap:.3g}")
    return ShearProfile(grid, name, amplitude, u, u1, u2, u3)


@dataclass
class PKSState:
    """Time, cell density n, chemical c, and the one-step explicit-term history.

    ``chem_prev``/``dt_prev`` carry the previous chemotaxis term (half-spectrum
    array) and step size so a restarted integration reproduces the two-step
    extrapolation exactly; both are None on fresh states.
    """

    t: float
    n: Field
    c: Field
    chem_prev: np.ndarray | None = None
    dt_prev: float | None = None
    negativity_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.n.grid != self.c.grid:
            raise ValueError("n and c must share a grid")
        if not np.isfinite(self.t):
            raise ValueError(f"state time must be finite, got {self.t}")
        low = float(self.n.values.min())
        if low < -self.negativity_tol:
            raise ValueError(
                f"density has negative values below tolerance: min n = {low:.3e} < -{self.negativity_tol:.1e}"
            )

    @property
    def grid(self) -> Grid:
        return self.n.grid


# -- conservative y-operators (shared stencils) --------------------------------


def neumann_d2(values: np.ndarray, dy: float) -> np.ndarray:
    """Second difference along the last axis with mirror (zero-flux) walls.

    Identical to the flux-form divergence of the gradient with zero wall flux;
    trapezoid row sums vanish exactly.
    """
    out = np.empty_like(values)
    out[..., 1:-1] = (values[..., 2:] - 2.0 * values[..., 1:-1] + values[..., :-2]) / dy**2
    out[..., 0] = 2.0 * (values[..., 1] - values[..., 0]) / dy**2
    out[..., -1] = 2.0 * (values[..., -2] - values[..., -1]) / dy**2
    return out


def flux_div_y(flux: np.ndarray, dy: float) -> np.ndarray:
    """Divergence of interface fluxes (...,ny-1) -> (...,ny) with zero wall flux.

    Interior nodes see (F_{j+1/2}-F_{j-1/2})/dy; wall nodes own half cells, so
    the trapezoid-weighted column sums telescope to zero exactly.
    """
    ny = flux.shape[-1] + 1
    out = np.empty(flux.shape[:-1] + (ny,), dtype=flux.dtype)
    out[..., 0] = flux[..., 0] / (0.5 * dy)
    out[..., 1:-1] = (flux[..., 1:] - flux[..., :-1]) / dy
    out[..., -1] = -flux[..., -1] / (0.5 * dy)
    return out


def laplacian(f: Field) -> Field:
    """Discrete Laplacian: spectral -k^2 in x plus the mirror second difference in y."""
    grid = f.grid
    spec = forward_rfft(f.values)
    spec *= -(grid.kx[:, None] ** 2).astype(float)
    return Field(grid, inverse_rfft(spec, grid.nx) + neumann_d2(f.values, grid.dy))


# -- chemotaxis nonlinearity ----------------------------------------------------


def _dealias_spec(spec: np.ndarray, grid: Grid) -> np.ndarray:
    out = spec.copy()
    out[~grid.dealias_keep] = 0.0
    return out


def chemotaxis_flux(n: Field, c: Field) -> Field:
    """div(n grad c) with 2/3-rule dealiased products and zero-flux walls.

    The x part is d_x(n d_x c) evaluated spectrally; the y part is the flux-form
    divergence of arithmetic-mean interface fluxes n_{j+1/2} (c_{j+1}-c_j)/dy.
    Integrates to zero under the grid quadrature up to roundoff.
    """
    grid = n.grid
    if grid != c.grid:
        raise ValueError("n and c must share a grid")
    spec_n = _dealias_spec(forward_rfft(n.values), grid)
    spec_c = _dealias_spec(forward_rfft(c.values), grid)
    nm = inverse_rfft(spec_n, grid.nx)
    cm = inverse_rfft(spec_c, grid.nx)
    dxc = inverse_rfft(1j * grid.kx[:, None] * spec_c, grid.nx)

    spec_u = _dealias_spec(forward_rfft(nm * dxc), grid)
    div_x = inverse_rfft(1j * grid.kx[:, None] * spec_u, grid.nx)

    fy = 0.5 * (nm[:, :-1] + nm[:, 1:]) * (cm[:, 1:] - cm[:, :-1]) / grid.dy
    spec_fy = _dealias_spec(forward_rfft(fy), grid)
    div_y = flux_div_y(inverse_rfft(spec_fy, grid.nx), grid.dy)
    return Field(grid, div_x + div_y)


def assemble_rhs(state: PKSState, shear: ShearProfile, params: ModelParams) -> tuple[Field, Field]:
    """Full right-hand sides (dn/dt, dc/dt) for the dynamic-chemical system.

    Only valid for epsilon = 1; with the quasi-static chemical there is no dc/dt
    and callers must use :func:`chem_elliptic_solve` instead.
    """
    if params.epsilon != 1:
        raise ValueError("assemble_rhs needs the dynamic chemical (epsilon=1); "
                         "use chem_elliptic_solve for the quasi-static mode")
    grid = state.grid
    inv_a = 1.0 / params.A
    u_row = shear.u[None, :]
    flux = chemotaxis_flux(state.n, state.c)
    dn = inv_a * laplacian(state.n).values - u_row * ddx(state.n).values - inv_a * flux.values
    dc = inv_a * (laplacian(state.c).values + state.n.values - state.c.values)
    dc -= u_row * ddx(state.c).values
    return Field(grid, dn), Field(grid, dc)


# -- quasi-static chemical -------------------------------------------------------


def helmholtz_spec(spec_n: np.ndarray, grid: Grid) -> np.ndarray:
    """Solve (k^2 + 1 - d_yy) chat_k = nhat_k for every half-spectrum mode."""
    nk = spec_n.shape[0]
    dy2 = grid.dy**2
    ksq = (grid.kx[:nk, None] ** 2).astype(float)
    diag = np.broadcast_to(2.0 / dy2 + 1.0 + ksq, (nk, grid.ny)).astype(complex).copy()
    lower = np.full((nk, grid.ny), -1.0 / dy2, dtype=complex)
    upper = np.full((nk, grid.ny), -1.0 / dy2, dtype=complex)
    upper[:, 0] = -2.0 / dy2
    lower[:, -1] = -2.0 / dy2
    lower[:, 0] = 0.0
    upper[:, -1] = 0.0
    return tridiag.solve(lower, diag, upper, spec_n.astype(complex))


def chem_elliptic_solve(n: Field, params: ModelParams | None = None) -> Field:
    """Chemical field of the quasi-static balance lap(c) + n - c = 0.

    Decouples per x-mode into tridiagonal Helmholtz problems
    (d_yy - k^2 - 1) chat_k = -nhat_k with zero-flux walls, solved directly.
    """
    grid = n.grid
    spec_c = helmholtz_spec(forward_rfft(n.values), grid)
    return Field(grid, inverse_rfft(spec_c, grid.nx))
