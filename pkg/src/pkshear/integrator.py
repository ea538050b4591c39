"""Time integration with implicit linear terms and explicit chemotaxis.

Per x-mode, the stiff linear operator

    L_k = (1/A)(d_yy - k^2 - damping) - i k u(y)

(diffusion, chemical damping, shear advection) is advanced by Crank-Nicolson
with a direct complex tridiagonal solve, so the O(1) shear term imposes no
step-size restriction. The chemotaxis divergence is advanced by a two-step
Adams-Bashforth formula with variable-step weights (1 + r/2, -r/2),
r = dt_m/dt_{m-1}; the first step uses forward Euler. The chemical source n/A
enters the c-update trapezoidally, which makes spatially homogeneous pairs
(n, c) = (const, const) exact fixed points of the discrete update.

The step controller limits dt by the resolved shear speed and the explicit
chemotaxis velocities grad(c)/A; diffusion is implicit and never limits dt.
Grown steps are accepted only past a 5% hysteresis so the tridiagonal
factorizations can be reused while the controller is quiescent.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import tridiag
from .grid import Field, Grid, SpectralSlice, forward_rfft, inverse_rfft
from .model import ModelParams, PKSState, ShearProfile, flux_div_y, helmholtz_spec, neumann_d2
from .monitors import (
    FLAG_ABORTED,
    FLAG_BLOWUP,
    MonitorConfig,
    MonitorRecord,
    update_monitors,
)

__all__ = [
    "StepConfig",
    "RunOutcome",
    "implicit_solve_k",
    "adapt_dt",
    "step",
    "run",
    "save_checkpoint",
    "load_checkpoint",
    "CHECKPOINT_VERSION",
]

CHECKPOINT_VERSION = 1

_MODES = ("pks", "passive_scalar")


@dataclass(frozen=True)
class StepConfig:
    """Step-size bounds, CFL safety factor, blow-up threshold, and end time."""

    t_end: float
    dt_init: float = 1e-2
    dt_min: float = 1e-9
    dt_max: float = 1.0
    cfl: float = 0.9
    blowup_factor: float = 1e3

    def __post_init__(self) -> None:
        if not (np.isfinite(self.t_end) and self.t_end > 0):
            raise ValueError(f"t_end must be a positive real, got {self.t_end}")
        if not 0.0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError(
                "step bounds must satisfy 0 < dt_min <= dt_init <= dt_max, got "
                f"({self.dt_min}, {self.dt_init}, {self.dt_max})"
            )
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.blowup_factor > 1.0:
            raise ValueError(f"blowup_factor must exceed 1, got {self.blowup_factor}")


@dataclass
class RunOutcome:
    """Terminal status, the last materialized state, and the record history."""

    status: str
    final_state: PKSState
    records: list[MonitorRecord]


class _Kernel:
    """Spectral-state stepping core shared by step() and run().

    State lives as half-spectrum arrays (nx//2+1, ny). Factorizations of the
    Crank-Nicolson matrices are cached per dt.
    """

    def __init__(self, grid: Grid, shear: ShearProfile, params: ModelParams, mode: str):
        if mode not in _MODES:
            raise ValueError(f"unknown mode {mode!r}; valid modes: {', '.join(_MODES)}")
        self.grid = grid
        self.params = params
        self.mode = mode
        self.u = shear.u
        self.kx = grid.kx.astype(float)[:, None]
        self.ksq = self.kx**2
        self.keep = grid.dealias_keep
        self.inv_a = 1.0 / params.A
        self._fact_dt: float | None = None
        self._fact: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def _apply_linear(self, spec: np.ndarray, damping: float) -> np.ndarray:
        grid = self.grid
        diff = neumann_d2(spec, grid.dy) - (self.ksq + damping) * spec
        return self.inv_a * diff - 1j * self.kx * self.u[None, :] * spec

    def _factorize(self, dt: float) -> None:
        grid = self.grid
        nk, ny = grid.nx // 2 + 1, grid.ny
        h = 0.5 * dt
        off = -(h * self.inv_a) / grid.dy**2
        dampings = (0,) if self.mode == "passive_scalar" or self.params.epsilon == 0 else (0, 1)
        self._fact = {}
        for damping in dampings:
            lower = np.full((nk, ny), off, dtype=complex)
            upper = np.full((nk, ny), off, dtype=complex)
            upper[:, 0] = 2.0 * off
            lower[:, -1] = 2.0 * off
            lower[:, 0] = 0.0
            upper[:, -1] = 0.0
            diag = (
                1.0
                + h * self.inv_a * (2.0 / grid.dy**2 + self.ksq + damping)
                + 1j * h * self.kx * self.u[None, :]
            ).astype(complex)
            cprime, binv = tridiag.factor(lower, diag, upper)
            self._fact[damping] = (lower, cprime, binv)
        self._fact_dt = dt

    def _solve(self, rhs: np.ndarray, dt: float, damping: int) -> np.ndarray:
        if self._fact_dt != dt:
            self._factorize(dt)
        lower, cprime, binv = self._fact[damping]
        return tridiag.solve_factored(lower, cprime, binv, rhs)

    def chem_and_cfl(self, spec_n: np.ndarray, spec_c: np.ndarray) -> tuple[np.ndarray, float, float]:
        """Chemotaxis divergence in spectral form plus the explicit velocity maxima."""
        grid = self.grid
        keep = self.keep
        sn = np.where(keep[:, None], spec_n, 0.0)
        sc = np.where(keep[:, None], spec_c, 0.0)
        nm = inverse_rfft(sn, grid.nx)
        cm = inverse_rfft(sc, grid.nx)
        dxc = inverse_rfft(1j * self.kx * sc, grid.nx)

        px = forward_rfft(nm * dxc)
        px[~keep] = 0.0
        gy = (cm[:, 1:] - cm[:, :-1]) / grid.dy
        fy = forward_rfft(0.5 * (nm[:, :-1] + nm[:, 1:]) * gy)
        fy[~keep] = 0.0
        chem = 1j * self.kx * px + flux_div_y(fy, grid.dy)
        return chem, float(np.max(np.abs(dxc))), float(np.max(np.abs(gy))) if gy.size else 0.0

    def advance(
        self,
        spec_n: np.ndarray,
        spec_c: np.ndarray | None,
        chem_hist: np.ndarray | None,
        dt: float,
        dt_prev: float | None,
        chem_now: np.ndarray | None,
    ) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
        h = 0.5 * dt
        rhs_n = spec_n + h * self._apply_linear(spec_n, 0.0)
        if self.mode == "pks":
            if chem_hist is None or dt_prev is None:
                extrap = chem_now
            else:
                r = dt / dt_prev
                extrap = (1.0 + 0.5 * r) * chem_now - 0.5 * r * chem_hist
            rhs_n = rhs_n - dt * self.inv_a * extrap
        new_n = self._solve(rhs_n, dt, 0)

        new_c = None
        if self.mode == "pks":
            if self.params.epsilon == 1:
                rhs_c = spec_c + h * self._apply_linear(spec_c, 1.0)
                rhs_c = rhs_c + h * self.inv_a * (spec_n + new_n)
                new_c = self._solve(rhs_c, dt, 1)
            else:
                new_c = helmholtz_spec(new_n, self.grid)
        return new_n, new_c, chem_now


def implicit_solve_k(
    slc: SpectralSlice,
    dt: float,
    params: ModelParams,
    shear: ShearProfile,
    damping: int,
) -> SpectralSlice:
    """Solve (I - (dt/2) L_k) x = b for one mode, b being the slice profile."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if damping not in (0, 1):
        raise ValueError(f"damping must be 0 or 1, got {damping}")
    grid = slc.grid
    h = 0.5 * dt
    inv_a = 1.0 / params.A
    off = -(h * inv_a) / grid.dy**2
    lower = np.full((1, grid.ny), off, dtype=complex)
    upper = np.full((1, grid.ny), off, dtype=complex)
    upper[0, 0] = 2.0 * off
    lower[0, -1] = 2.0 * off
    lower[0, 0] = 0.0
    upper[0, -1] = 0.0
    diag = (
        1.0
        + h * inv_a * (2.0 / grid.dy**2 + slc.k**2 + damping)
        + 1j * h * slc.k * shear.u[None, :]
    ).astype(complex)
    out = tridiag.solve(lower, diag, upper, slc.profile[None, :].astype(complex))
    return SpectralSlice(grid, slc.k, out[0])


def adapt_dt(
    state: PKSState,
    shear: ShearProfile,
    params: ModelParams,
    cfl: float,
    dt_min: float = 0.0,
    dt_max: float = np.inf,
) -> float:
    """Step size from the explicit velocities, clamped to [dt_min, dt_max].

    dt = cfl * min(dx/max|u|, A dx/max|d_x c|, A dy/max|d_y c|); the gradient
    maxima use the chemical field, whose velocity grad(c)/A drives the explicit
    term. Diffusion and shear are implicit and impose no limit. A return value
    at or below dt_min signals imminent blow-up to the caller.
    """
    grid = state.grid
    from .grid import ddx

    dxc = np.max(np.abs(ddx(state.c).values))
    gy = np.max(np.abs(np.diff(state.c.values, axis=1))) / grid.dy
    limits = []
    if shear.max_speed > 0:
        limits.append(grid.dx / shear.max_speed)
    if dxc > 0:
        limits.append(params.A * grid.dx / dxc)
    if gy > 0:
        limits.append(params.A * grid.dy / gy)
    raw = cfl * min(limits) if limits else np.inf
    return float(min(max(raw, dt_min), dt_max))


def step(
    state: PKSState,
    shear: ShearProfile,
    params: ModelParams,
    dt: float,
    mode: str = "pks",
) -> PKSState:
    """One IMEX step; returns the advanced state carrying the explicit-term history."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    kernel = _Kernel(state.grid, shear, params, mode)
    spec_n = forward_rfft(state.n.values)
    spec_c = forward_rfft(state.c.values)
    if mode == "pks" and params.epsilon == 0:
        spec_c = helmholtz_spec(spec_n, state.grid)
    chem_now = None
    if mode == "pks":
        chem_now, _, _ = kernel.chem_and_cfl(spec_n, spec_c)
    new_n, new_c, chem = kernel.advance(spec_n, spec_c, state.chem_prev, dt, state.dt_prev, chem_now)
    n_vals = inverse_rfft(new_n, state.grid.nx)
    c_vals = inverse_rfft(new_c, state.grid.nx) if new_c is not None else np.zeros_like(n_vals)
    if not (np.all(np.isfinite(n_vals)) and np.all(np.isfinite(c_vals))):
        raise FloatingPointError(f"non-finite values after step to t = {state.t + dt}")
    return PKSState(
        t=state.t + dt,
        n=Field(state.grid, n_vals),
        c=Field(state.grid, c_vals),
        chem_prev=chem,
        dt_prev=dt,
        negativity_tol=state.negativity_tol,
    )


def run(
    init: PKSState,
    shear: ShearProfile,
    params: ModelParams,
    config: StepConfig,
    mode: str = "pks",
    monitors: MonitorConfig | None = None,
) -> RunOutcome:
    """Advance to t_end or termination, recording diagnostics every stride steps.

    ``passive_scalar`` mode evolves the n slot alone with no damping and no
    nonlinearity (the c slot stays zero). Termination statuses: ``completed``
    (reached t_end), ``blowup_detected`` (density amplitude past
    blowup_factor x initial, or controller dt at/below dt_min), ``aborted``
    (non-finite values or negativity beyond the initial state's tolerance).
    The blow-up thresholds in ``monitors`` are overridden from ``config`` so
    there is a single source of truth.
    """
    if monitors is None:
        monitors = MonitorConfig()
    mc = dataclasses.replace(monitors, blowup_factor=config.blowup_factor, dt_min=config.dt_min)
    grid = init.grid
    kernel = _Kernel(grid, shear, params, mode)
    pks = mode == "pks"

    spec_n = forward_rfft(init.n.values)
    spec_c = forward_rfft(init.c.values)
    if pks and params.epsilon == 0:
        spec_c = helmholtz_spec(spec_n, grid)
    chem_hist = init.chem_prev
    dt_prev = init.dt_prev
    t = float(init.t)
    end_tol = 1e-12 * max(1.0, config.t_end)
    neg_tol = init.negativity_tol

    records: list[MonitorRecord] = []
    prev_rec: MonitorRecord | None = None
    last_state = init
    status = "completed"
    dt_ctrl: float | None = None
    steps = 0

    def emit(dt_for_record: float) -> MonitorRecord:
        nonlocal prev_rec, last_state
        n_vals = inverse_rfft(spec_n, grid.nx)
        c_vals = inverse_rfft(spec_c, grid.nx) if pks else np.zeros_like(n_vals)
        state = PKSState(
            t=t, n=Field(grid, n_vals), c=Field(grid, c_vals),
            chem_prev=chem_hist, dt_prev=dt_prev, negativity_tol=np.inf,
        )
        rec = update_monitors(state, shear, params, prev_rec, dt=dt_for_record, config=mc)
        if pks and float(n_vals.min()) < -neg_tol:
            rec = dataclasses.replace(rec, blowup_flag=FLAG_ABORTED)
        records.append(rec)
        prev_rec = rec
        last_state = state
        return rec

    while True:
        remaining = config.t_end - t
        done = remaining <= end_tol
        chem_now = None
        if not done:
            if pks:
                chem_now, vx, vy = kernel.chem_and_cfl(spec_n, spec_c)
            else:
                vx = vy = 0.0
            limits = []
            if shear.max_speed > 0:
                limits.append(grid.dx / shear.max_speed)
            if vx > 0:
                limits.append(params.A * grid.dx / vx)
            if vy > 0:
                limits.append(params.A * grid.dy / vy)
            raw = config.cfl * min(limits) if limits else np.inf
            cand = float(min(max(raw, config.dt_min), config.dt_max))
            if dt_ctrl is None or cand < dt_ctrl or cand > 1.05 * dt_ctrl:
                dt_ctrl = cand
        elif dt_ctrl is None:
            dt_ctrl = config.dt_init

        if not records:
            rec = emit(dt_ctrl)
            if rec.blowup_flag != 0:
                status = "blowup_detected" if rec.blowup_flag == FLAG_BLOWUP else "aborted"
                break
        if done:
            if records[-1].t < t - end_tol:
                rec = emit(dt_ctrl)
                if rec.blowup_flag != 0:
                    status = "blowup_detected" if rec.blowup_flag == FLAG_BLOWUP else "aborted"
            break
        if dt_ctrl <= config.dt_min:
            rec = emit(dt_ctrl)
            status = "blowup_detected" if rec.blowup_flag != FLAG_ABORTED else "aborted"
            break

        dt_exec = min(dt_ctrl, remaining)
        spec_n, new_c, chem_hist = kernel.advance(spec_n, spec_c, chem_hist, dt_exec, dt_prev, chem_now)
        if pks:
            spec_c = new_c
        finite = np.all(np.isfinite(spec_n)) and (not pks or np.all(np.isfinite(spec_c)))
        if not finite:
            status = "aborted"
            base = prev_rec if prev_rec is not None else None
            if base is not None:
                records.append(dataclasses.replace(
                    base, t=float(t + dt_exec), dt=float(dt_ctrl), blowup_flag=FLAG_ABORTED,
                ))
            break
        dt_prev = dt_exec
        t += dt_exec
        steps += 1
        if steps % mc.stride == 0:
            rec = emit(dt_ctrl)
            if rec.blowup_flag != 0:
                status = "blowup_detected" if rec.blowup_flag == FLAG_BLOWUP else "aborted"
                break

    return RunOutcome(status=status, final_state=last_state, records=records)


def save_checkpoint(path: str, state: PKSState, config_hash: str = "") -> None:
    """Versioned restart dump: time, both fields, and the explicit-term history."""
    has_hist = state.chem_prev is not None
    np.savez(
        path,
        version=np.int64(CHECKPOINT_VERSION),
        t=np.float64(state.t),
        n=state.n.values,
        c=state.c.values,
        chem_prev=state.chem_prev if has_hist else np.zeros((0, 0), dtype=complex),
        dt_prev=np.float64(state.dt_prev if state.dt_prev is not None else np.nan),
        config_hash=np.str_(config_hash),
    )


def load_checkpoint(path: str, grid: Grid) -> tuple[PKSState, str]:
    """Rebuild a state (and its config hash) from a save_checkpoint file."""
    with np.load(path, allow_pickle=False) as data:
        version = int(data["version"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}, expected {CHECKPOINT_VERSION}")
        chem = data["chem_prev"]
        dt_prev = float(data["dt_prev"])
        state = PKSState(
            t=float(data["t"]),
            n=Field(grid, data["n"]),
            c=Field(grid, data["c"]),
            chem_prev=None if chem.size == 0 else chem,
            dt_prev=None if np.isnan(dt_prev) else dt_prev,
            negativity_tol=np.inf,
        )
        return state, str(data["config_hash"])
