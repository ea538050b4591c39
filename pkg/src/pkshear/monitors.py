"""Run-time diagnostics computed on state snapshots.

Each record tracks mass, zero-mode and fluctuation norms, the weighted energy
functional and its components, two inequality ratios used as discretization
sanity monitors, a running dissipation budget

    h1_accum(t) = (1/A) int_0^t ||grad n_neq||_2^2 ds   (trapezoid in time),

and a blow-up flag. Monitors are pure observers: they never feed back into the
dynamics. Zero-mode profile norms (n0_l2, n0_h1, dyc0_linf, the Nash and
heat-kernel ratios) are one-dimensional integrals in y; fluctuation norms
(nneq_l2, gradc_neq_l2) are full-domain L^2 norms, so they compare directly
with the weighted functional.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, ddx, ddy_values, lp_norm, mode_split
from .hypo import HypoMultipliers, functional_F
from .model import ModelParams, PKSState, ShearProfile

__all__ = [
    "FLAG_NONE",
    "FLAG_BLOWUP",
    "FLAG_ABORTED",
    "MonitorConfig",
    "MonitorRecord",
    "csv_columns",
    "update_monitors",
    "nash_ratio",
    "heat_kernel_ratio",
    "blowup_check",
]

FLAG_NONE = 0
FLAG_BLOWUP = 1
FLAG_ABORTED = 2


@dataclass(frozen=True)
class MonitorConfig:
    """Recording cadence and blow-up thresholds."""

    stride: int = 50
    k_report: int = 4
    blowup_factor: float = 1e3
    dt_min: float = 1e-9
    eps: HypoMultipliers = HypoMultipliers()

    def __post_init__(self) -> None:
        if not (isinstance(self.stride, int) and self.stride >= 1):
            raise ValueError(f"stride must be a positive integer, got {self.stride}")
        if not (isinstance(self.k_report, int) and self.k_report >= 1):
            raise ValueError(f"k_report must be a positive integer, got {self.k_report}")
        if not (np.isfinite(self.blowup_factor) and self.blowup_factor > 1):
            raise ValueError(f"blowup_factor must exceed 1, got {self.blowup_factor}")
        if not (np.isfinite(self.dt_min) and self.dt_min > 0):
            raise ValueError(f"dt_min must be a positive real, got {self.dt_min}")


@dataclass(frozen=True)
class MonitorRecord:
    """Diagnostics of one snapshot plus the running quantities they advance."""

    t: float
    dt: float
    mass: float
    n_linf: float
    n0_l2: float
    n0_h1: float
    nneq_l2: float
    gradc_neq_l2: float
    gradc_neq_linf: float
    dyc0_linf: float
    F_total: float
    F_n: float
    F_dyc: float
    F_dxc: float
    F_Akc: float
    phi_k: tuple[float, ...]
    h1_accum: float
    nash_ratio: float
    hk_ratio: float
    blowup_flag: int
    # carried forward between records, not part of the CSV schema
    h1_integrand: float
    sup_n0_l2: float
    hk_init_dyc0_l4: float
    n_linf_init: float

    def row(self) -> list[float]:
        """Values in the CSV column order (blowup_flag as a numeric code)."""
        return [
            self.t, self.dt, self.mass, self.n_linf, self.n0_l2, self.n0_h1,
            self.nneq_l2, self.gradc_neq_l2, self.gradc_neq_linf, self.dyc0_linf,
            self.F_total, self.F_n, self.F_dyc, self.F_dxc, self.F_Akc,
            *self.phi_k, self.h1_accum, self.nash_ratio, self.hk_ratio,
            float(self.blowup_flag),
        ]


def csv_columns(k_report: int) -> list[str]:
    """Column names matching MonitorRecord.row for a given per-mode count."""
    if k_report < 1:
        raise ValueError(f"k_report must be a positive integer, got {k_report}")
    return [
        "t", "dt", "mass", "n_linf", "n0_l2", "n0_h1",
        "nneq_l2", "gradc_neq_l2", "gradc_neq_linf", "dyc0_linf",
        "F_total", "F_n", "F_dyc", "F_dxc", "F_Akc",
        *[f"phi_k{k}" for k in range(1, k_report + 1)],
        "h1_accum", "nash_ratio", "hk_ratio", "blowup_flag",
    ]


def _profile_lp(profile: np.ndarray, wy: np.ndarray, p: float) -> float:
    """Trapezoid L^p norm of a y-profile."""
    if p == np.inf:
        return float(np.max(np.abs(profile)))
    return float((wy @ np.abs(profile) ** p) ** (1.0 / p))


def _l2_2d(values: np.ndarray, grid: Grid) -> float:
    """Full-domain L^2 norm of raw (nx, ny) values."""
    return float(np.sqrt(grid.dx * ((values * values).sum(axis=0) @ grid.wy)))


def nash_ratio(n0: np.ndarray, grid: Grid) -> float:
    """Profile ratio ||n0||_2 / (||n0||_1^{2/3} ||d_y n0||_2^{1/3}).

    Scale- and dilation-invariant; stays below 1 for resolved profiles (the
    sharp constant of the underlying interpolation inequality on the line is
    below 1 in this normalization). Returns NaN for an identically zero or
    derivative-free profile, where the ratio is undefined.
    """
    n0 = np.asarray(n0, dtype=float)
    if n0.shape != (grid.ny,):
        raise ValueError(f"profile must have shape ({grid.ny},), got {n0.shape}")
    l2 = _profile_lp(n0, grid.wy, 2)
    if l2 == 0.0:
        return float("nan")
    l1 = _profile_lp(n0, grid.wy, 1)
    dh = _profile_lp(ddy_values(n0, grid.dy, order=1), grid.wy, 2)
    if dh == 0.0 or l1 == 0.0:
        return float("nan")
    return l2 / (l1 ** (2.0 / 3.0) * dh ** (1.0 / 3.0))


def heat_kernel_ratio(records: list[MonitorRecord]) -> float:
    """Ratio ||d_y c0(t)||_4 / (sup_tau ||n0(tau)||_2 + ||d_y c0(0)||_4) at the last record."""
    if not records:
        raise ValueError("insufficient data: empty run history")
    return records[-1].hk_ratio


def blowup_check(record: MonitorRecord, config: MonitorConfig) -> int:
    """Blow-up flag: density growth past threshold, step-size underflow, or non-finite data."""
    if not (np.isfinite(record.n_linf) and np.isfinite(record.mass)):
        return FLAG_ABORTED
    if record.n_linf >= config.blowup_factor * record.n_linf_init and record.n_linf_init > 0:
        return FLAG_BLOWUP
    if record.dt <= config.dt_min:
        return FLAG_BLOWUP
    return FLAG_NONE


def update_monitors(
    state: PKSState,
    shear: ShearProfile,
    params: ModelParams,
    prev: MonitorRecord | None = None,
    dt: float = 0.0,
    config: MonitorConfig = MonitorConfig(),
) -> MonitorRecord:
    """Diagnostics of one snapshot, advancing the running quantities from prev.

    ``dt`` is the controller step size at this snapshot (recorded, and fed to
    the underflow part of the blow-up check). Pass ``prev=None`` for the
    initial record; it seeds the dissipation budget, the running supremum of
    the zero-mode density norm, and the blow-up reference amplitude.
    """
    grid = state.grid
    if config.k_report > grid.nx // 2:
        raise ValueError(
            f"k_report={config.k_report} exceeds the largest resolved wavenumber {grid.nx // 2}"
        )
    wy, dy = grid.wy, grid.dy

    n0, n_neq = mode_split(state.n)
    c0, c_neq = mode_split(state.c)

    mass = float(grid.dx * (state.n.values.sum(axis=0) @ wy))
    n_linf = lp_norm(state.n, np.inf)
    n0_l2 = _profile_lp(n0, wy, 2)
    n0_h1 = _profile_lp(ddy_values(n0, dy, order=1), wy, 2)
    nneq_l2 = lp_norm(n_neq, 2)

    dxc = ddx(state.c).values
    dyc_neq = ddy_values(c_neq.values, dy, order=1)
    dyc0 = ddy_values(c0, dy, order=1)
    gradc_neq_l2 = float(np.hypot(_l2_2d(dxc, grid), _l2_2d(dyc_neq, grid)))
    gradc_neq_linf = float(np.max(np.hypot(dxc, dyc_neq)))
    dyc0_linf = float(np.max(np.abs(dyc0)))

    F = functional_F(state, shear, params, config.eps)
    phi = tuple(float(v) for v in F["phi_n"][: config.k_report])

    dxn = ddx(state.n).values
    dyn_neq = ddy_values(n_neq.values, dy, order=1)
    gradn_sq = _l2_2d(dxn, grid) ** 2 + _l2_2d(dyn_neq, grid) ** 2
    h1_integrand = gradn_sq / params.A
    if prev is None:
        h1_accum = 0.0
        sup_n0 = n0_l2
        hk_init = _profile_lp(dyc0, wy, 4)
        n_linf_init = n_linf
    else:
        h1_accum = prev.h1_accum + 0.5 * (prev.h1_integrand + h1_integrand) * (state.t - prev.t)
        sup_n0 = max(prev.sup_n0_l2, n0_l2)
        hk_init = prev.hk_init_dyc0_l4
        n_linf_init = prev.n_linf_init

    dyc0_l4 = _profile_lp(dyc0, wy, 4)
    denom = sup_n0 + hk_init
    if dyc0_l4 == 0.0:
        hk = 0.0
    elif denom == 0.0:
        hk = float("nan")
    else:
        hk = dyc0_l4 / denom

    record = MonitorRecord(
        t=float(state.t), dt=float(dt), mass=mass, n_linf=n_linf,
        n0_l2=n0_l2, n0_h1=n0_h1, nneq_l2=nneq_l2,
        gradc_neq_l2=gradc_neq_l2, gradc_neq_linf=gradc_neq_linf,
        dyc0_linf=dyc0_linf,
        F_total=F["total"], F_n=F["n"], F_dyc=F["dyc"], F_dxc=F["dxc"], F_Akc=F["Akc"],
        phi_k=phi, h1_accum=h1_accum,
        nash_ratio=nash_ratio(n0, grid), hk_ratio=hk,
        blowup_flag=FLAG_NONE,
        h1_integrand=h1_integrand, sup_n0_l2=sup_n0,
        hk_init_dyc0_l4=hk_init, n_linf_init=n_linf_init,
    )
    flag = blowup_check(record, config)
    if flag == FLAG_NONE:
        return record
    return _with_flag(record, flag)


def _with_flag(record: MonitorRecord, flag: int) -> MonitorRecord:
    fields = {k: getattr(record, k) for k in record.__dataclass_fields__}
    fields["blowup_flag"] = flag
    return MonitorRecord(**fields)
