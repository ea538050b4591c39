"""Decay-curve and run-comparison figures from records files.

Rendering is deterministic: fixed styles and sizes, a pinned PNG metadata
block, and no timestamps, so the same inputs produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)
import numpy as np  # noqa: E402

from .records import read_records  # noqa: E402

__all__ = ["PlotSpec", "fit_rate", "render_decay_plot", "render_comparison_report"]

_PNG_METADATA = {"Software": "pks-plot"}
_FIGSIZE = (7.0, 4.5)
_DPI = 120


@dataclass(frozen=True)
class PlotSpec:
    """What to draw: inputs, columns, scale and overlay switches, output path."""

    inputs: tuple[str, ...]
    columns: tuple[str, ...]
    out: str
    log_scale: bool = True
    overlay_fit: bool = True

    def validate_columns(self, available: list[str], source: str) -> None:
        missing = [c for c in self.columns if c not in available]
        if missing:
            raise ValueError(
                f"column(s) {', '.join(missing)} not present in {source}; "
                f"available columns: {', '.join(available)}"
            )


def fit_rate(
    t: np.ndarray, values: np.ndarray, window: tuple[float, float] | None = None
) -> tuple[float, float]:
    """Exponential decay rate and log-intercept from a least-squares line.

    Fits log(values) = intercept - rate * t over the finite, strictly positive
    samples (restricted to ``window`` when given) and returns (rate, intercept).
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = np.isfinite(t) & np.isfinite(values) & (values > 0)
    if window is not None:
        lo, hi = float(window[0]), float(window[1])
        if not lo < hi:
            raise ValueError(f"fit window must satisfy lo < hi, got ({lo}, {hi})")
        mask &= (t >= lo) & (t <= hi)
    if int(mask.sum()) < 2:
        raise ValueError(
            f"need at least 2 positive finite samples to fit a rate, got {int(mask.sum())}"
        )
    slope, intercept = np.polyfit(t[mask], np.log(values[mask]), 1)
    return float(-slope), float(intercept)


def render_decay_plot(
    csv: str,
    columns: list[str] | tuple[str, ...],
    fit_window: tuple[float, float] | None = None,
    out: str = "decay.png",
) -> str:
    """Semilog plot of the chosen columns against t with fitted-rate overlays.

    Each curve's legend entry carries its fitted decay rate. Raises before
    any file is written when the CSV has no data rows, a column is missing,
    or a column has no positive samples to place on the log scale.
    """
    cols, data = read_records(csv)
    if data.shape[0] == 0:
        raise ValueError(f"records file {csv} has no data rows; nothing to plot")
    spec = PlotSpec(inputs=(csv,), columns=tuple(columns), out=out)
    spec.validate_columns(cols, csv)
    if "t" not in cols:
        raise ValueError(f"records file {csv} has no t column; available columns: {', '.join(cols)}")
    t = data[:, cols.index("t")]

    curves = []
    for name in spec.columns:
        v = data[:, cols.index(name)]
        mask = np.isfinite(v) & (v > 0)
        if not mask.any():
            raise ValueError(
                f"column {name!r} has no positive finite samples; cannot draw it on a log scale"
            )
        rate, intercept = fit_rate(t, v, fit_window)
        curves.append((name, t[mask], v[mask], rate, intercept))

    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    for name, tm, vm, rate, intercept in curves:
        (line,) = ax.semilogy(tm, vm, label=f"{name} (λ = {rate:.4g})")
        if fit_window is not None:
            lo, hi = fit_window
            tw = tm[(tm >= lo) & (tm <= hi)]
        else:
            tw = tm
        ax.semilogy(
            tw, np.exp(intercept - rate * tw), "--", lw=1.0, color=line.get_color()
        )
    ax.set_xlabel("t")
    ax.set_ylabel("value")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(out, metadata=_PNG_METADATA)
    plt.close(fig)
    return out


def render_comparison_report(
    csv_list: list[str] | tuple[str, ...],
    labels: list[str] | tuple[str, ...] | None = None,
    out: str = "comparison.png",
) -> str:
    """Two stacked panels (n_linf and nneq_l2 against t), one curve per run.

    Runs whose blow-up flag trips are truncated at the first flagged record
    and marked there. All inputs must share one schema; fewer than two inputs
    is a validation error.
    """
    if len(csv_list) < 2:
        raise ValueError(f"comparison needs at least 2 runs, got {len(csv_list)}")
    if labels is not None and len(labels) != len(csv_list):
        raise ValueError(f"got {len(labels)} labels for {len(csv_list)} runs")
    parsed = [read_records(path) for path in csv_list]
    base_cols = parsed[0][0]
    for path, (cols, _) in zip(csv_list[1:], parsed[1:]):
        if cols != base_cols:
            raise ValueError(
                f"schema mismatch: {csv_list[0]} and {path} carry different columns"
            )
    spec = PlotSpec(
        inputs=tuple(csv_list),
        columns=("t", "n_linf", "nneq_l2", "blowup_flag"),
        out=out,
    )
    spec.validate_columns(base_cols, csv_list[0])
    if labels is None:
        labels = [_default_label(path, i) for i, path in enumerate(csv_list)]

    fig, (ax_top, ax_bot) = plt.subplots(
        2, 1, figsize=(_FIGSIZE[0], 2 * _FIGSIZE[1] * 0.75), dpi=_DPI, sharex=True
    )
    idx_t = base_cols.index("t")
    idx_linf = base_cols.index("n_linf")
    idx_neq = base_cols.index("nneq_l2")
    idx_flag = base_cols.index("blowup_flag")
    for label, (_, data) in zip(labels, parsed):
        if data.shape[0] == 0:
            raise ValueError(f"run {label!r} has no data rows; nothing to compare")
        t = data[:, idx_t]
        flags = data[:, idx_flag]
        tripped = np.nonzero(flags != 0)[0]
        stop = tripped[0] + 1 if tripped.size else t.size
        for ax, idx in ((ax_top, idx_linf), (ax_bot, idx_neq)):
            v = data[:stop, idx]
            vm = np.where(np.isfinite(v) & (v > 0), v, np.nan)
            (line,) = ax.semilogy(t[:stop], vm, label=label)
            if tripped.size:
                ax.semilogy(
                    t[stop - 1], vm[-1], "x", ms=9.0, mew=2.0, color=line.get_color()
                )
    ax_top.set_ylabel("n_linf")
    ax_bot.set_ylabel("nneq_l2")
    ax_bot.set_xlabel("t")
    ax_top.legend(loc="best")
    fig.tight_layout()
    fig.savefig(out, metadata=_PNG_METADATA)
    plt.close(fig)
    return out


def _default_label(path: str, position: int) -> str:
    import os

    parent = os.path.basename(os.path.dirname(path))
    if parent:
        return parent
    stem = os.path.splitext(os.path.basename(path))[0]
    return stem or f"run-{position + 1}"
