"""Shared builders for synthetic records files."""

import numpy as np
import pytest

SCHEMA = [
    "t", "dt", "mass", "n_linf", "n0_l2", "n0_h1", "nneq_l2", "gradc_neq_l2",
    "gradc_neq_linf", "dyc0_linf", "F_total", "F_n", "F_dyc", "F_dxc", "F_Akc",
    "phi_k1", "phi_k2", "phi_k3", "phi_k4", "h1_accum", "nash_ratio", "hk_ratio",
    "blowup_flag",
]


def write_csv(path, columns, rows):
    lines = [",".join(columns)]
    lines += [",".join(repr(float(v)) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def make_run_csv(path, n=40, rate=0.1, t_end=20.0, blowup_at=None):
    """Records file with exponentially decaying monitors and optional blow-up."""
    t = np.linspace(0.0, t_end, n)
    rows = []
    for i, ti in enumerate(t):
        flag = 1.0 if blowup_at is not None and i >= blowup_at else 0.0
        linf = 3.0 * np.exp(0.08 * ti) if blowup_at is not None else 3.0
        row = {
            "t": ti,
            "dt": 0.01,
            "mass": 37.699,
            "n_linf": linf,
            "n0_l2": 4.0,
            "n0_h1": 5.0,
            "nneq_l2": 8.0 * np.exp(-rate * ti / 2.0),
            "gradc_neq_l2": 2.0 * np.exp(-rate * ti / 2.0),
            "gradc_neq_linf": 1.0,
            "dyc0_linf": 0.5,
            "F_total": 200.0 * np.exp(-rate * ti),
            "F_n": 90.0 * np.exp(-rate * ti),
            "F_dyc": 60.0 * np.exp(-rate * ti),
            "F_dxc": 30.0 * np.exp(-rate * ti),
            "F_Akc": 20.0 * np.exp(-rate * ti),
            "phi_k1": 50.0 * np.exp(-rate * ti),
            "phi_k2": 25.0 * np.exp(-rate * ti),
            "phi_k3": 12.0 * np.exp(-rate * ti),
            "phi_k4": 6.0 * np.exp(-rate * ti),
            "h1_accum": 0.1 * ti,
            "nash_ratio": float("nan") if i == 0 else 0.72,
            "hk_ratio": 0.9,
            "blowup_flag": flag,
        }
        rows.append([row[name] for name in SCHEMA])
        if flag:
            break
    return write_csv(path, SCHEMA, rows)


@pytest.fixture
def decay_csv(tmp_path):
    return make_run_csv(tmp_path / "records.csv", rate=0.1)


@pytest.fixture
def blowup_csv(tmp_path):
    rundir = tmp_path / "blow"
    rundir.mkdir()
    return make_run_csv(rundir / "records.csv", blowup_at=25)
