"""Configuration, scenario presets, parameter sweeps, and persistent outputs.

Configs are nested mappings with sections grid, model, initial_data, time,
hypo, output. Resolution order: built-in defaults, then the user mapping (file
or scenario preset), then environment overrides (prefix ``PKS_``, sections
separated by double underscores, e.g. ``PKS_MODEL__A=20000``), then explicit
key=value overrides. The fully resolved config is echoed into the output
directory next to the records so every dataset is reproducible.

Scenario presets:

* ``suppression``      strong Couette shear acting on a supercritical blob
* ``blowup_noflow``    the same blob with the flow switched off (collapses)
* ``passive_scalar_ed``  single-mode scalar under u = y (mixing-rate probe)
* ``elliptic_comparison`` suppression with the quasi-static chemical
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
import time as _time

import numpy as np
import yaml

from .grid import Field, Grid, integrate
from .hypo import HypoMultipliers, fit_decay_rate, scaling_slope
from .integrator import RunOutcome, StepConfig, run, save_checkpoint
from .model import CRITICAL_MASS, SHEAR_NAMES, ModelParams, PKSState, build_shear
from .monitors import MonitorConfig, csv_columns

__all__ = [
    "DEFAULT_CONFIG",
    "SCENARIO_NAMES",
    "load_config",
    "resolve_config",
    "build_problem",
    "run_from_config",
    "run_scenario",
    "sweep",
    "write_records",
    "read_records",
]

ENV_PREFIX = "PKS_"

DEFAULT_CONFIG: dict = {
    "grid": {"nx": 64, "ny": 257, "Ly": 8.0},
    "model": {"A": None, "epsilon": 1, "shear": {"name": "couette"}},
    "initial_data": {
        "density": {
            "preset": "gaussian_blob",
            "mass": 1.5 * CRITICAL_MASS,
            "sigma": 1.2,
            "center": [float(np.pi), 0.0],
        },
        "chemical": {"preset": "zero_chemical"},
    },
    "time": {
        "t_end": None,
        "t_end_per_cbrt_A": None,
        "dt_init": 1e-2,
        "dt_min": 1e-9,
        "dt_max": 0.5,
        "cfl": 0.9,
        "blowup_factor": 1e3,
        "negativity_tol": 1e-8,
    },
    "hypo": {"eps_alpha": 0.01, "eps_beta": 0.003, "eps_gamma": 0.01, "k_report": 4},
    "output": {"directory": "out", "stride": 50, "formats": ["csv"]},
}

_SECTION_KEYS = {
    "grid": {"nx", "ny", "Ly"},
    "model": {"A", "epsilon", "shear"},
    "initial_data": {"density", "chemical"},
    "time": {
        "t_end", "t_end_per_cbrt_A", "dt_init", "dt_min", "dt_max",
        "cfl", "blowup_factor", "negativity_tol",
    },
    "hypo": {"eps_alpha", "eps_beta", "eps_gamma", "k_report"},
    "output": {"directory", "stride", "formats"},
}

_DENSITY_KEYS = {
    "gaussian_blob": {"preset", "mass", "sigma", "center"},
    "single_mode": {"preset", "k", "sigma"},
}
_CHEMICAL_KEYS = {
    "zero_chemical": {"preset"},
    "scaled_chemical": {"preset", "q"},
}

# mode, then config fragment layered over the defaults
_SCENARIOS: dict[str, tuple[str, dict]] = {
    "suppression": (
        "pks",
        {
            "model": {"A": 1e4},
            "time": {"t_end_per_cbrt_A": 50.0},
        },
    ),
    "blowup_noflow": (
        "pks",
        {
            "model": {"A": 1.0, "epsilon": 0, "shear": {"name": "couette", "amplitude": 0.0}},
            "initial_data": {"density": {"sigma": 0.5}},
            "time": {
                "t_end": 10.0,
                "blowup_factor": 40.0,
                "negativity_tol": 1e3,
                "cfl": 0.5,
            },
            "output": {"stride": 10},
        },
    ),
    "passive_scalar_ed": (
        "passive_scalar",
        {
            "grid": {"nx": 16, "ny": 513},
            "model": {"A": 1e3},
            "initial_data": {"density": {"preset": "single_mode", "k": 1, "sigma": 2.0}},
            "time": {"t_end_per_cbrt_A": 15.0},
            "output": {"stride": 10},
        },
    ),
    "elliptic_comparison": (
        "pks",
        {
            "model": {"A": 1e4, "epsilon": 0},
            "time": {"t_end_per_cbrt_A": 50.0},
        },
    ),
}

SCENARIO_NAMES = tuple(sorted(_SCENARIOS))


# -- config plumbing -------------------------------------------------------------


def _deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _merge_config(base: dict, over: dict) -> dict:
    """Deep merge, except initial-data subsections replace wholesale on a preset switch."""
    out = _deep_merge(base, over)
    for sec in ("density", "chemical"):
        given = (over.get("initial_data") or {}).get(sec)
        if isinstance(given, dict) and "preset" in given:
            before = ((base.get("initial_data") or {}).get(sec) or {}).get("preset")
            if given["preset"] != before:
                out["initial_data"][sec] = copy.deepcopy(given)
    return out


def _parse_scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError:
        return text


def _set_path(cfg: dict, path: str, value) -> None:
    keys = path.split(".")
    node = cfg
    for key in keys[:-1]:
        nxt = node.setdefault(key, {})
        if not isinstance(nxt, dict):
            raise ValueError(f"override path {path!r} passes through non-section key {key!r}")
        node = nxt
    node[keys[-1]] = value


def _canonical_env_path(path: str) -> str:
    """Restore canonical key spellings (A, Ly, ...) lost to env-name lowercasing."""
    node: dict | None = DEFAULT_CONFIG
    parts = []
    for part in path.split("."):
        match = None
        if isinstance(node, dict):
            match = next((k for k in node if k.lower() == part), None)
        parts.append(part if match is None else match)
        node = node.get(match) if (isinstance(node, dict) and match is not None) else None
    return ".".join(parts)


def _env_overrides() -> dict:
    out: dict = {}
    for name, raw in sorted(os.environ.items()):
        if not name.startswith(ENV_PREFIX) or name == ENV_PREFIX.rstrip("_"):
            continue
        path = _canonical_env_path(name[len(ENV_PREFIX):].lower().replace("__", "."))
        _set_path(out, path, _parse_scalar(raw))
    return out


def _validate(cfg: dict) -> None:
    unknown = set(cfg) - set(_SECTION_KEYS)
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}; valid: {sorted(_SECTION_KEYS)}")
    for section, keys in _SECTION_KEYS.items():
        body = cfg.get(section, {})
        if not isinstance(body, dict):
            raise ValueError(f"config section {section!r} must be a mapping")
        extra = set(body) - keys
        if extra:
            raise ValueError(f"unknown keys in section {section!r}: {sorted(extra)}")

    if cfg["model"]["A"] is None:
        raise ValueError("missing required key: model.A")
    a_val = float(cfg["model"]["A"])
    if not (np.isfinite(a_val) and a_val > 0):
        raise ValueError(f"model.A must be a positive real, got {cfg['model']['A']}")

    shear = cfg["model"]["shear"]
    name = shear.get("name")
    if name not in SHEAR_NAMES:
        raise ValueError(f"unknown shear profile {name!r}; valid names: {', '.join(SHEAR_NAMES)}")

    density = cfg["initial_data"]["density"]
    dpreset = density.get("preset")
    if dpreset not in _DENSITY_KEYS:
        raise ValueError(
            f"unknown density preset {dpreset!r}; valid presets: {', '.join(sorted(_DENSITY_KEYS))}"
        )
    extra = set(density) - _DENSITY_KEYS[dpreset]
    if extra:
        raise ValueError(f"unknown keys for density preset {dpreset!r}: {sorted(extra)}")
    if dpreset == "gaussian_blob" and not float(density.get("mass", 0)) > 0:
        raise ValueError(f"gaussian_blob mass must be positive, got {density.get('mass')}")

    chemical = cfg["initial_data"]["chemical"]
    cpreset = chemical.get("preset")
    if cpreset not in _CHEMICAL_KEYS:
        raise ValueError(
            f"unknown chemical preset {cpreset!r}; valid presets: {', '.join(sorted(_CHEMICAL_KEYS))}"
        )
    extra = set(chemical) - _CHEMICAL_KEYS[cpreset]
    if extra:
        raise ValueError(f"unknown keys for chemical preset {cpreset!r}: {sorted(extra)}")
    if cpreset == "scaled_chemical":
        q = float(chemical.get("q", 0.6))
        if not q > 0.5:
            raise ValueError(f"scaled_chemical requires q > 1/2, got q={q}")

    tsec = cfg["time"]
    if tsec["t_end"] is not None and not float(tsec["t_end"]) > 0:
        raise ValueError(f"time.t_end must be positive, got {tsec['t_end']}")

    out = cfg["output"]
    stride = out["stride"]
    if not (isinstance(stride, int) and stride >= 1):
        raise ValueError(f"output.stride must be a positive integer, got {stride}")
    bad = [f for f in out["formats"] if f != "csv"]
    if bad:
        raise ValueError(f"unsupported output formats: {bad}; supported: ['csv']")


def resolve_config(user: dict | None = None, overrides: dict | None = None) -> dict:
    """Defaults, then user mapping, then PKS_ env vars, then explicit overrides."""
    cfg = _merge_config(DEFAULT_CONFIG, user or {})
    cfg = _merge_config(cfg, _env_overrides())
    cfg = _merge_config(cfg, overrides or {})
    if cfg["time"]["t_end"] is None and cfg["time"]["t_end_per_cbrt_A"] is not None and cfg["model"]["A"]:
        cfg["time"]["t_end"] = float(cfg["time"]["t_end_per_cbrt_A"]) * float(cfg["model"]["A"]) ** (1.0 / 3.0)
    if cfg["time"]["t_end"] is None:
        cfg["time"]["t_end"] = 10.0
    _validate(cfg)
    return cfg


def load_config(path: str) -> dict:
    """Parse a YAML config file and resolve it against defaults and env overrides."""
    with open(path, "r", encoding="utf-8") as fh:
        user = yaml.safe_load(fh)
    if user is None:
        user = {}
    if not isinstance(user, dict):
        raise ValueError(f"config root must be a mapping, got {type(user).__name__} in {path}")
    return resolve_config(user)


def config_hash(cfg: dict) -> str:
    """Stable short digest of a resolved config."""
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# -- problem construction ---------------------------------------------------------


def _gaussian_blob(grid: Grid, mass: float, sigma: float, center) -> Field:
    """Periodized Gaussian (five x-images), rescaled to the exact requested mass."""
    x0, y0 = float(center[0]), float(center[1])
    X = grid.x[:, None]
    Y = grid.y[None, :]
    vals = np.zeros((grid.nx, grid.ny))
    for m in range(-2, 3):
        vals += np.exp(-(((X - x0 - 2.0 * np.pi * m) ** 2) + (Y - y0) ** 2) / (2.0 * sigma**2))
    vals *= mass / integrate(Field(grid, vals))
    return Field(grid, vals)


def _single_mode(grid: Grid, k: int, sigma: float) -> Field:
    vals = np.cos(k * grid.x)[:, None] * np.exp(-grid.y**2 / (2.0 * sigma**2))[None, :]
    return Field(grid, vals)


def build_problem(cfg: dict, mode: str = "pks"):
    """Materialize (grid, shear, params, initial state, step config, monitor config)."""
    gsec = cfg["grid"]
    grid = Grid(int(gsec["nx"]), int(gsec["ny"]), float(gsec["Ly"]))
    msec = cfg["model"]
    params = ModelParams(A=float(msec["A"]), epsilon=int(msec["epsilon"]))
    shear_args = dict(msec["shear"])
    shear = build_shear(grid, shear_args.pop("name"), shear_args)

    density = cfg["initial_data"]["density"]
    if density["preset"] == "gaussian_blob":
        n0 = _gaussian_blob(grid, float(density["mass"]), float(density["sigma"]), density["center"])
    else:
        n0 = _single_mode(grid, int(density.get("k", 1)), float(density.get("sigma", 2.0)))

    chemical = cfg["initial_data"]["chemical"]
    if chemical["preset"] == "zero_chemical" or mode == "passive_scalar":
        c0 = Field(grid, np.zeros((grid.nx, grid.ny)))
    else:
        q = float(chemical.get("q", 0.6))
        amp = params.A ** (-q)
        vals = amp * np.cos(grid.x)[:, None] * np.exp(-grid.y**2 / 2.0)[None, :]
        c0 = Field(grid, vals)

    tsec = cfg["time"]
    neg_tol = np.inf if mode == "passive_scalar" else float(tsec["negativity_tol"])
    state = PKSState(t=0.0, n=n0, c=c0, negativity_tol=neg_tol)
    step_cfg = StepConfig(
        t_end=float(tsec["t_end"]),
        dt_init=float(tsec["dt_init"]),
        dt_min=float(tsec["dt_min"]),
        dt_max=float(tsec["dt_max"]),
        cfl=float(tsec["cfl"]),
        blowup_factor=float(tsec["blowup_factor"]),
    )
    hsec = cfg["hypo"]
    mon_cfg = MonitorConfig(
        stride=int(cfg["output"]["stride"]),
        k_report=int(hsec["k_report"]),
        blowup_factor=step_cfg.blowup_factor,
        dt_min=step_cfg.dt_min,
        eps=HypoMultipliers(float(hsec["eps_alpha"]), float(hsec["eps_beta"]), float(hsec["eps_gamma"])),
    )
    return grid, shear, params, state, step_cfg, mon_cfg


# -- outputs ----------------------------------------------------------------------


def write_records(records, directory: str, k_report: int = 4) -> str:
    """Write records.csv in the fixed column order; header-only when empty."""
    if records:
        k_report = len(records[0].phi_k)
    columns = csv_columns(k_report)
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, "records.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for rec in records:
            row = rec.row()
            if len(row) != len(columns):
                raise ValueError(f"record has {len(row)} values, schema has {len(columns)} columns")
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return path


def read_records(path: str) -> tuple[list[str], np.ndarray]:
    """Read a records.csv back as (column names, row-major float array)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"empty records file: {path}")
        columns = header.split(",")
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(columns):
                raise ValueError(f"row with {len(parts)} values does not match {len(columns)} columns in {path}")
            rows.append([float(p) for p in parts])
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(columns)))
    return columns, data


def _write_outputs(outdir: str, cfg: dict, mode: str, outcome: RunOutcome, wall_s: float) -> None:
    os.makedirs(outdir, exist_ok=True)
    write_records(outcome.records, outdir, int(cfg["hypo"]["k_report"]))
    with open(os.path.join(outdir, "config.yaml"), "w", encoding="utf-8") as fh:
        yaml.safe_dump(cfg, fh, sort_keys=True)
    meta = {
        "status": outcome.status,
        "mode": mode,
        "t_final": outcome.final_state.t,
        "n_records": len(outcome.records),
        "wall_time_s": wall_s,
        "config_hash": config_hash(cfg),
        "columns": csv_columns(int(cfg["hypo"]["k_report"])),
        "time_unit_note": "rescaled time; multiply by 1/A for the unscaled clock",
    }
    with open(os.path.join(outdir, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    save_checkpoint(os.path.join(outdir, "checkpoint.npz"), outcome.final_state, config_hash(cfg))


def run_from_config(cfg: dict, mode: str = "pks", outdir: str | None = None) -> RunOutcome:
    """Build the problem from a resolved config, run it, and persist outputs."""
    grid, shear, params, state, step_cfg, mon_cfg = build_problem(cfg, mode)
    t0 = _time.perf_counter()
    outcome = run(state, shear, params, step_cfg, mode=mode, monitors=mon_cfg)
    wall = _time.perf_counter() - t0
    if outdir is not None:
        _write_outputs(outdir, cfg, mode, outcome, wall)
    return outcome


def run_scenario(name: str, overrides: dict | None = None, outdir: str | None = None) -> RunOutcome:
    """Run a named preset; overrides are dotted-path config fragments."""
    if name not in _SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; valid names: {', '.join(SCENARIO_NAMES)}")
    mode, fragment = _SCENARIOS[name]
    cfg = resolve_config(fragment, overrides)
    return run_from_config(cfg, mode=mode, outdir=outdir)


# -- sweeps -----------------------------------------------------------------------


def _fit_window(cfg: dict) -> tuple[float, float]:
    a_val = float(cfg["model"]["A"])
    return 5.0 * a_val ** (1.0 / 3.0), float(cfg["time"]["t_end"])


def sweep(
    param: str,
    values,
    scenario: str = "passive_scalar_ed",
    overrides: dict | None = None,
    outdir: str | None = None,
    fit_column: str | None = None,
) -> dict:
    """Run the scenario once per parameter value and fit a decay rate per run.

    Sweeping ``model.A`` accepts the value 0 as shorthand for the flow-off
    baseline (A = 1 with shear amplitude 0). With at least three positive
    fitted rates over ``model.A``, the log-log scaling slope is reported.
    """
    values = list(values)
    if len(values) < 2:
        raise ValueError(f"a sweep needs at least 2 values, got {len(values)}")
    if scenario not in _SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; valid names: {', '.join(SCENARIO_NAMES)}")
    mode, fragment = _SCENARIOS[scenario]
    if fit_column is None:
        fit_column = "phi_k1" if mode == "passive_scalar" else "F_total"

    rows = []
    for value in values:
        point = copy.deepcopy(overrides or {})
        if param == "model.A" and float(value) == 0.0:
            _set_path(point, "model.A", 1.0)
            _set_path(point, "model.shear.amplitude", 0.0)
        else:
            _set_path(point, param, value)
        cfg = resolve_config(fragment, point)
        sub = None
        if outdir is not None:
            sub = os.path.join(outdir, f"{param.replace('.', '_')}={value:g}")
        outcome = run_from_config(cfg, mode=mode, outdir=sub)

        rate = float("nan")
        r2 = float("nan")
        if outcome.status == "completed":
            columns = csv_columns(int(cfg["hypo"]["k_report"]))
            if fit_column not in columns:
                raise ValueError(f"fit column {fit_column!r} not in schema; available: {columns}")
            idx = columns.index(fit_column)
            data = np.array([rec.row() for rec in outcome.records])
            try:
                fit = fit_decay_rate(data[:, 0], data[:, idx], window=_fit_window(cfg))
                rate, r2 = fit.rate, fit.r_squared
            except ValueError:
                pass
        rows.append({"value": float(value), "status": outcome.status, "rate": rate, "r_squared": r2})

    slope = float("nan")
    if param == "model.A":
        good = [(r["value"], r["rate"]) for r in rows if np.isfinite(r["rate"]) and r["rate"] > 0 and r["value"] > 0]
        if len(good) >= 3:
            slope = scaling_slope(np.array([g[0] for g in good]), np.array([g[1] for g in good]))

    table = {"param": param, "fit_column": fit_column, "rows": rows, "slope": slope}
    if outdir is not None:
        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "sweep.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("value,status,rate,r_squared\n")
            for r in rows:
                fh.write(f"{r['value']:.17g},{r['status']},{r['rate']:.17g},{r['r_squared']:.17g}\n")
        with open(os.path.join(outdir, "sweep_meta.json"), "w", encoding="utf-8") as fh:
            json.dump(table, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return table
