"""Config-file driven experiments: simulate, verify, sweep.

Configs are flat INI files with one section per concern (model, grid,
initial, solver, verify, output, sweep); every key is documented in
docs/formats.md.  Outputs are deterministic: fixed column orders, floats
printed with 17 significant digits, and any random sampling seeded from
the config.
"""

from __future__ import annotations

import configparser
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .models import ModelSpec, PhiFamily, model_from_id, ModelError
from .solver import Grid1D, SolverConfig, Trajectory, run
from .analysis import (
    front_report,
    super_indicator,
    sub_semicircle,
    verify_profile_ordering,
    SCHEME_TOL_FACTOR,
)

__all__ = ["ExperimentConfig", "ConfigError", "load_config", "simulate",
           "verify", "sweep", "format_float", "write_trajectory_csv"]


class ConfigError(ValueError):
    """Malformed configuration; names the offending field."""

    def __init__(self, fieldname: str, message: str):
        super().__init__(f"[{fieldname}] {message}")
        self.fieldname = fieldname


def format_float(x: float) -> str:
    return f"{x:.17g}"


@dataclass(frozen=True)
class InitialSpec:
    kind: str
    params: dict


@dataclass(frozen=True)
class VerifySpec:
    suites: tuple
    edge_threshold: float = 1e-8
    edge_speed_band: tuple = (0.95, 1.05)
    expected_edge_speed: float | None = None
    jump_speed_rtol: float = 0.07
    min_last_gap: float = 0.1
    sub_R: float = 0.5
    sub_c: float = 0.9
    sub_center: float = 0.0
    contraction_factor: float = 1.1
    tol_factor: float = SCHEME_TOL_FACTOR


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    grid: Grid1D
    initial: InitialSpec
    solver: SolverConfig
    verify: VerifySpec
    output_dir: Path
    seed: int
    sweep_parameter: str | None = None
    sweep_values: tuple = ()
    sweep_mode: str = "simulate"
    name: str = "experiment"


def _get(cp, section, key, conv, default=None, required=False):
    if not cp.has_option(section, key):
        if required:
            raise ConfigError(f"{section}.{key}", "missing required key")
        return default
    raw = cp.get(section, key).strip()
    if raw == "":
        return default
    try:
        return conv(raw)
    except (ValueError, ModelError) as exc:
        raise ConfigError(f"{section}.{key}", f"bad value {raw!r}: {exc}")


def _parse_times(raw: str) -> tuple:
    raw = raw.strip()
    if ":" in raw and "," not in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise ValueError("range syntax is start:stop:step")
        a, b, h = (float(p) for p in parts)
        n = int(round((b - a) / h))
        return tuple(round(a + k * h, 12) for k in range(n + 1))
    return tuple(float(p) for p in raw.split(","))


def _parse_floats(raw: str) -> tuple:
    return tuple(float(p) for p in raw.split(","))


def _build_model(cp) -> ModelSpec:
    mid = _get(cp, "model", "id", str, required=True)
    s = _get(cp, "model", "s", float, 1.0)
    L = _get(cp, "model", "L", float, 1.0)
    phi_kind = _get(cp, "model", "phi", str, "linear")
    if phi_kind == "linear":
        phi = PhiFamily.linear_speed(s)
    elif phi_kind == "power":
        m = _get(cp, "model", "phi_m", float, required=True)
        scale = _get(cp, "model", "phi_scale", float, 1.0)
        phi = PhiFamily.power(m, scale)
    else:
        raise ConfigError("model.phi", f"unknown phi kind {phi_kind!r}")
    try:
        return model_from_id(mid, s=s, phi=phi, L=L)
    except ModelError as exc:
        raise ConfigError("model.id", str(exc))


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError("config", f"file not found: {path}")
    cp = configparser.ConfigParser()
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError("config", f"parse error: {exc}")

    model = _build_model(cp)
    grid = Grid1D(
        x_min=_get(cp, "grid", "x_min", float, required=True),
        x_max=_get(cp, "grid", "x_max", float, required=True),
        n_cells=_get(cp, "grid", "n_cells", int, required=True),
    )
    kind = _get(cp, "initial", "kind", str, required=True)
    if kind not in ("box", "semicircle", "gaussian", "staircase", "custom"):
        raise ConfigError("initial.kind", f"unknown datum kind {kind!r}")
    params = {}
    if cp.has_section("initial"):
        for key in cp.options("initial"):
            if key != "kind":
                params[key] = cp.get("initial", key)
    initial = InitialSpec(kind=kind, params=params)

    solver = SolverConfig(
        cfl=_get(cp, "solver", "cfl", float, 0.4),
        u_floor=_get(cp, "solver", "u_floor", float, 1e-30),
        end_time=_get(cp, "solver", "end_time", float, required=True),
        snapshot_times=_get(cp, "solver", "snapshots", _parse_times, ()),
        average=_get(cp, "solver", "average", str, "arithmetic"),
    )

    suites = _get(cp, "verify", "suites", lambda r: tuple(p.strip() for p in r.split(",")), ())
    for su in suites:
        if su not in ("edges", "jumps", "super", "sub", "contraction"):
            raise ConfigError("verify.suites", f"unknown suite {su!r}")
    verify_spec = VerifySpec(
        suites=suites,
        edge_threshold=_get(cp, "verify", "edge_threshold", float, 1e-8),
        edge_speed_band=_get(cp, "verify", "edge_speed_band", _parse_floats, (0.95, 1.05)),
        expected_edge_speed=_get(cp, "verify", "expected_edge_speed", float, None),
        jump_speed_rtol=_get(cp, "verify", "jump_speed_rtol", float, 0.07),
        min_last_gap=_get(cp, "verify", "min_last_gap", float, 0.1),
        sub_R=_get(cp, "verify", "sub_r", float, 0.5),
        sub_c=_get(cp, "verify", "sub_c", float, 0.9),
        sub_center=_get(cp, "verify", "sub_center", float, 0.0),
        contraction_factor=_get(cp, "verify", "contraction_factor", float, 1.1),
    )

    outdir = Path(_get(cp, "output", "directory", str, "out"))
    seed = _get(cp, "output", "seed", int, 0)

    sweep_param = _get(cp, "sweep", "parameter", str, None)
    sweep_values = _get(cp, "sweep", "values", _parse_floats, ())
    sweep_mode = _get(cp, "sweep", "mode", str, "simulate")
    if sweep_mode not in ("simulate", "verify"):
        raise ConfigError("sweep.mode", f"unknown mode {sweep_mode!r}")

    return ExperimentConfig(model=model, grid=grid, initial=initial,
                            solver=solver, verify=verify_spec,
                            output_dir=outdir, seed=seed,
                            sweep_parameter=sweep_param,
                            sweep_values=sweep_values, sweep_mode=sweep_mode,
                            name=path.stem)


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------

def build_initial(cfg: ExperimentConfig) -> np.ndarray:
    """Cell values of the configured initial datum (cell-center sampling)."""
    x = cfg.grid.centers()
    kind = cfg.initial.kind
    p = cfg.initial.params

    def fget(key, default=None, required=False):
        if key not in p:
            if required:
                raise ConfigError(f"initial.{key}", "missing required key")
            return default
        try:
            return float(p[key])
        except ValueError:
            raise ConfigError(f"initial.{key}", f"bad value {p[key]!r}")

    if kind == "box":
        h = fget("height", 1.0)
        a = fget("x_left", required=True)
        b = fget("x_right", required=True)
        return np.where((x >= a) & (x <= b), h, 0.0)
    if kind == "semicircle":
        c = fget("center", 0.0)
        R = fget("radius", required=True)
        scale = fget("scale", 1.0)
        return scale * np.sqrt(np.maximum(R * R - (x - c) ** 2, 0.0))
    if kind == "gaussian":
        c = fget("center", 0.0)
        sig = fget("sigma", required=True)
        amp = fget("amplitude", 1.0)
        u = amp * np.exp(-0.5 * ((x - c) / sig) ** 2)
        u[u < 1e-12 * amp] = 0.0  # compact support for the margin check
        return u
    if kind == "staircase":
        if "levels" not in p or "breaks" not in p:
            raise ConfigError("initial.levels", "staircase needs levels and breaks")
        levels = [float(v) for v in p["levels"].split(",")]
        breaks = [float(v) for v in p["breaks"].split(",")]
        if len(breaks) != len(levels) + 1:
            raise ConfigError("initial.breaks", "need len(levels)+1 break points")
        u = np.zeros_like(x)
        for lev, a, b in zip(levels, breaks[:-1], breaks[1:]):
            u[(x >= a) & (x < b)] = lev
        return u
    # custom
    if "values" not in p:
        raise ConfigError("initial.values", "custom datum needs values")
    vals = np.array([float(v) for v in p["values"].split(",")])
    if vals.shape != x.shape:
        raise ConfigError("initial.values",
                          f"need {x.size} values, got {vals.size}")
    return vals


# ---------------------------------------------------------------------------
# outputs
# ---------------------------------------------------------------------------

def write_trajectory_csv(traj: Trajectory, path: Path) -> None:
    """One block of rows per snapshot under a single t,x,u header."""
    x = traj.grid.centers()
    with open(path, "w", newline="") as fh:
        fh.write("t,x,u\n")
        for snap in traj.snapshots:
            ts = format_float(snap.t)
            for xi, ui in zip(x, snap.u):
                fh.write(f"{ts},{format_float(xi)},{format_float(ui)}\n")


def simulate(cfg: ExperimentConfig, out_dir: Path | None = None) -> dict:
    out = Path(out_dir) if out_dir is not None else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    u0 = build_initial(cfg)
    traj = run(cfg.model, cfg.grid, u0, cfg.solver)
    csv_path = out / f"{cfg.name}_trajectory.csv"
    write_trajectory_csv(traj, csv_path)
    meta = traj.metadata()
    meta["seed"] = cfg.seed
    meta_path = out / f"{cfg.name}_metadata.json"
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"trajectory": str(csv_path), "metadata": str(meta_path),
            "mass_drift": meta["mass_drift"]}


def _verify_trajectory(cfg: ExperimentConfig, traj: Trajectory) -> dict:
    vs = cfg.verify
    results: dict[str, dict] = {}

    if "edges" in vs.suites or "jumps" in vs.suites:
        rep = front_report(
            traj,
            edge_threshold_rel=vs.edge_threshold,
            speed_band=vs.edge_speed_band,
            jump_speed_rtol=vs.jump_speed_rtol,
            min_last_gap=vs.min_last_gap,
            expected_edge_speed=vs.expected_edge_speed,
        )
        if "edges" in vs.suites:
            results["edges"] = {
                "pass": rep.verdicts["right_edge_speed_in_band"]
                and rep.verdicts["left_edge_speed_in_band"]
                and rep.verdicts["edge_speed_bounded"],
                "speed_right": rep.edges.speed_right,
                "speed_left": rep.edges.speed_left,
            }
        if "jumps" in vs.suites:
            results["jumps"] = {
                "pass": rep.verdicts["jump_persists"] and rep.verdicts["jump_speeds_match"],
                "tracks": [t.to_dict() for t in rep.jumps],
            }
        results["_front_report"] = json.loads(rep.to_json(indent=None))

    if "super" in vs.suites:
        u0 = traj.snapshots[0].u
        x = traj.grid.centers()
        nz = np.nonzero(u0 > 0.0)[0]
        beta = float(np.max(u0))
        interval = (float(x[nz[0]]), float(x[nz[-1]])) if nz.size else (0.0, 1.0)
        prof = super_indicator(traj.model, beta, interval)
        verdicts = verify_profile_ordering(traj, prof, tol_factor=vs.tol_factor)
        results["super"] = {"pass": all(v.ok for v in verdicts),
                            "theta": prof.params["theta"],
                            "series": [v.to_dict() for v in verdicts]}

    if "sub" in vs.suites:
        prof = sub_semicircle(traj.model, vs.sub_R, vs.sub_c,
                              t_max=traj.cfg.end_time)
        if vs.sub_center != 0.0:
            base = prof

            def shifted(t, xx, _b=base):
                return _b.evaluator(t, xx - vs.sub_center)

            prof = replace(base, evaluator=shifted)
        verdicts = verify_profile_ordering(traj, prof, tol_factor=vs.tol_factor)
        results["sub"] = {"pass": all(v.ok for v in verdicts),
                          "A": prof.A,
                          "series": [v.to_dict() for v in verdicts]}

    if "contraction" in vs.suites:
        f = vs.contraction_factor
        u0 = traj.snapshots[0].u
        # widen the support by f and raise the height by f
        u0_big = f * build_initial(_scaled_initial(cfg, f))
        traj2 = run(cfg.model, cfg.grid, u0_big, cfg.solver)
        dx = traj.grid.dx
        tol = vs.tol_factor * dx * max(float(np.max(u0)), 1.0)
        series = []
        ok = True
        prev_ab = None
        prev_ba = None
        for s1, s2 in zip(traj.snapshots, traj2.snapshots):
            d_ab = float(np.sum(np.maximum(s1.u - s2.u, 0.0))) * dx
            d_ba = float(np.sum(np.maximum(s2.u - s1.u, 0.0))) * dx
            if prev_ab is not None and (d_ab > prev_ab + tol or d_ba > prev_ba + tol):
                ok = False
            prev_ab, prev_ba = d_ab, d_ba
            series.append({"t": s1.t, "excess_small_over_big": d_ab,
                           "excess_big_over_small": d_ba})
        results["contraction"] = {"pass": ok, "series": series}

    results["all_pass"] = all(v["pass"] for k, v in results.items()
                              if isinstance(v, dict) and "pass" in v)
    return results


def _scaled_initial(cfg: ExperimentConfig, f: float) -> ExperimentConfig:
    """Initial spec with spatial extent scaled by f (box and staircase)."""
    p = dict(cfg.initial.params)
    if cfg.initial.kind == "box":
        for key in ("x_left", "x_right"):
            if key in p:
                p[key] = str(float(p[key]) * f)
    elif cfg.initial.kind == "semicircle":
        if "radius" in p:
            p["radius"] = str(float(p["radius"]) * f)
    elif cfg.initial.kind == "staircase":
        p["breaks"] = ",".join(str(float(v) * f) for v in p["breaks"].split(","))
    return replace(cfg, initial=InitialSpec(kind=cfg.initial.kind, params=p))


def verify(cfg: ExperimentConfig, out_dir: Path | None = None) -> tuple[dict, bool]:
    out = Path(out_dir) if out_dir is not None else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    u0 = build_initial(cfg)
    traj = run(cfg.model, cfg.grid, u0, cfg.solver)
    results = _verify_trajectory(cfg, traj)
    report_path = out / f"{cfg.name}_front_report.json"
    with open(report_path, "w") as fh:
        json.dump(results, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return results, bool(results["all_pass"])


def _set_parameter(cfg: ExperimentConfig, dotted: str, value: float) -> ExperimentConfig:
    section, key = dotted.split(".", 1)
    if section == "model":
        if key == "s":
            phi = cfg.model.phi
            if phi.kind == "linear":
                phi = PhiFamily.linear_speed(value)
            model = replace(cfg.model, s=value, phi=phi)
        elif key == "l":
            model = replace(cfg.model, L=value)
        else:
            raise ConfigError("sweep.parameter", f"cannot sweep model.{key}")
        return replace(cfg, model=model)
    if section == "solver":
        if key not in ("cfl", "end_time"):
            raise ConfigError("sweep.parameter", f"cannot sweep solver.{key}")
        return replace(cfg, solver=replace(cfg.solver, **{key: value}))
    if section == "initial":
        p = dict(cfg.initial.params)
        p[key] = str(value)
        return replace(cfg, initial=InitialSpec(kind=cfg.initial.kind, params=p))
    raise ConfigError("sweep.parameter", f"unknown section {section!r}")


def sweep(cfg: ExperimentConfig, out_dir: Path | None = None) -> list[dict]:
    """Run the configured parameter grid, one child per value, in parallel.

    Parallelism is capped by the SATUREX_THREADS environment variable;
    outputs are keyed by experiment id so children never share files.
    """
    if not cfg.sweep_parameter or not cfg.sweep_values:
        raise ConfigError("sweep.parameter", "sweep needs parameter and values")
    out = Path(out_dir) if out_dir is not None else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    cap = os.environ.get("SATUREX_THREADS")
    workers = min(len(cfg.sweep_values),
                  int(cap) if cap else (os.cpu_count() or 1))
    workers = max(1, workers)

    def one(idx_value):
        idx, value = idx_value
        exp_id = f"{cfg.name}_{cfg.sweep_parameter.replace('.', '_')}_{idx:03d}"
        child = replace(_set_parameter(cfg, cfg.sweep_parameter, value),
                        name=exp_id)
        child_dir = out / exp_id
        if cfg.sweep_mode == "simulate":
            res = simulate(child, child_dir)
            return {"id": exp_id, "value": value, "mode": "simulate", **res}
        results, ok = verify(child, child_dir)
        return {"id": exp_id, "value": value, "mode": "verify", "pass": ok}

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(one, enumerate(cfg.sweep_values)))
    results.sort(key=lambda r: r["id"])
    summary_path = out / f"{cfg.name}_sweep.json"
    with open(summary_path, "w") as fh:
        json.dump(results, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return results
