"""Explicit conservative finite-volume integrator in one dimension.

The semidiscrete flux at an interface is ``phi(ubar) * psi(L * du /(dx *
ubar))`` with ``ubar`` either the arithmetic mean or the upwind minimum of
the adjacent cells; the saturation |psi| <= 1 bounds the discrete wave
speeds by phi(u)/u-type quantities, matching the analytical propagation
bound.  Time stepping is forward Euler under a CFL that combines the
hyperbolic speeds (max phi', max phi(z)/z) with the diffusive estimate
2 * max(psi') * max(phi(u)/u) / dx.  Boundaries are zero-flux and a
support margin is enforced so they never activate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .models import ModelSpec
from . import _kernels

__all__ = [
    "Grid1D",
    "SolverConfig",
    "SolverState",
    "DtStats",
    "Snapshot",
    "Trajectory",
    "SolverError",
    "interface_flux",
    "stable_dt",
    "step",
    "run",
]


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell-centered grid on [x_min, x_max]."""

    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 8:
            raise SolverError("need at least 8 cells")
        if not self.x_max > self.x_min:
            raise SolverError("need x_max > x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    def centers(self) -> np.ndarray:
        dx = self.dx
        return self.x_min + dx * (np.arange(self.n_cells) + 0.5)

    def interfaces(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_cells + 1)


@dataclass(frozen=True)
class SolverConfig:
    """Numerical parameters for a run.

    ``u_floor`` is relative to the initial sup norm; interfaces whose
    average lies below the resolved floor carry exactly zero flux.
    """

    cfl: float = 0.4
    u_floor: float = 1e-30
    end_time: float = 1.0
    snapshot_times: tuple = ()
    average: str = "arithmetic"  # or "upwind-min"
    max_steps: int = 200_000_000

    def __post_init__(self):
        if not (0.0 < self.cfl <= 0.9):
            raise SolverError(f"cfl must lie in (0, 0.9], got {self.cfl}")
        if self.average not in ("arithmetic", "upwind-min"):
            raise SolverError(f"unknown interface average {self.average!r}")
        if self.end_time < 0.0:
            raise SolverError("end_time must be non-negative")


@dataclass(frozen=True)
class DtStats:
    count: int = 0
    dt_min: float = math.inf
    dt_max: float = 0.0
    dt_sum: float = 0.0

    def merged(self, count, dt_min, dt_max, dt_sum) -> "DtStats":
        if count == 0:
            return self
        return DtStats(self.count + count, min(self.dt_min, dt_min),
                       max(self.dt_max, dt_max), self.dt_sum + dt_sum)

    @property
    def mean(self) -> float:
        return self.dt_sum / self.count if self.count else math.nan


@dataclass(frozen=True)
class SolverState:
    grid: Grid1D
    u: np.ndarray
    t: float
    mass0: float
    step_count: int = 0
    dt_history: DtStats = field(default_factory=DtStats)
    clipped_total: float = 0.0
    max_clip_per_step: float = 0.0

    @property
    def mass(self) -> float:
        return float(np.sum(self.u)) * self.grid.dx


def _resolve_floor(cfg: SolverConfig, u_scale: float) -> float:
    return max(cfg.u_floor * u_scale, 1e-300)


def interface_flux(model: ModelSpec, uL: float, uR: float, dx: float,
                   cfg: SolverConfig, u_scale: float = 1.0) -> float:
    """Numerical flux at one interface: phi(ubar) psi(L*(uR-uL)/(dx*ubar)).

    Zero once the interface average falls below the resolved floor, which
    mirrors the extension a(0, xi) = 0 of the continuous flux.
    """
    if uL < 0.0 or uR < 0.0 or dx <= 0.0:
        raise SolverError("need uL, uR >= 0 and dx > 0")
    ubar = 0.5 * (uL + uR) if cfg.average == "arithmetic" else min(uL, uR)
    floor = _resolve_floor(cfg, u_scale)
    if ubar < floor:
        return 0.0
    ratio = model.L * (uR - uL) / (dx * ubar)
    return float(model.phi(ubar)) * float(model.psi(ratio))


def _fluxes(model: ModelSpec, u: np.ndarray, dx: float, floor: float,
            upwind_min: bool) -> np.ndarray:
    """Vectorized interface fluxes with padded zero-flux boundaries."""
    a, b = u[:-1], u[1:]
    ubar = np.minimum(a, b) if upwind_min else 0.5 * (a + b)
    active = ubar >= floor
    safe = np.where(active, ubar, 1.0)
    with np.errstate(all="ignore"):
        ratio = model.L * (b - a) / (dx * safe)
        inner = np.where(active, model.phi(safe) * model.psi(ratio), 0.0)
    F = np.zeros(u.shape[0] + 1)
    F[1:-1] = inner
    return F


def stable_dt(model: ModelSpec, state: SolverState, cfg: SolverConfig) -> float:
    """CFL time step: cfl * dx / Vmax.

    Vmax is the largest of the spreading bound max phi' on [0, umax], the
    front speed bound max phi(z)/z, and the diffusive speed
    2 max(psi') max(phi(u)/u) / dx.  An all-zero state moves nothing and
    gets the free choice cfl * dx.
    """
    umax = float(np.max(state.u)) if state.u.size else 0.0
    dx = state.grid.dx
    if umax <= 0.0:
        return cfg.cfl * dx
    theta = model.phi.theta(umax)
    speed = model.phi.speed_sup(umax)
    vdiff = 2.0 * model.psi.deriv_sup() * speed / dx
    vmax = max(theta, speed, vdiff)
    if vmax <= 0.0:
        return cfg.cfl * dx
    return cfg.cfl * dx / vmax


def step(model: ModelSpec, state: SolverState, cfg: SolverConfig,
         u_scale: Optional[float] = None) -> SolverState:
    """One forward-Euler update in conservative form.

    ``u_i += dt/dx (F_{i+1/2} - F_{i-1/2})`` with zero-flux boundaries;
    negatives are clipped to zero with the clipped mass recorded.
    """
    dt = stable_dt(model, state, cfg)
    dx = state.grid.dx
    scale = u_scale if u_scale is not None else max(float(np.max(state.u)), 0.0) or 1.0
    floor = _resolve_floor(cfg, scale)
    F = _fluxes(model, state.u, dx, floor, cfg.average == "upwind-min")
    u_new = state.u + (dt / dx) * (F[1:] - F[:-1])
    if not np.all(np.isfinite(u_new)):
        bad = int(np.argmax(~np.isfinite(u_new)))
        raise SolverError(
            f"non-finite cell value at step {state.step_count + 1}, "
            f"cell {bad}, t={state.t:.6g}, dt={dt:.3e}")
    clip = np.minimum(u_new, 0.0)
    clip_mass = -float(np.sum(clip)) * dx
    np.maximum(u_new, 0.0, out=u_new)
    return SolverState(
        grid=state.grid,
        u=u_new,
        t=state.t + dt,
        mass0=state.mass0,
        step_count=state.step_count + 1,
        dt_history=state.dt_history.merged(1, dt, dt, dt),
        clipped_total=state.clipped_total + clip_mass,
        max_clip_per_step=max(state.max_clip_per_step, clip_mass),
    )


@dataclass(frozen=True)
class Snapshot:
    t_requested: float
    t: float
    u: np.ndarray

    @property
    def overshoot(self) -> float:
        return self.t - self.t_requested


@dataclass(frozen=True)
class Trajectory:
    model: ModelSpec
    grid: Grid1D
    cfg: SolverConfig
    snapshots: tuple
    final_state: SolverState
    u0_sup: float

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def mass_series(self) -> np.ndarray:
        return np.array([float(np.sum(s.u)) * self.grid.dx for s in self.snapshots])

    @property
    def mass_drift(self) -> float:
        m0 = self.final_state.mass0
        if m0 == 0.0:
            return 0.0
        return float(np.max(np.abs(self.mass_series() - m0))) / m0

    def metadata(self) -> dict:
        st = self.final_state
        return {
            "model": self.model.id,
            "s": self.model.s,
            "L": self.model.L,
            "grid": {"x_min": self.grid.x_min, "x_max": self.grid.x_max,
                     "n_cells": self.grid.n_cells, "dx": self.grid.dx},
            "cfg": {"cfl": self.cfg.cfl, "end_time": self.cfg.end_time,
                    "average": self.cfg.average, "u_floor": self.cfg.u_floor},
            "steps": st.step_count,
            "dt": {"min": st.dt_history.dt_min, "max": st.dt_history.dt_max,
                   "mean": st.dt_history.mean},
            "mass0": st.mass0,
            "mass_final": st.mass,
            "mass_drift": self.mass_drift,
            "clipped_total": st.clipped_total,
            "max_clip_per_step": st.max_clip_per_step,
            "snapshots": [{"requested": s.t_requested, "actual": s.t}
                          for s in self.snapshots],
        }


_PSI_CODES = {"linear": _kernels.PSI_LINEAR, "relativistic": _kernels.PSI_POWER,
              "coth": _kernels.PSI_COTH, "tanh": _kernels.PSI_TANH}
_PHI_CODES = {"linear": _kernels.PHI_LINEAR, "power": _kernels.PHI_POWER}


def _kernel_params(model: ModelSpec):
    if not _kernels.KERNEL_AVAILABLE:
        return None
    if model.psi.kind not in _PSI_CODES or model.phi.kind not in _PHI_CODES:
        return None
    psi_code = _PSI_CODES[model.psi.kind]
    psi_param = {"relativistic": model.psi.p, "tanh": model.psi.gamma}.get(model.psi.kind, 0.0)
    phi_code = _PHI_CODES[model.phi.kind]
    if model.phi.kind == "linear":
        phi_a, phi_b = model.phi.s, 0.0
    else:
        phi_a, phi_b = model.phi.scale, model.phi.m
    return psi_code, psi_param, phi_code, phi_a, phi_b


def required_margin(model: ModelSpec, u0_sup: float, end_time: float) -> float:
    """Distance the support may travel: the propagation speed bound times T."""
    if u0_sup <= 0.0:
        return 0.0
    vmax = max(model.phi.theta(u0_sup), model.phi.speed_sup(u0_sup))
    return vmax * end_time


def run(model: ModelSpec, grid: Grid1D, u0: np.ndarray, cfg: SolverConfig) -> Trajectory:
    """Integrate from u0 and collect snapshots at the requested times.

    Snapshots land on the first step with t >= requested (the overshoot is
    recorded, never interpolated).  The initial support must clear the
    domain boundary by at least the propagation bound times end_time, so
    the zero-flux boundaries never see mass.
    """
    u = np.array(u0, dtype=float, copy=True)
    if u.shape != (grid.n_cells,):
        raise SolverError(f"u0 shape {u.shape} does not match grid ({grid.n_cells},)")
    if np.any(u < 0.0):
        raise SolverError("initial datum must be non-negative")

    u0_sup = float(np.max(u)) if u.size else 0.0
    nz = np.nonzero(u > 0.0)[0]
    if nz.size:
        centers = grid.centers()
        margin = min(centers[nz[0]] - grid.x_min, grid.x_max - centers[nz[-1]])
        need = required_margin(model, u0_sup, cfg.end_time)
        if margin < need:
            raise SolverError(
                f"support margin {margin:.4g} is below the required {need:.4g}; "
                f"enlarge the domain to at least "
                f"[{centers[nz[0]] - need:.4g}, {centers[nz[-1]] + need:.4g}]")

    snap_times = sorted(cfg.snapshot_times)
    if snap_times and (snap_times[0] < 0.0 or snap_times[-1] > cfg.end_time + 1e-12):
        raise SolverError("snapshot times must lie within [0, end_time]")
    targets = list(snap_times)
    if not targets or targets[-1] < cfg.end_time:
        targets.append(cfg.end_time)

    mass0 = float(np.sum(u)) * grid.dx
    floor = _resolve_floor(cfg, u0_sup if u0_sup > 0.0 else 1.0)
    params = _kernel_params(model)
    dx = grid.dx
    t = 0.0
    stats = DtStats()
    steps = 0
    clipped_total = 0.0
    max_clip = 0.0
    snapshots = []
    F = np.zeros(grid.n_cells + 1)
    dpsi_max = model.psi.deriv_sup()
    upwind = cfg.average == "upwind-min"

    for target in targets:
        if params is not None:
            psi_code, psi_param, phi_code, phi_a, phi_b = params
            t, ksteps, kclip, kmax, dmin, dmax, dsum, status = _kernels.advance(
                u, F, dx, t, target, cfg.cfl, floor, upwind,
                psi_code, psi_param, phi_code, phi_a, phi_b,
                dpsi_max, model.L, cfg.max_steps - steps)
            steps += ksteps
            clipped_total += kclip
            max_clip = max(max_clip, kmax)
            stats = stats.merged(ksteps, dmin, dmax, dsum)
            if status == 2:
                raise SolverError(f"step budget {cfg.max_steps} exhausted at t={t:.6g}")
            if not np.all(np.isfinite(u)):
                bad = int(np.argmax(~np.isfinite(u)))
                raise SolverError(
                    f"non-finite cell value (cell {bad}) within step {steps}, t={t:.6g}")
        else:
            state = SolverState(grid=grid, u=u, t=t, mass0=mass0, step_count=steps,
                                dt_history=stats, clipped_total=clipped_total,
                                max_clip_per_step=max_clip)
            while state.t < target:
                if state.step_count >= cfg.max_steps:
                    raise SolverError(
                        f"step budget {cfg.max_steps} exhausted at t={state.t:.6g}")
                state = step(model, state, cfg,
                             u_scale=u0_sup if u0_sup > 0.0 else 1.0)
            u = state.u
            t = state.t
            steps = state.step_count
            stats = state.dt_history
            clipped_total = state.clipped_total
            max_clip = state.max_clip_per_step
        if snap_times and any(abs(target - st) < 1e-15 for st in snap_times):
            snapshots.append(Snapshot(t_requested=target, t=t, u=u.copy()))

    final = SolverState(grid=grid, u=u.copy(), t=t, mass0=mass0, step_count=steps,
                        dt_history=stats, clipped_total=clipped_total,
                        max_clip_per_step=max_clip)
    return Trajectory(model=model, grid=grid, cfg=cfg, snapshots=tuple(snapshots),
                      final_state=final, u0_sup=u0_sup)
