"""Support tracking, jump detection, and comparison profiles.

Measurements: outermost threshold crossings per snapshot (sub-cell
interpolated) with least-squares edge speeds, and plateau-based jump
detection with lateral traces taken as medians away from the smeared
layer.  Predictions: the jump-speed quotient (phi(u+) - phi(u-))/(u+ -
u-), the unique admissible lower trace for a strictly convex phi, and the
explicit comparison profiles -- dilated indicators spreading at max phi'
(super-solutions), and decaying semicircle / theta-power profiles
(sub-solutions) whose decay rate A is found by minimizing the profile
inequality over the edge parameter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .models import ModelSpec, PhiFamily, check_assumptions, check_phi, EXPONENT_MARGIN
from .solver import Grid1D, Trajectory

__all__ = [
    "EdgeSeries",
    "Jump",
    "JumpTrack",
    "FrontReport",
    "ProfileSpec",
    "AnalysisError",
    "track_support",
    "detect_jumps",
    "track_jumps",
    "rh_speed",
    "admissible_minus",
    "super_indicator",
    "sub_semicircle",
    "sub_theta_power",
    "verify_profile_ordering",
    "front_report",
]

JUMP_THRESHOLD = 0.2
PLATEAU_WIDTH = 8
SKIP_CELLS = 2
EDGE_THRESHOLD_REL = 1e-8
SCHEME_TOL_FACTOR = 10.0
# Decay-rate search: edge parameter grid, log-refined near 1.
A_GRID_POINTS = 200
A_SAFETY = 1.1


class AnalysisError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# support tracking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeSeries:
    times: np.ndarray
    left: np.ndarray
    right: np.ndarray
    speed_left: float
    speed_right: float
    residual_left: float
    residual_right: float
    edge_flux_left: np.ndarray
    edge_flux_right: np.ndarray

    def to_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "speed_left": self.speed_left,
            "speed_right": self.speed_right,
            "residual_left": self.residual_left,
            "residual_right": self.residual_right,
        }


def _fit_speed(t: np.ndarray, x: np.ndarray) -> tuple[float, float]:
    """Least-squares slope of x(t) and its rms residual."""
    if t.size < 2:
        return math.nan, math.nan
    A = np.vstack([t, np.ones_like(t)]).T
    coef, *_ = np.linalg.lstsq(A, x, rcond=None)
    rms = float(np.sqrt(np.mean((x - A @ coef) ** 2)))
    return float(coef[0]), rms


def _crossings(x: np.ndarray, u: np.ndarray, thr: float) -> tuple[float, float]:
    idx = np.nonzero(u >= thr)[0]
    if idx.size == 0:
        return math.nan, math.nan
    i0, i1 = int(idx[0]), int(idx[-1])
    if i0 == 0 or i1 == u.size - 1:
        raise AnalysisError("support touches the domain boundary; margin violated")
    # sub-cell linear interpolation through the threshold
    xl = x[i0 - 1] + (x[i0] - x[i0 - 1]) * (thr - u[i0 - 1]) / (u[i0] - u[i0 - 1])
    xr = x[i1] + (x[i1 + 1] - x[i1]) * (u[i1] - thr) / (u[i1] - u[i1 + 1])
    return float(xl), float(xr)


def track_support(trajectory: Trajectory, threshold: float,
                  fit_fraction: float = 0.5) -> EdgeSeries:
    """Outermost threshold crossings per snapshot plus fitted edge speeds.

    The speed fit uses the last ``fit_fraction`` of the snapshots, dropping
    start-up transients.  As a diagnostic (no pass/fail attached), the
    interface flux just inside each edge is reported next to phi of the
    edge trace; a vertical contact angle makes these comparable.
    """
    if threshold <= 0.0:
        raise AnalysisError("threshold must be positive")
    x = trajectory.grid.centers()
    times, lefts, rights, fl, fr = [], [], [], [], []
    from .solver import interface_flux

    for snap in trajectory.snapshots:
        xl, xr = _crossings(x, snap.u, threshold)
        times.append(snap.t)
        lefts.append(xl)
        rights.append(xr)
        idx = np.nonzero(snap.u >= threshold)[0]
        if idx.size:
            i1 = int(idx[-1])
            i0 = int(idx[0])
            dx = trajectory.grid.dx
            fr.append(interface_flux(trajectory.model, snap.u[i1], snap.u[i1 + 1],
                                     dx, trajectory.cfg, u_scale=trajectory.u0_sup or 1.0))
            fl.append(interface_flux(trajectory.model, snap.u[i0 - 1], snap.u[i0],
                                     dx, trajectory.cfg, u_scale=trajectory.u0_sup or 1.0))
        else:
            fr.append(math.nan)
            fl.append(math.nan)
    times = np.array(times)
    lefts = np.array(lefts)
    rights = np.array(rights)
    n = times.size
    k = max(2, int(math.ceil(n * fit_fraction)))
    sl, rl = _fit_speed(times[n - k:], lefts[n - k:])
    sr, rr = _fit_speed(times[n - k:], rights[n - k:])
    return EdgeSeries(times=times, left=lefts, right=rights,
                      speed_left=sl, speed_right=sr,
                      residual_left=rl, residual_right=rr,
                      edge_flux_left=np.array(fl), edge_flux_right=np.array(fr))


# ---------------------------------------------------------------------------
# jump detection and tracking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Jump:
    position: float
    u_plus: float
    u_minus: float
    interface_index: int

    @property
    def gap(self) -> float:
        return self.u_plus - self.u_minus


def detect_jumps(u: np.ndarray, grid: Grid1D,
                 jump_threshold: float = JUMP_THRESHOLD,
                 plateau_width: int = PLATEAU_WIDTH,
                 skip: int = SKIP_CELLS) -> list[Jump]:
    """Flag interfaces with |du| above jump_threshold * sup|u|.

    Adjacent flags merge into one jump (discrete shocks smear over a few
    cells); lateral traces are medians over ``plateau_width`` cells on each
    side, skipping ``skip`` cells next to the smeared layer.  The traces
    are reported with u_plus > u_minus >= 0.
    """
    if plateau_width < 2:
        raise AnalysisError("plateau_width must be at least 2")
    u = np.asarray(u, dtype=float)
    sup = float(np.max(np.abs(u))) if u.size else 0.0
    if sup == 0.0:
        return []
    du = np.abs(np.diff(u))
    flagged = np.nonzero(du > jump_threshold * sup)[0]
    if flagged.size == 0:
        return []
    groups = np.split(flagged, np.nonzero(np.diff(flagged) > 1)[0] + 1)
    interfaces = grid.interfaces()
    jumps = []
    n = u.size
    for group in groups:
        rep = int(group[np.argmax(du[group])])
        lo, hi = int(group[0]), int(group[-1])
        left_hi = lo - skip
        left_lo = max(0, left_hi - plateau_width)
        right_lo = hi + 1 + skip
        right_hi = min(n, right_lo + plateau_width)
        if left_hi <= left_lo or right_hi <= right_lo:
            continue  # too close to the boundary for clean traces
        trace_left = float(np.median(u[left_lo:left_hi]))
        trace_right = float(np.median(u[right_lo:right_hi]))
        u_plus = max(trace_left, trace_right)
        u_minus = min(trace_left, trace_right)
        jumps.append(Jump(position=float(interfaces[rep + 1]),
                          u_plus=u_plus, u_minus=max(u_minus, 0.0),
                          interface_index=rep))
    return jumps


@dataclass(frozen=True)
class JumpTrack:
    times: np.ndarray
    positions: np.ndarray
    u_plus: np.ndarray
    u_minus: np.ndarray
    speed: float
    speed_residual: float
    predicted_speed: float

    @property
    def last_gap(self) -> float:
        return float(self.u_plus[-1] - self.u_minus[-1])

    def to_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "positions": self.positions.tolist(),
            "u_plus": self.u_plus.tolist(),
            "u_minus": self.u_minus.tolist(),
            "measured_speed": self.speed,
            "speed_residual": self.speed_residual,
            "predicted_speed": self.predicted_speed,
            "last_gap": self.last_gap,
        }


def track_jumps(trajectory: Trajectory,
                jump_threshold: float = JUMP_THRESHOLD,
                plateau_width: int = PLATEAU_WIDTH,
                fit_fraction: float = 0.6,
                match_radius: Optional[float] = None) -> list[JumpTrack]:
    """Associate jumps across snapshots by nearest position and fit speeds.

    The speed fit uses the last ``fit_fraction`` of each track.  The
    predicted speed is the jump-speed quotient evaluated on the track's
    median traces (exactly s for a linear-speed nonlinearity).
    """
    grid = trajectory.grid
    if match_radius is None:
        phys = max(trajectory.model.phi.theta(max(trajectory.u0_sup, 1e-30)), 1e-30)
        dts = np.diff(trajectory.times())
        dt_snap = float(np.median(dts)) if dts.size else 0.0
        match_radius = max(10.0 * grid.dx, 3.0 * phys * dt_snap)
    tracks: list[dict] = []
    for snap in trajectory.snapshots:
        jumps = detect_jumps(snap.u, grid, jump_threshold, plateau_width)
        unclaimed = set(range(len(jumps)))
        for tr in tracks:
            if not unclaimed:
                break
            last = tr["positions"][-1]
            best, best_d = None, match_radius
            for j in unclaimed:
                d = abs(jumps[j].position - last)
                if d < best_d:
                    best, best_d = j, d
            if best is not None:
                unclaimed.remove(best)
                tr["times"].append(snap.t)
                tr["positions"].append(jumps[best].position)
                tr["plus"].append(jumps[best].u_plus)
                tr["minus"].append(jumps[best].u_minus)
        for j in sorted(unclaimed):
            tracks.append({"times": [snap.t], "positions": [jumps[j].position],
                           "plus": [jumps[j].u_plus], "minus": [jumps[j].u_minus]})
    out = []
    for tr in tracks:
        t = np.array(tr["times"])
        x = np.array(tr["positions"])
        n = t.size
        k = max(2, int(math.ceil(n * fit_fraction)))
        speed, rms = _fit_speed(t[n - k:], x[n - k:])
        plus = np.array(tr["plus"])
        minus = np.array(tr["minus"])
        up, um = float(np.median(plus)), float(np.median(minus))
        try:
            pred = rh_speed(trajectory.model.phi, up, um) if up > um else math.nan
        except AnalysisError:
            pred = math.nan
        out.append(JumpTrack(times=t, positions=x, u_plus=plus, u_minus=minus,
                             speed=speed, speed_residual=rms, predicted_speed=pred))
    return out


# ---------------------------------------------------------------------------
# jump-speed laws
# ---------------------------------------------------------------------------

def rh_speed(phi: PhiFamily, u_plus: float, u_minus: float) -> float:
    """Front speed (phi(u+) - phi(u-)) / (u+ - u-).

    For the linear-speed nonlinearity every admissible gap travels at
    exactly s, so that case returns s without the quotient's rounding.
    """
    if not (u_plus > u_minus >= 0.0):
        raise AnalysisError(f"need u_plus > u_minus >= 0, got ({u_plus}, {u_minus})")
    if phi.kind == "linear":
        return phi.s
    return (float(phi(u_plus)) - float(phi(u_minus))) / (u_plus - u_minus)


def admissible_minus(phi: PhiFamily, u_plus: float, v: float,
                     residual_tol: float = 1e-10) -> float:
    """The unique lower trace pairing with u_plus at front speed v.

    Requires a strictly convex phi and phi(u+)/u+ <= v < phi'(u+); the
    quotient x -> (phi(u+) - phi(x))/(u+ - x) is then a monotone bijection
    onto that interval and bisection applies.
    """
    if u_plus <= 0.0:
        raise AnalysisError("u_plus must be positive")
    report = check_phi(phi, u_plus)
    second = np.diff(np.asarray(phi(np.linspace(0.0, u_plus, 257)), dtype=float), 2)
    if not report.convex or float(np.min(second)) <= 0.0:
        raise AnalysisError("admissible_minus needs a strictly convex phi")
    lo_v = float(phi(u_plus)) / u_plus
    hi_v = float(phi.deriv(u_plus))
    if not (lo_v <= v < hi_v):
        raise AnalysisError(
            f"speed {v} outside the admissible interval [{lo_v:.12g}, {hi_v:.12g})")
    phi_plus = float(phi(u_plus))

    def quotient(x: float) -> float:
        return (phi_plus - float(phi(x))) / (u_plus - x)

    lo, hi = 0.0, u_plus * (1.0 - 1e-15)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if quotient(mid) < v:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    if abs(quotient(x) - v) > residual_tol * max(1.0, abs(v)):
        raise AnalysisError("bisection failed to meet the residual tolerance")
    return x


# ---------------------------------------------------------------------------
# comparison profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProfileSpec:
    """An explicit comparison profile with its evaluator.

    ``kind`` is one of ``super-indicator``, ``sub-semicircle``,
    ``sub-theta-power``; ``direction`` records which side of the solution
    it bounds.  ``evaluate(t, x)`` is vectorized in x.
    """

    kind: str
    direction: str  # "super" | "sub"
    params: dict
    t_max: float
    A: float
    evaluator: Callable[[float, np.ndarray], np.ndarray] = field(repr=False)

    def evaluate(self, t: float, x) -> np.ndarray:
        if t < 0.0 or t > self.t_max * (1.0 + 1e-12):
            raise AnalysisError(f"profile valid on [0, {self.t_max}], got t={t}")
        return self.evaluator(t, np.asarray(x, dtype=float))


def super_indicator(model: ModelSpec, beta: float, interval: tuple[float, float]) -> ProfileSpec:
    """Dilated indicator of height beta spreading at theta = max phi' on [0, beta]."""
    if beta <= 0.0:
        raise AnalysisError("beta must be positive")
    a, b = float(interval[0]), float(interval[1])
    if not b > a:
        raise AnalysisError("interval must be non-degenerate")
    theta = model.phi.theta(beta)

    def evaluator(t: float, x: np.ndarray) -> np.ndarray:
        return np.where((x >= a - theta * t) & (x <= b + theta * t), beta, 0.0)

    return ProfileSpec(kind="super-indicator", direction="super",
                       params={"beta": beta, "a": a, "b": b, "theta": theta},
                       t_max=math.inf, A=0.0, evaluator=evaluator)


def _edge_lambda_grid() -> np.ndarray:
    lam = 1.0 - np.logspace(0.0, -6.0, A_GRID_POINTS)
    lam[0] = 1e-3
    return np.unique(lam)


def _semicircle_bound(model: ModelSpec, R: float, c: float, radii: np.ndarray) -> tuple[float, float]:
    """Infimum of the semicircle profile inequality over the edge grid.

    In terms of lambda = |x|/R(t) and r = lambda/(R(t)(1-lambda^2)) the
    requirement on alpha'/alpha is
        s * ( r psi(r) - c r/(lambda s) - ((1+lambda^2)/lambda^2) r^2 psi'(r) ).
    Returns (infimum, argmin lambda).
    """
    s = model.s
    lam = _edge_lambda_grid()
    worst = math.inf
    worst_lam = math.nan
    for rho in radii:
        r = lam / (rho * (1.0 - lam * lam))
        psi_r = np.asarray(model.psi(r), dtype=float)
        dpsi_r = np.asarray(model.psi.deriv(r), dtype=float)
        rhs = s * (r * psi_r - (c / s) * r / lam
                   - ((1.0 + lam * lam) / (lam * lam)) * r * r * dpsi_r)
        # lambda -> 0 limit: -c/rho - s psi'(0)/rho^2
        rhs = np.append(rhs, -c / rho - s * float(model.psi.deriv(0.0)) / rho**2)
        lam_ext = np.append(lam, 0.0)
        i = int(np.argmin(rhs))
        if rhs[i] < worst:
            worst = float(rhs[i])
            worst_lam = float(lam_ext[i])
    return worst, worst_lam


def sub_semicircle(model: ModelSpec, R: float, c: float,
                   t_max: float = 1.0) -> ProfileSpec:
    """Decaying semicircle sub-solution with edge speed c.

    ``W(t,x) = exp(-A t) sqrt(R(t)^2 - x^2)`` on |x| < R(t) = R + c t.
    Speeds below s need only the base decay psi' = o(1/r); the full speed
    c = s additionally needs d = O(1/r) and psi' = O(1/r^2), classified
    from the fitted tail exponents.
    """
    if not (0.0 < c <= model.s) or R <= 0.0:
        raise AnalysisError("need R > 0 and 0 < c <= s")
    report = check_assumptions(model)
    if c >= model.s * (1.0 - 1e-12):
        if not report.semicircle_full_speed_ok():
            raise AnalysisError(
                "full-speed semicircle needs d = O(1/r) and psi' = O(1/r^2); "
                f"fitted exponents d={report.d_exponent:.3g}, "
                f"psi'={report.dpsi_exponent:.3g}")
    elif report.verdict("psi_prime_decay") != "pass":
        raise AnalysisError("semicircle profile needs psi' = o(1/r)")

    radii = np.linspace(R, R + c * t_max, 8)
    inf_rhs, worst_lam = _semicircle_bound(model, R, c, radii)
    if not math.isfinite(inf_rhs) or inf_rhs < -1e12:
        raise AnalysisError(
            f"profile inequality unbounded below near lambda={worst_lam:.6g}")
    A = max(0.0, -inf_rhs) * A_SAFETY

    def evaluator(t: float, x: np.ndarray) -> np.ndarray:
        rt = R + c * t
        return math.exp(-A * t) * np.sqrt(np.maximum(rt * rt - x * x, 0.0))

    return ProfileSpec(kind="sub-semicircle", direction="sub",
                       params={"R": R, "c": c, "worst_lambda": worst_lam},
                       t_max=t_max, A=A, evaluator=evaluator)


def sub_theta_power(model: ModelSpec, R: float, c: float, theta: float,
                    gamma0: float, t_max: float = 1.0) -> ProfileSpec:
    """Sub-solution with a strictly positive lateral trace at the moving edge.

    ``W(t,x) = exp(-A t) ((R(t)^2 - x^2)^theta + gamma0)`` on |x| < R(t).
    Requires the theta-dependent derivative decay: exponent above
    1/(1-theta) for c < s, at least (2-theta)/(1-theta) for c = s.
    """
    if not (0.0 < theta < 1.0):
        raise AnalysisError("theta must lie in (0,1)")
    if gamma0 <= 0.0 or R <= 0.0 or not (0.0 < c <= model.s):
        raise AnalysisError("need gamma0 > 0, R > 0 and 0 < c <= s")
    report = check_assumptions(model)
    c_is_s = c >= model.s * (1.0 - 1e-12)
    if not report.theta_power_ok(theta, c_equals_s=c_is_s):
        required = ((2.0 - theta) / (1.0 - theta)) if c_is_s else 1.0 / (1.0 - theta)
        raise AnalysisError(
            f"theta-power profile needs psi' tail exponent "
            f"{'>= ' if c_is_s else '> '}{required:.3g}; fitted "
            f"{report.dpsi_exponent:.3g}")

    s = model.s
    lam = _edge_lambda_grid()
    A_req = 0.0
    for rho in np.linspace(R, R + c * t_max, 8):
        one = 1.0 - lam * lam
        I2 = 2.0 * theta * lam / (rho * one + gamma0 * rho ** (1.0 - 2.0 * theta) * one ** (1.0 - theta))
        psi_v = np.asarray(model.psi(I2), dtype=float)
        dpsi_v = np.asarray(model.psi.deriv(I2), dtype=float)
        B = s / (rho ** (2.0 * theta) * one**theta)
        T1 = (2.0 * theta / (rho ** (1.0 - 2.0 * theta) * one ** (1.0 - theta))) \
            * (lam * psi_v - c / s)
        denom = rho ** (2.0 - 2.0 * theta) * one ** (2.0 - theta) \
            + rho ** (2.0 - 4.0 * theta) * one ** (2.0 - 2.0 * theta) * gamma0
        T2 = dpsi_v * (2.0 * theta * ((2.0 * theta - 1.0) * lam * lam - 1.0)
                       / (rho ** (2.0 - 2.0 * theta) * one ** (2.0 - theta))
                       - 4.0 * theta * theta * lam * lam / denom)
        G = T1 + T2
        # alpha'/alpha = -A and gamma = gamma0*alpha turn the inequality into
        # A >= -B G / (1 + B gamma0 / s) pointwise
        req = -B * G / (1.0 + B * gamma0 / s)
        m = float(np.max(req))
        if not math.isfinite(m) or m > 1e12:
            raise AnalysisError(
                f"profile inequality unbounded near lambda={lam[int(np.argmax(req))]:.6g}")
        A_req = max(A_req, m)
    A = max(A_req, 0.0) * A_SAFETY

    def evaluator(t: float, x: np.ndarray) -> np.ndarray:
        rt = R + c * t
        core = np.maximum(rt * rt - x * x, 0.0)
        inside = np.abs(x) < rt
        return np.where(inside, math.exp(-A * t) * (core**theta + gamma0), 0.0)

    return ProfileSpec(kind="sub-theta-power", direction="sub",
                       params={"R": R, "c": c, "theta": theta, "gamma0": gamma0},
                       t_max=t_max, A=A, evaluator=evaluator)


# ---------------------------------------------------------------------------
# ordering verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderingVerdict:
    t: float
    value: float
    bound: float
    ok: bool

    def to_dict(self) -> dict:
        return {"t": self.t, "value": self.value, "bound": self.bound, "ok": self.ok}


def verify_profile_ordering(trajectory: Trajectory, profile: ProfileSpec,
                            tol_factor: float = SCHEME_TOL_FACTOR) -> list[OrderingVerdict]:
    """Per snapshot, the one-sided L1 excess against the comparison bound.

    Sub-profiles: ||(W(t) - u(t))+||_1 must stay within its initial value
    plus the scheme tolerance tol_factor * dx * sup u0; super-profiles the
    mirror image.  The initial ordering must already hold, otherwise the
    comparison is misconfigured.
    """
    if not trajectory.snapshots:
        raise AnalysisError("trajectory has no snapshots")
    x = trajectory.grid.centers()
    dx = trajectory.grid.dx
    tol = tol_factor * dx * trajectory.u0_sup

    def excess(snap) -> float:
        w = profile.evaluate(min(snap.t, profile.t_max), x)
        diff = (w - snap.u) if profile.direction == "sub" else (snap.u - w)
        return float(np.sum(np.maximum(diff, 0.0))) * dx

    first = trajectory.snapshots[0]
    initial = excess(first)
    if initial > tol:
        raise AnalysisError(
            f"initial ordering violated: one-sided excess {initial:.3e} > {tol:.3e}")
    verdicts = []
    for snap in trajectory.snapshots:
        val = excess(snap)
        bound = initial + tol
        verdicts.append(OrderingVerdict(t=snap.t, value=val, bound=bound,
                                        ok=bool(val <= bound)))
    return verdicts


# ---------------------------------------------------------------------------
# assembled report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrontReport:
    edges: EdgeSeries
    jumps: tuple
    verdicts: dict

    @property
    def all_pass(self) -> bool:
        return all(self.verdicts.values())

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps({
            "edges": self.edges.to_dict(),
            "jumps": [j.to_dict() for j in self.jumps],
            "verdicts": {k: bool(v) for k, v in self.verdicts.items()},
        }, indent=indent)


def front_report(trajectory: Trajectory,
                 edge_threshold_rel: float = EDGE_THRESHOLD_REL,
                 speed_band: tuple[float, float] = (0.95, 1.05),
                 jump_speed_rtol: float = 0.07,
                 min_last_gap: float = 0.1,
                 expected_edge_speed: Optional[float] = None) -> FrontReport:
    """Measure edges and jumps and compare with the model's predictions.

    Verdicts: the fitted right-edge speed falls inside ``speed_band`` times
    the expected speed (default: the front-speed bound max phi(z)/z at the
    initial height), per-interval edge advances respect the spreading bound
    plus one-cell leakage, the outermost jump persists with gap at least
    ``min_last_gap``, and each persistent jump's measured speed matches the
    quotient prediction within ``jump_speed_rtol``.
    """
    model = trajectory.model
    u0sup = trajectory.u0_sup
    edges = track_support(trajectory, edge_threshold_rel * u0sup)
    tracks = track_jumps(trajectory)
    expected = expected_edge_speed
    if expected is None:
        expected = model.phi.speed_sup(u0sup) if u0sup > 0 else math.nan

    verdicts: dict[str, bool] = {}
    verdicts["right_edge_speed_in_band"] = bool(
        speed_band[0] * expected <= edges.speed_right <= speed_band[1] * expected)
    verdicts["left_edge_speed_in_band"] = bool(
        speed_band[0] * expected <= -edges.speed_left <= speed_band[1] * expected)

    # per-interval bound theta + one-cell leakage; the spreading bound is an
    # asymptotic statement, so the startup transient (first half of the
    # snapshots, where the numerical foot establishes) is excluded
    theta = model.phi.theta(u0sup) if u0sup > 0 else 0.0
    n = edges.times.size
    start = n - max(2, int(math.ceil(n * 0.5)))
    ok = True
    for i in range(start, n - 1):
        dts = edges.times[i + 1] - edges.times[i]
        if dts <= 0:
            continue
        bound = theta + 10.0 * trajectory.grid.dx / dts
        adv_r = (edges.right[i + 1] - edges.right[i]) / dts
        adv_l = (edges.left[i] - edges.left[i + 1]) / dts
        if adv_r > bound or adv_l > bound:
            ok = False
    verdicts["edge_speed_bounded"] = ok

    persistent = [tr for tr in tracks if tr.last_gap >= min_last_gap]
    verdicts["jump_persists"] = bool(persistent)
    speeds_ok = True
    for tr in persistent:
        if not math.isfinite(tr.predicted_speed):
            continue
        if abs(abs(tr.speed) - abs(tr.predicted_speed)) > jump_speed_rtol * abs(tr.predicted_speed):
            speeds_ok = False
    verdicts["jump_speeds_match"] = speeds_ok

    return FrontReport(edges=edges, jumps=tuple(tracks), verdicts=verdicts)
