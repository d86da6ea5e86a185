"""Optimal-transport cost function by convex conjugation.

For linear-speed models, the equation is the gradient flow of the entropy
with respect to a transport cost ``k`` whose conjugate is built from the
flux profile: ``kstar(r) = s * Phi(r)``.  ``k(v) = sup_p p.v - kstar(p)``
is finite inside the ball |v| < s, +infinity outside, and finite on the
boundary exactly when the saturation defect d(r) = 1 - psi(r) is
integrable.  The conjugation is solved numerically: ``psi`` is monotone
along rays, so the stationarity condition ``psi(pbar) = |v|/s`` yields to
bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .models import ModelSpec, ModelError
from .lagrangian import FluxObjects, potential, QUAD_ABS_TOL

__all__ = [
    "CostValue",
    "CostTable",
    "kstar",
    "conjugate",
    "boundary_value",
    "cost_table",
    "FINITE_INTERIOR",
    "FINITE_BOUNDARY",
    "INFINITE",
    "INDETERMINATE",
]

FINITE_INTERIOR = "finite-interior"
FINITE_BOUNDARY = "finite-boundary"
INFINITE = "infinite"
INDETERMINATE = "indeterminate"

# Operational stand-ins for "+infinity" and "|v| = s".
P_MAX = 1e12
BOUNDARY_BAND = 1e-9
BISECT_RESIDUAL = 1e-10
# A tail exponent this close to 1 (or below) is declared non-integrable.
INTEGRABILITY_MARGIN = 1e-3
# Quadrature+tail split for the improper boundary integral.
TAIL_START = 1e6


def _divergence_cap(s: float, v_mag: float) -> float:
    return 1e6 * s * max(1.0, v_mag)


def _radial_psi(model: ModelSpec, rho):
    if model.dimension == 1:
        return model.psi(rho)
    return np.asarray(rho) * model.psi.g(rho)


def _require_ray_solvable(model: ModelSpec) -> None:
    if model.dimension > 1 and model.psi.kind == "custom":
        raise ModelError(
            "conjugation along rays needs an isotropic profile; "
            "custom models in d > 1 are not supported")


def kstar(model: ModelSpec, r) -> float:
    """kstar(r) = s * Phi(r): non-negative, convex, asymptotically s|r|."""
    return model.s * potential(FluxObjects(model), r)


@dataclass(frozen=True)
class CostValue:
    v: float
    value: float
    classification: str
    pbar: float = math.nan
    residual: float = math.nan

    def as_row(self) -> tuple:
        return (self.v, self.value, self.classification, self.pbar, self.residual)


def _solve_interior(model: ModelSpec, target: float) -> tuple[float, float]:
    """Monotone bisection for psi(p) = target along the ray, p >= 0."""
    lo, hi = 0.0, 1.0
    while float(_radial_psi(model, np.array([hi]))[0]) < target:
        hi *= 2.0
        if hi > P_MAX:
            raise ModelError(
                f"flux profile never reaches {target:.6g} below p = {P_MAX:.1e}")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if float(_radial_psi(model, np.array([mid]))[0]) < target:
            lo = mid
        else:
            hi = mid
    pbar = 0.5 * (lo + hi)
    residual = abs(float(_radial_psi(model, np.array([pbar]))[0]) - target)
    return pbar, residual


def conjugate(model: ModelSpec, v) -> CostValue:
    """k(v) with domain classification.

    |v| < s: solve the stationarity condition by bisection and return
    ``pbar |v| - kstar(pbar)``.  |v| > s: the objective grows without bound
    along the ray of v; classified infinite once it clears the divergence
    cap.  Within the boundary band of |v| = s: the improper-integral
    boundary value.
    """
    _require_ray_solvable(model)
    v_arr = np.asarray(v, dtype=float)
    v_mag = float(np.linalg.norm(v_arr)) if v_arr.ndim else abs(float(v_arr))
    s = model.s
    flux = FluxObjects(model)

    if v_mag <= s * (1.0 - BOUNDARY_BAND):
        if v_mag == 0.0:
            return CostValue(v=0.0, value=0.0, classification=FINITE_INTERIOR,
                             pbar=0.0, residual=0.0)
        target = v_mag / s
        try:
            pbar, residual = _solve_interior(model, target)
        except ModelError:
            # saturation limit below target: treat like the boundary case
            bv = boundary_value(model)
            return CostValue(v=v_mag, value=bv.value, classification=bv.classification,
                             pbar=math.inf, residual=math.nan)
        value = pbar * v_mag - s * potential(flux, pbar)
        return CostValue(v=v_mag, value=value, classification=FINITE_INTERIOR,
                         pbar=pbar, residual=residual)

    if v_mag >= s * (1.0 + BOUNDARY_BAND):
        cap = _divergence_cap(s, v_mag)
        gamma = 0.0
        p = 1.0
        while p <= P_MAX:
            gamma = p * v_mag - s * potential(flux, p)
            if gamma > cap:
                return CostValue(v=v_mag, value=math.inf, classification=INFINITE,
                                 pbar=math.nan, residual=math.nan)
            p *= 4.0
        return CostValue(v=v_mag, value=math.inf, classification=INFINITE,
                         pbar=math.nan, residual=math.nan)

    bv = boundary_value(model)
    return CostValue(v=v_mag, value=bv.value, classification=bv.classification,
                     pbar=math.nan, residual=bv.residual)


@dataclass(frozen=True)
class BoundaryValue:
    value: float
    classification: str
    tail_exponent: float
    residual: float


def boundary_value(model: ModelSpec, direction=None) -> BoundaryValue:
    """k at |v| = s: ``s * integral_0^inf (1 - psi(lambda)) dlambda``.

    Adaptive quadrature decade by decade up to the tail start, then an
    analytic power-law tail from the fitted saturation-defect exponent.
    Finite only when that exponent clears 1; exponentially decaying defects
    (underflowed tails) count as integrable.
    """
    _require_ray_solvable(model)
    s = model.s

    if model.dimension == 1:
        def defect(lam: float) -> float:
            return float(model.psi.defect(np.array([lam]))[0])
    else:
        def defect(lam: float) -> float:
            return 1.0 - float(_radial_psi(model, np.array([lam]))[0])

    # fit the defect on the last decade before the tail start
    lam_fit = np.logspace(math.log10(TAIL_START) - 1.0, math.log10(TAIL_START), 24)
    d_fit = np.array([defect(l) for l in lam_fit])
    d_fit = np.abs(d_fit)
    if np.all(d_fit < 1e-280):
        exponent, rms = math.inf, 0.0
    else:
        mask = d_fit > 1e-280
        if np.count_nonzero(mask) < 3:
            exponent, rms = math.inf, 0.0
        else:
            x, y = np.log(lam_fit[mask]), np.log(d_fit[mask])
            A = np.vstack([x, np.ones_like(x)]).T
            coef, *_ = np.linalg.lstsq(A, y, rcond=None)
            exponent = float(-coef[0])
            rms = float(np.sqrt(np.mean((y - (A @ coef)) ** 2)))

    if not math.isinf(exponent) and rms >= 0.5:
        return BoundaryValue(math.nan, INDETERMINATE, exponent, rms)
    if not math.isinf(exponent) and exponent <= 1.0 + INTEGRABILITY_MARGIN:
        return BoundaryValue(math.inf, INFINITE, exponent, rms)

    total = 0.0
    edges = [0.0] + [10.0 ** k for k in range(0, int(math.log10(TAIL_START)) + 1)]
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = quad(defect, a, b, epsabs=QUAD_ABS_TOL, epsrel=1e-12, limit=200)
        total += val
    if math.isinf(exponent):
        tail = 0.0
    else:
        # integral_R^inf a*l^-q dl with a from the fit at the tail start
        a_coef = float(d_fit[-1]) * TAIL_START ** exponent
        tail = a_coef * TAIL_START ** (1.0 - exponent) / (exponent - 1.0)
    return BoundaryValue(s * (total + tail), FINITE_BOUNDARY, exponent, rms)


@dataclass(frozen=True)
class CostTable:
    """Sampled cost function with per-sample domain classification."""

    model_id: str
    s: float
    samples: tuple
    closed_form: Optional[tuple] = None
    diagnostics: dict = field(default_factory=dict)

    def finite_mask(self) -> np.ndarray:
        return np.array([s.classification != INFINITE for s in self.samples])

    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.samples])

    def velocities(self) -> np.ndarray:
        return np.array([s.v for s in self.samples])

    def to_csv_rows(self):
        yield ("v", "k", "classification", "pbar", "residual")
        for s in self.samples:
            yield s.as_row()


def _rhe_closed_form(s: float, v: np.ndarray) -> np.ndarray:
    out = np.full_like(v, math.inf)
    inside = np.abs(v) <= s
    out[inside] = (1.0 - np.sqrt(np.maximum(0.0, 1.0 - (v[inside] / s) ** 2))) * s * s
    return out


def cost_table(model: ModelSpec, v_grid) -> CostTable:
    """Evaluate the cost on a grid of velocities.

    Per-sample failures are recorded in the diagnostics, never aborting the
    table.  The p=2 linear-speed model gets a closed-form comparison column.
    """
    v_grid = np.asarray(v_grid, dtype=float)
    samples = []
    errors = {}
    for v in v_grid:
        sv = float(v)
        try:
            cv = conjugate(model, sv)
            samples.append(CostValue(v=sv, value=cv.value,
                                     classification=cv.classification,
                                     pbar=cv.pbar, residual=cv.residual))
        except Exception as exc:  # recorded, not raised
            errors[sv] = repr(exc)
            samples.append(CostValue(v=sv, value=math.nan,
                                     classification=INDETERMINATE))
    closed = None
    if (model.psi.kind == "relativistic" and model.psi.p == 2.0
            and model.phi.kind == "linear" and model.phi.s == model.s):
        closed = tuple(_rhe_closed_form(model.s, v_grid))
    diag = {"per_sample_errors": errors} if errors else {}
    return CostTable(model_id=model.id, s=model.s, samples=tuple(samples),
                     closed_form=closed, diagnostics=diag)
