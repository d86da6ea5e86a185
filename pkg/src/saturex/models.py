"""Saturating flux profiles and degeneracy nonlinearities.

The equations studied here have the form

    u_t = div( phi(u) * psi(L * grad(u) / u) )

where ``psi`` is a smooth, odd, monotone map that saturates (|psi| -> 1 at
infinity) and ``phi`` is a Lipschitz nonlinearity vanishing at zero.  This
module provides:

* a catalog of ``psi`` profiles (the one-parameter power family that contains
  the relativistic heat equation at p=2 and Wilson's radiation model at p=1,
  the Levermore coth profile, the tanh profile, and a deliberately
  non-saturating linear profile used as a negative control),
* the ``phi`` nonlinearities (linear speed ``s*z`` and power laws),
* a numerical checker that classifies a candidate model against the
  structural requirements (saturation, parity, monotonicity, derivative
  decay, isotropy bounds) and fits the tail exponents that decide whether
  discontinuous interfaces persist.

All types are immutable; evaluators are pure functions of their arguments.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "PsiFamily",
    "PhiFamily",
    "ModelSpec",
    "SampleGrid",
    "AssumptionItem",
    "AssumptionReport",
    "PhiReport",
    "ModelError",
    "eval_psi",
    "eval_dpsi",
    "check_assumptions",
    "check_phi",
    "model_from_id",
    "CATALOG_IDS",
]

# Classification tolerances.  These are classification thresholds, not proof
# bounds: they are chosen so that every catalog model lands on the correct
# side with a wide margin.
SAT_TOL = 1e-3
MONO_TOL = 1e-10
FIT_TOL = 0.1
PARITY_TOL = 1e-12
ISO_TOL = 1e-9
# Strict-decay margin: "exponent > q" is accepted only above q + this margin,
# so that borderline cases (Wilson's p=1 profile decays exactly like r^-2)
# classify as failing the strict condition.
EXPONENT_MARGIN = 0.05
# Tail samples below this magnitude are treated as numerically zero
# (exponentially decaying profiles underflow on the far grid).
UNDERFLOW_FLOOR = 1e-280


class ModelError(ValueError):
    """Invalid model construction or evaluation request."""


# ---------------------------------------------------------------------------
# psi families
# ---------------------------------------------------------------------------

def _power_psi(r: np.ndarray, p: float) -> np.ndarray:
    """r / (1+|r|^p)^(1/p), evaluated in overflow-safe form."""
    r = np.asarray(r, dtype=float)
    a = np.abs(r)
    out = np.empty_like(a)
    small = a <= 1.0
    out[small] = r[small] / np.power(1.0 + np.power(a[small], p), 1.0 / p)
    big = ~small
    # |r| > 1: factor |r| out of the root so |r|^p never overflows
    out[big] = np.sign(r[big]) / np.power(1.0 + np.power(a[big], -p), 1.0 / p)
    return out


def _power_dpsi(r: np.ndarray, p: float) -> np.ndarray:
    """d/dr of the power profile: (1+|r|^p)^(-(p+1)/p)."""
    r = np.asarray(r, dtype=float)
    a = np.abs(r)
    out = np.empty_like(a)
    small = a <= 1.0
    out[small] = np.power(1.0 + np.power(a[small], p), -(p + 1.0) / p)
    big = ~small
    out[big] = np.power(a[big], -(p + 1.0)) * np.power(
        1.0 + np.power(a[big], -p), -(p + 1.0) / p
    )
    return out


def _coth_psi(r: np.ndarray) -> np.ndarray:
    """coth(r) - 1/r with a series branch near the origin.

    Direct evaluation loses ~8 digits below |r| ~ 1e-2 to cancellation; the
    odd Laurent tail r/3 - r^3/45 + 2 r^5/945 is exact to 1e-15 there.
    """
    r = np.asarray(r, dtype=float)
    a = np.abs(r)
    out = np.empty_like(a)
    small = a < 1e-2
    rs = r[small]
    out[small] = rs / 3.0 - rs**3 / 45.0 + 2.0 * rs**5 / 945.0
    rb = r[~small]
    out[~small] = 1.0 / np.tanh(rb) - 1.0 / rb
    return out


def _coth_dpsi(r: np.ndarray) -> np.ndarray:
    """1/r^2 - 1/sinh(r)^2, series near 0 and asymptotic branch for large r."""
    r = np.asarray(r, dtype=float)
    a = np.abs(r)
    out = np.empty_like(a)
    small = a < 2e-2
    rs = r[small]
    out[small] = 1.0 / 3.0 - rs**2 / 15.0 + 2.0 * rs**4 / 189.0
    mid = (~small) & (a < 30.0)
    rm = r[mid]
    out[mid] = 1.0 / rm**2 - 1.0 / np.sinh(rm) ** 2
    big = a >= 30.0  # csch^2 < 1e-25: negligible against 1/r^2
    out[big] = 1.0 / r[big] ** 2
    return out


@dataclass(frozen=True)
class PsiFamily:
    """A saturating flux profile psi together with its radial form.

    ``kind`` selects the family: ``relativistic`` (power family, parameter
    ``p >= 1``; p=2 is the relativistic heat profile, p=1 Wilson's),
    ``coth``, ``tanh`` (parameter ``gamma > 0``), ``linear`` (the
    non-saturating negative control) or ``custom``.

    For dimensions above one the profile is used in isotropic form
    ``psi(r) = r * g(|r|)`` with ``g(rho) = psi(rho)/rho``.
    """

    kind: str
    p: float = math.nan
    gamma: float = math.nan
    fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    dfn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = ""

    def __post_init__(self):
        if self.kind == "relativistic":
            if not (self.p >= 1.0):
                raise ModelError(f"power family needs p >= 1, got {self.p}")
        elif self.kind == "tanh":
            if not (self.gamma > 0.0):
                raise ModelError(f"tanh family needs gamma > 0, got {self.gamma}")
        elif self.kind == "custom":
            if self.fn is None:
                raise ModelError("custom psi needs an evaluator")
        elif self.kind not in ("coth", "linear"):
            raise ModelError(f"unknown psi kind {self.kind!r}")

    # -- constructors -------------------------------------------------------
    @classmethod
    def relativistic(cls, p: float = 2.0) -> "PsiFamily":
        return cls(kind="relativistic", p=float(p), label=f"relativistic(p={p:g})")

    @classmethod
    def wilson(cls) -> "PsiFamily":
        return cls(kind="relativistic", p=1.0, label="wilson")

    @classmethod
    def coth(cls) -> "PsiFamily":
        return cls(kind="coth", label="coth")

    @classmethod
    def tanh(cls, gamma: float = 1.0) -> "PsiFamily":
        return cls(kind="tanh", gamma=float(gamma), label=f"tanh(gamma={gamma:g})")

    @classmethod
    def linear(cls) -> "PsiFamily":
        return cls(kind="linear", label="linear")

    @classmethod
    def custom(cls, fn, dfn=None, label="custom") -> "PsiFamily":
        return cls(kind="custom", fn=fn, dfn=dfn, label=label)

    # -- scalar evaluators ---------------------------------------------------
    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind == "relativistic":
            return _power_psi(r, self.p)
        if self.kind == "coth":
            return _coth_psi(r)
        if self.kind == "tanh":
            return np.tanh(r / self.gamma)
        if self.kind == "linear":
            return r.copy() if isinstance(r, np.ndarray) else r
        return np.asarray(self.fn(r), dtype=float)

    def deriv(self, r) -> np.ndarray:
        """psi'(r); central differences when a custom profile lacks one."""
        r = np.asarray(r, dtype=float)
        if self.kind == "relativistic":
            return _power_dpsi(r, self.p)
        if self.kind == "coth":
            return _coth_dpsi(r)
        if self.kind == "tanh":
            t = np.tanh(r / self.gamma)
            return (1.0 - t * t) / self.gamma
        if self.kind == "linear":
            return np.ones_like(r)
        if self.dfn is not None:
            return np.asarray(self.dfn(r), dtype=float)
        h = np.maximum(1e-6, 1e-6 * np.abs(r))
        return (np.asarray(self.fn(r + h), float) - np.asarray(self.fn(r - h), float)) / (2.0 * h)

    # -- radial profile g(rho) = psi(rho)/rho -------------------------------
    def g(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if self.kind == "relativistic":
            a = np.where(rho == 0.0, 1.0, rho)
            return np.where(
                rho <= 1.0,
                np.power(1.0 + np.power(np.abs(rho), self.p), -1.0 / self.p),
                np.power(a, -1.0) * np.power(1.0 + np.power(np.abs(a), -self.p), -1.0 / self.p),
            )
        tiny = np.abs(rho) < 1e-8
        safe = np.where(tiny, 1.0, rho)
        vals = self(safe) / safe
        return np.where(tiny, self.deriv(np.zeros_like(rho)), vals)

    def dg(self, rho) -> np.ndarray:
        """g'(rho) = (psi'(rho)*rho - psi(rho)) / rho^2 (odd psi: g'(0) = 0)."""
        rho = np.asarray(rho, dtype=float)
        tiny = np.abs(rho) < 1e-8
        safe = np.where(tiny, 1.0, rho)
        vals = (self.deriv(safe) * safe - self(safe)) / safe**2
        return np.where(tiny, 0.0, vals)

    def defect(self, r) -> np.ndarray:
        """Saturation defect d(r) = |psi(r) - sign(r)| for r > 0.

        Direct subtraction loses the tail once 1 - psi drops near machine
        epsilon, so the saturating families use cancellation-free forms.
        """
        r = np.asarray(r, dtype=float)
        a = np.abs(r)
        if self.kind == "relativistic":
            out = np.empty_like(a)
            small = a <= 1.0
            out[small] = 1.0 - np.abs(_power_psi(r[small], self.p))
            x = np.power(a[~small], -self.p)
            # 1 - (1+x)^(-1/p) without forming 1+x
            out[~small] = -np.expm1(-np.log1p(x) / self.p)
            return out
        if self.kind == "tanh":
            with np.errstate(over="ignore"):
                return 2.0 / (np.exp(2.0 * a / self.gamma) + 1.0)
        if self.kind == "coth":
            out = np.empty_like(a)
            big = a >= 1e-2
            with np.errstate(over="ignore"):
                out[big] = 1.0 / a[big] - 2.0 / np.expm1(2.0 * a[big])
            out[~big] = np.abs(1.0 - np.abs(_coth_psi(r[~big])))
            return out
        return np.abs(np.abs(self(r)) - 1.0)

    def deriv_sup(self) -> float:
        """max of psi' over a wide sample grid; the diffusive CFL scale."""
        return _deriv_sup_cached(self)


@functools.lru_cache(maxsize=64)
def _deriv_sup_cached(psi: PsiFamily) -> float:
    rr = np.concatenate(([0.0], np.logspace(-6, 3, 200)))
    return float(np.max(psi.deriv(rr)))


# ---------------------------------------------------------------------------
# phi families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhiFamily:
    """Degeneracy nonlinearity phi: phi(0)=0, phi>0 elsewhere, Lipschitz.

    ``linear`` is ``phi(z) = s*z`` (the template whose fronts travel at
    exactly s); ``power`` is ``phi(z) = scale*|z|^m`` with m > 1.
    """

    kind: str
    s: float = math.nan
    m: float = math.nan
    scale: float = math.nan
    fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    dfn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.kind == "linear":
            if not (self.s > 0.0):
                raise ModelError(f"linear phi needs s > 0, got {self.s}")
        elif self.kind == "power":
            if not (self.m > 1.0) or not (self.scale > 0.0):
                raise ModelError("power phi needs m > 1 and scale > 0")
        elif self.kind == "custom":
            if self.fn is None:
                raise ModelError("custom phi needs an evaluator")
        else:
            raise ModelError(f"unknown phi kind {self.kind!r}")

    @classmethod
    def linear_speed(cls, s: float = 1.0) -> "PhiFamily":
        return cls(kind="linear", s=float(s))

    @classmethod
    def power(cls, m: float, scale: float = 1.0) -> "PhiFamily":
        return cls(kind="power", m=float(m), scale=float(scale))

    @classmethod
    def custom(cls, fn, dfn=None) -> "PhiFamily":
        return cls(kind="custom", fn=fn, dfn=dfn)

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.kind == "linear":
            return self.s * np.abs(z)
        if self.kind == "power":
            return self.scale * np.power(np.abs(z), self.m)
        return np.asarray(self.fn(z), dtype=float)

    def deriv(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.kind == "linear":
            return np.full_like(z, self.s)
        if self.kind == "power":
            return self.scale * self.m * np.power(np.abs(z), self.m - 1.0)
        if self.dfn is not None:
            return np.asarray(self.dfn(z), dtype=float)
        h = np.maximum(1e-7, 1e-7 * np.abs(z))
        return (np.asarray(self.fn(z + h), float) - np.asarray(self.fn(z - h), float)) / (2.0 * h)

    def theta(self, beta: float) -> float:
        """max of phi' over [0, beta]: the support spreading bound.

        Golden-section search on -phi' plus endpoint checks; exact for the
        built-in families whose phi' is monotone.
        """
        if beta <= 0.0:
            return float(self.deriv(0.0))
        if self.kind == "linear":
            return self.s
        if self.kind == "power":
            return float(self.scale * self.m * beta ** (self.m - 1.0))
        lo, hi = 0.0, float(beta)
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = lo, hi
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fd = float(self.deriv(c)), float(self.deriv(d))
        for _ in range(80):
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = float(self.deriv(c))
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = float(self.deriv(d))
        interior = max(fc, fd)
        return max(interior, float(self.deriv(lo)), float(self.deriv(hi)))

    def speed_sup(self, beta: float) -> float:
        """max of phi(z)/z over (0, beta]; equals phi(beta)/beta for convex phi."""
        if beta <= 0.0:
            return 0.0
        if self.kind == "linear":
            return self.s
        if self.kind == "power":
            return float(self.scale * beta ** (self.m - 1.0))
        zz = np.linspace(beta / 512.0, beta, 512)
        return float(np.max(self(zz) / zz))


# ---------------------------------------------------------------------------
# model spec and catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelSpec:
    """A psi profile plus a phi nonlinearity: one equation of the family.

    ``s`` is the characteristic (saturation) speed and ``L`` the
    characteristic length; the analysis is carried out with L scaled to 1.
    """

    psi: PsiFamily
    phi: PhiFamily
    s: float = 1.0
    L: float = 1.0
    dimension: int = 1

    def __post_init__(self):
        if not (self.s > 0.0 and self.L > 0.0):
            raise ModelError("need s > 0 and L > 0")
        if self.dimension < 1:
            raise ModelError("dimension must be >= 1")
        if self.dimension > 1 and self.psi.kind == "custom" and self.psi.fn is None:
            raise ModelError("dimension > 1 needs an isotropic radial profile")

    @property
    def id(self) -> str:
        return self.psi.label or self.psi.kind


CATALOG_IDS = ("rhe", "wilson", "larsen:p=<x>", "coth", "tanh:gamma=<x>", "linear")


def model_from_id(model_id: str, s: float = 1.0, phi: Optional[PhiFamily] = None,
                  dimension: int = 1, L: float = 1.0) -> ModelSpec:
    """Build a catalog model from its string id.

    Ids: ``rhe`` (power p=2), ``wilson`` (p=1), ``larsen:p=<x>``, ``coth``,
    ``tanh:gamma=<x>``, ``linear``.  ``phi`` defaults to linear speed s.
    """
    key = model_id.strip().lower()
    if key == "rhe":
        psi = PsiFamily.relativistic(2.0)
    elif key == "wilson":
        psi = PsiFamily.wilson()
    elif key.startswith("larsen:p="):
        try:
            p = float(key.split("=", 1)[1])
        except ValueError:
            raise ModelError(f"bad larsen parameter in {model_id!r}")
        psi = PsiFamily.relativistic(p)
    elif key == "coth":
        psi = PsiFamily.coth()
    elif key.startswith("tanh:gamma="):
        try:
            gamma = float(key.split("=", 1)[1])
        except ValueError:
            raise ModelError(f"bad tanh parameter in {model_id!r}")
        psi = PsiFamily.tanh(gamma)
    elif key == "tanh":
        psi = PsiFamily.tanh(1.0)
    elif key == "linear":
        psi = PsiFamily.linear()
    else:
        raise ModelError(f"unknown model id {model_id!r} (known: {', '.join(CATALOG_IDS)})")
    if phi is None:
        phi = PhiFamily.linear_speed(s)
    return ModelSpec(psi=psi, phi=phi, s=s, L=L, dimension=dimension)


# ---------------------------------------------------------------------------
# evaluation operations
# ---------------------------------------------------------------------------

def eval_psi(model: ModelSpec, r) -> np.ndarray:
    """Evaluate psi(r).

    In one dimension ``r`` is a scalar or an array of scalars.  In dimension
    d > 1, ``r`` is a vector of shape (d,) or a batch (n, d); the isotropic
    form r*g(|r|) is used.
    """
    r = np.asarray(r, dtype=float)
    if model.dimension == 1:
        return model.psi(r)
    if r.ndim == 1:
        if r.shape[0] != model.dimension:
            raise ModelError(f"expected vector of length {model.dimension}, got {r.shape}")
        return r * model.psi.g(np.linalg.norm(r))
    if r.ndim == 2 and r.shape[1] == model.dimension:
        norms = np.linalg.norm(r, axis=1)
        return r * model.psi.g(norms)[:, None]
    raise ModelError(f"shape {r.shape} does not match dimension {model.dimension}")


def eval_dpsi(model: ModelSpec, r) -> np.ndarray:
    """Jacobian of psi.

    1D: psi'(r), elementwise.  d > 1: the matrix
    ``g(|r|) I + g'(|r|) r r^T / |r|`` (``g(0) I`` at the origin).
    """
    r = np.asarray(r, dtype=float)
    if model.dimension == 1:
        return model.psi.deriv(r)
    if r.ndim != 1 or r.shape[0] != model.dimension:
        raise ModelError(f"expected vector of length {model.dimension}, got {r.shape}")
    d = model.dimension
    rho = float(np.linalg.norm(r))
    if rho == 0.0:
        return float(model.psi.g(0.0)) * np.eye(d)
    g = float(model.psi.g(rho))
    dg = float(model.psi.dg(rho))
    return g * np.eye(d) + dg * np.outer(r, r) / rho


# ---------------------------------------------------------------------------
# assumption checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleGrid:
    """Sampling plan for the assumption checker.

    Log-spaced radii capture the tail exponents; the linear grid resolves
    the behavior near the origin.
    """

    r_min: float = 1e-6
    r_max: float = 1e6
    n_log: int = 200
    lin_max: float = 2.0
    n_lin: int = 100

    def __post_init__(self):
        if self.r_max < 1e3:
            raise ModelError("tail grid must reach at least 1e3")

    def radii(self) -> np.ndarray:
        logs = np.logspace(math.log10(self.r_min), math.log10(self.r_max), self.n_log)
        lins = np.linspace(0.0, self.lin_max, self.n_lin)
        return np.unique(np.concatenate((lins, logs)))

    def tail(self) -> np.ndarray:
        """Last decade of the log grid, used for exponent fits."""
        logs = np.logspace(math.log10(self.r_min), math.log10(self.r_max), self.n_log)
        return logs[logs >= self.r_max / 10.0]


@dataclass(frozen=True)
class AssumptionItem:
    name: str
    verdict: str  # "pass" | "fail" | "indeterminate"
    worst_point: float
    residual: float
    fitted_exponent: Optional[float] = None

    def to_dict(self) -> dict:
        exp = self.fitted_exponent
        if exp is not None and math.isinf(exp):
            exp = "inf"
        return {
            "item": self.name,
            "verdict": self.verdict,
            "worst_point": self.worst_point,
            "residual": self.residual,
            "fitted_exponent": exp,
        }


@dataclass(frozen=True)
class AssumptionReport:
    model_id: str
    items: tuple
    d_exponent: float
    d_fit_residual: float
    dpsi_exponent: float
    dpsi_fit_residual: float
    grid: SampleGrid

    def item(self, name: str) -> AssumptionItem:
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)

    def verdict(self, name: str) -> str:
        return self.item(name).verdict

    @property
    def core_pass(self) -> bool:
        """All structural items hold (saturation, parity, monotonicity, decay)."""
        names = ("zero_at_origin", "saturation", "oddness", "monotonicity", "psi_prime_decay")
        return all(self.verdict(n) == "pass" for n in names)

    @property
    def persistence_pass(self) -> bool:
        """d = O(1/r) and psi' = O(r^-2-eps): jump interfaces persist."""
        return (self.verdict("persistence_d_decay") == "pass"
                and self.verdict("persistence_psi_prime") == "pass")

    def semicircle_full_speed_ok(self) -> bool:
        """d = O(1/r) and psi' = O(1/r^2): the vertical-contact sub-solution
        may travel at the full saturation speed."""
        return (self.d_exponent >= 1.0 - EXPONENT_MARGIN
                and self.dpsi_exponent >= 2.0 - EXPONENT_MARGIN)

    def theta_power_ok(self, theta: float, c_equals_s: bool) -> bool:
        """Decay condition for the positive-trace profile with exponent theta."""
        if not (0.0 < theta < 1.0):
            raise ModelError("theta must lie in (0,1)")
        if c_equals_s:
            required = (2.0 - theta) / (1.0 - theta)
            return self.dpsi_exponent >= required - EXPONENT_MARGIN
        required = 1.0 / (1.0 - theta)
        return self.dpsi_exponent > required + EXPONENT_MARGIN

    def to_json(self, indent: int | None = 2) -> str:
        payload = {
            "model": self.model_id,
            "items": [it.to_dict() for it in self.items],
            "d_exponent": "inf" if math.isinf(self.d_exponent) else self.d_exponent,
            "d_fit_residual": self.d_fit_residual,
            "dpsi_exponent": "inf" if math.isinf(self.dpsi_exponent) else self.dpsi_exponent,
            "dpsi_fit_residual": self.dpsi_fit_residual,
            "grid": {
                "r_min": self.grid.r_min,
                "r_max": self.grid.r_max,
                "n_log": self.grid.n_log,
                "lin_max": self.grid.lin_max,
                "n_lin": self.grid.n_lin,
            },
        }
        return json.dumps(payload, indent=indent)


def _fit_tail_exponent(r: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Least-squares slope of log|values| against log r on the tail grid.

    Returns (decay_exponent, rms_residual).  Values that have underflowed to
    (numerical) zero indicate super-polynomial decay: exponent = +inf.
    Non-decaying data comes back with a negative exponent.
    """
    v = np.abs(np.asarray(values, dtype=float))
    mask = np.isfinite(v)
    if not np.any(mask):
        return math.nan, math.inf
    r, v = r[mask], v[mask]
    if np.all(v < UNDERFLOW_FLOOR):
        return math.inf, 0.0
    pos = v > UNDERFLOW_FLOOR
    if np.count_nonzero(pos) < 3:
        return math.inf, 0.0
    x = np.log(r[pos])
    y = np.log(v[pos])
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = A @ coef
    rms = float(np.sqrt(np.mean((y - fit) ** 2)))
    return float(-coef[0]), rms


def _worst(points: np.ndarray, residuals: np.ndarray) -> tuple[float, float]:
    residuals = np.asarray(residuals, dtype=float)
    bad = np.where(np.isnan(residuals), -np.inf, residuals)
    i = int(np.argmax(bad))
    return float(np.asarray(points, dtype=float).ravel()[i]), float(residuals.ravel()[i])


def check_assumptions(model: ModelSpec, grid: SampleGrid | None = None) -> AssumptionReport:
    """Classify a model against the structural requirements.

    One verdict per item, each carrying the worst sample point and its
    residual.  Non-finite evaluations mark the item indeterminate instead of
    raising.  Tail exponents of d(r) = |psi(r) - sign(r)| and of psi' are
    fitted on the last decade and decide the interface-persistence items.
    """
    grid = grid or SampleGrid()
    psi = model.psi
    rr = grid.radii()
    rr_pos = rr[rr > 0.0]
    items: list[AssumptionItem] = []

    def guarded(fn, arg):
        try:
            with np.errstate(all="ignore"):
                return np.asarray(fn(arg), dtype=float)
        except Exception:
            return np.full(np.shape(arg), np.nan)

    vals = guarded(psi, rr)
    dvals = guarded(psi.deriv, rr)

    def make_item(name, residuals, points, tol, exponent=None):
        res = np.asarray(residuals, dtype=float)
        if np.any(~np.isfinite(res)):
            wp, wr = _worst(points, res)
            return AssumptionItem(name, "indeterminate", wp, wr, exponent)
        wp, wr = _worst(points, res)
        verdict = "pass" if wr <= tol else "fail"
        return AssumptionItem(name, verdict, wp, wr, exponent)

    # zero at origin
    v0 = guarded(psi, np.array([0.0]))[0]
    items.append(make_item("zero_at_origin", np.array([abs(v0)]), np.array([0.0]), 1e-12))

    # smoothness proxy: largest jump of sampled psi' on the fine linear grid
    fine = np.linspace(0.0, grid.lin_max, 4 * grid.n_lin)
    dfine = guarded(psi.deriv, fine)
    jumps = np.abs(np.diff(dfine))
    items.append(make_item("smoothness_proxy", jumps, fine[1:], 0.1))

    # saturation: |1 - |psi|| small at the largest radii and d(r) decreasing
    tail_r = grid.tail()
    tail_d = guarded(psi.defect, tail_r)
    d_exp, d_rms = _fit_tail_exponent(tail_r, tail_d)
    d_exp_reported = d_exp if (d_rms < FIT_TOL or math.isinf(d_exp)) else math.nan
    sat_res = tail_d[-3:] if tail_d.size >= 3 else tail_d
    sat_pts = tail_r[-3:] if tail_d.size >= 3 else tail_r
    if np.any(~np.isfinite(sat_res)):
        items.append(AssumptionItem("saturation", "indeterminate", *(_worst(sat_pts, sat_res)), d_exp_reported))
    else:
        wp, wr = _worst(sat_pts, sat_res)
        decreasing = math.isinf(d_exp) or (np.isfinite(d_exp) and d_exp > 0.0)
        verdict = "pass" if (wr <= SAT_TOL and decreasing) else "fail"
        items.append(AssumptionItem("saturation", verdict, wp, wr, d_exp_reported))

    # oddness
    neg = guarded(psi, -rr_pos)
    parity = np.abs(neg + guarded(psi, rr_pos))
    items.append(make_item("oddness", parity, rr_pos, PARITY_TOL))

    # monotonicity: sampled psi' >= -tol
    items.append(make_item("monotonicity", -dvals, rr, MONO_TOL))

    # psi' decay, the o(1/r) requirement: tail exponent strictly above 1
    tail_dv = guarded(psi.deriv, tail_r)
    dpsi_exp, dpsi_rms = _fit_tail_exponent(tail_r, tail_dv)
    dpsi_exp_reported = dpsi_exp if (dpsi_rms < FIT_TOL or math.isinf(dpsi_exp)) else math.nan
    if np.any(~np.isfinite(tail_dv)):
        items.append(AssumptionItem("psi_prime_decay", "indeterminate", grid.r_max, math.nan, dpsi_exp_reported))
    else:
        ok = math.isinf(dpsi_exp) or dpsi_exp > 1.0 + EXPONENT_MARGIN
        wr = float(np.max(np.abs(tail_dv * tail_r)))
        items.append(AssumptionItem(
            "psi_prime_decay", "pass" if ok else "fail", grid.r_max, wr, dpsi_exp_reported))

    # isotropy bound |rho g'/g| <= 1
    with np.errstate(all="ignore"):
        gv = guarded(psi.g, rr_pos)
        dgv = guarded(psi.dg, rr_pos)
        ratio = np.abs(rr_pos * dgv / gv)
    items.append(make_item("isotropy_bound", ratio - 1.0, rr_pos, ISO_TOL))

    # rho*g(rho) -> 1
    rad = np.abs(tail_r * guarded(psi.g, tail_r) - 1.0)
    items.append(make_item("radial_saturation", rad, tail_r, SAT_TOL))

    # rho^2 g'(rho) -> -1 (the condition for full-speed spreading in d > 1)
    g2 = np.abs(tail_r**2 * guarded(psi.dg, tail_r) + 1.0)
    items.append(make_item("gprime_limit", g2, tail_r, SAT_TOL))

    # positive semidefiniteness of the Jacobian via leading principal minors
    if model.dimension > 1:
        minors_res = []
        pts = []
        for rho in np.logspace(-3, 3, 25):
            vec = np.full(model.dimension, rho / math.sqrt(model.dimension))
            try:
                J = eval_dpsi(model, vec)
                worst = min(
                    float(np.linalg.det(J[:k, :k])) for k in range(1, model.dimension + 1)
                )
            except Exception:
                worst = math.nan
            minors_res.append(-worst)
            pts.append(rho)
        items.append(make_item("jacobian_psd", np.array(minors_res), np.array(pts), MONO_TOL))

    # persistence classification
    d_ok = math.isinf(d_exp) or (d_rms < FIT_TOL and d_exp >= 1.0 - EXPONENT_MARGIN)
    items.append(AssumptionItem(
        "persistence_d_decay", "pass" if d_ok else "fail",
        grid.r_max, d_rms, d_exp_reported))
    p_ok = math.isinf(dpsi_exp) or (dpsi_rms < FIT_TOL and dpsi_exp >= 2.0 + EXPONENT_MARGIN)
    items.append(AssumptionItem(
        "persistence_psi_prime", "pass" if p_ok else "fail",
        grid.r_max, dpsi_rms, dpsi_exp_reported))

    return AssumptionReport(
        model_id=model.id,
        items=tuple(items),
        d_exponent=d_exp,
        d_fit_residual=d_rms,
        dpsi_exponent=dpsi_exp,
        dpsi_fit_residual=dpsi_rms,
        grid=grid,
    )


# ---------------------------------------------------------------------------
# phi checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhiReport:
    items: tuple
    slope_at_zero: float
    lipschitz_bound: float
    convex: bool

    def item(self, name: str) -> AssumptionItem:
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)

    @property
    def all_pass(self) -> bool:
        return all(it.verdict == "pass" for it in self.items)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps({
            "items": [it.to_dict() for it in self.items],
            "slope_at_zero": self.slope_at_zero,
            "lipschitz_bound": self.lipschitz_bound,
            "convex": self.convex,
        }, indent=indent)


def check_phi(phi: PhiFamily, z_max: float) -> PhiReport:
    """Verify phi(0)=0, positivity, a finite one-sided slope at zero, a
    sampled Lipschitz bound, and convexity (needed by the jump-speed laws)."""
    if z_max <= 0.0:
        raise ModelError("z_max must be positive")
    items: list[AssumptionItem] = []
    zz = np.linspace(0.0, z_max, 512)

    with np.errstate(all="ignore"):
        vals = np.asarray(phi(zz), dtype=float)

    v0 = float(vals[0])
    items.append(AssumptionItem(
        "zero_at_origin", "pass" if abs(v0) <= 1e-12 else "fail", 0.0, abs(v0)))

    pos = vals[1:]
    if np.any(~np.isfinite(pos)):
        items.append(AssumptionItem("positive", "indeterminate", z_max, math.nan))
    else:
        wmin = float(np.min(pos))
        wp = float(zz[1:][int(np.argmin(pos))])
        items.append(AssumptionItem("positive", "pass" if wmin > 0.0 else "fail", wp, -wmin))

    # one-sided difference quotients phi(h)/h on h = z_max * 10^-k must settle
    hs = z_max * np.power(10.0, -np.arange(2, 10, dtype=float))
    with np.errstate(all="ignore"):
        quot = np.asarray(phi(hs), dtype=float) / hs
    finite = np.all(np.isfinite(quot))
    settled = finite and abs(quot[-1] - quot[-2]) <= 1e-6 * max(1.0, abs(quot[-1]))
    slope = float(quot[-1]) if finite else math.nan
    items.append(AssumptionItem(
        "finite_slope_at_zero",
        "pass" if settled else ("fail" if finite else "indeterminate"),
        float(hs[-1]),
        abs(quot[-1] - quot[-2]) if finite else math.nan))

    diffs = np.diff(vals) / np.diff(zz)
    lip = float(np.max(np.abs(diffs))) if np.all(np.isfinite(diffs)) else math.inf
    items.append(AssumptionItem(
        "lipschitz", "pass" if math.isfinite(lip) else "indeterminate", z_max, lip))

    second = np.diff(vals, 2)
    convex = bool(np.all(second >= -1e-12 * max(1.0, float(np.max(np.abs(vals)))))) \
        if np.all(np.isfinite(second)) else False
    items.append(AssumptionItem(
        "convex", "pass" if convex else "fail", z_max,
        float(-np.min(second)) if np.all(np.isfinite(second)) else math.nan))

    return PhiReport(items=tuple(items), slope_at_zero=slope,
                     lipschitz_bound=lip, convex=convex)
