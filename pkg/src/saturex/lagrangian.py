"""Flux and Lagrangian objects built from a model.

The flux is ``a(z, xi) = phi(z) psi(xi/|z|)`` extended by zero at z = 0,
its potential along rays is ``Phi(r) = integral_0^1 psi(t r) . r dt``, and
``h(z, xi) = a(z, xi) . xi`` has the degree-one recession limit
``h0(z, xi) = phi(z) |xi|``.  The Lagrangian ``f(z, xi) = |z| phi(z)
Phi(xi/|z|)`` obeys a linear-growth sandwich: an upper bound
``phi(z)(1 + |xi|)`` and a lower bound ``C0 phi(z)|xi| - D0 |z| phi(z)``
whose constants are produced constructively here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .models import ModelSpec, ModelError

__all__ = [
    "FluxObjects",
    "QuadratureError",
    "potential",
    "flux_a",
    "h_and_recession",
    "lagrangian_f",
    "growth_constants",
    "verify_growth_bound",
]

# Below this |z| the flux is exactly zero, mirroring the extension by zero
# and keeping xi/|z| representable.
Z_FLOOR = 1e-30
QUAD_ABS_TOL = 1e-10


class QuadratureError(RuntimeError):
    """Ray quadrature failed to converge; carries the residual estimate."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class FluxObjects:
    """Flux/Lagrangian evaluation context for one model."""

    model: ModelSpec
    quad_limit: int = 200


def _radial_psi(model: ModelSpec, rho: np.ndarray) -> np.ndarray:
    """psi along a ray: scalar psi in 1D, rho*g(rho) in higher dimensions."""
    if model.dimension == 1:
        return model.psi(rho)
    return np.asarray(rho) * model.psi.g(rho)


def _ray_integral(model: ModelSpec, magnitude: float, quad_limit: int) -> float:
    """integral_0^1 psi(t r) . r dt for |r| = magnitude along any ray."""
    if magnitude == 0.0:
        return 0.0

    def integrand(t: float) -> float:
        return float(_radial_psi(model, np.array([t * magnitude]))[0])

    val, err = quad(integrand, 0.0, 1.0, epsabs=QUAD_ABS_TOL, epsrel=1e-12,
                    limit=quad_limit)
    val *= magnitude
    err *= magnitude
    if err > 10.0 * max(QUAD_ABS_TOL * max(1.0, magnitude), 1e-12 * abs(val)):
        raise QuadratureError("ray quadrature did not converge", err)
    return val


def potential(flux: FluxObjects, r) -> float:
    """Phi(r): the ray potential of psi.  Scalar r in 1D, a vector above.

    Non-negative, convex along rays, and asymptotically |r| + o(|r|).
    """
    r = np.asarray(r, dtype=float)
    mag = float(np.linalg.norm(r)) if r.ndim else abs(float(r))
    return _ray_integral(flux.model, mag, flux.quad_limit)


def flux_a(flux: FluxObjects, z: float, xi) -> np.ndarray:
    """a(z, xi) = phi(z) psi(xi/|z|); exactly zero when |z| < 1e-30."""
    xi = np.asarray(xi, dtype=float)
    if abs(z) < Z_FLOOR:
        return np.zeros_like(xi)
    model = flux.model
    phi_z = float(model.phi(z))
    if model.dimension == 1 or xi.ndim == 0:
        return phi_z * model.psi(xi / abs(z))
    if xi.shape[0] != model.dimension:
        raise ModelError(f"xi shape {xi.shape} does not match dimension {model.dimension}")
    arg = xi / abs(z)
    return phi_z * arg * model.psi.g(np.linalg.norm(arg))


def h_and_recession(flux: FluxObjects, z: float, xi) -> tuple[float, float]:
    """(h, h0) with h = a(z, xi) . xi >= 0 and h0 = phi(z) |xi| >= h."""
    xi = np.asarray(xi, dtype=float)
    a = flux_a(flux, z, xi)
    h = float(np.dot(np.atleast_1d(a), np.atleast_1d(xi)))
    mag = float(np.linalg.norm(xi)) if xi.ndim else abs(float(xi))
    h0 = float(flux.model.phi(z)) * mag
    return h, h0


def lagrangian_f(flux: FluxObjects, z: float, xi) -> float:
    """f(z, xi) = |z| phi(z) Phi(xi/|z|), extended by zero at z = 0."""
    if abs(z) < Z_FLOOR:
        return 0.0
    xi = np.asarray(xi, dtype=float)
    mag = float(np.linalg.norm(xi)) if xi.ndim else abs(float(xi))
    return abs(z) * float(flux.model.phi(z)) * _ray_integral(
        flux.model, mag / abs(z), flux.quad_limit)


def growth_constants(flux: FluxObjects, c0: float) -> tuple[float, float]:
    """Constants (C0, D0) of the lower bound f >= C0 phi |xi| - D0 |z| phi.

    C0 = c0 and D0 = c0 * r_tilde, where r_tilde is the radius beyond which
    the radial flux component stays above c0 (psi is monotone, so r_tilde
    solves psi(r) = c0; located on the sample grid, refined by bisection).
    """
    if not (0.0 < c0 < 1.0):
        raise ModelError(f"c0 must lie in (0,1), got {c0}")
    model = flux.model
    rr = np.logspace(-8, 8, 400)
    vals = np.asarray(_radial_psi(model, rr), dtype=float)
    above = np.nonzero(vals >= c0)[0]
    if above.size == 0:
        raise ModelError(
            f"radial flux never reaches {c0}; largest r tested {rr[-1]:.3e}")
    hi = rr[above[0]]
    lo = rr[above[0] - 1] if above[0] > 0 else 0.0
    for _ in range(200):
        if hi - lo <= 1e-8 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if float(_radial_psi(model, np.array([mid]))[0]) >= c0:
            hi = mid
        else:
            lo = mid
    r_tilde = 0.5 * (lo + hi)
    return c0, c0 * r_tilde


def verify_growth_bound(flux: FluxObjects, c0_d0: tuple[float, float],
                        n_samples: int = 1000, seed: int = 0,
                        z_max: float = 2.0, xi_max: float = 50.0) -> float:
    """Worst violation of the lower bound over random (z, xi) samples.

    Returns max(C0 phi |xi| - D0 |z| phi - f); non-positive means the bound
    holds everywhere sampled.
    """
    c0, d0 = c0_d0
    rng = np.random.default_rng(seed)
    zs = rng.uniform(1e-6, z_max, n_samples)
    xis = rng.uniform(-xi_max, xi_max, n_samples)
    worst = -math.inf
    model = flux.model
    for z, xi in zip(zs, xis):
        f = lagrangian_f(flux, z, xi)
        bound = c0 * float(model.phi(z)) * abs(xi) - d0 * abs(z) * float(model.phi(z))
        worst = max(worst, bound - f)
    return worst
