"""Cramer-Lundberg baseline with exponential claims.

The process X_t = x + c t - S_t has Laplace exponent
kappa(theta) = c theta + lam (mu / (mu + theta) - 1).  Its q-scale function
has a two-exponential closed form built from the roots of kappa = q; this is
the kernel of the Volterra renewal solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError

__all__ = [
    "CramerLundbergParams",
    "laplace_exponent",
    "shifted_exponent",
    "cl_roots",
    "cl_scale_W",
    "cl_scale_w",
]


@dataclass(frozen=True)
class CramerLundbergParams:
    c: float
    lam: float
    mu: float
    alpha0: float = 0.0

    def __post_init__(self):
        for name in ("c", "lam", "mu", "alpha0"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite")
        if self.c <= 0:
            raise DomainError(f"premium c must be > 0, got {self.c}")
        if self.lam <= 0 or self.mu <= 0:
            raise DomainError("lambda and mu must be > 0")
        if self.alpha0 != 0.0:
            raise ContractError("only alpha0 = 0 (no diffusion) is supported")


def laplace_exponent(p: CramerLundbergParams, theta):
    """kappa(theta) = c theta + lam (mu/(mu+theta) - 1)."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta == -p.mu):
        raise DomainError("kappa has a pole at theta = -mu")
    out = p.c * theta + p.lam * (p.mu / (p.mu + theta) - 1.0) + p.alpha0 * theta**2
    return out if out.shape else float(out)


def shifted_exponent(p: CramerLundbergParams, theta, q: float):
    """kappa(theta) - q, the symbol with the killing rate folded in."""
    return laplace_exponent(p, theta) - q


def cl_roots(p: CramerLundbergParams, q: float = 0.0) -> tuple[float, float]:
    """Roots (phi, rho) of c t^2 + (c mu - lam - q) t - q mu = 0, phi >= 0 >= rho."""
    if q < 0:
        raise DomainError("q must be >= 0")
    c, lam, mu = p.c, p.lam, p.mu
    B = c * mu - lam - q
    disc = math.sqrt(B * B + 4.0 * c * q * mu)
    # larger-magnitude root from the stable branch, the other from the product -q mu / c
    if B >= 0:
        rho = -(B + disc) / (2.0 * c)
        phi = (q * mu / c) / -rho if rho != 0.0 else 0.0
    else:
        phi = (-B + disc) / (2.0 * c)
        rho = -(q * mu / c) / phi
    return phi, rho


def _separated(p, phi, rho) -> bool:
    """Roots far enough apart for the two-exponential form to lose < 1e-10 to cancellation."""
    return phi - rho > 1e-6 * (p.mu + abs(phi) + abs(rho))


def _sinhc(d, x):
    """sinh(d x) / d, continuous at d = 0."""
    dx = d * x
    small = np.abs(dx) < 1e-8
    safe_d = np.where(small, 1.0, d)
    return np.where(small, x * (1.0 + dx * dx / 6.0), np.sinh(dx) / safe_d)


def cl_scale_W(p: CramerLundbergParams, q: float, x):
    """q-scale function W_q(x) = [(mu+phi) e^{phi x} - (mu+rho) e^{rho x}] / (c (phi - rho)).

    Near phi = rho (q = 0 with c mu = lam) it is rewritten around the root
    midpoint, which stays finite in the confluent limit.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("scale function needs x >= 0")
    phi, rho = cl_roots(p, q)
    if _separated(p, phi, rho):
        out = ((p.mu + phi) * np.exp(phi * x) - (p.mu + rho) * np.exp(rho * x)) / (p.c * (phi - rho))
    else:
        m, d = 0.5 * (phi + rho), 0.5 * (phi - rho)
        out = np.exp(m * x) * ((p.mu + m) * _sinhc(d, x) + np.cosh(d * x)) / p.c
    return out if out.shape else float(out)


def cl_scale_w(p: CramerLundbergParams, q: float, x):
    """Derivative of ``cl_scale_W``; w_q(0) = (lam + q) / c^2."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("scale function needs x >= 0")
    phi, rho = cl_roots(p, q)
    if _separated(p, phi, rho):
        # both terms are nonnegative: phi >= 0 and rho <= 0 < mu + rho
        out = ((p.mu + phi) * phi * np.exp(phi * x) - (p.mu + rho) * rho * np.exp(rho * x)) / (p.c * (phi - rho))
    else:
        m, d = 0.5 * (phi + rho), 0.5 * (phi - rho)
        # d/dx of e^{mx}[(mu+m) S + C] with S' = C, C' = d^2 S
        S = _sinhc(d, x)
        C = np.cosh(d * x)
        out = np.exp(m * x) * (m * ((p.mu + m) * S + C) + (p.mu + m) * C + d * d * S) / p.c
    return out if out.shape else float(out)
