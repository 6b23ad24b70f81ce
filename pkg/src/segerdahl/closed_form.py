"""Closed-form exit laws for the Segerdahl process with exponential claims.

All formulas are written in the normalized coordinate z = mu (x + c/r), in
which the absolute ruin level -c/r sits at z = 0.  With q~ = q/r,
lam~ = lam/r and n = q~ + lam~, the two basic solutions of the confluent
hypergeometric equation z y'' + (z + 1 - n) y' - q~ y = 0 are

    K1(q~, n, z) = z^n e^-z M(q~+1, n+1, z)     (increasing, K1(0) = 0)
    K2(q~, n, z) = z^n e^-z U(q~+1, n+1, z)     (decreasing to 0)

The killed ruin probability below a is lam~ K2(q~, n, z) / K2(q~, n+1, z_a),
and the two-sided scale function is the determinant combination of K1 and K2
that makes W(., a) vanish under the jump-to-below-a boundary condition.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from .errors import ContractError, DiagnosticError, DomainError
from .models import ExitQuery, ModelParams
from .special_functions import kummer_M, tricomi_U, upper_incomplete_gamma

__all__ = [
    "to_normalized",
    "from_normalized",
    "K1",
    "K2",
    "harmonic_H",
    "ruin_psi",
    "deficit_transform",
    "scale_W",
    "scale_W_second_derivative",
    "two_sided",
    "ruin_q0",
    "survival_q0",
    "ruin_density_q0",
    "as_probability",
]

PROB_SLACK = 1e-9


def as_probability(value: float, what: str = "probability") -> float:
    """Clip into [0, 1] after checking the excursion is only rounding."""
    if not (-PROB_SLACK <= value <= 1.0 + PROB_SLACK):
        raise DiagnosticError(f"{what} = {value!r} lies outside [0, 1]")
    return min(max(float(value), 0.0), 1.0)


def to_normalized(p: ModelParams, x):
    """z = mu (x + c/r)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < p.absolute_ruin - 1e-14 * max(1.0, abs(p.absolute_ruin))):
        raise DomainError(f"level below the absolute ruin level {p.absolute_ruin}")
    z = np.maximum(p.mu * (x + p.c_t), 0.0)
    return z if z.shape else float(z)


def from_normalized(p: ModelParams, z):
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("normalized level must be >= 0")
    x = z / p.mu - p.c_t
    return x if x.shape else float(x)


def _power_exp(n: float, z):
    # z^n e^-z without overflow in either factor
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore"):
        return np.exp(n * np.log(z) - z)


def K1(q_t: float, n: float, z):
    """z^n e^-z M(q~+1, n+1, z); accepts array ``z``."""
    if n <= 0:
        raise DomainError("n must be positive")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("z must be >= 0")
    out = np.where(z > 0, _power_exp(n, np.where(z > 0, z, 1.0)) * kummer_M(q_t + 1.0, n + 1.0, z), 0.0)
    return out if out.shape else float(out)


def _K2_scalar(q_t: float, n: float, z: float) -> float:
    if z == 0.0 or n * -math.log(z) > 600.0:
        # z^n U(q~+1, n+1, z) -> Gamma(n) / Gamma(q~+1); below the cutoff U itself overflows
        # and the neglected correction is O(z^min(n, 1)) < e^-600
        return math.exp(math.lgamma(n) - math.lgamma(q_t + 1.0))
    return float(_power_exp(n, z)) * tricomi_U(q_t + 1.0, n + 1.0, z)


def K2(q_t: float, n: float, z):
    """z^n e^-z U(q~+1, n+1, z); at z = 0 the limit Gamma(n)/Gamma(q~+1)."""
    if n <= 0:
        raise DomainError("n must be positive")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("z must be >= 0")
    if z.shape:
        return np.array([_K2_scalar(q_t, n, float(v)) for v in z.ravel()]).reshape(z.shape)
    return _K2_scalar(q_t, n, float(z))


def harmonic_H(p: ModelParams, x):
    """Increasing q-harmonic function K1(q~, n, z(x)); zero at absolute ruin."""
    return K1(p.q_t, p.n, to_normalized(p, x))


def _ruin_unchecked(p: ModelParams, x: float, a: float) -> float:
    z = to_normalized(p, x)
    za = to_normalized(p, a)
    if z == 0.0 and za == 0.0:
        # Gamma(n) / Gamma(n + 1) in closed form, so the anchor is exact
        return p.lam / (p.lam + p.q)
    if p.q == 0.0:
        # K2 reduces to upper incomplete gammas
        den = upper_incomplete_gamma(p.lam_t + 1.0, za)
        return p.lam_t * upper_incomplete_gamma(p.lam_t, z) / den if z > 0 else p.lam_t * special.gamma(p.lam_t) / den
    return p.lam_t * K2(p.q_t, p.n, z) / K2(p.q_t, p.n + 1.0, za)


def ruin_psi(p: ModelParams, x: float, a: float) -> float:
    """E_x[exp(-q T_a^-)], the killed probability of dropping below ``a``.

    ``a`` may equal the absolute ruin level -c/r, where the limit value of
    K2(q~, n+1, 0) is used; in particular Psi(-c/r, -c/r) = lam / (lam + q).
    """
    if x < a:
        raise DomainError(f"need x >= a, got x={x}, a={a}")
    return as_probability(_ruin_unchecked(p, x, a), "ruin probability")


def deficit_transform(p: ModelParams, x: float, a: float, theta: float) -> float:
    """E_x[exp(-q T - theta (a - X_T))]: the deficit is Exp(mu), independent of T."""
    if theta <= -p.mu:
        raise DomainError("theta must exceed -mu")
    if math.isinf(theta):
        return 0.0
    return ruin_psi(p, x, a) * p.mu / (p.mu + theta)


def _scale_coefficients(p: ModelParams, a: float):
    """(alpha, beta) with W(., a) = alpha K1 - beta K2 in normalized terms."""
    za = to_normalized(p, a)
    q_t, lam_t, n = p.q_t, p.lam_t, p.n
    if za == 0.0:
        return 1.0, 0.0
    # z_a^(n+1) e^-z_a U(q~+1, n+2, z_a) and the M analogue are K2, K1 with n + 1
    alpha = (n + 1.0) * float(K2(q_t, n + 1.0, za))
    beta = lam_t * float(K1(q_t, n + 1.0, za))
    return alpha, beta


def scale_W(p: ModelParams, x, a: float):
    """Two-variable scale function W_q(x, a) in the determinant normalization.

    The bracket of the determinant form is multiplied by z_a^(n+1) e^-z_a,
    which does not affect ratios and keeps the a -> -c/r limit finite: there
    W reduces to H = K1(q~, n, z).
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < a):
        raise DomainError("scale function needs x >= a")
    alpha, beta = _scale_coefficients(p, a)
    z = to_normalized(p, x)
    out = alpha * K1(p.q_t, p.n, z)
    if beta != 0.0:
        out = out - beta * K2(p.q_t, p.n, z)
    return out if np.shape(out) else float(out)


def _K1_derivs(q_t, n, z):
    f = _power_exp(n, z)
    f1 = f * (n / z - 1.0)
    f2 = f * ((n / z - 1.0) ** 2 - n / z**2)
    A, B = q_t + 1.0, n + 1.0
    g = kummer_M(A, B, z)
    g1 = A / B * kummer_M(A + 1, B + 1, z)
    g2 = A * (A + 1) / (B * (B + 1)) * kummer_M(A + 2, B + 2, z)
    return f2 * g + 2 * f1 * g1 + f * g2


def _K2_derivs(q_t, n, z):
    f = _power_exp(n, z)
    f1 = f * (n / z - 1.0)
    f2 = f * ((n / z - 1.0) ** 2 - n / z**2)
    A, B = q_t + 1.0, n + 1.0
    h = tricomi_U(A, B, z)
    h1 = -A * tricomi_U(A + 1, B + 1, z)
    h2 = A * (A + 1) * tricomi_U(A + 2, B + 2, z)
    return f2 * h + 2 * f1 * h1 + f * h2


def scale_W_second_derivative(p: ModelParams, x: float, a: float) -> float:
    """d^2/dx^2 W_q(x, a) for x strictly above the absolute ruin level."""
    z = to_normalized(p, x)
    if z <= 0:
        raise DomainError("second derivative needs x above the absolute ruin level")
    alpha, beta = _scale_coefficients(p, a)
    out = alpha * _K1_derivs(p.q_t, p.n, z)
    if beta != 0.0:
        out -= beta * _K2_derivs(p.q_t, p.n, z)
    return float(p.mu**2 * out)


def two_sided(p: ModelParams, query: ExitQuery) -> tuple[float, float]:
    """(survival, ruin) for the corridor [a, b]: killed up-exit and down-exit values."""
    x, a, b = query.x, query.a, query.b
    if not math.isfinite(b):
        raise DomainError("two_sided needs a finite upper barrier")
    if x == b:
        return 1.0, 0.0
    Wx, Wb = scale_W(p, np.array([x, b]), a)
    survival = as_probability(Wx / Wb, "survival probability")
    ruin = _ruin_unchecked(p, x, a) - survival * _ruin_unchecked(p, b, a)
    return survival, as_probability(ruin, "ruin probability")


def _require_q0(p: ModelParams):
    if p.q != 0.0:
        raise ContractError("this formula is only valid for q = 0")


def ruin_q0(p: ModelParams, x: float) -> float:
    """Psi(x) = lam~ Gamma(lam~, mu(c~+x)) / Gamma(lam~+1, mu c~), ruin below 0."""
    _require_q0(p)
    if x < 0:
        raise DomainError("x must be >= 0")
    return ruin_psi(p, x, 0.0)


def survival_q0(p: ModelParams, x: float) -> float:
    return 1.0 - ruin_q0(p, x)


def ruin_density_q0(p: ModelParams, x):
    """-dPsi/dx = lam~ mu z^(lam~-1) e^-z / Gamma(lam~+1, mu c~) with z = mu(c~+x)."""
    _require_q0(p)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("x must be >= 0")
    z = p.mu * (p.c_t + x)
    den = upper_incomplete_gamma(p.lam_t + 1.0, p.mu * p.c_t)
    out = p.lam_t * p.mu * np.exp((p.lam_t - 1.0) * np.log(z) - z) / den
    return out if out.shape else float(out)


def ruin_density_check(p: ModelParams) -> float:
    """int_0^inf rho(x) dx, which must equal Psi(0)."""
    val, _ = integrate.quad(lambda u: ruin_density_q0(p, u), 0.0, np.inf, epsabs=1e-13, epsrel=1e-12)
    return val
