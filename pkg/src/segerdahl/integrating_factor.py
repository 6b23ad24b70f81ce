"""Laplace-transform route for the Segerdahl process.

Transforming the Kolmogorov equation of an affine-premium process in x gives
a first-order ODE in the transform variable s, solved with the integrating
factor

    I_q(s) = s^q~ e^{-c~ s} (1 + s/mu)^lam~ ,    Ibar_q(s) = int_s^inf I_q(y) dy.

The scale derivative then has transform Ibar_q(s) / (r I_q(s)) - 1/c, and a
Gerber-Shiu function V with V(0) known has

    s Vhat(s) I_q(s) = int_s^inf I_q(y) [c V(0) - ghat(y)] / r dy.

Everything is evaluated on the positive real axis, so the inversion back to
state space is Gaver-Stehfest.  Ratios Ibar/I are computed directly as
int_0^inf I(s+t)/I(s) dt so that large s never underflows.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from .errors import ContractError, DomainError, EvaluationError, InversionUnstableError
from .models import ModelParams
from .special_functions import tricomi_U

__all__ = [
    "GerberShiuSpec",
    "at_level",
    "integrating_factor_I",
    "I_bar",
    "I_bar_zero_closed",
    "I_laplace_closed",
    "scale_derivative_LT",
    "scale_LT",
    "gerber_shiu_LT",
    "survival_at_zero",
    "survival_at_zero_closed",
    "stehfest_weights",
    "InversionResult",
    "invert_laplace",
    "ruin_via_inversion",
    "scale_via_inversion",
    "scale_derivative_via_inversion",
    "two_sided_via_inversion",
]

QUAD_RTOL = 1e-13
GS_TERMS = 14


def at_level(p: ModelParams, a: float) -> ModelParams:
    """Parameters seen from level a: the local intercept becomes c(a) = c + r a."""
    ca = p.c + p.r * a
    if ca < 0:
        raise DomainError(f"level {a} is below the absolute ruin level")
    return ModelParams(ca, p.r, p.lam, p.mu, p.q)


def _quad(f, lo, hi, what, floor=0.0, **kw):
    """Adaptive quadrature; ``floor`` is an absolute error scale for integrals that cancel."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, lo, hi, epsabs=1e-3 * QUAD_RTOL * floor, epsrel=QUAD_RTOL, limit=400, **kw)
    if not err <= 1e-10 * abs(val) + 1e-12 * floor + 1e-300:
        raise EvaluationError(f"{what} quadrature did not converge", lo=lo, hi=hi, error=err, value=val)
    return val


def integrating_factor_I(p: ModelParams, s, offset: int = 0):
    """I_{q + offset r}(s) = s^(q~+offset) e^{-c~ s} (1 + s/mu)^lam~."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise DomainError("the integrating factor needs s > 0")
    k = p.q_t + offset
    out = np.exp(k * np.log(s) - p.c_t * s + p.lam_t * np.log1p(s / p.mu))
    return out if out.shape else float(out)


def _power_integral(p: ModelParams, s: float, k: float, m: float) -> float:
    """int_s^inf y^k e^{-c~ y} (1 + y/mu)^m dy for k > -1 (s = 0 allowed)."""
    if p.c_t <= 0:
        raise DomainError("Ibar diverges when c = 0")
    c_t, mu = p.c_t, p.mu

    def smooth(y):
        return math.exp(-c_t * y + m * math.log1p(y / mu))

    def full(y):
        return y**k * smooth(y)

    if s >= 1.0:
        return _quad(full, s, math.inf, "Ibar")
    if k <= -1:
        raise DomainError("Ibar at s = 0 needs q~ + offset > -1")
    head = _quad(smooth, 0.0, 1.0, "Ibar", weight="alg", wvar=(k, 0.0))
    tail = _quad(full, 1.0, math.inf, "Ibar")
    if s == 0.0:
        return head + tail
    cut = _quad(smooth, 0.0, s, "Ibar", weight="alg", wvar=(k, 0.0))
    return head - cut + tail


def I_bar(p: ModelParams, s: float, offset: int = 0) -> float:
    """Ibar_{q + offset r}(s) = int_s^inf I_{q+offset r}(y) dy by adaptive quadrature."""
    if s < 0:
        raise DomainError("s must be >= 0")
    return _power_integral(p, float(s), p.q_t + offset, p.lam_t)


def I_bar_zero_closed(p: ModelParams, offset: int = 0) -> float:
    """Ibar_q(0) = mu^(k+1) Gamma(k+1) U(k+1, k+lam~+2, c~ mu) with k = q~ + offset."""
    k = p.q_t + offset
    if k <= -1:
        raise DomainError("need q~ + offset > -1")
    return p.mu ** (k + 1) * special.gamma(k + 1) * tricomi_U(k + 1, k + p.lam_t + 2, p.c_t * p.mu)


def I_laplace_closed(p: ModelParams, s: float) -> float:
    """int_0^inf e^{-s y} I_q(y) dy = mu^(q~+1) Gamma(q~+1) U(q~+1, n+2, mu (c~ + s))."""
    return p.mu ** (p.q_t + 1) * special.gamma(p.q_t + 1) * tricomi_U(p.q_t + 1, p.n + 2, p.mu * (p.c_t + s))


def _ratio_kernel(p: ModelParams, s: float):
    """t -> I(s + t) / I(s), bounded by 1 * polynomial growth times e^{-c~ t}."""
    q_t, c_t, lam_t, mu = p.q_t, p.c_t, p.lam_t, p.mu
    base = mu + s

    def kern(t):
        return math.exp(q_t * math.log1p(t / s) - c_t * t + lam_t * math.log1p(t / base))

    return kern


def _ratio_integral(p: ModelParams, s: float, g: Callable) -> float:
    """int_0^inf [I(s+t)/I(s)] g(s + t) dt."""
    kern = _ratio_kernel(p, s)
    scale = 1.0 / p.c_t
    f = lambda t: kern(t) * g(s + t)
    # the kernel bends on the scales s (from the power) and 1/c~ (from the exponential)
    brk = min(s, scale)
    pieces = [(0.0, brk), (brk, brk + 40.0 * scale), (brk + 40.0 * scale, math.inf)]
    # size of the integral before any cancellation in g
    mag = max(abs(f(t)) for t in (0.0, 0.5 * brk, brk, brk + scale)) * (brk + scale)
    return sum(_quad(f, lo, hi, "transform", floor=mag) for lo, hi in pieces)


def scale_derivative_LT(p: ModelParams, s: float, a: float = 0.0) -> float:
    """Transform of the scale derivative w_q(., a): Ibar_q(s)/(r I_q(s)) - 1/c(a)."""
    if s <= 0:
        raise DomainError("s must be > 0")
    pa = at_level(p, a)
    if pa.c <= 0:
        raise DomainError("bounded-variation branch needs c(a) > 0")
    return _ratio_integral(pa, s, lambda y: 1.0) / p.r - 1.0 / pa.c


def scale_LT(p: ModelParams, s: float, a: float = 0.0) -> float:
    """Transform of cal W_q(., a) normalized by W(a, a) = 1/c(a): (1/c(a) + what(s)) / s."""
    pa = at_level(p, a)
    return (1.0 / pa.c + scale_derivative_LT(p, s, a)) / s


@dataclass(frozen=True)
class GerberShiuSpec:
    """Payoff transform ghat(y) and a tag; use the ``survival``/``ruin`` constructors."""

    g_hat: Callable
    tag: str = "custom"

    @classmethod
    def survival(cls, p: ModelParams) -> "GerberShiuSpec":
        q = p.q
        return cls(lambda y: q / y, "survival")

    @classmethod
    def ruin(cls, p: ModelParams) -> "GerberShiuSpec":
        lam, mu = p.lam, p.mu
        return cls(lambda y: lam / (y + mu), "ruin")


def gerber_shiu_LT(p: ModelParams, spec: GerberShiuSpec, s: float, V0: float, V0_prime: float = 0.0,
                   alpha0: float = 0.0, alpha1: float = 0.0) -> float:
    """s Vhat(s) from s Vhat I = int_s^inf I(y) [(c + alpha0 y) V0 + alpha0 V0' - ghat(y)] / (r + alpha1 y) dy."""
    if s <= 0:
        raise DomainError("s must be > 0")
    if alpha0 != 0.0 or alpha1 != 0.0:
        warnings.warn("nonzero alpha0/alpha1 in the transform ODE is not validated", RuntimeWarning, stacklevel=2)
    probe = abs(spec.g_hat(1e6)) * 1e6
    if not math.isfinite(probe) or probe > 1e9:
        raise ContractError("ghat must decay at least like 1/y")
    c, r, g = p.c, p.r, spec.g_hat

    def integrand(y):
        return ((c + alpha0 * y) * V0 + alpha0 * V0_prime - g(y)) / (r + alpha1 * y)

    return _ratio_integral(p, s, integrand)


def survival_at_zero(p: ModelParams) -> float:
    """1 - Psi_q(0) at the level where c(0) = c, by quadrature of Ibar.

    q > 0: q~ Ibar_{q-r}(0) / (c~ Ibar_q(0)); q = 0: 1 / (c~ Ibar_0(0)).
    """
    if p.c <= 0:
        raise DomainError("needs c > 0")
    if p.q == 0.0:
        return 1.0 / (p.c_t * I_bar(p, 0.0))
    return p.q_t * I_bar(p, 0.0, offset=-1) / (p.c_t * I_bar(p, 0.0))


def survival_at_zero_closed(p: ModelParams) -> float:
    """Hypergeometric form U(q~, n+1, c~ mu) / (c~ mu U(q~+1, n+2, c~ mu)); q = 0 uses U(1, lam~+2, .)."""
    z = p.c_t * p.mu
    if p.q == 0.0:
        return 1.0 / (z * tricomi_U(1.0, p.lam_t + 2.0, z))
    return tricomi_U(p.q_t, p.n + 1.0, z) / (z * tricomi_U(p.q_t + 1.0, p.n + 2.0, z))


@lru_cache(maxsize=None)
def stehfest_weights(terms: int) -> tuple:
    """Exact Stehfest coefficients V_1..V_N as floats (computed in rationals)."""
    if terms < 2 or terms % 2:
        raise DomainError("terms must be an even integer >= 2")
    half = terms // 2
    out = []
    for k in range(1, terms + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, half) + 1):
            acc += Fraction(j**half * math.factorial(2 * j),
                            math.factorial(half - j) * math.factorial(j) * math.factorial(j - 1)
                            * math.factorial(k - j) * math.factorial(2 * j - k))
        out.append(float((-1) ** (k + half) * acc))
    return tuple(out)


@dataclass(frozen=True)
class InversionResult:
    value: float
    previous: float
    terms: int

    @property
    def diagnostic(self) -> float:
        """|f_N - f_{N-2}|, the convergence gap between two Stehfest orders."""
        return abs(self.value - self.previous)


def invert_laplace(F: Callable, t: float, terms: int = GS_TERMS, tol: Optional[float] = 1e-3) -> InversionResult:
    """Gaver-Stehfest estimate of f(t) from F on the positive real axis.

    Raises InversionUnstableError when the N and N-2 estimates differ by more
    than ``tol`` (absolute, scaled by max(1, |f|)); pass ``tol=None`` to skip.
    """
    if t <= 0:
        raise DomainError("t must be > 0")
    ln2t = math.log(2.0) / t
    values = [F(k * ln2t) for k in range(1, terms + 1)]
    est = ln2t * math.fsum(v * w for v, w in zip(values, stehfest_weights(terms)))
    # the lower order reuses the same abscissae k ln2 / t, k <= N-2
    prev = ln2t * math.fsum(v * w for v, w in zip(values[: terms - 2], stehfest_weights(terms - 2)))
    res = InversionResult(est, prev, terms)
    if tol is not None and res.diagnostic > tol * max(1.0, abs(est)):
        raise InversionUnstableError(f"Stehfest orders {terms} and {terms - 2} disagree by {res.diagnostic:.3g}",
                                     estimate=est, previous=prev)
    return res


def _ruin_at_zero(p: ModelParams) -> float:
    return 1.0 - survival_at_zero(p)


def ruin_via_inversion(p: ModelParams, x: float, a: float = 0.0, terms: int = GS_TERMS) -> InversionResult:
    """Psi_q(x, a) by (a) Ibar quadrature, (b) the ruin Gerber-Shiu transform, (c) Stehfest inversion."""
    if x <= a:
        raise DomainError("inversion needs x > a")
    pa = at_level(p, a)
    V0 = _ruin_at_zero(pa)
    spec = GerberShiuSpec.ruin(pa)
    return invert_laplace(lambda s: gerber_shiu_LT(pa, spec, s, V0) / s, x - a, terms)


def scale_derivative_via_inversion(p: ModelParams, x: float, a: float = 0.0, terms: int = GS_TERMS) -> InversionResult:
    if x <= a:
        raise DomainError("inversion needs x > a")
    return invert_laplace(lambda s: scale_derivative_LT(p, s, a), x - a, terms)


def scale_via_inversion(p: ModelParams, x: float, a: float = 0.0, terms: int = GS_TERMS) -> InversionResult:
    """cal W_q(x, a) with W(a, a) = 1/c(a)."""
    if x < a:
        raise DomainError("need x >= a")
    if x == a:
        v = 1.0 / at_level(p, a).c
        return InversionResult(v, v, terms)
    return invert_laplace(lambda s: scale_LT(p, s, a), x - a, terms)


def two_sided_via_inversion(p: ModelParams, x: float, a: float, b: float, terms: int = GS_TERMS):
    """(survival, ruin, diagnostic) on [a, b]: W ratio plus Psi(x) - survival Psi(b)."""
    if not a <= x <= b < math.inf:
        raise DomainError("need a <= x <= b < inf")
    if x == b:
        return 1.0, 0.0, 0.0
    Wx = scale_via_inversion(p, x, a, terms)
    Wb = scale_via_inversion(p, b, a, terms)
    survival = Wx.value / Wb.value
    pa = at_level(p, a)
    psi_x = ruin_via_inversion(p, x, a, terms) if x > a else InversionResult(_ruin_at_zero(pa), _ruin_at_zero(pa), terms)
    psi_b = ruin_via_inversion(p, b, a, terms)
    ruin = psi_x.value - survival * psi_b.value
    diag = max(Wx.diagnostic, Wb.diagnostic, psi_x.diagnostic, psi_b.diagnostic)
    return survival, ruin, diag
