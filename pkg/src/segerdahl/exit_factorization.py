"""Two-sided exit laws assembled from one-sided ingredients.

Given an increasing q-harmonic function H on (l, inf) and the killed one-sided
ruin probabilities split by mode of crossing (creeping psi_C, and by a jump
psi_J, per claim phase for phase-type claims), the scale function is

    W(x, a) = H(x) - psi_C(x, a) H(a) - psi_J(x, a) . int_0^{a-l} e^{B y} b H(a - y) dy

and the killed up-exit probability from [a, b] is W(x, a) / W(b, a).  With
exponential claims the vector integral collapses to int mu e^{-mu y} H(a-y) dy.
The deficit at ruin keeps its claim-tail shape, only its weight changes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, linalg

from .errors import ContractError, DomainError
from .phase_type import PhaseType

__all__ = [
    "OneSidedIngredients",
    "DeficitLaw",
    "jump_integral",
    "scale_from_ingredients",
    "assemble_two_sided_exponential",
    "assemble_two_sided_phasetype",
    "killed_deficit_law",
    "decomposition_residual",
]

JUMP_ABS_TOL = 1e-10


def _no_creeping(x, a):
    return 0.0


@dataclass(frozen=True)
class OneSidedIngredients:
    """H(level), psi_C(x, a) and psi_J(x, a); psi_J returns a per-phase row for phase-type claims.

    The callables must be pure functions, results are cached nowhere.
    """

    H: Callable
    psi_J: Callable
    psi_C: Callable = _no_creeping


def _claims_as_phasetype(claims) -> PhaseType:
    if isinstance(claims, PhaseType):
        return claims
    mu = float(claims)
    if not mu > 0:
        raise DomainError("claim rate mu must be positive")
    return PhaseType.exponential(mu)


def jump_integral(H: Callable, claims, a: float, l: float) -> np.ndarray:
    """Vector int_0^{a-l} e^{B y} b H(a - y) dy; one entry per claim phase."""
    pt = _claims_as_phasetype(claims)
    if l > a:
        raise DomainError("need l <= a")
    upper = a - l
    if upper == 0.0:
        return np.zeros(pt.size)
    B, bvec = pt.B, pt.b_vec
    if pt.size == 1:
        rate = -B[0, 0]

        def f(y):
            return np.array([math.exp(-rate * y) * bvec[0] * float(H(a - y))])
    else:
        def f(y):
            return linalg.expm(B * y) @ bvec * float(H(a - y))

    val, _ = integrate.quad_vec(f, 0.0, upper, epsabs=JUMP_ABS_TOL, epsrel=1e-12, limit=2000)
    return np.atleast_1d(val)


def _check_lower(ing: OneSidedIngredients, a: float, l: float):
    if a == l:
        h_l = float(ing.H(l))
        if abs(h_l) > 1e-12:
            raise ContractError(f"a = l needs H(l) = 0, got H(l) = {h_l}")


def scale_from_ingredients(ing: OneSidedIngredients, claims, x: float, a: float, l: float,
                           integral: np.ndarray | None = None) -> float:
    """W(x, a) from the factorization formula."""
    if not l <= a <= x:
        raise DomainError(f"need l <= a <= x, got l={l}, a={a}, x={x}")
    _check_lower(ing, a, l)
    if integral is None:
        integral = jump_integral(ing.H, claims, a, l)
    psi_j = np.atleast_1d(np.asarray(ing.psi_J(x, a), dtype=float))
    if psi_j.shape != integral.shape:
        raise ContractError(f"psi_J has {psi_j.size} phases, claims have {integral.size}")
    return float(ing.H(x)) - float(ing.psi_C(x, a)) * float(ing.H(a)) - float(psi_j @ integral)


def _assemble(ing, claims, x, a, b, l):
    if not l <= a <= x <= b:
        raise DomainError(f"need l <= a <= x <= b, got l={l}, a={a}, x={x}, b={b}")
    integral = jump_integral(ing.H, claims, a, l)
    Wx = scale_from_ingredients(ing, claims, x, a, l, integral)
    if x == b:
        return 1.0, Wx
    Wb = scale_from_ingredients(ing, claims, b, a, l, integral)
    return Wx / Wb, Wx


def assemble_two_sided_exponential(ing: OneSidedIngredients, mu: float, x: float, a: float, b: float,
                                   l: float) -> tuple[float, float]:
    """(survival W(x,a)/W(b,a), W(x,a)) for Exp(mu) claims."""
    return _assemble(ing, float(mu), x, a, b, l)


def assemble_two_sided_phasetype(ing: OneSidedIngredients, pt: PhaseType, x: float, a: float, b: float,
                                 l: float) -> float:
    """Survival W(x,a)/W(b,a) for phase-type claims; psi_J is indexed by crossing phase."""
    return _assemble(ing, pt, x, a, b, l)[0]


@dataclass(frozen=True)
class DeficitLaw:
    """Killed two-sided ruin law: weight (per phase) times the claim-tail density of the deficit."""

    weight: np.ndarray
    claims: PhaseType

    @property
    def total(self) -> float:
        return float(self.weight.sum())

    def density(self, y):
        y = np.asarray(y, dtype=float)
        B, bvec = self.claims.B, self.claims.b_vec
        out = np.array([self.weight @ linalg.expm(B * v) @ bvec for v in y.ravel()])
        return out.reshape(y.shape) if y.shape else float(out[0])

    def transform(self, theta: float) -> float:
        """E[e^{-q T - theta * deficit}; ruin before b]."""
        n = self.claims.size
        return float(self.weight @ np.linalg.solve(theta * np.eye(n) - self.claims.B, self.claims.b_vec))


def killed_deficit_law(ing: OneSidedIngredients, claims, x: float, a: float, b: float, l: float) -> DeficitLaw:
    """Weight psi_J(x,a) - (W(x,a)/W(b,a)) psi_J(b,a), paired with the claim-tail shape."""
    pt = _claims_as_phasetype(claims)
    survival, _ = _assemble(ing, claims, x, a, b, l)
    wx = np.atleast_1d(np.asarray(ing.psi_J(x, a), dtype=float))
    wb = np.atleast_1d(np.asarray(ing.psi_J(b, a), dtype=float))
    weight = wx - survival * wb
    return DeficitLaw(weight, pt)


def decomposition_residual(ing: OneSidedIngredients, claims, x: float, a: float, l: float) -> float:
    """|H(x) - W(x,a) - psi_C H(a) - psi_J . integral|; zero by construction."""
    integral = jump_integral(ing.H, claims, a, l)
    W = scale_from_ingredients(ing, claims, x, a, l, integral)
    psi_j = np.atleast_1d(np.asarray(ing.psi_J(x, a), dtype=float))
    rebuilt = W + float(ing.psi_C(x, a)) * float(ing.H(a)) + float(psi_j @ integral)
    return abs(float(ing.H(x)) - rebuilt)
