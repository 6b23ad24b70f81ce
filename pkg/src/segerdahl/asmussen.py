"""Exit problems through Asmussen's embedding of phase-type claims.

Replacing each downward claim by a unit-slope descent through its phases
turns the integro-differential equation for an exit functional f into the
linear system

    f'(x) = ((lam + q) / c(x)) f(x) - (lam / c(x)) beta . A(x)
    A'(x) = b f(x) + B A(x)

where A_i(x) is the value of the functional when a claim in phase i is
passing level x.  Ruin uses A(a) = 1 and f(b) = 0, survival A(a) = 0 and
f(b) = 1, and ruin in crossing phase k uses A(a) = e_k.

For q = 0 and exponential claims the system integrates in closed form through
K(x) = exp(-mu x + lam C(x; 0)) and the scale derivative w = lam K / c.
For q > 0 the boundary-value problem is solved by multiple shooting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .errors import ContractError, DomainError, StiffnessError
from .exit_factorization import OneSidedIngredients
from .models import DriftSpec
from .phase_type import PhaseType

__all__ = [
    "k_factor",
    "scale_q0",
    "exit_q0",
    "ExitQ0",
    "OdeSystem",
    "build_ode_system",
    "BVPSolution",
    "solve_exit_bvp",
    "exit_numeric",
    "one_sided_ingredients",
]

RTOL = 1e-10
ATOL = 1e-12
SEGMENT_COND = 1e6
GLOBAL_COND = 1e12
MAX_SEGMENTS = 4096


def _as_phasetype(claims) -> PhaseType:
    if isinstance(claims, PhaseType):
        return claims
    return PhaseType.exponential(float(claims))


def _check_path(d: DriftSpec, lo: float, hi: float):
    if lo <= d.lower:
        raise DomainError(f"premium is not positive at level {lo}")
    d.check_positive(lo, hi)


def k_factor(d: DriftSpec, lam: float, mu: float, x, base: float = 0.0):
    """K(x) = exp(-mu (x - base) + lam C(x; base)); K(base) = 1."""
    x = np.asarray(x, dtype=float)
    lo, hi = min(float(np.min(x)), base), max(float(np.max(x)), base)
    _check_path(d, lo, hi)
    out = d.K(lam, mu, x, base)
    return out if np.shape(out) else float(out)


def _w(d: DriftSpec, lam: float, mu: float, u, a: float):
    # scale derivative relative to a: lam K(u)/(K(a) c(u))
    return lam * d.K(lam, mu, u, a) / d.c_fun(u)


def _integral_w(d, lam, mu, a, x):
    if x == a:
        return 0.0
    val, err = integrate.quad(lambda u: float(_w(d, lam, mu, u, a)), a, x, epsabs=1e-13, epsrel=1e-12, limit=500)
    return val


def _integral_w_to_inf(d, lam, mu, a):
    """int_a^inf w, or inf when the integrand does not decay."""
    total = 0.0
    lo = a
    width = max(1.0, 1.0 / mu)
    while True:
        hi = lo + width
        total += _integral_w(d, lam, mu, lo, hi) * float(d.K(lam, mu, lo, a))
        w_hi = float(_w(d, lam, mu, hi, a))
        # w decays at rate mu - lam / c(u) for a slowly varying premium; bound the tail with it
        rate = mu - lam / float(d.c_fun(hi))
        if rate > 0 and w_hi / rate < 1e-16 * (1.0 + total):
            return total + w_hi / rate
        lo = hi
        width *= 2.0
        if hi - a > 1e8 / mu:
            return math.inf


def scale_q0(d: DriftSpec, lam: float, mu: float, x: float, a: float) -> float:
    """cal W(x, a) = 1 + int_a^x lam K(u) / (K(a) c(u)) du, normalized to 1 at x = a."""
    if x < a:
        raise DomainError("need x >= a")
    _check_path(d, a, x)
    return 1.0 + _integral_w(d, lam, mu, a, x)


@dataclass(frozen=True)
class ExitQ0:
    survival: float
    ruin: float
    ruin_density: float


def exit_q0(d: DriftSpec, lam: float, mu: float, x: float, a: float, b: float = math.inf) -> ExitQ0:
    """Undiscounted exit from [a, b] for exponential claims, in closed form.

    survival = W(x, a) / W(b, a); the ruin density is -d ruin / dx = w(x) / W(b, a).
    With b = inf the ruin is certain (survival 0) when int w diverges.
    """
    if not a <= x <= b:
        raise DomainError(f"need a <= x <= b, got a={a}, x={x}, b={b}")
    if math.isinf(b):
        d.require_non_explosive(a)
        _check_path(d, a, x)
        Wb = 1.0 + _integral_w_to_inf(d, lam, mu, a)
    else:
        _check_path(d, a, b)
        Wb = 1.0 + _integral_w(d, lam, mu, a, b)
    if math.isinf(Wb):
        return ExitQ0(0.0, 1.0, 0.0)
    Wx = 1.0 + _integral_w(d, lam, mu, a, x)
    survival = Wx / Wb
    density = float(_w(d, lam, mu, x, a)) / Wb
    return ExitQ0(survival, 1.0 - survival, density)


@dataclass(frozen=True)
class OdeSystem:
    """x -> M(x) for the state (f, A_1, ..., A_n)."""

    drift: DriftSpec
    claims: PhaseType
    lam: float
    q: float

    @property
    def dim(self) -> int:
        return self.claims.size + 1

    def matrix(self, x: float) -> np.ndarray:
        n = self.claims.size
        c = float(self.drift.c_fun(x))
        M = np.empty((n + 1, n + 1))
        M[0, 0] = (self.lam + self.q) / c
        M[0, 1:] = -(self.lam / c) * self.claims.beta
        M[1:, 0] = self.claims.b_vec
        M[1:, 1:] = self.claims.B
        return M

    def rhs(self, x, y):
        return self.matrix(x) @ y


def build_ode_system(d: DriftSpec, claims, lam: float, q: float) -> OdeSystem:
    if lam <= 0 or q < 0:
        raise DomainError("need lam > 0 and q >= 0")
    return OdeSystem(d, _as_phasetype(claims), float(lam), float(q))


def _fundamental(system: OdeSystem, lo: float, hi: float, rtol: float, atol: float):
    m = system.dim

    def rhs(x, y):
        return (system.matrix(x) @ y.reshape(m, m)).ravel()

    sol = integrate.solve_ivp(rhs, (lo, hi), np.eye(m).ravel(), method="DOP853", rtol=rtol, atol=atol,
                              dense_output=True)
    if not sol.success:
        raise StiffnessError(f"IVP failed on [{lo}, {hi}]: {sol.message}")
    return sol.y[:, -1].reshape(m, m), sol.sol


@dataclass
class BVPSolution:
    """Node states of one or more exit functionals sharing the same system.

    Column 0 is survival, column 1 ruin, columns 2.. ruin in crossing phase k.
    """

    nodes: np.ndarray
    states: np.ndarray  # (nodes, dim, columns)
    dense: list
    condition: float
    dim: int

    def state(self, x: float, column: int) -> np.ndarray:
        x = float(x)
        if not self.nodes[0] <= x <= self.nodes[-1]:
            raise DomainError(f"{x} outside the solved interval")
        hit = np.flatnonzero(self.nodes == x)
        if hit.size:
            return self.states[hit[0], :, column]
        j = int(np.searchsorted(self.nodes, x) - 1)
        phi = self.dense[j](x).reshape(self.dim, self.dim)
        return phi @ self.states[j, :, column]

    def value(self, x, column: int):
        x = np.asarray(x, dtype=float)
        out = np.array([self.state(v, column)[0] for v in x.ravel()])
        return out.reshape(x.shape) if x.shape else float(out[0])

    def survival(self, x):
        return self.value(x, 0)

    def ruin(self, x):
        return self.value(x, 1)

    def ruin_by_phase(self, x: float) -> np.ndarray:
        return np.array([self.state(x, 2 + k)[0] for k in range(self.dim - 1)])


def solve_exit_bvp(d: DriftSpec, claims, lam: float, q: float, a: float, b: float,
                   points=(), rtol: float = RTOL, atol: float = ATOL) -> BVPSolution:
    """Multiple shooting on [a, b]; ``points`` are forced to be nodes.

    A segment is bisected while its fundamental matrix has condition number
    above 1e6, which keeps growing and decaying modes resolvable; the block
    system is rejected with StiffnessError above 1e12.
    """
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise DomainError(f"need finite a < b, got a={a}, b={b}")
    _check_path(d, a, b)
    system = build_ode_system(d, claims, lam, q)
    m = system.dim
    n = m - 1

    base = sorted({a, b, *[float(p) for p in points if a < float(p) < b]})
    segments = []
    stack = [(lo, hi) for lo, hi in zip(base[:-1], base[1:])][::-1]
    while stack:
        lo, hi = stack.pop()
        phi, dense = _fundamental(system, lo, hi, rtol, atol)
        if np.linalg.cond(phi) > SEGMENT_COND and hi - lo > 1e-6 * (b - a):
            mid = 0.5 * (lo + hi)
            stack.append((mid, hi))
            stack.append((lo, mid))
            continue
        segments.append((lo, hi, phi, dense))
        if len(segments) > MAX_SEGMENTS:
            raise StiffnessError("too many shooting segments; the system is too stiff")
    nodes = np.array([segments[0][0]] + [s[1] for s in segments])
    k = len(segments)

    size = (k + 1) * m
    A = np.zeros((size, size))
    row = 0
    for j, (_, _, phi, _) in enumerate(segments):
        A[row:row + m, (j + 1) * m:(j + 2) * m] = np.eye(m)
        A[row:row + m, j * m:(j + 1) * m] = -phi
        row += m
    # A-components at a, f at b
    for i in range(n):
        A[row + i, 1 + i] = 1.0
    A[row + n, k * m] = 1.0

    rhs = np.zeros((size, 2 + n))
    bc = row
    rhs[bc + n, 0] = 1.0  # survival: A(a) = 0, f(b) = 1
    rhs[bc:bc + n, 1] = 1.0  # ruin: A(a) = 1, f(b) = 0
    for i in range(n):
        rhs[bc + i, 2 + i] = 1.0

    cond = np.linalg.cond(A)
    if not cond <= GLOBAL_COND:
        raise StiffnessError(f"boundary system condition number {cond:.3g} exceeds {GLOBAL_COND:g}; split the domain")
    sol = np.linalg.solve(A, rhs)
    states = sol.reshape(k + 1, m, 2 + n)
    return BVPSolution(nodes, states, [s[3] for s in segments], float(cond), m)


def exit_numeric(d: DriftSpec, claims, lam: float, q: float, x: float, a: float, b: float,
                 rtol: float = RTOL, atol: float = ATOL) -> tuple[float, float]:
    """(survival, ruin) for the corridor [a, b], any q >= 0 and phase-type claims."""
    if not a <= x <= b:
        raise DomainError(f"need a <= x <= b, got a={a}, x={x}, b={b}")
    if x == b:
        return 1.0, 0.0
    sol = solve_exit_bvp(d, claims, lam, q, a, b, points=(x,), rtol=rtol, atol=atol)
    return float(sol.survival(x)), float(sol.ruin(x))


def one_sided_ingredients(d: DriftSpec, claims, lam: float, q: float, l: float, a: float, ceiling: float,
                          points=()) -> OneSidedIngredients:
    """Ingredients for the factorization formula from two BVP solves.

    H is the killed up-exit probability from [l, ceiling]; psi_J(x, a) is the
    per-phase ruin below ``a`` before ``ceiling``.  Both are exact ingredients
    for corridors [a, b] with l < a and b <= ceiling.
    """
    if not l < a < ceiling:
        raise ContractError("need l < a < ceiling")
    h_sol = solve_exit_bvp(d, claims, lam, q, l, ceiling, points=(a, *points))
    j_sol = solve_exit_bvp(d, claims, lam, q, a, ceiling, points=points)
    base_a = a

    def psi_J(x, a_):
        if a_ != base_a:
            raise ContractError(f"ingredients were built for a={base_a}, asked for a={a_}")
        return j_sol.ruin_by_phase(x)

    return OneSidedIngredients(H=h_sol.survival, psi_J=psi_J)
