"""Volterra renewal equation for the scale derivative of a Langevin risk process.

For a premium c(x) and the Cramer-Lundberg process with frozen premium c(a)
(scale derivative w_q), the scale derivative dW(x, a)/dx of the Langevin
process solves, in the bounded-variation case,

    w_q(x - a) + int_a^x w_q(x - z) v(z) (c(a) - c(z)) dz = v(x) c(x) / c(a).

This is proven for non-increasing premiums only.  For the increasing
Segerdahl premium it is a conjecture, and the results here are the numerical
evidence for it (every such run is flagged).

The equation is solved by product trapezoid on a uniform grid, marching
forward; the unknown at the new node enters linearly and is solved for
directly.  The normalization is W(a, a) = 1/c(a).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError, RefinementError
from .levy_scale import CramerLundbergParams, cl_roots, cl_scale_w, laplace_exponent
from .models import DriftSpec

__all__ = [
    "VolterraGrid",
    "VolterraSolution",
    "solve",
    "solve_scale_derivative",
    "scale_from_derivative",
    "shifted_LT_check",
    "factorization_ruin",
]

NODE_CAP = 2_000_000


@dataclass(frozen=True)
class VolterraGrid:
    a: float
    x_max: float
    h: float
    cap: int = NODE_CAP

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError("grid step h must be positive")
        if not self.x_max > self.a:
            raise DomainError("need x_max > a")
        if self.size > self.cap:
            raise DomainError(f"grid would have {self.size} nodes, cap is {self.cap}")

    @property
    def size(self) -> int:
        return int(round((self.x_max - self.a) / self.h)) + 1

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.size)

    def refined(self) -> "VolterraGrid":
        return VolterraGrid(self.a, self.x_max, self.h / 2.0, self.cap)

    def index(self, x: float) -> int:
        i = (x - self.a) / self.h
        j = int(round(i))
        if abs(i - j) > 1e-8 or not 0 <= j < self.size:
            raise DomainError(f"{x} is not a grid node")
        return j


@dataclass
class VolterraSolution:
    grid: VolterraGrid
    derivative: np.ndarray
    scale: np.ndarray
    flags: dict

    def at(self, x: float, which: str = "scale") -> float:
        arr = self.scale if which == "scale" else self.derivative
        return float(arr[self.grid.index(x)])


def _march(drift: DriftSpec, base: CramerLundbergParams, q: float, grid: VolterraGrid) -> np.ndarray:
    h = grid.h
    x = grid.nodes
    ca = base.c
    cx = drift.c_fun(x)
    kern = ca - cx
    w = cl_scale_w(base, q, x - grid.a)
    out = np.empty(grid.size)
    out[0] = w[0]
    # running sums are recomputed per node: the kernel depends on x - z, so no recursion is available
    prod = np.empty(grid.size)
    prod[0] = out[0] * kern[0]
    for i in range(1, grid.size):
        lag = w[i:0:-1]
        s = lag @ prod[:i] - 0.5 * lag[0] * prod[0]
        rhs = w[i] + h * s
        out[i] = rhs / (cx[i] / ca - 0.5 * h * w[0] * kern[i])
        prod[i] = out[i] * kern[i]
    return out


def solve_scale_derivative(drift: DriftSpec, base: CramerLundbergParams, q: float, grid: VolterraGrid,
                           tol: float | None = None) -> np.ndarray:
    """Scale derivative on the grid nodes; w(a, a) = w_q(0) = (lam + q) / c(a)^2.

    With ``tol`` set, the solve is repeated on the halved grid and a
    RefinementError carrying both solutions is raised when the endpoint
    values differ by more than ``tol`` relative.
    """
    ca = float(drift.c_fun(grid.a))
    if not math.isclose(ca, base.c, rel_tol=1e-12):
        raise ContractError(f"baseline premium {base.c} differs from c(a) = {ca}")
    drift.check_positive(grid.a, grid.x_max)
    out = _march(drift, base, q, grid)
    if tol is not None:
        fine = _march(drift, base, q, grid.refined())
        gap = abs(fine[-1] - out[-1]) / max(abs(fine[-1]), 1e-300)
        if gap > tol:
            raise RefinementError(f"halving h changed the endpoint by {gap:.3g} (relative); refine the grid",
                                  coarse=out, fine=fine)
    return out


def scale_from_derivative(derivative: np.ndarray, W0: float, h: float) -> np.ndarray:
    """W0 plus the cumulative trapezoid integral."""
    d = np.asarray(derivative, dtype=float)
    out = np.empty_like(d)
    out[0] = W0
    out[1:] = W0 + np.cumsum(0.5 * h * (d[1:] + d[:-1]))
    return out


def solve(drift: DriftSpec, lam: float, mu: float, q: float, grid: VolterraGrid,
          tol: float | None = None) -> VolterraSolution:
    """Scale derivative and scale function with the frozen-premium baseline built from c(a)."""
    ca = float(drift.c_fun(grid.a))
    base = CramerLundbergParams(ca, lam, mu)
    der = solve_scale_derivative(drift, base, q, grid, tol)
    flags = {}
    if drift.kind not in ("constant",) and np.any(np.diff(drift.c_fun(grid.nodes)) > 0):
        flags["regime"] = "conjectured regime (increasing premium)"
    return VolterraSolution(grid, der, scale_from_derivative(der, 1.0 / ca, grid.h), flags)


def _discrete_lt(values: np.ndarray, h: float, s: float, weight=None) -> float:
    t = h * np.arange(values.size)
    f = values * np.exp(-s * t)
    if weight is not None:
        f = f * weight
    return h * (f.sum() - 0.5 * (f[0] + f[-1]))


def shifted_LT_check(derivative: np.ndarray, grid: VolterraGrid, drift: DriftSpec, base: CramerLundbergParams,
                     q: float, s: float) -> float:
    """Residual of the transformed renewal equation for an affine premium c(a) + r (x - a).

    what(s) (1 + r v'(s)) - [v(s) - (r / c(a)) v'(s)], where v is the shifted
    transform of the grid solution, v' its s-derivative and what the baseline
    kernel transform, all by trapezoid on the same grid.
    """
    if drift.kind not in ("linear", "constant"):
        raise ContractError("the transform identity needs an affine premium")
    r = drift.params.get("r", 0.0)
    ca = base.c
    t = grid.h * np.arange(grid.size)
    kernel = cl_scale_w(base, q, t)
    w_hat = _discrete_lt(kernel, grid.h, s)
    v_hat = _discrete_lt(derivative, grid.h, s)
    v_hat_prime = -_discrete_lt(derivative, grid.h, s, weight=t)
    return float(w_hat * (1.0 + r * v_hat_prime) - (v_hat - (r / ca) * v_hat_prime))


def factorization_ruin(sol: VolterraSolution, H, jump_integral_value: float, x_fit: float):
    """Killed ruin probability below a from W and the harmonic function H.

    The factorization W(x, a) = C (H(x) - Psi(x, a) J) with J the jump
    integral int mu e^{-mu y} H(a - y) dy, and Psi(x_fit) ~ 0, fix
    C = W(x_fit) / H(x_fit); then Psi = (H - W / C) / J on the grid.
    ``x_fit`` should sit well inside the grid: the marching error grows
    toward its far end.
    """
    x = sol.grid.nodes
    Hx = np.asarray(H(x), dtype=float)
    k = sol.grid.index(x_fit)
    C = sol.scale[k] / Hx[k]
    return (Hx - sol.scale / C) / jump_integral_value
