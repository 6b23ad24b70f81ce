"""Parameter containers shared by the solvers.

``ModelParams`` describes the Segerdahl process dX = (c + r X) dt - dS with
exponential claims of rate ``mu`` arriving at rate ``lam`` and killing rate
``q``.  ``DriftSpec`` generalizes the premium to an arbitrary positive
function c(x), and ``ExitQuery`` holds the start level and the two barriers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import DomainError, ExplosionError


def _check_finite(**values):
    for name, v in values.items():
        if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
            raise DomainError(f"{name} must be a finite number, got {v!r}")


@dataclass(frozen=True)
class ModelParams:
    """Segerdahl model c(x) = c + r x with Exp(mu) claims at rate lam, killing q."""

    c: float
    r: float
    lam: float
    mu: float
    q: float = 0.0

    def __post_init__(self):
        _check_finite(c=self.c, r=self.r, lam=self.lam, mu=self.mu, q=self.q)
        if self.c < 0:
            raise DomainError(f"c must be >= 0, got {self.c}")
        if self.r <= 0:
            raise DomainError(f"r must be > 0, got {self.r}")
        if self.lam <= 0:
            raise DomainError(f"lambda must be > 0, got {self.lam}")
        if self.mu <= 0:
            raise DomainError(f"mu must be > 0, got {self.mu}")
        if self.q < 0:
            raise DomainError(f"q must be >= 0, got {self.q}")

    @property
    def lam_t(self) -> float:
        return self.lam / self.r

    @property
    def q_t(self) -> float:
        return self.q / self.r

    @property
    def c_t(self) -> float:
        return self.c / self.r

    @property
    def n(self) -> float:
        return self.q_t + self.lam_t

    @property
    def absolute_ruin(self) -> float:
        """Level -c/r below which the premium is negative."""
        return -self.c_t

    def premium(self, x):
        return self.c + self.r * np.asarray(x, dtype=float)

    def with_q(self, q: float) -> "ModelParams":
        return ModelParams(self.c, self.r, self.lam, self.mu, q)

    def drift(self) -> "DriftSpec":
        return DriftSpec.linear(self.c, self.r)


@dataclass(frozen=True)
class ExitQuery:
    """Start level ``x`` inside the corridor [a, b]; ``b`` may be +inf."""

    x: float
    a: float
    b: float = math.inf

    def __post_init__(self):
        for name in ("x", "a"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if math.isnan(self.b):
            raise DomainError("b must not be NaN")
        if not (self.a <= self.x <= self.b):
            raise DomainError(f"need a <= x <= b, got a={self.a}, x={self.x}, b={self.b}")


@dataclass(frozen=True)
class DriftSpec:
    """Premium rate c(x) and its time-to-travel function C(x; x0) = int_x0^x du / c(u).

    ``flow_fn(x0, t)`` is the closed-form deterministic flow when one exists;
    otherwise the flow is obtained by inverting ``C``.  ``lower`` is the level
    at or below which the premium stops being positive.
    """

    c_fun: Callable
    C_fun: Callable
    kind: str = "general"
    lower: float = -math.inf
    flow_fn: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    @classmethod
    def linear(cls, c: float, r: float) -> "DriftSpec":
        if r == 0:
            return cls.constant(c)
        if r < 0:
            raise DomainError("linear drift needs r >= 0")

        def c_fun(x):
            return c + r * np.asarray(x, dtype=float)

        def C_fun(x, x0=0.0):
            # from the absolute ruin level the flow never leaves: infinite travel time
            with np.errstate(divide="ignore"):
                return np.log((c + r * np.asarray(x, dtype=float)) / (c + r * np.asarray(x0, dtype=float))) / r

        def flow_fn(x0, t):
            x0 = np.asarray(x0, dtype=float)
            return x0 * np.exp(r * t) + (c / r) * np.expm1(r * t)

        return cls(c_fun, C_fun, "linear", -c / r, flow_fn, {"c": c, "r": r})

    @classmethod
    def constant(cls, c: float) -> "DriftSpec":
        if c <= 0:
            raise DomainError("constant premium must be positive")

        def c_fun(x):
            return np.full_like(np.asarray(x, dtype=float), c)

        def C_fun(x, x0=0.0):
            return (np.asarray(x, dtype=float) - np.asarray(x0, dtype=float)) / c

        def flow_fn(x0, t):
            return np.asarray(x0, dtype=float) + c * np.asarray(t, dtype=float)

        return cls(c_fun, C_fun, "constant", -math.inf, flow_fn, {"c": c, "r": 0.0})

    @classmethod
    def tichy(cls, c: float, r: float) -> "DriftSpec":
        """Quadratic premium c(x) = c + r x^2.  The flow explodes in finite time."""
        if c <= 0 or r <= 0:
            raise DomainError("quadratic premium needs c > 0 and r > 0")
        k = math.sqrt(r / c)
        rate = math.sqrt(c * r)

        def c_fun(x):
            x = np.asarray(x, dtype=float)
            return c + r * x * x

        def C_fun(x, x0=0.0):
            return (np.arctan(k * np.asarray(x, dtype=float)) - np.arctan(k * np.asarray(x0, dtype=float))) / rate

        def flow_fn(x0, t):
            angle = np.arctan(k * np.asarray(x0, dtype=float)) + rate * np.asarray(t, dtype=float)
            out = np.tan(np.minimum(angle, math.pi / 2)) / k
            return np.where(angle >= math.pi / 2, np.inf, out)

        return cls(c_fun, C_fun, "tichy", -math.inf, flow_fn, {"c": c, "r": r})

    @classmethod
    def power(cls, c: float, r: float, p: float) -> "DriftSpec":
        """Premium c + r x^p on x >= 0 (x^p read as |x|^p sign(x))."""
        if c <= 0 or r < 0 or p <= 0:
            raise DomainError("power premium needs c > 0, r >= 0, p > 0")
        if p == 1.0:
            return cls.linear(c, r)

        def c_fun(x):
            x = np.asarray(x, dtype=float)
            return c + r * np.sign(x) * np.abs(x) ** p

        lower = -((c / r) ** (1.0 / p)) if r > 0 else -math.inf
        return cls.general(c_fun, lower=lower, kind="power", params={"c": c, "r": r, "p": p})

    @classmethod
    def general(cls, c_fun: Callable, lower: float = -math.inf, kind: str = "general",
                params: Optional[dict] = None) -> "DriftSpec":
        """Arbitrary premium; C is evaluated by adaptive quadrature."""

        def C_scalar(x, x0):
            val, _ = integrate.quad(lambda u: 1.0 / float(c_fun(u)), x0, x, epsabs=1e-13, epsrel=1e-12, limit=200)
            return val

        def C_fun(x, x0=0.0):
            xs, x0s = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(x0, dtype=float))
            out = np.array([C_scalar(u, v) for u, v in zip(xs.ravel(), x0s.ravel())])
            return out.reshape(xs.shape) if xs.shape else float(out[0])

        return cls(c_fun, C_fun, kind, lower, None, dict(params or {}))

    def check_positive(self, lo: float, hi: float, samples: int = 257) -> None:
        """Raise unless c(x) > 0 on [lo, hi]."""
        if lo <= self.lower:
            raise DomainError(f"premium is not positive at {lo} (vanishes at {self.lower})")
        grid = np.linspace(lo, hi if math.isfinite(hi) else lo + 100.0, samples)
        if np.any(self.c_fun(grid) <= 0):
            raise DomainError(f"premium is not positive on [{lo}, {hi}]")

    def explodes(self, x0: float = 0.0, doublings: int = 40, ratio: float = 0.95) -> bool:
        """True when C(x; x0) stays bounded as x -> inf, so the flow reaches infinity in finite time.

        Travel times over the doubling intervals [x0 + 2^k, x0 + 2^(k+1)] are
        compared: they level off for premiums growing at most linearly and
        shrink geometrically for premiums growing like x^p with p > 1.  A
        shrink factor below ``ratio`` over the last doublings means explosion.
        """
        if self.kind in ("linear", "constant"):
            return False
        if self.kind == "tichy":
            return True
        lo = max(x0, self.lower + 1.0, 0.0)
        edges = lo + 2.0 ** np.arange(doublings - 3, doublings + 1)
        steps = np.array([float(self.C_fun(hi, lo_)) for lo_, hi in zip(edges[:-1], edges[1:])])
        return bool(np.all(steps[1:] < ratio * steps[:-1]))

    def require_non_explosive(self, x0: float = 0.0) -> None:
        if self.explodes(x0):
            raise ExplosionError(f"{self.kind} drift reaches infinity in finite time; use a finite upper barrier")

    def K(self, lam: float, mu: float, x, x0: float = 0.0):
        """exp(-mu (x - x0) + lam C(x; x0))."""
        x = np.asarray(x, dtype=float)
        return np.exp(-mu * (x - x0) + lam * self.C_fun(x, x0))
