"""Phase-type claim distributions PH(beta, B).

B is the sub-generator of the transient phases, so the survival function is
beta exp(B x) 1 and the density beta exp(B x) b with exit vector b = -B 1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import ContractError, DomainError

__all__ = ["PhaseType", "phase_density"]


@dataclass(frozen=True, eq=False)
class PhaseType:
    beta: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        n = beta.size
        if B.shape != (n, n):
            raise ContractError(f"B must be {n}x{n} to match beta, got {B.shape}")
        if not np.all(np.isfinite(beta)) or not np.all(np.isfinite(B)):
            raise ContractError("beta and B must be finite")
        if np.any(beta < 0) or abs(beta.sum() - 1.0) > 1e-12:
            raise ContractError("beta must be a probability vector")
        off = B - np.diag(np.diag(B))
        if np.any(off < 0):
            raise ContractError("off-diagonal entries of B must be nonnegative")
        if np.any(B.sum(axis=1) > 1e-12):
            raise ContractError("row sums of B must be <= 0")
        # every phase must drain to absorption, otherwise B is singular
        if abs(np.linalg.det(B)) < 1e-300 or np.linalg.cond(B) > 1e14:
            raise ContractError("B must be invertible (all phases transient)")
        beta.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "B", B)

    @property
    def size(self) -> int:
        return self.beta.size

    @property
    def b_vec(self) -> np.ndarray:
        return -self.B.sum(axis=1)

    @classmethod
    def exponential(cls, mu: float) -> "PhaseType":
        return cls(np.array([1.0]), np.array([[-mu]]))

    @classmethod
    def erlang(cls, k: int, mu: float) -> "PhaseType":
        """Erlang(k) with phase rate mu, mean k / mu."""
        B = -mu * np.eye(k) + mu * np.eye(k, k=1)
        beta = np.zeros(k)
        beta[0] = 1.0
        return cls(beta, B)

    @classmethod
    def from_json(cls, path) -> "PhaseType":
        with open(path) as fh:
            spec = json.load(fh)
        if "beta" not in spec or "B" not in spec:
            raise ContractError("phase-type file needs keys 'beta' and 'B'")
        beta = np.asarray(spec["beta"], dtype=float)
        B = np.asarray(spec["B"], dtype=float)
        if B.ndim == 1:
            B = B.reshape(beta.size, -1)
        return cls(beta, B)

    def mean(self) -> float:
        return float(self.beta @ np.linalg.solve(-self.B, np.ones(self.size)))

    def density(self, x):
        return phase_density(self, x)

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        out = np.array([self.beta @ linalg.expm(self.B * xi) @ np.ones(self.size) for xi in x.ravel()])
        return out.reshape(x.shape) if x.shape else float(out[0])

    def laplace(self, s: float) -> float:
        """E[e^{-s Y}] = beta (sI - B)^{-1} b."""
        return float(self.beta @ np.linalg.solve(s * np.eye(self.size) - self.B, self.b_vec))

    def sample(self, rng: np.random.Generator, size: int):
        """Draw ``size`` claims; returns the amounts and the phase active at the end of each."""
        n = self.size
        rates = -np.diag(self.B)
        exit_rate = self.b_vec
        # jump chain: to other phases, or to absorption (index n)
        P = np.zeros((n, n + 1))
        P[:, :n] = self.B / rates[:, None]
        np.fill_diagonal(P[:, :n], 0.0)
        P[:, n] = exit_rate / rates
        cum = np.cumsum(P, axis=1)
        cum[:, -1] = 1.0

        phase = rng.choice(n, size=size, p=self.beta)
        amount = np.zeros(size)
        last = phase.copy()
        alive = np.ones(size, dtype=bool)
        while alive.any():
            idx = np.flatnonzero(alive)
            ph = phase[idx]
            amount[idx] += rng.exponential(1.0, idx.size) / rates[ph]
            last[idx] = ph
            u = rng.random(idx.size)
            nxt = (u[:, None] > cum[ph]).sum(axis=1)
            done = nxt == n
            alive[idx[done]] = False
            phase[idx[~done]] = nxt[~done]
        return amount, last


def phase_density(pt: PhaseType, x):
    """beta exp(B x) b, evaluated by scaling-and-squaring (scipy ``expm``)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("phase-type density needs x >= 0")
    b = pt.b_vec
    out = np.array([pt.beta @ linalg.expm(pt.B * xi) @ b for xi in x.ravel()])
    return out.reshape(x.shape) if x.shape else float(out[0])
