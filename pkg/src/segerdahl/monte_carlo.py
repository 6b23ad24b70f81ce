"""Exact-event Monte Carlo for risk processes with state-dependent premium.

Between claims the reserve follows the deterministic flow dx/dt = c(x), so
the only random inputs are claim epochs and claim sizes.  An up-crossing of b
happens inside an inter-claim interval exactly when the travel time
C(b; level) is shorter than the interval; down-crossings happen only at claim
instants.  There is no time discretization, and the only bias is from
truncating an infinite upper barrier, which is bounded and reported.

Random numbers come from Philox streams keyed by (seed, batch index), so a
run is reproducible whatever the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .errors import ContractError, DomainError, ExplosionError
from .models import DriftSpec, ModelParams
from .phase_type import PhaseType

__all__ = [
    "SimConfig",
    "MCResult",
    "flow",
    "travel_time",
    "truncation_bias_bound",
    "estimate_two_sided",
    "estimate_ruin_infinite_horizon",
]

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 100_000
    seed: int = 12345
    upper_truncation: Optional[float] = None
    time_horizon: Optional[float] = None
    batch_size: int = 250_000
    bias_target: float = 1e-9
    workers: int = 1

    def __post_init__(self):
        if self.n_paths < 1 or self.batch_size < 1:
            raise DomainError("n_paths and batch_size must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass
class MCResult:
    survival: float
    ruin: float
    survival_se: float
    ruin_se: float
    bias_bound: float = 0.0
    n_paths: int = 0
    creeping: int = 0
    ruin_by_phase: np.ndarray = field(default_factory=lambda: np.zeros(1))
    ruin_by_phase_se: np.ndarray = field(default_factory=lambda: np.zeros(1))
    upper: float = math.inf


class _Table:
    """Travel-time table T(x) = int_lo^x du / c(u) for premiums without a closed-form flow."""

    def __init__(self, d: DriftSpec, lo: float, hi: float, panels: int = 4096):
        self.d = d
        self.x = np.linspace(lo, hi, panels + 1)
        self.T = np.concatenate([[0.0], np.cumsum(self._gl(self.x[:-1], self.x[1:]))])

    def _gl(self, u, v):
        mid, half = 0.5 * (u + v), 0.5 * (v - u)
        pts = mid[..., None] + half[..., None] * GL_NODES
        return half * (GL_WEIGHTS / self.d.c_fun(pts)).sum(axis=-1)

    def C(self, y):
        y = np.asarray(y, dtype=float)
        j = np.clip(np.searchsorted(self.x, y) - 1, 0, self.x.size - 2)
        return self.T[j] + self._gl(self.x[j], y)

    def inverse(self, target):
        target = np.asarray(target, dtype=float)
        y = np.interp(target, self.T, self.x)
        for _ in range(3):
            y = y - (self.C(y) - target) * self.d.c_fun(y)
        return y


def _travel(d: DriftSpec, table: Optional[_Table], frm, to):
    if table is not None:
        return table.C(to) - table.C(frm)
    return d.C_fun(to, frm)


def _advance(d: DriftSpec, table: Optional[_Table], x0, t):
    if d.flow_fn is not None:
        return d.flow_fn(x0, t)
    return table.inverse(table.C(x0) + t)


def flow(d: DriftSpec, x0, dt, upper: Optional[float] = None):
    """Deterministic position after time ``dt`` from ``x0``.

    Affine and quadratic premiums use their exact flows; other premiums invert
    the travel time on [x0, upper] by interpolation plus Newton polishing.
    """
    dt = np.asarray(dt, dtype=float)
    if np.any(dt < 0):
        raise DomainError("dt must be >= 0")
    if d.flow_fn is not None:
        out = d.flow_fn(x0, dt)
        if np.any(~np.isfinite(out)):
            raise ExplosionError("the flow reached infinity within dt")
        return out if np.shape(out) else float(out)
    if upper is None:
        raise ContractError("a premium without closed-form flow needs an upper level for its table")
    x0a = np.asarray(x0, dtype=float)
    table = _Table(d, float(np.min(x0a)), upper)
    out = table.inverse(table.C(x0a) + dt)
    if np.any(out >= upper):
        raise ContractError("flow left the tabulated range; raise ``upper``")
    return out if out.shape else float(out)


def travel_time(d: DriftSpec, frm, to):
    """C(to; frm): time for the flow to climb from ``frm`` to ``to``."""
    return d.C_fun(to, frm)


def _lundberg_exponent(claims: PhaseType, lam: float, c: float) -> float:
    """R > 0 solving lam (E e^{R Y} - 1) = c R, or 0 without net profit."""
    if c <= lam * claims.mean():
        return 0.0
    edge = -np.max(np.linalg.eigvals(claims.B).real)
    g = lambda R: lam * (claims.laplace(-R) - 1.0) - c * R
    hi = edge * (1 - 1e-12)
    return optimize.brentq(g, 1e-12 * edge, hi, xtol=1e-14) if g(hi) > 0 else 0.0


def truncation_bias_bound(d: DriftSpec, lam: float, claims, a: float, B: float) -> float:
    """Upper bound on the undiscounted ruin probability from level B (ruin below a).

    Exact for affine premium with exponential claims; otherwise a Lundberg
    bound for the constant premium min c on [a, B], which ruins more often.
    """
    if isinstance(claims, (int, float)) and d.kind == "linear":
        from .closed_form import ruin_psi

        p = ModelParams(d.params["c"], d.params["r"], lam, float(claims), 0.0)
        return ruin_psi(p, B, a)
    pt = claims if isinstance(claims, PhaseType) else PhaseType.exponential(float(claims))
    grid = np.linspace(a, B, 513)
    c_min = float(np.min(d.c_fun(grid)))
    R = _lundberg_exponent(pt, lam, c_min)
    if R == 0.0:
        return 1.0
    return math.exp(-R * (B - a))


def _auto_upper(d, lam, claims, a, start, target):
    mean = claims.mean() if isinstance(claims, PhaseType) else 1.0 / float(claims)
    B = max(start, a) + 10.0 * mean
    for _ in range(60):
        bound = truncation_bias_bound(d, lam, claims, a, B)
        if bound < target:
            return B, bound
        B = a + 2.0 * (B - a)
    raise ContractError("could not reach the requested truncation bias; supply upper_truncation")


def _simulate_batch(d, table, lam, claims, q, x, a, b, horizon, n, rng):
    nph = claims.size if isinstance(claims, PhaseType) else 1
    level = np.full(n, float(x))
    clock = np.zeros(n)
    surv = np.zeros(n)
    ruin = np.zeros(n)
    phase_hit = np.full(n, -1)
    idx = np.arange(n)
    if x >= b:
        return np.ones(n), ruin, phase_hit
    if isinstance(claims, PhaseType):
        rates = -np.diag(claims.B)
        jump = claims.B / rates[:, None]
        np.fill_diagonal(jump, 0.0)
        cum = np.cumsum(np.hstack([jump, (claims.b_vec / rates)[:, None]]), axis=1)
        cum[:, -1] = 1.0
    while idx.size:
        tau = rng.exponential(1.0 / lam, idx.size)
        lv = level[idx]
        t_up = _travel(d, table, lv, b) if math.isfinite(b) else np.full(idx.size, np.inf)
        t_now = clock[idx]
        if horizon is not None:
            # killed at the horizon: contributes nothing
            cut = t_now + np.minimum(tau, t_up) > horizon
        else:
            cut = np.zeros(idx.size, dtype=bool)
        up = (t_up <= tau) & ~cut
        surv[idx[up]] = np.exp(-q * (t_now[up] + t_up[up]))
        go = ~up & ~cut
        sub = idx[go]
        t_jump = t_now[go] + tau[go]
        pre = _advance(d, table, lv[go], tau[go])
        room = pre - a
        if isinstance(claims, PhaseType):
            size, ph = _phase_claims(rng, claims, cum, rates, room)
        else:
            size = rng.exponential(1.0 / float(claims), sub.size)
            ph = np.zeros(sub.size, dtype=int)
        post = pre - size
        down = post < a
        ruin[sub[down]] = np.exp(-q * t_jump[down])
        phase_hit[sub[down]] = ph[down]
        cont = sub[~down]
        level[cont] = post[~down]
        clock[cont] = t_jump[~down]
        idx = cont
    return surv, ruin, phase_hit


def _phase_claims(rng, claims, cum, rates, room):
    """Claim sizes, and the phase in which the claim passes the depth ``room``."""
    m = room.size
    n = claims.size
    phase = rng.choice(n, size=m, p=claims.beta)
    total = np.zeros(m)
    crossing = np.full(m, -1)
    alive = np.arange(m)
    while alive.size:
        ph = phase[alive]
        stay = rng.exponential(1.0, alive.size) / rates[ph]
        passed = (total[alive] < room[alive]) & (total[alive] + stay >= room[alive])
        crossing[alive[passed]] = ph[passed]
        total[alive] += stay
        u = rng.random(alive.size)
        nxt = (u[:, None] > cum[ph]).sum(axis=1)
        done = nxt == n
        phase[alive[~done]] = nxt[~done]
        alive = alive[~done]
    return total, crossing


def _run(d, lam, claims, q, x, a, b, cfg: SimConfig, table):
    sizes = [cfg.batch_size] * (cfg.n_paths // cfg.batch_size)
    if cfg.n_paths % cfg.batch_size:
        sizes.append(cfg.n_paths % cfg.batch_size)

    def one(k):
        ss = np.random.SeedSequence(cfg.seed, spawn_key=(k,))
        rng = np.random.Generator(np.random.Philox(ss))
        return _simulate_batch(d, table, lam, claims, q, x, a, b, cfg.time_horizon, sizes[k], rng)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(one, range(len(sizes))))
    else:
        parts = [one(k) for k in range(len(sizes))]
    surv = np.concatenate([p[0] for p in parts])
    ruin = np.concatenate([p[1] for p in parts])
    hit = np.concatenate([p[2] for p in parts])
    return surv, ruin, hit


def _validate(d: DriftSpec, lam, claims, q, x, a, b):
    if lam <= 0 or q < 0:
        raise DomainError("need lam > 0 and q >= 0")
    if not a <= x <= b:
        raise DomainError(f"need a <= x <= b, got a={a}, x={x}, b={b}")
    if a < d.lower:
        raise DomainError("lower barrier below the level where the premium vanishes")
    if isinstance(claims, (int, float)) and not claims > 0:
        raise DomainError("claim rate mu must be positive")
    hi = b if math.isfinite(b) else max(x, a) + 100.0
    # the premium may vanish at a itself (absolute ruin), never above it
    lo = a if a > d.lower else a + 1e-9 * max(1.0, abs(a))
    d.check_positive(lo, hi)


def estimate_two_sided(d: DriftSpec, lam: float, claims, q: float, x: float, a: float, b: float,
                       cfg: SimConfig) -> MCResult:
    """E_x[e^{-q T_b+}; up first] and E_x[e^{-q T_a-}; down first], with standard errors.

    ``claims`` is an exponential rate mu or a PhaseType.  With b = inf the
    barrier is replaced by a truncation level (given or automatic) and the
    ruin bias bound is reported; for q = 0 a truncation is mandatory.
    """
    _validate(d, lam, claims, q, x, a, b)
    bias = 0.0
    upper = b
    if math.isinf(b):
        if cfg.upper_truncation is not None:
            upper = float(cfg.upper_truncation)
            bias = truncation_bias_bound(d, lam, claims, a, upper)
        elif q == 0.0 or cfg.time_horizon is None:
            upper, bias = _auto_upper(d, lam, claims, a, x, cfg.bias_target)
        if upper <= x:
            raise ContractError("truncation level must exceed the start level")
    if cfg.time_horizon is not None:
        bias += math.exp(-q * cfg.time_horizon)
    table = None
    if d.flow_fn is None:
        if not math.isfinite(upper):
            raise ContractError("a premium without closed-form flow needs a finite upper level")
        table = _Table(d, a, upper)
    surv, ruin, hit = _run(d, lam, claims, q, x, a, upper, cfg, table)
    n = surv.size
    nph = claims.size if isinstance(claims, PhaseType) else 1
    by_phase = np.array([np.where(hit == k, ruin, 0.0).mean() for k in range(nph)])
    by_phase_se = np.array([np.where(hit == k, ruin, 0.0).std(ddof=1) / math.sqrt(n) if n > 1 else 0.0
                            for k in range(nph)])
    se = (lambda v: float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0)
    return MCResult(float(surv.mean()), float(ruin.mean()), se(surv), se(ruin), bias, n, 0,
                    by_phase, by_phase_se, upper)


def estimate_ruin_infinite_horizon(d: DriftSpec, lam: float, claims, q: float, x: float, a: float,
                                   cfg: SimConfig) -> tuple[float, float, float]:
    """(estimate, stderr, bias_bound) of E_x[e^{-q T_a-}] with no upper barrier."""
    res = estimate_two_sided(d, lam, claims, q, x, a, math.inf, cfg)
    return res.ruin, res.ruin_se, res.bias_bound
