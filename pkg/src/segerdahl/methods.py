"""Uniform front end over the five solution methods.

Each runner takes a ``Problem`` and returns a ``MethodReport`` holding the
requested quantity (killed ruin or killed survival) plus an error estimate
and string diagnostics.  Runners raise ContractError for model/method
combinations they do not cover; ``available_methods`` lists the ones that do.

With no upper barrier the survival value is 1 - ruin for q = 0 and 0 for
q > 0, whatever the method.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import asmussen, closed_form, integrating_factor, monte_carlo, volterra
from .errors import ContractError, DomainError
from .exit_factorization import jump_integral
from .levy_scale import CramerLundbergParams, cl_roots
from .models import DriftSpec, ExitQuery, ModelParams
from .phase_type import PhaseType

__all__ = ["METHODS", "Problem", "MethodReport", "available_methods", "run_method"]

METHODS = ("closed_form", "asmussen", "laplace_if", "volterra", "monte_carlo")
QUANTITIES = ("ruin", "survival")


@dataclass(frozen=True)
class Problem:
    """Model, corridor and numerical settings for one query.

    ``model`` is "segerdahl" (premium c + r x) or "langevin" (premium
    c + r x^power).  ``claims`` is an exponential rate or a PhaseType.
    """

    c: float
    r: float
    lam: float
    claims: Union[float, PhaseType]
    q: float
    x: float
    a: float
    b: float = math.inf
    model: str = "segerdahl"
    power: float = 2.0
    quantity: str = "ruin"
    seed: int = 12345
    paths: int = 100_000
    volterra_h: float = 1e-3
    asmussen_ceiling: float = 50.0

    def __post_init__(self):
        if self.model not in ("segerdahl", "langevin"):
            raise DomainError(f"unknown model {self.model!r}")
        if self.quantity not in QUANTITIES:
            raise DomainError(f"unknown quantity {self.quantity!r}")
        ExitQuery(self.x, self.a, self.b)

    @property
    def exponential(self) -> bool:
        return not isinstance(self.claims, PhaseType)

    @property
    def mu(self) -> float:
        if not self.exponential:
            raise ContractError("phase-type claims have no single rate")
        return float(self.claims)

    def params(self) -> ModelParams:
        if self.model != "segerdahl" or not self.exponential:
            raise ContractError("needs the Segerdahl model with exponential claims")
        return ModelParams(self.c, self.r, self.lam, self.mu, self.q)

    def drift(self) -> DriftSpec:
        if self.model == "segerdahl" or self.power == 1.0:
            return DriftSpec.linear(self.c, self.r)
        if self.power == 2.0:
            return DriftSpec.tichy(self.c, self.r)
        return DriftSpec.power(self.c, self.r, self.power)

    def mean_claim(self) -> float:
        return self.claims.mean() if not self.exponential else 1.0 / self.mu


@dataclass
class MethodReport:
    method: str
    value: Optional[float]
    error_estimate: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.value is not None and "error" not in self.diagnostics


def _pick(pr: Problem, survival: float, ruin: float) -> float:
    return survival if pr.quantity == "survival" else ruin


def _unbounded_survival(pr: Problem, ruin: float) -> float:
    return 1.0 - ruin if pr.q == 0.0 else 0.0


def _closed_form(pr: Problem) -> MethodReport:
    p = pr.params()
    if math.isinf(pr.b):
        ruin = closed_form.ruin_psi(p, pr.x, pr.a)
        value = _pick(pr, _unbounded_survival(pr, ruin), ruin)
    else:
        value = _pick(pr, *closed_form.two_sided(p, ExitQuery(pr.x, pr.a, pr.b)))
    return MethodReport("closed_form", value)


def _asmussen(pr: Problem) -> MethodReport:
    d = pr.drift()
    diag = {}
    if pr.q == 0.0 and pr.exponential:
        res = asmussen.exit_q0(d, pr.lam, pr.mu, pr.x, pr.a, pr.b)
        diag["solver"] = "quadrature of the scale function"
        return MethodReport("asmussen", _pick(pr, res.survival, res.ruin), None, diag)
    b = pr.b
    if math.isinf(b):
        b = max(pr.asmussen_ceiling, pr.x)
        diag["upper_barrier"] = f"infinite barrier replaced by b = {b:.17g}"
    claims = pr.claims if not pr.exponential else PhaseType.exponential(pr.mu)
    survival, ruin = asmussen.exit_numeric(d, claims, pr.lam, pr.q, pr.x, pr.a, b)
    diag["solver"] = "multiple shooting"
    if math.isinf(pr.b):
        survival = _unbounded_survival(pr, ruin)
    return MethodReport("asmussen", _pick(pr, survival, ruin), None, diag)


def _laplace(pr: Problem) -> MethodReport:
    p = pr.params()
    if math.isinf(pr.b):
        if pr.x == pr.a:
            ruin = 1.0 - integrating_factor.survival_at_zero(integrating_factor.at_level(p, pr.a))
            gap = 0.0
        else:
            res = integrating_factor.ruin_via_inversion(p, pr.x, pr.a)
            ruin, gap = res.value, res.diagnostic
        value = _pick(pr, _unbounded_survival(pr, ruin), ruin)
    else:
        survival, ruin, gap = integrating_factor.two_sided_via_inversion(p, pr.x, pr.a, pr.b)
        value = _pick(pr, survival, ruin)
    return MethodReport("laplace_if", value, float(gap),
                        {"inversion_gap": f"{gap:.17g}", "stehfest_terms": str(integrating_factor.GS_TERMS)})


def _snap(a: float, h: float, x: float) -> float:
    return a + h * math.ceil((x - a) / h - 1e-9)


def _volterra_once(pr: Problem, h: float) -> float:
    d = pr.drift()
    mu = pr.mu
    needs_fit = math.isinf(pr.b) or (pr.quantity == "ruin" and pr.q > 0.0)
    if needs_fit and pr.model != "segerdahl":
        raise ContractError("volterra ruin with killing or an infinite barrier needs the Segerdahl model")
    top = pr.b if math.isfinite(pr.b) else pr.x
    # the march cancels terms of size e^{phi (x - a)} against a slowly growing W
    phi = cl_roots(CramerLundbergParams(float(d.c_fun(pr.a)), pr.lam, mu), pr.q)[0]
    if phi * (top - pr.a) > 25.0:
        raise ContractError(f"volterra loses precision beyond a + {25.0 / phi:.3g}; shrink the corridor")
    x_fit = None
    x_max = top
    if needs_fit:
        # Psi(x_fit) ~ e^{-mu x_fit} is neglected; round-off grows like 1e-16 e^{phi x_fit}
        x_fit = _snap(pr.a, 2 * h, pr.a + min(20.0 / mu, 36.0 / (mu + phi)))
        x_max = max(x_max, x_fit)
    x_max = max(_snap(pr.a, 2 * h, x_max), pr.a + 2 * h)
    grid = volterra.VolterraGrid(pr.a, x_max, h)
    sol = volterra.solve(d, pr.lam, mu, pr.q, grid)
    nodes = grid.nodes
    W = lambda u: float(np.interp(u, nodes, sol.scale))
    survival = W(pr.x) / W(pr.b) if math.isfinite(pr.b) else None
    if not needs_fit:
        return survival if pr.quantity == "survival" else 1.0 - survival
    p = pr.params()
    H = lambda u: closed_form.harmonic_H(p, u)
    J = float(jump_integral(H, mu, pr.a, p.absolute_ruin)[0])
    psi = volterra.factorization_ruin(sol, H, J, x_fit)
    Psi = lambda u: float(np.interp(u, nodes, psi))
    if math.isinf(pr.b):
        ruin = Psi(pr.x)
        return _pick(pr, _unbounded_survival(pr, ruin), ruin)
    return _pick(pr, survival, Psi(pr.x) - survival * Psi(pr.b))


def _volterra(pr: Problem) -> MethodReport:
    if not pr.exponential:
        raise ContractError("volterra needs exponential claims")
    h = pr.volterra_h
    fine = _volterra_once(pr, h)
    coarse = _volterra_once(pr, 2 * h)
    # second order in h: Richardson estimate of the fine-grid error
    err = abs(fine - coarse) / 3.0
    diag = {"grid_step": f"{h:.17g}", "refinement_gap": f"{abs(fine - coarse):.17g}"}
    c = pr.drift().c_fun(np.array([pr.a, pr.a + 1.0]))
    if c[1] > c[0]:
        diag["regime"] = "conjectured regime (increasing premium)"
    return MethodReport("volterra", fine, err, diag)


def _monte_carlo(pr: Problem) -> MethodReport:
    cfg = monte_carlo.SimConfig(n_paths=pr.paths, seed=pr.seed)
    res = monte_carlo.estimate_two_sided(pr.drift(), pr.lam, pr.claims, pr.q, pr.x, pr.a, pr.b, cfg)
    if math.isinf(pr.b) and pr.quantity == "survival":
        value, se = _unbounded_survival(pr, res.ruin), (res.ruin_se if pr.q == 0.0 else 0.0)
    else:
        value, se = _pick(pr, (res.survival, res.survival_se), (res.ruin, res.ruin_se))
    diag = {"stderr": f"{se:.17g}", "paths": str(res.n_paths), "seed": str(pr.seed)}
    if math.isinf(pr.b):
        diag["truncation_level"] = f"{res.upper:.17g}"
        diag["truncation_bias_bound"] = f"{res.bias_bound:.17g}"
    return MethodReport("monte_carlo", value, se, diag)


RUNNERS = {
    "closed_form": _closed_form,
    "asmussen": _asmussen,
    "laplace_if": _laplace,
    "volterra": _volterra,
    "monte_carlo": _monte_carlo,
}


def available_methods(pr: Problem) -> list[str]:
    """Methods that cover the problem's model and claim law."""
    seg_exp = pr.model == "segerdahl" and pr.exponential
    out = []
    at_floor = pr.a <= pr.drift().lower
    for m in METHODS:
        if at_floor and m not in ("closed_form", "monte_carlo"):
            continue
        if m in ("closed_form", "laplace_if") and not seg_exp:
            continue
        if m == "volterra" and (not pr.exponential or (pr.model != "segerdahl"
                                                        and (math.isinf(pr.b) or
                                                             (pr.q > 0 and pr.quantity == "ruin")))):
            continue
        out.append(m)
    return out


def run_method(method: str, pr: Problem) -> MethodReport:
    """Run one method; failures come back as a report with value None and an "error" diagnostic."""
    if method not in RUNNERS:
        raise DomainError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    try:
        return RUNNERS[method](pr)
    except (ArithmeticError, ValueError) as exc:
        return MethodReport(method, None, None, {"error": f"{type(exc).__name__}: {exc}"})
