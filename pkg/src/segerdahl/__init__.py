"""Exit problems for risk processes with affine and general state-dependent premium.

The Segerdahl process has premium c + r x and exponential (or phase-type)
claims.  Ruin and two-sided exit probabilities, with optional exponential
killing, are available from five independent routes:

* ``closed_form``: confluent hypergeometric formulas,
* ``asmussen``: the phase-type embedding as a linear ODE boundary problem,
* ``integrating_factor``: Laplace transforms inverted by Gaver-Stehfest,
* ``volterra``: a renewal equation for the scale derivative,
* ``monte_carlo``: exact-event simulation.
"""
from .errors import (
    ContractError,
    DiagnosticError,
    DomainError,
    EvaluationError,
    ExplosionError,
    InversionUnstableError,
    RefinementError,
    SegerdahlError,
    StiffnessError,
)
from .models import DriftSpec, ExitQuery, ModelParams
from .phase_type import PhaseType
from .special_functions import kummer_M, lower_incomplete_gamma, tricomi_U, upper_incomplete_gamma
from .closed_form import ruin_psi, scale_W, two_sided
from .asmussen import exit_numeric, exit_q0
from .integrating_factor import invert_laplace, ruin_via_inversion
from .monte_carlo import MCResult, SimConfig, estimate_ruin_infinite_horizon, estimate_two_sided
from .methods import METHODS, MethodReport, Problem, available_methods, run_method

__version__ = "0.1.0"

__all__ = [
    "ContractError", "DiagnosticError", "DomainError", "EvaluationError", "ExplosionError",
    "InversionUnstableError", "RefinementError", "SegerdahlError", "StiffnessError",
    "DriftSpec", "ExitQuery", "ModelParams", "PhaseType",
    "kummer_M", "tricomi_U", "upper_incomplete_gamma", "lower_incomplete_gamma",
    "ruin_psi", "scale_W", "two_sided", "exit_numeric", "exit_q0",
    "invert_laplace", "ruin_via_inversion",
    "MCResult", "SimConfig", "estimate_two_sided", "estimate_ruin_infinite_horizon",
    "METHODS", "MethodReport", "Problem", "available_methods", "run_method",
]
