import math

import numpy as np
import pytest

from segerdahl.asmussen import (
    build_ode_system,
    exit_numeric,
    exit_q0,
    k_factor,
    scale_q0,
    solve_exit_bvp,
)
from segerdahl.closed_form import ruin_psi, two_sided
from segerdahl.errors import DomainError, ExplosionError
from segerdahl.models import DriftSpec, ExitQuery, ModelParams
from segerdahl.monte_carlo import SimConfig, estimate_two_sided
from segerdahl.phase_type import PhaseType

LIN = DriftSpec.linear(1.0, 1.0)


def test_k_factor_linear():
    xs = np.array([0.0, 0.5, 2.0])
    assert np.allclose(k_factor(LIN, 1.0, 1.0, xs), np.exp(-xs) * (1 + xs), rtol=1e-14)
    assert k_factor(LIN, 1.0, 1.0, 3.0, base=3.0) == 1.0


def test_k_factor_rejects_nonpositive_premium():
    with pytest.raises(DomainError):
        k_factor(LIN, 1.0, 1.0, -1.5)


def test_exit_q0_known_values():
    assert exit_q0(LIN, 1.0, 1.0, 0.0, 0.0).ruin == pytest.approx(0.5, abs=1e-10)
    assert exit_q0(LIN, 1.0, 1.0, 0.0, 0.0, 1.0).survival == pytest.approx(1 / (2 - math.exp(-1)), rel=1e-10)
    # constant premium: ruin from zero is lam / (c mu)
    assert exit_q0(DriftSpec.constant(2.0), 1.0, 1.0, 0.0, 0.0).ruin == pytest.approx(0.5, abs=1e-10)


def test_exit_q0_matches_closed_form():
    p = ModelParams(1.0, 1.0, 1.0, 1.0)
    for x, a in [(0.0, 0.0), (1.0, -0.5), (3.0, 1.0)]:
        assert exit_q0(LIN, 1.0, 1.0, x, a).ruin == pytest.approx(ruin_psi(p, x, a), rel=1e-8)


def test_ruin_density_is_derivative():
    b, x, h = 3.0, 1.0, 1e-5
    r = lambda u: exit_q0(LIN, 1.0, 1.0, u, 0.0, b).ruin
    fd = -(r(x + h) - r(x - h)) / (2 * h)
    assert exit_q0(LIN, 1.0, 1.0, x, 0.0, b).ruin_density == pytest.approx(fd, rel=1e-6)


def test_scale_normalization_invariant():
    """w K(a) does not depend on the lower limit once renormalized."""
    for a in (0.0, 0.7):
        lhs = scale_q0(LIN, 1.0, 1.0, 2.0, a) - 1.0
        ratio = (scale_q0(LIN, 1.0, 1.0, 2.0, -0.3) - scale_q0(LIN, 1.0, 1.0, a, -0.3))
        assert lhs * float(LIN.K(1.0, 1.0, a, -0.3)) == pytest.approx(ratio, rel=1e-10)


def test_explosive_drift_needs_barrier():
    with pytest.raises(ExplosionError):
        exit_q0(DriftSpec.tichy(1.0, 1.0), 1.0, 1.0, 0.0, 0.0)


def test_ode_matrix_structure():
    pt = PhaseType.erlang(2, 3.0)
    sys_ = build_ode_system(LIN, pt, 2.0, 0.5)
    M = sys_.matrix(1.0)
    assert M.shape == (3, 3)
    assert M[0, 0] == pytest.approx(2.5 / 2.0)
    assert np.allclose(M[0, 1:], -(2.0 / 2.0) * pt.beta)
    assert np.allclose(M[1:, 0], pt.b_vec)
    assert np.allclose(M[1:, 1:], pt.B)
    # exponential claims, constant premium: eigenvalues solve the Lundberg quadratic
    ev = np.sort(np.linalg.eigvals(build_ode_system(DriftSpec.constant(2.0), 1.0, 1.0, 0.0).matrix(0.0)).real)
    assert np.allclose(ev, [-0.5, 0.0], atol=1e-14)


@pytest.mark.parametrize("x,a,b", [(0.0, 0.0, 1.0), (1.0, -0.5, 4.0), (2.0, 1.0, 6.0)])
def test_numeric_matches_q0(x, a, b):
    s, r = exit_numeric(LIN, 1.0, 1.0, 0.0, x, a, b)
    ref = exit_q0(LIN, 1.0, 1.0, x, a, b)
    assert abs(s - ref.survival) < 1e-8
    assert abs(s + r - 1.0) < 1e-9


@pytest.mark.parametrize("q", [0.3, 1.0])
def test_numeric_matches_closed_form_with_killing(q):
    p = ModelParams(1.0, 1.0, 1.0, 1.0, q)
    for x, a, b in [(0.0, 0.0, 1.0), (1.0, -0.5, 3.0)]:
        s, r = exit_numeric(LIN, 1.0, 1.0, q, x, a, b)
        cs, cr = two_sided(p, ExitQuery(x, a, b))
        assert abs(s - cs) < 1e-6 and abs(r - cr) < 1e-6


def test_tolerance_refinement_is_stable():
    pt = PhaseType.erlang(2, 2.0)
    coarse = exit_numeric(LIN, pt, 1.0, 0.5, 1.0, 0.0, 5.0)
    fine = exit_numeric(LIN, pt, 1.0, 0.5, 1.0, 0.0, 5.0, rtol=5e-11, atol=5e-13)
    assert max(abs(u - v) for u, v in zip(coarse, fine)) < 1e-8


def test_ruin_by_phase_sums_to_ruin():
    pt = PhaseType([0.4, 0.6], np.diag([-1.0, -3.0]))
    sol = solve_exit_bvp(LIN, pt, 1.0, 0.2, 0.0, 3.0, points=(1.0,))
    by_phase = sol.ruin_by_phase(1.0)
    assert float(by_phase.sum()) == pytest.approx(sol.ruin(1.0), rel=1e-9)


def test_endpoint_and_domain():
    assert exit_numeric(LIN, 1.0, 1.0, 0.0, 2.0, 0.0, 2.0) == (1.0, 0.0)
    with pytest.raises(DomainError):
        exit_numeric(LIN, 1.0, 1.0, 0.0, 3.0, 0.0, 2.0)
    with pytest.raises(DomainError):
        exit_numeric(LIN, 1.0, 1.0, 0.0, 0.0, -1.0, 2.0)


def test_quadratic_premium_against_simulation():
    d = DriftSpec.tichy(1.0, 1.0)
    ref = exit_q0(d, 1.0, 1.0, 0.5, 0.0, 3.0).ruin
    mc = estimate_two_sided(d, 1.0, 1.0, 0.0, 0.5, 0.0, 3.0, SimConfig(n_paths=40_000, seed=7))
    assert abs(mc.ruin - ref) < 4 * mc.ruin_se
