import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from segerdahl.closed_form import (
    K1,
    K2,
    as_probability,
    deficit_transform,
    from_normalized,
    harmonic_H,
    ruin_density_check,
    ruin_density_q0,
    ruin_psi,
    ruin_q0,
    scale_W,
    scale_W_second_derivative,
    survival_q0,
    to_normalized,
    two_sided,
)
from segerdahl.errors import ContractError, DiagnosticError, DomainError
from segerdahl.models import ExitQuery, ModelParams
from segerdahl.special_functions import kummer_M, upper_incomplete_gamma

E1 = math.exp(-1)

models = st.builds(ModelParams, st.floats(0.0, 3.0), st.floats(0.2, 3.0), st.floats(0.1, 4.0),
                   st.floats(0.2, 3.0), st.floats(0.0, 3.0))


def test_normalization(canonical):
    assert to_normalized(canonical, 0.0) == 1.0
    p = ModelParams(0.0, 1.0, 1.0, 2.5)
    assert to_normalized(p, 1.2) == pytest.approx(3.0)
    z = np.linspace(0, 20, 9)
    assert np.allclose(to_normalized(canonical, from_normalized(canonical, z)), z, atol=1e-14)
    with pytest.raises(DomainError):
        to_normalized(canonical, -1.5)


def test_K_functions():
    z = np.array([0.3, 1.0, 4.0])
    assert np.allclose(K2(0.0, 1.0, z), np.exp(-z), rtol=1e-12)
    for lam_t in (0.5, 2.0):
        assert np.allclose(K2(0.0, lam_t, z), [upper_incomplete_gamma(lam_t, v) for v in z], rtol=1e-11)
    q_t, lam_t = 0.7, 1.3
    n = q_t + lam_t
    want = [v**n * kummer_M(lam_t, n + 1, -v) for v in z]
    assert np.allclose(K1(q_t, n, z), want, rtol=1e-12)
    assert K1(q_t, n, 0.0) == 0.0
    assert K2(q_t, n, 0.0) == pytest.approx(math.gamma(n) / math.gamma(q_t + 1))


def test_harmonic(canonical):
    assert harmonic_H(canonical, -1.0) == 0.0
    x = np.linspace(-0.5, 5, 12)
    h = harmonic_H(canonical, x)
    # q = 0: K1 is proportional to the lower incomplete gamma 1 - e^{-(1+x)}
    assert np.allclose(h / (1 - np.exp(-(1 + x))), h[0] / (1 - math.exp(-0.5)), rtol=1e-12)
    assert np.all(np.diff(h) > 0)


def test_ruin_examples(canonical):
    assert ruin_psi(canonical, 0.0, 0.0) == pytest.approx(0.5, rel=1e-14)
    assert ruin_psi(canonical, 1.0, 0.0) == pytest.approx(E1 / 2, rel=1e-14)
    assert ruin_psi(canonical, 50.0, 0.0) < 1e-8
    assert ruin_psi(ModelParams(1.0, 1.0, 1.0, 1.0, 1.0), -1.0, -1.0) == 0.5


@pytest.mark.parametrize("lam,q", [(1.0, 1.0), (2.0, 0.5), (0.5, 2.0), (3.0, 0.0)])
def test_absolute_ruin_anchor_is_exact(lam, q):
    p = ModelParams(1.0, 1.0, lam, 1.0, q)
    assert ruin_psi(p, -1.0, -1.0) == lam / (lam + q)


def test_ruin_rejects_order(canonical):
    with pytest.raises(DomainError):
        ruin_psi(canonical, 0.0, 1.0)


def test_deficit(canonical):
    p = ModelParams(1.0, 1.0, 1.0, 1.0, 1.0)
    assert deficit_transform(p, -1.0, -1.0, 1.0) == pytest.approx(0.25)
    assert deficit_transform(canonical, 0.5, 0.0, 0.0) == ruin_psi(canonical, 0.5, 0.0)
    assert deficit_transform(canonical, 0.5, 0.0, math.inf) == 0.0
    with pytest.raises(DomainError):
        deficit_transform(canonical, 0.5, 0.0, -1.0)


def test_scale_q0_shape(canonical):
    # q = 0: W'(x, a) is proportional to e^{-z} z^{lam~ - 1}; here w = e^{-x}
    x = np.linspace(0.1, 6, 20)
    h = 1e-4
    dW = (scale_W(canonical, x + h, 0.0) - scale_W(canonical, x - h, 0.0)) / (2 * h)
    ratio = dW / np.exp(-x)
    assert np.allclose(ratio, ratio[0], rtol=1e-7)
    W = scale_W(canonical, np.array([0.0, 1.0, 2.0]), 0.0)
    assert W[1] / W[2] == pytest.approx((2 - E1) / (2 - math.exp(-2)), rel=1e-12)


def test_two_sided_examples(canonical):
    assert two_sided(canonical, ExitQuery(1.0, 0.0, 1.0)) == (1.0, 0.0)
    surv, ruin = two_sided(canonical, ExitQuery(0.0, 0.0, 1.0))
    assert surv == pytest.approx(1 / (2 - E1), rel=1e-12)
    assert ruin == pytest.approx(1 - 1 / (2 - E1), rel=1e-12)
    with pytest.raises(DomainError):
        two_sided(canonical, ExitQuery(0.0, 0.0))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0), st.floats(0.01, 3.0))
def test_two_sided_complement_q0(a, dx, db):
    p = ModelParams(1.0, 1.0, 1.3, 0.8, 0.0)
    surv, ruin = two_sided(p, ExitQuery(a + dx, a, a + dx + db))
    assert surv + ruin == pytest.approx(1.0, abs=1e-10)


def test_q0_helpers(canonical):
    x = np.linspace(0, 5, 11)
    assert np.allclose([ruin_q0(canonical, v) for v in x], np.exp(-x) / 2, rtol=1e-12)
    assert survival_q0(canonical, 1.0) == pytest.approx(1 - E1 / 2)
    assert ruin_density_check(canonical) == pytest.approx(0.5, abs=1e-8)
    h = 1e-5
    for v in (0.3, 1.0, 3.0):
        fd = -(ruin_q0(canonical, v + h) - ruin_q0(canonical, v - h)) / (2 * h)
        assert ruin_density_q0(canonical, v) == pytest.approx(fd, rel=1e-7)
    with pytest.raises(ContractError):
        ruin_q0(canonical.with_q(0.5), 1.0)


def test_probability_guard():
    assert as_probability(1.0 + 1e-12) == 1.0
    with pytest.raises(DiagnosticError):
        as_probability(1.01)


@settings(max_examples=30, deadline=None)
@given(models, st.floats(0.0, 2.0))
def test_monotone(p, a):
    x = a + np.linspace(0.0, 8.0 / p.mu, 9)
    psi = [ruin_psi(p, v, a) for v in x]
    assert all(0 <= v <= 1 for v in psi)
    assert np.all(np.diff(psi) <= 0)
    W = scale_W(p, x, a)
    assert np.all(np.diff(W) > 0)


def _psi_of_z(q_t, lam_t, z):
    p = ModelParams(0.0, 1.0, lam_t, 1.0, q_t)
    return ruin_psi(p, z, 0.05)


@pytest.mark.parametrize("q_t", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("lam_t", [0.5, 1.0, 2.0])
def test_ode_residual(q_t, lam_t):
    """z y'' + (z + 1 - n) y' - q~ y = 0 for the ruin function in normalized coordinates."""
    n = q_t + lam_t
    worst = 0.0
    for z in np.linspace(0.5, 10.0, 20):
        h = 1e-3
        y0, yp, ym = (_psi_of_z(q_t, lam_t, v) for v in (z, z + h, z - h))
        d1 = (yp - ym) / (2 * h)
        d2 = (yp - 2 * y0 + ym) / h**2
        terms = np.array([z * d2, (z + 1 - n) * d1, -q_t * y0])
        worst = max(worst, abs(terms.sum()) / np.abs(terms).max())
    assert worst < 1e-6


@pytest.mark.parametrize("q_t,lam_t", [(0.0, 0.8), (0.3, 0.5), (0.0, 1.2), (0.5, 0.7)])
def test_second_derivative_sign(q_t, lam_t):
    p = ModelParams(0.0, 1.0, lam_t, 1.0, q_t)
    n = q_t + lam_t
    for x in (1e-4, 1e-3):
        d2 = scale_W_second_derivative(p, x, 0.0)
        assert (d2 < 0) == (n < 1)


def test_second_derivative_matches_fd():
    p = ModelParams(1.0, 1.0, 1.5, 2.0, 0.7)
    x, h = 0.8, 1e-4
    fd = (scale_W(p, x + h, 0.2) - 2 * scale_W(p, x, 0.2) + scale_W(p, x - h, 0.2)) / h**2
    assert scale_W_second_derivative(p, x, 0.2) == pytest.approx(fd, rel=1e-5)


def test_local_intercept_shift():
    # moving the base level to a is the same as raising the intercept to c(a)
    p = ModelParams(1.0, 0.5, 1.0, 1.0, 0.4)
    shifted = ModelParams(1.0 + 0.5 * 2.0, 0.5, 1.0, 1.0, 0.4)
    assert ruin_psi(p, 3.0, 2.0) == pytest.approx(ruin_psi(shifted, 1.0, 0.0), rel=1e-12)


def test_near_absolute_ruin_intercept():
    # z_a ~ 3e-255: z^-a alone overflows inside U although z^n U is moderate
    p = ModelParams(6.280574138448929e-255, 2.0, 1.0, 1.0, 1.0)
    assert ruin_psi(p, 0.0, 0.0) == pytest.approx(0.5, abs=1e-12)
    assert np.all(np.diff(scale_W(p, np.linspace(0.0, 8.0, 9), 0.0)) > 0)
