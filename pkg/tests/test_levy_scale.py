import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from segerdahl.errors import ContractError, DomainError
from segerdahl.levy_scale import (
    CramerLundbergParams,
    cl_roots,
    cl_scale_W,
    cl_scale_w,
    laplace_exponent,
    shifted_exponent,
)

params = st.builds(CramerLundbergParams, st.floats(0.2, 5.0), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
qs = st.floats(0.0, 3.0)


def test_exponent_examples():
    p = CramerLundbergParams(1.0, 0.5, 1.0)
    assert laplace_exponent(p, 0.0) == 0.0
    assert laplace_exponent(p, 1.0) == pytest.approx(0.75)
    assert shifted_exponent(p, 1.0, 0.25) == pytest.approx(0.5)


def test_exponent_pole():
    with pytest.raises(DomainError):
        laplace_exponent(CramerLundbergParams(1.0, 1.0, 2.0), -2.0)


def test_diffusion_rejected():
    with pytest.raises(ContractError):
        CramerLundbergParams(1.0, 1.0, 1.0, alpha0=0.1)


def test_roots_examples():
    assert cl_roots(CramerLundbergParams(1.0, 0.5, 1.0), 0.0) == pytest.approx((0.0, -0.5))
    phi, rho = cl_roots(CramerLundbergParams(1.0, 1.0, 1.0), 1.0)
    assert phi == pytest.approx((1 + 5 ** 0.5) / 2, abs=1e-12)
    assert rho == pytest.approx((1 - 5 ** 0.5) / 2, abs=1e-12)


def test_roots_reject_negative_q():
    with pytest.raises(DomainError):
        cl_roots(CramerLundbergParams(1.0, 1.0, 1.0), -0.1)


def test_scale_examples():
    p = CramerLundbergParams(1.0, 0.5, 1.0)
    x = np.linspace(0, 10, 11)
    assert np.allclose(cl_scale_W(p, 0.0, x), 2 - np.exp(-0.5 * x), rtol=1e-14)
    assert cl_scale_W(p, 0.0, 0.0) == pytest.approx(1.0)
    # survival from 0 is W(0)/W(inf) = 1/2 = 1 - lam/(c mu)
    assert cl_scale_W(p, 0.0, 0.0) / cl_scale_W(p, 0.0, 200.0) == pytest.approx(0.5)


@settings(max_examples=100, deadline=None)
@given(params, qs)
def test_roots_solve_exponent(p, q):
    phi, rho = cl_roots(p, q)
    assert phi >= 0 >= rho > -p.mu
    assert abs(shifted_exponent(p, phi, q)) < 1e-12 * max(1.0, p.c * phi + p.lam)
    assert abs(shifted_exponent(p, rho, q)) < 1e-12 * max(1.0, p.c * abs(rho) + p.lam / (p.mu + rho))


@settings(max_examples=50, deadline=None)
@given(params, qs)
def test_scale_at_zero_and_monotone(p, q):
    assert cl_scale_W(p, q, 0.0) == pytest.approx(1.0 / p.c, rel=1e-14)
    x = np.arange(0, 20, 0.01)
    # W saturates in double precision once e^{rho x} < 1e-16, so strictness is checked on w
    assert np.all(cl_scale_w(p, q, x) > 0)
    assert np.all(np.diff(cl_scale_W(p, q, x)) >= 0)


@settings(max_examples=50, deadline=None)
@given(params, qs, st.floats(0.1, 8.0))
def test_derivative_matches_finite_difference(p, q, x):
    phi, rho = cl_roots(p, q)
    h = 1e-5 * max(1.0, x) / max(1.0, phi, -rho)
    fd = (cl_scale_W(p, q, x + h) - cl_scale_W(p, q, x - h)) / (2 * h)
    # round-off floor of the central difference when w is tiny next to W
    floor = 100 * np.finfo(float).eps * cl_scale_W(p, q, x) / h
    assert fd == pytest.approx(cl_scale_w(p, q, x), rel=1e-7, abs=floor)


def test_confluent_roots():
    # q = 0 with c mu = lam makes phi = rho = 0; the form stays finite
    p = CramerLundbergParams(1.0, 1.0, 1.0)
    assert cl_roots(p, 0.0) == (0.0, 0.0)
    x = np.array([0.0, 1.0, 3.0])
    assert np.allclose(cl_scale_W(p, 0.0, x), 1 + x)
    assert np.allclose(cl_scale_w(p, 0.0, x), 1.0)


@pytest.mark.parametrize("p,q", [(CramerLundbergParams(1.0, 0.5, 1.0), 0.0),
                                 (CramerLundbergParams(2.0, 1.0, 1.5), 0.7),
                                 (CramerLundbergParams(1.0, 1.0, 1.0), 1.0)])
def test_transform_identity(p, q):
    phi, _ = cl_roots(p, q)
    for s in (phi + 0.5, phi + 1.0, phi + 3.0):
        val, _ = integrate.quad(lambda t: math.exp(-s * t) * cl_scale_W(p, q, t), 0, 40, limit=200)
        assert val == pytest.approx(1.0 / shifted_exponent(p, s, q), rel=1e-6)
