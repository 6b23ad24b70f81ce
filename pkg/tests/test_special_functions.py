import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from segerdahl.errors import DomainError, EvaluationError
from segerdahl.special_functions import (
    HyperArgs,
    kummer_M,
    lower_incomplete_gamma,
    tricomi_U,
    upper_incomplete_gamma,
)

pos = st.floats(0.05, 5.0)
zs = st.floats(0.05, 10.0)


def close(x, y, tol=1e-10):
    return abs(x - y) <= tol * max(abs(x), abs(y))


# examples

def test_M_at_zero_is_one():
    assert kummer_M(1.7, 2.3, 0.0) == 1.0


def test_M_closed_form():
    assert kummer_M(1.0, 2.0, 1.0) == pytest.approx(math.e - 1, rel=1e-14)


def test_U_power_reduction():
    assert tricomi_U(1.0, 2.0, 2.0) == pytest.approx(0.5, rel=1e-13)
    assert tricomi_U(1.0, 2.0, 1.0) == pytest.approx(1.0, rel=1e-13)
    assert tricomi_U(2.5, 3.5, 1.7) == pytest.approx(1.7 ** -2.5, rel=1e-12)


def test_incomplete_gammas():
    assert upper_incomplete_gamma(1.0, 0.7) == pytest.approx(math.exp(-0.7), rel=1e-14)
    assert upper_incomplete_gamma(2.0, 1.0) == pytest.approx(2 / math.e, rel=1e-14)
    assert upper_incomplete_gamma(3.3, 0.0) == pytest.approx(math.gamma(3.3), rel=1e-14)
    assert lower_incomplete_gamma(1.0, 1.0) == pytest.approx(1 - 1 / math.e, rel=1e-14)
    assert lower_incomplete_gamma(2.2, 0.0) == 0.0
    assert lower_incomplete_gamma(2.2, 1.3) + upper_incomplete_gamma(2.2, 1.3) == pytest.approx(math.gamma(2.2))


def test_U_incomplete_gamma_form():
    for lam_t in (0.3, 1.0, 2.5):
        for v in (0.2, 1.0, 7.0):
            want = math.exp(v) * v ** -lam_t * upper_incomplete_gamma(lam_t, v)
            assert tricomi_U(1.0, 1.0 + lam_t, v) == pytest.approx(want, rel=1e-10)


def test_M_vectorized_matches_scalar():
    z = np.linspace(-5, 60, 41)
    vec = kummer_M(1.3, 2.4, z)
    assert vec.shape == z.shape
    assert np.allclose(vec, [kummer_M(1.3, 2.4, float(t)) for t in z], rtol=1e-14, atol=0)


# errors

def test_U_rejects_bad_domain():
    with pytest.raises(DomainError):
        tricomi_U(1.0, 2.0, 0.0)
    with pytest.raises(DomainError):
        tricomi_U(-0.5, 2.0, 1.0)


def test_M_rejects_nonpositive_integer_b():
    with pytest.raises(DomainError):
        kummer_M(1.0, -2.0, 1.0)


def test_hyperargs_finite():
    with pytest.raises(DomainError):
        HyperArgs(1.0, math.inf, 1.0)


def test_gamma_domain():
    with pytest.raises(DomainError):
        upper_incomplete_gamma(0.0, 1.0)
    with pytest.raises(DomainError):
        lower_incomplete_gamma(1.0, -1.0)


def test_evaluation_error_carries_arguments():
    err = EvaluationError("boom", a=1.0, b=2.0, z=3.0)
    assert "a=1.0" in str(err) and err.args_["z"] == 3.0


# mpmath oracle

@settings(max_examples=60, deadline=None)
@given(pos, st.floats(0.05, 8.0), st.floats(-20.0, 80.0))
def test_M_matches_mpmath(a, b, z):
    want = float(mp.hyp1f1(a, b, z))
    assert close(kummer_M(a, b, z), want, 1e-10)


@settings(max_examples=60, deadline=None)
@given(pos, st.floats(-3.0, 8.0), st.floats(1e-3, 60.0))
def test_U_matches_mpmath(a, b, z):
    want = float(mp.hyperu(a, b, z))
    assert close(tricomi_U(a, b, z), want, 1e-10)


# identities and properties

@settings(max_examples=40, deadline=None)
@given(pos, pos, zs)
def test_contiguous_M(a, d, z):
    b = a + d
    M = kummer_M
    assert close(b * M(a, b, z) + (a - b) * M(a, b + 1, z), a * M(a + 1, b + 1, z))
    assert close(b * (M(a + 1, b, z) - M(a, b, z)), z * M(a + 1, b + 1, z), 1e-9)


@settings(max_examples=40, deadline=None)
@given(pos, pos, zs)
def test_contiguous_U(a, d, z):
    b = a + d
    U = tricomi_U
    assert close((b - a) * U(a, b, z) + z * U(a, b + 2, z), (z + b) * U(a, b + 1, z))
    assert close(U(a, b, z) + a * U(a + 1, b + 1, z), U(a, b + 1, z))
    assert close(U(a, b, z) + (b - a - 1) * U(a + 1, b, z), z * U(a + 1, b + 1, z), 1e-9)


@settings(max_examples=30, deadline=None)
@given(pos, pos, st.floats(0.5, 10.0))
def test_derivative_relations(a, d, z):
    b, h = a + d, 1e-5
    dU = (tricomi_U(a, b, z + h) - tricomi_U(a, b, z - h)) / (2 * h)
    dM = (kummer_M(a, b, z + h) - kummer_M(a, b, z - h)) / (2 * h)
    assert close(dU, -a * tricomi_U(a + 1, b + 1, z), 1e-6)
    assert close(dM, a / b * kummer_M(a + 1, b + 1, z), 1e-6)


@settings(max_examples=40, deadline=None)
@given(pos, pos, zs)
def test_kummer_transformation(a, d, z):
    b = a + d
    assert close(kummer_M(a, b, z), math.exp(z) * kummer_M(b - a, b, -z))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.05, 30.0))
def test_sU_identity(lam_t, v):
    lhs = 1 + lam_t * tricomi_U(1.0, 1.0 + lam_t, v)
    assert close(lhs, v * tricomi_U(1.0, 2.0 + lam_t, v))


@pytest.mark.parametrize("q_t,lam_t", [(0.5, 0.5), (1.0, 2.0), (2.0, 1.0)])
def test_small_z_limit(q_t, lam_t):
    z = 1e-6
    got = z ** (q_t + 1 + lam_t) * tricomi_U(1 + q_t, q_t + 2 + lam_t, z)
    want = math.gamma(1 + q_t + lam_t) / math.gamma(1 + q_t)
    assert got == pytest.approx(want, rel=1e-3)


@settings(max_examples=30, deadline=None)
@given(pos, pos, st.floats(0.1, 10.0))
def test_monotonicity(a, b, z):
    assert kummer_M(a, b, z * 1.01) > kummer_M(a, b, z) > 0
    assert 0 < tricomi_U(a, b, z * 1.01) < tricomi_U(a, b, z)
