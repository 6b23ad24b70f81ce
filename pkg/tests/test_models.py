import math

import numpy as np
import pytest

from segerdahl.errors import DomainError, ExplosionError
from segerdahl.models import DriftSpec, ExitQuery, ModelParams


def test_derived_quantities():
    p = ModelParams(2.0, 0.5, 1.0, 3.0, 0.25)
    assert (p.lam_t, p.q_t, p.c_t, p.n) == (2.0, 0.5, 4.0, 2.5)
    assert p.absolute_ruin == -4.0
    assert p.premium(2.0) == pytest.approx(3.0)
    assert p.with_q(1.0).q == 1.0


@pytest.mark.parametrize("kw", [dict(r=0.0), dict(lam=-1.0), dict(mu=0.0), dict(q=-0.1), dict(c=-1.0),
                                dict(c=math.nan)])
def test_validation(kw):
    args = dict(c=1.0, r=1.0, lam=1.0, mu=1.0, q=0.0)
    args.update(kw)
    with pytest.raises(DomainError):
        ModelParams(**args)


def test_lambda_message():
    with pytest.raises(DomainError, match="lambda"):
        ModelParams(1.0, 1.0, -1.0, 1.0)


def test_exit_query_order():
    ExitQuery(0.5, 0.0, 1.0)
    ExitQuery(0.5, 0.0)
    with pytest.raises(DomainError):
        ExitQuery(2.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        ExitQuery(math.inf, 0.0)


def test_linear_travel_time_and_flow():
    d = DriftSpec.linear(1.0, 1.0)
    assert d.C_fun(1.0, 0.0) == pytest.approx(math.log(2.0))
    assert d.flow_fn(0.0, math.log(2.0)) == pytest.approx(1.0)
    assert d.lower == -1.0
    assert not d.explodes()


def test_constant_and_tichy():
    d = DriftSpec.constant(2.0)
    assert d.C_fun(3.0, 1.0) == pytest.approx(1.0)
    t = DriftSpec.tichy(1.0, 1.0)
    assert t.C_fun(1.0, 0.0) == pytest.approx(math.pi / 4)
    assert t.explodes()
    assert np.isinf(t.flow_fn(0.0, 2.0))
    with pytest.raises(ExplosionError):
        t.require_non_explosive()


def test_general_drift_quadrature():
    g = DriftSpec.general(lambda x: 1.0 + 0.5 * x, lower=-2.0)
    lin = DriftSpec.linear(1.0, 0.5)
    assert g.C_fun(3.0, 0.5) == pytest.approx(lin.C_fun(3.0, 0.5), rel=1e-11)
    assert not g.explodes()


def test_power_drift():
    assert DriftSpec.power(1.0, 1.0, 1.0).kind == "linear"
    p = DriftSpec.power(1.0, 1.0, 1.5)
    assert p.kind == "power" and p.lower == -1.0
    assert p.explodes()  # int dx / x^1.5 converges


def test_check_positive():
    d = DriftSpec.linear(1.0, 1.0)
    d.check_positive(-0.5, 3.0)
    with pytest.raises(DomainError):
        d.check_positive(-1.0, 3.0)


def test_K_factor_linear():
    d = DriftSpec.linear(1.0, 1.0)
    x = np.linspace(0, 5, 6)
    assert np.allclose(d.K(1.0, 1.0, x), np.exp(-x) * (1 + x))
