import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexring import (
    critical_speed,
    regime_from_omega,
    regime_from_omega1,
    validate_regime,
)
from vortexring.errors import DomainError, RegimeError


def test_critical_speed_values():
    # direct evaluation of the closed form
    assert critical_speed(0.05) == pytest.approx(28.3345, abs=5e-4)
    assert critical_speed(0.03) == pytest.approx(67.241, abs=5e-3)


def test_regime_from_omega1_values():
    r = regime_from_omega1(0.05, 0.0)
    assert r.omega == pytest.approx(28.335, abs=5e-3)
    r = regime_from_omega1(0.05, 0.1)
    assert r.omega == pytest.approx(14.98, abs=5e-3)


def test_regime_error_at_cancellation():
    with pytest.raises(RegimeError):
        regime_from_omega1(0.05, 2.0 / (3.0 * math.pi))


def test_domain_errors():
    with pytest.raises(DomainError):
        regime_from_omega1(1.5, 0.0)
    with pytest.raises(DomainError):
        regime_from_omega1(0.05, float("nan"))
    with pytest.raises(DomainError):
        critical_speed(-0.1)


def test_critical_speed_inverse_relation():
    eps = 0.04
    r = regime_from_omega(eps, critical_speed(eps))
    assert r.omega1 == pytest.approx(0.0, abs=1e-14)


def test_validate_regime_ratios():
    r = regime_from_omega1(0.05, 0.1)
    rep = validate_regime(r)
    assert rep.omega1_over_loglog == pytest.approx(0.273, abs=2e-3)
    assert rep.subcritical

    rep0 = validate_regime(regime_from_omega1(0.05, 0.0))
    assert rep0.at_threshold
    assert rep0.omega1 == 0.0
    assert any("threshold" in n for n in rep0.notes)

    rep2 = validate_regime(regime_from_omega1(0.01, 0.05))
    assert math.isfinite(rep2.omega1_over_loglog)
    assert math.isfinite(rep2.omega_eps2_log)
    assert 0.0 < rep2.omega_eps2_log < 2.0 / (3.0 * math.pi)


@given(eps=st.floats(0.005, 0.5), omega1=st.floats(0.0, 0.2))
@settings(max_examples=100, deadline=None)
def test_roundtrip_omega1(eps, omega1):
    # reading back Omega_1 from (critical - Omega) eps^2 |log eps|
    r = regime_from_omega1(eps, omega1)
    log_eps = -math.log(eps)
    back = (critical_speed(eps) - r.omega) * eps * eps * log_eps
    assert back == pytest.approx(omega1, rel=1e-12, abs=1e-13)


@given(st.floats(0.005, math.exp(-1.0) - 1e-6))
@settings(max_examples=60, deadline=None)
def test_critical_speed_decreasing(eps):
    assert critical_speed(eps) > critical_speed(eps * 1.01)


def test_regime_immutable():
    r = regime_from_omega1(0.05, 0.0)
    with pytest.raises(AttributeError):
        r.omega = 1.0


def test_serialization_roundtrip():
    r = regime_from_omega1(0.05, 0.02)
    d = r.as_dict()
    assert d["epsilon"] == 0.05
    assert d["omega1"] == 0.02
    assert d["log_eps"] == pytest.approx(-math.log(0.05))
