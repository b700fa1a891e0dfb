import math

import numpy as np
import pytest

from vortexring import annulus_geometry, regime_from_omega1, tf_profile
from vortexring.errors import GeometryError, NoHoleError
from vortexring.params import Regime
from vortexring.thomas_fermi import (
    hole_threshold_epsilon,
    tf_energy_quadrature,
    tf_mass_quadrature,
)


@pytest.fixture(scope="module")
def tf_at_threshold():
    # eps=0.05 at the critical speed: eps*Omega = 1.417 > 2/sqrt(pi)
    regime = regime_from_omega1(0.05, 0.0)
    return regime, tf_profile(regime)


def test_hole_radius(tf_at_threshold):
    _, tf = tf_at_threshold
    assert tf.r_h == pytest.approx(math.sqrt(1.0 - 0.79645), abs=1e-4)


def test_mass_normalization(tf_at_threshold):
    _, tf = tf_at_threshold
    assert abs(tf_mass_quadrature(tf) - 1.0) < 1e-10


def test_energy_closed_form_vs_quadrature(tf_at_threshold):
    # independent 1D quadrature of the energy functional at rho_TF
    _, tf = tf_at_threshold
    quad = tf_energy_quadrature(tf)
    assert abs(quad - tf.e_tf) / abs(tf.e_tf) < 1e-8


def test_chemical_potential_identity(tf_at_threshold):
    # mu_TF = E_TF + eps^-2 ||rho||_2^2 must equal -Omega^2 R_h^2
    regime, tf = tf_at_threshold
    assert tf.mu_tf == pytest.approx(-regime.omega**2 * tf.r_h**2, rel=1e-12)


def test_density_support_and_monotonicity(tf_at_threshold):
    _, tf = tf_at_threshold
    r = np.linspace(0.0, 1.0, 1001)
    rho = tf.density(r)
    assert np.all(rho >= 0.0)
    assert np.all(rho[r <= tf.r_h] == 0.0)
    on = rho[r >= tf.r_h]
    assert np.all(np.diff(on) >= 0.0)
    assert rho.max() == rho[-1]


def test_no_hole_error():
    # a desk regime below the hole-opening threshold
    regime = regime_from_omega1(0.05, 0.1)
    with pytest.raises(NoHoleError):
        tf_profile(regime)


def test_hole_threshold_epsilon():
    # threshold should separate hole from no-hole regimes
    for omega1 in (0.0, 0.05, 0.1):
        eps_max = hole_threshold_epsilon(omega1)
        r_ok = regime_from_omega1(eps_max * 0.95, omega1)
        tf_profile(r_ok)  # no raise
        with pytest.raises(NoHoleError):
            tf_profile(regime_from_omega1(min(eps_max * 1.05, 0.35), omega1))


def test_energy_trend_toward_minus_omega_sq():
    # E_TF -> -Omega^2 as eps*Omega grows
    ratios = []
    for eps in (0.05, 0.02, 0.01):
        regime = regime_from_omega1(eps, 0.0)
        tf = tf_profile(regime)
        ratios.append(tf.e_tf / (-regime.omega**2))
    assert all(r < 1.0 for r in ratios)
    assert ratios == sorted(ratios)  # increasing toward 1


def test_annulus_geometry_values():
    regime = regime_from_omega1(0.05, 0.0)
    tf = tf_profile(regime)
    geo = annulus_geometry(regime, tf)
    assert tf.r_h - geo.r_less == pytest.approx(0.05 ** (8.0 / 7.0), rel=1e-12)
    assert geo.r_greater - tf.r_h == pytest.approx(0.05 / regime.log_eps,
                                                   rel=1e-12)
    # Omega_1 = 0 gives R_bulk = R_h
    assert geo.r_bulk == tf.r_h
    assert not geo.bulk_covers_reduced
    assert 0.0 < geo.r_less < tf.r_h < geo.r_greater < 1.0


def test_annulus_ordering_enforced():
    # an artificial regime whose R_< would go negative: small hole radius
    # with a coarse epsilon
    regime = Regime(epsilon=0.5, omega=2.4)  # eps*Omega = 1.2, R_h ~ 0.244
    tf = tf_profile(regime)
    with pytest.raises(GeometryError):
        annulus_geometry(regime, tf)


def test_bulk_radius_with_omega1():
    regime = regime_from_omega1(0.03, 0.08)
    tf = tf_profile(regime)
    geo = annulus_geometry(regime, tf)
    expected = tf.r_h + 0.03 * regime.log_eps * math.sqrt(0.08)
    assert geo.r_bulk == pytest.approx(expected, rel=1e-12)
    assert geo.bulk_covers_reduced
