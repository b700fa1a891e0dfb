import math

import numpy as np
import pytest

from vortexring import regime_from_omega1
from vortexring import giant_vortex as vgv
from vortexring.grids import RadialGrid


def test_grid_weights_sum_to_area(chain_005):
    grid = chain_005.grid
    assert abs(grid.weights.sum() - grid.area) / grid.area < 1e-10


def test_state_mass_and_positivity(chain_005):
    st = chain_005.state
    assert abs(st.mass() - 1.0) < 1e-8
    assert np.all(st.g > 0.0)


def test_el_residual(chain_005):
    assert chain_005.state.residual_norm < 1e-8


def test_energy_history_monotone(chain_005):
    hist = chain_005.state.energy_history
    assert np.all(np.diff(hist) <= 1e-13 * np.abs(hist[:-1]) + 1e-13)


def test_flow_matches_newton_decoupled(chain_005):
    # a = [Omega]: winding factor drops out entirely
    regime = chain_005.regime
    grid = chain_005.grid
    a0 = regime.integer_omega
    flow = vgv.solve_profile(regime, a0, grid)
    newton = vgv.solve_profile_newton(regime, a0, grid)
    assert abs(flow.energy - newton.energy) / abs(flow.energy) < 1e-6
    assert flow.residual_norm < 1e-8


def test_flow_matches_newton_optimal(chain_005):
    regime = chain_005.regime
    newton = vgv.solve_profile_newton(regime, chain_005.omega, chain_005.grid)
    assert abs(chain_005.state.energy - newton.energy) \
        / abs(newton.energy) < 1e-6


def test_grid_doubling_drift(chain_005):
    regime = chain_005.regime
    coarse = RadialGrid(chain_005.geo.r_less, 1024)
    st1 = vgv.solve_profile(regime, chain_005.omega, coarse)
    st2 = vgv.solve_profile(regime, chain_005.omega, chain_005.grid)
    assert abs(st2.energy - st1.energy) / abs(st1.energy) < 1e-5


def test_projection_idempotence(chain_005):
    # rescaling the converged profile and renormalizing returns the same
    # minimizer
    regime = chain_005.regime
    st = chain_005.state
    rescaled = 3.7 * st.g
    st2 = vgv.solve_profile(regime, st.a, st.grid, initial=rescaled)
    assert np.max(np.abs(st2.g - st.g)) < 1e-6 * np.max(st.g)


def test_gradient_matches_finite_differences(chain_005):
    # discrete functional gradient vs centered differences, 5 directions
    st = chain_005.state
    disc = vgv._Discretization(st.regime, st.winding, st.grid)
    g = st.g
    grad = 2.0 * disc.half_gradient(g)
    rng = np.random.default_rng(3)
    for _ in range(5):
        d = rng.standard_normal(len(g))
        d /= np.linalg.norm(d)
        h = 1e-6
        fd = (disc.energy(g + h * d) - disc.energy(g - h * d)) / (2.0 * h)
        an = float(np.dot(grad, d))
        assert abs(fd - an) / max(abs(an), 1e-12) < 1e-5


def test_winding_scan_u_shaped(chain_005):
    energies = chain_005.scan["energies"]
    keys = sorted(energies)
    vals = [energies[k] for k in keys]
    i_min = int(np.argmin(vals))
    assert 0 < i_min < len(vals) - 1
    assert all(vals[i] >= vals[i + 1] for i in range(i_min))
    assert all(vals[i] <= vals[i + 1] for i in range(i_min, len(vals) - 1))


def test_optimal_winding_window(chain_005):
    # omega within a broad sanity window around 2/(3 sqrt(pi) eps) ~ 7.5
    assert 6 <= chain_005.omega <= 10
    e = chain_005.scan["energies"]
    om = chain_005.omega
    assert e[om] <= e[om - 1] and e[om] <= e[om + 1]


def test_a_from_leading_order_arithmetic(chain_005):
    a = round(2.0 / (3.0 * math.sqrt(math.pi) * 0.05))
    assert a == 8
    st = vgv.solve_profile(chain_005.regime, a, chain_005.grid)
    assert abs(st.mass() - 1.0) < 1e-8


def test_compatibility_integral(chain_005):
    value = vgv.compatibility_integral(chain_005.state, chain_005.regime)
    assert abs(value) <= 10.0


def test_compatibility_normalization_identity(chain_005):
    # with [Omega] - a = 0 the integrand reduces to Omega * g^2
    regime = chain_005.regime
    st = vgv.solve_profile(regime, regime.integer_omega, chain_005.grid)
    value = vgv.compatibility_integral(st, regime)
    assert value == pytest.approx(regime.omega, rel=1e-8)


def test_compatibility_bounded_across_sweep():
    values = []
    for eps in (0.05, 0.03, 0.02):
        regime = regime_from_omega1(eps, 0.0)
        from vortexring import annulus_geometry, tf_profile
        geo = annulus_geometry(regime, tf_profile(regime))
        grid = RadialGrid(geo.r_less, 768)
        _, st, _ = vgv.optimal_winding(regime, grid)
        values.append(abs(vgv.compatibility_integral(st, regime)))
    assert all(v <= 10.0 for v in values)


def test_decay_diagnostics(chain_005):
    rep = vgv.decay_diagnostics(chain_005.state, chain_005.tf)
    assert math.isfinite(rep.hole_decay_constant)
    assert rep.hole_decay_constant >= 0.0
    assert math.isfinite(rep.bulk_shape_constant)
    assert 0.5 <= rep.edge_ratio <= 1.5


def test_bulk_closeness_improves_with_eps():
    sups = []
    for eps in (0.05, 0.03, 0.02):
        regime = regime_from_omega1(eps, 0.0)
        from vortexring import annulus_geometry, tf_profile
        tf = tf_profile(regime)
        geo = annulus_geometry(regime, tf)
        grid = RadialGrid(geo.r_less, 1024)
        _, st, _ = vgv.optimal_winding(regime, grid)
        sups.append(vgv.decay_diagnostics(st, tf).bulk_rel_error_sup)
    assert sups[0] > sups[1] > sups[2]


def test_sanity_bound_on_winding(chain_005):
    from vortexring.errors import SolverError
    with pytest.raises(SolverError):
        vgv.solve_profile(chain_005.regime, 10_000, chain_005.grid)
