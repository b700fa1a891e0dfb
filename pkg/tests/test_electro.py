import math

import numpy as np
import pytest

from vortexring import regime_from_omega1
from vortexring import electro as vel
from vortexring.errors import DomainError, SolverError
from vortexring.grids import PolarGrid, SectorGrid


def fd_radial_oracle(w, ring_r, inner, n=6000):
    """Dense 1D finite-difference solve of -div(sigma grad h) = ring.

    Shell-integrated form: coeff_{i-1}(h_i - h_{i-1}) - coeff_i(h_{i+1} -
    h_i) = mass_in_shell / (2 pi), with coeff = sigma r / dr at faces and
    a unit ring measure.
    """
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    r = np.linspace(inner, 1.0, n)
    dr = r[1] - r[0]
    faces = 0.5 * (r[1:] + r[:-1])
    coeff = faces / (w(faces) * dr)
    rhs = np.zeros(n - 2)
    i_ring = int(np.clip(round((ring_r - inner) / dr), 1, n - 2))
    rhs[i_ring - 1] = 1.0 / (2.0 * math.pi)
    main = coeff[:-1] + coeff[1:]
    off = -coeff[1:-1]
    mat = sp.diags([off, main, off], [-1, 0, 1], format="csc")
    h = spla.spsolve(mat, rhs)
    out = np.zeros(n)
    out[1:-1] = h
    return r, out


def test_constant_weight_closed_form():
    c, a, R = 2.5, 0.3, 0.6
    w = vel.WeightField.constant(c, a)
    value = vel.ring_energy(w, R, a)
    closed = c * math.log(R / a) * math.log(1.0 / R) / (2.0 * math.pi * math.log(1.0 / a))
    assert abs(value - closed) / closed < 1e-6


def test_ring_potential_boundaries_and_shape():
    w = vel.WeightField.constant(1.0, 0.4)
    h = vel.radial_ring_potential(w, 0.7, 0.4)
    assert h.values[0] == 0.0 and h.values[-1] == 0.0
    i_ring = int(np.argmin(np.abs(h.r - 0.7)))
    assert np.all(np.diff(h.values[: i_ring + 1]) >= -1e-15)
    assert np.all(np.diff(h.values[i_ring:]) <= 1e-15)
    assert np.all(h.values >= 0.0)


def test_ring_energy_equals_field_energy():
    w = vel.WeightField.constant(3.0, 0.35)
    h = vel.radial_ring_potential(w, 0.6, 0.35)
    quad = vel.radial_field_energy(h)
    assert abs(quad - h.value_at_ring) / h.value_at_ring < 1e-6


def test_ring_potential_vs_fd_oracle():
    w = vel.WeightField.constant(2.0, 0.3)
    h = vel.radial_ring_potential(w, 0.65, 0.3)
    r_fd, h_fd = fd_radial_oracle(w, 0.65, 0.3)
    ours = np.interp(r_fd, h.r, h.values)
    assert np.max(np.abs(ours - h_fd)) / np.max(h_fd) < 1e-3


def test_ring_domain_error():
    w = vel.WeightField.constant(1.0, 0.5)
    with pytest.raises(DomainError):
        vel.radial_ring_potential(w, 0.4, 0.5)


def test_weight_positivity_enforced():
    with pytest.raises(DomainError):
        vel.WeightField(r=np.linspace(0.5, 1, 32), values=np.zeros(32))


def test_i_star_bounded_across_sweep():
    # boundedness of I_* for the state weight across epsilon
    from vortexring import annulus_geometry, tf_profile
    from vortexring import cost as vcost
    from vortexring import giant_vortex as vgv
    from vortexring.grids import RadialGrid

    values = []
    for eps in (0.05, 0.03, 0.02):
        regime = regime_from_omega1(eps, 0.03)
        tf = tf_profile(regime)
        geo = annulus_geometry(regime, tf)
        grid = RadialGrid(geo.r_less, 1024)
        _, state, _ = vgv.optimal_winding(regime, grid)
        prof = vcost.cost_profile(state, tf)
        w = vel.WeightField.from_state(state)
        values.append(vel.ring_energy(w, prof.r_star, geo.r_less))
    assert all(1e-4 < v < 1.0 for v in values)
    assert max(values) / min(values) < 5.0


def test_i_star_vs_bulk_variant(chain_ring):
    # |I_* - I_check| <= fitted sqrt(Omega_1), stable across Omega_1
    from vortexring import annulus_geometry, tf_profile
    from vortexring import cost as vcost
    from vortexring import giant_vortex as vgv
    from vortexring.grids import RadialGrid

    fitted = []
    for omega1 in (0.02, 0.05, 0.1):
        regime = regime_from_omega1(0.02, omega1)
        tf = tf_profile(regime)
        geo = annulus_geometry(regime, tf)
        grid = RadialGrid(geo.r_less, 1024)
        _, state, _ = vgv.optimal_winding(regime, grid)
        prof = vcost.cost_profile(state, tf)
        w = vel.WeightField.from_state(state)
        i_star = vel.ring_energy(w, prof.r_star, geo.r_less)
        i_check = vel.ring_energy(w, prof.r_star, geo.r_bulk)
        fitted.append(abs(i_star - i_check) / math.sqrt(omega1))
    assert all(f < 1.0 for f in fitted)


@pytest.fixture(scope="module")
def poisson_setup(chain_ring):
    grid = PolarGrid(chain_ring.geo.r_less, 96, 512)
    return chain_ring, grid


def test_zero_source(poisson_setup):
    chain, grid = poisson_setup
    src = np.zeros((96, 512))
    h = vel.solve_poisson2d(chain.weight, src, grid)
    assert np.all(h.values == 0.0)


def test_2d_vs_radial_and_refinement(poisson_setup):
    chain, grid = poisson_setup
    r_star = chain.profile.r_star
    radial = vel.radial_ring_potential(chain.weight, r_star,
                                       chain.geo.r_less)

    def rel_l2(grid):
        src = vel.mollified_ring_source(grid, r_star)
        h2 = vel.solve_poisson2d(chain.weight, src, grid)
        h1 = np.interp(grid.r, radial.r, radial.values)[:, None]
        num = math.sqrt(float(np.sum((h2.values - h1) ** 2)))
        den = math.sqrt(float(np.sum(h1**2 * np.ones_like(h2.values))))
        return num / den

    base = rel_l2(grid)
    assert base < 0.02
    fine = rel_l2(PolarGrid(chain.geo.r_less, 191, 1024))
    assert fine < 0.6 * base


def test_superposition(poisson_setup):
    chain, grid = poisson_setup
    r_star = chain.profile.r_star
    s1 = vel.mollified_ring_source(grid, r_star - 0.05)
    s2 = vel.mollified_ring_source(grid, r_star + 0.05)
    h1 = vel.solve_poisson2d(chain.weight, s1, grid)
    h2 = vel.solve_poisson2d(chain.weight, s2, grid)
    h12 = vel.solve_poisson2d(chain.weight, s1 + s2, grid)
    scale = np.max(np.abs(h12.values))
    assert np.max(np.abs(h12.values - h1.values - h2.values)) < 1e-8 * scale


def test_quadratic_mass_scaling(poisson_setup):
    chain, grid = poisson_setup
    src = vel.mollified_ring_source(grid, chain.profile.r_star)
    e1 = vel.electro_energy(vel.solve_poisson2d(chain.weight, src, grid))
    e2 = vel.electro_energy(vel.solve_poisson2d(chain.weight, 2.0 * src, grid))
    assert e2 == pytest.approx(4.0 * e1, rel=1e-6)


def test_green_identity(poisson_setup):
    # int w^-1 |grad h|^2 = int h dnu within 1% at baseline grid
    chain, grid = poisson_setup
    src = vel.mollified_ring_source(grid, chain.profile.r_star)
    h = vel.solve_poisson2d(chain.weight, src, grid)
    energy = vel.electro_energy(h)
    w = np.full(len(grid.r), grid.dr)
    w[0] = w[-1] = 0.5 * grid.dr
    pairing = float(np.sum(h.values * src * (grid.r * w)[:, None]) * grid.dtheta)
    assert abs(energy - pairing) / pairing < 0.01


def test_2d_ring_energy_matches_radial(poisson_setup):
    chain, grid = poisson_setup
    src = vel.mollified_ring_source(grid, chain.profile.r_star)
    h = vel.solve_poisson2d(chain.weight, src, grid)
    energy = vel.electro_energy(h)
    assert abs(energy - chain.i_star) / chain.i_star < 0.02


def test_maximum_principle(poisson_setup):
    chain, grid = poisson_setup
    src = vel.mollified_ring_source(grid, chain.profile.r_star)
    h = vel.solve_poisson2d(chain.weight, src, grid)
    assert np.all(h.values >= -1e-12)


def test_h_star_equals_i_star_every_weight(chain_ring):
    # Lagrange identity h(R_*) = I for several weights
    for w in (chain_ring.weight,
              vel.WeightField.constant(1.7, chain_ring.geo.r_less)):
        h = vel.radial_ring_potential(w, chain_ring.profile.r_star,
                                      chain_ring.geo.r_less)
        quad = vel.radial_field_energy(h)
        assert abs(h.value_at_ring - quad) / quad < 1e-6


def test_ring_minimality(poisson_setup):
    chain, grid = poisson_setup
    rep = vel.ring_minimality_check(chain.weight, chain.profile.r_star, grid,
                                    trials=20, seed=1)
    assert rep.worst_ratio > 0.99           # no violation beyond 1%
    assert rep.concentrated_ratio > 1.05    # half-circle strictly worse


def test_renormalized_energy(chain_ring):
    h_rstar = chain_ring.profile.h_at_rstar
    i_star = chain_ring.i_star
    rec = vel.renormalized_energy(0.0, h_rstar, i_star)
    assert rec.value == 0.0
    assert rec.mass_opt == pytest.approx(-h_rstar / (2.0 * i_star), rel=1e-14)
    assert rec.min_value == pytest.approx(-h_rstar**2 / (4.0 * i_star),
                                          rel=1e-14)
    # brute-force scan over mass recovers the same minimizer
    masses = np.linspace(0.0, 4.0 * rec.mass_opt, 400001)
    vals = masses**2 * i_star + masses * h_rstar
    m_best = masses[np.argmin(vals)]
    assert abs(m_best - rec.mass_opt) < 1e-8 * max(1.0, rec.mass_opt) + 2e-4
    with pytest.raises(DomainError):
        vel.renormalized_energy(1.0, h_rstar, -1.0)


def test_optimal_vortex_number(chain_ring):
    number = chain_ring.number
    assert number.favorable
    assert 1.0 <= number.n_exact <= 10.0
    assert number.total >= 1
    # boundary case
    zero = vel.optimal_vortex_number(chain_ring.regime, 0.0, chain_ring.i_star)
    assert not zero.favorable and zero.total == 0
    # supercritical signal
    sup = vel.optimal_vortex_number(chain_ring.regime, 0.5, chain_ring.i_star)
    assert not sup.favorable


def test_vortex_number_scaling():
    # N eps / Omega_1 roughly stable across an eps sweep at fixed Omega_1
    from vortexring import annulus_geometry, tf_profile
    from vortexring import cost as vcost
    from vortexring import giant_vortex as vgv
    from vortexring.grids import RadialGrid

    scaled = []
    for eps in (0.03, 0.02):
        regime = regime_from_omega1(eps, 0.08)
        tf = tf_profile(regime)
        geo = annulus_geometry(regime, tf)
        grid = RadialGrid(geo.r_less, 1024)
        _, state, _ = vgv.optimal_winding(regime, grid)
        prof = vcost.cost_profile(state, tf)
        w = vel.WeightField.from_state(state)
        i_star = vel.ring_energy(w, prof.r_star, geo.r_less)
        n = vel.optimal_vortex_number(regime, prof.h_at_rstar, i_star,
                                      geo.width_annulus)
        scaled.append(n.n_exact * eps / 0.08)
    assert max(scaled) / min(scaled) < 2.0


@pytest.fixture(scope="module")
def green_setup(chain_ring):
    from vortexring import trial as vtrial

    rho = vtrial.modified_density(chain_ring.state, chain_ring.tf)
    n_cells = 9
    width = 2.0 * math.pi / n_cells
    grid = SectorGrid(chain_ring.geo.r_less, 0.0, width, 384, 160)
    return chain_ring, rho.as_weight(), grid, width


def test_green_positivity_and_symmetry(green_setup):
    chain, weight, grid, width = green_setup
    r_star = chain.profile.r_star
    rng = np.random.default_rng(5)
    pairs = []
    for _ in range(5):
        y1 = (r_star + rng.uniform(-0.05, 0.05), rng.uniform(0.2, 0.8) * width)
        y2 = (r_star + rng.uniform(-0.12, 0.12), rng.uniform(0.2, 0.8) * width)
        pairs.append((y1, y2))
    for y1, y2 in pairs:
        g1 = vel.green_function_cell(weight, grid, y1)
        g2 = vel.green_function_cell(weight, grid, y2)
        assert np.min(g1.values) >= 0.0
        i2 = int(np.argmin(np.abs(grid.r - y2[0])))
        j2 = int(np.argmin(np.abs(grid.theta - y2[1])))
        i1 = int(np.argmin(np.abs(grid.r - y1[0])))
        j1 = int(np.argmin(np.abs(grid.theta - y1[1])))
        v12, v21 = g1.values[i2, j2], g2.values[i1, j1]
        assert abs(v12 - v21) / max(abs(v12), abs(v21)) < 0.02


def test_green_log_singularity(green_setup):
    chain, weight, grid, width = green_setup
    r_star = chain.profile.r_star
    for offset in (-0.06, -0.03, 0.0, 0.03, 0.06):
        y = (r_star + offset, 0.5 * width)
        g = vel.green_function_cell(weight, grid, y)
        iy = int(np.argmin(np.abs(grid.r - y[0])))
        jy = int(np.argmin(np.abs(grid.theta - y[1])))
        ry, thy = grid.r[iy], grid.theta[jy]
        R, TH = np.meshgrid(grid.r, grid.theta, indexing="ij")
        d = np.hypot(R * np.cos(TH) - ry * math.cos(thy),
                     R * np.sin(TH) - ry * math.sin(thy))
        mask = (d > 3.0 * grid.dr) & (d < 0.04)
        slope = np.polyfit(-np.log(d[mask]), g.values[mask], 1)[0]
        expected = weight(ry) / (2.0 * math.pi)
        assert abs(slope - expected) / expected < 0.05


def test_green_conditioning_error(green_setup):
    chain, weight, grid, width = green_setup
    with pytest.raises(DomainError):
        vel.green_function_cell(weight, grid, (grid.r[1], 0.5 * width))


def test_radial_measure_source(poisson_setup):
    chain, grid = poisson_setup
    measure = vel.RadialMeasure(radius=chain.profile.r_star, mass=3.0)
    src = measure.source(grid)
    assert vel.source_mass(grid, src) == pytest.approx(3.0, rel=1e-12)
    with pytest.raises(DomainError):
        vel.RadialMeasure(radius=0.5, mass=-1.0)
