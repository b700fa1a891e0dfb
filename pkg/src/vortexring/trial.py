"""Explicit vortex-ring trial function and its rotating-frame energy.

The construction places NM unit vortices evenly on the circle of radius
R_*, regularizes their vorticity into small discs of radius
t = eps^(3/2) |log eps|^(1/2), solves a weighted Poisson problem for the
stream-like potential of the induced supercurrent, and assembles

    Psi = c * xi * g * exp(i (phi + n theta)),   n = [Omega] - omega,

where xi kills the density inside the cores and in a boundary layer at
R_<, and the phase phi carries winding +1 around every core.  Evaluating
the full rotating-frame energy of Psi realizes the theoretical upper bound
E_hat + 4 pi^2 N^2 I_* + 2 pi N H(R_*).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cost import CostProfile
from .electro import WeightField, electro_energy, solve_poisson2d
from .errors import ConfigurationError, PhaseError, ResolutionError
from .giant_vortex import GiantVortexState
from .grids import PolarGrid
from .params import Regime
from .thomas_fermi import TFProfile


@dataclass(frozen=True)
class CellDecomposition:
    """N identical angular cells, cell i spanning [theta_i, theta_{i+1})."""

    n_cells: int

    def __post_init__(self):
        if self.n_cells < 1:
            raise ConfigurationError("need at least one cell")

    @property
    def boundaries(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) * (2.0 * math.pi / self.n_cells)

    @property
    def width(self) -> float:
        return 2.0 * math.pi / self.n_cells


def core_scale(regime: Regime) -> float:
    """Optimal vortex-core radius t = eps^(3/2) |log eps|^(1/2)."""
    return regime.epsilon**1.5 * math.sqrt(regime.log_eps)


@dataclass(frozen=True)
class VortexConfiguration:
    """NM vortex centers evenly distributed on the ring radius."""

    regime: Regime
    cells: CellDecomposition
    m_per_cell: int
    ring_radius: float
    t: float
    angles: np.ndarray = field(repr=False)

    @property
    def total(self) -> int:
        return self.cells.n_cells * self.m_per_cell

    @property
    def points(self) -> np.ndarray:
        """(NM, 2) Cartesian vortex centers."""
        return self.ring_radius * np.stack(
            [np.cos(self.angles), np.sin(self.angles)], axis=1
        )

    @property
    def spacing(self) -> float:
        """Distance between adjacent vortices, 2 R_* sin(pi / NM)."""
        return 2.0 * self.ring_radius * math.sin(math.pi / self.total)

    def as_dict(self) -> dict:
        return {
            "n_cells": self.cells.n_cells,
            "m_per_cell": self.m_per_cell,
            "total": self.total,
            "ring_radius": self.ring_radius,
            "t": self.t,
            "spacing": self.spacing,
        }


def build_configuration(regime: Regime, cost: CostProfile, n_cells: int,
                        m_per_cell: int, *, r_inner: float) -> VortexConfiguration:
    """Evenly place N*M vortices on the ring, reflection-symmetric per cell.

    Angles sit at (k + 1/2) * 2 pi / (NM), which makes each cell's vortex
    pattern even about the cell midline with equal extremal distances to
    the radial cell boundaries.
    """
    cells = CellDecomposition(n_cells)
    total = n_cells * m_per_cell
    if total < 1:
        raise ConfigurationError("need at least one vortex")
    r_star = cost.r_star
    if math.isnan(r_star):
        raise ConfigurationError("cost profile has no ring radius")
    t = core_scale(regime)
    angles = (np.arange(total) + 0.5) * (2.0 * math.pi / total)

    half_gap_arc = math.pi * r_star / total
    if t >= half_gap_arc:
        raise ConfigurationError(
            f"cores of radius t={t:.4g} overlap: half-gap arc {half_gap_arc:.4g}"
        )
    cell_arc = cells.width * r_star
    if t >= cell_arc / 4.0:
        raise ConfigurationError(
            f"core radius t={t:.4g} >= cell arc/4 = {cell_arc / 4.0:.4g}"
        )
    if not (r_inner + t < r_star < 1.0 - t):
        raise ConfigurationError("cores leave the annulus radially")
    return VortexConfiguration(
        regime=regime, cells=cells, m_per_cell=m_per_cell,
        ring_radius=r_star, t=t, angles=angles,
    )


def _core_windows(cfg: VortexConfiguration, grid: PolarGrid, radius: float):
    """Per-core index windows covering dist <= radius, as (islice, jlist)."""
    out = []
    r, theta = grid.r, grid.theta
    nth = len(theta)
    for ang in cfg.angles:
        di = int(math.ceil(radius / grid.dr)) + 2
        i0 = int(round((cfg.ring_radius - r[0]) / grid.dr))
        ilo, ihi = max(0, i0 - di), min(len(r), i0 + di + 1)
        dj = int(math.ceil(radius / (cfg.ring_radius * grid.dtheta))) + 2
        j0 = int(round(ang / grid.dtheta))
        jj = (np.arange(j0 - dj, j0 + dj + 1)) % nth
        out.append((slice(ilo, ihi), jj))
    return out


def regularized_vorticity(cfg: VortexConfiguration, grid: PolarGrid) -> np.ndarray:
    """Vorticity density f = sum (2/t^2) 1_{B(p, t)}, mass 2 pi per core.

    Core coverage is computed with 4x4 subcell sampling and then the mass
    of each core is normalized to exactly 2 pi against the grid quadrature
    (the sampled indicator alone misses mass at O(h/t)).
    """
    t = cfg.t
    min_cell = max(grid.dr, cfg.ring_radius * grid.dtheta)
    if t / min_cell < 3.0:
        raise ResolutionError(
            f"core scale t={t:.4g} covered by < 3 cells (cell {min_cell:.4g})"
        )
    f = np.zeros((len(grid.r), len(grid.theta)))
    area_w = grid.node_area  # (nr,)
    sub = (np.arange(4) + 0.5) / 4.0 - 0.5
    for (isl, jj), ang in zip(_core_windows(cfg, grid, t + 2 * grid.dr),
                              cfg.angles):
        px = cfg.ring_radius * math.cos(ang)
        py = cfg.ring_radius * math.sin(ang)
        rr = grid.r[isl]
        th = grid.theta[jj]
        # subcell offsets in the local (radial, azimuthal) frame
        cover = np.zeros((len(rr), len(th)))
        for a in sub:
            for b in sub:
                rs = rr[:, None] + a * grid.dr
                ts = th[None, :] + b * grid.dtheta
                d2 = (rs * np.cos(ts) - px) ** 2 + (rs * np.sin(ts) - py) ** 2
                cover += d2 <= t * t
        cover /= 16.0
        patch = (2.0 / (t * t)) * cover
        mass = float(np.sum(patch * area_w[isl, None]))
        if mass <= 0.0:
            raise ResolutionError("core fell between grid nodes")
        rows = np.arange(isl.start, isl.stop)
        f[np.ix_(rows, jj)] += patch * (2.0 * math.pi / mass)
    return f


def reflection_check(cfg: VortexConfiguration, grid: PolarGrid,
                     f: np.ndarray) -> float:
    """Max deviation of f under the in-cell reflection map (exact on
    grids whose angular count is a multiple of 2N)."""
    n = cfg.cells.n_cells
    nth = len(grid.theta)
    if nth % (2 * n) != 0:
        raise ConfigurationError("angular nodes must be a multiple of 2N")
    per = nth // n
    # reflect within the first cell: theta -> theta_1 + theta_2 - theta
    block = f[:, :per]
    reflected = np.roll(block[:, ::-1], 1, axis=1)
    return float(np.max(np.abs(block - reflected)))


@dataclass(frozen=True)
class ModifiedDensity:
    """TF density glued to g^2 below R_bar = R_h + eps^(5/6).

    Bounded below on the annulus and with a TF-controlled gradient above
    R_bar; carries the fitted constant of its closeness to g^2.
    """

    r: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    r_bar: float
    deviation_constant: float   # max |g^2-rho|/rho / (eps^(3/4) L^2)

    def __call__(self, rr):
        return np.interp(rr, self.r, self.values)

    def as_weight(self) -> WeightField:
        return WeightField(r=self.r, values=self.values)


def modified_density(state: GiantVortexState, tf: TFProfile) -> ModifiedDensity:
    regime = state.regime
    r = state.grid.r
    r_bar = tf.r_h + regime.epsilon ** (5.0 / 6.0)
    rho = np.where(r >= r_bar, tf.density(r), state.g2)
    rel = np.abs(state.g2 - rho) / rho
    shape = regime.epsilon**0.75 * regime.log_eps**2
    return ModifiedDensity(
        r=r, values=rho, r_bar=r_bar,
        deviation_constant=float(np.max(rel)) / shape,
    )


def _gradient_polar(values: np.ndarray, grid: PolarGrid):
    """(d/dr, (1/r) d/dtheta) of a periodic-in-theta nodal field."""
    dr = np.gradient(values, grid.r, axis=0)
    dth = (np.roll(values, -1, axis=1) - np.roll(values, 1, axis=1)) / (2 * grid.dtheta)
    return dr, dth / grid.r[:, None]


def _discrete_circulations(h: np.ndarray, sigma_face: np.ndarray,
                           grid: PolarGrid) -> np.ndarray:
    """C(face) = -sum_j sigma_face (h_{i+1,j}-h_{i,j})/dr * r_face dtheta.

    Telescopes exactly: C(outer) - C(inner) equals the discrete source
    mass, so pinning C(outer) quantizes every enclosed circulation.
    """
    r_face = 0.5 * (grid.r[1:] + grid.r[:-1])
    flux = sigma_face[:, None] * (h[1:, :] - h[:-1, :]) / grid.dr
    return -np.sum(flux, axis=1) * r_face * grid.dtheta


@dataclass(frozen=True)
class PhaseField:
    """Phase gradient of the trial function with quantized circulations."""

    grid: PolarGrid
    rho: ModifiedDensity
    cfg: VortexConfiguration
    h_bar: np.ndarray = field(repr=False)       # corrected potential
    h_raw: np.ndarray = field(repr=False)       # h_bar_f before correction
    grad_r: np.ndarray = field(repr=False)
    grad_theta: np.ndarray = field(repr=False)
    kappa: float                # fractional part of the raw outer flux
    gamma_coefficient: float                     # coefficient of Gamma removed
    outer_circulation: float
    core_circulations: tuple[float, ...]
    plaquette_curl_max: float                    # away from cores, / 2 pi
    kinetic_weighted: float                      # int (1/rho) |grad h_bar|^2
    kinetic_raw: float                           # int (1/rho) |grad h_raw|^2

    def as_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "gamma_coefficient": self.gamma_coefficient,
            "outer_circulation": self.outer_circulation,
            "core_circulations": list(self.core_circulations),
            "plaquette_curl_max": self.plaquette_curl_max,
            "kinetic_weighted": self.kinetic_weighted,
            "kinetic_raw": self.kinetic_raw,
        }


def _gamma_profile(rho_vals: np.ndarray, grid: PolarGrid):
    """Discrete harmonic radial profile: 0 at R_<, 1 at r = 1.

    Uses the same face conductivities as the Poisson solve so its discrete
    flux is exactly constant across circles.
    """
    sigma_face = 0.5 * (1.0 / rho_vals[1:] + 1.0 / rho_vals[:-1])
    r_face = 0.5 * (grid.r[1:] + grid.r[:-1])
    inc = grid.dr / (sigma_face * r_face)
    gamma = np.concatenate([[0.0], np.cumsum(inc)])
    q = 1.0 / gamma[-1]          # flux scale: sigma r gamma' = q
    gamma /= gamma[-1]
    return gamma, sigma_face, q


def phase_field(cfg: VortexConfiguration, rho: ModifiedDensity,
                grid: PolarGrid, f: np.ndarray | None = None,
                *, circulation_tol: float = 0.01) -> PhaseField:
    """Solve for the trial phase gradient rho^{-1} grad^perp of h.

    h solves -div(rho^{-1} grad h) = f with zero Dirichlet data; the
    harmonic correction lambda * Gamma is chosen so the outer-boundary
    circulation equals 2 pi NM exactly in the discrete flux sense (the
    fractional defect kappa of the uncorrected flux is reported).  The
    orientation gives every core winding +1.
    """
    if f is None:
        f = regularized_vorticity(cfg, grid)
    weight = rho.as_weight()
    sol = solve_poisson2d(weight, f, grid)
    h_raw = sol.values
    rho_vals = rho(grid.r)
    gamma, sigma_face, q = _gamma_profile(rho_vals, grid)

    total_mass = 2.0 * math.pi * cfg.total
    circ_raw = _discrete_circulations(h_raw, sigma_face, grid)
    circ_gamma = -2.0 * math.pi * q   # constant across faces by construction
    lam = (circ_raw[-1] - total_mass) / circ_gamma
    h_bar = h_raw - lam * gamma[:, None]

    # Fractional defect of the raw (uncorrected) outer flux; reported only.
    raw_flux = -circ_raw[-1]
    kappa = raw_flux - 2.0 * math.pi * math.floor(raw_flux / (2.0 * math.pi))

    dr_h, dth_h = _gradient_polar(h_bar, grid)
    inv_rho = 1.0 / rho_vals[:, None]
    grad_r = inv_rho * dth_h
    grad_theta = -inv_rho * dr_h

    circ = _discrete_circulations(h_bar, sigma_face, grid)
    outer = circ[-1]
    if abs(outer - total_mass) > circulation_tol * 2.0 * math.pi:
        raise PhaseError(
            f"outer circulation {outer:.6f} != 2 pi NM = {total_mass:.6f}"
        )

    core_circs = []
    loop_r = 2.5 * cfg.t
    for ang in cfg.angles:
        c = _loop_circulation(grid, grad_r, grad_theta,
                              cfg.ring_radius, ang, loop_r)
        core_circs.append(c)
        if abs(c - 2.0 * math.pi) > circulation_tol * 2.0 * math.pi * 2.5:
            raise PhaseError(
                f"core circulation {c:.4f} at angle {ang:.4f} is not 2 pi"
            )

    curl_max = _plaquette_curl_audit(grid, grad_r, grad_theta, cfg)

    energy_w = _weighted_gradient_energy(h_bar, rho_vals, grid)
    energy_raw = _weighted_gradient_energy(h_raw, rho_vals, grid)
    return PhaseField(
        grid=grid, rho=rho, cfg=cfg, h_bar=h_bar, h_raw=h_raw,
        grad_r=grad_r, grad_theta=grad_theta, kappa=kappa,
        gamma_coefficient=lam, outer_circulation=outer,
        core_circulations=tuple(core_circs), plaquette_curl_max=curl_max,
        kinetic_weighted=energy_w, kinetic_raw=energy_raw,
    )


def _weighted_gradient_energy(h: np.ndarray, rho_vals: np.ndarray,
                              grid: PolarGrid) -> float:
    dr_h, dth_h = _gradient_polar(h, grid)
    dens = (dr_h**2 + dth_h**2) / rho_vals[:, None]
    return float(np.sum(dens * grid.node_area[:, None]))


def _loop_circulation(grid: PolarGrid, grad_r: np.ndarray,
                      grad_theta: np.ndarray, r0: float, ang0: float,
                      radius: float, n_pts: int = 128) -> float:
    """Line integral of the phase gradient around a small circle, with
    bilinear interpolation of the gradient components."""
    s = np.linspace(0.0, 2.0 * math.pi, n_pts, endpoint=False)
    cx, cy = r0 * math.cos(ang0), r0 * math.sin(ang0)
    x = cx + radius * np.cos(s)
    y = cy + radius * np.sin(s)
    rr = np.hypot(x, y)
    tt = np.mod(np.arctan2(y, x), 2.0 * math.pi)
    gr = _bilinear(grid, grad_r, rr, tt)
    gt = _bilinear(grid, grad_theta, rr, tt)
    # tangent of the loop in polar components
    tx, ty = -np.sin(s), np.cos(s)
    er_x, er_y = x / rr, y / rr
    et_x, et_y = -y / rr, x / rr
    integrand = gr * (tx * er_x + ty * er_y) + gt * (tx * et_x + ty * et_y)
    return float(np.sum(integrand) * (2.0 * math.pi * radius / n_pts))


def _bilinear(grid: PolarGrid, field_vals: np.ndarray, rr, tt):
    fi = (rr - grid.r[0]) / grid.dr
    fj = tt / grid.dtheta
    i0 = np.clip(np.floor(fi).astype(int), 0, len(grid.r) - 2)
    j0 = np.floor(fj).astype(int) % len(grid.theta)
    j1 = (j0 + 1) % len(grid.theta)
    a = fi - i0
    b = fj - np.floor(fj)
    return ((1 - a) * (1 - b) * field_vals[i0, j0]
            + a * (1 - b) * field_vals[i0 + 1, j0]
            + (1 - a) * b * field_vals[i0, j1]
            + a * b * field_vals[i0 + 1, j1])


def _plaquette_curl_audit(grid: PolarGrid, grad_r: np.ndarray,
                          grad_theta: np.ndarray,
                          cfg: VortexConfiguration) -> float:
    """Max plaquette circulation away from the cores, in units of 2 pi."""
    r, dr, dth = grid.r, grid.dr, grid.dtheta
    # trapezoid circulation along the four edges of each plaquette
    gt_r0 = 0.5 * (grad_theta[:-1, :] + np.roll(grad_theta, -1, axis=1)[:-1, :])
    gt_r1 = 0.5 * (grad_theta[1:, :] + np.roll(grad_theta, -1, axis=1)[1:, :])
    gr_t0 = 0.5 * (grad_r[:-1, :] + grad_r[1:, :])
    gr_t1 = 0.5 * (np.roll(grad_r, -1, axis=1)[:-1, :]
                   + np.roll(grad_r, -1, axis=1)[1:, :])
    circ = (gt_r1 * r[1:, None] - gt_r0 * r[:-1, None]) * dth \
        + (gr_t0 - gr_t1) * dr
    # mask plaquettes near cores
    rc = 0.5 * (r[:-1] + r[1:])
    tc = grid.theta + 0.5 * dth
    xc = rc[:, None] * np.cos(tc[None, :])
    yc = rc[:, None] * np.sin(tc[None, :])
    mask = np.ones_like(circ, dtype=bool)
    for ang in cfg.angles:
        px = cfg.ring_radius * math.cos(ang)
        py = cfg.ring_radius * math.sin(ang)
        mask &= (xc - px) ** 2 + (yc - py) ** 2 > (3.0 * cfg.t) ** 2
    return float(np.max(np.abs(circ[mask])) / (2.0 * math.pi))


def _integrate_phase(phase: PhaseField) -> np.ndarray:
    """Branch of phi on the grid by a two-sided comb-tree integration.

    Columns integrated from one boundary would cross the vortex ring and
    pick up fractional-circulation walls below every core; instead the
    inner comb (closure exactly 0 after the Gamma correction) covers rows
    below the ring and the outer comb (closure exactly 2 pi NM) covers rows
    above it.  Their mod-2pi mismatch is confined to the core interiors,
    where the cutoff makes the field vanish; the seam column theta = 0 lies
    between cores and matches exactly by the reflection symmetry of the
    configuration.
    """
    grid = phase.grid
    r, dth = grid.r, grid.dtheta
    gt, gr = phase.grad_theta, phase.grad_r
    nth = gt.shape[1]
    idx = np.arange(nth)

    def row_phase(i: int, closure: float) -> np.ndarray:
        inc = 0.5 * (gt[i, :] + np.roll(gt[i, :], -1)) * r[i] * dth
        ph = np.concatenate([[0.0], np.cumsum(inc)])
        defect = ph[-1] - closure
        return ph[:-1] - defect * idx / nth

    phi_inner = row_phase(0, 0.0)
    phi_outer = row_phase(-1, 2.0 * math.pi * phase.cfg.total)

    seg = 0.5 * (gr[1:, :] + gr[:-1, :]) * grid.dr
    cum = np.concatenate([np.zeros((1, nth)), np.cumsum(seg, axis=0)])
    phi_up = phi_inner[None, :] + cum
    phi_down = phi_outer[None, :] + cum - cum[-1, :][None, :]
    i_match = int(np.argmin(np.abs(r - phase.cfg.ring_radius)))
    below = (np.arange(len(r)) <= i_match)[:, None]
    return np.where(below, phi_up, phi_down)


def boundary_layer_cutoff(regime: Regime, grid: PolarGrid) -> np.ndarray:
    """xi_BL: linear ramp 0 -> 1 on [R_<, R_< + eps^2], 1 beyond."""
    r_tilde = grid.r[0] + regime.epsilon**2
    ramp = (grid.r - grid.r[0]) / (r_tilde - grid.r[0])
    return np.minimum(ramp, 1.0)


def core_cutoff(cfg: VortexConfiguration, grid: PolarGrid) -> np.ndarray:
    """prod_{i,j} xi_{i,j}: linear in distance, 0 inside t, 1 outside 2t."""
    xi = np.ones((len(grid.r), len(grid.theta)))
    t = cfg.t
    for (isl, jj), ang in zip(_core_windows(cfg, grid, 2.2 * t), cfg.angles):
        px = cfg.ring_radius * math.cos(ang)
        py = cfg.ring_radius * math.sin(ang)
        rr = grid.r[isl, None]
        th = grid.theta[jj][None, :]
        d = np.hypot(rr * np.cos(th) - px, rr * np.sin(th) - py)
        local = np.clip((d - t) / t, 0.0, 1.0)
        patch = xi[isl][:, jj]
        xi[np.ix_(range(isl.start, isl.stop), jj)] = patch * local
    return xi


@dataclass(frozen=True)
class TrialFunction:
    """Assembled vortex-ring trial wave function on the annulus grid."""

    state: GiantVortexState
    cfg: VortexConfiguration
    rho: ModifiedDensity
    phase: PhaseField
    grid: PolarGrid
    psi: np.ndarray = field(repr=False)          # complex (nr, ntheta)
    v: np.ndarray = field(repr=False)            # reduced field c xi e^{i phi}
    xi: np.ndarray = field(repr=False)
    c_squared: float
    winding_offset: int                          # n = [Omega] - omega
    mass: float
    core_windings: tuple[int, ...]

    def as_dict(self) -> dict:
        return {
            "c_squared": self.c_squared,
            "winding_offset": self.winding_offset,
            "mass": self.mass,
            "core_windings": list(self.core_windings),
            "configuration": self.cfg.as_dict(),
        }


def _plaquette_winding_field(psi_angle: np.ndarray) -> np.ndarray:
    """Integer winding of each plaquette from wrapped phase differences."""

    def wrap(d):
        return (d + math.pi) % (2.0 * math.pi) - math.pi

    a = psi_angle
    d1 = wrap(np.roll(a, -1, axis=1) - a)[:-1, :]             # bottom edge
    d2 = wrap(a[1:, :] - a[:-1, :])                           # down left... up right edge
    d2r = wrap(np.roll(a, -1, axis=1)[1:, :] - np.roll(a, -1, axis=1)[:-1, :])
    d3 = wrap(a[1:, :] - np.roll(a, -1, axis=1)[1:, :])       # top edge (reverse)
    total = d1 + d2r + d3 - d2
    return np.rint(total / (2.0 * math.pi)).astype(int)


def winding_around_core(psi: np.ndarray, grid: PolarGrid,
                        center_r: float, center_ang: float,
                        radius: float, n_pts: int = 512) -> int:
    """Loop winding of a complex field around the circle of given radius."""
    s = np.linspace(0.0, 2.0 * math.pi, n_pts, endpoint=False)
    cx, cy = center_r * math.cos(center_ang), center_r * math.sin(center_ang)
    x = cx + radius * np.cos(s)
    y = cy + radius * np.sin(s)
    rr = np.hypot(x, y)
    tt = np.mod(np.arctan2(y, x), 2.0 * math.pi)
    z = (_bilinear(grid, psi.real, rr, tt)
         + 1j * _bilinear(grid, psi.imag, rr, tt))
    ang = np.angle(z)
    d = np.diff(np.concatenate([ang, ang[:1]]))
    d = (d + math.pi) % (2.0 * math.pi) - math.pi
    return int(round(float(np.sum(d)) / (2.0 * math.pi)))


def assemble_trial(state: GiantVortexState, cfg: VortexConfiguration,
                   rho: ModifiedDensity, phase: PhaseField,
                   grid: PolarGrid) -> TrialFunction:
    """Assemble Psi = c xi g e^{i(phi + n theta)} on the annulus grid.

    The normalization c is fixed against the grid quadrature so the
    discrete mass is exactly 1; |c^2 - 1| = O(NM eps^2) is checked by the
    caller's tests.  Per-core windings of the reduced phase are audited.
    """
    regime = state.regime
    phi = _integrate_phase(phase)
    xi = boundary_layer_cutoff(regime, grid)[:, None] * core_cutoff(cfg, grid)
    g_nodes = state.g_at(grid.r)[:, None]
    base = xi * g_nodes
    mass_xi = grid.integrate(base * base)
    c2 = 1.0 / mass_xi
    v = math.sqrt(c2) * xi * np.exp(1j * phi)
    n_w = state.winding
    psi = v * g_nodes * np.exp(1j * n_w * grid.theta[None, :])
    mass = grid.integrate(np.abs(psi) ** 2)

    # Winding audit on the bare phase (v itself vanishes inside the cores,
    # where angle(0) would corrupt the plaquette count).
    phase_only = np.exp(1j * phi)
    windings = []
    for ang in cfg.angles:
        windings.append(winding_around_core(
            phase_only, grid, cfg.ring_radius, ang, 2.0 * cfg.t))
    return TrialFunction(
        state=state, cfg=cfg, rho=rho, phase=phase, grid=grid,
        psi=psi, v=v, xi=xi, c_squared=c2, winding_offset=n_w,
        mass=mass, core_windings=tuple(windings),
    )


def evaluate_gp_energy(psi: np.ndarray, regime: Regime, grid: PolarGrid,
                       *, refine_check: bool = False):
    """Rotating-frame energy of a 2D complex field on the annulus grid.

    Quadrature of |(grad - i Omega x^perp) psi|^2 - Omega^2 r^2 |psi|^2
    + eps^-2 |psi|^4; radial derivative by centered differences, angular
    derivative spectral (the giant-vortex winding e^{i n theta} would lose
    (n dtheta)^2/6 of its derivative under centered differences).  The
    field is extended by zero inside the hole.  With ``refine_check`` the
    value on the radially coarsened grid is returned as an error bar.
    """
    omega = regime.omega
    r = grid.r[:, None]
    nth = len(grid.theta)
    dpsi_r = np.gradient(psi, grid.r, axis=0)
    modes = np.fft.fftfreq(nth, d=1.0 / nth)
    dpsi_t = np.fft.ifft(1j * modes[None, :] * np.fft.fft(psi, axis=1), axis=1)
    cov_t = dpsi_t / r - 1j * omega * r * psi
    dens = (np.abs(dpsi_r) ** 2 + np.abs(cov_t) ** 2
            - omega**2 * r**2 * np.abs(psi) ** 2
            + np.abs(psi) ** 4 / regime.epsilon**2)
    value = grid.integrate(dens)
    if not refine_check:
        return value
    if len(grid.r) % 2 == 1:
        coarse = PolarGrid(grid.r_inner, (len(grid.r) + 1) // 2, nth)
        value_c = evaluate_gp_energy(psi[::2, :], regime, coarse)
        return value, abs(value - value_c)
    return value, math.nan


def reduced_energy_field(v: np.ndarray, state: GiantVortexState,
                         grid: PolarGrid) -> float:
    """E[v] = int g^2 |grad v|^2 - 2 g^2 B . (iv, grad v) + g^4/eps^2 (1-|v|^2)^2."""
    regime = state.regime
    g2 = (state.g_at(grid.r) ** 2)[:, None]
    r = grid.r[:, None]
    b_theta = regime.omega * r - state.winding / r
    dv_r = np.gradient(v, grid.r, axis=0)
    dv_t = (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2 * grid.dtheta) / r
    grad_sq = np.abs(dv_r) ** 2 + np.abs(dv_t) ** 2
    current_t = np.imag(np.conj(v) * dv_t)
    dens = (g2 * grad_sq - 2.0 * g2 * b_theta * current_t
            + g2 * g2 / regime.epsilon**2 * (1.0 - np.abs(v) ** 2) ** 2)
    return grid.integrate(dens)


@dataclass(frozen=True)
class TrialEnergyReport:
    """Trial energy split against the theoretical predictions."""

    total: float
    giant_vortex_energy: float
    reduced_energy: float
    decoupling_residual: float
    kinetic_term: float            # int rho xi^2 |grad phi|^2
    kinetic_prediction: float      # 4 pi^2 N^2 I_* + pi N g^2(R_*) L
    kinetic_ratio: float
    rotation_term: float           # -2 int g^2 B . (iv, grad v)
    rotation_prediction: float     # 2 pi N F(R_*)
    rotation_ratio: float
    upper_bound: float
    upper_bound_simplified: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "total", "giant_vortex_energy", "reduced_energy",
            "decoupling_residual", "kinetic_term", "kinetic_prediction",
            "kinetic_ratio", "rotation_term", "rotation_prediction",
            "rotation_ratio", "upper_bound", "upper_bound_simplified")}


def upper_bound_prediction(e_hat: float, n_vortices: float, h_rstar: float,
                           i_star: float) -> tuple[float, float]:
    """(E_hat + 4 pi^2 N^2 I_* + 2 pi N H(R_*), E_hat - H^2/(4 I_*))."""
    full = e_hat + 4.0 * math.pi**2 * n_vortices**2 * i_star \
        + 2.0 * math.pi * n_vortices * h_rstar
    simplified = e_hat - h_rstar * h_rstar / (4.0 * i_star)
    return full, simplified


def trial_energy_report(trial: TrialFunction, cost: CostProfile,
                        i_star: float, *, f_at_rstar: float,
                        g2_at_rstar: float) -> TrialEnergyReport:
    """Evaluate the trial energy and compare with the predicted pieces."""
    state = trial.state
    regime = state.regime
    grid = trial.grid
    total = evaluate_gp_energy(trial.psi, regime, grid)
    reduced = reduced_energy_field(trial.v, state, grid)
    decouple = total - state.energy - reduced

    rho_vals = trial.rho(grid.r)[:, None]
    grad_phi_sq = trial.phase.grad_r**2 + trial.phase.grad_theta**2
    kinetic = grid.integrate(rho_vals * trial.xi**2 * grad_phi_sq)
    n_tot = trial.cfg.total
    kin_pred = (4.0 * math.pi**2 * n_tot**2 * i_star
                + math.pi * n_tot * g2_at_rstar * regime.log_eps)

    g2 = (state.g_at(grid.r) ** 2)[:, None]
    r = grid.r[:, None]
    b_theta = regime.omega * r - state.winding / r
    dv_t = ((np.roll(trial.v, -1, axis=1) - np.roll(trial.v, 1, axis=1))
            / (2 * grid.dtheta) / r)
    rotation = grid.integrate(-2.0 * g2 * b_theta
                              * np.imag(np.conj(trial.v) * dv_t))
    rot_pred = 2.0 * math.pi * n_tot * f_at_rstar

    ub_full, ub_simpl = upper_bound_prediction(
        state.energy, n_tot, cost.h_at_rstar, i_star)
    return TrialEnergyReport(
        total=total, giant_vortex_energy=state.energy,
        reduced_energy=reduced, decoupling_residual=decouple,
        kinetic_term=kinetic, kinetic_prediction=kin_pred,
        kinetic_ratio=kinetic / kin_pred if kin_pred else math.nan,
        rotation_term=rotation, rotation_prediction=rot_pred,
        rotation_ratio=rotation / rot_pred if rot_pred else math.nan,
        upper_bound=ub_full, upper_bound_simplified=ub_simpl,
    )
