"""Weighted electrostatic problems on the annulus.

A vorticity measure nu induces the potential h_nu solving

    -div( (1/w) grad h_nu ) = nu,   h_nu = 0 on both annulus boundaries,

with weight w = g^2 (or the modified density).  Its energy
I(nu) = int (1/w) |grad h_nu|^2 is the long-range interaction cost of the
vortex distribution; over unit measures on the circle of radius R_* it is
minimized by the uniform measure, with the explicit radial potential and
value I_* given by one-dimensional integrals of w(s)/s.

The 2D solver discretizes the flux form on a polar grid (5-point stencil,
harmonic mean of w across faces, so the face conductivity is the
arithmetic mean of 1/w) and solves with Jacobi-preconditioned conjugate
gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, SolverError
from .grids import PolarGrid, SectorGrid
from .params import Regime


@dataclass(frozen=True)
class WeightField:
    """Radial conductivity-like weight w(r) > 0 on [r_inner, 1]."""

    r: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if np.any(self.values <= 0.0):
            raise DomainError("weight must be positive on the annulus interior")

    @property
    def r_inner(self) -> float:
        return float(self.r[0])

    def __call__(self, r):
        return np.interp(r, self.r, self.values)

    @classmethod
    def from_state(cls, state) -> "WeightField":
        """Weight g^2 of a converged giant-vortex state."""
        return cls(r=state.grid.r, values=state.g2)

    @classmethod
    def constant(cls, value: float, r_inner: float, n: int = 1024) -> "WeightField":
        r = np.linspace(r_inner, 1.0, n)
        return cls(r=r, values=np.full(n, float(value)))


@dataclass(frozen=True)
class RadialMeasure:
    """Ring measure of mass ``mass`` at ``radius`` (mollified when gridded)."""

    radius: float
    mass: float = 1.0

    def __post_init__(self):
        if self.mass < 0.0:
            raise DomainError("measure mass must be nonnegative")

    def source(self, grid: "PolarGrid", angular_density=None) -> np.ndarray:
        """Gridded density with exact total mass (radial hat, 2 cells)."""
        return mollified_ring_source(grid, self.radius,
                                     angular_density=angular_density,
                                     mass=self.mass)


@dataclass(frozen=True)
class PotentialField:
    """Solution of the weighted Poisson problem; radial or 2D samples."""

    weight: WeightField
    r: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)      # (nr,) radial or (nr, ntheta)
    grid: PolarGrid | SectorGrid | None = None
    ring_radius: float | None = None
    value_at_ring: float | None = None

    @property
    def is_radial(self) -> bool:
        return self.values.ndim == 1


def _cumulative_w_over_s(w: WeightField, r: np.ndarray) -> np.ndarray:
    vals = w(r) / r
    out = np.zeros_like(r)
    out[1:] = np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(r))
    return out


def radial_ring_potential(w: WeightField, ring_r: float, inner: float,
                          n: int = 4096) -> PotentialField:
    """Explicit radial potential of the unit ring measure at ``ring_r``.

    h rises like int_inner^r w/s inside the ring and falls like
    int_r^1 w/s outside, matched at the ring with
    h(R) = (int_in)(int_out) / (2 pi int_total).
    """
    if not inner < ring_r < 1.0:
        raise DomainError(f"ring radius {ring_r} outside ({inner}, 1)")
    r = np.unique(np.concatenate([np.linspace(inner, 1.0, n), [ring_r]]))
    cum = _cumulative_w_over_s(w, r)
    total = cum[-1]
    at_ring = float(np.interp(ring_r, r, cum))
    h_ring = at_ring * (total - at_ring) / (2.0 * math.pi * total)
    inside = r <= ring_r
    h = np.where(inside,
                 h_ring * cum / at_ring,
                 h_ring * (total - cum) / (total - at_ring))
    return PotentialField(weight=w, r=r, values=h, ring_radius=ring_r,
                          value_at_ring=h_ring)


def ring_energy(w: WeightField, ring_r: float, inner: float) -> float:
    """I for the unit ring measure: equals h(ring_r) (Lagrange identity)."""
    return float(radial_ring_potential(w, ring_r, inner).value_at_ring)


def radial_field_energy(h: PotentialField) -> float:
    """int (1/w) |h'|^2 over the annulus for a radial potential."""
    r, vals = h.r, h.values
    mid = 0.5 * (r[1:] + r[:-1])
    grad = np.diff(vals) / np.diff(r)
    sigma = 1.0 / h.weight(mid)
    return float(2.0 * math.pi * np.sum(sigma * grad * grad * mid * np.diff(r)))


def _face_sigma(w_nodes: np.ndarray) -> np.ndarray:
    """Face conductivity from the harmonic mean of w across the face."""
    w_face = 2.0 * w_nodes[1:] * w_nodes[:-1] / (w_nodes[1:] + w_nodes[:-1])
    return 1.0 / w_face


def _assemble_polar(w: WeightField, grid: PolarGrid | SectorGrid,
                    periodic: bool):
    """SPD matrix of the flux-form discretization, interior unknowns only.

    Equations are scaled by the cell volume r dr dtheta, so the matrix is
    symmetric; Dirichlet rows (r = inner, r = 1) are eliminated.  For
    sector grids the angular boundaries get natural (Neumann) treatment.
    """
    r, dr, dth = grid.r, grid.dr, grid.dtheta
    nr, nth = len(r), len(grid.theta)
    w_nodes = w(r)
    sig_r = _face_sigma(w_nodes)            # (nr-1,) radial faces
    sig_th = 1.0 / w_nodes                  # angular conductivity at nodes
    r_face = 0.5 * (r[1:] + r[:-1])

    ni = nr - 2
    c_out = r_face[1:] * sig_r[1:] * dth / dr      # (ni,) coupling to i+1
    c_in = r_face[:-1] * sig_r[:-1] * dth / dr     # (ni,) coupling to i-1
    c_th = sig_th[1:-1] * dr / (r[1:-1] * dth)     # (ni,) angular coupling

    base = np.arange(ni)[:, None] * nth
    j = np.arange(nth)[None, :]
    k = (base + j).ravel()

    diag = np.repeat(c_out + c_in, nth)
    rows, cols, vals = [k], [k], []

    # radial neighbors; couplings into the Dirichlet rows are dropped
    k_up = (base[:-1] + j).ravel()
    rows.append(k_up); cols.append(k_up + nth)
    vals.append(np.repeat(-c_out[:-1], nth))
    k_dn = (base[1:] + j).ravel()
    rows.append(k_dn); cols.append(k_dn - nth)
    vals.append(np.repeat(-c_in[1:], nth))

    if periodic:
        jp = (j + 1) % nth
        jm = (j - 1) % nth
        rows.append(k); cols.append((base + jp).ravel())
        vals.append(np.repeat(-c_th, nth))
        rows.append(k); cols.append((base + jm).ravel())
        vals.append(np.repeat(-c_th, nth))
        diag += np.repeat(2.0 * c_th, nth)
    else:
        left = (base + j[:, :-1]).ravel()
        right = (base + j[:, 1:]).ravel()
        rows.append(left); cols.append(right)
        vals.append(np.repeat(-c_th, nth - 1))
        rows.append(right); cols.append(left)
        vals.append(np.repeat(-c_th, nth - 1))
        bump = np.zeros((ni, nth))
        bump[:, :-1] += c_th[:, None]
        bump[:, 1:] += c_th[:, None]
        diag += bump.ravel()

    n_unknown = ni * nth
    mat = sp.coo_matrix(
        (np.concatenate([diag] + vals),
         (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_unknown, n_unknown),
    ).tocsr()
    volume = r[1:-1, None] * dr * dth * np.ones((1, nth))
    return mat, volume


def solve_poisson2d(w: WeightField, source: np.ndarray,
                    grid: PolarGrid | SectorGrid, *,
                    rtol: float = 1e-10, maxiter: int = 40000) -> PotentialField:
    """Solve -div((1/w) grad h) = source with zero Dirichlet arc data.

    ``source`` is a density per unit area sampled on the grid nodes
    (nr, ntheta).  Periodic polar grids get periodic angular coupling;
    sector grids get Neumann radial cuts.
    """
    periodic = isinstance(grid, PolarGrid)
    nr, nth = len(grid.r), len(grid.theta)
    if source.shape != (nr, nth):
        raise DomainError(f"source shape {source.shape} != {(nr, nth)}")
    if nr < 3:
        raise DomainError("grid too coarse for interior unknowns")
    mat, volume = _assemble_polar(w, grid, periodic)
    rhs = (source[1:-1, :] * volume).ravel()
    if not np.any(rhs):
        h = np.zeros((nr, nth))
        return PotentialField(weight=w, r=grid.r, values=h, grid=grid)
    precond = sp.diags(1.0 / mat.diagonal())
    sol, info = spla.cg(mat, rhs, rtol=rtol, atol=0.0, maxiter=maxiter,
                        M=precond)
    if info != 0:
        res = float(np.linalg.norm(mat @ sol - rhs) / np.linalg.norm(rhs))
        raise SolverError(
            f"CG failed (info={info}) at relative residual {res:.3e}",
            history=[res],
        )
    h = np.zeros((nr, nth))
    h[1:-1, :] = sol.reshape(nr - 2, nth)
    return PotentialField(weight=w, r=grid.r, values=h, grid=grid)


def electro_energy(h: PotentialField, w: WeightField | None = None) -> float:
    """int (1/w) |grad h|^2 by midpoint quadrature (independent of the
    matrix quadratic form, so Green-identity checks are real tests)."""
    if w is None:
        w = h.weight
    if h.is_radial:
        return radial_field_energy(h)
    grid = h.grid
    r, dr, dth = grid.r, grid.dr, grid.dtheta
    vals = h.values
    periodic = isinstance(grid, PolarGrid)
    # radial faces
    r_face = 0.5 * (r[1:] + r[:-1])
    dh_r = (vals[1:, :] - vals[:-1, :]) / dr
    sig_face = _face_sigma(w(r))[:, None]
    e_r = np.sum(sig_face * dh_r**2 * r_face[:, None] * dr * dth)
    # angular faces
    if periodic:
        dh_t = (np.roll(vals, -1, axis=1) - vals) / dth
    else:
        dh_t = (vals[:, 1:] - vals[:, :-1]) / dth
    sig_nodes = (1.0 / w(r))[:, None]
    e_t = np.sum(sig_nodes * dh_t**2 / r[:, None] * dr * dth)
    return float(e_r + e_t)


def mollified_ring_source(grid: PolarGrid, ring_r: float,
                          angular_density=None, mass: float = 1.0,
                          width_cells: int = 2) -> np.ndarray:
    """Radial hat of width ``width_cells`` cells at ``ring_r`` with exact
    total mass; optional angular density (callable of theta, mean 1)."""
    r, dr = grid.r, grid.dr
    half = width_cells * dr / 2.0
    hat = np.maximum(0.0, 1.0 - np.abs(r - ring_r) / half)
    radial_mass = float(np.sum(hat * r) * dr)   # int hat(r) r dr
    if radial_mass <= 0.0:
        raise DomainError("ring does not intersect the grid")
    hat /= radial_mass
    if angular_density is None:
        ang = np.ones(len(grid.theta))
    else:
        ang = np.asarray(angular_density(grid.theta), dtype=float)
        if np.any(ang < 0.0):
            raise DomainError("angular density must be nonnegative")
    ang_sum = np.sum(ang) * grid.dtheta
    source = mass * hat[:, None] * ang[None, :] / ang_sum
    return source


def source_mass(grid: PolarGrid, source: np.ndarray) -> float:
    """Total mass of a gridded source (same quadrature the hat was built on)."""
    return float(np.sum(source * grid.r[:, None]) * grid.dr * grid.dtheta)


@dataclass(frozen=True)
class RingMinimality:
    """Randomized minimality audit of the uniform ring measure."""

    i_uniform: float
    i_trials: tuple[float, ...]
    worst_ratio: float       # min I(nu)/I(delta_*) over trials
    concentrated_ratio: float

    def as_dict(self) -> dict:
        return {
            "i_uniform": self.i_uniform,
            "i_trials": list(self.i_trials),
            "worst_ratio": self.worst_ratio,
            "concentrated_ratio": self.concentrated_ratio,
        }


def ring_minimality_check(w: WeightField, r_star: float, grid: PolarGrid,
                          trials: int = 20, seed: int = 0,
                          modes: int = 6) -> RingMinimality:
    """Compare I(delta_*) against random nonuniform ring measures.

    Trial densities are positive random Fourier perturbations of the
    uniform density; a half-circle-supported density probes strong
    concentration.
    """
    rng = np.random.default_rng(seed)
    uniform = solve_poisson2d(w, mollified_ring_source(grid, r_star), grid)
    i_uniform = electro_energy(uniform)

    def trial_density(coeffs):
        def density(theta):
            out = np.ones_like(theta)
            for k, (a, b) in enumerate(coeffs, start=1):
                out = out + a * np.cos(k * theta) + b * np.sin(k * theta)
            return np.maximum(out, 0.05)
        return density

    energies = []
    for _ in range(trials):
        coeffs = rng.uniform(-0.5, 0.5, size=(modes, 2))
        src = mollified_ring_source(grid, r_star,
                                    angular_density=trial_density(coeffs))
        energies.append(electro_energy(solve_poisson2d(w, src, grid)))

    half = lambda th: np.where(np.cos(th) > 0.0, 1.0, 0.0)
    src_half = mollified_ring_source(grid, r_star, angular_density=half)
    i_half = electro_energy(solve_poisson2d(w, src_half, grid))

    return RingMinimality(
        i_uniform=i_uniform,
        i_trials=tuple(energies),
        worst_ratio=float(min(energies) / i_uniform),
        concentrated_ratio=float(i_half / i_uniform),
    )


@dataclass(frozen=True)
class RenormalizedEnergy:
    """Quadratic vortex energy mass^2 I + mass H(R_*) and its minimizer."""

    value: float
    mass: float
    mass_opt: float
    min_value: float

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "mass": self.mass,
            "mass_opt": self.mass_opt,
            "min_value": self.min_value,
        }


def renormalized_energy(mass: float, h_rstar: float, i_star: float) -> RenormalizedEnergy:
    """Renormalized vortex energy for a ring measure of the given mass."""
    if i_star <= 0.0:
        raise DomainError(f"electrostatic energy must be positive, got {i_star}")
    return RenormalizedEnergy(
        value=mass * mass * i_star + mass * h_rstar,
        mass=mass,
        mass_opt=-h_rstar / (2.0 * i_star),
        min_value=-h_rstar * h_rstar / (4.0 * i_star),
    )


@dataclass(frozen=True)
class VortexNumber:
    """Optimal vortex count and its cell factorization."""

    n_exact: float
    favorable: bool
    n_cells: int
    m_per_cell: int

    @property
    def total(self) -> int:
        return self.n_cells * self.m_per_cell if self.favorable else 0

    def as_dict(self) -> dict:
        return {
            "n_exact": self.n_exact,
            "favorable": self.favorable,
            "n_cells": self.n_cells,
            "m_per_cell": self.m_per_cell,
            "total": self.total,
        }


def optimal_vortex_number(regime: Regime, h_rstar: float, i_star: float,
                          annulus_width: float | None = None) -> VortexNumber:
    """N = -H(R_*) / (4 pi I_*), with an (N_cells x M) integer factorization.

    ``favorable`` is False when H(R_*) >= 0 (supercritical: no vortices
    lower the energy).  The cell count scales like 1/(eps |log eps|), one
    cell per annulus-width of arc.
    """
    if i_star <= 0.0:
        raise DomainError(f"electrostatic energy must be positive, got {i_star}")
    if not h_rstar < 0.0:
        return VortexNumber(n_exact=0.0, favorable=False, n_cells=0, m_per_cell=0)
    n_exact = -h_rstar / (4.0 * math.pi * i_star)
    width = annulus_width if annulus_width is not None \
        else regime.epsilon * regime.log_eps
    total = max(1, round(n_exact))
    n_geom = max(1, round(2.0 * math.pi / width))
    # Asymptotically N_geom << total and every cell holds M vortices; at
    # desk scale the vortex count can undercut the geometric cell count, in
    # which case cells widen so each holds exactly one vortex.
    n_cells = min(n_geom, total)
    m = max(1, round(total / n_cells))
    return VortexNumber(n_exact=n_exact, favorable=True,
                        n_cells=n_cells, m_per_cell=m)


def green_function_cell(w: WeightField, grid: SectorGrid,
                        y: tuple[float, float]) -> PotentialField:
    """Green function of one angular cell with mixed boundary conditions.

    Dirichlet on the circular arcs (the part of the cell boundary on the
    annulus boundary), Neumann on the radial cuts; the source is a unit
    point mass at ``y = (r_y, theta_y)`` deposited on its nearest node.
    """
    r_y, th_y = y
    if not grid.r[0] < r_y < grid.r[-1]:
        raise DomainError("source radius outside the cell")
    if not grid.theta[0] <= th_y <= grid.theta[-1]:
        raise DomainError("source angle outside the cell")
    i = int(np.argmin(np.abs(grid.r - r_y)))
    j = int(np.argmin(np.abs(grid.theta - th_y)))
    if i < 2 or i > len(grid.r) - 3:
        raise DomainError("source within 2 cells of the Dirichlet boundary: "
                          "the discrete delta is not resolvable there")
    source = np.zeros((len(grid.r), len(grid.theta)))
    # node volume: radial cuts carry half cells in theta
    vol_th = grid.dtheta if 0 < j < len(grid.theta) - 1 else 0.5 * grid.dtheta
    source[i, j] = 1.0 / (grid.r[i] * grid.dr * vol_th)
    return solve_poisson2d(w, source, grid)
