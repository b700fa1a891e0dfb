"""Radial and polar grids.

Every 2D object in the package lives on a tensor-product polar grid.  The
annulus grids share their radial nodes with the 1D solver grid so that the
giant-vortex profile never needs interpolation, and the disc grid embeds
the annulus grid as its outer block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .params import Regime


@dataclass(frozen=True)
class RadialGrid:
    """Uniform 1D grid on [r_inner, 1] with 2D area quadrature weights.

    Weights are trapezoid weights times 2*pi*r, so their sum equals the
    annulus area pi*(1 - r_inner^2) exactly (the trapezoid rule is exact
    for linear integrands).
    """

    r_inner: float
    n: int
    r: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    h: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.r_inner < 1.0:
            raise DomainError(f"r_inner must lie in (0, 1), got {self.r_inner}")
        if self.n < 256:
            raise DomainError(f"radial grid needs >= 256 nodes, got {self.n}")
        r = np.linspace(self.r_inner, 1.0, self.n)
        h = r[1] - r[0]
        tw = np.full(self.n, h)
        tw[0] = tw[-1] = 0.5 * h
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "weights", 2.0 * math.pi * r * tw)
        object.__setattr__(self, "h", float(h))

    @property
    def area(self) -> float:
        return math.pi * (1.0 - self.r_inner**2)

    def integrate(self, values: np.ndarray) -> float:
        """Area integral of a radial sampled function over the annulus."""
        return float(np.dot(self.weights, values))


@dataclass(frozen=True)
class PolarGrid:
    """Annulus [r_inner, 1] x [0, 2pi), periodic in theta.

    Nodes are (r_i, theta_j) with uniform spacing in both directions; the
    boundary rows i = 0 and i = nr-1 carry Dirichlet data in elliptic
    solves.  ``node_area`` are tensor trapezoid(r) x uniform(theta) weights
    for area quadrature.
    """

    r_inner: float
    nr: int
    ntheta: int
    r: np.ndarray = field(init=False, repr=False)
    theta: np.ndarray = field(init=False, repr=False)
    dr: float = field(init=False)
    dtheta: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.r_inner < 1.0:
            raise DomainError(f"r_inner must lie in (0, 1), got {self.r_inner}")
        if self.nr < 16 or self.ntheta < 16:
            raise DomainError("polar grid too coarse")
        r = np.linspace(self.r_inner, 1.0, self.nr)
        theta = np.arange(self.ntheta) * (2.0 * math.pi / self.ntheta)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "dr", float(r[1] - r[0]))
        object.__setattr__(self, "dtheta", float(2.0 * math.pi / self.ntheta))

    @property
    def node_area(self) -> np.ndarray:
        """(nr,) radial area weight per node row: r * dr_trap * dtheta."""
        w = np.full(self.nr, self.dr)
        w[0] = w[-1] = 0.5 * self.dr
        return self.r * w * self.dtheta

    def integrate(self, values: np.ndarray) -> float:
        """Area integral of a (nr, ntheta) field over the annulus."""
        return float(np.sum(self.node_area[:, None] * values))

    def mesh(self):
        """Return broadcastable (r, theta) column/row arrays."""
        return self.r[:, None], self.theta[None, :]


@dataclass(frozen=True)
class SectorGrid:
    """Angular sector [r_inner, 1] x [theta0, theta1] of the annulus.

    Used for the per-cell Green functions: Dirichlet on the circular arcs,
    Neumann on the radial cuts.
    """

    r_inner: float
    theta0: float
    theta1: float
    nr: int
    ntheta: int
    r: np.ndarray = field(init=False, repr=False)
    theta: np.ndarray = field(init=False, repr=False)
    dr: float = field(init=False)
    dtheta: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.r_inner < 1.0:
            raise DomainError(f"r_inner must lie in (0, 1), got {self.r_inner}")
        if self.theta1 <= self.theta0:
            raise DomainError("empty angular sector")
        r = np.linspace(self.r_inner, 1.0, self.nr)
        theta = np.linspace(self.theta0, self.theta1, self.ntheta)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "dr", float(r[1] - r[0]))
        object.__setattr__(self, "dtheta", float(theta[1] - theta[0]))


@dataclass(frozen=True)
class DiscGrid:
    """Polar grid on the unit disc with radial refinement on the annulus.

    The radial axis is a coarse block covering the hole [0, r_split) glued
    to the fine annulus block, whose nodes coincide with
    ``RadialGrid(r_split, n_annulus)``.  The first radial node sits at
    dr_hole/2 (cell-centered pole closure); theta is uniform and periodic.
    """

    regime: Regime
    r_split: float
    n_hole: int
    n_annulus: int
    ntheta: int
    r: np.ndarray = field(init=False, repr=False)
    theta: np.ndarray = field(init=False, repr=False)
    dtheta: float = field(init=False)
    i_split: int = field(init=False)

    def __post_init__(self):
        if self.ntheta < 256:
            raise DomainError("disc grid needs >= 256 angular nodes")
        if not 0.0 < self.r_split < 1.0:
            raise DomainError("r_split must lie in (0, 1)")
        # Hole block: cell-centered nodes strictly inside (0, r_split).
        dr_hole = self.r_split / (self.n_hole + 0.5)
        hole = (np.arange(self.n_hole) + 0.5) * dr_hole
        annulus = np.linspace(self.r_split, 1.0, self.n_annulus)
        r = np.concatenate([hole, annulus])
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta",
                           np.arange(self.ntheta) * (2.0 * math.pi / self.ntheta))
        object.__setattr__(self, "dtheta", float(2.0 * math.pi / self.ntheta))
        object.__setattr__(self, "i_split", self.n_hole)

    @property
    def nr(self) -> int:
        return self.n_hole + self.n_annulus

    @property
    def annulus_slice(self) -> slice:
        """Radial index range of the annulus block (nodes >= r_split)."""
        return slice(self.i_split, self.nr)

    @property
    def faces(self) -> np.ndarray:
        """Radial cell faces r_{i+1/2}, including 0 and 1."""
        r = self.r
        mid = 0.5 * (r[1:] + r[:-1])
        return np.concatenate([[0.0], mid, [1.0]])

    @property
    def cell_widths(self) -> np.ndarray:
        faces = self.faces
        return faces[1:] - faces[:-1]

    @property
    def node_area(self) -> np.ndarray:
        """(nr,) area weight per node row: r * cell_width * dtheta."""
        return self.r * self.cell_widths * self.dtheta

    def integrate(self, values: np.ndarray) -> float:
        """Area integral of a (nr, ntheta) field over the disc."""
        return float(np.sum(self.node_area[:, None] * values))

    def annulus_radial_grid(self) -> RadialGrid:
        """The matching 1D solver grid on [r_split, 1]."""
        return RadialGrid(r_inner=self.r_split, n=self.n_annulus)


def disc_grid_for(regime: Regime, r_less: float, core_scale: float,
                  cells_per_core: float = 4.0, ntheta: int | None = None,
                  r_star: float | None = None) -> DiscGrid:
    """Build a disc grid resolving the vortex-core scale.

    The annulus spacing targets ``core_scale / cells_per_core`` in both
    directions (angular spacing measured at r_star or at the annulus
    midpoint).
    """
    target = core_scale / cells_per_core
    n_annulus = max(256, int(math.ceil((1.0 - r_less) / target)) + 1)
    n_annulus += 1 - n_annulus % 2     # odd count: clean 2x coarsening
    if ntheta is None:
        r_ref = r_star if r_star is not None else 0.5 * (1.0 + r_less)
        ntheta = 2 ** int(math.ceil(math.log2(2.0 * math.pi * r_ref / target)))
    ntheta = max(256, ntheta)
    n_hole = max(32, int(0.25 * n_annulus * r_less / (1.0 - r_less)))
    return DiscGrid(regime=regime, r_split=r_less, n_hole=n_hole,
                    n_annulus=n_annulus, ntheta=ntheta)
