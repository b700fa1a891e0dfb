"""Vortex cost function, its Thomas-Fermi closed forms, and the ring radius.

The short-range energetic cost of a unit-degree vortex at radius r is

    H(r) = (1/2) g^2(r) |log eps| + F(r),
    F(r) = 2 int_{R_<}^r g^2(s) (Omega s - n/s) ds,   n = [Omega] - omega,

with g the optimal giant-vortex profile.  Replacing g^2 by the TF density
gives closed forms F_TF, H_TF; rescaling z = eps*Omega*(r^2 - R_h^2) turns
H_TF into the cubic k(z)/(12 eps) whose interior minimum z_2 locates the
ring radius R_* where vortices concentrate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from .errors import DomainError, NoRingError
from .giant_vortex import GiantVortexState
from .params import Regime
from .thomas_fermi import TFProfile, formal_hole_radius_sq


def rotation_field(state: GiantVortexState):
    """Azimuthal rotation-field magnitude B(r) = Omega r - n/r.

    Returns ``(B, r_zero)``: the evaluator and the radius where B changes
    sign inside the annulus (None if it does not).
    """
    omega, n = state.regime.omega, state.winding

    def B(r):
        r = np.asarray(r, dtype=float)
        return omega * r - n / r

    r_zero = None
    if n > 0:
        rz = math.sqrt(n / omega)
        if state.grid.r_inner < rz < 1.0:
            r_zero = rz
    return B, r_zero


@dataclass(frozen=True)
class CostProfile:
    """F and H sampled on the solver grid, with TF closed forms alongside."""

    state: GiantVortexState
    r: np.ndarray = field(repr=False)
    f_values: np.ndarray = field(repr=False)
    h_values: np.ndarray = field(repr=False)
    quadrature_error: float          # max |Simpson - trapezoid| over the grid
    z1: float
    z2: float
    r_star: float
    h_at_rstar: float
    h_tf_at_rstar: float
    hole_exists: bool

    def F(self, r):
        self._check(r)
        return np.interp(r, self.r, self.f_values)

    def H(self, r):
        self._check(r)
        return np.interp(r, self.r, self.h_values)

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        lo, hi = self.r[0], self.r[-1]
        if np.any(r < lo - 1e-12) or np.any(r > hi + 1e-12):
            raise DomainError(f"radius outside [{lo}, {hi}]")

    def as_dict(self) -> dict:
        return {
            "z1": self.z1,
            "z2": self.z2,
            "r_star": self.r_star,
            "h_at_rstar": self.h_at_rstar,
            "h_tf_at_rstar": self.h_tf_at_rstar,
            "quadrature_error": self.quadrature_error,
            "hole_exists": self.hole_exists,
        }


def potential_grid(state: GiantVortexState) -> tuple[np.ndarray, float]:
    """Cumulative Simpson quadrature of F on the state's grid.

    Returns the sampled F and the worst Simpson-trapezoid disagreement,
    reported as the quadrature error bar.
    """
    B, _ = rotation_field(state)
    r = state.grid.r
    integrand = 2.0 * state.g2 * B(r)
    f_simp = np.concatenate([[0.0], cumulative_simpson(integrand, x=r)])
    f_trap = np.concatenate([[0.0], cumulative_trapezoid(integrand, x=r)])
    return f_simp, float(np.max(np.abs(f_simp - f_trap)))


def potential_F(state: GiantVortexState, r) -> float | np.ndarray:
    """F(r) by cumulative quadrature from R_< on the state's grid."""
    profile = cost_profile(state)
    out = profile.F(r)
    return float(out) if np.isscalar(r) else out


def cost_H(state: GiantVortexState, r) -> float | np.ndarray:
    """H(r) = (1/2) g^2(r) |log eps| + F(r)."""
    profile = cost_profile(state)
    out = profile.H(r)
    return float(out) if np.isscalar(r) else out


def rescaled_cost(regime: Regime, z) -> float | np.ndarray:
    """Rescaled cost k(z) = z (2/pi - 3 Omega_1 - 2 z (2/sqrt(pi) - z))."""
    zmax = 2.0 / math.sqrt(math.pi)
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < -1e-15) or np.any(z_arr > zmax + 1e-15):
        raise DomainError(f"z outside [0, 2/sqrt(pi) = {zmax:.6f}]")
    omega1 = regime.omega1
    if omega1 is None:
        raise DomainError("regime carries no Omega_1")
    out = z_arr * (2.0 / math.pi - 3.0 * omega1
                   - 2.0 * z_arr * (zmax - z_arr))
    return float(out) if np.isscalar(z) else out


def rescaled_cost_derivatives(regime: Regime, z: float) -> tuple[float, float]:
    """(k'(z), k''(z)) for the cubic k."""
    omega1 = regime.omega1
    sq = math.sqrt(math.pi)
    kp = (2.0 / math.pi - 3.0 * omega1) - (8.0 / sq) * z + 6.0 * z * z
    kpp = -(8.0 / sq) + 12.0 * z
    return kp, kpp


@dataclass(frozen=True)
class RingLocation:
    """Critical points of k and the resulting ring radius."""

    regime: Regime
    z1: float
    z2: float
    r_star: float
    k_at_z2: float
    hole_exists: bool
    r_h_sq: float

    def as_dict(self) -> dict:
        return {
            "z1": self.z1,
            "z2": self.z2,
            "r_star": self.r_star,
            "k_at_z2": self.k_at_z2,
            "hole_exists": self.hole_exists,
        }


def ring_radius(regime: Regime) -> RingLocation:
    """Closed-form z_1 < z_2 and R_* = sqrt(R_h^2 + z_2/(eps Omega)).

    R_h^2 is evaluated by its annular formula even when negative (formal
    continuation for hole-free desk regimes, flagged by ``hole_exists``).
    """
    omega1 = regime.omega1
    if omega1 is None or omega1 <= 0.0:
        raise NoRingError(
            f"Omega_1 = {omega1}: the rescaled cost has no negative interior "
            "minimum (supercritical or threshold regime)"
        )
    root = math.sqrt(1.0 / (9.0 * math.pi) + 0.5 * omega1)
    center = 2.0 / (3.0 * math.sqrt(math.pi))
    z1, z2 = center - root, center + root
    r_h_sq = formal_hole_radius_sq(regime)
    r_star_sq = r_h_sq + z2 / (regime.epsilon * regime.omega)
    if r_star_sq <= 0.0:
        raise NoRingError(f"R_*^2 = {r_star_sq:.6g} <= 0 in this regime")
    return RingLocation(
        regime=regime, z1=z1, z2=z2, r_star=math.sqrt(r_star_sq),
        k_at_z2=float(rescaled_cost(regime, z2)),
        hole_exists=(r_h_sq > 0.0), r_h_sq=r_h_sq,
    )


def tf_cost(regime: Regime, tf: TFProfile):
    """Closed-form evaluators (F_TF, H_TF) for the TF cost function.

    F_TF uses the exact antiderivative of
    2 rho_TF(s) (Omega s - ([Omega] - omega_TF)/s), no asymptotic dropping:

        F_TF(r) = eps^2 Omega^2 [ Omega (r^2-R_h^2)^2 / 4
                  - ([Omega] - omega_TF) ((r^2-R_h^2)/2 - R_h^2 log(r/R_h)) ].
    """
    eps, omega = regime.epsilon, regime.omega
    n_tf = regime.integer_omega - regime.omega_tf
    r_h = tf.r_h
    coeff = (eps * omega) ** 2

    def F_tf(r):
        r = np.asarray(r, dtype=float)
        u = r * r - r_h * r_h
        out = coeff * (omega * u * u / 4.0
                       - n_tf * (0.5 * u - r_h * r_h * np.log(r / r_h)))
        return out

    def H_tf(r):
        return 0.5 * regime.log_eps * tf.density(r) + F_tf(r)

    return F_tf, H_tf


def cost_profile(state: GiantVortexState, tf: TFProfile | None = None) -> CostProfile:
    """Assemble the full cost profile for a converged giant-vortex state."""
    regime = state.regime
    r = state.grid.r
    f_vals, quad_err = potential_grid(state)
    h_vals = 0.5 * state.g2 * regime.log_eps + f_vals

    try:
        ring = ring_radius(regime)
    except NoRingError:
        # Supercritical or threshold regime: H has no negative interior
        # minimum; the ring fields stay NaN but F and H remain usable.
        return CostProfile(
            state=state, r=r, f_values=f_vals, h_values=h_vals,
            quadrature_error=quad_err, z1=math.nan, z2=math.nan,
            r_star=math.nan, h_at_rstar=math.nan, h_tf_at_rstar=math.nan,
            hole_exists=formal_hole_radius_sq(regime) > 0.0,
        )
    h_at_rstar = float(np.interp(ring.r_star, r, h_vals))
    if tf is not None:
        _, H_tf = tf_cost(regime, tf)
        h_tf_at_rstar = float(H_tf(ring.r_star))
    else:
        h_tf_at_rstar = math.nan
    return CostProfile(
        state=state, r=r, f_values=f_vals, h_values=h_vals,
        quadrature_error=quad_err, z1=ring.z1, z2=ring.z2,
        r_star=ring.r_star, h_at_rstar=h_at_rstar,
        h_tf_at_rstar=h_tf_at_rstar, hole_exists=ring.hole_exists,
    )


@dataclass(frozen=True)
class CostComparison:
    """Sup-norm gaps between computed and TF cost functions on the reduced
    annulus, with the fitted constants of their predicted bound shapes."""

    sup_density_gap: float
    sup_f_gap: float
    sup_h_gap: float
    fitted_density: float   # gap / (L^{5/2} eps^{-1/2})
    fitted_f: float         # gap * eps L
    fitted_h: float         # gap * eps L

    def as_dict(self) -> dict:
        return {
            "sup_density_gap": self.sup_density_gap,
            "sup_f_gap": self.sup_f_gap,
            "sup_h_gap": self.sup_h_gap,
            "fitted_density": self.fitted_density,
            "fitted_f": self.fitted_f,
            "fitted_h": self.fitted_h,
        }


def compare_costs(state: GiantVortexState, tf: TFProfile,
                  r_greater: float) -> CostComparison:
    """Compare g^2, F, H with their TF analogues on r >= R_>."""
    regime = state.regime
    eps, log_eps = regime.epsilon, regime.log_eps
    r = state.grid.r
    mask = r >= r_greater
    profile = cost_profile(state, tf)
    F_tf, H_tf = tf_cost(regime, tf)

    d_gap = float(np.max(np.abs(state.g2[mask] - tf.density(r[mask]))))
    f_gap = float(np.max(np.abs(profile.f_values[mask] - F_tf(r[mask]))))
    h_gap = float(np.max(np.abs(profile.h_values[mask] - H_tf(r[mask]))))
    return CostComparison(
        sup_density_gap=d_gap, sup_f_gap=f_gap, sup_h_gap=h_gap,
        fitted_density=d_gap / (log_eps**2.5 / math.sqrt(eps)),
        fitted_f=f_gap * eps * log_eps,
        fitted_h=h_gap * eps * log_eps,
    )


def smoothstep(u):
    """C^1 ramp 0 -> 1 on [0, 1]."""
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


@dataclass(frozen=True)
class VortexCostSample:
    radius: float
    degree: int
    kind: str          # 'zero', 'inner-layer', 'ring', 'bulk-offring', 'negative'
    cost: float        # (1/2)|d| g^2 L (+ log-log haircut) + d xi_in F
    bound: float       # the lower bound the cost must exceed
    margin: float      # cost - bound
    fitted_c: float    # cost / (|d| sqrt(Omega_1)/eps) for off-ring kinds


def vortex_cost_bounds(state: GiantVortexState, tf: TFProfile,
                       geometry, samples) -> list[VortexCostSample]:
    """Check the per-vortex cost lower bounds at sampled (radius, degree).

    Three regions are audited:
      * inner layer (radius within C eps L sqrt(Omega_1) of R_<):
        cost with the log-log haircut stays >= 0;
      * on the ring (positive degree near R_*): cost >= |d| H(R_*) (1 + O(Omega_1));
      * off the ring or negative degree: cost >= C |d| sqrt(Omega_1)/eps
        with C fitted, reported through the margin.
    """
    regime = state.regime
    eps, log_eps = regime.epsilon, regime.log_eps
    omega1 = regime.omega1 or 0.0
    profile = cost_profile(state, tf)
    r_star = profile.r_star
    loglog = math.log(log_eps) / log_eps

    # Radial C^1 ramp rising 0 -> 1 between R_> and R_cut- = R_> + eps/L.
    r_gt = geometry.r_greater
    ramp_width = eps / log_eps

    def xi_in(r):
        return float(smoothstep((r - r_gt) / ramp_width))

    out = []
    ring_band = eps * log_eps * omega1**0.25 if omega1 > 0 else 0.0
    inner_band = eps * log_eps * math.sqrt(max(omega1, 0.0))
    shape = math.sqrt(max(omega1, 0.0)) / eps
    for radius, degree in samples:
        g2 = float(state.g_at(radius)) ** 2
        f_val = float(profile.F(radius))
        base = 0.5 * abs(degree) * g2 * log_eps
        cost = base * (1.0 - loglog) + degree * xi_in(radius) * f_val
        cost_plain = base + degree * xi_in(radius) * f_val
        fitted = math.nan
        if degree == 0:
            kind, bound, val = "zero", 0.0, 0.0
        elif radius <= geometry.r_bulk or radius - state.grid.r_inner <= inner_band:
            kind, bound, val = "inner-layer", 0.0, cost
        elif degree > 0 and abs(radius - r_star) <= max(ring_band, 2 * state.grid.h):
            kind = "ring"
            bound = abs(degree) * profile.h_at_rstar * (1.0 + omega1)
            val = cost_plain
        else:
            # Off the ring or negative degree: bound shape C |d| sqrt(Om1)/eps
            # with unnamed C; positivity is the hard part, C is fitted.
            kind = "negative" if degree < 0 else "bulk-offring"
            bound = 0.0
            val = cost_plain
            if shape > 0.0:
                fitted = val / (abs(degree) * shape)
        out.append(VortexCostSample(
            radius=float(radius), degree=int(degree), kind=kind,
            cost=val, bound=bound, margin=val - bound, fitted_c=fitted,
        ))
    return out
