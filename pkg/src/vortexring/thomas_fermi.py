"""Thomas-Fermi profile on the unit disc and the working annuli.

The interaction-dominated (Thomas-Fermi) minimizer of the rotating energy,
with the kinetic term dropped, is the explicit annular density

    rho_TF(r) = (eps^2 Omega^2 / 2) [r^2 - R_h^2]_+ ,
    R_h = sqrt(1 - 2 / (sqrt(pi) eps Omega)),

normalized to unit mass on the disc.  All condensate physics happens on a
slightly enlarged annulus A = {R_< <= r <= 1} with R_< = R_h - eps^(8/7),
and diagnostics use the reduced annulus (inner radius R_>) and the bulk
annulus (inner radius R_bulk) where the density is bounded below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, NoHoleError
from .params import Regime

#: Hole-opening threshold for eps*Omega.
HOLE_THRESHOLD = 2.0 / math.sqrt(math.pi)


@dataclass(frozen=True)
class TFProfile:
    """Thomas-Fermi minimizer: radii, energies and the radial density."""

    regime: Regime
    r_h: float
    mu_tf: float
    e_tf: float

    def density(self, r):
        """Radial density rho_TF(r); vanishes for r <= R_h."""
        r = np.asarray(r, dtype=float)
        eps, omega = self.regime.epsilon, self.regime.omega
        coeff = 0.5 * eps * eps * omega * omega
        return coeff * np.maximum(r * r - self.r_h * self.r_h, 0.0)

    def l2_norm_sq(self) -> float:
        """Closed-form ||rho_TF||_2^2 over the disc."""
        eps, omega = self.regime.epsilon, self.regime.omega
        hole_width = 1.0 - self.r_h**2
        return math.pi * (eps * omega) ** 4 / 12.0 * hole_width**3

    def as_dict(self) -> dict:
        return {"r_h": self.r_h, "mu_tf": self.mu_tf, "e_tf": self.e_tf}


def formal_hole_radius_sq(regime: Regime) -> float:
    """R_h^2 = 1 - 2/(sqrt(pi) eps Omega), continued to negative values.

    Negative values signal a disc-shaped (hole-free) profile; the cost
    rescaling still uses this quantity formally.
    """
    return 1.0 - HOLE_THRESHOLD / (regime.epsilon * regime.omega)


def tf_profile(regime: Regime) -> TFProfile:
    """Construct the annular Thomas-Fermi profile for a regime.

    Raises
    ------
    NoHoleError
        If eps*Omega <= 2/sqrt(pi): the minimizer is disc-shaped and the
        annular closed forms do not apply (out of scope).
    """
    eps, omega = regime.epsilon, regime.omega
    eps_omega = eps * omega
    if eps_omega <= HOLE_THRESHOLD:
        msg = (
            f"eps*Omega = {eps_omega:.6g} <= 2/sqrt(pi) = {HOLE_THRESHOLD:.6g}: "
            "no central hole"
        )
        if regime.omega1 is not None:
            msg += (
                "; largest epsilon opening a hole at this Omega_1 is "
                f"{hole_threshold_epsilon(regime.omega1):.6g}"
            )
        raise NoHoleError(msg)
    r_h = math.sqrt(1.0 - HOLE_THRESHOLD / eps_omega)
    e_tf = -(omega**2) * (1.0 - 4.0 / (3.0 * math.sqrt(math.pi) * eps_omega))
    # mu_TF = E_TF + eps^{-2} ||rho||_2^2; equals -Omega^2 R_h^2 analytically.
    l2_sq = math.pi * eps_omega**4 / 12.0 * (1.0 - r_h * r_h) ** 3
    mu_tf = e_tf + l2_sq / (eps * eps)
    return TFProfile(regime=regime, r_h=r_h, mu_tf=mu_tf, e_tf=e_tf)


def hole_threshold_epsilon(omega1: float | None) -> float:
    """Largest epsilon at which the regime built from Omega_1 opens a hole.

    Solves eps |log eps| = sqrt(pi) (2/(3 pi) - Omega_1) / 2 by bisection on
    (0, 1/e), where eps |log eps| is increasing.
    """
    if omega1 is None:
        omega1 = 0.0
    target = math.sqrt(math.pi) * (2.0 / (3.0 * math.pi) - omega1) / 2.0
    if target <= 0.0:
        return 0.0
    lo, hi = 1e-12, math.exp(-1.0)
    if hi * 1.0 <= target:  # eps|log eps| maxes at 1/e
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * (-math.log(mid)) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class AnnulusGeometry:
    """Working radii: R_< (solver annulus), R_> (reduced), R_bulk (bulk)."""

    regime: Regime
    r_h: float
    r_less: float
    r_greater: float
    r_bulk: float
    width_annulus: float = field(init=False)
    width_reduced: float = field(init=False)
    width_bulk: float = field(init=False)
    bulk_covers_reduced: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "width_annulus", 1.0 - self.r_less)
        object.__setattr__(self, "width_reduced", 1.0 - self.r_greater)
        object.__setattr__(self, "width_bulk", 1.0 - self.r_bulk)
        object.__setattr__(
            self, "bulk_covers_reduced", self.r_greater <= self.r_bulk
        )

    def as_dict(self) -> dict:
        return {
            "r_h": self.r_h,
            "r_less": self.r_less,
            "r_greater": self.r_greater,
            "r_bulk": self.r_bulk,
            "bulk_covers_reduced": self.bulk_covers_reduced,
        }


def annulus_geometry(regime: Regime, tf: TFProfile) -> AnnulusGeometry:
    """All working radii for a regime with an annular TF profile.

    Ordering 0 < R_< < R_h < R_> < 1 (and R_bulk < 1) is enforced; a
    violation names the failing inequality.  R_> <= R_bulk is reported as a
    flag only, since Omega_1 = 0 gives R_bulk = R_h legitimately.
    """
    eps = regime.epsilon
    log_eps = regime.log_eps
    r_h = tf.r_h
    r_less = r_h - eps ** (8.0 / 7.0)
    r_greater = r_h + eps / log_eps
    omega1 = regime.omega1 if regime.omega1 is not None else 0.0
    r_bulk = r_h + eps * log_eps * math.sqrt(max(omega1, 0.0))

    if r_less <= 0.0:
        raise GeometryError(
            f"R_< = R_h - eps^(8/7) = {r_less:.6g} <= 0: epsilon too coarse"
        )
    if not r_less < r_h:
        raise GeometryError(f"R_< = {r_less:.6g} < R_h = {r_h:.6g} violated")
    if not r_h < r_greater:
        raise GeometryError(f"R_h = {r_h:.6g} < R_> = {r_greater:.6g} violated")
    if not r_greater < 1.0:
        raise GeometryError(f"R_> = {r_greater:.6g} < 1 violated")
    if not r_bulk < 1.0:
        raise GeometryError(f"R_bulk = {r_bulk:.6g} < 1 violated")
    return AnnulusGeometry(
        regime=regime,
        r_h=r_h,
        r_less=r_less,
        r_greater=r_greater,
        r_bulk=r_bulk,
    )


def tf_energy_quadrature(tf: TFProfile, n: int = 200001) -> float:
    """Independent 1D quadrature of the TF energy functional at rho_TF.

    Evaluates integral of (-Omega^2 r^2 rho + eps^{-2} rho^2) over the disc
    with a trapezoid rule; used as an oracle against the closed form.
    """
    regime = tf.regime
    r = np.linspace(tf.r_h, 1.0, n)
    rho = tf.density(r)
    integrand = (-(regime.omega**2) * r * r * rho + rho * rho / regime.epsilon**2) * r
    return 2.0 * math.pi * float(np.trapezoid(integrand, r))


def tf_mass_quadrature(tf: TFProfile, n: int = 200001) -> float:
    """Quadrature of the TF mass over the disc (should be 1)."""
    r = np.linspace(tf.r_h, 1.0, n)
    return 2.0 * math.pi * float(np.trapezoid(tf.density(r) * r, r))
