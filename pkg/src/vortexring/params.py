"""Rotation regimes near the third critical speed.

All asymptotics in this package are driven by two knobs: the inverse
interaction strength ``epsilon`` and the rotation speed ``Omega``.  Speeds
are parametrized by their offset below the leading-order third critical
speed,

    Omega = 2 / (3 pi eps^2 |log eps|) - Omega_1 / (eps^2 |log eps|),

so that ``Omega_1 > 0`` means slightly subcritical (vortex ring expected)
and ``Omega_1 < 0`` supercritical (pure giant vortex).  ``|log eps|`` is the
natural logarithm throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, RegimeError

# Leading coefficient of the third critical speed.
CRITICAL_COEFF = 2.0 / (3.0 * math.pi)


def _check_finite(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return x


@dataclass(frozen=True)
class Regime:
    """Immutable bundle of (epsilon, Omega) and derived quantities.

    Instances are safe to share between concurrent workers; every solver in
    the package treats them as read-only.
    """

    epsilon: float
    omega: float
    omega1: float | None = None
    omega0: float | None = None
    log_eps: float = field(init=False)

    def __post_init__(self):
        eps = _check_finite("epsilon", self.epsilon)
        om = _check_finite("omega", self.omega)
        if not 0.0 < eps < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {eps}")
        # omega = 0 admitted for non-rotating test problems; the regime
        # constructors below always produce omega > 0.
        if om < 0.0:
            raise RegimeError(f"omega must be nonnegative, got {om}")
        object.__setattr__(self, "log_eps", -math.log(eps))

    @property
    def integer_omega(self) -> int:
        """Integer part [Omega] entering the giant-vortex phase."""
        return int(math.floor(self.omega))

    @property
    def omega_tf(self) -> float:
        """Leading-order optimal winding 2 / (3 sqrt(pi) eps)."""
        return 2.0 / (3.0 * math.sqrt(math.pi) * self.epsilon)

    def as_dict(self) -> dict:
        """Serialize for provenance records embedded in every output file."""
        return {
            "epsilon": self.epsilon,
            "omega": self.omega,
            "omega1": self.omega1,
            "omega0": self.omega0,
            "log_eps": self.log_eps,
        }


def critical_speed(epsilon: float) -> float:
    """Leading-order third critical speed 2 / (3 pi eps^2 |log eps|)."""
    eps = _check_finite("epsilon", epsilon)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {eps}")
    log_eps = -math.log(eps)
    return CRITICAL_COEFF / (eps * eps * log_eps)


def regime_from_omega1(epsilon: float, omega1: float) -> Regime:
    """Build a regime from the subcriticality offset Omega_1.

    The arithmetic order is fixed for bit-reproducibility:
    ``omega = critical_speed(epsilon) - omega1 / (eps^2 * |log eps|)``,
    so ``(critical_speed(eps) - omega) * eps^2 * |log eps|`` recovers
    ``omega1`` up to rounding.  Negative ``omega1`` (supercritical) is
    accepted; subcriticality is a reported diagnostic, not a precondition.
    """
    eps = _check_finite("epsilon", epsilon)
    om1 = _check_finite("omega1", omega1)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {eps}")
    log_eps = -math.log(eps)
    omega = critical_speed(eps) - om1 / (eps * eps * log_eps)
    if omega <= 0.0:
        raise RegimeError(
            f"Omega_1 = {om1} at epsilon = {eps} gives Omega = {omega} <= 0"
        )
    return Regime(epsilon=eps, omega=omega, omega1=om1)


def regime_from_omega(epsilon: float, omega: float) -> Regime:
    """Build a regime from Omega directly; Omega_1 is back-computed."""
    eps = _check_finite("epsilon", epsilon)
    om = _check_finite("omega", omega)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {eps}")
    if om <= 0.0:
        raise RegimeError(f"omega must be positive, got {om}")
    log_eps = -math.log(eps)
    omega1 = (critical_speed(eps) - om) * eps * eps * log_eps
    return Regime(epsilon=eps, omega=om, omega1=omega1)


@dataclass(frozen=True)
class RegimeReport:
    """Diagnostic ratios locating a regime relative to the asymptotic
    assumptions.  Nothing here is enforced: desk-scale epsilon cannot
    satisfy asymptotic smallness, so hard gating would block every
    experiment."""

    omega1: float
    # Omega_1 * |log eps| / log|log eps|; >> 1 in the theory.
    omega1_over_loglog: float
    # Omega * eps^2 * |log eps|; should lie in (0, 2/(3 pi)) for a hole.
    omega_eps2_log: float
    at_threshold: bool
    subcritical: bool
    notes: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "omega1": self.omega1,
            "omega1_over_loglog": self.omega1_over_loglog,
            "omega_eps2_log": self.omega_eps2_log,
            "at_threshold": self.at_threshold,
            "subcritical": self.subcritical,
            "notes": list(self.notes),
        }


def validate_regime(regime: Regime) -> RegimeReport:
    """Report the three regime-validity ratios for a given regime."""
    eps = regime.epsilon
    log_eps = regime.log_eps
    scaled = regime.omega * eps * eps * log_eps
    omega1 = regime.omega1
    if omega1 is None:
        omega1 = CRITICAL_COEFF - scaled
    loglog = math.log(log_eps)
    ratio = math.inf if loglog <= 0.0 else omega1 * log_eps / loglog
    notes = []
    if omega1 == 0.0:
        notes.append("at threshold: Omega equals the leading critical speed")
    elif omega1 < 0.0:
        notes.append("supercritical: Omega above the leading critical speed")
    if not 0.0 < scaled < CRITICAL_COEFF:
        notes.append(
            "Omega*eps^2*|log eps| outside (0, 2/(3 pi)); "
            "subcritical scaling not satisfied"
        )
    return RegimeReport(
        omega1=omega1,
        omega1_over_loglog=ratio,
        omega_eps2_log=scaled,
        at_threshold=(omega1 == 0.0),
        subcritical=(omega1 > 0.0),
        notes=tuple(notes),
    )
