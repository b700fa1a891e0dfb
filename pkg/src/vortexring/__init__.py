"""Vortex rings and the giant-vortex transition in fast rotating BECs.

Numerical library around the 2D Gross-Pitaevskii energy on the unit disc
at rotation speeds near the third critical speed: Thomas-Fermi profiles,
the radial giant-vortex problem, the vortex cost function and optimal ring
radius, weighted electrostatic problems and the renormalized vortex
energy, an explicit vortex-ring trial function, and a full 2D minimizer
with vorticity extraction.
"""

from .params import (
    Regime,
    RegimeReport,
    critical_speed,
    regime_from_omega,
    regime_from_omega1,
    validate_regime,
)
from .thomas_fermi import (
    AnnulusGeometry,
    TFProfile,
    annulus_geometry,
    hole_threshold_epsilon,
    tf_profile,
)

__all__ = [
    "Regime",
    "RegimeReport",
    "critical_speed",
    "regime_from_omega",
    "regime_from_omega1",
    "validate_regime",
    "TFProfile",
    "AnnulusGeometry",
    "tf_profile",
    "annulus_geometry",
    "hole_threshold_epsilon",
]

__version__ = "0.1.0"
