"""Radial giant-vortex problem on the annulus.

For an integer winding offset ``a`` the giant-vortex energy of a real
radial profile g on A = {R_< <= r <= 1} is

    E_a[g] = int_A |g'|^2 + eps^{-2} g^4 + (n^2/r^2 - 2 Omega n) g^2,
    n = [Omega] - a,

minimized under unit mass int_A g^2 = 1 with natural (Neumann) boundary
conditions.  The discretization is P1 finite elements for the kinetic term
and mass-lumped node quadrature for the rest, so the discrete energy has an
exact analytic gradient; the solver is a projected (normalized) semi-
implicit gradient flow, and an independent damped-Newton solver on the
Euler-Lagrange system serves as a cross-validation oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SearchError, SolverError
from .grids import RadialGrid
from .params import Regime
from .thomas_fermi import TFProfile

_POSITIVITY_FLOOR = 1e-12


@dataclass(frozen=True)
class GiantVortexState:
    """Converged radial profile for one winding offset.

    Immutable once returned; shared freely between analysis routines.
    """

    regime: Regime
    grid: RadialGrid
    a: int
    winding: int              # n = [Omega] - a carried by the phase factor
    g: np.ndarray = field(repr=False)
    mu_hat: float
    energy: float
    residual_norm: float
    iterations: int
    energy_history: np.ndarray = field(repr=False)
    omega_opt: bool = False
    method: str = "flow"

    @property
    def g2(self) -> np.ndarray:
        return self.g * self.g

    def g_at(self, r):
        """Linear interpolation of g onto arbitrary radii in [R_<, 1]."""
        return np.interp(r, self.grid.r, self.g)

    def mass(self) -> float:
        return self.grid.integrate(self.g2)

    def as_dict(self) -> dict:
        return {
            "a": self.a,
            "winding": self.winding,
            "mu_hat": self.mu_hat,
            "energy": self.energy,
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "omega_opt": self.omega_opt,
            "method": self.method,
        }


class _Discretization:
    """Discrete energy E(g) = g^T K g + sum w V g^2 + eps^-2 sum w g^4."""

    def __init__(self, regime: Regime, winding: int, grid: RadialGrid):
        self.regime = regime
        self.winding = winding
        self.grid = grid
        r, h = grid.r, grid.h
        self.w = grid.weights
        self.face_c = math.pi * (r[:-1] + r[1:]) / h
        self.V = winding**2 / (r * r) - 2.0 * regime.omega * winding
        self.inv_eps2 = 1.0 / regime.epsilon**2

    def energy(self, g: np.ndarray) -> float:
        dg = np.diff(g)
        kin = float(np.dot(self.face_c, dg * dg))
        g2 = g * g
        return kin + float(np.dot(self.w, self.V * g2 + self.inv_eps2 * g2 * g2))

    def half_gradient(self, g: np.ndarray) -> np.ndarray:
        """(1/2) dE/dg = K g + w V g + 2 eps^-2 w g^3."""
        out = self.w * (self.V * g + 2.0 * self.inv_eps2 * g * g * g)
        c = self.face_c
        dg = np.diff(g)
        out[:-1] -= c * dg
        out[1:] += c * dg
        return out

    def mu_hat(self, g: np.ndarray) -> float:
        """Lagrange multiplier (chemical potential) at unit mass."""
        return float(np.dot(g, self.half_gradient(g)))

    def residual_norm(self, g: np.ndarray, mu: float) -> float:
        """Weighted L2 norm of the strong-form Euler-Lagrange residual."""
        res = self.half_gradient(g) / self.w - mu * g
        return math.sqrt(float(np.dot(self.w, res * res)))

    def normalize(self, g: np.ndarray) -> np.ndarray:
        return g / math.sqrt(float(np.dot(self.w, g * g)))

    def linear_banded(self, diag_extra: np.ndarray, shift: float):
        """Banded (1,1) form of shift*W + K + diag(w V) + diag(diag_extra)."""
        n = self.grid.n
        ab = np.zeros((3, n))
        c = self.face_c
        ab[1, :] = shift * self.w + self.w * self.V + diag_extra
        ab[1, :-1] += c
        ab[1, 1:] += c
        ab[0, 1:] = -c
        ab[2, :-1] = -c
        return ab

    def tf_seed(self, tf_density) -> np.ndarray:
        g0 = np.sqrt(np.maximum(tf_density(self.grid.r), _POSITIVITY_FLOOR))
        return self.normalize(g0)


def _default_seed(disc: _Discretization) -> np.ndarray:
    """Thomas-Fermi seed adapted to the winding potential.

    Drops the kinetic term: rho = (eps^2/2) [mu - V]_+ with mu fixed by
    unit mass (bisection).  For the optimal winding this is the annular TF
    density restricted to [R_<, 1]; for n = 0 it degenerates to a constant.
    """
    w, V, eps2 = disc.w, disc.V, disc.regime.epsilon**2

    def mass(mu):
        return 0.5 * eps2 * float(np.dot(w, np.maximum(mu - V, 0.0)))

    lo = float(np.min(V))
    hi = lo + 2.0 / (0.5 * eps2 * float(np.sum(w)))
    while mass(hi) < 1.0:
        hi = lo + 2.0 * (hi - lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mass(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    rho = 0.5 * eps2 * np.maximum(0.5 * (lo + hi) - V, 0.0)
    g0 = np.sqrt(np.maximum(rho, _POSITIVITY_FLOOR))
    return disc.normalize(g0)


def solve_profile(
    regime: Regime,
    a: int,
    grid: RadialGrid,
    *,
    initial: np.ndarray | None = None,
    res_tol: float = 1e-9,
    max_iter: int = 200_000,
    tau: float = 1e-3,
) -> GiantVortexState:
    """Minimize the giant-vortex energy for winding offset ``a``.

    Projected semi-implicit gradient flow: each step solves a tridiagonal
    system with the cubic term lagged, then renormalizes.  Accepted steps
    never increase the energy (the step size is halved on an increase); the
    run stops when the Euler-Lagrange residual drops below ``res_tol``.
    """
    if abs(a) > 4.0 / regime.epsilon:
        raise SolverError(f"winding offset a = {a} outside sanity bound O(1/eps)")
    winding = regime.integer_omega - a
    disc = _Discretization(regime, winding, grid)
    g = disc.normalize(np.asarray(initial, dtype=float)) if initial is not None \
        else _default_seed(disc)

    energy = disc.energy(g)
    history = [energy]
    # Step ceiling keeps the implicit operator an M-matrix.
    tau_max = 0.9 / max(1.0, -float(np.min(disc.V)))
    tau = min(tau, tau_max)
    check_every = 10
    it = 0
    best_res = math.inf
    last_gain = 0
    while it < max_iter:
        it += 1
        extra = 2.0 * disc.inv_eps2 * disc.w * g * g
        ab = disc.linear_banded(extra, shift=1.0 / tau)
        g_new = solve_banded((1, 1), ab, disc.w * g / tau)
        g_new = disc.normalize(g_new)
        e_new = disc.energy(g_new)
        if e_new > energy + 1e-13 * abs(energy):
            tau *= 0.5
            if tau < 1e-14:
                raise SolverError(
                    "flow step collapsed without reaching tolerance",
                    history=history,
                )
            continue
        g, energy = g_new, e_new
        history.append(energy)
        if it % 25 == 0:
            tau = min(tau * 1.3, tau_max)
        if it % check_every == 0:
            mu = disc.mu_hat(g)
            res = disc.residual_norm(g, mu)
            if res < res_tol:
                break
            if res < 0.999 * best_res:
                best_res, last_gain = res, it
            elif it - last_gain > 5000:
                # Roundoff floor of the discrete gradient; accept if tight.
                if res < max(100.0 * res_tol, 1e-7):
                    break
                raise SolverError(
                    f"flow stalled at residual {res:.3e} after {it} iterations",
                    history=history,
                )
    else:
        mu = disc.mu_hat(g)
        res = disc.residual_norm(g, mu)
        raise SolverError(
            f"no convergence after {max_iter} iterations (residual {res:.3e})",
            history=history,
        )

    if np.any(g <= 0.0):
        raise SolverError("negative density encountered after projection",
                          history=history)
    mu = disc.mu_hat(g)
    return GiantVortexState(
        regime=regime, grid=grid, a=a, winding=winding, g=g, mu_hat=mu,
        energy=energy, residual_norm=disc.residual_norm(g, mu),
        iterations=it, energy_history=np.asarray(history),
    )


def solve_profile_newton(
    regime: Regime,
    a: int,
    grid: RadialGrid,
    *,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> GiantVortexState:
    """Cross-validation oracle: damped Newton on the Euler-Lagrange system.

    Solves F(g, mu) = (K g + w V g + 2 eps^-2 w g^3 - mu W g,
    (g^T W g - 1)/2) = 0 from the Thomas-Fermi seed.  Shares only the
    discretization with the flow solver, not the solution path.
    """
    winding = regime.integer_omega - a
    disc = _Discretization(regime, winding, grid)
    g = _default_seed(disc)
    mu = disc.mu_hat(g)
    w = disc.w
    n = grid.n

    k_mat = sp.diags(
        [np.concatenate([-disc.face_c, [0.0]])[:-1],
         np.zeros(n),
         np.concatenate([[0.0], -disc.face_c])[1:]],
        offsets=[-1, 0, 1], format="csr",
    )
    k_diag = np.zeros(n)
    k_diag[:-1] += disc.face_c
    k_diag[1:] += disc.face_c

    def f_vec(g, mu):
        top = disc.half_gradient(g) - mu * w * g
        return np.concatenate([top, [0.5 * (float(np.dot(w, g * g)) - 1.0)]])

    fval = f_vec(g, mu)
    fnorm = np.linalg.norm(fval)
    scale = max(1.0, abs(disc.energy(g)))
    history = [fnorm]
    for it in range(max_iter):
        if fnorm < tol * scale:
            break
        j11_diag = k_diag + w * (disc.V + 6.0 * disc.inv_eps2 * g * g) - mu * w
        j11 = k_mat + sp.diags(j11_diag)
        wg = w * g
        jac = sp.bmat(
            [[j11, -wg[:, None]], [wg[None, :], None]], format="csc"
        )
        delta = spla.spsolve(jac, -fval)
        step = 1.0
        for _ in range(60):
            g_try = g + step * delta[:-1]
            mu_try = mu + step * delta[-1]
            f_try = f_vec(g_try, mu_try)
            if np.linalg.norm(f_try) < (1.0 - 1e-4 * step) * fnorm:
                g, mu, fval = g_try, mu_try, f_try
                fnorm = np.linalg.norm(fval)
                history.append(fnorm)
                break
            step *= 0.5
        else:
            raise SolverError("Newton line search failed", history=history)
    else:
        raise SolverError(
            f"Newton did not converge in {max_iter} iterations", history=history
        )

    if np.any(g <= 0.0):
        # EL solutions are defined up to sign; pick the positive branch.
        if np.all(g < 0.0):
            g = -g
        else:
            raise SolverError("Newton converged to a sign-changing profile",
                              history=history)
    return GiantVortexState(
        regime=regime, grid=grid, a=a, winding=winding, g=g,
        mu_hat=mu, energy=disc.energy(g),
        residual_norm=disc.residual_norm(g, mu),
        iterations=len(history), energy_history=np.asarray(history),
        method="newton",
    )


def optimal_winding(
    regime: Regime,
    grid: RadialGrid,
    *,
    half_width: int = 3,
    max_expand: int = 12,
    tie_rel_tol: float = 1e-9,
    res_tol: float = 1e-9,
):
    """Scan integer windings around 2/(3 sqrt(pi) eps) for the minimum.

    The window expands until the minimum is interior.  Returns
    ``(omega, state, scan)`` where ``scan`` maps each visited offset to its
    energy; ties within ``tie_rel_tol`` break toward smaller
    ``|a - omega_tf|`` and are listed in ``scan['ties']``.
    """
    center = int(round(regime.omega_tf))
    states: dict[int, GiantVortexState] = {}

    def solve(a: int):
        if a not in states:
            warm = None
            for b in (a - 1, a + 1):
                if b in states:
                    warm = states[b].g
                    break
            states[a] = solve_profile(regime, a, grid, initial=warm,
                                      res_tol=res_tol)
        return states[a]

    lo, hi = center - half_width, center + half_width
    for _ in range(max_expand + 1):
        for a in range(lo, hi + 1):
            solve(a)
        best = min(states, key=lambda a: states[a].energy)
        if lo < best < hi:
            break
        if best <= lo:
            lo -= half_width
        if best >= hi:
            hi += half_width
    else:
        raise SearchError(
            f"winding minimum still on the window edge after {max_expand} "
            f"expansions (window [{lo}, {hi}])"
        )

    e_best = states[best].energy
    ties = sorted(
        a for a, s in states.items()
        if abs(s.energy - e_best) <= tie_rel_tol * abs(e_best)
    )
    omega = min(ties, key=lambda a: (abs(a - regime.omega_tf), a))
    state = replace(states[omega], omega_opt=True)
    scan = {
        "energies": {a: states[a].energy for a in sorted(states)},
        "ties": ties,
        "omega_tf": regime.omega_tf,
    }
    return omega, state, scan


def compatibility_integral(state: GiantVortexState, regime: Regime) -> float:
    """int_A g^2 (Omega - n r^{-2}); bounded (O(1)) at the optimal winding."""
    r = state.grid.r
    vals = state.g2 * (regime.omega - state.winding / (r * r))
    return state.grid.integrate(vals)


@dataclass(frozen=True)
class DecayReport:
    """Fitted constants for the hole-decay and bulk-closeness bounds."""

    hole_decay_constant: float     # C in g^2 <= C/(eps L) exp(-(1-r^2)/(1-R_h^2))
    bulk_rel_error_sup: float      # sup |g^2-rho_TF|/rho_TF beyond the layer
    bulk_shape_constant: float     # C in |g^2-rho| <= C eps^2 L^2 (r^2-R_h^2)^{-3/2} rho
    edge_ratio: float              # g^2(1)/rho_TF(1)
    bulk_layer_radius: float

    def as_dict(self) -> dict:
        return {
            "hole_decay_constant": self.hole_decay_constant,
            "bulk_rel_error_sup": self.bulk_rel_error_sup,
            "bulk_shape_constant": self.bulk_shape_constant,
            "edge_ratio": self.edge_ratio,
            "bulk_layer_radius": self.bulk_layer_radius,
        }


def decay_diagnostics(state: GiantVortexState, tf: TFProfile) -> DecayReport:
    """Check the computed profile against the decay/pointwise bound shapes."""
    regime = state.regime
    eps, log_eps = regime.epsilon, regime.log_eps
    r = state.grid.r
    g2 = state.g2
    r_h = tf.r_h

    hole = r < r_h
    envelope = np.exp(-(1.0 - r * r) / (1.0 - r_h * r_h)) / (eps * log_eps)
    c_hole = float(np.max(g2[hole] / envelope[hole])) if np.any(hole) else 0.0

    layer = r_h + eps**1.5 * log_eps**2
    bulk = r >= layer
    rho = tf.density(r)
    rel = np.abs(g2[bulk] - rho[bulk]) / rho[bulk]
    shape = (eps * log_eps) ** 2 * (r[bulk] ** 2 - r_h**2) ** (-1.5)
    return DecayReport(
        hole_decay_constant=c_hole,
        bulk_rel_error_sup=float(np.max(rel)),
        bulk_shape_constant=float(np.max(rel / shape)),
        edge_ratio=float(g2[-1] / rho[-1]),
        bulk_layer_radius=float(layer),
    )
