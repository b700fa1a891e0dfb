"""Experiment runner: pipelines, sweeps, CSV/JSON artifacts.

Subcommands mirror the library modules (tf, giant-vortex, cost, electro,
trial, gp2d), `verify-all` chains everything into a single verdict record,
and `sweep` repeats a pipeline over a parameter grid with trend columns.
All numeric output is CSV or JSON; every record embeds the full
configuration for provenance, and a fixed seed makes records
byte-identical across runs (no timestamps).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import cost as vcost
from . import electro as velectro
from . import giant_vortex as vgv
from . import gp2d as vgp2d
from . import trial as vtrial
from .errors import VortexRingError
from .grids import RadialGrid, PolarGrid, disc_grid_for
from .params import Regime, regime_from_omega, regime_from_omega1, validate_regime
from .thomas_fermi import annulus_geometry, tf_profile


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a pipeline run needs; round-trips through JSON."""

    pipeline: str
    epsilon: float = 0.03
    omega1: float | None = 0.08
    omega: float | None = None
    grid_r: int = 1024
    grid_theta: int = 512
    cells_per_core: float = 4.0
    seed: int = 0
    out: str = "out"
    res_tol: float = 1e-4
    max_iter: int = 60_000
    max_seconds: float = 150.0    # wall-clock budget per cascade stage
    trials: int = 20
    sweep_epsilon: tuple[float, ...] = ()
    sweep_omega1: tuple[float, ...] = ()
    workers: int = 1

    def regime(self) -> Regime:
        if self.omega is not None:
            return regime_from_omega(self.epsilon, self.omega)
        return regime_from_omega1(self.epsilon, self.omega1 or 0.0)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["sweep_epsilon"] = list(self.sweep_epsilon)
        d["sweep_omega1"] = list(self.sweep_omega1)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        for k in ("sweep_epsilon", "sweep_omega1"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)


def read_config_file(path: str) -> dict:
    """Key/value config file: one `key = value` pair per line, # comments."""
    out: dict = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise VortexRingError(f"bad config line: {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if "," in value:
            out[key] = tuple(float(v) for v in value.split(","))
        else:
            for cast in (int, float):
                try:
                    out[key] = cast(value)
                    break
                except ValueError:
                    continue
            else:
                out[key] = value
    return out


def _write_json(path: Path, record: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, indent=2, sort_keys=True,
                               allow_nan=True) + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _provenance(config: ExperimentConfig, regime: Regime) -> dict:
    return {"config": config.as_dict(), "regime": regime.as_dict()}


# ---------------------------------------------------------------------------
# Pipelines


def run_tf(config: ExperimentConfig) -> dict:
    regime = config.regime()
    tf = tf_profile(regime)
    geo = annulus_geometry(regime, tf)
    out = Path(config.out)
    rr = np.linspace(0.0, 1.0, 2001)
    _write_csv(out / "tf_density.csv", ["r", "rho_tf"],
               zip(rr, tf.density(rr)))
    record = {
        **_provenance(config, regime),
        "tf": tf.as_dict(),
        "annulus": geo.as_dict(),
        "validity": validate_regime(regime).as_dict(),
    }
    _write_json(out / "tf.json", record)
    return record


def _solve_chain(config: ExperimentConfig):
    """regime -> tf -> geometry -> optimal winding state (shared plumbing)."""
    regime = config.regime()
    tf = tf_profile(regime)
    geo = annulus_geometry(regime, tf)
    grid = RadialGrid(geo.r_less, config.grid_r)
    omega, state, scan = vgv.optimal_winding(regime, grid)
    return regime, tf, geo, grid, omega, state, scan


def run_giant_vortex(config: ExperimentConfig) -> dict:
    regime, tf, geo, grid, omega, state, scan = _solve_chain(config)
    out = Path(config.out)
    disc = vgv._Discretization(regime, state.winding, grid)
    res = disc.half_gradient(state.g) / disc.w - state.mu_hat * state.g
    _write_csv(out / "giant_vortex_profile.csv", ["r", "g2", "residual"],
               zip(grid.r, state.g2, res))
    record = {
        **_provenance(config, regime),
        "state": state.as_dict(),
        "omega": omega,
        "scan": {str(k): v for k, v in scan["energies"].items()},
        "compatibility": vgv.compatibility_integral(state, regime),
        "decay": vgv.decay_diagnostics(state, tf).as_dict(),
    }
    _write_json(out / "giant_vortex.json", record)
    return record


def run_cost(config: ExperimentConfig) -> dict:
    regime, tf, geo, grid, omega, state, scan = _solve_chain(config)
    profile = vcost.cost_profile(state, tf)
    f_tf, h_tf = vcost.tf_cost(regime, tf)
    out = Path(config.out)
    _write_csv(out / "cost.csv", ["r", "F", "H", "F_tf", "H_tf"],
               zip(grid.r, profile.f_values, profile.h_values,
                   f_tf(grid.r), h_tf(grid.r)))
    record = {
        **_provenance(config, regime),
        "profile": profile.as_dict(),
        "comparison": vcost.compare_costs(state, tf, geo.r_greater).as_dict(),
    }
    _write_json(out / "cost.json", record)
    return record


def run_electro(config: ExperimentConfig) -> dict:
    regime, tf, geo, grid, omega, state, scan = _solve_chain(config)
    profile = vcost.cost_profile(state, tf)
    weight = velectro.WeightField.from_state(state)
    i_star = velectro.ring_energy(weight, profile.r_star, geo.r_less)
    i_check = velectro.ring_energy(weight, profile.r_star, geo.r_bulk)
    pg = PolarGrid(geo.r_less, max(64, config.grid_r // 16), config.grid_theta)
    minimality = velectro.ring_minimality_check(
        weight, profile.r_star, pg, trials=config.trials, seed=config.seed)
    number = velectro.optimal_vortex_number(
        regime, profile.h_at_rstar, i_star, geo.width_annulus)
    renorm = velectro.renormalized_energy(
        2.0 * math.pi * number.n_exact, profile.h_at_rstar, i_star)
    potential = velectro.radial_ring_potential(weight, profile.r_star,
                                               geo.r_less)
    out = Path(config.out)
    _write_csv(out / "electro_potential.csv", ["r", "h"],
               zip(potential.r, potential.values))
    record = {
        **_provenance(config, regime),
        "i_star": i_star,
        "i_check": i_check,
        "h_at_ring": potential.value_at_ring,
        "minimality": minimality.as_dict(),
        "vortex_number": number.as_dict(),
        "renormalized": renorm.as_dict(),
    }
    _write_json(out / "electro.json", record)
    return record


def _build_trial(config: ExperimentConfig, regime, tf, geo, state, profile,
                 i_star, number):
    t = vtrial.core_scale(regime)
    dg = disc_grid_for(regime, geo.r_less, t,
                       cells_per_core=config.cells_per_core,
                       r_star=profile.r_star)
    pg = PolarGrid(geo.r_less, dg.n_annulus, dg.ntheta)
    cfg = vtrial.build_configuration(regime, profile, number.n_cells,
                                     number.m_per_cell, r_inner=geo.r_less)
    f = vtrial.regularized_vorticity(cfg, pg)
    rho = vtrial.modified_density(state, tf)
    phase = vtrial.phase_field(cfg, rho, pg, f)
    trial = vtrial.assemble_trial(state, cfg, rho, phase, pg)
    return dg, pg, trial


def run_trial(config: ExperimentConfig) -> dict:
    regime, tf, geo, grid, omega, state, scan = _solve_chain(config)
    profile = vcost.cost_profile(state, tf)
    weight = velectro.WeightField.from_state(state)
    i_star = velectro.ring_energy(weight, profile.r_star, geo.r_less)
    number = velectro.optimal_vortex_number(
        regime, profile.h_at_rstar, i_star, geo.width_annulus)
    dg, pg, trial = _build_trial(config, regime, tf, geo, state, profile,
                                 i_star, number)
    report = vtrial.trial_energy_report(
        trial, profile, i_star,
        f_at_rstar=float(profile.F(profile.r_star)),
        g2_at_rstar=float(state.g_at(profile.r_star)) ** 2)
    out = Path(config.out)
    stride = max(1, pg.ntheta // 64)
    theta_cols = ["theta_%d" % j for j in range(0, pg.ntheta, stride)]
    _write_csv(out / "trial_density.csv", ["r"] + theta_cols,
               [[r] + list(np.abs(trial.psi[i, ::stride]) ** 2)
                for i, r in enumerate(pg.r)])
    winding = vgp2d.plaquette_winding(trial.v)
    _write_csv(out / "trial_winding.csv", ["r_center"] + theta_cols,
               [[0.5 * (pg.r[i] + pg.r[i + 1])] + list(winding[i, ::stride])
                for i in range(len(pg.r) - 1)])
    record = {
        **_provenance(config, regime),
        "trial": trial.as_dict(),
        "phase": trial.phase.as_dict(),
        "energy_report": report.as_dict(),
        "vortex_number": number.as_dict(),
    }
    _write_json(out / "trial.json", record)
    return record


def run_gp2d(config: ExperimentConfig) -> dict:
    regime, tf, geo, grid, omega, state, scan = _solve_chain(config)
    profile = vcost.cost_profile(state, tf)
    weight = velectro.WeightField.from_state(state)
    try:
        i_star = velectro.ring_energy(weight, profile.r_star, geo.r_less)
    except (VortexRingError, ValueError):
        i_star = math.nan
    t = vtrial.core_scale(regime)
    grids = vgp2d.cascade_grids(regime, geo.r_less, t,
                                r_star=None if math.isnan(profile.r_star)
                                else profile.r_star,
                                cells_per_core=config.cells_per_core)
    rng = np.random.default_rng(config.seed)
    seed_field = vgp2d.giant_vortex_seed(state, grids[0], noise_amplitude=0.05,
                                         rng=rng)
    wave = vgp2d.minimize_gp_cascade(regime, grids, seed_field,
                                     res_tol=config.res_tol,
                                     max_iter=config.max_iter,
                                     max_seconds=config.max_seconds,
                                     seed_label=f"giant+noise[{config.seed}]")
    dg = grids[-1]
    u = vgp2d.reduced_field(wave, state)
    apg = vgp2d.annulus_polar_grid(dg)
    data = vgp2d.detect_vortices(u, apg, geo.r_bulk, regime)
    record = {
        **_provenance(config, regime),
        "wave": wave.as_dict(),
        "field": {"shape": list(wave.psi.shape), "file": "gp2d_field.npy",
                  "r_inner": dg.r_split, "r_bulk": geo.r_bulk},
        "vortices": data.as_dict(),
    }
    if not math.isnan(profile.r_star) and profile.h_at_rstar < 0.0:
        comparison = vgp2d.vorticity_comparison(
            data, profile.h_at_rstar, i_star, profile.r_star, state)
        record["comparison"] = comparison.as_dict()
    out = Path(config.out)
    pos, masses = data.explicit_measure()
    _write_csv(out / "vortices.csv", ["x", "y", "degree"],
               [[v.x, v.y, v.degree] for v in data.vortices])
    _write_csv(out / "gp2d_density.csv", ["r", "mean_density"],
               zip(dg.r, np.mean(np.abs(wave.psi) ** 2, axis=1)))
    np.save(out / "gp2d_field.npy", wave.psi)
    _write_json(out / "gp2d.json", record)
    return record


def run_verify_all(config: ExperimentConfig) -> dict:
    """Full chain with one verdict record of every acceptance metric."""
    regime, tf, geo, grid, omega, state, scan = _solve_chain(config)
    profile = vcost.cost_profile(state, tf)
    verdict: dict = {
        **_provenance(config, regime),
        "identity_checks": {},
        "trend_values": {},
    }
    ids = verdict["identity_checks"]
    trends = verdict["trend_values"]

    from .thomas_fermi import tf_energy_quadrature, tf_mass_quadrature
    ids["tf_energy_quadrature_rel"] = abs(
        tf_energy_quadrature(tf) - tf.e_tf) / abs(tf.e_tf)
    ids["tf_mass_error"] = abs(tf_mass_quadrature(tf) - 1.0)
    ids["gv_residual"] = state.residual_norm
    ids["gv_mass_error"] = abs(state.mass() - 1.0)
    trends["omega_ratio"] = omega * 3.0 * math.sqrt(math.pi) * regime.epsilon / 2.0
    trends["compatibility"] = vgv.compatibility_integral(state, regime)

    weight = velectro.WeightField.from_state(state)
    supercritical = math.isnan(profile.r_star) or profile.h_at_rstar >= 0.0
    if not supercritical:
        i_star = velectro.ring_energy(weight, profile.r_star, geo.r_less)
        number = velectro.optimal_vortex_number(
            regime, profile.h_at_rstar, i_star, geo.width_annulus)
        verdict["cost"] = profile.as_dict()
        verdict["i_star"] = i_star
        verdict["vortex_number"] = number.as_dict()
        dg, pg, trial = _build_trial(config, regime, tf, geo, state, profile,
                                     i_star, number)
        report = vtrial.trial_energy_report(
            trial, profile, i_star,
            f_at_rstar=float(profile.F(profile.r_star)),
            g2_at_rstar=float(state.g_at(profile.r_star)) ** 2)
        verdict["trial"] = report.as_dict()
        ids["trial_mass_error"] = abs(trial.mass - 1.0)
        ids["trial_core_windings"] = list(trial.core_windings)
    else:
        trial = None
        i_star = math.nan

    grids = vgp2d.cascade_grids(regime, geo.r_less, vtrial.core_scale(regime),
                                r_star=None if supercritical
                                else profile.r_star,
                                cells_per_core=config.cells_per_core)
    dg = grids[-1]
    rng = np.random.default_rng(config.seed)
    seed_field = vgp2d.giant_vortex_seed(state, grids[0], noise_amplitude=0.05,
                                         rng=rng)
    candidates = [vgp2d.minimize_gp_cascade(
        regime, grids, seed_field, res_tol=config.res_tol,
        max_iter=config.max_iter, max_seconds=config.max_seconds,
        seed_label=f"giant+noise[{config.seed}]")]
    if trial is not None:
        embedded = vgp2d.embed_annulus_field(trial.psi, dg)
        candidates.append(vgp2d.minimize_gp(
            regime, dg, embedded, res_tol=config.res_tol,
            max_iter=config.max_iter, max_seconds=config.max_seconds,
            seed_label="trial"))
    wave = min(candidates, key=lambda w: w.energy)
    verdict["gp2d"] = {w.seed: w.as_dict() for w in candidates}
    verdict["gp2d"]["best"] = wave.seed

    psi_giant = vgp2d.giant_vortex_seed(state, dg)
    ops = vgp2d._DiscOperators(regime, dg)
    e_giant_2d = ops.energy(ops.normalize(psi_giant))
    verdict["e_giant_2d"] = e_giant_2d
    verdict["e_numeric"] = wave.energy
    if trial is not None:
        embedded = ops.normalize(vgp2d.embed_annulus_field(trial.psi, dg))
        e_trial_2d = ops.energy(embedded)
        verdict["e_trial_2d"] = e_trial_2d
        ids["variational_inequality"] = bool(wave.energy <= e_trial_2d)
        gap = e_giant_2d - wave.energy
        correction = profile.h_at_rstar**2 / (4.0 * i_star)
        trends["sandwich_margin"] = gap / correction - 1.0
        trends["energy_correction"] = correction

    u = vgp2d.reduced_field(wave, state)
    apg = vgp2d.annulus_polar_grid(dg)
    data = vgp2d.detect_vortices(u, apg, geo.r_bulk, regime)
    verdict["vortices"] = data.as_dict()
    if not supercritical:
        comparison = vgp2d.vorticity_comparison(
            data, profile.h_at_rstar, i_star, profile.r_star, state)
        verdict["comparison"] = comparison.as_dict()
        trends["dual_norm_ratio"] = comparison.ratio_intrinsic
    alpha = 2.0 * math.log(regime.log_eps) / regime.log_eps
    cells = vgp2d.cell_diagnostics(u, state, apg, alpha)
    verdict["cells"] = cells.as_dict()
    ereduced = vtrial.reduced_energy_field(u, state, apg)
    verdict["reduced_energy"] = ereduced
    verdict["decoupling_residual"] = wave.energy - state.energy - ereduced
    _write_json(Path(config.out) / "verdict.json", verdict)
    return verdict


def run_sweep(config: ExperimentConfig) -> dict:
    eps_grid = config.sweep_epsilon or (config.epsilon,)
    om1_grid = config.sweep_omega1 or (config.omega1,)
    points = [(e, o) for e in eps_grid for o in om1_grid]
    if len(points) < 2:
        raise VortexRingError("sweep needs at least 2 grid points")
    rows = []
    records = {}
    for eps, om1 in points:
        sub = replace(config, epsilon=eps, omega1=om1, pipeline="verify-all",
                      out=str(Path(config.out) / f"eps{eps}_om1{om1}"))
        key = f"eps={eps},omega1={om1}"
        try:
            rec = run_verify_all(sub)
            records[key] = rec
            vort = rec.get("vortices", {})
            rows.append([
                eps, om1, "ok",
                rec["trend_values"].get("omega_ratio"),
                rec["trend_values"].get("sandwich_margin"),
                rec["trend_values"].get("dual_norm_ratio"),
                vort.get("total_degree"),
            ])
        except VortexRingError as exc:
            records[key] = {"error": str(exc)}
            rows.append([eps, om1, f"failed: {exc}", None, None, None, None])
    _write_csv(Path(config.out) / "sweep.csv",
               ["epsilon", "omega1", "status", "omega_ratio",
                "sandwich_margin", "dual_norm_ratio", "total_degree"],
               rows)
    record = {"config": config.as_dict(), "points": records}
    _write_json(Path(config.out) / "sweep.json", record)
    return record


PIPELINES = {
    "tf": run_tf,
    "giant-vortex": run_giant_vortex,
    "cost": run_cost,
    "electro": run_electro,
    "trial": run_trial,
    "gp2d": run_gp2d,
    "verify-all": run_verify_all,
    "sweep": run_sweep,
}


def run(config: ExperimentConfig) -> dict:
    """Execute the configured pipeline; raises VortexRingError on failure."""
    if config.pipeline not in PIPELINES:
        raise VortexRingError(f"unknown pipeline {config.pipeline!r}")
    return PIPELINES[config.pipeline](config)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vortexring",
        description="Vortex rings near the giant-vortex transition: "
                    "numerical pipelines",
    )
    sub = parser.add_subparsers(dest="pipeline", required=True)
    for name in PIPELINES:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--epsilon", type=float)
        p.add_argument("--omega1", type=float)
        p.add_argument("--omega", type=float)
        p.add_argument("--grid-r", type=int, dest="grid_r")
        p.add_argument("--grid-theta", type=int, dest="grid_theta")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--trials", type=int)
        p.add_argument("--max-iter", type=int, dest="max_iter")
        p.add_argument("--res-tol", type=float, dest="res_tol")
        p.add_argument("--workers", type=int)
        if name == "sweep":
            p.add_argument("--sweep-epsilon", dest="sweep_epsilon",
                           help="comma list of epsilon values")
            p.add_argument("--sweep-omega1", dest="sweep_omega1",
                           help="comma list of Omega_1 values")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fields = {}
    if getattr(args, "config", None):
        fields.update(read_config_file(args.config))
    for key in ("epsilon", "omega1", "omega", "grid_r", "grid_theta", "seed",
                "out", "trials", "max_iter", "res_tol", "workers"):
        val = getattr(args, key, None)
        if val is not None:
            fields[key] = val
    for key in ("sweep_epsilon", "sweep_omega1"):
        val = getattr(args, key, None)
        if val is not None:
            fields[key] = tuple(float(v) for v in str(val).split(","))
    fields["pipeline"] = args.pipeline
    try:
        config = ExperimentConfig(**fields)
    except (TypeError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        run(config)
    except VortexRingError as exc:
        print(f"{config.pipeline} failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
