"""Command-line entry point: reproducible experiment pipeline.

Subcommands:
    heteroclinic : compute the 1D minimizing connections (or the well report
                   for scalar front problems) and their spectral data
    constants    : estimate the constants ledger and check the assumptions
    solve-tw     : bisection for the threshold speed and the wave profile
    evolve       : parabolic time-stepping cross-check of the speed
    verify       : post-hoc checks (integrity, rate fits, sup-norm limits)

Every command takes --config and --out; outputs land in one directory per
run named by the config hash.  Exit codes: 0 ok, 2 config/integrity error,
3 convergence failure, 4 assumption violation (without override).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, constants as consts
from .config import (ConfigError, load_config, run_dir, update_manifest_files,
                     verify_checksums, write_manifest)
from .energy import profile_residual, slice_energies
from .grids import Curve1D, Grid1D, Profile2D
from .heteroclinic import (ConvergenceError, HeteroclinicResult, SpectralReport,
                           fix_phase, minimize_heteroclinic,
                           minimize_local_heteroclinic, project_nearest_translate)
from .landscape import CurveFamilyLandscape, PointLandscape
from .potentials import PotentialSpec, WellPair, potential_from_config
from .tw import (SolverError, TravelingWaveProblem, entry_times,
                 equipartition_residual, find_speed, no_oscillation_check,
                 t_star_bound)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_ASSUMPTION = 4


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=1))


def _base_potential(cfg: dict) -> PotentialSpec:
    pot_cfg = cfg["potential"]
    return potential_from_config(pot_cfg["name"], pot_cfg.get("params", {}))


def _wells(cfg: dict) -> WellPair:
    return WellPair(np.array(cfg["wells"]["minus"], float),
                    np.array(cfg["wells"]["plus"], float))


def _x2_grid(cfg: dict) -> Grid1D:
    return Grid1D(cfg["grid"]["L2"], cfg["grid"]["n2"])


def _x1_grid(cfg: dict) -> Grid1D:
    return Grid1D(cfg["grid"]["L1"], cfg["grid"]["n1"])


def _front_init(grid: Grid1D, wells: WellPair, width: float,
                offaxis: float, component: int) -> Curve1D:
    t = grid.nodes
    s = 0.5 * (np.tanh(t / width) + 1.0)
    vals = wells.sigma_minus[None, :] * (1 - s[:, None]) + \
        wells.sigma_plus[None, :] * s[:, None]
    if offaxis and vals.shape[1] > component:
        vals[:, component] += offaxis / np.cosh(t / 2.0)
    vals[0] = wells.sigma_minus
    vals[-1] = wells.sigma_plus
    return Curve1D(grid, vals, wells.sigma_minus, wells.sigma_plus)


def _resolve_bump(cfg: dict, base: PotentialSpec,
                  anchor: Curve1D) -> tuple[np.ndarray, float]:
    bump_cfg = cfg.get("heteroclinic", {}).get("bump", {})
    center = bump_cfg.get("center", "auto")
    radius = bump_cfg.get("radius", "auto")
    if center == "auto" or center is None:
        dists = np.min(np.linalg.norm(anchor.values[:, None, :]
                                      - base.wells[None, :, :], axis=2), axis=1)
        center = anchor.values[int(np.argmax(dists))]
    else:
        center = np.asarray(center, float)
    if radius == "auto" or radius is None:
        d = float(np.min(np.linalg.norm(base.wells - center, axis=1)))
        radius = d / 4.0
    return np.asarray(center, float), float(radius)


def _perturbed_potential(cfg: dict, base: PotentialSpec, rdir: Path) -> PotentialSpec:
    """Rebuild the bump-perturbed potential from resolved parameters written
    by the heteroclinic stage."""
    resolved = json.loads((rdir / "heteroclinic.json").read_text())
    bump = resolved.get("bump")
    if bump is None:
        return base
    from .potentials import make_bump_perturbation
    return make_bump_perturbation(base, bump["delta"],
                                  np.array(bump["center"]), bump["radius"])


def _load_heteroclinics(cfg: dict, rdir: Path):
    """Reload the stage outputs of cmd_heteroclinic for a planar problem."""
    base = _base_potential(cfg)
    pot = _perturbed_potential(cfg, base, rdir)
    meta = json.loads((rdir / "heteroclinic.json").read_text())
    q_minus = Curve1D.from_csv(rdir / "connection_minus.csv")
    q_plus = Curve1D.from_csv(rdir / "connection_plus.csv")

    def unpack(tag, curve):
        d = meta[tag]
        spec = d.get("spectral")
        report = None
        if spec is not None:
            report = SpectralReport(np.array(spec["eigenvalues"]),
                                    spec["kernel_alignment"], spec["lambda2"])
        return HeteroclinicResult(curve, d["energy"], d["kind"],
                                  d["gradient_norm"], d["phase_convention"],
                                  d["iterations"], spectral=report)

    return pot, base, unpack("minus", q_minus), unpack("plus", q_plus)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_heteroclinic(cfg: dict, out_root: Path) -> int:
    rdir = run_dir(cfg, out_root)
    write_manifest(cfg, rdir)
    base = _base_potential(cfg)
    wells = _wells(cfg)
    het = cfg.get("heteroclinic", {})
    if cfg["problem"] == "front1d":
        hm = base.hess(wells.sigma_minus)
        hp = base.hess(wells.sigma_plus)
        report = {
            "problem": "front1d",
            "levels": {"minus": float(base.eval(wells.sigma_minus)),
                       "plus": float(base.eval(wells.sigma_plus))},
            "hessian_eigenvalues": {
                "minus": [float(x) for x in np.linalg.eigvalsh(hm)],
                "plus": [float(x) for x in np.linalg.eigvalsh(hp)],
            },
        }
        _write_json(rdir / "heteroclinic.json", report)
        update_manifest_files(rdir, ["heteroclinic.json"])
        return EXIT_OK

    grid2 = _x2_grid(cfg)
    tol = het.get("tol", 1e-7)
    max_iter = het.get("max_iter", 30000)
    width = het.get("init_width", 1.5)
    offaxis = het.get("init_offaxis", 0.6)
    comp = het.get("reflect_component", 1)
    init = _front_init(grid2, wells, width, offaxis, comp)
    try:
        q_base = minimize_heteroclinic(base, wells, init, tol=tol, max_iter=max_iter)
    except ConvergenceError as exc:
        print(f"heteroclinic stage failed: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    anchor_vals = q_base.curve.values.copy()
    anchor_vals[:, comp] *= -1.0
    anchor_curve = fix_phase(Curve1D(grid2, anchor_vals, wells.sigma_minus,
                                     wells.sigma_plus))
    bump_cfg = het.get("bump")
    resolved_bump = None
    if bump_cfg:
        center, radius = _resolve_bump(cfg, base, anchor_curve)
        from .potentials import make_bump_perturbation
        pot = make_bump_perturbation(base, bump_cfg["delta"], center, radius)
        resolved_bump = {"delta": float(bump_cfg["delta"]),
                         "center": [float(x) for x in center],
                         "radius": float(radius)}
    else:
        pot = base
    try:
        q_minus = minimize_heteroclinic(pot, wells, q_base.curve,
                                        tol=tol, max_iter=max_iter)
        sep = project_nearest_translate(anchor_curve, q_minus.curve, norm="L2")[1]
        local_radius = het.get("bump", {}).get("local_radius", sep / 4.0)
        from .energy import energy_1d
        anchor_res = HeteroclinicResult(anchor_curve, energy_1d(anchor_curve, pot),
                                        "local", q_base.gradient_norm,
                                        q_base.phase_convention, 0)
        if bump_cfg:
            q_plus = minimize_local_heteroclinic(pot, anchor_res, local_radius,
                                                 tol=tol, max_iter=max_iter)
        else:
            q_plus = minimize_heteroclinic(pot, wells, anchor_curve,
                                           tol=tol, max_iter=max_iter)
            q_plus = HeteroclinicResult(q_plus.curve, q_plus.energy, "local",
                                        q_plus.gradient_norm,
                                        q_plus.phase_convention,
                                        q_plus.iterations, q_plus.spectral)
    except ConvergenceError as exc:
        print(f"heteroclinic stage failed: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    q_minus.curve.to_csv(rdir / "connection_minus.csv")
    q_plus.curve.to_csv(rdir / "connection_plus.csv")
    meta = {"problem": "planar2d", "minus": q_minus.to_dict(),
            "plus": q_plus.to_dict(), "bump": resolved_bump,
            "base_energy": float(q_base.energy),
            "local_radius": float(local_radius)}
    _write_json(rdir / "heteroclinic.json", meta)
    update_manifest_files(rdir, ["heteroclinic.json", "connection_minus.csv",
                                 "connection_minus.csv.json",
                                 "connection_plus.csv",
                                 "connection_plus.csv.json"])
    return EXIT_OK


def _build_landscape(cfg: dict, rdir: Path):
    wells = _wells(cfg)
    if cfg["problem"] == "front1d":
        base = _base_potential(cfg)
        return PointLandscape(base, wells.sigma_minus, wells.sigma_plus), base
    pot, base, q_minus, q_plus = _load_heteroclinics(cfg, rdir)
    return CurveFamilyLandscape(pot, q_minus, q_plus), pot


def cmd_constants(cfg: dict, out_root: Path) -> int:
    rdir = run_dir(cfg, out_root)
    ccfg = cfg.get("constants", {})
    seed = ccfg.get("seed", cfg.get("seeds", {}).get("master", 0))
    safety = ccfg.get("safety_factor", 0.5)
    try:
        land, pot = _build_landscape(cfg, rdir)
    except FileNotFoundError:
        print("constants stage requires heteroclinic artifacts", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if isinstance(land, PointLandscape):
            ledger = consts.compute_ledger(land, seed=seed, safety_factor=safety)
        else:
            ledger = consts.compute_ledger(
                land, seed=seed, safety_factor=safety,
                lambda2_minus=land.q_minus.spectral.lambda2 if land.q_minus.spectral else None,
                lambda2_plus=land.q_plus.spectral.lambda2 if land.q_plus.spectral else None)
    except consts.EstimationError as exc:
        print(f"constants stage failed: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    report = consts.check_assumptions(ledger, land,
                                      np.random.default_rng(seed + 1))
    ledger.to_json(rdir / "ledger.json")
    _write_json(rdir / "assumptions.json", report.to_dict())
    update_manifest_files(rdir, ["ledger.json", "assumptions.json"])
    return EXIT_OK


def _solver_problem(cfg: dict, rdir: Path):
    land, pot = _build_landscape(cfg, rdir)
    ledger_path = rdir / "ledger.json"
    eps_m = eps_p = alpha_star = None
    r_m = r_p = None
    if ledger_path.exists():
        led = json.loads(ledger_path.read_text())
        r_m = led["rho0_minus"] / 2.0
        r_p = led["rho0_plus"] / 2.0
        eps_m = led["e_max_effective"]
        eps_p = led["e_max_plus_effective"]
        alpha_star = led["alpha_star"]
    else:
        sep = land.family_separation()
        r_m = r_p = sep / 5.0
    scfg = cfg.get("solver", {})
    problem = TravelingWaveProblem(
        land, _x1_grid(cfg), r_m, r_p, eps_minus=eps_m, eps_plus=eps_p,
        alpha_star=alpha_star,
        tol=scfg.get("tol", 1e-8), max_iter=scfg.get("max_iter", 6000))
    return problem, pot


def cmd_solve_tw(cfg: dict, out_root: Path, override_assumptions: bool = False) -> int:
    rdir = run_dir(cfg, out_root)
    assum_path = rdir / "assumptions.json"
    if assum_path.exists():
        assum = json.loads(assum_path.read_text())
        if not assum["perturbation_ok"] and not override_assumptions:
            print("assumption violation: perturbation bound fails "
                  "(rerun with --override-assumptions to proceed)", file=sys.stderr)
            return EXIT_ASSUMPTION
    try:
        problem, pot = _solver_problem(cfg, rdir)
    except FileNotFoundError:
        print("solve-tw requires heteroclinic artifacts", file=sys.stderr)
        return EXIT_CONFIG
    scfg = cfg.get("solver", {})
    bracket = tuple(scfg.get("bracket", [0.05, 1.0]))
    try:
        result = find_speed(problem, bracket, tol_c=scfg.get("tol_c", 1e-3),
                            T0=scfg.get("T0"), t_ref=scfg.get("t_ref", 0.0))
    except (SolverError, OverflowError) as exc:
        print(f"solve-tw failed: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    minimum = result.minimum
    land = problem.landscape
    diag = {
        "entry_times": {"t_minus": minimum.t_minus, "t_plus": minimum.t_plus},
        "t_schedule": [float(x) for x in result.t_schedule],
        "oscillation_free": bool(no_oscillation_check(minimum, problem)),
        "equipartition_max_residual": float(np.max(np.abs(
            equipartition_residual(minimum, problem)))),
    }
    if problem.alpha_star is not None and problem.alpha_star > 0:
        diag["t_star_bound"] = t_star_bound(result.c_star, land.a, problem.alpha_star)
        if minimum.t_minus is not None:
            diag["entry_gap_within_bound"] = bool(
                minimum.t_plus - minimum.t_minus <= diag["t_star_bound"])
    _write_json(rdir / "speed_result.json", result.to_dict())
    _write_json(rdir / "diagnostics.json", diag)
    if isinstance(land, PointLandscape):
        prof = Curve1D(problem.grid1, minimum.states, land.sigma_minus, land.sigma_plus)
        prof.to_csv(rdir / "profile.csv")
    else:
        prof = Profile2D(problem.grid1, land.grid2,
                         minimum.states.reshape(problem.grid1.n_points,
                                                land.n2, land.k),
                         land.sigma_minus, land.sigma_plus)
        prof.to_csv(rdir / "profile.csv")
    update_manifest_files(rdir, ["speed_result.json", "diagnostics.json",
                                 "profile.csv", "profile.csv.json"])
    return EXIT_OK


def cmd_evolve(cfg: dict, out_root: Path) -> int:
    from .evolve import measure_front_speed, measure_front_speed_2d
    rdir = run_dir(cfg, out_root)
    ecfg = cfg.get("evolve", {})
    dt = ecfg.get("dt", 0.01)
    horizon = ecfg.get("horizon", 40.0)
    wells = _wells(cfg)
    grid1 = _x1_grid(cfg)
    if cfg["problem"] == "front1d":
        base = _base_potential(cfg)
        t = grid1.nodes
        s = 0.5 * (np.tanh(t / 1.5) + 1.0)
        init = wells.sigma_minus[None, :] * (1 - s[:, None]) + \
            wells.sigma_plus[None, :] * s[:, None]
        result = measure_front_speed(base, (wells.sigma_minus, wells.sigma_plus),
                                     init, grid1, horizon, dt=dt)
    else:
        try:
            pot, base, q_minus, q_plus = _load_heteroclinics(cfg, rdir)
            prof = Profile2D.from_csv(rdir / "profile.csv")
        except FileNotFoundError:
            print("planar evolve requires heteroclinic + solve artifacts",
                  file=sys.stderr)
            return EXIT_CONFIG
        result = measure_front_speed_2d(pot, prof.values, prof.values.copy(),
                                        prof.x1_grid, prof.x2_grid, horizon,
                                        dt=dt)
    np.savetxt(rdir / "front_positions.csv",
               np.column_stack([result.times, result.front_positions]),
               delimiter=",", header="t,x_front", comments="")
    _write_json(rdir / "evolution.json", result.to_dict())
    update_manifest_files(rdir, ["front_positions.csv", "evolution.json"])
    return EXIT_OK


def cmd_verify(cfg: dict, out_root: Path) -> int:
    rdir = run_dir(cfg, out_root)
    bad = verify_checksums(rdir)
    if bad:
        print(f"integrity error (checksum mismatch): {', '.join(sorted(bad))}",
              file=sys.stderr)
        return EXIT_CONFIG
    try:
        problem, pot = _solver_problem(cfg, rdir)
        speed = json.loads((rdir / "speed_result.json").read_text())
    except FileNotFoundError:
        print("verify requires solve-tw artifacts", file=sys.stderr)
        return EXIT_CONFIG
    land = problem.landscape
    c_star = speed["c_star"]
    report = {"c_star": c_star, "rate_fits": {}, "uniform": None}
    if isinstance(land, PointLandscape):
        prof = Curve1D.from_csv(rdir / "profile.csv")
        states = prof.values
        grid1 = prof.grid
    else:
        prof2 = Profile2D.from_csv(rdir / "profile.csv")
        states = prof2.values.reshape(prof2.x1_grid.n_points, -1)
        grid1 = prof2.x1_grid
    t = grid1.nodes
    d_minus, _, _ = land.nearest(states, "minus")
    d_plus, _, _ = land.nearest(states, "plus")
    try:
        fit_p = analysis.fit_exponential_rate(t, d_plus, "plus_infinity",
                                              predicted=c_star)
        report["rate_fits"]["plus_infinity"] = fit_p.to_dict()
    except analysis.RateFitError as exc:
        report["rate_fits"]["plus_infinity"] = {"error": str(exc)}
    conv_ok = False
    assum_path = rdir / "assumptions.json"
    mu_minus = None
    if assum_path.exists() and (rdir / "ledger.json").exists():
        conv_ok = json.loads(assum_path.read_text())["convergence_ok"]
        mu_minus = json.loads((rdir / "ledger.json").read_text())["mu_minus"]
    if conv_ok:
        try:
            fit_m = analysis.fit_exponential_rate(t, d_minus, "minus_infinity",
                                                  predicted=mu_minus - c_star)
            report["rate_fits"]["minus_infinity"] = fit_m.to_dict()
        except analysis.RateFitError as exc:
            report["rate_fits"]["minus_infinity"] = {"error": str(exc)}
    else:
        report["rate_fits"]["minus_infinity"] = {"skipped": "convergence assumption not verified"}
    if not isinstance(land, PointLandscape):
        end_dists = {"first_slice_to_minus": float(d_minus[0]),
                     "last_slice_to_plus": float(d_plus[-1])}
        vals = prof2.values
        row_lo = float(np.max(np.linalg.norm(vals[:, 0] - land.sigma_minus, axis=-1)))
        row_hi = float(np.max(np.linalg.norm(vals[:, -1] - land.sigma_plus, axis=-1)))
        report["uniform"] = analysis.uniform_convergence_check(
            end_dists, {"x2_bottom": row_lo, "x2_top": row_hi})
        report["residual"] = float(profile_residual(prof2, c_star, pot))
        report["slice_energies_span"] = [float(np.min(slice_energies(prof2, pot))),
                                         float(np.max(slice_energies(prof2, pot)))]
    _write_json(rdir / "verification.json", report)
    update_manifest_files(rdir, ["verification.json"])
    return EXIT_OK


# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hetwave",
        description="heteroclinic traveling waves: variational solver and checks")
    parser.add_argument("--config", required=True, help="path to the JSON config")
    parser.add_argument("--out", default="runs", help="output root directory")
    parser.add_argument("--override-assumptions", action="store_true",
                        help="attempt solves even when the perturbation bound fails")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for independent probes")
    parser.add_argument("command",
                        choices=["heteroclinic", "constants", "solve-tw",
                                 "evolve", "verify"])
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_root = Path(args.out)
    if args.command == "heteroclinic":
        return cmd_heteroclinic(cfg, out_root)
    if args.command == "constants":
        return cmd_constants(cfg, out_root)
    if args.command == "solve-tw":
        return cmd_solve_tw(cfg, out_root, args.override_assumptions)
    if args.command == "evolve":
        return cmd_evolve(cfg, out_root)
    return cmd_verify(cfg, out_root)


if __name__ == "__main__":
    sys.exit(main())
