"""Scenario runners, artifact invariants and the built-in catalog.

Each kind writes CSV artifacts into an output directory. Invariants are
evaluated from those files and the resolved config only, so ``check`` can
repeat them on a finished run without recomputing anything.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from . import __version__
from . import io as aio
from .bohmian import (
    FLAG_EXITED,
    VortexSceneSpec,
    free_packet_trajectory,
    integrate_bundle,
    sample_seeds,
    stagnation_points,
    streamlines_around_vortex,
)
from .config import ScenarioConfig, parse_config
from .core import Grid, PhysicalConstants, l2_norm, to_polar
from .core.madelung import continuity_residual, hamilton_jacobi_residual, pressure_terms, quantum_potential
from .schrodinger import EvolutionConfig, PotentialSpec, evolve, free_packet, gaussian_packet, make_stepper
from .torus import (
    TorusShape,
    double_cover_rotation,
    helicoidal_ring,
    mesh_measures,
    mesh_torus,
    reversal_loci,
    torus_measures,
)
from .vortex import (
    ViscosityModel,
    core_radius,
    core_xi,
    evolve_radial_vorticity,
    long_time_average_profile,
    omega_profile,
    radial_l2_error,
    sigma_accumulate,
    v_profile,
    velocity_from_vorticity,
)

MANIFEST = "manifest.json"
CORE_RATIO = 2.24181


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""


def _check(name, value, tol, detail="", lower=False) -> Check:
    value = float(value)
    ok = bool(np.isfinite(value) and (value >= tol if lower else value <= tol))
    return Check(name, ok, value, float(tol), detail)


# -- evolve / trajectories -----------------------------------------------------------


def _grid(p: dict, scale: int = 1) -> Grid:
    g = p["grid"]
    n = g["n"] * scale
    if g["dim"] == 1:
        return Grid.line(g["lo"], g["hi"], n, g["boundary"])
    return Grid.square(g["lo"], g["hi"], n, g["boundary"])


def _constants(p: dict) -> PhysicalConstants:
    return PhysicalConstants(p["constants"]["m"], p["constants"]["hbar"])


def _evolve_level(p: dict, scale: int):
    grid = _grid(p, scale)
    C = _constants(p)
    pot = PotentialSpec(p["potential"]["kind"], p["potential"]["params"])
    cfg = EvolutionConfig(p["dt"] / scale, p["steps"] * scale, p["scheme"], p["snapshot_stride"] * scale)
    pk = p["packet"]
    psi0 = gaussian_packet(grid, pk["sigma0"], pk["center"], pk["k0"])
    snaps = evolve(psi0, grid, pot, cfg, C)
    return grid, C, pot, cfg, snaps


def _residual_rows(grid, C, pot, cfg, snaps, method):
    U = pot.evaluate(grid, C)
    step = make_stepper(grid, U, C, cfg)
    rows = {"t": [], "hj_l2": [], "continuity_l2": []}
    for wf in snaps:
        nxt = to_polar(step(wf.psi), grid, C, t=wf.t + cfg.dt)
        hj = hamilton_jacobi_residual(wf, U, C, wf_next=nxt, dt=cfg.dt, method=method)
        cr = continuity_residual(wf, nxt, cfg.dt, C, method=method)
        rows["t"].append(wf.t + 0.5 * cfg.dt)
        rows["hj_l2"].append(l2_norm(hj.residual, grid))
        rows["continuity_l2"].append(l2_norm(cr.rho_form, grid))
    return rows


def _wave_columns(grid: Grid, snaps) -> dict:
    keep = snaps if grid.dim == 1 else [snaps[0], snaps[-1]]
    X = grid.mesh()
    cols = {"t": [], "x": []}
    if grid.dim == 2:
        cols["y"] = []
    cols.update({"re_psi": [], "im_psi": [], "rho": [], "S": []})
    for wf in keep:
        n = wf.psi.size
        cols["t"].append(np.full(n, wf.t))
        cols["x"].append(X[0].ravel())
        if grid.dim == 2:
            cols["y"].append(X[1].ravel())
        cols["re_psi"].append(wf.psi.real.ravel())
        cols["im_psi"].append(wf.psi.imag.ravel())
        cols["rho"].append(wf.rho.ravel())
        cols["S"].append(wf.S.ravel())
    return {k: np.concatenate(v) for k, v in cols.items()}


def _potential_columns(grid: Grid, C, wf) -> dict:
    method = "spectral" if grid.periodic else "fd"
    Q = quantum_potential(wf.rho, grid, C, method)
    P = pressure_terms(wf.rho, grid, C, method)
    cols = {"x": grid.mesh()[0].ravel()}
    if grid.dim == 2:
        cols["y"] = grid.mesh()[1].ravel()
    cols.update({
        "rho": wf.rho.ravel(),
        "Q": np.ma.filled(Q, np.nan).ravel(),
        "p1": P.p1.ravel(),
        "p2": P.p2.ravel(),
    })
    return cols


def _free_packet_at_rest(p: dict) -> bool:
    pk = p["packet"]
    return (p["potential"]["kind"] == "free" and p["grid"]["dim"] == 1 and pk["center"] == 0 and pk["k0"] == 0
            and p["grid"]["boundary"] == "periodic")


def run_evolve(cfg: ScenarioConfig, out: Path) -> dict:
    p = cfg.params
    artifacts = {}
    levels = {"level": [], "n": [], "dt": [], "t": [], "hj_l2": [], "continuity_l2": []}
    for level in range(p["convergence_levels"]):
        scale = 2**level
        grid, C, pot, ecfg, snaps = _evolve_level(p, scale)
        rows = _residual_rows(grid, C, pot, ecfg, snaps, p["derivatives"])
        k = len(rows["t"])
        levels["level"] += [level] * k
        levels["n"] += [grid.n[0]] * k
        levels["dt"] += [ecfg.dt] * k
        for key in ("t", "hj_l2", "continuity_l2"):
            levels[key] += rows[key]
        if level == 0:
            artifacts["wave.csv"] = aio.write_csv(out / "wave.csv", _wave_columns(grid, snaps))
            norms = [grid.integrate(s.rho) for s in snaps]
            artifacts["norm.csv"] = aio.write_csv(out / "norm.csv", {"t": [s.t for s in snaps], "norm": norms})
            artifacts["potential.csv"] = aio.write_csv(out / "potential.csv", _potential_columns(grid, C, snaps[0]))
    artifacts["residuals.csv"] = aio.write_csv(out / "residuals.csv", levels)
    return artifacts


def run_trajectories(cfg: ScenarioConfig, out: Path) -> dict:
    p = cfg.params
    grid, C, pot, ecfg, snaps = _evolve_level(p, 1)
    seeds = sample_seeds(snaps[0].rho, grid, p["seeds"]["n"], p["seeds"]["mode"])
    bundle = integrate_bundle(snaps, seeds, C, substeps=p["substeps"], method=p["derivatives"])
    n, nt, dim = bundle.paths.shape
    cols = {"seed_index": np.repeat(np.arange(n), nt), "t": np.tile(bundle.times, n)}
    for ax, name in enumerate("xy"[:dim]):
        cols[name] = bundle.paths[:, :, ax].ravel()
    for ax, name in enumerate(["vx", "vy"][:dim]):
        cols[name] = bundle.velocities[:, :, ax].ravel()
    cols["flag"] = bundle.flags.ravel()
    artifacts = {"trajectories.csv": aio.write_csv(out / "trajectories.csv", cols)}
    norms = [grid.integrate(s.rho) for s in snaps]
    artifacts["norm.csv"] = aio.write_csv(out / "norm.csv", {"t": [s.t for s in snaps], "norm": norms})
    return artifacts


def _norm_check(out: Path) -> Check:
    tab = aio.read_csv(out / "norm.csv")
    return _check("unitarity", np.max(np.abs(1.0 - tab["norm"])), 1e-9, "max |1 - norm| over snapshots")


def check_evolve(cfg: ScenarioConfig, out: Path) -> list[Check]:
    p = cfg.params
    checks = [_norm_check(out)]
    res = aio.read_csv(out / "residuals.csv")
    levels = np.unique(res["level"]).astype(int)
    for a, b in zip(levels[:-1], levels[1:]):
        for key, label in (("hj_l2", "hamilton_jacobi"), ("continuity_l2", "continuity")):
            ra = np.sqrt(np.mean(res[key][res["level"] == a] ** 2))
            rb = np.sqrt(np.mean(res[key][res["level"] == b] ** 2))
            checks.append(_check(f"{label}_order_{a}{b}", np.log2(ra / rb), 1.8,
                                 f"observed order log2({ra:.3e}/{rb:.3e}) under halved dx and dt", lower=True))
    pot = aio.read_csv(out / "potential.csv")
    s = p["packet"]["sigma0"]
    C = _constants(p)
    if p["grid"]["dim"] == 1 and p["packet"]["k0"] == 0:
        x = pot["x"] - p["packet"]["center"]
        at0 = np.flatnonzero(np.abs(x) < 1e-12)
        if len(at0):
            ref = C.hbar**2 / (4 * C.m * s**2)
            checks.append(_check("quantum_potential_origin", abs(pot["Q"][at0[0]] - ref) / ref, 1e-6,
                                 "relative error of Q at the packet centre vs hbar^2/4 m s^2"))
        core = np.abs(x) < 4 * s
        gap = (pot["p1"] + pot["p2"]) / pot["rho"] - pot["Q"]
        checks.append(_check("pressure_identity", np.max(np.abs(gap[core])), 1e-9,
                             "max |(P1+P2)/rho - Q| within four widths of the centre"))
    if _free_packet_at_rest(p):
        wave = aio.read_csv(out / "wave.csv")
        T = wave["t"].max()
        last = wave["t"] == T
        g = _grid(p)
        exact = free_packet(g, s, T, C)
        err = np.max(np.abs(wave["re_psi"][last] + 1j * wave["im_psi"][last] - exact))
        checks.append(_check("exact_free_packet", err, 1e-3, "max |psi - closed form| at the final time"))
    return checks


def check_trajectories(cfg: ScenarioConfig, out: Path) -> list[Check]:
    p = cfg.params
    checks = [_norm_check(out)]
    tab = aio.read_csv(out / "trajectories.csv")
    exited = (tab["flag"].astype(int) & FLAG_EXITED) != 0
    checks.append(_check("no_exits", float(exited.sum()), 0.0, "samples flagged as having left the domain"))
    if _free_packet_at_rest(p):
        C = _constants(p)
        T = tab["t"].max()
        x0 = tab["x"][tab["t"] == 0.0]
        xT = tab["x"][tab["t"] == T]
        exact = free_packet_trajectory(x0, T, p["packet"]["sigma0"], C)
        rel = np.max(np.abs(xT - exact) / np.abs(exact))
        checks.append(_check("spread_law", rel, 1e-3, f"max relative deviation from x0 sqrt(1+(t/tau)^2) at t={T:g}"))
    return checks


# -- vortex ----------------------------------------------------------------------------


def _viscosity(cfg: ScenarioConfig) -> ViscosityModel:
    p = cfg.params
    m = p["model"]
    return ViscosityModel(m["kind"], p["sigma"], m["nu0"], m["omega"], m["amplitude"], m["correlation_time"],
                          rng_seed=cfg.seed)


def _radial_grid(p: dict) -> np.ndarray:
    return np.linspace(0.0, p["radial"]["r_max_over_sigma"] * p["sigma"], p["radial"]["n"])


def run_vortex(cfg: ScenarioConfig, out: Path) -> dict:
    p = cfg.params
    model = _viscosity(cfg)
    r = _radial_grid(p)
    sig2 = p["sigma"] ** 2
    artifacts = {}
    if p["steps"] > 0:
        hist = evolve_radial_vorticity(omega_profile(p["gamma"], sig2, r), r, model, p["dt"], p["steps"],
                                       store_every=p["store_every"])
        nt, nr = hist.omega.shape
        v = np.array([velocity_from_vorticity(w, r) for w in hist.omega])
        artifacts["profile.csv"] = aio.write_csv(out / "profile.csv", {
            "t": np.repeat(hist.t, nr),
            "r": np.tile(r, nt),
            "r_over_sigma": np.tile(r / p["sigma"], nt),
            "omega": hist.omega.ravel(),
            "v": v.ravel(),
        })
        path = model.realize(hist.t[-1])
        artifacts["sigma.csv"] = aio.write_csv(out / "sigma.csv",
                                               {"t": hist.t, "Sigma": sigma_accumulate(model, hist.t, path)})
    xi = core_xi()
    r0 = core_radius(sig2)
    best = minimize_scalar(lambda x: -v_profile(p["gamma"], sig2, x), bounds=(0.1 * r0, 3.0 * r0),
                           method="bounded", options={"xatol": 1e-12 * r0})
    artifacts["core.csv"] = aio.write_csv(out / "core.csv", {
        "Sigma": [sig2], "xi": [xi], "r0": [r0], "r0_over_sqrt_sigma": [r0 / np.sqrt(sig2)], "r0_numeric": [best.x],
    })
    a = p["average"]
    if a["horizon"] > 0:
        avg = long_time_average_profile(model, p["gamma"], r, a["horizon"], a["samples"], a["ensemble"])
        artifacts["ensemble.csv"] = aio.write_csv(out / "ensemble.csv", {
            "r": r, "r_over_sigma": r / p["sigma"], "mean_omega": avg.mean, "stderr": avg.stderr,
            "members": np.full(len(r), avg.members),
        })
    return artifacts


def check_vortex(cfg: ScenarioConfig, out: Path) -> list[Check]:
    p = cfg.params
    m = p["model"]
    sig2 = p["sigma"] ** 2
    G = p["gamma"]
    checks = []
    core = aio.read_csv(out / "core.csv")
    checks.append(_check("core_radius_ratio", abs(core["r0_over_sqrt_sigma"][0] - CORE_RATIO), 1e-4,
                         "|r0/sqrt(Sigma) - 2.24181|"))
    checks.append(_check("core_radius_maximum", abs(core["r0_numeric"][0] - core["r0"][0]) / np.sqrt(sig2), 1e-4,
                         "bisection root vs direct maximisation of v(r), in units of sqrt(Sigma)"))
    if (out / "profile.csv").exists():
        prof = aio.read_csv(out / "profile.csv")
        times = np.unique(prof["t"])
        r = prof["r"][prof["t"] == times[0]]
        om = {t: prof["omega"][prof["t"] == t] for t in times}
        first = om[times[0]]
        if m["kind"] == "zero":
            drift = max(np.max(np.abs(w - first)) for w in om.values())
            checks.append(_check("permanence", drift, 1e-12, "max |omega(t) - omega(0)| with zero viscosity"))
        elif m["kind"] == "constant":
            T = times[-1]
            Sigma = m["nu0"] * T + sig2
            err = radial_l2_error(om[T], omega_profile(G, Sigma, r), r)
            detail = f"relative L2 vs the Gaussian with Sigma={Sigma:g} at t={T:g}"
            if Sigma < 2 * sig2:
                detail += " (Sigma has not doubled yet)"
            checks.append(_check("analytic_decay", err, 1e-3, detail))
        elif m["kind"] == "cosine":
            period = 2 * np.pi / m["omega"]
            k = np.round(times / period)
            at = times[(k >= 1) & (np.abs(times - k * period) < 1e-9 * period + 0.5 * p["dt"])]
            if len(at):
                err = max(radial_l2_error(om[t], first, r) for t in at)
                checks.append(_check("period_return", err, 1e-3,
                                     f"relative L2 between omega at {len(at)} whole periods and the initial profile"))
    if (out / "ensemble.csv").exists():
        ens = aio.read_csv(out / "ensemble.csv")
        ref = omega_profile(G, sig2, ens["r"])
        if m["kind"] == "cosine":
            A = m["nu0"] / m["omega"]
            centre = G / (4.0 * np.sqrt(sig2**2 - A**2))
            checks.append(_check("time_average_centre", abs(ens["mean_omega"][0] - centre) / centre, 0.02,
                                 "averaged omega(0) vs the period average of gamma/(4 Sigma(t))"))
        elif m["kind"] == "ou_noise":
            z = np.abs(ens["mean_omega"] - ref) / ens["stderr"]
            worst = int(np.argmax(z))
            checks.append(_check("ensemble_within_3se", z[worst], 3.0,
                                 f"max |mean - Gaussian(sigma^2)|/stderr, worst at r/sigma={ens['r_over_sigma'][worst]:.4g}"))
        else:
            checks.append(_check("average_equals_initial", np.max(np.abs(ens["mean_omega"] - ref)), 1e-12,
                                 "time average with constant Sigma"))
    return checks


# -- torus -------------------------------------------------------------------------------


def _btag(i: int, b: float) -> str:
    return f"{i:02d}_b{b:g}"


def run_torus(cfg: ScenarioConfig, out: Path) -> dict:
    p = cfg.params
    a = p["a"]
    artifacts = {}
    meas = {k: [] for k in ("b", "regime", "unsigned_area", "enclosed_volume", "net_signed_volume", "reversed_area",
                            "formula_area", "formula_volume", "loci", "locus_z", "degenerate_faces")}
    for i, b in enumerate(p["b_list"]):
        shape = TorusShape(a, b)
        mesh = mesh_torus(shape, p["n_theta"], p["n_phi"])
        mm = mesh_measures(mesh)
        fm = torus_measures(a, b)
        loci = reversal_loci(mesh)
        for key, val in (("b", b), ("regime", fm.regime), ("unsigned_area", mm.unsigned_area),
                         ("enclosed_volume", mm.enclosed_volume), ("net_signed_volume", mm.net_signed_volume),
                         ("reversed_area", mm.reversed_area), ("formula_area", fm.area),
                         ("formula_volume", fm.volume), ("loci", len(loci)),
                         ("locus_z", max(abs(z) for z in loci[0].z) if loci else 0.0), ("degenerate_faces", mm.degenerate_faces)):
            meas[key].append(val)
        TH, PH = np.meshgrid(mesh.theta, mesh.phi, indexing="ij")
        V, N = mesh.vertices.reshape(-1, 3), mesh.normals.reshape(-1, 3)
        name = f"mesh_{_btag(i, b)}"
        artifacts[f"{name}.csv"] = aio.write_csv(out / f"{name}.csv", {
            "theta": TH.ravel(), "phi": PH.ravel(), "x": V[:, 0], "y": V[:, 1], "z": V[:, 2],
            "nx": N[:, 0], "ny": N[:, 1], "nz": N[:, 2],
        })
        if p["export_obj"]:
            keep = mesh.quads[~mesh.degenerate]
            artifacts[f"{name}.obj"] = aio.write_obj(out / f"{name}.obj", mesh.vertices, mesh.normals, keep)
    artifacts["measures.csv"] = aio.write_csv(out / "measures.csv", meas)

    rp = p["ring"]
    summary = {k: [] for k in ("b", "turns_about_tube", "turns_about_axis", "closed", "gap")}
    for i, b in enumerate(rp["b_list"]):
        ring = helicoidal_ring(TorusShape(a, b, rp["omega0"], rp["omega1"]), rp["samples_per_turn"])
        travelled = np.abs(ring.tube_angle - ring.tube_angle[0])
        tag = np.floor(travelled / (2 * np.pi) + 1e-9).astype(int) % 2
        artifacts[f"ring_{_btag(i, b)}.csv"] = aio.write_csv(out / f"ring_{_btag(i, b)}.csv", {
            "t": ring.t, "x": ring.samples[:, 0], "y": ring.samples[:, 1], "z": ring.samples[:, 2],
            "axis_angle": ring.axis_angle, "orientation_tag": tag, "tube_angle": ring.tube_angle,
        })
        for key, val in (("b", b), ("turns_about_tube", ring.turns_about_tube),
                         ("turns_about_axis", ring.turns_about_axis), ("closed", ring.closed), ("gap", ring.gap)):
            summary[key].append(val)
    artifacts["rings.csv"] = aio.write_csv(out / "rings.csv", summary)

    dc = p["double_cover"]
    if dc["enabled"]:
        ring = helicoidal_ring(TorusShape(a, dc["b"], rp["omega0"], rp["omega1"]), rp["samples_per_turn"])
        tr = double_cover_rotation(ring, dc["samples"])
        artifacts["double_cover.csv"] = aio.write_csv(out / "double_cover.csv", {
            "t": tr.t, "tube_angle": tr.tube_angle, "axis_angle": tr.axis_angle, "fx": tr.frame[:, 0],
            "fy": tr.frame[:, 1], "fz": tr.frame[:, 2], "dot": tr.dots, "orientation_tag": tr.orientation_tag,
        })
        artifacts["double_cover_checkpoints.csv"] = aio.write_csv(out / "double_cover_checkpoints.csv", {
            "degrees": list(tr.checkpoints), "frame_dot": list(tr.checkpoints.values()),
            "travel_direction_dot": [tr.arrow_checkpoints[k] for k in tr.checkpoints],
        })
    return artifacts


def check_torus(cfg: ScenarioConfig, out: Path) -> list[Check]:
    p = cfg.params
    a = p["a"]
    checks = []
    if p["b_list"]:
        meas = aio.read_csv(out / "measures.csv")
        worst_norm = 0.0
        for i, b in enumerate(p["b_list"]):
            mesh = aio.read_csv(out / f"mesh_{_btag(i, b)}.csv")
            n = np.sqrt(mesh["nx"] ** 2 + mesh["ny"] ** 2 + mesh["nz"] ** 2)
            worst_norm = max(worst_norm, float(np.max(np.abs(n - 1.0))))
        checks.append(_check("unit_normals", worst_norm, 1e-12, "max ||n| - 1| over all mesh vertices"))
        expected = np.where(meas["b"] < a, 1, 0)
        wrong = int(np.sum(meas["loci"] != expected))
        checks.append(_check("reversal_loci", wrong, 0, "meshes whose count of reversal loci is not 1 below b = a, 0 above"))
        spindle = (meas["b"] > 0) & (meas["b"] < a)
        if spindle.any():
            dz = np.abs(meas["locus_z"][spindle] - np.sqrt(a * a - meas["b"][spindle] ** 2))
            checks.append(_check("intersection_height", np.max(dz), 1e-12, "|z - sqrt(a^2 - b^2)| at the reversal locus"))
        ring_regime = meas["b"] >= a
        if ring_regime.any():
            rel = np.abs(meas["unsigned_area"][ring_regime] / meas["formula_area"][ring_regime] - 1)
            checks.append(_check("area_vs_formula", np.max(rel), 1e-3, "mesh area vs 4 pi^2 b a for b >= a"))
        flat = meas["b"] == 0
        if flat.any():
            area = meas["unsigned_area"][flat][0]
            vol = meas["enclosed_volume"][flat][0]
            checks.append(_check("double_coating_area", abs(area / (8 * np.pi * a * a) - 1), 2e-3,
                                 "b = 0 mesh area vs twice the sphere area"))
            checks.append(_check("double_coating_volume", abs(vol / (4 * np.pi * a**3 / 3) - 1), 5e-3,
                                 "b = 0 enclosed volume vs the ball"))
    rings = aio.read_csv(out / "rings.csv")
    if len(rings["gap"]):
        closed = rings["closed"] == 1
        checks.append(_check("ring_closure", np.max(rings["gap"][closed]) / a if closed.any() else 0.0, 1e-10,
                             "largest closure gap over the ring sweep, in units of a"))
    if p["double_cover"]["enabled"]:
        dc = aio.read_csv(out / "double_cover_checkpoints.csv")
        by = dict(zip(dc["degrees"].astype(int), zip(dc["frame_dot"], dc["travel_direction_dot"])))
        checks.append(_check("frame_reversed_360", abs(by[360][0] + 1), 1e-6, "transported normal . initial at 360 deg"))
        checks.append(_check("frame_restored_720", abs(by[720][0] - 1), 1e-6, "transported normal . initial at 720 deg"))
        checks.append(_check("travel_direction_reversed_360", abs(by[360][1] + 1), 1e-12,
                             "direction of travel at the top point after one tube turn"))
        checks.append(_check("travel_direction_restored_720", abs(by[720][1] - 1), 1e-12,
                             "direction of travel at the top point after two tube turns"))
    return checks


# -- flow scene ---------------------------------------------------------------------------


def _scene(p: dict) -> VortexSceneSpec:
    return VortexSceneSpec(p["u_inf"], p["cylinder_radius"], p["circulation"], p["dipole"], tuple(p["box"]))


def run_flow_scene(cfg: ScenarioConfig, out: Path) -> dict:
    p = cfg.params
    scene = _scene(p)
    lines, _ = streamlines_around_vortex(scene, p["n_lines"], p["rtol"])
    cols = {k: [] for k in ("line_index", "s", "x", "y", "psi_stream", "seed_psi", "status")}
    for i, ln in enumerate(lines):
        k = len(ln.s)
        cols["line_index"].append(np.full(k, i))
        cols["s"].append(ln.s)
        cols["x"].append(ln.xy[:, 0])
        cols["y"].append(ln.xy[:, 1])
        cols["psi_stream"].append(ln.psi)
        cols["seed_psi"].append(np.full(k, ln.seed_psi))
        cols["status"].append(np.full(k, ln.status))
    artifacts = {"streamlines.csv": aio.write_csv(out / "streamlines.csv", {k: np.concatenate(v) for k, v in cols.items()})}
    st = stagnation_points(scene)
    artifacts["stagnation.csv"] = aio.write_csv(out / "stagnation.csv", {"x": st[:, 0], "y": st[:, 1]})
    nx, ny = p["field_shape"]
    x0, x1, y0, y1 = p["box"]
    X, Y = np.meshgrid(np.linspace(x0, x1, nx), np.linspace(y0, y1, ny), indexing="ij")
    psi = scene.stream_function(X, Y)
    psi[np.hypot(X, Y) < p["cylinder_radius"]] = np.nan
    artifacts["stream_function.csv"] = aio.write_csv(out / "stream_function.csv",
                                                     {"x": X.ravel(), "y": Y.ravel(), "psi": psi.ravel()})
    return artifacts


def check_flow_scene(cfg: ScenarioConfig, out: Path) -> list[Check]:
    p = cfg.params
    R = p["cylinder_radius"]
    scene = _scene(p)
    tab = aio.read_csv(out / "streamlines.csv")
    checks = [_check("stream_function_drift", np.max(np.abs(tab["psi_stream"] - tab["seed_psi"])), 1e-6,
                     "max |psi - psi(seed)| along all streamlines")]
    if p["dipole"]:
        depth = R - np.min(np.hypot(tab["x"], tab["y"]))
        checks.append(_check("no_penetration", max(depth, 0.0) / R, 1e-9, "deepest excursion inside the cylinder / R"))
    st = aio.read_csv(out / "stagnation.csv")
    if len(st["x"]):
        vx, vy = scene.velocity(st["x"], st["y"])
        speed_ref = max(abs(p["u_inf"]), 1e-300)
        checks.append(_check("stagnation_speed", np.max(np.hypot(vx, vy)) / speed_ref, 1e-9,
                             "speed at reported stagnation points / u_inf"))
        if p["circulation"] == 0 and p["dipole"] and p["u_inf"] != 0:
            want = np.array([[-R, 0.0], [R, 0.0]])
            got = np.column_stack([st["x"], st["y"]])
            err = np.max(np.abs(got - want)) if got.shape == want.shape else np.inf
            checks.append(_check("stagnation_at_radius", err, 1e-6, "stagnation points vs (+-R, 0)"))
    return checks


RUNNERS = {
    "evolve": (run_evolve, check_evolve),
    "trajectories": (run_trajectories, check_trajectories),
    "vortex": (run_vortex, check_vortex),
    "torus": (run_torus, check_torus),
    "flow_scene": (run_flow_scene, check_flow_scene),
}


# -- orchestration ------------------------------------------------------------------------


@dataclass
class RunResult:
    out_dir: Path
    manifest: dict
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def evaluate(cfg: ScenarioConfig, out_dir) -> list[Check]:
    return RUNNERS[cfg.kind][1](cfg, Path(out_dir))


def run_scenario(cfg: ScenarioConfig, out_dir, figures: bool = True) -> RunResult:
    """Write artifacts, evaluate invariants, render figures, then the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stale = out / MANIFEST
    if stale.exists():
        stale.unlink()
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rows = RUNNERS[cfg.kind][0](cfg, out)
    checks = evaluate(cfg, out)
    figs = []
    if figures:
        from .report import render

        figs = render(cfg, out)
    notes = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
    manifest = {
        "format": 1,
        "package_version": __version__,
        "config": cfg.resolved(),
        "artifacts": [{"path": name, "rows": int(n), "sha256": aio.sha256(out / name)} for name, n in rows.items()],
        "figures": figs,
        "diagnostics": notes,
        "invariants": [asdict(c) for c in checks],
        "status": "pass" if all(c.passed for c in checks) else "fail",
        "wall_clock_s": round(time.perf_counter() - start, 3),
    }
    aio.write_json(out / MANIFEST, manifest)
    return RunResult(out, manifest, checks)


@dataclass
class CheckReport:
    checks: list[Check]
    disagreements: list[str]
    modified: list[str]

    @property
    def ok(self) -> bool:
        return not self.disagreements and not self.modified and all(c.passed for c in self.checks)


def check_manifest(path) -> CheckReport:
    """Re-verify a finished run from its manifest and artifacts."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST
    manifest = aio.read_json(path)
    out = path.parent
    cfg = parse_config(manifest["config"])
    modified = [a["path"] for a in manifest["artifacts"]
                if not (out / a["path"]).exists() or aio.sha256(out / a["path"]) != a["sha256"]]
    checks = evaluate(cfg, out) if not modified else []
    recorded = {c["name"]: c["passed"] for c in manifest["invariants"]}
    fresh = {c.name: c.passed for c in checks}
    disagreements = [] if modified else sorted(k for k in set(recorded) | set(fresh) if recorded.get(k) != fresh.get(k))
    return CheckReport(checks, disagreements, modified)


# -- catalog -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Builtin:
    name: str
    description: str
    anchor: str
    criteria: tuple[int, ...]
    config: dict


def _b(name, kind, description, anchor, criteria, params, seed=0):
    cfg = {"version": 1, "kind": kind, "name": name, "seed": seed, "params": params}
    return Builtin(name, description, anchor, tuple(criteria), cfg)


BUILTINS = {b.name: b for b in [
    _b("free_packet_trajectories", "trajectories",
       "Bohmian paths of a spreading free Gaussian packet against the closed-form spread law",
       "guidance velocity grad S / m of the Madelung fluid", [1, 11], {}),
    _b("free_packet_residuals", "evolve",
       "unitarity and second-order convergence of the Hamilton-Jacobi and continuity residuals",
       "quantum Hamilton-Jacobi and continuity equations",
       [2], {"grid": {"n": 256}, "dt": 4e-3, "steps": 500, "snapshot_stride": 50, "convergence_levels": 3}),
    _b("gaussian_quantum_potential", "evolve",
       "quantum potential of a Gaussian density and the pressure-term identity",
       "quantum potential as diffusion and flux pressures", [3],
       {"steps": 10, "dt": 1e-3, "snapshot_stride": 10}),
    _b("vortex_constant_decay", "vortex",
       "constant viscosity spreads the Gaussian vortex until Sigma doubles; core radius check",
       "Lamb-Oseen vorticity and orbital velocity with the core radius", [4, 5], {}),
    _b("vortex_zero_permanence", "vortex",
       "zero viscosity leaves the vorticity profile unchanged",
       "Helmholtz permanence of vortices in an inviscid fluid", [4],
       {"model": {"kind": "zero"}, "steps": 200, "store_every": 50}),
    _b("vortex_cosine_return", "vortex",
       "zero-mean cosine viscosity returns the profile after one period; long-time average",
       "Sigma accumulator with zero-mean viscosity, Gaussian coherent vortex cloud", [6],
       {"model": {"kind": "cosine", "nu0": 0.5, "omega": 1.0}, "dt": 2 * np.pi / 1000, "steps": 1000,
        "store_every": 100, "average": {"horizon": 200 * np.pi, "samples": 10000}}),
    _b("vortex_ou_ensemble", "vortex",
       "Ornstein-Uhlenbeck viscosity ensemble mean against the Gaussian coherent vortex",
       "Gaussian coherent vortex cloud permanent in time", [6, 11],
       {"model": {"kind": "ou_noise", "amplitude": 0.005, "correlation_time": 1.0}, "steps": 0,
        "average": {"horizon": 100.0, "samples": 4000, "ensemble": 64}}, seed=20240601),
    _b("torus_measures", "torus",
       "mesh area and volume against the closed forms, and the double-coated sphere at b = 0",
       "torus volume and surface area formulas", [7],
       {"b_list": [4.0, 0.0], "n_theta": 256, "n_phi": 256, "ring": {"b_list": []}}),
    _b("spindle_sweep", "torus",
       "spindle-torus transformation a = 2, b from 3 down to 0.01 with reversal loci",
       "topological transformation of the torus to the spindle torus", [9], {}),
    _b("double_cover", "torus",
       "two-turn helicoidal ring shrunk onto the sphere and its 720 degree frame closure",
       "helicoidal ring on the double-coated sphere", [8],
       {"b_list": [], "double_cover": {"enabled": True}}),
    _b("cylinder_flow", "flow_scene",
       "uniform flow around a non-rotating cylinder: stagnation points and streamlines",
       "potential flow deflected by a vortex", [10], {}),
    _b("rotating_cylinder_flow", "flow_scene",
       "uniform flow around a cylinder carrying circulation 2",
       "potential flow deflected by a vortex", [10], {"circulation": 2.0}),
]}


def builtin_config(name: str) -> ScenarioConfig:
    if name not in BUILTINS:
        raise KeyError(name)
    return parse_config(BUILTINS[name].config, default_name=name)
