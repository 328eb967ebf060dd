"""Acceptance criteria 1 to 11, each at its stated tolerance.

Every test records a PASS/FAIL line (shown in the terminal summary). Two
parts cannot be met as stated; they run at full tolerance and are marked
strict xfail, so an unexpected pass is reported as an error.
"""

import tempfile
import time
import warnings
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from sqsflow import io as aio
from sqsflow.bohmian import VortexSceneSpec, free_packet_trajectory, integrate_bundle, sample_seeds, stagnation_points
from sqsflow.bohmian import streamlines_around_vortex
from sqsflow.core import Grid, PhysicalConstants, continuity_residual, hamilton_jacobi_residual, l2_norm, to_polar
from sqsflow.core import pressure_terms, quantum_potential
from sqsflow.scenarios import BUILTINS, builtin_config, run_scenario
from sqsflow.schrodinger import EvolutionConfig, PotentialSpec, evolve, gaussian_packet, make_stepper
from sqsflow.torus import (
    SPINDLE_SWEEP_B,
    TorusShape,
    cross_section_regions,
    double_cover_rotation,
    helicoidal_ring,
    mesh_measures,
    mesh_torus,
    reversal_loci,
    spindle_sweep,
    surface_point,
    torus_measures,
)
from sqsflow.vortex import (
    ViscosityModel,
    core_radius,
    evolve_radial_vorticity,
    long_time_average_profile,
    omega_profile,
    radial_l2_error,
    v_profile,
)

C = PhysicalConstants()
R = np.linspace(0.0, 20.0, 512)


def test_criterion_01_madelung_equivalence(acceptance):
    start = time.perf_counter()
    g = Grid.line(-12.0, 12.0, 512)
    snaps = evolve(gaussian_packet(g, 1.0), g, PotentialSpec(), EvolutionConfig(2e-3, 1000, snapshot_stride=50), C)
    seeds = sample_seeds(snaps[0].rho, g, 32, "quantile")
    bundle = integrate_bundle(snaps, seeds, C)
    elapsed = time.perf_counter() - start
    T = 2 * C.m * 1.0**2 / C.hbar
    assert bundle.times[-1] == pytest.approx(T)
    exact = free_packet_trajectory(seeds[:, 0], T, 1.0, C)
    rel = np.max(np.abs(bundle.paths[:, -1, 0] - exact) / np.abs(exact))
    ok = acceptance("1", rel < 1e-3 and elapsed < 10, f"max relative deviation {rel:.3e} (< 1e-3), runtime {elapsed:.2f} s (< 10 s)")
    assert ok


def _residual_level(n, dt, steps):
    g = Grid.line(-12.0, 12.0, n)
    cfg = EvolutionConfig(dt, steps, snapshot_stride=steps // 10)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        snaps = evolve(gaussian_packet(g, 1.0), g, PotentialSpec(), cfg, C)
    step = make_stepper(g, np.zeros(n), C, cfg)
    hj, co = [], []
    for wf in snaps:
        nxt = to_polar(step(wf.psi), g, C, t=wf.t + dt)
        hj.append(l2_norm(hamilton_jacobi_residual(wf, 0.0, C, wf_next=nxt, dt=dt, method="fd").residual, g))
        co.append(l2_norm(continuity_residual(wf, nxt, dt, C, method="fd").rho_form, g))
    drift = max(abs(1 - g.integrate(s.rho)) for s in snaps)
    return np.sqrt(np.mean(np.square(hj))), np.sqrt(np.mean(np.square(co))), drift


def test_criterion_02_unitarity_and_residual_convergence(acceptance):
    levels = [_residual_level(256 * 2**k, 4e-3 / 2**k, 500 * 2**k) for k in range(3)]
    drift = max(lv[2] for lv in levels)
    hj = [levels[k][0] / levels[k + 1][0] for k in range(2)]
    co = [levels[k][1] / levels[k + 1][1] for k in range(2)]
    ratios = hj + co
    ok = drift < 1e-9 and all(3.5 <= r <= 4.6 for r in ratios)
    acceptance("2", ok, f"|1 - norm| {drift:.1e} (< 1e-9); HJ ratios {hj[0]:.2f}, {hj[1]:.2f}; "
                        f"continuity ratios {co[0]:.2f}, {co[1]:.2f} (expected 4)")
    assert ok


def test_criterion_03_quantum_potential_and_pressure_identity(acceptance):
    worst_q, worst_p = 0.0, 0.0
    for s, m, hbar in ((1.0, 1.0, 1.0), (0.7, 2.0, 1.0), (1.5, 0.5, 1.3)):
        Cs = PhysicalConstants(m, hbar)
        g = Grid.line(-12 * s, 12 * s, 512)
        (x,) = g.mesh()
        rho = np.exp(-x**2 / (2 * s**2)) / np.sqrt(2 * np.pi * s**2)
        Q = quantum_potential(rho, g, Cs, "spectral")
        ref = hbar**2 / (4 * m * s**2)
        worst_q = max(worst_q, abs(Q[np.argmin(np.abs(x))] - ref) / ref)
        P = pressure_terms(rho, g, Cs, "spectral")
        core = np.abs(x) < 4 * s
        worst_p = max(worst_p, float(np.max(np.abs((P.p1 + P.p2)[core] / rho[core] - Q[core]))))
    ok = worst_q < 1e-6 and worst_p < 1e-9
    acceptance("3", ok, f"Q(0) relative error {worst_q:.1e} (< 1e-6); |(P1+P2)/rho - Q| {worst_p:.1e} (< 1e-9, |x| < 4s)")
    assert ok


def test_criterion_04_vortex_decay_and_permanence(acceptance):
    w0 = omega_profile(1.0, 1.0, R)
    h = evolve_radial_vorticity(w0, R, ViscosityModel("constant", 1.0, 0.1), 0.01, 1000, store_every=1000)
    Sigma = 0.1 * h.t[-1] + 1.0
    err = radial_l2_error(h.omega[-1], omega_profile(1.0, Sigma, R), R)
    still = evolve_radial_vorticity(w0, R, ViscosityModel("zero"), 0.01, 1000, store_every=1000)
    drift = float(np.max(np.abs(still.omega[-1] - w0)))
    ok = Sigma >= 2.0 and err < 1e-3 and drift < 1e-12
    acceptance("4", ok, f"relative L2 {err:.2e} at Sigma = {Sigma:g} (< 1e-3); zero-viscosity drift {drift:.1e} (< 1e-12)")
    assert ok


def test_criterion_05_core_radius(acceptance):
    worst = 0.0
    for Sigma in (0.25, 1.0, 2.0, 7.5):
        r0 = core_radius(Sigma)
        res = minimize_scalar(lambda r: -v_profile(1.0, Sigma, r), bounds=(0.5, 3 * r0), method="bounded",
                              options={"xatol": 1e-12})
        worst = max(worst, abs(r0 / np.sqrt(Sigma) - 2.24181), abs(res.x / np.sqrt(Sigma) - 2.24181))
    ok = worst < 1e-4
    acceptance("5", ok, f"max |r0/sqrt(Sigma) - 2.24181| {worst:.1e} over root and direct maximisation (< 1e-4)")
    assert ok


def test_criterion_06a_cosine_viscosity_returns(acceptance):
    Omega = 1.0
    m = ViscosityModel("cosine", 1.0, 0.5 * Omega, Omega)
    w0 = omega_profile(1.0, 1.0, R)
    h = evolve_radial_vorticity(w0, R, m, 2 * np.pi / Omega / 1000, 1000, store_every=1000)
    err = radial_l2_error(h.omega[-1], w0, R)
    ok = err < 1e-3
    acceptance("6a", ok, f"cosine model: relative L2 after one period {err:.1e} (< 1e-3)")
    assert ok


@pytest.mark.xfail(strict=True, reason="mean of omega(Sigma) carries a second-order Jensen bias that dominates "
                                       "the standard error where d(omega)/d(Sigma) vanishes (r = 2 sigma)")
def test_criterion_06b_ou_ensemble_within_three_standard_errors(acceptance):
    m = ViscosityModel("ou_noise", 1.0, amplitude=0.005, correlation_time=1.0, rng_seed=20240601)
    avg = long_time_average_profile(m, 1.0, R, 100.0, 4000, 64)
    ref = omega_profile(1.0, 1.0, R)
    ok_se = avg.stderr > 0
    z = np.abs(avg.mean - ref)[ok_se] / avg.stderr[ok_se]
    worst = int(np.argmax(z))
    ok = bool(z[worst] <= 3.0)
    acceptance("6b", ok, f"OU ensemble (64 members): max |mean - Gaussian|/SE {z[worst]:.2f} at r = "
                         f"{R[ok_se][worst]:.3f} sigma (<= 3)")
    assert ok


def test_criterion_07_torus_measures(acceptance):
    ring = mesh_measures(mesh_torus(TorusShape(2.0, 4.0), 256, 256))
    f = torus_measures(2.0, 4.0)
    area_err = abs(ring.unsigned_area / f.area - 1)
    flat = mesh_measures(mesh_torus(TorusShape(2.0, 0.0), 256, 256))
    double_err = abs(flat.unsigned_area / (8 * np.pi * 4.0) - 1)
    vol_err = abs(flat.enclosed_volume / (4 * np.pi * 8.0 / 3) - 1)
    ok = area_err < 1e-3 and double_err < 2e-3 and vol_err < 5e-3
    acceptance("7", ok, f"area error {area_err:.1e} (< 1e-3); b = 0 area error {double_err:.1e} (< 2e-3), "
                        f"volume error {vol_err:.1e} (< 5e-3)")
    assert ok


def test_criterion_08a_two_turn_ring_closes(acceptance):
    worst = 0.0
    for b in (4.0, 3.0, 2.0, 1.0, 0.001):
        ring = helicoidal_ring(TorusShape(2.0, b, 1.0, 0.5))
        assert ring.closed and ring.turns_about_tube == 2 and ring.turns_about_axis == 1
        worst = max(worst, ring.gap / 2.0)
    ok = worst < 1e-10
    acceptance("8a", ok, f"omega1 = omega0/2 closes after 2 tube turns, max gap {worst:.1e} a (< 1e-10 a)")
    assert ok


@pytest.mark.xfail(strict=True, reason="transport holonomy of order 4.4 (b/a)^2 exceeds 1e-6 at b = 0.001; "
                                       "exact at b = 0")
def test_criterion_08b_frame_reversed_at_360_restored_at_720(acceptance):
    tr = double_cover_rotation(helicoidal_ring(TorusShape(2.0, 0.001, 1.0, 0.5)), 10000)
    e360, e720 = abs(tr.checkpoints[360] + 1), abs(tr.checkpoints[720] - 1)
    ok = e360 <= 1e-6 and e720 <= 1e-6
    acceptance("8b", ok, f"b = 0.001: |dot + 1| at 360 deg {e360:.2e}, |dot - 1| at 720 deg {e720:.2e} (<= 1e-6)")
    assert ok


def test_criterion_08c_frame_on_the_double_coated_sphere(acceptance):
    tr = double_cover_rotation(helicoidal_ring(TorusShape(2.0, 0.0, 1.0, 0.5)), 10000)
    e360, e720 = abs(tr.checkpoints[360] + 1), abs(tr.checkpoints[720] - 1)
    arrows = double_cover_rotation(helicoidal_ring(TorusShape(2.0, 0.001, 1.0, 0.5))).arrow_checkpoints
    a360, a720 = abs(arrows[360] + 1), abs(arrows[720] - 1)
    ok = max(e360, e720, a360, a720) <= 1e-6
    acceptance("8c", ok, f"b = 0 frame errors {e360:.1e}, {e720:.1e}; b = 0.001 travel direction errors "
                         f"{a360:.1e}, {a720:.1e} (<= 1e-6)")
    assert ok


def test_criterion_09_spindle_classification(acceptance):
    a, b = 2.0, 1.0
    th = np.arccos(-b / a)
    z_meridian = abs(surface_point(a, b, th, 0.0)[2])
    hits = np.sort(np.abs(cross_section_regions(a, b).intersections[:, 1]))
    locus = reversal_loci(mesh_torus(TorusShape(a, b), 128, 128))
    z_err = max(abs(z_meridian - np.sqrt(3)), float(np.max(np.abs(hits - np.sqrt(3)))),
                max(abs(abs(z) - np.sqrt(3)) for z in locus[0].z))
    sweep = spindle_sweep(a, n_theta=128, n_phi=128)
    listed = [e.shape.b for e in sweep] == [3.0, 2.0, 1.5, 1.0, 0.5, 0.01] == list(SPINDLE_SWEEP_B)
    spindles = [e for e in sweep if e.shape.regime == "spindle"]
    one_each = all(len(e.loci) == 1 for e in spindles) and all(len(e.loci) == 0 for e in sweep if e.shape.b >= a)
    ok = z_err < 1e-12 and listed and one_each and len(spindles) == 4
    acceptance("9", ok, f"intersection height error {z_err:.1e} (< 1e-12); sweep b = {[e.shape.b for e in sweep]}; "
                        f"reversal loci {[len(e.loci) for e in sweep]}")
    assert ok


def test_criterion_10_flow_scene(acceptance):
    scene = VortexSceneSpec(1.0, 1.0, 0.0)
    st = stagnation_points(scene)
    st_err = float(np.max(np.abs(st - np.array([[-1.0, 0.0], [1.0, 0.0]])))) if st.shape == (2, 2) else np.inf
    drift, depth = 0.0, 0.0
    for gamma in (0.0, 2.0, -5.0, 20.0):
        lines, _ = streamlines_around_vortex(VortexSceneSpec(1.0, 1.0, gamma), 15)
        for ln in lines:
            drift = max(drift, float(np.max(np.abs(ln.psi - ln.seed_psi))))
            depth = max(depth, 1.0 - float(np.min(np.hypot(*ln.xy.T))))
    ok = st_err < 1e-6 and drift < 1e-6 and depth <= 1e-9
    acceptance("10", ok, f"stagnation error {st_err:.1e} (< 1e-6); stream-function drift {drift:.1e} (< 1e-6); "
                         f"deepest penetration {max(depth, 0.0):.1e} R")
    assert ok


def test_criterion_11_reproducibility(acceptance):
    mismatched = []
    with tempfile.TemporaryDirectory() as tmp:
        for name in BUILTINS:
            cfg = builtin_config(name)
            hashes = []
            for rep in ("first", "second"):
                out = Path(tmp) / rep / name
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    run_scenario(cfg, out, figures=False)
                hashes.append({p.name: aio.sha256(p) for p in sorted(out.glob("*.csv"))})
            if hashes[0] != hashes[1] or not hashes[0]:
                mismatched.append(name)
    ok = not mismatched
    acceptance("11", ok, f"{len(BUILTINS)} built-in scenarios re-run; CSVs differing: {mismatched or 'none'}")
    assert ok
