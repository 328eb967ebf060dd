import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqsflow.core import (
    FlowField,
    Grid,
    PhysicalConstants,
    continuity_residual,
    convective_identity_residual,
    hamilton_jacobi_residual,
    helmholtz_decompose,
    modified_pressure_gradient,
    pressure_terms,
    quantum_potential,
    quantum_potential_gradient_form,
    to_polar,
    velocity_from_wave,
)
from sqsflow.schrodinger import free_packet, gaussian_packet, harmonic_ground_energy, harmonic_ground_state


def gaussian_q(x, s, C):
    # -hbar^2/2m R''/R for R = exp(-x^2/4s^2), differentiated by hand
    return C.hbar**2 / (4 * C.m * s**2) - C.hbar**2 * x**2 / (8 * C.m * s**4)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.6, 2.0), st.floats(0.5, 3.0), st.floats(0.5, 2.0))
def test_quantum_potential_of_a_gaussian(s, m, hbar):
    C = PhysicalConstants(m, hbar)
    g = Grid.line(-12 * s, 12 * s, 512)
    (x,) = g.mesh()
    rho = np.exp(-x**2 / (2 * s**2)) / np.sqrt(2 * np.pi * s**2)
    Q = quantum_potential(rho, g, C, "spectral")
    core = np.abs(x) < 4 * s
    scale = C.hbar**2 / (4 * C.m * s**2)
    assert np.max(np.abs(Q[core] - gaussian_q(x[core], s, C))) / scale < 1e-8


def test_pressure_terms_recombine_into_q():
    C = PhysicalConstants(1.3, 0.9)
    g = Grid.line(-12.0, 12.0, 512)
    (x,) = g.mesh()
    rho = np.exp(-x**2 / 2) * (1 + 0.3 * np.cos(x)) ** 2
    rho /= g.integrate(rho)
    P = pressure_terms(rho, g, C, "spectral")
    Q = quantum_potential(rho, g, C, "spectral")
    core = np.abs(x) < 4
    assert np.max(np.abs((P.p1 + P.p2)[core] / rho[core] - Q[core])) < 1e-9
    Qg = quantum_potential_gradient_form(rho, g, C, "spectral")
    assert np.max(np.abs(Qg[core] - Q[core])) < 1e-9


def test_quantum_potential_masks_nodes_and_rejects_negative_density():
    g = Grid.line(-1.0, 1.0, 32)
    rho = np.ones(32)
    rho[10] = 0.0
    assert np.ma.getmaskarray(quantum_potential(rho, g))[10]
    with pytest.raises(ValueError):
        quantum_potential(-rho, g)


def test_modified_pressure_gradient_identity():
    g = Grid.line(0.0, 2 * np.pi, 128)
    (x,) = g.mesh()
    rho = 2 + np.sin(x)
    P = np.cos(2 * x) + 3
    lhs, rhs = modified_pressure_gradient(P, rho, g, "spectral")
    assert np.max(np.abs(lhs - rhs)) < 1e-10
    with pytest.raises(ValueError):
        modified_pressure_gradient(P, rho - 5, g)


def test_plane_wave_velocity_is_hbar_k_over_m():
    C = PhysicalConstants(2.0, 1.5)
    g = Grid.line(0.0, 10.0, 200)
    (x,) = g.mesh()
    k = 2 * np.pi * 4 / 10
    flow = velocity_from_wave(to_polar(np.exp(1j * k * x), g, C), C)
    assert np.allclose(flow.v[0], C.hbar * k / C.m, atol=1e-3)
    assert flow.omega is None


def test_helmholtz_split_recovers_both_parts():
    g = Grid.square(0.0, 2 * np.pi, 64)
    X, Y = g.mesh()
    curl_free = np.stack([np.cos(X) * np.cos(Y), -np.sin(X) * np.sin(Y)])  # grad(sin x cos y)
    div_free = np.stack([np.cos(2 * Y), np.sin(3 * X)])
    vS, vR = helmholtz_decompose(curl_free + div_free, g)
    assert np.max(np.abs(vS - curl_free)) < 1e-12
    assert np.max(np.abs(vR - div_free)) < 1e-12


def test_convective_identity_holds_spectrally():
    g = Grid.square(0.0, 2 * np.pi, 64)
    X, Y = g.mesh()
    v = np.stack([np.sin(X) * np.cos(Y), np.cos(2 * X) + np.sin(Y)])
    flow = FlowField(g, v, v, np.zeros_like(v), None)
    assert np.max(np.abs(convective_identity_residual(flow, "spectral"))) < 1e-10


def test_hamilton_jacobi_residual_vanishes_for_a_stationary_state():
    C = PhysicalConstants()
    g = Grid.line(-10.0, 10.0, 512)
    (x,) = g.mesh()
    w, dt = 1.0, 1e-3
    E = harmonic_ground_energy(w, 1, C)
    psi = harmonic_ground_state(g, w, C)
    a = to_polar(psi, g, C)
    b = to_polar(psi * np.exp(-1j * E * dt / C.hbar), g, C, t=dt)
    U = 0.5 * x**2
    res = hamilton_jacobi_residual(a, U, C, wf_next=b, dt=dt, method="spectral")
    core = np.abs(x) < 4
    assert np.max(np.abs(res.residual[core])) < 1e-8
    with pytest.raises(ValueError):
        hamilton_jacobi_residual(a, U, C)


def test_continuity_residual_of_the_exact_free_packet_is_second_order():
    C = PhysicalConstants()
    errs = []
    for n, dt in ((256, 4e-3), (512, 2e-3)):
        g = Grid.line(-12.0, 12.0, n)
        a = to_polar(free_packet(g, 1.0, 1.0, C), g, C, t=1.0)
        b = to_polar(free_packet(g, 1.0, 1.0 + dt, C), g, C, t=1.0 + dt)
        r = continuity_residual(a, b, dt, C, method="fd")
        errs.append(np.sqrt(g.integrate(np.ma.filled(r.rho_form, 0.0) ** 2)))
    assert np.log2(errs[0] / errs[1]) > 1.8


def test_the_three_continuity_forms_agree():
    C = PhysicalConstants()
    g = Grid.line(-12.0, 12.0, 512)
    psi0 = gaussian_packet(g, 1.0, 0.0, 0.5)
    a = to_polar(psi0, g, C)
    b = to_polar(psi0 * np.exp(-1j * 0.125e-3), g, C, t=1e-3)
    r = continuity_residual(a, b, 1e-3, C, method="spectral")
    core = np.abs(g.mesh()[0]) < 4
    # any snapshot pair: the log-amplitude form is the density form divided by 2 rho
    assert np.max(np.abs(r.c_form[core] * 2 * a.rho[core] - r.rho_form[core])) < 1e-10
