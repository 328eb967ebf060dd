"""Hydrodynamic reading of a wave field.

Pressure terms, the quantum potential, the irrotational/solenoidal velocity
split and residuals of the quantum Hamilton-Jacobi and continuity equations.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .fields import RHO_FLOOR_REL, FlowField, WaveField
from .grid import (
    Grid,
    PhysicalConstants,
    curl2d,
    divergence,
    gradient,
    laplacian,
    phase_gradient,
    phase_laplacian,
)


class PressureTerms(NamedTuple):
    p1: np.ndarray
    p2: np.ndarray
    floored: np.ndarray  # points where the P2 denominator hit the floor


class HJResidual(NamedTuple):
    residual: np.ma.MaskedArray
    nu_term: np.ma.MaskedArray | None


class ContinuityResidual(NamedTuple):
    rho_form: np.ma.MaskedArray
    c_form: np.ma.MaskedArray
    laplacian_identity: np.ma.MaskedArray


def _floor(rho: np.ndarray) -> float:
    return RHO_FLOOR_REL * float(np.max(rho))


def pressure_terms(
    rho: np.ndarray, grid: Grid, constants: PhysicalConstants = PhysicalConstants(), method: str = "fd"
) -> PressureTerms:
    """Diffusion pressure P1 = -D^2 lap(rho_M) and flux pressure P2 = D^2/2 |grad rho_M|^2 / rho_M."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("density must be non-negative")
    D2 = constants.D**2
    rho_m = constants.m * rho
    p1 = -D2 * laplacian(rho_m, grid, method)
    g = gradient(rho_m, grid, method)
    floor_m = constants.m * _floor(rho)
    floored = rho_m < floor_m
    p2 = 0.5 * D2 * np.sum(g**2, axis=0) / np.maximum(rho_m, floor_m)
    return PressureTerms(p1, p2, floored)


def quantum_potential(
    rho: np.ndarray, grid: Grid, constants: PhysicalConstants = PhysicalConstants(), method: str = "fd"
) -> np.ma.MaskedArray:
    """Q = -2 m D^2 lap(R)/R with R = sqrt(rho), masked where rho is below the floor."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("density must be non-negative")
    R = np.sqrt(rho)
    mask = rho <= _floor(rho)
    lap = laplacian(R, grid, method)
    with np.errstate(divide="ignore", invalid="ignore"):
        Q = -2.0 * constants.m * constants.D**2 * lap / np.where(mask, 1.0, R)
    return np.ma.masked_array(Q, mask=mask)


def quantum_potential_gradient_form(
    rho: np.ndarray, grid: Grid, constants: PhysicalConstants = PhysicalConstants(), method: str = "fd"
) -> np.ma.MaskedArray:
    """Q = m D^2/2 (grad rho / rho)^2 - m D^2 lap(rho)/rho."""
    rho = np.asarray(rho, dtype=float)
    mask = rho <= _floor(rho)
    safe = np.where(mask, 1.0, rho)
    g = gradient(rho, grid, method)
    m, D2 = constants.m, constants.D**2
    Q = 0.5 * m * D2 * np.sum((g / safe) ** 2, axis=0) - m * D2 * laplacian(rho, grid, method) / safe
    return np.ma.masked_array(Q, mask=mask)


def modified_pressure_gradient(
    P: np.ndarray, rho: np.ndarray, grid: Grid, method: str = "fd"
) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of rho grad(P/rho) = grad P - P grad ln(rho); rho must be positive."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("modified pressure gradient needs a strictly positive density")
    lhs = rho * gradient(P / rho, grid, method)
    rhs = gradient(P, grid, method) - P * gradient(np.log(rho), grid, method)
    return lhs, rhs


# -- velocities -----------------------------------------------------------------


def _action_derivatives(psi, rho, S, grid: Grid, hbar: float, method: str):
    """grad S and lap S. The spectral path works through psi so phase seams never matter."""
    if method == "fd":
        return phase_gradient(S, grid, hbar), phase_laplacian(S, grid, hbar)
    safe = np.where(rho > _floor(rho), rho, 1.0)
    gpsi = gradient(psi, grid, method)
    gS = hbar * np.imag(np.conj(psi) * gpsi) / safe
    grho = gradient(rho, grid, method)
    lpsi = laplacian(psi, grid, method)
    lS = (hbar * np.imag(np.conj(psi) * lpsi) - np.sum(grho * gS, axis=0)) / safe
    return gS, lS


def _check_unwrapped(wf: WaveField):
    valid = ~wf.node_mask
    limit = np.pi * wf.hbar
    for ax in range(wf.grid.dim):
        jump = np.abs(np.diff(wf.S, axis=ax))
        both = np.logical_and(
            np.delete(valid, 0, axis=ax), np.delete(valid, -1, axis=ax)
        )
        if np.any(jump[both] > limit):
            raise ValueError(
                f"action field is not unwrapped along axis {ax} (max jump {jump[both].max():.3g})"
            )


def velocity_from_wave(
    wf: WaveField,
    constants: PhysicalConstants = PhysicalConstants(),
    v_R: np.ndarray | None = None,
    method: str = "fd",
) -> FlowField:
    """v_S = grad(S)/m, v = v_S + v_R, omega = curl(v) in 2D."""
    _check_unwrapped(wf)
    grid = wf.grid
    gS, _ = _action_derivatives(wf.psi, wf.rho, wf.S, grid, wf.hbar, method)
    v_S = gS / constants.m
    if v_R is None:
        v_R = np.zeros_like(v_S)
    else:
        v_R = np.asarray(v_R, dtype=float)
        if v_R.shape != v_S.shape:
            raise ValueError(f"v_R shape {v_R.shape} does not match {v_S.shape}")
    v = v_S + v_R
    omega = curl2d(v, grid, method) if grid.dim == 2 else None
    return FlowField(grid, v, v_S, v_R, omega)


def helmholtz_decompose(v: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Spectral projection of a periodic 2D field into curl-free and divergence-free parts.

    The mean flow goes to the curl-free part.
    """
    if grid.dim != 2 or not grid.periodic:
        raise ValueError("Helmholtz decomposition is implemented for periodic 2D grids only")
    v = np.asarray(v, dtype=float)
    kx, ky = grid.wavenumbers()
    k2 = kx**2 + ky**2
    k2[0, 0] = 1.0
    vx = np.fft.fft2(v[0])
    vy = np.fft.fft2(v[1])
    proj = (kx * vx + ky * vy) / k2
    sx, sy = kx * proj, ky * proj
    sx[0, 0], sy[0, 0] = vx[0, 0], vy[0, 0]
    v_S = np.stack([np.fft.ifft2(sx).real, np.fft.ifft2(sy).real])
    return v_S, v - v_S


def convective_identity_residual(flow: FlowField, method: str = "fd") -> np.ndarray:
    """(v.grad)v - grad(v^2/2) - omega x v on a 2D grid."""
    grid = flow.grid
    if grid.dim != 2:
        raise ValueError("convective identity needs a 2D field")
    v = flow.v
    adv = np.stack([np.sum(v * gradient(v[c], grid, method), axis=0) for c in (0, 1)])
    ke = gradient(0.5 * np.sum(v**2, axis=0), grid, method)
    omega = curl2d(v, grid, method)
    cross = np.stack([-omega * v[1], omega * v[0]])
    return adv - ke - cross


# -- residuals --------------------------------------------------------------------


def _midpoint_psi(a: WaveField, b: WaveField) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Time-centred state between two snapshots: rho, S, psi and the action increment."""
    dS = a.hbar * np.angle(b.psi * np.conj(a.psi))
    rho = 0.5 * (a.rho + b.rho)
    S = a.S + 0.5 * dS
    psi = np.sqrt(rho) * np.exp(1j * S / a.hbar)
    return rho, S, psi, dS


def _check_pair(a: WaveField, b: WaveField, dt: float):
    if dt is None or not dt > 0:
        raise ValueError(f"time step between snapshots must be positive, got {dt}")
    if a.grid != b.grid:
        raise ValueError("snapshots live on different grids")


def hamilton_jacobi_residual(
    wf: WaveField,
    U: np.ndarray | float,
    constants: PhysicalConstants = PhysicalConstants(),
    c0: float = 0.0,
    *,
    wf_next: WaveField | None = None,
    dt: float | None = None,
    dS_dt: np.ndarray | Callable[[WaveField], np.ndarray] | None = None,
    flow: FlowField | None = None,
    nu: float = 0.0,
    method: str = "fd",
) -> HJResidual:
    """dS/dt + (grad S)^2/2m + m v_R^2/2 + U + Q - C0.

    The time derivative comes either from a second snapshot ``wf_next`` taken
    ``dt`` later (everything is then evaluated at the centred midpoint) or from
    ``dS_dt``, an array or a callable of the wave field. The fluctuating-viscosity
    term nu*m*f(rho), with f = d ln(rho)/dt, is never part of the residual; with a
    snapshot pair and nonzero ``nu`` it is returned separately as ``nu_term``.
    """
    grid = wf.grid
    U = np.broadcast_to(np.asarray(U, dtype=float), grid.shape)
    nu_term = None
    if wf_next is not None:
        _check_pair(wf, wf_next, dt)
        rho, S, psi, dS = _midpoint_psi(wf, wf_next)
        ds_dt = dS / dt
    elif dS_dt is not None:
        rho, S, psi = wf.rho, wf.S, wf.psi
        ds_dt = dS_dt(wf) if callable(dS_dt) else np.asarray(dS_dt, dtype=float)
    else:
        raise ValueError("need a second snapshot (wf_next, dt) or an explicit dS_dt")
    gS, lS = _action_derivatives(psi, rho, S, grid, wf.hbar, method)
    Q = quantum_potential(rho, grid, constants, method)
    vr2 = 0.0 if flow is None else np.sum(flow.v_R**2, axis=0)
    res = ds_dt + np.sum(gS**2, axis=0) / (2.0 * constants.m) + 0.5 * constants.m * vr2 + U + Q - c0
    mask = np.ma.getmaskarray(Q)
    if wf_next is not None:
        mask = mask | wf.node_mask | wf_next.node_mask
        if nu != 0.0:
            safe = np.where(mask, 1.0, rho)
            dlnrho_dt = (wf_next.rho - wf.rho) / dt / safe
            v = gS / constants.m + (0.0 if flow is None else flow.v_R)
            f = dlnrho_dt + np.sum(v * gradient(np.log(safe), grid, method), axis=0)
            nu_term = np.ma.masked_array(nu * constants.m * f, mask=mask)
    return HJResidual(np.ma.masked_array(np.ma.getdata(res), mask=mask), nu_term)


def continuity_residual(
    wf: WaveField,
    wf_next: WaveField,
    dt: float,
    constants: PhysicalConstants = PhysicalConstants(),
    flow: FlowField | None = None,
    method: str = "fd",
) -> ContinuityResidual:
    """Continuity residual at the midpoint of two snapshots, in three guises.

    ``rho_form``: d(rho)/dt + v.grad(rho) + rho div(v)
    ``c_form``: the same law in log-amplitude variables, with grad C = grad(rho)/(2 rho)
    ``laplacian_identity``: lap(S) + m d ln(rho)/dt, which vanishes with the other two
    """
    _check_pair(wf, wf_next, dt)
    grid = wf.grid
    m = constants.m
    rho, S, psi, _ = _midpoint_psi(wf, wf_next)
    mask = wf.node_mask | wf_next.node_mask | (rho <= _floor(rho))
    safe = np.where(mask, 1.0, rho)
    drho_dt = (wf_next.rho - wf.rho) / dt
    gS, lS = _action_derivatives(psi, rho, S, grid, wf.hbar, method)
    grho = gradient(rho, grid, method)
    v_R = np.zeros_like(gS) if flow is None else flow.v_R
    div_vR = 0.0 if flow is None else divergence(v_R, grid, method)
    v = gS / m + v_R
    rho_form = drho_dt + np.sum(v * grho, axis=0) + rho * (lS / m + div_vR)
    gC = grho / (2.0 * safe)
    c_form = drho_dt / (2.0 * safe) + (lS + 2.0 * np.sum(gS * gC, axis=0)) / (2.0 * m) + np.sum(v_R * gC, axis=0)
    dlnrho = drho_dt / safe + np.sum(v * grho, axis=0) / safe
    lap_id = lS + m * dlnrho
    wrap = lambda f: np.ma.masked_array(f, mask=mask)  # noqa: E731
    return ContinuityResidual(wrap(rho_form), wrap(c_form), wrap(lap_id))
