"""Unitary evolution of psi under a static external potential.

Two schemes: Crank-Nicolson (1D tridiagonal, 2D Strang-split over axes) and
split-step Fourier (periodic grids only). Both are unitary up to round-off.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .core.fields import WaveField, to_polar
from .core.grid import Grid, PhysicalConstants

SCHEMES = ("crank_nicolson", "split_step_fourier")
NORM_DRIFT_ABORT = 1e-6
BOUNDARY_QUIET = 1e-8


class AccuracyWarning(UserWarning):
    pass


class NumericalAbort(RuntimeError):
    pass


@dataclass(frozen=True)
class PotentialSpec:
    """Static potential U(r).

    kinds and their parameters:
      free             --
      harmonic         omega_trap, center
      gaussian_barrier height, center, width
      double_slit      height, slit_width, slit_separation, thickness, position (2D only)
    """

    kind: str = "free"
    params: dict = field(default_factory=dict)

    KINDS = {
        "free": {},
        "harmonic": {"omega_trap": 1.0, "center": 0.0},
        "gaussian_barrier": {"height": 1.0, "center": 0.0, "width": 1.0},
        "double_slit": {
            "height": 1e3,
            "slit_width": 1.0,
            "slit_separation": 4.0,
            "thickness": 0.5,
            "position": 0.0,
        },
    }

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}; expected one of {sorted(self.KINDS)}")
        unknown = set(self.params) - set(self.KINDS[self.kind])
        if unknown:
            raise ValueError(f"unknown parameters for {self.kind} potential: {sorted(unknown)}")

    def resolved(self) -> dict:
        return {**self.KINDS[self.kind], **self.params}

    def evaluate(self, grid: Grid, constants: PhysicalConstants = PhysicalConstants()) -> np.ndarray:
        p = self.resolved()
        X = grid.mesh()
        if self.kind == "free":
            U = np.zeros(grid.shape)
        elif self.kind == "harmonic":
            r2 = sum((x - p["center"]) ** 2 for x in X)
            U = 0.5 * constants.m * p["omega_trap"] ** 2 * r2
        elif self.kind == "gaussian_barrier":
            U = p["height"] * np.exp(-((X[0] - p["center"]) ** 2) / (2 * p["width"] ** 2))
        else:
            if grid.dim != 2:
                raise ValueError("double_slit potential needs a 2D grid")
            x, y = X
            wall = np.abs(x - p["position"]) <= 0.5 * p["thickness"]
            half = 0.5 * p["slit_separation"]
            slit = (np.abs(y - half) <= 0.5 * p["slit_width"]) | (np.abs(y + half) <= 0.5 * p["slit_width"])
            U = np.where(wall & ~slit, p["height"], 0.0)
        if not np.all(np.isfinite(U)):
            raise ValueError("potential is not finite on the grid")
        return U


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    steps: int
    scheme: str = "crank_nicolson"
    snapshot_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")


def norm(wf: WaveField) -> float:
    """Integral of rho over the grid."""
    return wf.grid.integrate(wf.rho)


def _second_difference(n: int, h: float, periodic: bool) -> sp.csc_matrix:
    main = -2.0 * np.ones(n)
    off = np.ones(n - 1)
    D = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    if periodic:
        D[0, n - 1] = 1.0
        D[n - 1, 0] = 1.0
    return (D / h**2).tocsc()


def hamiltonian(grid: Grid, U: np.ndarray, constants: PhysicalConstants, axis: int | None = None) -> sp.csc_matrix:
    """Sparse finite-difference Hamiltonian on the flattened grid.

    With ``axis`` set, only that axis' kinetic term plus U/dim is returned
    (the pieces of the axis splitting).
    """
    kin = -(constants.hbar**2) / (2.0 * constants.m)
    eyes = [sp.identity(k, format="csc") for k in grid.n]
    terms = []
    axes = range(grid.dim) if axis is None else [axis]
    for ax in axes:
        mats = list(eyes)
        mats[ax] = _second_difference(grid.n[ax], grid.spacing[ax], grid.periodic)
        op = mats[0]
        for m in mats[1:]:
            op = sp.kron(op, m, format="csc")
        terms.append(kin * op)
    share = 1.0 if axis is None else 1.0 / grid.dim
    return (sum(terms) + sp.diags(share * U.ravel())).tocsc()


class _CrankNicolson:
    def __init__(self, grid: Grid, U: np.ndarray, constants: PhysicalConstants, dt: float):
        n = int(np.prod(grid.shape))
        eye = sp.identity(n, format="csc", dtype=complex)
        self.stages = []
        if grid.dim == 1:
            plan = [(None, dt)]
        else:
            # Strang: half step along x, full along y, half along x
            plan = [(0, 0.5 * dt), (1, dt), (0, 0.5 * dt)]
        cache = {}
        for axis, h in plan:
            key = (axis, h)
            if key not in cache:
                H = hamiltonian(grid, U, constants, axis)
                a = 0.5j * h / constants.hbar
                cache[key] = (splu((eye + a * H).tocsc()), (eye - a * H).tocsr())
            self.stages.append(cache[key])
        self.shape = grid.shape

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        flat = psi.ravel()
        for lu, rhs in self.stages:
            flat = lu.solve(rhs @ flat)
        return flat.reshape(self.shape)


class _SplitStep:
    def __init__(self, grid: Grid, U: np.ndarray, constants: PhysicalConstants, dt: float):
        if not grid.periodic:
            raise ValueError("split-step Fourier needs a periodic grid")
        k2 = sum(k**2 for k in grid.wavenumbers())
        self.kinetic = np.exp(-1j * constants.hbar * k2 * dt / (2.0 * constants.m))
        self.half_potential = np.exp(-0.5j * U * dt / constants.hbar)
        self.axes = tuple(range(grid.dim))

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        psi = self.half_potential * psi
        psi = np.fft.ifftn(self.kinetic * np.fft.fftn(psi, axes=self.axes), axes=self.axes)
        return self.half_potential * psi


def make_stepper(grid: Grid, U: np.ndarray, constants: PhysicalConstants, cfg: EvolutionConfig):
    if cfg.scheme == "crank_nicolson":
        return _CrankNicolson(grid, U, constants, cfg.dt)
    return _SplitStep(grid, U, constants, cfg.dt)


def _boundary_density(grid: Grid, rho: np.ndarray) -> float:
    edges = []
    for ax in range(grid.dim):
        edges.append(np.take(rho, [0, -1], axis=ax).max())
    return float(max(edges))


def evolve(
    psi0: np.ndarray,
    grid: Grid,
    potential: PotentialSpec,
    cfg: EvolutionConfig,
    constants: PhysicalConstants = PhysicalConstants(),
    c0: float = 0.0,
    t0: float = 0.0,
) -> list[WaveField]:
    """Evolve psi0 and return polar snapshots every ``snapshot_stride`` steps.

    The first snapshot is the initial state. ``c0`` shifts the potential by a
    constant energy, which only rotates the global phase.
    """
    psi = np.asarray(psi0, dtype=complex)
    if psi.shape != grid.shape:
        raise ValueError(f"psi0 shape {psi.shape} does not match grid {grid.shape}")
    n0 = grid.integrate(np.abs(psi) ** 2)
    if abs(n0 - 1.0) > 1e-8:
        raise ValueError(f"psi0 must be normalized (integral of rho = {n0:.12g})")
    dx_min = min(grid.spacing)
    if cfg.dt > dx_min**2 * constants.m / constants.hbar:
        warnings.warn(
            f"dt={cfg.dt:g} exceeds dx^2 m/hbar={dx_min**2 * constants.m / constants.hbar:g}; "
            "phase accuracy of fast modes will suffer",
            AccuracyWarning,
            stacklevel=2,
        )
    U = potential.evaluate(grid, constants) - c0
    step = make_stepper(grid, U, constants, cfg)
    snaps = [to_polar(psi, grid, constants, t=t0)]
    for k in range(1, cfg.steps + 1):
        psi = step(psi)
        if k % cfg.snapshot_stride == 0 or k == cfg.steps:
            if not np.all(np.isfinite(psi)):
                raise NumericalAbort(f"non-finite wave function at step {k}")
            rho = np.abs(psi) ** 2
            drift = abs(grid.integrate(rho) - n0)
            if drift > NORM_DRIFT_ABORT:
                raise NumericalAbort(f"norm drifted by {drift:.3g} at step {k}")
            wf = to_polar(psi, grid, constants, t=t0 + k * cfg.dt)
            edge = _boundary_density(grid, rho)
            if edge > BOUNDARY_QUIET * rho.max():
                wf = replace(wf, diagnostics=wf.diagnostics + (f"boundary density {edge:.3g} at step {k}",))
            snaps.append(wf)
    return snaps


def energy(wf: WaveField, potential: PotentialSpec, constants: PhysicalConstants = PhysicalConstants()) -> float:
    """<H> with the same finite-difference Hamiltonian the Crank-Nicolson scheme uses."""
    U = potential.evaluate(wf.grid, constants)
    H = hamiltonian(wf.grid, U, constants)
    flat = wf.psi.ravel()
    return float(np.real(np.vdot(flat, H @ flat)) * wf.grid.cell_volume)


# -- analytic states --------------------------------------------------------------


def gaussian_packet(grid: Grid, sigma0: float, center=0.0, k0=0.0) -> np.ndarray:
    """Normalized Gaussian with density width sigma0, centred at ``center`` with momentum hbar*k0."""
    X = grid.mesh()
    centers = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    ks = np.broadcast_to(np.asarray(k0, dtype=float), (grid.dim,))
    psi = np.ones(grid.shape, dtype=complex)
    for x, c, k in zip(X, centers, ks):
        psi *= (2.0 * np.pi * sigma0**2) ** -0.25 * np.exp(-((x - c) ** 2) / (4.0 * sigma0**2) + 1j * k * x)
    return psi / np.sqrt(grid.integrate(np.abs(psi) ** 2))


def free_packet_width(t, sigma0: float, constants: PhysicalConstants = PhysicalConstants()):
    """Density width of a free Gaussian packet: sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2)."""
    tau = 2.0 * constants.m * sigma0**2 / constants.hbar
    return sigma0 * np.sqrt(1.0 + (np.asarray(t) / tau) ** 2)


def free_packet(grid: Grid, sigma0: float, t: float, constants: PhysicalConstants = PhysicalConstants()) -> np.ndarray:
    """Exact free evolution of the zero-momentum packet centred at the origin."""
    (x,) = grid.mesh()
    z = 1.0 + 1j * constants.hbar * t / (2.0 * constants.m * sigma0**2)
    return (2.0 * np.pi * sigma0**2) ** -0.25 / np.sqrt(z) * np.exp(-(x**2) / (4.0 * sigma0**2 * z))


def harmonic_ground_state(grid: Grid, omega: float, constants: PhysicalConstants = PhysicalConstants()) -> np.ndarray:
    X = grid.mesh()
    a = constants.m * omega / constants.hbar
    r2 = sum(x**2 for x in X)
    return (a / np.pi) ** (grid.dim / 4.0) * np.exp(-0.5 * a * r2) + 0j


def harmonic_ground_energy(omega: float, dim: int = 1, constants: PhysicalConstants = PhysicalConstants()) -> float:
    return 0.5 * dim * constants.hbar * omega
