"""Wave fields in polar (Madelung) form and velocity fields."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, PhysicalConstants

RHO_FLOOR_REL = 1e-12
NODE_FRACTION_LIMIT = 0.5


class PhaseVortexError(ValueError):
    """Phase cannot be unwrapped consistently: psi carries a vortex."""


@dataclass(frozen=True)
class WaveField:
    """Complex field psi with its density, action and log-amplitude.

    ``node_mask`` marks points with rho below the floor; phase and anything
    derived from it are meaningless there.
    """

    grid: Grid
    psi: np.ndarray
    rho: np.ndarray
    S: np.ndarray
    c_rho: np.ndarray
    hbar: float
    rho_floor: float
    t: float = 0.0
    diagnostics: tuple[str, ...] = field(default=())

    @property
    def node_mask(self) -> np.ndarray:
        return self.rho <= self.rho_floor

    def recompose(self) -> np.ndarray:
        return np.sqrt(self.rho) * np.exp(1j * self.S / self.hbar)


@dataclass(frozen=True)
class FlowField:
    """Velocity split into irrotational and solenoidal parts.

    ``omega`` is the scalar vorticity on 2D grids and ``None`` on 1D ones.
    """

    grid: Grid
    v: np.ndarray
    v_S: np.ndarray
    v_R: np.ndarray
    omega: np.ndarray | None


def _unwrap_2d(phase: np.ndarray, valid: np.ndarray) -> np.ndarray:
    # anchor column along axis 0, then sweep each row along axis 1
    out = np.empty_like(phase)
    out[:, 0] = np.unwrap(phase[:, 0])
    rows = np.unwrap(phase, axis=1)
    out[:, 1:] = rows[:, 1:] - rows[:, :1] + out[:, :1]
    jump = np.abs(np.diff(out, axis=0))
    both = valid[1:, :] & valid[:-1, :]
    bad = both & (jump > np.pi)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise PhaseVortexError(
            f"phase mismatch {jump[i, j]:.3f} rad between rows {i} and {i + 1} at column {j}; "
            "supply the solenoidal velocity explicitly"
        )
    return out


def to_polar(
    psi: np.ndarray,
    grid: Grid,
    constants: PhysicalConstants = PhysicalConstants(),
    t: float = 0.0,
    node_fraction_limit: float = NODE_FRACTION_LIMIT,
) -> WaveField:
    """Split psi into rho = |psi|^2, S = hbar * unwrapped phase and c_rho = ln(rho)/2."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != grid.shape:
        raise ValueError(f"psi shape {psi.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(psi)):
        raise ValueError("psi contains non-finite values")
    rho = np.abs(psi) ** 2
    floor = RHO_FLOOR_REL * float(rho.max()) if rho.max() > 0 else 0.0
    valid = rho > floor
    phase = np.angle(psi)
    if grid.dim == 1:
        unwrapped = np.unwrap(phase)
    else:
        unwrapped = _unwrap_2d(phase, valid)
    S = constants.hbar * unwrapped
    c_rho = 0.5 * np.log(np.maximum(rho, floor if floor > 0 else np.finfo(float).tiny))
    notes = []
    node_fraction = 1.0 - valid.mean()
    if node_fraction > node_fraction_limit:
        notes.append(
            f"{node_fraction:.1%} of points lie below the density floor; phase is undefined there"
        )
    return WaveField(grid, psi, rho, S, c_rho, constants.hbar, floor, t, tuple(notes))


def global_phase_error(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Max |a - b e^{i alpha}| with alpha chosen to align the two fields."""
    if mask is None:
        mask = np.ones(a.shape, bool)
    overlap = np.vdot(b[mask], a[mask])
    alpha = np.angle(overlap) if abs(overlap) > 0 else 0.0
    return float(np.max(np.abs(a[mask] - b[mask] * np.exp(1j * alpha))))
