"""Uniform grids, physical constants and derivative stencils.

Fields are plain numpy arrays shaped like ``grid.shape`` (axis 0 is x, axis 1
is y). Vector fields carry a leading component axis: ``(grid.dim, *grid.shape)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

BOUNDARIES = ("periodic", "reflecting")


@dataclass(frozen=True)
class PhysicalConstants:
    """Carrier mass and reduced Planck constant; ``D`` is always hbar / 2m."""

    m: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.m > 0 and self.hbar > 0):
            raise ValueError(f"m and hbar must be positive, got m={self.m}, hbar={self.hbar}")

    @property
    def D(self) -> float:
        return self.hbar / (2.0 * self.m)


@dataclass(frozen=True)
class Grid:
    """Uniform 1D or 2D grid.

    Periodic axes exclude the upper end point (``x_i = lo + i*dx`` with
    ``dx = (hi - lo)/n``); reflecting axes include both walls.
    """

    extents: tuple[tuple[float, float], ...]
    n: tuple[int, ...]
    boundary: str = "periodic"
    _axes: tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        extents = tuple((float(lo), float(hi)) for lo, hi in self.extents)
        n = tuple(int(k) for k in self.n)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "n", n)
        if len(extents) not in (1, 2) or len(extents) != len(n):
            raise ValueError("grid must be 1D or 2D with one point count per axis")
        if any(k < 8 for k in n):
            raise ValueError(f"need at least 8 points per axis, got {n}")
        if any(hi <= lo for lo, hi in extents):
            raise ValueError(f"empty extent in {extents}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        axes = []
        for (lo, hi), k in zip(extents, n):
            if self.periodic:
                axes.append(lo + (hi - lo) / k * np.arange(k))
            else:
                axes.append(np.linspace(lo, hi, k))
        object.__setattr__(self, "_axes", tuple(axes))

    @classmethod
    def line(cls, lo: float, hi: float, n: int, boundary: str = "periodic") -> "Grid":
        return cls(((lo, hi),), (n,), boundary)

    @classmethod
    def square(cls, lo: float, hi: float, n: int, boundary: str = "periodic") -> "Grid":
        return cls(((lo, hi), (lo, hi)), (n, n), boundary)

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def spacing(self) -> tuple[float, ...]:
        if self.periodic:
            return tuple((hi - lo) / k for (lo, hi), k in zip(self.extents, self.n))
        return tuple((hi - lo) / (k - 1) for (lo, hi), k in zip(self.extents, self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def axes(self) -> tuple[np.ndarray, ...]:
        return self._axes

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self._axes, indexing="ij"))

    def integrate(self, f: np.ndarray) -> float:
        """Rectangle rule on periodic grids, trapezoid on walled ones."""
        f = np.asarray(f)
        if self.periodic:
            return float(np.sum(f) * self.cell_volume)
        out = f
        for ax in range(self.dim):
            out = np.trapezoid(out, dx=self.spacing[ax], axis=0)
        return float(out)

    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Angular wavenumbers broadcastable against a field of this grid."""
        ks = []
        for ax, (k, h) in enumerate(zip(self.n, self.spacing)):
            kk = 2.0 * np.pi * np.fft.fftfreq(k, d=h)
            shape = [1] * self.dim
            shape[ax] = k
            ks.append(kk.reshape(shape))
        return tuple(ks)

    def describe(self) -> dict:
        return {
            "dim": self.dim,
            "extents": [list(e) for e in self.extents],
            "n": list(self.n),
            "spacing": list(self.spacing),
            "boundary": self.boundary,
        }

    @classmethod
    def from_description(cls, d: dict) -> "Grid":
        return cls(tuple(tuple(e) for e in d["extents"]), tuple(d["n"]), d["boundary"])


# -- stencils -----------------------------------------------------------------

METHODS = ("fd", "spectral")


def _check_method(grid: Grid, method: str):
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if method == "spectral" and not grid.periodic:
        raise ValueError("spectral derivatives need a periodic grid")


def _spectral(f: np.ndarray, grid: Grid, axis: int, order: int) -> np.ndarray:
    k = grid.wavenumbers()[axis]
    fk = np.fft.fftn(f, axes=range(grid.dim))
    if order == 1:
        mult = 1j * k
        # the Nyquist mode of an odd derivative has no real representation
        if grid.n[axis] % 2 == 0:
            mult = mult.copy()
            idx = [0] * grid.dim
            idx[axis] = grid.n[axis] // 2
            mult[tuple(idx)] = 0.0
    else:
        mult = -(k**2)
    out = np.fft.ifftn(fk * mult, axes=range(grid.dim))
    return out if np.iscomplexobj(f) else out.real


def diff1(f: np.ndarray, grid: Grid, axis: int = 0, method: str = "fd") -> np.ndarray:
    """First derivative along ``axis``; 2nd-order central (one-sided at walls)."""
    _check_method(grid, method)
    h = grid.spacing[axis]
    if method == "spectral":
        return _spectral(f, grid, axis, 1)
    if grid.periodic:
        return (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2.0 * h)
    return np.gradient(f, h, axis=axis, edge_order=2)


def diff2(f: np.ndarray, grid: Grid, axis: int = 0, method: str = "fd") -> np.ndarray:
    """Second derivative along ``axis``."""
    _check_method(grid, method)
    h = grid.spacing[axis]
    if method == "spectral":
        return _spectral(f, grid, axis, 2)
    if grid.periodic:
        return (np.roll(f, -1, axis) - 2.0 * f + np.roll(f, 1, axis)) / h**2
    f = np.moveaxis(np.asarray(f), axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h**2
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h**2
    return np.moveaxis(out, 0, axis)


def gradient(f: np.ndarray, grid: Grid, method: str = "fd") -> np.ndarray:
    return np.stack([diff1(f, grid, ax, method) for ax in range(grid.dim)])


def laplacian(f: np.ndarray, grid: Grid, method: str = "fd") -> np.ndarray:
    return sum(diff2(f, grid, ax, method) for ax in range(grid.dim))


def divergence(v: np.ndarray, grid: Grid, method: str = "fd") -> np.ndarray:
    return sum(diff1(v[ax], grid, ax, method) for ax in range(grid.dim))


def curl2d(v: np.ndarray, grid: Grid, method: str = "fd") -> np.ndarray:
    """Scalar vorticity d(vy)/dx - d(vx)/dy."""
    if grid.dim != 2:
        raise ValueError("curl is defined here for 2D fields only")
    return diff1(v[1], grid, 0, method) - diff1(v[0], grid, 1, method)


def _wrap(d: np.ndarray, period: float) -> np.ndarray:
    return d - period * np.round(d / period)


def phase_diff1(S: np.ndarray, grid: Grid, hbar: float, axis: int = 0) -> np.ndarray:
    """Central difference of an action field, insensitive to 2*pi*hbar seams.

    Neighbour differences are folded into (-pi*hbar, pi*hbar], so a phase
    unwrapped with a seam at the periodic boundary still differentiates
    smoothly. Walled grids fall back to the plain stencil.
    """
    if not grid.periodic:
        return diff1(S, grid, axis)
    h = grid.spacing[axis]
    period = 2.0 * np.pi * hbar
    fwd = _wrap(np.roll(S, -1, axis) - S, period)
    bwd = _wrap(S - np.roll(S, 1, axis), period)
    return (fwd + bwd) / (2.0 * h)


def phase_diff2(S: np.ndarray, grid: Grid, hbar: float, axis: int = 0) -> np.ndarray:
    if not grid.periodic:
        return diff2(S, grid, axis)
    h = grid.spacing[axis]
    period = 2.0 * np.pi * hbar
    fwd = _wrap(np.roll(S, -1, axis) - S, period)
    bwd = _wrap(S - np.roll(S, 1, axis), period)
    return (fwd - bwd) / h**2


def phase_gradient(S: np.ndarray, grid: Grid, hbar: float) -> np.ndarray:
    return np.stack([phase_diff1(S, grid, hbar, ax) for ax in range(grid.dim)])


def phase_laplacian(S: np.ndarray, grid: Grid, hbar: float) -> np.ndarray:
    return sum(phase_diff2(S, grid, hbar, ax) for ax in range(grid.dim))


def l2_norm(f: np.ndarray, grid: Grid, weight: np.ndarray | None = None) -> float:
    """Continuous L2 norm over unmasked points, optionally weighted.

    With a weight the result is ``sqrt(int w f^2 / int w)``.
    """
    data = np.ma.getdata(f)
    keep = ~np.ma.getmaskarray(f)
    if weight is None:
        return float(np.sqrt(np.sum(data[keep] ** 2) * grid.cell_volume))
    w = np.asarray(weight)[keep]
    return float(np.sqrt(np.sum(w * data[keep] ** 2) / np.sum(w)))


def linf_norm(f: np.ndarray) -> float:
    data = np.ma.getdata(f)
    keep = ~np.ma.getmaskarray(f)
    return float(np.max(np.abs(data[keep]))) if keep.any() else 0.0


def as_vector(components: Sequence[np.ndarray]) -> np.ndarray:
    return np.stack([np.asarray(c, dtype=float) for c in components])
