"""Bohmian trajectories through psi-derived velocity fields, plus the
streamline scene of uniform flow deflected around a rotating cylinder."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .core.fields import WaveField
from .core.grid import Grid, PhysicalConstants
from .core.madelung import velocity_from_wave

FLAG_NEAR_NODE = 1
FLAG_NODE = 2
FLAG_EXITED = 4


@dataclass(frozen=True)
class TrajectoryBundle:
    """Paths sampled at the snapshot times.

    ``paths`` and ``velocities`` are ``(n_seeds, n_times, dim)``; ``flags`` is a
    per-sample bitmask (1 near a node, 2 inside a node, 4 left the domain).
    """

    seeds: np.ndarray
    times: np.ndarray
    paths: np.ndarray
    velocities: np.ndarray
    flags: np.ndarray


def _cdf(grid: Grid, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = grid.axes[0]
    h = grid.spacing[0]
    if grid.periodic:
        x = np.append(x, x[-1] + h)
        weights = np.append(weights, weights[0])
    F = np.concatenate([[0.0], np.cumsum(0.5 * (weights[1:] + weights[:-1]) * h)])
    return x, F / F[-1]


def _quantile(x: np.ndarray, F: np.ndarray, levels: np.ndarray) -> np.ndarray:
    # first node whose CDF reaches the level; plateaus resolve to their left end
    j = np.clip(np.searchsorted(F, levels, side="left"), 1, len(F) - 1)
    F0, F1 = F[j - 1], F[j]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(F1 > F0, (levels - F0) / (F1 - F0), 0.0)
    return x[j - 1] + frac * (x[j] - x[j - 1])


def sample_seeds(rho0: np.ndarray, grid: Grid, n: int, mode: str = "quantile") -> np.ndarray:
    """Initial positions distributed per rho0, shape ``(n, dim)``.

    ``quantile`` puts seeds at CDF levels (i + 0.5)/n (per-axis marginals in 2D,
    combined as a product lattice); ``uniform`` spaces them evenly over the
    support rho > 1e-6 max(rho).
    """
    if n < 1:
        raise ValueError("need at least one seed")
    if mode not in ("quantile", "uniform"):
        raise ValueError(f"unknown seed mode {mode!r}")
    rho0 = np.asarray(rho0, dtype=float)
    per_axis = [n] if grid.dim == 1 else [int(np.ceil(np.sqrt(n)))] * 2
    if grid.dim == 2:
        per_axis[1] = int(np.ceil(n / per_axis[0]))
    if any(k > m for k, m in zip(per_axis, grid.n)):
        warnings.warn(f"{n} seeds exceed the grid resolution {grid.n}", stacklevel=2)
    coords = []
    for ax, k in enumerate(per_axis):
        marginal = rho0 if grid.dim == 1 else rho0.sum(axis=1 - ax)
        if mode == "quantile":
            sub = Grid.line(*grid.extents[ax], grid.n[ax], grid.boundary)
            x, F = _cdf(sub, marginal)
            coords.append(_quantile(x, F, (np.arange(k) + 0.5) / k))
        else:
            support = grid.axes[ax][marginal > 1e-6 * marginal.max()]
            coords.append(np.linspace(support.min(), support.max(), k) if k > 1 else np.array([support.mean()]))
    if grid.dim == 1:
        return coords[0][:, None]
    X, Y = np.meshgrid(*coords, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])[:n]


class _Sampler:
    """Multilinear interpolation of snapshot fields, linear in time."""

    def __init__(self, grid: Grid, fields: np.ndarray, near: np.ndarray, node: np.ndarray, times: np.ndarray):
        self.grid = grid
        self.fields = fields  # (n_t, dim, *shape)
        self.near = near  # (n_t, *shape)
        self.node = node
        self.times = times
        self.lo = np.array([e[0] for e in grid.extents])
        self.hi = np.array([e[1] for e in grid.extents])
        self.h = np.array(grid.spacing)

    def inside(self, pos: np.ndarray) -> np.ndarray:
        if self.grid.periodic:
            return np.ones(len(pos), bool)
        return np.all((pos >= self.lo) & (pos <= self.hi), axis=1)

    def _corners(self, pos):
        s = (pos - self.lo) / self.h
        i0 = np.floor(s).astype(int)
        w = s - i0
        n = np.array(self.grid.n)
        if self.grid.periodic:
            i0 %= n
            i1 = (i0 + 1) % n
        else:
            i0 = np.clip(i0, 0, n - 2)
            w = np.clip(s - i0, 0.0, 1.0)
            i1 = i0 + 1
        return i0, i1, w

    def _spatial(self, arr, pos):
        i0, i1, w = self._corners(pos)
        if self.grid.dim == 1:
            return arr[..., i0[:, 0]] * (1 - w[:, 0]) + arr[..., i1[:, 0]] * w[:, 0]
        out = 0.0
        for ix, wx in ((i0[:, 0], 1 - w[:, 0]), (i1[:, 0], w[:, 0])):
            for iy, wy in ((i0[:, 1], 1 - w[:, 1]), (i1[:, 1], w[:, 1])):
                out = out + arr[..., ix, iy] * (wx * wy)
        return out

    def _bracket(self, t):
        dtau = self.times[1] - self.times[0]
        k = int(np.clip(np.floor((t - self.times[0]) / dtau + 1e-12), 0, len(self.times) - 2))
        return k, (t - self.times[k]) / dtau

    def velocity(self, pos, t):
        k, a = self._bracket(t)
        v0 = self._spatial(self.fields[k], pos)
        v1 = self._spatial(self.fields[k + 1], pos)
        return ((1 - a) * v0 + a * v1).T

    def flags(self, pos, t):
        k, a = self._bracket(t)
        k = k + 1 if a > 0.5 else k
        n = np.array(self.grid.n)
        nearest = np.rint((pos - self.lo) / self.h).astype(int)
        nearest = nearest % n if self.grid.periodic else np.clip(nearest, 0, n - 1)
        idx = tuple(nearest.T)
        return self.near[k][idx], self.node[k][idx]


def _dilate(mask: np.ndarray, cells: int, periodic: bool) -> np.ndarray:
    out = mask.copy()
    for ax in range(mask.ndim):
        acc = out.copy()
        for s in range(1, cells + 1):
            for sign in (1, -1):
                shifted = np.roll(out, sign * s, axis=ax)
                if not periodic:
                    edge = [slice(None)] * mask.ndim
                    edge[ax] = slice(0, s) if sign > 0 else slice(-s, None)
                    shifted[tuple(edge)] = False
                acc |= shifted
        out = acc
    return out


def integrate_bundle(
    snapshots: list[WaveField],
    seeds: np.ndarray,
    constants: PhysicalConstants = PhysicalConstants(),
    v_R: np.ndarray | None = None,
    substeps: int = 8,
    method: str = "fd",
) -> TrajectoryBundle:
    """Integrate dx/dt = grad(S)/m + v_R with classic RK4 between snapshots.

    Velocities are interpolated multilinearly in space and linearly in time;
    ``substeps`` RK4 steps are taken per snapshot interval. Paths within two
    cells of a density node fall back to the midpoint rule at half the step.
    """
    if len(snapshots) < 2:
        raise ValueError("need at least two snapshots")
    times = np.array([s.t for s in snapshots])
    gaps = np.diff(times)
    if np.any(gaps <= 0) or np.ptp(gaps) > 1e-9 * gaps.mean():
        raise ValueError("snapshots must be equally spaced in time")
    grid = snapshots[0].grid
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    if seeds.shape[1] != grid.dim:
        seeds = seeds.reshape(-1, grid.dim)
    fields = np.stack([velocity_from_wave(s, constants, v_R, method).v for s in snapshots])
    node = np.stack([s.node_mask for s in snapshots])
    near = np.stack([_dilate(m, 2, grid.periodic) for m in node])
    sampler = _Sampler(grid, fields, near, node, times)
    if not np.all(sampler.inside(seeds)):
        raise ValueError("all seeds must lie inside the grid")

    n_seeds, n_t = len(seeds), len(times)
    paths = np.empty((n_seeds, n_t, grid.dim))
    vels = np.empty_like(paths)
    flags = np.zeros((n_seeds, n_t), dtype=np.int64)
    pos = seeds.copy()
    alive = np.ones(n_seeds, bool)
    paths[:, 0] = pos
    vels[:, 0] = sampler.velocity(pos, times[0])
    near0, node0 = sampler.flags(pos, times[0])
    flags[:, 0] = FLAG_NEAR_NODE * near0 + FLAG_NODE * node0
    h = gaps[0] / substeps
    for k in range(n_t - 1):
        sticky = 0
        for j in range(substeps):
            t = times[k] + j * h
            vel = lambda p, tt: sampler.velocity(p, tt)  # noqa: E731
            k1 = vel(pos, t)
            k2 = vel(pos + 0.5 * h * k1, t + 0.5 * h)
            k3 = vel(pos + 0.5 * h * k2, t + 0.5 * h)
            k4 = vel(pos + h * k3, t + h)
            rk4 = pos + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            near, node = sampler.flags(pos, t)
            if near.any():
                q = pos.copy()
                hh = 0.5 * h
                for s in range(2):
                    ts = t + s * hh
                    q = q + hh * vel(q + 0.5 * hh * vel(q, ts), ts + 0.5 * hh)
                step = np.where(near[:, None], q, rk4)
            else:
                step = rk4
            pos = np.where(alive[:, None], step, pos)
            sticky |= FLAG_NEAR_NODE * near + FLAG_NODE * node
            out = ~sampler.inside(pos)
            if out.any():
                alive &= ~out
        paths[:, k + 1] = pos
        vels[:, k + 1] = sampler.velocity(pos, times[k + 1])
        flags[:, k + 1] = sticky | (FLAG_EXITED * ~alive)
    return TrajectoryBundle(seeds, times, paths, vels, flags)


def free_packet_trajectory(x0, t, sigma0: float, constants: PhysicalConstants = PhysicalConstants()):
    """Bohmian path of the free Gaussian packet: x0 sqrt(1 + (hbar t / 2 m sigma0^2)^2)."""
    tau = 2.0 * constants.m * sigma0**2 / constants.hbar
    return np.asarray(x0) * np.sqrt(1.0 + (np.asarray(t) / tau) ** 2)


# -- flow past a rotating cylinder --------------------------------------------------


@dataclass(frozen=True)
class VortexSceneSpec:
    """Uniform stream u_inf along +x, a doublet of cylinder radius R and a point vortex.

    Positive circulation turns counter-clockwise. Without the doublet the
    cylinder is only a marker and streamlines may cross it.
    """

    u_inf: float = 1.0
    cylinder_radius: float = 1.0
    circulation: float = 0.0
    dipole: bool = True
    box: tuple[float, float, float, float] = (-5.0, 5.0, -3.0, 3.0)

    def __post_init__(self):
        if not self.cylinder_radius > 0:
            raise ValueError("cylinder_radius must be positive")
        x0, x1, y0, y1 = self.box
        margin = 2.0 * self.cylinder_radius
        if not (x0 <= -self.cylinder_radius - margin and x1 >= self.cylinder_radius + margin
                and y0 <= -self.cylinder_radius - margin and y1 >= self.cylinder_radius + margin):
            raise ValueError("domain box must contain the cylinder with a margin of two radii")

    def velocity(self, x, y):
        z = np.asarray(x) + 1j * np.asarray(y)
        R2 = self.cylinder_radius**2 if self.dipole else 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            w = self.u_inf * (1.0 - R2 / z**2) - 1j * self.circulation / (2.0 * np.pi * z)
        return w.real, -w.imag

    def stream_function(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        r2 = x**2 + y**2
        R2 = self.cylinder_radius**2 if self.dipole else 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.u_inf * y * (1.0 - R2 / r2) - self.circulation / (4.0 * np.pi) * np.log(r2)


def stagnation_points(scene: VortexSceneSpec) -> np.ndarray:
    """Zeros of the velocity, found numerically on the cylinder or along its axis of symmetry."""
    R, U, G = scene.cylinder_radius, scene.u_inf, scene.circulation
    if U == 0:
        return np.empty((0, 2))

    def u_theta(th):
        vx, vy = scene.velocity(R * np.cos(th), R * np.sin(th))
        return -np.sin(th) * vx + np.cos(th) * vy

    th = np.linspace(-np.pi, np.pi, 721)
    f = u_theta(th)
    tiny = 1e-12 * (abs(U) + abs(G) / R)
    roots = []
    for a, b, fa, fb in zip(th[:-1], th[1:], f[:-1], f[1:]):
        if abs(fa) <= tiny:
            roots.append(a)
        elif abs(fb) > tiny and fa * fb < 0:
            roots.append(brentq(u_theta, a, b, xtol=1e-15))
    # -pi and pi are the same point on the body
    unique = []
    for r in roots:
        if all(abs(np.angle(np.exp(1j * (r - q)))) > 1e-9 for q in unique):
            unique.append(r)
    roots = unique
    if roots:
        pts = np.array([[R * np.cos(t), R * np.sin(t)] for t in roots])
        return pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    # circulation too strong: a single stagnation point leaves the body along x = 0
    sign = 1.0 if G > 0 else -1.0
    y = brentq(lambda yy: scene.velocity(0.0, sign * yy)[0], R * (1 + 1e-12), 1e3 * R, xtol=1e-15)
    return np.array([[0.0, sign * y]])


@dataclass(frozen=True)
class Streamline:
    s: np.ndarray
    xy: np.ndarray
    psi: np.ndarray
    seed_psi: float
    status: str


def streamlines_around_vortex(scene: VortexSceneSpec, n_lines: int = 15, rtol: float = 1e-11):
    """Streamlines through the superposed flow, seeded on the inflow edge.

    Returns the list of :class:`Streamline` and the stream-function field on a
    regular lattice over the box as ``(x, y, psi)``.
    """
    x0, x1, y0, y1 = scene.box
    R = scene.cylinder_radius
    if scene.u_inf != 0:
        edge = x0 if scene.u_inf > 0 else x1
        ys = y0 + (np.arange(n_lines) + 0.5) * (y1 - y0) / n_lines
        seeds = [(edge, y) for y in ys]
    else:
        rs = R + (np.arange(n_lines) + 1.0) * (min(x1, y1) - R) / (n_lines + 1)
        seeds = [(r, 0.0) for r in rs]
    lines = []
    for sx, sy in seeds:
        if np.hypot(sx, sy) < R and scene.dipole:
            continue
        lines.append(_trace(scene, sx, sy, rtol))
    gx = np.linspace(x0, x1, 201)
    gy = np.linspace(y0, y1, 121)
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    field = scene.stream_function(X, Y)
    field[np.hypot(X, Y) < R] = np.nan
    return lines, (gx, gy, field)


def _trace(scene: VortexSceneSpec, sx: float, sy: float, rtol: float) -> Streamline:
    x0, x1, y0, y1 = scene.box
    R = scene.cylinder_radius
    speed_ref = max(abs(scene.u_inf), abs(scene.circulation) / (2 * np.pi * R), 1e-300)

    def rhs(_s, q):
        vx, vy = scene.velocity(q[0], q[1])
        sp_ = np.hypot(vx, vy)
        return [vx / sp_, vy / sp_] if sp_ > 0 else [0.0, 0.0]

    def leave(_s, q):
        return min(q[0] - x0, x1 - q[0], q[1] - y0, y1 - q[1])

    leave.terminal = True
    leave.direction = -1

    def stall(_s, q):
        vx, vy = scene.velocity(q[0], q[1])
        return np.hypot(vx, vy) - 1e-6 * speed_ref

    stall.terminal = True
    stall.direction = -1
    events = [leave, stall]
    span = 4.0 * ((x1 - x0) + (y1 - y0))
    if scene.u_inf == 0:
        r0 = np.hypot(sx, sy)
        turning = 1.0 if scene.circulation >= 0 else -1.0

        def closed(s, q):
            # inactive for the first three quarters of the loop
            return turning * q[1] if s > 1.5 * np.pi * r0 else -r0

        closed.terminal = True
        closed.direction = 1
        events.append(closed)
        span = 2.0 * np.pi * r0 * 1.5
    sol = solve_ivp(rhs, (0.0, span), [sx, sy], method="DOP853", rtol=rtol, atol=rtol * R,
                    events=events, max_step=0.02 * R, dense_output=False)
    xy = sol.y.T
    status = "open"
    if sol.status == 1:
        if len(sol.t_events[1]):
            status = "stalled"
        elif scene.u_inf == 0 and len(sol.t_events) > 2 and len(sol.t_events[2]):
            status = "closed"
    psi = scene.stream_function(xy[:, 0], xy[:, 1])
    return Streamline(sol.t, xy, psi, float(scene.stream_function(sx, sy)), status)
