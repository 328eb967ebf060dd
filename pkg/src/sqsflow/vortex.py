"""Radially symmetric vortex with fluctuating viscosity.

The Gaussian (Lamb-Oseen) profile is parametrised by the spreading variable
Sigma(t) = int_0^t nu dtau + sigma^2. Zero-mean viscosity models keep Sigma
bounded, so the averaged vortex does not decay.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded
from scipy.optimize import brentq

from .schrodinger import AccuracyWarning, NumericalAbort

MODEL_KINDS = ("zero", "constant", "cosine", "ou_noise")
COSINE_COMPLIANCE = 0.9
SIGMA_CLAMP_REL = 1e-3


class SigmaClampWarning(RuntimeWarning):
    """Sigma dropped to zero or below and was clamped."""


@dataclass(frozen=True)
class ViscosityModel:
    """Kinematic viscosity nu(t) and the floor sigma of the spreading variable.

    ``constant`` uses ``nu0``; ``cosine`` is nu0*cos(omega*t); ``ou_noise``
    is a stationary Ornstein-Uhlenbeck process with standard deviation
    ``amplitude`` and correlation time ``correlation_time``.
    """

    kind: str = "zero"
    sigma: float = 1.0
    nu0: float = 0.0
    omega: float = 1.0
    amplitude: float = 0.0
    correlation_time: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"kind must be one of {MODEL_KINDS}, got {self.kind!r}")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.kind == "cosine":
            if not self.omega > 0:
                raise ValueError("cosine model needs omega > 0")
            bound = COSINE_COMPLIANCE * self.omega * self.sigma**2
            if abs(self.nu0) > bound:
                raise ValueError(
                    f"cosine amplitude nu0={self.nu0} exceeds {COSINE_COMPLIANCE}*omega*sigma^2={bound:.6g}; "
                    "Sigma would approach zero"
                )
        if self.kind == "ou_noise":
            if self.amplitude < 0 or not self.correlation_time > 0:
                raise ValueError("ou_noise needs amplitude >= 0 and correlation_time > 0")

    @property
    def fluctuation_time(self) -> float | None:
        """Period (cosine) or correlation time (ou_noise); None otherwise."""
        if self.kind == "cosine":
            return 2.0 * np.pi / self.omega
        if self.kind == "ou_noise":
            return self.correlation_time
        return None

    def realize(self, horizon: float, member: int = 0) -> "ViscosityPath":
        """One realisation of nu(t) on [0, horizon]; ``member`` offsets the seed."""
        if self.kind != "ou_noise":
            return ViscosityPath(self, horizon)
        tau = self.correlation_time
        h = tau / 16.0
        n = int(np.ceil(horizon / h)) + 1
        t = h * np.arange(n + 1)
        rng = np.random.default_rng(self.rng_seed + member)
        decay = np.exp(-h / tau)
        kick = self.amplitude * np.sqrt(1.0 - decay**2)
        z = rng.standard_normal(n + 1)
        nu = np.empty(n + 1)
        nu[0] = self.amplitude * z[0]
        for k in range(n):
            nu[k + 1] = decay * nu[k] + kick * z[k + 1]
        integral = np.concatenate([[0.0], np.cumsum(0.5 * h * (nu[1:] + nu[:-1]))])
        return ViscosityPath(self, horizon, t, nu, integral)


@dataclass(frozen=True)
class ViscosityPath:
    """nu(t) and its running integral; tabulated only for the noise model."""

    model: ViscosityModel
    horizon: float
    t_table: np.ndarray | None = None
    nu_table: np.ndarray | None = None
    integral_table: np.ndarray | None = None

    def nu(self, t):
        m = self.model
        t = np.asarray(t, dtype=float)
        if m.kind == "zero":
            return np.zeros_like(t)
        if m.kind == "constant":
            return np.full_like(t, m.nu0)
        if m.kind == "cosine":
            return m.nu0 * np.cos(m.omega * t)
        return np.interp(t, self.t_table, self.nu_table)

    def integral(self, t):
        m = self.model
        t = np.asarray(t, dtype=float)
        if m.kind == "zero":
            return np.zeros_like(t)
        if m.kind == "constant":
            return m.nu0 * t
        if m.kind == "cosine":
            return m.nu0 / m.omega * np.sin(m.omega * t)
        if np.any(t > self.t_table[-1]):
            raise ValueError(f"path tabulated only up to t={self.t_table[-1]:.6g}")
        return np.interp(t, self.t_table, self.integral_table)


def sigma_accumulate(model: ViscosityModel, t, path: ViscosityPath | None = None):
    """Sigma = int_0^t nu dtau + sigma^2, clamped at 1e-3 sigma^2 with a warning."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    if path is None:
        if model.kind == "ou_noise":
            path = model.realize(float(np.max(t)) if t.size else 0.0)
        else:
            path = ViscosityPath(model, float(np.max(t)) if t.size else 0.0)
    Sigma = path.integral(t) + model.sigma**2
    floor = SIGMA_CLAMP_REL * model.sigma**2
    if np.any(Sigma <= 0):
        warnings.warn(f"Sigma fell to {np.min(Sigma):.3g}; clamped to {floor:.3g}", SigmaClampWarning, stacklevel=2)
        Sigma = np.maximum(Sigma, floor)
    return Sigma


# -- Gaussian profile ---------------------------------------------------------------


def _check_sigma(Sigma):
    if np.any(np.asarray(Sigma) <= 0):
        raise ValueError("Sigma must be positive")


def omega_profile(gamma: float, Sigma, r):
    """Vorticity (gamma / 4 Sigma) exp(-r^2 / 4 Sigma)."""
    _check_sigma(Sigma)
    r = np.asarray(r, dtype=float)
    return gamma / (4.0 * Sigma) * np.exp(-(r**2) / (4.0 * Sigma))


def v_profile(gamma: float, Sigma, r):
    """Orbital velocity (gamma / 2r)(1 - exp(-r^2 / 4 Sigma)), finite at the axis."""
    _check_sigma(Sigma)
    r = np.asarray(r, dtype=float)
    x = r**2 / (4.0 * Sigma)
    small = x < 1e-8
    with np.errstate(divide="ignore", invalid="ignore"):
        far = gamma / (2.0 * r) * -np.expm1(-x)
    return np.where(small, gamma * r / (8.0 * Sigma) * (1.0 - 0.5 * x), far)


def core_xi(tol: float = 1e-14) -> float:
    """Positive root of e^xi = 1 + 2 xi."""
    return brentq(lambda x: np.expm1(x) - 2.0 * x, 0.5, 2.0, xtol=tol, rtol=4 * np.finfo(float).eps)


def core_radius(Sigma) -> float:
    """Radius of maximum orbital velocity, 2 sqrt(Sigma xi)."""
    _check_sigma(Sigma)
    return 2.0 * np.sqrt(Sigma * core_xi())


@dataclass(frozen=True)
class VortexProfile:
    gamma: float
    sigma_eff: float
    r: np.ndarray
    omega: np.ndarray
    v: np.ndarray
    r0: float


def gaussian_vortex(gamma: float, Sigma: float, r) -> VortexProfile:
    r = np.asarray(r, dtype=float)
    return VortexProfile(gamma, float(Sigma), r, omega_profile(gamma, Sigma, r), v_profile(gamma, Sigma, r),
                         core_radius(Sigma))


def circulation(v, r, Sigma: float | None = None):
    """Enclosed circulation 2 r v(r).

    With ``Sigma`` the Gaussian envelope is divided out, recovering the
    constant gamma of an exact profile.
    """
    v = np.asarray(v, dtype=float)
    r = np.asarray(r, dtype=float)
    enclosed = 2.0 * r * v
    if Sigma is None:
        return enclosed
    with np.errstate(divide="ignore", invalid="ignore"):
        out = enclosed / -np.expm1(-(r**2) / (4.0 * Sigma))
    return np.where(r == 0, 0.0, out)


# -- radial Crank-Nicolson --------------------------------------------------------


@dataclass(frozen=True)
class RadialHistory:
    """Stored vorticity snapshots ``omega[k]`` at ``t[k]`` on the radial grid ``r``."""

    t: np.ndarray
    r: np.ndarray
    omega: np.ndarray
    nu_mid: np.ndarray
    diagnostics: tuple[str, ...] = field(default=())


def radial_operator(r: np.ndarray):
    """Bands (lower, diag, upper) of d2/dr2 + (1/r) d/dr on a uniform grid from 0.

    Interior rows use the flux form r_{j-1/2}, r_{j+1/2}; the axis row is the
    regular limit 2 d2/dr2 with an even ghost point. The last row is left
    zero for the outer Dirichlet condition.
    """
    n = len(r)
    dr = r[1] - r[0]
    lo, di, up = np.zeros(n), np.zeros(n), np.zeros(n)
    di[0], up[0] = -4.0 / dr**2, 4.0 / dr**2
    j = np.arange(1, n - 1)
    lo[j] = (r[j] - 0.5 * dr) / (r[j] * dr**2)
    up[j] = (r[j] + 0.5 * dr) / (r[j] * dr**2)
    di[j] = -2.0 / dr**2
    return lo, di, up


class _SpectralFilter:
    """Projection onto the slowest-decaying eigenmodes of the radial operator.

    The operator is symmetric under the weights (dr/8, r_1, r_2, ...), so a
    tridiagonal eigensolver gives an orthonormal basis in that inner product.
    """

    def __init__(self, r, lo, di, up, lam_cut):
        n = len(r) - 1
        w = np.empty(n)
        w[0] = (r[1] - r[0]) / 8.0
        w[1:] = r[1:n]
        off = np.sqrt(w[:-1] / w[1:]) * up[: n - 1]
        lam, V = eigh_tridiagonal(di[:n], off)
        keep = -lam <= lam_cut
        self.modes = V[:, keep]
        self.sw = np.sqrt(w)
        self.kept = int(keep.sum())
        self.n = n

    def __call__(self, x):
        y = np.zeros_like(x)
        c = self.modes.T @ (self.sw * x[: self.n])
        y[: self.n] = (self.modes @ c) / self.sw
        return y


def _backward_excursion(integral: np.ndarray) -> float:
    # largest drop of the running integral: how far the flow runs backwards
    return float(np.max(np.maximum.accumulate(integral) - integral))


def evolve_radial_vorticity(
    omega0,
    r,
    model: ViscosityModel,
    dt: float,
    steps: int,
    path: ViscosityPath | None = None,
    store_every: int = 1,
    regularize: bool | None = None,
) -> RadialHistory:
    """Crank-Nicolson for d(omega)/dt = nu(t)(omega'' + omega'/r) with nu at the half step.

    Axis regularity comes from the even ghost point and the outer boundary
    holds omega = 0. Phases with nu < 0 are backward diffusion, which is
    ill-posed on the grid: unless ``regularize`` is False the state is then
    projected onto eigenmodes the run can resolve. A mode of rate lambda is
    kept while machine noise amplified by exp(lambda * B) stays below the
    exp(-lambda * Sigma_min) content of the smoothest profile the run passes
    through (B is the largest backward excursion of int nu).
    """
    r = np.asarray(r, dtype=float)
    omega = np.array(omega0, dtype=float)
    if omega.shape != r.shape or r.ndim != 1:
        raise ValueError("omega0 and r must be matching 1D arrays")
    if not np.all(np.isfinite(omega)):
        raise ValueError("omega0 contains non-finite values")
    if not (dt > 0 and steps >= 1 and store_every >= 1):
        raise ValueError("need dt > 0, steps >= 1, store_every >= 1")
    dr = r[1] - r[0]
    if r[0] != 0 or np.ptp(np.diff(r)) > 1e-9 * dr:
        raise ValueError("radial grid must be uniform and start at r = 0")
    if path is None:
        path = model.realize(dt * steps)
    t_mid = (np.arange(steps) + 0.5) * dt
    nu_mid = path.nu(t_mid)
    notes = []
    worst = float(np.max(np.abs(nu_mid))) * dt / dr**2
    if worst > 10:
        warnings.warn(f"nu*dt/dr^2 reaches {worst:.3g}; Crank-Nicolson accuracy degrades", AccuracyWarning,
                      stacklevel=2)

    lo, di, up = radial_operator(r)
    filt = None
    running = np.concatenate([[0.0], np.cumsum(nu_mid * dt)])
    backward = _backward_excursion(running)
    if regularize is None:
        regularize = backward > 0
    if regularize:
        sigma_min = model.sigma**2 + float(running.min())
        if sigma_min <= 0:
            raise NumericalAbort("Sigma reaches zero during the run; backward diffusion has no solution")
        lam_cut = np.log(1.0 / np.finfo(float).eps) / (backward + sigma_min)
        filt = _SpectralFilter(r, lo, di, up, lam_cut)
        omega = filt(omega)
        notes.append(f"spectral projection onto {filt.kept} modes (lambda <= {lam_cut:.4g})")

    n = len(r)
    stored_t, stored = [0.0], [omega.copy()]
    for k in range(steps):
        a = 0.5 * nu_mid[k] * dt
        rhs = omega.copy()
        rhs[1:-1] += a * (lo[1:-1] * omega[:-2] + di[1:-1] * omega[1:-1] + up[1:-1] * omega[2:])
        rhs[0] += a * (di[0] * omega[0] + up[0] * omega[1])
        rhs[-1] = 0.0
        ab = np.zeros((3, n))
        ab[0, 1:] = -a * up[:-1]
        ab[1] = 1.0 - a * di
        ab[2, :-1] = -a * lo[1:]
        ab[1, -1] = 1.0
        ab[2, -2] = 0.0
        omega = solve_banded((1, 1), ab, rhs)
        if filt is not None:
            omega = filt(omega)
        if not np.all(np.isfinite(omega)):
            raise NumericalAbort(f"non-finite vorticity at step {k + 1}")
        if (k + 1) % store_every == 0 or k + 1 == steps:
            stored_t.append((k + 1) * dt)
            stored.append(omega.copy())
    return RadialHistory(np.array(stored_t), r, np.array(stored), nu_mid, tuple(notes))


# -- long-time averages -----------------------------------------------------------


@dataclass(frozen=True)
class AveragedProfile:
    """Time-averaged vorticity; ``stderr`` is the ensemble standard error (0 for one member)."""

    r: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    members: int
    sample_times: np.ndarray


def long_time_average_profile(
    model: ViscosityModel,
    gamma: float,
    r,
    horizon: float,
    samples: int,
    ensemble: int = 1,
) -> AveragedProfile:
    """Average omega_profile over ``samples`` uniform instants in [0, horizon).

    Noise models average each member in time and then across ``ensemble``
    members seeded ``rng_seed + i``.
    """
    if model.kind == "constant":
        raise ValueError("long-time averages need a zero-mean viscosity model")
    if not (horizon > 0 and samples >= 1 and ensemble >= 1):
        raise ValueError("need horizon > 0, samples >= 1, ensemble >= 1")
    tf = model.fluctuation_time
    if tf is not None and horizon < 10.0 * tf:
        warnings.warn(f"horizon {horizon:.3g} is shorter than 10 fluctuation times ({10 * tf:.3g})", stacklevel=2)
    r = np.asarray(r, dtype=float)
    times = horizon * np.arange(samples) / samples
    members = ensemble if model.kind == "ou_noise" else 1
    per_member = np.empty((members, len(r)))
    for i in range(members):
        path = model.realize(horizon, member=i)
        Sigma = sigma_accumulate(model, times, path)
        per_member[i] = omega_profile(gamma, Sigma[:, None], r[None, :]).mean(axis=0)
    mean = per_member.mean(axis=0)
    stderr = per_member.std(axis=0, ddof=1) / np.sqrt(members) if members > 1 else np.zeros_like(mean)
    return AveragedProfile(r, mean, stderr, members, times)


def radial_l2_error(omega, reference, r) -> float:
    """Relative L2 error with the area measure r dr."""
    r = np.asarray(r, dtype=float)
    diff = np.asarray(omega) - np.asarray(reference)
    return float(np.sqrt(np.trapezoid(diff**2 * r, r) / np.trapezoid(np.asarray(reference) ** 2 * r, r)))


def velocity_from_vorticity(omega, r):
    """v(r) = (1/r) int_0^r omega r' dr' by the trapezoid rule, with v(0) = 0."""
    r = np.asarray(r, dtype=float)
    integrand = np.asarray(omega) * r
    enclosed = np.concatenate([[0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(r))])
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(r > 0, enclosed / np.where(r > 0, r, 1.0), 0.0)
