"""Parametric torus, helicoidal rings and the spindle/degenerate regimes.

A point on the torus is fixed by the tube angle theta = omega0 t + phi0 and
the axis angle phi = omega1 t + phi1:

    x = (b + a cos theta) cos phi
    y = (b + a cos theta) sin phi
    z = a sin theta

For b < a the tube crosses the z axis and part of the surface is traversed
with reversed orientation; at b = 0 the surface covers a sphere twice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

RATIONAL_MAX_DENOMINATOR = 1000


@dataclass(frozen=True)
class TorusShape:
    a: float
    b: float
    omega0: float = 1.0
    omega1: float = 0.5
    phi0: float = 0.0
    phi1: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"tube radius a must be positive, got {self.a}")
        if self.b < 0:
            raise ValueError(f"torus radius b must be non-negative, got {self.b}")
        if self.omega0 == 0 and self.omega1 == 0:
            raise ValueError("at least one frequency must be non-zero")

    @property
    def regime(self) -> str:
        return regime_of(self.a, self.b)

    def frequency_ratio(self) -> Fraction | None:
        """omega0/omega1 as an exact fraction, or None if it is not a small rational."""
        return _rational_ratio(self.omega0, self.omega1)


def regime_of(a: float, b: float) -> str:
    if a == 0:
        return "string"
    if b == 0:
        return "degenerate"
    if b < a:
        return "spindle"
    if b == a:
        return "horn"
    return "ring"


def _rational_ratio(w0, w1) -> Fraction | None:
    if w1 == 0 or w0 == 0:
        return None
    exact = Fraction(w0) / Fraction(w1)
    approx = exact.limit_denominator(RATIONAL_MAX_DENOMINATOR)
    return abs(approx) if approx == exact else None


def surface_point(a: float, b: float, theta, phi):
    theta, phi = np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    rad = b + a * np.cos(theta)
    return np.stack([rad * np.cos(phi), rad * np.sin(phi), a * np.sin(theta)], axis=-1)


def torus_point(shape: TorusShape, t):
    """Position at time t, shape ``(..., 3)``."""
    t = np.asarray(t, dtype=float)
    return surface_point(shape.a, shape.b, shape.omega0 * t + shape.phi0, shape.omega1 * t + shape.phi1)


def torus_velocity(shape: TorusShape, t):
    t = np.asarray(t, dtype=float)
    th = shape.omega0 * t + shape.phi0
    ph = shape.omega1 * t + shape.phi1
    rad = shape.b + shape.a * np.cos(th)
    drad = -shape.a * np.sin(th) * shape.omega0
    return np.stack([
        drad * np.cos(ph) - rad * np.sin(ph) * shape.omega1,
        drad * np.sin(ph) + rad * np.cos(ph) * shape.omega1,
        shape.a * np.cos(th) * shape.omega0,
    ], axis=-1)


def outward_normal(theta, phi):
    """Unit normal pointing away from the tube centre line."""
    theta, phi = np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    return np.stack([np.cos(theta) * np.cos(phi), np.cos(theta) * np.sin(phi), np.sin(theta)], axis=-1)


# -- helicoidal rings ---------------------------------------------------------------


@dataclass(frozen=True)
class HelicoidalRing:
    """Samples of the curve over its closing interval (or ``open_turns`` tube turns when open)."""

    shape: TorusShape
    t: np.ndarray
    samples: np.ndarray
    turns_about_tube: int
    turns_about_axis: int
    closed: bool
    gap: float

    @property
    def tube_angle(self) -> np.ndarray:
        return self.shape.omega0 * self.t + self.shape.phi0

    @property
    def axis_angle(self) -> np.ndarray:
        return self.shape.omega1 * self.t + self.shape.phi1


def helicoidal_ring(shape: TorusShape, samples_per_turn: int = 256, open_turns: int = 8) -> HelicoidalRing:
    """Sample the ring over its minimal closing interval.

    With omega0/omega1 = p/q in lowest terms the point makes p turns about
    the tube and q about the z axis before closing at t = 2 pi p / omega0.
    A ratio that is not a small rational gives an open curve sampled over
    ``open_turns`` tube turns.
    """
    if samples_per_turn < 64:
        raise ValueError("need at least 64 samples per tube turn")
    ratio = shape.frequency_ratio()
    if ratio is not None:
        p, q = ratio.numerator, ratio.denominator
        T = 2.0 * np.pi * p / abs(shape.omega0)
        n = samples_per_turn * max(p, q)
        closed = True
    elif shape.omega0 == 0 or shape.omega1 == 0:
        # a meridian or a parallel circle closes after one turn of the moving angle
        w = shape.omega1 if shape.omega0 == 0 else shape.omega0
        p, q = (0, 1) if shape.omega0 == 0 else (1, 0)
        T = 2.0 * np.pi / abs(w)
        n = samples_per_turn
        closed = True
    else:
        p, q = 0, 0
        T = 2.0 * np.pi * open_turns / abs(shape.omega0)
        n = samples_per_turn * open_turns
        closed = False
    t = T * np.arange(n + 1) / n
    pts = torus_point(shape, t)
    gap = float(np.linalg.norm(pts[-1] - pts[0]))
    return HelicoidalRing(shape, t, pts, p, q, closed, gap)


def rotate_z(points, angle: float):
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return np.asarray(points) @ R.T


def phase_shift_rotation(shape: TorusShape, delta: float) -> float:
    """Rotation about z that maps the ring onto its copy with phi0 shifted by ``delta``."""
    return -shape.omega1 * delta / shape.omega0


# -- exact measures -------------------------------------------------------------------


@dataclass(frozen=True)
class TorusMeasures:
    """Closed-form volume 2 pi^2 b a^2 and area 4 pi^2 b a.

    They are true unsigned measures only in the ring and horn regimes.
    """

    volume: float
    area: float
    regime: str


def torus_measures(a: float, b: float) -> TorusMeasures:
    if a < 0 or b < 0:
        raise ValueError("a and b must be non-negative")
    return TorusMeasures(2.0 * np.pi**2 * b * a**2, 4.0 * np.pi**2 * b * a, regime_of(a, b))


# -- meshes -----------------------------------------------------------------------------


@dataclass(frozen=True)
class SurfaceMesh:
    """Periodic (theta, phi) lattice mesh.

    ``vertices`` and ``normals`` are ``(n_theta, n_phi, 3)``; normals follow
    the parametrisation, so they point into the tube where b + a cos(theta) < 0.
    ``quads`` index the flattened vertex array, ``face_area`` is the area of
    each quad and ``face_sign`` the parametric orientation relative to the
    outward tube normal (0 for degenerate faces).
    """

    a: float
    b: float
    theta: np.ndarray
    phi: np.ndarray
    vertices: np.ndarray
    normals: np.ndarray
    quads: np.ndarray
    face_area: np.ndarray
    face_volume: np.ndarray
    face_sign: np.ndarray

    @property
    def n_theta(self) -> int:
        return len(self.theta)

    @property
    def n_phi(self) -> int:
        return len(self.phi)

    @property
    def degenerate(self) -> np.ndarray:
        return self.face_sign == 0


def _tri_terms(p0, p1, p2):
    cross = np.cross(p1 - p0, p2 - p0)
    area = 0.5 * np.linalg.norm(cross, axis=-1)
    vol = np.einsum("...i,...i->...", p0, np.cross(p1, p2)) / 6.0
    return area, vol


def mesh_torus(shape: TorusShape, n_theta: int = 256, n_phi: int = 256) -> SurfaceMesh:
    """Lattice mesh over both angles; the frequencies and phases of ``shape`` are ignored."""
    if n_theta < 32 or n_phi < 32:
        raise ValueError("need n_theta, n_phi >= 32")
    a, b = shape.a, shape.b
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    TH, PH = np.meshgrid(theta, phi, indexing="ij")
    V = surface_point(a, b, TH, PH)
    rad = b + a * np.cos(TH)
    on_axis = np.abs(rad) <= 1e-14 * max(a, b)
    orient = np.where(on_axis, 1.0, np.sign(rad))
    N = orient[..., None] * outward_normal(TH, PH)

    i = np.arange(n_theta)[:, None]
    j = np.arange(n_phi)[None, :]
    ip, jp = (i + 1) % n_theta, (j + 1) % n_phi
    idx = lambda ii, jj: (ii * n_phi + jj).ravel()  # noqa: E731
    quads = np.stack([idx(i, j + 0 * i), idx(i + 0 * j, jp), idx(ip, jp), idx(ip, j + 0 * i)], axis=1)
    flat = V.reshape(-1, 3)
    p00, p01, p11, p10 = (flat[quads[:, k]] for k in range(4))
    # (theta, phi) order (00, 01, 11, 10) turns with the parametric normal
    a1, v1 = _tri_terms(p00, p01, p11)
    a2, v2 = _tri_terms(p00, p11, p10)
    area = a1 + a2
    vol = v1 + v2
    th_c = (theta + np.pi / n_theta)[:, None] + 0 * phi[None, :]
    sign = np.sign(b + a * np.cos(th_c)).ravel()
    scale = max(a, b) ** 2 * (2 * np.pi) ** 2 / (n_theta * n_phi)
    sign = np.where(area <= 1e-12 * scale, 0.0, sign)
    area = np.where(sign == 0, 0.0, area)
    vol = np.where(sign == 0, 0.0, vol)
    return SurfaceMesh(a, b, theta, phi, V, N, quads, area, vol, sign)


@dataclass(frozen=True)
class MeshMeasures:
    """Mesh-integrated area and volumes.

    ``enclosed_volume`` sums divergence-theorem contributions of faces whose
    parametric normal points out of the tube; those faces form the outer
    boundary of the swept solid, so the result is the torus volume for
    b >= a, the apple-shaped solid for a spindle torus and the ball at b = 0.
    ``net_signed_volume`` sums every face with its parametric orientation.
    """

    unsigned_area: float
    enclosed_volume: float
    net_signed_volume: float
    reversed_area: float
    degenerate_faces: int


def mesh_measures(mesh: SurfaceMesh) -> MeshMeasures:
    outer = mesh.face_sign > 0
    return MeshMeasures(
        unsigned_area=float(np.sum(np.abs(mesh.face_area))),
        enclosed_volume=float(np.sum(mesh.face_volume[outer])),
        net_signed_volume=float(np.sum(mesh.face_volume)),
        reversed_area=float(np.sum(mesh.face_area[mesh.face_sign < 0])),
        degenerate_faces=int(np.sum(mesh.face_sign == 0)),
    )


# -- orientation ------------------------------------------------------------------------


@dataclass(frozen=True)
class ReversalLocus:
    """A band of theta rows whose parametric normals are reversed.

    ``theta_range`` brackets the band; ``z`` gives the heights where its
    edges meet the z axis.
    """

    rows: tuple[int, ...]
    theta_range: tuple[float, float]
    z: tuple[float, float]


def normal_turning(mesh: SurfaceMesh) -> tuple[np.ndarray, np.ndarray]:
    """Angles between consecutive vertex normals along theta and along phi lines."""
    N = mesh.normals
    d_theta = np.einsum("ijk,ijk->ij", N, np.roll(N, -1, axis=0))
    d_phi = np.einsum("ijk,ijk->ij", N, np.roll(N, -1, axis=1))
    return np.arccos(np.clip(d_theta, -1, 1)), np.arccos(np.clip(d_phi, -1, 1))


def reversal_loci(mesh: SurfaceMesh) -> list[ReversalLocus]:
    """Connected theta bands entered and left through a normal flip."""
    turn_theta, _ = normal_turning(mesh)
    flips = np.any(turn_theta > np.pi / 2, axis=1)  # flip between row i and i+1
    nt = mesh.n_theta
    edges = np.flatnonzero(flips)
    if len(edges) == 0:
        return []
    TH, PH = np.meshgrid(mesh.theta, mesh.phi, indexing="ij")
    reversed_rows = np.all(np.einsum("ijk,ijk->ij", mesh.normals, outward_normal(TH, PH)) < 0, axis=1)
    loci = []
    # walk the cycle of rows starting after a flip edge
    for e in edges:
        start = (e + 1) % nt
        if not reversed_rows[start]:
            continue
        rows = []
        k = start
        while reversed_rows[k] and len(rows) < nt:
            rows.append(int(k))
            k = (k + 1) % nt
        th0, th1 = mesh.theta[rows[0]], mesh.theta[rows[-1]]
        loci.append(ReversalLocus(tuple(rows), (float(th0), float(th1)), _axis_crossings(mesh.a, mesh.b)))
    return loci


def _axis_crossings(a, b):
    h = np.sqrt(max(a * a - b * b, 0.0))
    return (float(h), float(-h))


# -- cross-section ------------------------------------------------------------------------


@dataclass(frozen=True)
class CrossSection:
    """Regions of the medial (x, z) cut: A outside, B inside the tube, C the spindle lens."""

    regime: str
    regions: tuple[str, ...]
    intersections: np.ndarray  # (k, 2) as (x, z)

    def classify(self, x, z, a: float, b: float):
        """Region label per point: 'A', 'B' or 'C' (points on a circle count as inside)."""
        x, z = np.asarray(x, float), np.asarray(z, float)
        in_right = (x - b) ** 2 + z**2 <= a * a
        in_left = (x + b) ** 2 + z**2 <= a * a
        out = np.full(np.broadcast(x, z).shape, "A", dtype="<U1")
        out[in_right | in_left] = "B"
        if "C" in self.regions:
            out[in_right & in_left] = "C"
        return out


def cross_section_regions(a: float, b: float) -> CrossSection:
    if not a > 0 or b < 0:
        raise ValueError("need a > 0 and b >= 0")
    regime = regime_of(a, b)
    if regime == "ring":
        return CrossSection(regime, ("A", "B"), np.empty((0, 2)))
    if regime == "horn":
        return CrossSection(regime, ("A", "B"), np.array([[0.0, 0.0]]))
    if regime == "degenerate":
        # both tube circles coincide with the sphere's great circle
        return CrossSection(regime, ("A", "sphere"), np.empty((0, 2)))
    h = np.sqrt(a * a - b * b)
    return CrossSection(regime, ("A", "B", "C"), np.array([[0.0, h], [0.0, -h]]))


# -- sweeps -----------------------------------------------------------------------------------

SPINDLE_SWEEP_B = (3.0, 2.0, 1.5, 1.0, 0.5, 0.01)
RING_SWEEP_B = (4.0, 3.0, 2.0, 1.0, 0.001)


@dataclass(frozen=True)
class SweepEntry:
    shape: TorusShape
    mesh: SurfaceMesh
    measures: MeshMeasures
    formula: TorusMeasures
    regions: CrossSection
    loci: list[ReversalLocus]
    ring: HelicoidalRing


def spindle_sweep(a: float = 2.0, b_list=SPINDLE_SWEEP_B, n_theta: int = 128, n_phi: int = 128,
                  omega0: float = 1.0, omega1: float = 0.5) -> list[SweepEntry]:
    """Mesh, measures, regions and ring for each b in a descending list."""
    b_list = [float(b) for b in b_list]
    if any(b < 0 for b in b_list) or any(x < y for x, y in zip(b_list, b_list[1:])):
        raise ValueError("b_list must be descending and non-negative")
    out = []
    for b in b_list:
        shape = TorusShape(a, b, omega0, omega1)
        mesh = mesh_torus(shape, n_theta, n_phi)
        out.append(SweepEntry(shape, mesh, mesh_measures(mesh), torus_measures(a, b), cross_section_regions(a, b),
                              reversal_loci(mesh), helicoidal_ring(shape)))
    return out


# -- double cover ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DoubleCoverTrace:
    """Frame transported along a closed ring.

    ``dots`` is the transported direction against the initial one;
    ``checkpoints`` maps each multiple of 360 degrees of tube angle to that
    dot; ``orientation_tag`` alternates 0/1 with every completed 360 degrees.
    ``arrow_checkpoints`` holds the same comparison for the direction of
    travel at the point where the tube angle is 90 degrees (the top of the
    sphere when b = 0).
    """

    t: np.ndarray
    tube_angle: np.ndarray
    axis_angle: np.ndarray
    frame: np.ndarray
    dots: np.ndarray
    checkpoints: dict = field(default_factory=dict)
    orientation_tag: np.ndarray | None = None
    arrow_checkpoints: dict = field(default_factory=dict)


def rotation_minimizing_frame(points: np.ndarray, tangents: np.ndarray, r0: np.ndarray) -> np.ndarray:
    """Transport r0 along a polyline with the double-reflection method."""
    T = tangents / np.linalg.norm(tangents, axis=1, keepdims=True)
    r = np.empty_like(points)
    r[0] = r0 - np.dot(r0, T[0]) * T[0]
    r[0] /= np.linalg.norm(r[0])
    for i in range(len(points) - 1):
        v1 = points[i + 1] - points[i]
        c1 = v1 @ v1
        if c1 == 0:
            r[i + 1] = r[i]
            continue
        rL = r[i] - (2.0 / c1) * (v1 @ r[i]) * v1
        tL = T[i] - (2.0 / c1) * (v1 @ T[i]) * v1
        v2 = T[i + 1] - tL
        c2 = v2 @ v2
        r[i + 1] = rL - (2.0 / c2) * (v2 @ rL) * v2 if c2 > 0 else rL
    return r


def double_cover_rotation(ring: HelicoidalRing, samples: int = 10000, reverse: bool = False) -> DoubleCoverTrace:
    """Transport the outward surface normal along a two-turn ring.

    Checkpoints sit at every 360 degrees of tube angle; the ring closes after
    720 degrees.
    """
    if not ring.closed:
        raise ValueError("double-cover analysis needs a closed ring")
    if ring.turns_about_tube != 2:
        raise ValueError(f"ring makes {ring.turns_about_tube} tube turns; need 2")
    shape = ring.shape
    T = ring.t[-1]
    t = T * np.arange(samples + 1) / samples
    if reverse:
        t = t[::-1]
    pts = torus_point(shape, t)
    tan = torus_velocity(shape, t) * (-1.0 if reverse else 1.0)
    th0 = shape.omega0 * t[0] + shape.phi0
    ph0 = shape.omega1 * t[0] + shape.phi1
    frame = rotation_minimizing_frame(pts, tan, outward_normal(th0, ph0))
    dots = frame @ frame[0]
    tube = shape.omega0 * t + shape.phi0
    travelled = np.abs(tube - tube[0])
    checkpoints = {}
    for k in (1, 2):
        i = int(np.argmin(np.abs(travelled - 2.0 * np.pi * k)))
        checkpoints[360 * k] = float(dots[i])
    tag = (np.floor(travelled / (2.0 * np.pi) + 1e-9).astype(int) % 2)
    turn = 2.0 * np.pi / shape.omega0 * (-1.0 if reverse else 1.0)
    t_top = (np.pi / 2 - shape.phi0) / shape.omega0
    arrows = torus_velocity(shape, t_top + turn * np.arange(3)) * (-1.0 if reverse else 1.0)
    arrows /= np.linalg.norm(arrows, axis=1, keepdims=True)
    arrow_checkpoints = {360 * k: float(arrows[k] @ arrows[0]) for k in (1, 2)}
    return DoubleCoverTrace(t, tube, shape.omega1 * t + shape.phi1, frame, dots, checkpoints, tag, arrow_checkpoints)
