import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad, quad

from sqsflow.torus import (
    SPINDLE_SWEEP_B,
    TorusShape,
    cross_section_regions,
    double_cover_rotation,
    helicoidal_ring,
    mesh_measures,
    mesh_torus,
    normal_turning,
    outward_normal,
    phase_shift_rotation,
    regime_of,
    reversal_loci,
    rotate_z,
    rotation_minimizing_frame,
    spindle_sweep,
    surface_point,
    torus_measures,
    torus_point,
    torus_velocity,
)


def quadrature_area(a, b):
    # |r_theta x r_phi| = a |b + a cos theta|
    val, _ = dblquad(lambda th, ph: a * abs(b + a * np.cos(th)), 0, 2 * np.pi, 0, 2 * np.pi, epsabs=1e-12)
    return val


def apple_volume(a, b):
    # solid swept by the part of the tube disc with rho >= 0
    def slab(z):
        half = np.sqrt(a * a - z * z)
        outer, inner = b + half, max(b - half, 0.0)
        return np.pi * (outer**2 - inner**2)

    return quad(slab, -a, a, epsabs=1e-12, limit=200)[0]


@pytest.mark.parametrize("a,b", [(2.0, 4.0), (1.0, 3.0), (2.0, 2.0)])
def test_closed_forms_agree_with_quadrature(a, b):
    m = torus_measures(a, b)
    assert m.area == pytest.approx(quadrature_area(a, b), rel=1e-10)
    assert m.volume == pytest.approx(apple_volume(a, b), rel=1e-10)


def test_ring_mesh_converges_to_the_closed_forms():
    mm = mesh_measures(mesh_torus(TorusShape(2.0, 4.0), 256, 256))
    f = torus_measures(2.0, 4.0)
    assert abs(mm.unsigned_area / f.area - 1) < 1e-3
    assert abs(mm.enclosed_volume / f.volume - 1) < 1e-3
    assert mm.net_signed_volume == pytest.approx(mm.enclosed_volume, rel=1e-12)
    assert mm.reversed_area == 0.0


def test_degenerate_mesh_double_coats_the_sphere():
    mm = mesh_measures(mesh_torus(TorusShape(2.0, 0.0), 256, 256))
    assert abs(mm.unsigned_area / (8 * np.pi * 4) - 1) < 2e-3
    assert abs(mm.enclosed_volume / (4 * np.pi * 8 / 3) - 1) < 5e-3
    assert abs(mm.net_signed_volume) < 1e-9
    assert mm.reversed_area == pytest.approx(mm.unsigned_area / 2, rel=1e-12)


@pytest.mark.parametrize("b", [1.5, 1.0, 0.5])
def test_spindle_enclosed_volume_is_the_apple(b):
    mm = mesh_measures(mesh_torus(TorusShape(2.0, b), 256, 256))
    assert abs(mm.enclosed_volume / apple_volume(2.0, b) - 1) < 1e-3
    assert mm.unsigned_area == pytest.approx(quadrature_area(2.0, b), rel=1e-3)


def test_regimes_and_validation():
    assert [regime_of(2.0, b) for b in (3.0, 2.0, 1.0, 0.0)] == ["ring", "horn", "spindle", "degenerate"]
    assert regime_of(0.0, 1.0) == "string"
    with pytest.raises(ValueError):
        TorusShape(0.0, 1.0)
    with pytest.raises(ValueError):
        TorusShape(1.0, -1.0)
    with pytest.raises(ValueError):
        TorusShape(1.0, 1.0, 0.0, 0.0)


def test_mesh_normals_are_unit_and_turn_slowly_on_ring_tori():
    mesh = mesh_torus(TorusShape(2.0, 4.0), 64, 96)
    assert np.max(np.abs(np.linalg.norm(mesh.normals, axis=-1) - 1)) < 1e-12
    d_theta, d_phi = normal_turning(mesh)
    assert d_theta.max() <= 2 * np.pi / 64 + 1e-12
    assert d_phi.max() <= 2 * np.pi / 96 + 1e-12


@pytest.mark.parametrize("b,count", [(3.0, 0), (2.0, 0), (1.5, 1), (1.0, 1), (0.01, 1), (0.0, 1)])
def test_one_reversal_locus_per_self_intersecting_shape(b, count):
    loci = reversal_loci(mesh_torus(TorusShape(2.0, b), 128, 128))
    assert len(loci) == count
    if count:
        assert max(abs(z) for z in loci[0].z) == pytest.approx(np.sqrt(4.0 - b * b), abs=1e-12)


def test_intersection_circle_height_from_the_tube_circle():
    # independent: where the meridian circle (x - b)^2 + z^2 = a^2 meets x = 0
    a, b = 2.0, 1.0
    th = np.arccos(-b / a)
    z = surface_point(a, b, th, 0.0)[2]
    hits = cross_section_regions(a, b).intersections
    assert np.allclose(np.sort(hits[:, 1]), [-abs(z), abs(z)], atol=1e-12)
    assert abs(z) == pytest.approx(np.sqrt(3.0), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-4, 4), st.floats(-3, 3))
def test_cross_section_classification(x, z):
    a, b = 2.0, 1.0
    label = cross_section_regions(a, b).classify(x, z, a, b)
    in_r = (x - b) ** 2 + z**2 <= a * a
    in_l = (x + b) ** 2 + z**2 <= a * a
    assert label == ("C" if in_r and in_l else "B" if in_r or in_l else "A")


def test_cross_section_regimes():
    assert cross_section_regions(2.0, 3.0).regions == ("A", "B")
    assert cross_section_regions(2.0, 2.0).intersections.tolist() == [[0.0, 0.0]]
    assert cross_section_regions(2.0, 0.0).regime == "degenerate"


def test_spindle_sweep_reproduces_the_parameter_list():
    sweep = spindle_sweep(n_theta=64, n_phi=64)
    assert [e.shape.b for e in sweep] == list(SPINDLE_SWEEP_B)
    assert [len(e.loci) for e in sweep] == [0, 0, 1, 1, 1, 1]
    with pytest.raises(ValueError):
        spindle_sweep(b_list=(1.0, 2.0))


# -- rings -------------------------------------------------------------------------------


@pytest.mark.parametrize("w0,w1,p,q", [(1.0, 0.5, 2, 1), (3.0, 2.0, 3, 2), (1.0, 1.0, 1, 1), (2.0, 5.0, 2, 5)])
def test_rational_rings_close_after_the_expected_turns(w0, w1, p, q):
    ring = helicoidal_ring(TorusShape(2.0, 4.0, w0, w1))
    assert ring.closed and (ring.turns_about_tube, ring.turns_about_axis) == (p, q)
    assert ring.gap < 1e-10 * 2.0
    assert ring.tube_angle[-1] - ring.tube_angle[0] == pytest.approx(2 * np.pi * p)


def test_irrational_ratio_gives_an_open_ring():
    ring = helicoidal_ring(TorusShape(2.0, 4.0, 1.0, np.sqrt(2) / 3))
    assert not ring.closed and ring.gap > 1e-3


def test_velocity_is_the_time_derivative_of_position():
    shape = TorusShape(2.0, 3.0, 1.3, 0.7, 0.2, -0.4)
    t, h = np.linspace(0, 5, 9), 1e-6
    fd = (torus_point(shape, t + h) - torus_point(shape, t - h)) / (2 * h)
    assert np.allclose(torus_velocity(shape, t), fd, atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(0, 10))
def test_phase_shift_is_a_rotation_about_the_axis(delta, t):
    shape = TorusShape(2.0, 4.0, 1.0, 0.5)
    shifted = TorusShape(2.0, 4.0, 1.0, 0.5, phi0=delta)
    rotated = rotate_z(torus_point(shape, t), phase_shift_rotation(shape, delta))
    assert np.allclose(rotated, torus_point(shifted, t - delta / shape.omega0), atol=1e-12)


# -- double cover ---------------------------------------------------------------------------


def test_rotation_minimising_frame_on_a_planar_circle_has_no_holonomy():
    s = np.linspace(0, 2 * np.pi, 2001)
    pts = np.column_stack([np.cos(s), np.sin(s), 0 * s])
    tan = np.column_stack([-np.sin(s), np.cos(s), 0 * s])
    frame = rotation_minimizing_frame(pts, tan, np.array([1.0, 0.0, 0.0]))
    assert np.max(np.abs(np.einsum("ij,ij->i", frame, tan))) < 1e-12
    assert frame[-1] @ frame[0] == pytest.approx(1.0, abs=1e-12)


def test_frame_on_the_double_coated_sphere_flips_then_restores():
    tr = double_cover_rotation(helicoidal_ring(TorusShape(2.0, 0.0)))
    assert tr.checkpoints[360] == pytest.approx(-1.0, abs=1e-12)
    assert tr.checkpoints[720] == pytest.approx(1.0, abs=1e-12)
    assert set(np.unique(tr.orientation_tag)) == {0, 1}
    assert tr.orientation_tag[0] == 0 and tr.orientation_tag[-1] == 0


@pytest.mark.parametrize("b", [0.0, 0.001, 1.0, 2.0, 4.0])
def test_travel_direction_reverses_after_one_tube_turn(b):
    tr = double_cover_rotation(helicoidal_ring(TorusShape(2.0, b)))
    assert tr.arrow_checkpoints[360] == pytest.approx(-1.0, abs=1e-12)
    assert tr.arrow_checkpoints[720] == pytest.approx(1.0, abs=1e-12)


def test_near_degenerate_frame_defect_is_geometric_not_discretisation():
    ring = helicoidal_ring(TorusShape(2.0, 0.001))
    coarse = double_cover_rotation(ring, 10000)
    fine = double_cover_rotation(ring, 40000)
    for deg in (360, 720):
        assert fine.checkpoints[deg] == pytest.approx(coarse.checkpoints[deg], abs=1e-9)
    assert abs(fine.checkpoints[720] - 1) == pytest.approx(4 * abs(fine.checkpoints[360] + 1), rel=0.01)


def test_reverse_traversal_mirrors_the_checkpoints():
    ring = helicoidal_ring(TorusShape(2.0, 0.0))
    fwd, bwd = double_cover_rotation(ring), double_cover_rotation(ring, reverse=True)
    for deg in (360, 720):
        assert bwd.checkpoints[deg] == pytest.approx(fwd.checkpoints[deg], abs=1e-12)


def test_double_cover_needs_a_closed_two_turn_ring():
    with pytest.raises(ValueError):
        double_cover_rotation(helicoidal_ring(TorusShape(2.0, 0.0, 1.0, 1.0)))
    with pytest.raises(ValueError):
        double_cover_rotation(helicoidal_ring(TorusShape(2.0, 0.0, 1.0, np.sqrt(2))))


def test_outward_normal_points_away_from_the_tube_centre():
    th, ph = np.meshgrid(np.linspace(0, 6, 7), np.linspace(0, 6, 5))
    p = surface_point(2.0, 4.0, th, ph)
    centre = surface_point(0.0 + 1e-300, 4.0, th, ph)
    assert np.allclose(p - centre, 2.0 * outward_normal(th, ph))


def test_near_degenerate_frame_defect_scales_with_b_squared():
    defects = []
    for b in (0.002, 0.001, 0.0005):
        tr = double_cover_rotation(helicoidal_ring(TorusShape(2.0, b)))
        defects.append((tr.checkpoints[360] + 1, 1 - tr.checkpoints[720]))
    defects = np.array(defects)
    assert np.allclose(defects[:-1] / defects[1:], 4.0, rtol=1e-3)
