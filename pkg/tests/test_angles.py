"""Per-node contact-angle measurement: local frames, face selection,
normal extrapolation, the angle formula, outlier repair, and path stats."""

import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from porewet.angles import (
    AngleMeasurement,
    ExtrapolationParams,
    SelectedFaces,
    clean_outliers,
    contact_angle,
    extrapolate_normal,
    local_frame,
    measure_path,
    path_statistics,
    select_faces,
)
from porewet.errors import ParameterError
from porewet.loops import ContactPath, find_three_phase_vertices, trace_contact_paths
from porewet.meshing import TriangleMesh, classify_interfaces, extract_isosurface
from porewet.volume import INVADING, SOLID

from conftest import flat_volume


def line_path(points) -> ContactPath:
    nodes = np.asarray(points, dtype=np.float64)
    return ContactPath(0, nodes, "line", np.arange(len(nodes)))


def circle_path(radius: float, n: int) -> ContactPath:
    phi = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    nodes = np.stack([radius * np.cos(phi), radius * np.sin(phi),
                      np.zeros(n)], axis=1)
    return ContactPath(0, nodes, "loop", np.arange(n))


def measurements_from(values, path_id: int = 0) -> list[AngleMeasurement]:
    return [AngleMeasurement(path_id, i, np.array([float(i), 0.0, 0.0]),
                             float(v), "polynomial", "lowess")
            for i, v in enumerate(values)]


def tri_at(centroid, normal_axis: str = "z") -> np.ndarray:
    """Vertices of a small triangle whose centroid is exactly `centroid`."""
    c = np.asarray(centroid, dtype=np.float64)
    d = 0.03125  # binary-exact so the centroid lands exactly on c
    if normal_axis == "z":
        off = np.array([[d, 0.0, 0.0], [-d, d, 0.0], [0.0, -d, 0.0]])
    else:
        off = np.array([[0.0, d, 0.0], [0.0, -d, d], [0.0, 0.0, -d]])
    return c + off


def mesh_from_centroids(centroids, normal_axis: str = "z") -> TriangleMesh:
    verts, faces = [], []
    for k, c in enumerate(centroids):
        verts.append(tri_at(c, normal_axis))
        faces.append([3 * k, 3 * k + 1, 3 * k + 2])
    return TriangleMesh(np.concatenate(verts), np.array(faces))


# -------------------------------------------------------------- local frames

def test_straight_path_secant_is_axis():
    path = line_path([(0, 0, 0), (1, 0, 0), (2, 0, 0)])
    secant, one_sided = local_frame(path, 1)
    assert np.allclose(secant, (1, 0, 0))
    assert not one_sided


def test_circle_secant_perpendicular_to_radial():
    path = circle_path(10.0, 64)
    for i in (0, 7, 33):
        secant, one_sided = local_frame(path, i)
        radial = path.nodes[i] / np.linalg.norm(path.nodes[i])
        assert abs(float(secant @ radial)) < 1e-6
        assert not one_sided


def test_line_endpoint_one_sided():
    path = line_path([(0, 0, 0), (0, 2, 0), (0, 4, 1)])
    secant, one_sided = local_frame(path, 0)
    assert np.allclose(secant, (0, 1, 0))
    assert one_sided
    secant, one_sided = local_frame(path, 2)
    assert np.allclose(secant, np.array([0, 2, 1]) / math.sqrt(5))
    assert one_sided


def test_coincident_neighbors_yield_no_frame():
    path = line_path([(0, 0, 0), (1, 0, 0), (0, 0, 0)])
    assert local_frame(path, 1) is None


# ------------------------------------------------------------ face selection

@pytest.fixture(scope="module")
def theta90_r28_raw():
    """Unsmoothed classified interfaces and traced loops for a 90-degree
    hemispherical droplet on a flat slab."""
    vol = flat_volume(28, 90.0)
    pair = classify_interfaces(extract_isosurface(vol, INVADING),
                               extract_isosurface(vol, SOLID))
    v_tp = find_three_phase_vertices(pair)
    paths = trace_contact_paths(v_tp, pair)
    return pair, paths


def test_empty_mesh_rejects_node():
    empty = TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    sel = select_faces(np.zeros(3), np.array([1.0, 0, 0]), empty,
                       ExtrapolationParams())
    assert sel is None


def test_flat_solid_faces_are_planar_at_loop_nodes(theta90_r28_raw):
    pair, paths = theta90_r28_raw
    path = max(paths, key=lambda p: p.n_nodes)
    frame = local_frame(path, 0)
    assert frame is not None
    sel = select_faces(path.nodes[0], frame[0], pair.m_sf,
                       ExtrapolationParams())
    assert sel is not None
    assert sel.count >= 20
    # Droplet faces lying on the slab all face straight down into the solid.
    assert np.allclose(sel.normals, [0.0, 0.0, -1.0], atol=1e-6)


def test_distance_gate_is_inclusive():
    anchors = [(0.0, 1.0, 0.0), (0.0, 2.0, 0.0), (0.0, 3.0, 0.0)]
    params = ExtrapolationParams(min_faces=3)
    node = np.zeros(3)
    secant = np.array([1.0, 0.0, 0.0])

    far = mesh_from_centroids(anchors + [(0.0, 12.01, 0.0)])
    sel = select_faces(node, secant, far, params)
    assert 3 not in sel.indices

    near = mesh_from_centroids(anchors + [(0.0, 11.99, 0.0)])
    sel = select_faces(node, secant, near, params)
    assert 3 in sel.indices


def test_slab_gate_and_ordering():
    centroids = [(0.0, 1.0, 0.0), (0.0, 2.0, 0.0), (0.0, 3.0, 0.0),
                 (0.5, 5.0, 0.0),   # exactly on the slab boundary is kept
                 (0.6, 6.0, 0.0)]   # outside the slab
    mesh = mesh_from_centroids(centroids)
    sel = select_faces(np.zeros(3), np.array([1.0, 0.0, 0.0]), mesh,
                       ExtrapolationParams(min_faces=3))
    assert 3 in sel.indices
    assert 4 not in sel.indices
    assert np.all(np.diff(sel.distances) >= 0)


def test_parameter_validation():
    with pytest.raises(ParameterError):
        ExtrapolationParams(slab_half_width=0.0)
    with pytest.raises(ParameterError):
        ExtrapolationParams(poly_window=15.0, max_face_distance=12.0)
    with pytest.raises(ParameterError):
        ExtrapolationParams(min_faces=2)
    with pytest.raises(ParameterError):
        ExtrapolationParams(poly_degree=7)


# ------------------------------------------------------- normal extrapolation

def test_identical_normals_recovered_exactly():
    n = 24
    dist = np.linspace(0.2, 2.8, n)
    normals = np.tile([0.0, 0.0, 1.0], (n, 1))
    faces = SelectedFaces(np.arange(n), dist, normals)
    for interface in ("ff", "sf"):
        vec, method = extrapolate_normal(faces, ExtrapolationParams(), interface)
        assert method in ("polynomial", "lowess")
        assert np.allclose(vec, [0.0, 0.0, 1.0], atol=1e-9)


def sphere_band_faces(radius: float) -> SelectedFaces:
    """Face data sampled from an exact sphere along the meridian band above
    an equator node: radial normals, Euclidean distances to the node."""
    node = np.array([radius, 0.0, 0.0])
    rows = []
    for phi in np.arange(0.01, 0.235, 0.015):    # polar height above equator
        for psi in (-0.008, 0.0, 0.008):         # stays inside the +-0.5 slab
            q = radius * np.array([math.cos(phi) * math.cos(psi),
                                   math.cos(phi) * math.sin(psi),
                                   math.sin(phi)])
            rows.append((float(np.linalg.norm(q - node)), q / radius))
    rows.sort(key=lambda r: r[0])
    return SelectedFaces(np.arange(len(rows)),
                         np.array([r[0] for r in rows]),
                         np.array([r[1] for r in rows]))


def test_sphere_normal_within_two_degrees():
    # The node sits on the contact circle of a radius-50 sphere, with the
    # interface extending only upward: the one-sided distance regression
    # must still land on the horizontal radial direction at the node.
    faces = sphere_band_faces(50.0)
    assert faces.count >= 20
    vec, method = extrapolate_normal(faces, ExtrapolationParams(), "ff")
    assert method != "rejected"
    dev = math.degrees(math.acos(np.clip(float(vec @ [1.0, 0.0, 0.0]), -1.0, 1.0)))
    assert dev < 2.0


def test_wild_polynomial_falls_back_to_lowess():
    # Three distance clusters, all far from the node: the ten nearest
    # normals agree on +z, but the tilt ramp makes the quadratic swing
    # far away once extrapolated back to distance zero.
    def tilted(deg):
        a = math.radians(deg)
        return [math.sin(a), 0.0, math.cos(a)]

    dist = np.concatenate([np.full(10, 2.0), np.full(8, 2.5), np.full(8, 2.95)])
    normals = np.array([tilted(0.0)] * 10 + [tilted(45.0)] * 8
                       + [tilted(90.0)] * 8)
    faces = SelectedFaces(np.arange(26), dist, normals)
    vec, method = extrapolate_normal(faces, ExtrapolationParams(), "ff")
    assert method == "lowess"
    assert math.isclose(float(np.linalg.norm(vec)), 1.0, abs_tol=1e-9)


# ------------------------------------------------------------- angle formula

def test_contact_angle_anchor_values():
    up = np.array([0.0, 0.0, 1.0])
    assert contact_angle(up, up) == pytest.approx(0.0, abs=1e-9)
    assert contact_angle(up, np.array([1.0, 0.0, 0.0])) == pytest.approx(90.0, abs=1e-9)
    n_fs = np.array([0.0, 0.0, -1.0])
    n_ff = np.array([math.sqrt(3.0) / 2.0, 0.0, -0.5])
    assert contact_angle(n_fs, n_ff) == pytest.approx(60.0, abs=1e-9)


def test_contact_angle_symmetric_and_rotation_invariant():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a, b = rng.normal(size=(2, 3))
        rot = Rotation.from_rotvec(rng.normal(size=3)).as_matrix()
        ref = contact_angle(a, b)
        assert contact_angle(b, a) == pytest.approx(ref, abs=1e-9)
        assert contact_angle(rot @ a, rot @ b) == pytest.approx(ref, abs=1e-8)


def test_contact_angle_rejects_zero_vector():
    with pytest.raises(ParameterError):
        contact_angle(np.zeros(3), np.array([0.0, 0.0, 1.0]))


# ------------------------------------------------------------ outlier repair

def test_constant_path_unchanged():
    ms = clean_outliers(measurements_from([45.0] * 20))
    assert all(m.theta_deg == 45.0 for m in ms)
    assert not any(m.outlier_corrected for m in ms)


def test_single_spike_replaced_by_window_median():
    values = [45.0] * 20
    values[8] = 160.0
    ms = clean_outliers(measurements_from(values))
    assert ms[8].theta_deg == pytest.approx(45.0)
    assert ms[8].outlier_corrected
    assert sum(m.outlier_corrected for m in ms) == 1


def test_short_path_passes_through():
    ms = clean_outliers(measurements_from([10.0, 170.0, 10.0, 170.0]))
    assert [m.theta_deg for m in ms] == [10.0, 170.0, 10.0, 170.0]
    assert not any(m.outlier_corrected for m in ms)


def test_cleaning_preserves_count_and_range():
    rng = np.random.default_rng(3)
    values = list(rng.uniform(40.0, 60.0, size=60))
    for i in (5, 23, 51):
        values[i] = 175.0
    ms = clean_outliers(measurements_from(values))
    assert len(ms) == 60
    assert sum(m.accepted for m in ms) == 60
    lo, hi = min(values), max(values + [175.0])
    assert all(lo <= m.theta_deg <= hi for m in ms)


def test_even_window_rejected():
    with pytest.raises(ParameterError):
        clean_outliers(measurements_from([45.0] * 10), window=6)


# -------------------------------------------------------------- path summary

def test_statistics_of_constant_values():
    path = circle_path(10.0, 3)
    st = path_statistics(path, measurements_from([30.0, 30.0, 30.0]))
    assert (st.mean_deg, st.mode_deg, st.std_deg) == (30.0, 30.0, 0.0)
    assert st.count == 3
    assert st.kind == "loop"


def test_statistics_mode_bin_is_centered():
    path = circle_path(10.0, 4)
    st = path_statistics(path, measurements_from([29.0, 30.0, 31.0, 90.0]))
    assert st.mean_deg == pytest.approx(45.0)
    assert st.mode_deg == 30.0


def test_statistics_single_value():
    path = circle_path(10.0, 4)
    ms = measurements_from([77.0, 0.0, 0.0, 0.0])
    for m in ms[1:]:
        m.theta_deg = None
    st = path_statistics(path, ms)
    assert (st.mean_deg, st.mode_deg, st.std_deg, st.count) == (77.0, 77.0, 0.0, 1)


def test_statistics_without_accepted_measurements():
    path = circle_path(10.0, 4)
    ms = measurements_from([1.0, 2.0, 3.0, 4.0])
    for m in ms:
        m.theta_deg = None
    assert path_statistics(path, ms) is None


# ------------------------------------------------------------------ gating

def test_raising_min_faces_never_accepts_more(theta90_r28_raw):
    pair, paths = theta90_r28_raw
    path = max(paths, key=lambda p: p.n_nodes)
    counts = []
    for min_faces in (5, 20, 60, 400):
        params = ExtrapolationParams(min_faces=min_faces)
        ms = measure_path(path, pair.m_ff, pair.m_sf, params)
        counts.append(sum(m.accepted for m in ms))
    assert counts == sorted(counts, reverse=True)
    assert counts[-1] == 0
