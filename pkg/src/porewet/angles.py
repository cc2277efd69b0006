"""Geometric contact angle measurement along contact paths.

At every path node the two interface orientations are recovered by regressing
nearby smoothed-mesh face normals against distance and extrapolating to the
node, where the meshes themselves are least reliable. The contact angle is
the arc cosine of the dot product of the two extrapolated unit normals, with
both normals oriented out of the invading fluid: the fluid-fluid normal into
the defending fluid, the solid-fluid normal into the solid. Measured this way
the angle passes through the denser fluid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .loops import ContactPath
from .meshing import TriangleMesh

METHOD_POLY = "polynomial"
METHOD_LOWESS = "lowess"
METHOD_REJECTED = "rejected"


@dataclass(frozen=True)
class ExtrapolationParams:
    """Gates and regression settings for per-node normal extrapolation.

    slab_half_width : half thickness of the slab around the cut plane normal
        to the local path direction; faces outside never vote.
    max_face_distance : Euclidean cutoff from node to face centroid.
    min_faces : fewer candidate faces than this rejects the node.
    poly_window : distance window feeding the polynomial fit, and the floor
        of the robust-fit bandwidth.
    poly_degree : degree of the weighted polynomial (fluid-fluid side).
    fallback_threshold : degrees; a polynomial result further than this from
        the near-face mean normal is distrusted in favor of the robust fit.
    """

    slab_half_width: float = 0.5
    max_face_distance: float = 12.0
    min_faces: int = 20
    poly_window: float = 3.0
    poly_degree: int = 2
    fallback_threshold: float = 30.0

    def __post_init__(self):
        if not 0 < self.slab_half_width:
            raise ParameterError("slab_half_width must be > 0")
        if not 0 < self.poly_window <= self.max_face_distance:
            raise ParameterError("poly_window must be in (0, max_face_distance]")
        if self.min_faces < 3:
            raise ParameterError("min_faces must be >= 3")
        if self.poly_degree not in (1, 2, 3, 4):
            raise ParameterError("poly_degree must be 1..4")
        if not self.fallback_threshold > 0:
            raise ParameterError("fallback_threshold must be > 0")


@dataclass
class AngleMeasurement:
    """One node's contact angle and quality record.

    theta_deg is None when the node was rejected (insufficient support on
    either interface). method_ff / method_fs name the regression that
    produced each normal.
    """

    path_id: int
    node_index: int
    position: np.ndarray
    theta_deg: float | None
    method_ff: str
    method_fs: str
    n_ff: np.ndarray | None = None
    n_fs: np.ndarray | None = None
    outlier_corrected: bool = False
    one_sided: bool = False

    @property
    def accepted(self) -> bool:
        return self.theta_deg is not None


@dataclass(frozen=True)
class SelectedFaces:
    """Candidate faces for one node and one interface, sorted by distance
    ascending (face index breaks ties)."""

    indices: np.ndarray
    distances: np.ndarray
    normals: np.ndarray

    @property
    def count(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class PathStats:
    """Per-path summary of accepted angles."""

    path_id: int
    kind: str
    count: int
    mean_deg: float
    mode_deg: float
    std_deg: float


def local_frame(path: ContactPath, i: int) -> tuple[np.ndarray, bool] | None:
    """Unit secant direction at node i and whether it was one-sided.

    Loops wrap around; line endpoints use the single adjacent segment and
    report one_sided=True. Returns None when the neighboring nodes coincide
    and no direction exists.
    """
    nodes = path.nodes
    n = len(nodes)
    if n < 2 or not 0 <= i < n:
        return None
    one_sided = False
    if path.closed:
        a, b = nodes[(i - 1) % n], nodes[(i + 1) % n]
    elif i == 0:
        a, b = nodes[0], nodes[1]
        one_sided = True
    elif i == n - 1:
        a, b = nodes[n - 2], nodes[n - 1]
        one_sided = True
    else:
        a, b = nodes[i - 1], nodes[i + 1]
    d = b - a
    nrm = np.linalg.norm(d)
    if nrm == 0:
        return None
    return d / nrm, one_sided


def select_faces(node: np.ndarray, secant: np.ndarray, mesh: TriangleMesh,
                 params: ExtrapolationParams) -> SelectedFaces | None:
    """Faces voting for the normal at a node: centroid within
    max_face_distance of the node and within slab_half_width of the cut
    plane through the node normal to the secant. Both bounds are inclusive.
    Returns None when fewer than min_faces qualify.
    """
    if mesh.n_faces == 0:
        return None
    node = np.asarray(node, dtype=np.float64)
    idx = np.array(sorted(mesh.centroid_tree.query_ball_point(
        node, params.max_face_distance)), dtype=np.int64)
    if len(idx) == 0:
        return None
    offsets = mesh.face_centroids[idx] - node
    in_slab = np.abs(offsets @ secant) <= params.slab_half_width
    idx = idx[in_slab]
    if len(idx) < params.min_faces:
        return None
    dist = np.linalg.norm(mesh.face_centroids[idx] - node, axis=1)
    order = np.lexsort((idx, dist))
    idx, dist = idx[order], dist[order]
    return SelectedFaces(idx, dist, mesh.face_normals[idx])


def _weighted_lstsq(design: np.ndarray, y: np.ndarray, w: np.ndarray):
    sw = np.sqrt(w)
    coef, _, rank, _ = np.linalg.lstsq(design * sw[:, None], y * sw[:, None],
                                       rcond=None)
    return coef, rank


def _poly_at_zero(dist, normals, params: ExtrapolationParams):
    """Weighted polynomial fit of each normal component against distance,
    evaluated at the node (distance zero). Near faces dominate through
    1/(0.5 + d) weights. None when the window holds too few faces or the
    system is rank deficient."""
    mask = dist <= params.poly_window
    if mask.sum() < params.poly_degree + 1:
        return None
    d = dist[mask]
    design = np.vander(d, params.poly_degree + 1, increasing=True)
    coef, rank = _weighted_lstsq(design, normals[mask], 1.0 / (0.5 + d))
    if rank < params.poly_degree + 1:
        return None
    return coef[0]

def _lowess_at_zero(dist, normals, params: ExtrapolationParams):
    """Locally weighted linear fit at distance zero with a tricube kernel.

    The bandwidth is the distance to the min_faces-th face, floored at
    poly_window, so the kernel always covers a workable population. When
    the weighted system degenerates (all support at one distance) the
    kernel-weighted mean stands in.
    """
    k = min(params.min_faces, len(dist)) - 1
    h = max(params.poly_window, dist[k])
    t = np.clip(dist / h, 0.0, 1.0)
    w = (1.0 - t ** 3) ** 3
    active = w > 0
    if active.sum() < 2 or len(np.unique(dist[active])) < 2:
        if w.sum() == 0:
            return normals.mean(axis=0)
        return (normals * w[:, None]).sum(axis=0) / w.sum()
    design = np.stack([np.ones_like(dist), dist], axis=1)
    coef, rank = _weighted_lstsq(design[active], normals[active], w[active])
    if rank < 2:
        return (normals * w[:, None]).sum(axis=0) / w.sum()
    return coef[0]


def _unit(v) -> np.ndarray | None:
    nrm = np.linalg.norm(v)
    if not np.isfinite(nrm) or nrm < 1e-12:
        return None
    return v / nrm


def extrapolate_normal(faces: SelectedFaces, params: ExtrapolationParams,
                       interface: str) -> tuple[np.ndarray | None, str]:
    """Interface normal at the node from the selected faces.

    The fluid-fluid side tries the weighted polynomial first and keeps it
    only while it agrees with the mean of the nearest face normals within
    fallback_threshold degrees; otherwise, and always on the solid-fluid
    side, the robust locally weighted fit is used. Returns (unit normal,
    method) or (None, "rejected").
    """
    if interface not in ("ff", "sf"):
        raise ParameterError(f"interface must be 'ff' or 'sf', got {interface!r}")
    low = _lowess_at_zero(faces.distances, faces.normals, params)
    if interface == "ff":
        poly = _poly_at_zero(faces.distances, faces.normals, params)
        if poly is not None:
            p = _unit(poly)
            k = min(10, faces.count)
            ref = _unit(faces.normals[:k].mean(axis=0))
            if p is not None and ref is not None:
                dev = math.degrees(math.acos(min(1.0, max(-1.0, float(np.dot(p, ref))))))
                if dev <= params.fallback_threshold:
                    return p, METHOD_POLY
    u = _unit(low)
    if u is None:
        return None, METHOD_REJECTED
    return u, METHOD_LOWESS


def contact_angle(n_fs: np.ndarray, n_ff: np.ndarray) -> float:
    """Angle in degrees between the two interface normals at a contact point.

    With the solid-fluid normal pointing into the solid and the fluid-fluid
    normal pointing into the defending fluid, this is the contact angle
    measured through the defending (denser) fluid.
    """
    a = np.asarray(n_fs, dtype=np.float64)
    b = np.asarray(n_ff, dtype=np.float64)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < 1e-12 or nb < 1e-12:
        raise ParameterError("interface normals must be nonzero")
    c = float(np.dot(a, b) / (na * nb))
    return math.degrees(math.acos(max(-1.0, min(1.0, c))))


def measure_node(path: ContactPath, i: int, ff_mesh: TriangleMesh,
                 sf_mesh: TriangleMesh,
                 params: ExtrapolationParams) -> AngleMeasurement:
    """Measure the contact angle at one node; rejection is recorded, never raised."""
    node = path.nodes[i]
    frame = local_frame(path, i)
    if frame is None:
        return AngleMeasurement(path.id, i, node, None,
                                METHOD_REJECTED, METHOD_REJECTED)
    secant, one_sided = frame
    n_ff = n_fs = None
    m_ff = m_fs = METHOD_REJECTED
    sel = select_faces(node, secant, ff_mesh, params)
    if sel is not None:
        n_ff, m_ff = extrapolate_normal(sel, params, "ff")
    sel = select_faces(node, secant, sf_mesh, params)
    if sel is not None:
        n_fs, m_fs = extrapolate_normal(sel, params, "sf")
    theta = None
    if n_ff is not None and n_fs is not None:
        theta = contact_angle(n_fs, n_ff)
    return AngleMeasurement(path.id, i, node, theta, m_ff, m_fs,
                            n_ff=n_ff, n_fs=n_fs, one_sided=one_sided)


def measure_path(path: ContactPath, ff_mesh: TriangleMesh, sf_mesh: TriangleMesh,
                 params: ExtrapolationParams | None = None) -> list[AngleMeasurement]:
    """Contact angle at every node of a path, in node order."""
    params = params or ExtrapolationParams()
    return [measure_node(path, i, ff_mesh, sf_mesh, params)
            for i in range(path.n_nodes)]


def clean_outliers(measurements: list[AngleMeasurement], loop: bool = True,
                   window: int = 15, threshold: float = 3.5,
                   min_count: int = 5) -> list[AngleMeasurement]:
    """Replace locally inconsistent angles by their window median.

    A node is an outlier when its modified z-score against the sliding-window
    median exceeds `threshold`; scores are computed on the original values
    and all replacements applied afterwards, so corrections never cascade.
    The window wraps for loops and truncates at line ends. A zero median
    absolute deviation falls back to the mean absolute deviation; windows
    that are constant flag nothing. Paths with fewer than min_count accepted
    nodes pass through untouched.
    """
    if window < 3 or window % 2 == 0:
        raise ParameterError("window must be an odd integer >= 3")
    acc = [m for m in measurements if m.accepted]
    n = len(acc)
    if n < min_count:
        return measurements
    theta = np.array([m.theta_deg for m in acc])
    half = window // 2
    replaced = np.full(n, np.nan)
    for j in range(n):
        if loop:
            idx = np.arange(j - half, j + half + 1) % n
        else:
            idx = np.arange(max(0, j - half), min(n, j + half + 1))
        w = theta[idx]
        med = float(np.median(w))
        dev = np.abs(w - med)
        mad = float(np.median(dev))
        if mad > 0:
            z = 0.6745 * abs(theta[j] - med) / mad
        else:
            mean_ad = float(np.mean(dev))
            z = 0.7979 * abs(theta[j] - med) / mean_ad if mean_ad > 0 else 0.0
        if z > threshold:
            replaced[j] = med
    for m, r in zip(acc, replaced):
        if np.isfinite(r):
            m.theta_deg = float(r)
            m.outlier_corrected = True
    return measurements


def path_statistics(path: ContactPath,
                    measurements: list[AngleMeasurement],
                    mode_bin_width: float = 2.0) -> PathStats | None:
    """Mean, histogram mode, and population standard deviation of the
    accepted angles on one path. The mode is the center of the fullest
    bin of a fixed-width histogram whose bin centers span [0, 180];
    ties go to the lower bin. Returns None when the path has no
    accepted measurement.
    """
    if not 0 < mode_bin_width <= 180:
        raise ParameterError("mode_bin_width must be in (0, 180]")
    theta = np.array([m.theta_deg for m in measurements if m.accepted])
    if len(theta) == 0:
        return None
    if len(theta) == 1:
        # Degenerate case: the mode of a single measurement is the
        # measurement itself, not a bin center.
        mode = float(theta[0])
    else:
        # Bins are centered on multiples of the width: a value of 30
        # with width 2 lands in [29, 31), not on an edge.
        half = mode_bin_width / 2.0
        centers = np.arange(0.0, 180.0 + half, mode_bin_width)
        edges = np.concatenate(([centers[0] - half], centers + half))
        counts, _ = np.histogram(theta, bins=edges)
        b = int(np.argmax(counts))
        mode = float(centers[b])
    return PathStats(path.id, path.kind, len(theta), float(theta.mean()),
                     float(mode), float(theta.std()))
