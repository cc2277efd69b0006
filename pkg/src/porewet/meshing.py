"""Triangle meshes: isosurface extraction, interface classification, smoothing,
and discrete differential geometry.

All meshes live in voxel coordinates. Faces are wound so that the right-hand
normal points out of the labeled phase they were extracted from.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree
from skimage import measure as _skmeasure

from .errors import DimensionError, ParameterError
from .volume import DEFENDING, INVADING, SOLID, LabeledVolume

FF = 0  # fluid-fluid interface tag
SF = 1  # solid-fluid interface tag


class OpenMeshWarning(UserWarning):
    """A computation assumed a closed mesh but the mesh has boundary edges."""


class TriangleMesh:
    """Indexed triangle mesh.

    Parameters
    ----------
    vertices : (n, 3) float array
    faces : (m, 3) int array
        Vertex indices per triangle; winding defines the face normal.
    """

    def __init__(self, vertices, faces):
        self.vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        if self.faces.size:
            if self.faces.min() < 0 or self.faces.max() >= len(self.vertices):
                raise DimensionError("face indices out of vertex range")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def _cross(self) -> np.ndarray:
        tri = self.vertices[self.faces]
        return np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])

    @cached_property
    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self._cross, axis=1)

    @cached_property
    def face_normals(self) -> np.ndarray:
        """Unit normals from winding; zero-area faces get a zero vector."""
        nrm = np.linalg.norm(self._cross, axis=1)
        out = np.zeros_like(self._cross)
        ok = nrm > 0
        out[ok] = self._cross[ok] / nrm[ok, None]
        return out

    @cached_property
    def face_centroids(self) -> np.ndarray:
        return self.vertices[self.faces].mean(axis=1)

    @cached_property
    def centroid_tree(self) -> cKDTree:
        return cKDTree(self.face_centroids)

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges, each row sorted ascending."""
        e = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]],
                            self.faces[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    @cached_property
    def _edge_face_counts(self) -> np.ndarray:
        e = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]],
                            self.faces[:, [2, 0]]])
        e.sort(axis=1)
        _, counts = np.unique(e, axis=0, return_counts=True)
        return counts

    def is_closed(self) -> bool:
        """True when every edge is shared by exactly two faces."""
        if self.n_faces == 0:
            return False
        return bool(np.all(self._edge_face_counts == 2))

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        """Vertices on edges with face multiplicity != 2."""
        e = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]],
                            self.faces[:, [2, 0]]])
        e.sort(axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        return np.unique(uniq[counts != 2])

    @cached_property
    def vertex_adjacency(self) -> sparse.csr_matrix:
        """Symmetric 0/1 vertex adjacency from mesh edges."""
        e = self.edges
        n = self.n_vertices
        if len(e) == 0:
            return sparse.csr_matrix((n, n))
        i = np.concatenate([e[:, 0], e[:, 1]])
        j = np.concatenate([e[:, 1], e[:, 0]])
        return sparse.csr_matrix((np.ones(len(i)), (i, j)), shape=(n, n))

    @cached_property
    def vertex_normals(self) -> np.ndarray:
        """Area-weighted average of incident face winding normals, unit length."""
        out = np.zeros((self.n_vertices, 3))
        for k in range(3):
            np.add.at(out, self.faces[:, k], self._cross)
        nrm = np.linalg.norm(out, axis=1)
        ok = nrm > 0
        out[ok] /= nrm[ok, None]
        return out

    def submesh(self, face_indices) -> "TriangleMesh":
        """Mesh restricted to the given faces, vertices reindexed compactly."""
        faces = self.faces[np.asarray(face_indices, dtype=np.int64)]
        used, inverse = np.unique(faces, return_inverse=True)
        return TriangleMesh(self.vertices[used], inverse.reshape(-1, 3))


def extract_isosurface(vol: LabeledVolume, label: int) -> TriangleMesh:
    """Marching-cubes surface of one phase at the half-voxel midplane.

    Faces are rewound so their normals point out of the labeled phase.
    A label absent from the volume (or filling it entirely) yields an
    empty mesh: there is no internal boundary to triangulate.
    """
    if label not in (DEFENDING, INVADING, SOLID):
        raise ParameterError(f"label must be 0, 1, or 2, got {label}")
    mask = vol.mask(label)
    if not mask.any() or mask.all():
        return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    verts, faces, _, _ = _skmeasure.marching_cubes(
        mask.astype(np.float32), level=0.5, allow_degenerate=False)
    # marching_cubes winds faces with inward normals for a 0->1 step; flip so
    # the winding normal points out of the labeled phase.
    return TriangleMesh(verts.astype(np.float64), faces[:, ::-1])


@dataclass
class InterfacePair:
    """Faces of a fluid surface split into fluid-fluid and solid-fluid subsets.

    `parent` is the full invading-fluid surface; `sf_faces` indexes the faces
    geometrically coincident with the solid surface, `ff_faces` the rest.
    The two index sets partition the parent faces.
    """

    parent: TriangleMesh
    ff_faces: np.ndarray
    sf_faces: np.ndarray

    @cached_property
    def m_ff(self) -> TriangleMesh:
        return TriangleMesh(self.parent.vertices, self.parent.faces[self.ff_faces])

    @cached_property
    def m_sf(self) -> TriangleMesh:
        return TriangleMesh(self.parent.vertices, self.parent.faces[self.sf_faces])

    @cached_property
    def face_tags(self) -> np.ndarray:
        tags = np.full(self.parent.n_faces, FF, dtype=np.uint8)
        tags[self.sf_faces] = SF
        return tags


def _quantized_tris(mesh: TriangleMesh, tol: float) -> np.ndarray:
    q = np.round(mesh.vertices / tol).astype(np.int64)
    return q[mesh.faces]  # (m, 3, 3)


def _vertex_set_keys(tri_q: np.ndarray) -> np.ndarray:
    """Order-free key per face: the three quantized vertices sorted."""
    order = np.lexsort((tri_q[:, :, 2], tri_q[:, :, 1], tri_q[:, :, 0]), axis=1)
    tri = np.take_along_axis(tri_q, order[:, :, None], axis=1)
    return tri.reshape(len(tri), 9)


def _square_keys(tri_q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Key (axis, plane, bbox) for faces coplanar with one grid midplane.

    Voxel-face contact regions triangulate into such faces; the key ignores
    which diagonal split the square, so complementary-case triangulations
    still agree on it.
    """
    m = len(tri_q)
    keys = np.zeros((m, 6), dtype=np.int64)
    valid = np.zeros(m, dtype=bool)
    if m == 0:
        return keys, valid
    eq = (tri_q[:, 0, :] == tri_q[:, 1, :]) & (tri_q[:, 1, :] == tri_q[:, 2, :])
    coplanar_one = eq.sum(axis=1) == 1
    for axis in range(3):
        sel = coplanar_one & eq[:, axis]
        if not sel.any():
            continue
        others = [b for b in range(3) if b != axis]
        t = tri_q[sel][:, :, others]
        bmin = t.min(axis=1)
        bmax = t.max(axis=1)
        nondeg = (bmax > bmin).all(axis=1)
        rows = np.flatnonzero(sel)[nondeg]
        keys[rows, 0] = axis
        keys[rows, 1] = tri_q[rows, 0, axis]
        keys[rows, 2:4] = bmin[nondeg]
        keys[rows, 4:6] = bmax[nondeg]
        valid[rows] = True
    return keys, valid


def _rows_in(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Boolean mask of rows of `a` that appear among rows of `b`."""
    if len(a) == 0 or len(b) == 0:
        return np.zeros(len(a), dtype=bool)
    both = np.concatenate([b, a])
    _, inverse = np.unique(both, axis=0, return_inverse=True)
    return np.isin(inverse[len(b):], np.unique(inverse[: len(b)]))


def classify_interfaces(fluid_surface: TriangleMesh, solid_surface: TriangleMesh,
                        tol: float = 1e-6) -> InterfacePair:
    """Split a fluid surface into solid-contact and free-interface faces.

    A fluid face counts as solid-fluid when it is geometrically coincident
    with the solid surface: either some solid face has the same vertex set
    within `tol` (vertex order and winding ignored), or the face lies in a
    grid midplane square that solid faces cover with the diagonal flipped,
    which is how complementary marching-cubes cases triangulate the same
    wall quad. Both surfaces must come from the same voxel grid.
    """
    if not tol > 0:
        raise ParameterError("tolerance must be positive")
    m = fluid_surface.n_faces
    all_faces = np.arange(m, dtype=np.int64)
    if m == 0 or solid_surface.n_faces == 0:
        return InterfacePair(fluid_surface, all_faces,
                             np.zeros(0, dtype=np.int64))
    ftri = _quantized_tris(fluid_surface, tol)
    stri = _quantized_tris(solid_surface, tol)
    shared = _rows_in(_vertex_set_keys(ftri), _vertex_set_keys(stri))
    rest = np.flatnonzero(~shared)
    if len(rest):
        fsq, fvalid = _square_keys(ftri[rest])
        ssq, svalid = _square_keys(stri)
        hit = np.zeros(len(rest), dtype=bool)
        hit[fvalid] = _rows_in(fsq[fvalid], ssq[svalid])
        shared[rest[hit]] = True
    return InterfacePair(fluid_surface, all_faces[~shared], all_faces[shared])


def _uniform_laplacian(mesh: TriangleMesh) -> sparse.csr_matrix:
    """Row-normalized neighbor averaging: row i holds 1/|N(i)| for each
    neighbor j of vertex i."""
    adj = mesh.vertex_adjacency.tocsr()
    deg = np.asarray(adj.sum(axis=1)).ravel()
    inv = np.zeros_like(deg)
    nz = deg > 0
    inv[nz] = 1.0 / deg[nz]
    return sparse.diags(inv) @ adj


def taubin_smooth(mesh: TriangleMesh, lam: float = 0.5, mu: float = -0.53,
                  iterations: int = 10) -> TriangleMesh:
    """Two-step feature-preserving smoothing.

    Each iteration displaces every vertex by lam times its uniform-Laplacian
    vector, then by mu times the recomputed vector. With mu < -lam the second
    (inflating) step compensates the shrinkage of the first; mu = 0 degrades
    to pure Laplacian smoothing, kept available as a contrast mode. Vertex
    count, face count, and connectivity are unchanged.
    """
    if not 0 < lam < 1:
        raise ParameterError("lam must be in (0, 1)")
    if mu != 0 and not mu < -lam:
        raise ParameterError("mu must be < -lam (or 0 for pure Laplacian mode)")
    if iterations < 0:
        raise ParameterError("iterations must be >= 0")
    v = mesh.vertices.copy()
    if iterations == 0 or mesh.n_faces == 0:
        return TriangleMesh(v, mesh.faces.copy())
    w = _uniform_laplacian(mesh)
    lonely = np.asarray(w.sum(axis=1)).ravel() == 0
    for _ in range(iterations):
        delta = w @ v - v
        delta[lonely] = 0.0
        v = v + lam * delta
        if mu != 0:
            delta = w @ v - v
            delta[lonely] = 0.0
            v = v + mu * delta
    return TriangleMesh(v, mesh.faces.copy())


def _cotangent_data(mesh: TriangleMesh):
    """Per-vertex mean-curvature normal K and mixed Voronoi areas.

    Standard cotangent discretization: K_i = sum over neighbors of
    (cot a_ij + cot b_ij) (v_i - v_j) / (2 A_mixed,i), with the mixed area
    rule that clips obtuse triangles to half/quarter areas.
    """
    v = mesh.vertices
    f = mesh.faces
    n = mesh.n_vertices
    K = np.zeros((n, 3))
    area = np.zeros(n)
    if len(f) == 0:
        return K, area

    p0, p1, p2 = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    # cot of the angle at each corner = dot of adjacent edges / (2 * face area)
    double_area = np.linalg.norm(np.cross(p1 - p0, p2 - p0), axis=1)
    safe = np.where(double_area > 0, double_area, 1.0)
    cot0 = np.einsum("ij,ij->i", p1 - p0, p2 - p0) / safe
    cot1 = np.einsum("ij,ij->i", p0 - p1, p2 - p1) / safe
    cot2 = np.einsum("ij,ij->i", p0 - p2, p1 - p2) / safe

    # cotangent Laplacian: the angle opposite edge (i, j) weights (v_i - v_j)
    for (i, j, cot) in ((0, 1, cot2), (1, 2, cot0), (2, 0, cot1)):
        vi, vj = f[:, i], f[:, j]
        d = v[vi] - v[vj]
        np.add.at(K, vi, cot[:, None] * d)
        np.add.at(K, vj, -cot[:, None] * d)

    # mixed Voronoi areas
    tri_area = 0.5 * double_area
    obtuse0, obtuse1, obtuse2 = cot0 < 0, cot1 < 0, cot2 < 0
    any_obtuse = obtuse0 | obtuse1 | obtuse2
    e0 = np.einsum("ij,ij->i", p2 - p1, p2 - p1)  # edge opposite corner 0
    e1 = np.einsum("ij,ij->i", p0 - p2, p0 - p2)
    e2 = np.einsum("ij,ij->i", p1 - p0, p1 - p0)
    for (corner, ea, cota, eb, cotb, obtuse_here) in (
            (0, e1, cot1, e2, cot2, obtuse0),
            (1, e2, cot2, e0, cot0, obtuse1),
            (2, e0, cot0, e1, cot1, obtuse2)):
        voronoi = (ea * cota + eb * cotb) / 8.0
        contrib = np.where(any_obtuse,
                           np.where(obtuse_here, tri_area / 2.0, tri_area / 4.0),
                           voronoi)
        np.add.at(area, f[:, corner], contrib)

    ok = area > 0
    K[ok] /= (2.0 * area[ok, None])
    return K, area


def mean_curvature(mesh: TriangleMesh) -> np.ndarray:
    """Per-vertex mean curvature, positive where the surface bends away from
    the winding normal (a sphere with outward normals is positive).

    Boundary and isolated vertices have no full one-ring and get NaN.
    """
    K, area = _cotangent_data(mesh)
    kappa = 0.5 * np.einsum("ij,ij->i", K, mesh.vertex_normals)
    kappa[area <= 0] = np.nan
    if len(mesh.boundary_vertices):
        kappa[mesh.boundary_vertices] = np.nan
    return kappa


def mean_curvature_summary(mesh: TriangleMesh) -> float:
    """Area-weighted mean of the per-vertex curvature over defined vertices."""
    K, area = _cotangent_data(mesh)
    kappa = 0.5 * np.einsum("ij,ij->i", K, mesh.vertex_normals)
    valid = area > 0
    if len(mesh.boundary_vertices):
        valid[mesh.boundary_vertices] = False
    valid &= np.isfinite(kappa)
    if not valid.any():
        raise DimensionError("mesh has no interior vertex with a full triangle fan")
    return float(np.sum(kappa[valid] * area[valid]) / np.sum(area[valid]))


def enclosed_volume(mesh: TriangleMesh) -> float:
    """Signed volume by the divergence theorem, positive for outward winding.

    An open mesh has no well-defined interior; the signed sum is still
    returned but flagged with OpenMeshWarning as approximate.
    """
    if mesh.n_faces == 0:
        return 0.0
    if not mesh.is_closed():
        warnings.warn("mesh has boundary or non-manifold edges; enclosed "
                      "volume is approximate", OpenMeshWarning, stacklevel=2)
    tri = mesh.vertices[mesh.faces]
    return float(np.einsum("ij,ij->i", tri[:, 0],
                           np.cross(tri[:, 1], tri[:, 2])).sum() / 6.0)
