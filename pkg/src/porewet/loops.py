"""Three-phase contact paths: detection on the classified surface, ordered
tracing, and B-spline smoothing.

A contact path is the ordered polyline of mesh vertices where fluid-fluid and
solid-fluid faces meet: closed loops in the interior, open lines where the
contact line runs into the image boundary or a junction.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, replace

import numpy as np
from scipy import interpolate

from .errors import ParameterError
from .meshing import InterfacePair

MIN_MEASURE_NODES = 8  # smoothed paths shorter than this carry too little arc


@dataclass(frozen=True)
class ContactPath:
    """Ordered three-phase contact polyline.

    nodes are voxel-coordinate positions; source_vertex_ids point back into
    the parent mesh vertex table and keep their count through smoothing.
    kind is "loop" (closed) or "line" (open). flags collect quality notes
    such as "junction", "degenerate", "unsmoothed", "spline_fallback".
    """

    id: int
    nodes: np.ndarray
    kind: str
    source_vertex_ids: np.ndarray
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes",
                           np.asarray(self.nodes, dtype=np.float64).reshape(-1, 3))
        if self.kind not in ("loop", "line"):
            raise ParameterError(f"path kind must be 'loop' or 'line', got {self.kind!r}")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def closed(self) -> bool:
        return self.kind == "loop"

    @property
    def length(self) -> float:
        """Polyline length, including the closing segment for loops."""
        if self.n_nodes < 2:
            return 0.0
        seg = np.linalg.norm(np.diff(self.nodes, axis=0), axis=1).sum()
        if self.closed:
            seg += float(np.linalg.norm(self.nodes[0] - self.nodes[-1]))
        return float(seg)

    def turning_angle_sum(self) -> float:
        """Sum of absolute discrete turning angles (radians) along the path."""
        p = self.nodes
        if self.closed:
            p = np.vstack([p[-1:], p, p[:1]])
        if len(p) < 3:
            return 0.0
        d = np.diff(p, axis=0)
        nrm = np.linalg.norm(d, axis=1)
        ok = nrm > 0
        d = d[ok] / nrm[ok, None]
        cosang = np.clip(np.einsum("ij,ij->i", d[:-1], d[1:]), -1.0, 1.0)
        return float(np.arccos(cosang).sum())


def find_three_phase_vertices(pair: InterfacePair) -> np.ndarray:
    """Vertex ids of the parent mesh used by both face subsets, ascending."""
    if len(pair.ff_faces) == 0 or len(pair.sf_faces) == 0:
        return np.zeros(0, dtype=np.int64)
    ff_v = np.unique(pair.parent.faces[pair.ff_faces])
    sf_v = np.unique(pair.parent.faces[pair.sf_faces])
    return np.intersect1d(ff_v, sf_v)


def _tp_adjacency(v_tp: np.ndarray, pair: InterfacePair) -> dict[int, list[int]]:
    edges = pair.parent.edges
    keep = np.isin(edges[:, 0], v_tp) & np.isin(edges[:, 1], v_tp)
    nbrs: dict[int, list[int]] = defaultdict(list)
    for a, b in edges[keep]:
        nbrs[int(a)].append(int(b))
        nbrs[int(b)].append(int(a))
    for v in v_tp:
        nbrs.setdefault(int(v), [])
    for v in nbrs:
        nbrs[v].sort()
    return nbrs


def trace_contact_paths(v_tp: np.ndarray, pair: InterfacePair) -> list[ContactPath]:
    """Order the three-phase vertices into loops and lines.

    Walks greedily from a deterministic seed (open endpoints first, then
    lowest vertex id), at each step taking the unvisited neighbor that turns
    the least; id breaks ties. Every vertex lands in exactly one path.
    Vertices with more than two neighbors mark junctions and flag the paths
    passing through them; unreachable leftovers become flagged single-node
    stubs so the partition stays complete.
    """
    v_tp = np.asarray(v_tp, dtype=np.int64)
    if len(v_tp) == 0:
        return []
    verts = pair.parent.vertices
    nbrs = _tp_adjacency(v_tp, pair)
    degree = {v: len(n) for v, n in nbrs.items()}
    unvisited = set(nbrs.keys())
    visited: set[int] = set()
    paths: list[ContactPath] = []

    def seed() -> int:
        ends = [v for v in unvisited if degree[v] <= 1]
        return min(ends) if ends else min(unvisited)

    while unvisited:
        start = seed()
        chain = [start]
        unvisited.discard(start)
        visited.add(start)
        prev_dir = None
        current = start
        junction = degree[start] > 2
        while True:
            cands = [v for v in nbrs[current] if v not in visited]
            if not cands:
                break
            if prev_dir is None:
                nxt = cands[0]
            else:
                best, best_cos = cands[0], -2.0
                for v in cands:
                    d = verts[v] - verts[current]
                    nd = np.linalg.norm(d)
                    c = -2.0 if nd == 0 else float(np.dot(prev_dir, d / nd))
                    if c > best_cos + 1e-12:
                        best, best_cos = v, c
                nxt = best
            d = verts[nxt] - verts[current]
            nd = np.linalg.norm(d)
            if nd > 0:
                prev_dir = d / nd
            chain.append(nxt)
            unvisited.discard(nxt)
            visited.add(nxt)
            junction = junction or degree[nxt] > 2
            current = nxt

        flags: tuple[str, ...] = ("junction",) if junction else ()
        if len(chain) >= 3 and start in nbrs[chain[-1]]:
            kind = "loop"
        else:
            kind = "line"
            if len(chain) < 2:
                flags = flags + ("degenerate",)
        ids = np.array(chain, dtype=np.int64)
        paths.append(ContactPath(len(paths), verts[ids], kind, ids, flags))
    return paths


def _resample(points: np.ndarray, closed: bool, spacing: float) -> np.ndarray:
    """Resample a polyline at uniform arc length."""
    p = np.vstack([points, points[:1]]) if closed else points
    seg = np.linalg.norm(np.diff(p, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total == 0:
        return points[:1].copy()
    if closed:
        # ceil keeps the realized spacing <= requested, so the closing
        # chord can never exceed one spacing unit
        n_out = max(math.ceil(total / spacing), 4)
        s = np.arange(n_out) * (total / n_out)
    else:
        n_out = max(math.ceil(total / spacing) + 1, 2)
        s = np.linspace(0.0, total, n_out)
    out = np.empty((len(s), 3))
    for k in range(3):
        out[:, k] = np.interp(s, cum, p[:, k])
    return out


def _moving_average(points: np.ndarray, closed: bool, passes: int = 2) -> np.ndarray:
    p = points.copy()
    for _ in range(passes):
        if closed:
            p = (np.roll(p, 1, axis=0) + p + np.roll(p, -1, axis=0)) / 3.0
        else:
            q = p.copy()
            q[1:-1] = (p[:-2] + p[1:-1] + p[2:]) / 3.0
            p = q
    return p


def smooth_contact_path(path: ContactPath, smoothing: float = 0.25,
                        spacing: float = 1.0) -> ContactPath:
    """Replace the staircase polyline by a smoothing cubic B-spline, resampled
    at uniform arc length.

    The spline residual budget is n * smoothing**2, i.e. an RMS node
    displacement of about `smoothing` voxels: enough to absorb voxelization
    zigzag without dragging the path off the surface. Loops use a periodic
    spline. Paths with fewer than 4 nodes pass through flagged "unsmoothed";
    a failed spline fit falls back to moving-average smoothing and flags
    "spline_fallback".
    """
    if smoothing < 0:
        raise ParameterError("smoothing must be >= 0")
    if not spacing > 0:
        raise ParameterError("spacing must be > 0")
    n = path.n_nodes
    if n < 4:
        return replace(path, flags=path.flags + ("unsmoothed",))
    closed = path.closed
    base = path.nodes
    seg = np.linalg.norm(np.diff(base, axis=0), axis=1)
    base = base[np.concatenate([[True], seg > 0])]
    if closed and len(base) > 1 and np.array_equal(base[-1], base[0]):
        base = base[:-1]
    try:
        if len(base) < 4:
            raise ValueError("too few distinct nodes for a cubic fit")
        # periodic fits expect the wrap-around point repeated at the end
        pts = np.vstack([base, base[:1]]) if closed else base
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        u = np.concatenate([[0.0], np.cumsum(seg)])
        u /= u[-1]
        tck, _ = interpolate.splprep(pts.T, u=u, s=n * smoothing ** 2,
                                     per=1 if closed else 0, k=3)
        dense_u = np.linspace(0.0, 1.0, max(256, 16 * n))
        dense = np.stack(interpolate.splev(dense_u, tck), axis=1)
        nodes = _resample(dense, closed=False, spacing=spacing) if not closed \
            else _resample(dense[:-1], closed=True, spacing=spacing)
        flags = path.flags
    except Exception:
        sm = _moving_average(path.nodes, closed)
        nodes = _resample(sm, closed, spacing)
        flags = path.flags + ("spline_fallback",)
    if closed and len(nodes) < 3:
        return replace(path, flags=path.flags + ("unsmoothed",))
    return ContactPath(path.id, nodes, path.kind, path.source_vertex_ids, flags)
