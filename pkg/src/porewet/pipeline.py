"""End-to-end pipelines: volume in, per-node angles and per-path summaries out.

The measurement chain: drop speck-sized invading clusters, extract the
invading-fluid and solid surfaces, split the invading surface into free and
wall-contact faces, trace the three-phase vertices into contact paths, then
smooth and measure. Both surfaces are smoothed as whole closed meshes so the
smoother sees the full neighborhood on every side of the contact line. The
solid-fluid normal is fitted on the smoothed solid surface itself (wound into
the solid): the solid shape is independent of where the fluids sit, so at a
contact node the fit interpolates between faces on both sides of the loop
instead of extrapolating off the edge of a wall patch. The fluid-fluid normal
is fitted on the free faces of the smoothed invading surface, skipping a thin
collar around the contact line where the voxel chamfer survives smoothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .angles import (AngleMeasurement, PathStats, clean_outliers, measure_path,
                     path_statistics)
from .config import PipelineConfig
from .loops import ContactPath, find_three_phase_vertices, smooth_contact_path, \
    trace_contact_paths
from .meshing import InterfacePair, TriangleMesh, classify_interfaces, \
    extract_isosurface, taubin_smooth
from .parallel import map_ordered
from .volume import INVADING, SOLID, LabeledVolume, remove_small_clusters
from .wetmap import PathAngles


@dataclass
class PathResult:
    """Everything measured on one contact path."""

    raw: ContactPath
    smoothed: ContactPath
    measurements: list[AngleMeasurement] = field(default_factory=list)
    stats: PathStats | None = None
    measured: bool = False


@dataclass
class MeasureResult:
    volume: LabeledVolume
    pair: InterfacePair | None
    solid: TriangleMesh | None
    paths: list[PathResult]
    notes: list[str] = field(default_factory=list)

    def all_measurements(self) -> list[AngleMeasurement]:
        out = []
        for p in self.paths:
            out.extend(p.measurements)
        return out

    def accepted_angles(self) -> np.ndarray:
        return np.array([m.theta_deg for m in self.all_measurements()
                         if m.accepted])

    def global_stats(self) -> tuple[float, float, int]:
        """Pooled mean, population std, and count of accepted angles."""
        t = self.accepted_angles()
        if len(t) == 0:
            return float("nan"), float("nan"), 0
        return float(t.mean()), float(t.std()), len(t)

    def path_angles(self) -> list[PathAngles]:
        """Mapper inputs for every path with at least one accepted angle."""
        out = []
        for p in self.paths:
            if p.stats is not None:
                out.append(PathAngles(p.smoothed.id, p.smoothed.nodes,
                                      p.stats.mean_deg, p.stats.count))
        return out


def fit_meshes(pair: InterfacePair, solid: TriangleMesh, v_tp: np.ndarray,
               standoff: float) -> tuple[TriangleMesh, TriangleMesh]:
    """Build the two face populations the normal fits draw from.

    Fluid-fluid: the free faces of the (smoothed) invading surface minus
    every face whose centroid lies within `standoff` of a three-phase vertex.
    Solid-fluid: the whole (smoothed) solid surface rewound so its normals
    point into the solid, matching the wall-contact faces of the invading
    surface.
    """
    parent = pair.parent
    ff_faces = pair.ff_faces
    if standoff > 0 and len(v_tp) and len(ff_faces):
        cen = parent.face_centroids[ff_faces]
        d, _ = cKDTree(parent.vertices[v_tp]).query(cen)
        ff_faces = ff_faces[d >= standoff]
    ff_mesh = TriangleMesh(parent.vertices, parent.faces[ff_faces])
    sf_mesh = TriangleMesh(solid.vertices, solid.faces[:, ::-1])
    return ff_mesh, sf_mesh


def measure_volume(vol: LabeledVolume, cfg: PipelineConfig | None = None,
                   workers: int | None = None) -> MeasureResult:
    """Measure contact angles everywhere the three phases meet."""
    cfg = cfg or PipelineConfig()
    notes: list[str] = []
    vol = remove_small_clusters(vol, INVADING, cfg.v_min, cfg.connectivity)

    s_inv = extract_isosurface(vol, INVADING)
    s_sol = extract_isosurface(vol, SOLID)
    if s_inv.n_faces == 0:
        notes.append("no invading-fluid surface in volume")
        return MeasureResult(vol, None, None, [], notes)
    if s_sol.n_faces == 0:
        notes.append("no solid surface in volume")

    pair_raw = classify_interfaces(s_inv, s_sol)
    smoothed_parent = taubin_smooth(pair_raw.parent, cfg.taubin.lam,
                                    cfg.taubin.mu, cfg.taubin.iterations_ff)
    pair = InterfacePair(smoothed_parent, pair_raw.ff_faces, pair_raw.sf_faces)
    solid = taubin_smooth(s_sol, cfg.taubin.lam, cfg.taubin.mu,
                          cfg.taubin.iterations_sf)

    v_tp = find_three_phase_vertices(pair)
    raw_paths = trace_contact_paths(v_tp, pair)
    if not raw_paths:
        notes.append("no three-phase contact found")
        return MeasureResult(vol, pair, solid, [], notes)

    ff_mesh, sf_mesh = fit_meshes(pair, solid, v_tp, cfg.tp_standoff)

    def run_one(raw: ContactPath) -> PathResult:
        smoothed = smooth_contact_path(raw, cfg.spline.smoothing,
                                       cfg.spline.spacing)
        result = PathResult(raw=raw, smoothed=smoothed)
        if smoothed.n_nodes < cfg.spline.min_nodes:
            return result
        ms = measure_path(smoothed, ff_mesh, sf_mesh, cfg.extrapolation)
        clean_outliers(ms, loop=smoothed.closed, window=cfg.outliers.window,
                       threshold=cfg.outliers.threshold,
                       min_count=cfg.outliers.min_count)
        result.measurements = ms
        result.stats = path_statistics(smoothed, ms)
        result.measured = True
        return result

    results = map_ordered(run_one, raw_paths, workers)
    skipped = sum(1 for r in results if not r.measured)
    if skipped:
        notes.append(f"{skipped} path(s) too short to measure")
    return MeasureResult(vol, pair, solid, results, notes)
