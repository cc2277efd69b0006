"""Volume-wide wettability fields interpolated from measured contact paths.

Assignment runs in three stages of decreasing confidence, and a later stage
never overwrites an earlier one:

1. uninvaded pore regions: connected pore components never reached by the
   invading fluid keep their initial strongly water-wet angle;
2. invaded objects: each connected invading-fluid object takes one angle,
   the count-weighted inverse-distance blend of the contact paths touching
   its dilated hull;
3. transition shells: defending-fluid voxels near any contact path get a
   per-voxel count-weighted inverse-distance blend.

Everything else stays unassigned (NaN) and is tracked in a provenance grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import DimensionError, ParameterError
from .volume import DEFENDING, INVADING, SOLID, LabeledVolume, label_mask

PROV_SOLID = 0
PROV_UNINVADED = 1
PROV_OBJECT = 2
PROV_TRANSITION = 3
PROV_UNASSIGNED = 255


@dataclass(frozen=True)
class MapParams:
    """Controls for field interpolation.

    uninvaded_angle : degrees assigned to never-invaded pore components.
    dilation_radius : Chebyshev radius of the object hull used to associate
        contact paths with invading objects.
    idw_power : exponent of the inverse-distance weights.
    max_distance : voxel reach of stage-3 interpolation and of the orphan
        fallback in stage 2.
    connectivity : voxel connectivity (6 or 26) for components.
    """

    uninvaded_angle: float = 30.0
    dilation_radius: int = 3
    idw_power: float = 2.0
    max_distance: float = 20.0
    connectivity: int = 6

    def __post_init__(self):
        if not 1.0 <= self.uninvaded_angle <= 180.0:
            raise ParameterError("uninvaded_angle must be in [1, 180] degrees")
        if self.dilation_radius < 0:
            raise ParameterError("dilation_radius must be >= 0")
        if not self.idw_power > 0:
            raise ParameterError("idw_power must be > 0")
        if not self.max_distance > 0:
            raise ParameterError("max_distance must be > 0")
        if self.connectivity not in (6, 26):
            raise ParameterError("connectivity must be 6 or 26")


@dataclass(frozen=True)
class PathAngles:
    """The slice of one measured contact path the mapper needs: node
    positions, the path-mean angle, and how many accepted measurements
    back it (the interpolation weight)."""

    path_id: int
    nodes: np.ndarray
    mean_deg: float
    count: int

    def __post_init__(self):
        object.__setattr__(self, "nodes",
                           np.asarray(self.nodes, dtype=np.float64).reshape(-1, 3))
        if len(self.nodes) == 0:
            raise ParameterError("path must have at least one node")
        if self.count < 1:
            raise ParameterError("measurement count must be >= 1")
        if not np.isfinite(self.mean_deg):
            raise ParameterError("path mean angle must be finite")


@dataclass
class WettabilityField:
    """Per-voxel contact angle (degrees, NaN = unassigned) plus a provenance
    grid recording which stage assigned each voxel."""

    theta: np.ndarray
    provenance: np.ndarray
    voxel_edge: float = 1.0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float32)
        self.provenance = np.asarray(self.provenance, dtype=np.uint8)
        if self.theta.ndim != 3 or self.theta.shape != self.provenance.shape:
            raise DimensionError("theta and provenance must share one 3D shape")

    @classmethod
    def initial(cls, vol: LabeledVolume) -> "WettabilityField":
        theta = np.full(vol.dims, np.nan, dtype=np.float32)
        prov = np.full(vol.dims, PROV_UNASSIGNED, dtype=np.uint8)
        prov[vol.data == SOLID] = PROV_SOLID
        return cls(theta, prov, vol.voxel_edge)

    @property
    def dims(self):
        return self.theta.shape

    def assigned_mask(self) -> np.ndarray:
        return np.isfinite(self.theta)

    def unassigned_mask(self) -> np.ndarray:
        return ~np.isfinite(self.theta)


@dataclass(frozen=True)
class FieldHistogram:
    """Histogram of assigned angles with wettability-regime fractions.

    Regimes partition (0, 180]: water-wet below 70 degrees, intermediate-wet
    through 110, oil-wet above. Fractions are of assigned voxels and are
    None for an empty field.
    """

    edges: np.ndarray
    counts: np.ndarray
    total_assigned: int
    fraction_water_wet: float | None
    fraction_intermediate: float | None
    fraction_oil_wet: float | None


def _node_voxels(nodes: np.ndarray, dims) -> np.ndarray:
    vox = np.rint(nodes).astype(np.int64)
    for k in range(3):
        np.clip(vox[:, k], 0, dims[k] - 1, out=vox[:, k])
    return np.unique(vox, axis=0)


def assign_uninvaded(vol: LabeledVolume, field: WettabilityField,
                     params: MapParams) -> WettabilityField:
    """Stage 1: pore components containing no invading fluid at all."""
    if field.dims != vol.dims:
        raise DimensionError("field and volume dimensions differ")
    comp = label_mask(vol.pore_mask(), params.connectivity)
    if comp.count == 0:
        return field
    invaded_ids = np.unique(comp.labels[vol.data == INVADING])
    pure = np.ones(comp.count + 1, dtype=bool)
    pure[0] = False
    pure[invaded_ids[invaded_ids > 0]] = False
    target = pure[comp.labels] & field.unassigned_mask()
    field.theta[target] = params.uninvaded_angle
    field.provenance[target] = PROV_UNINVADED
    return field


def _object_path_distance(bound_vox: np.ndarray, tree: cKDTree) -> float:
    d, _ = tree.query(bound_vox.astype(np.float64), k=1)
    return max(1.0, float(np.min(d)))


def assign_invading_objects(vol: LabeledVolume, field: WettabilityField,
                            paths: list[PathAngles],
                            params: MapParams) -> WettabilityField:
    """Stage 2: one blended angle per connected invading-fluid object.

    A path is associated with an object when any of its nodes falls inside
    the object dilated by dilation_radius. Weights are count / distance**p
    with the distance floored at one voxel. Objects touching no path fall
    back to all paths within max_distance; failing that they stay
    unassigned.
    """
    if field.dims != vol.dims:
        raise DimensionError("field and volume dimensions differ")
    comp = label_mask(vol.mask(INVADING), params.connectivity)
    if comp.count == 0 or not paths:
        return field
    paths = sorted(paths, key=lambda p: p.path_id)
    node_vox = [_node_voxels(p.nodes, vol.dims) for p in paths]
    trees = [cKDTree(p.nodes) for p in paths]
    slices = ndimage.find_objects(comp.labels)
    cube = np.ones((3, 3, 3), dtype=bool)
    r = params.dilation_radius

    for cid in range(1, comp.count + 1):
        sl = slices[cid - 1]
        if sl is None:
            continue
        lo = np.array([max(s.start - r, 0) for s in sl])
        hi = np.array([min(s.stop + r, d) for s, d in zip(sl, vol.dims)])
        box = tuple(slice(a, b) for a, b in zip(lo, hi))
        obj = comp.labels[box] == cid
        hull = ndimage.binary_dilation(obj, structure=cube, iterations=r) if r else obj
        interior = ndimage.binary_erosion(obj, structure=_six_struct())
        bound = np.argwhere(obj & ~interior) + lo
        if len(bound) == 0:
            bound = np.argwhere(obj) + lo

        dists = np.array([_object_path_distance(bound, t) for t in trees])
        hit = np.zeros(len(paths), dtype=bool)
        for k, vox in enumerate(node_vox):
            inside = ((vox >= lo) & (vox < hi)).all(axis=1)
            if inside.any():
                local = vox[inside] - lo
                hit[k] = bool(hull[local[:, 0], local[:, 1], local[:, 2]].any())
        pool = hit if hit.any() else dists <= params.max_distance

        num = den = 0.0
        for k, p in enumerate(paths):
            if not pool[k]:
                continue
            w = p.count / dists[k] ** params.idw_power
            num += w * p.mean_deg
            den += w
        if den > 0:
            target = (comp.labels == cid) & field.unassigned_mask()
            field.theta[target] = num / den
            field.provenance[target] = PROV_OBJECT
    return field


def _six_struct():
    return ndimage.generate_binary_structure(3, 1)


def assign_defending_transition(vol: LabeledVolume, field: WettabilityField,
                                paths: list[PathAngles],
                                params: MapParams) -> WettabilityField:
    """Stage 3: per-voxel blend on defending-fluid voxels near contact paths.

    Every still-unassigned defending voxel within max_distance of at least
    one path node gets the count-weighted inverse-distance mean of those
    paths' angles; per-path distances come from a Euclidean distance
    transform of the path's node voxels, floored at one voxel.
    """
    if field.dims != vol.dims:
        raise DimensionError("field and volume dimensions differ")
    target = (vol.data == DEFENDING) & field.unassigned_mask()
    if not target.any() or not paths:
        return field
    ti = np.nonzero(target)
    num = np.zeros(len(ti[0]))
    den = np.zeros(len(ti[0]))
    for p in sorted(paths, key=lambda q: q.path_id):
        vox = _node_voxels(p.nodes, vol.dims)
        absent = np.ones(vol.dims, dtype=bool)
        absent[vox[:, 0], vox[:, 1], vox[:, 2]] = False
        dist = ndimage.distance_transform_edt(absent)[ti]
        w = np.where(dist <= params.max_distance,
                     p.count / np.maximum(dist, 1.0) ** params.idw_power, 0.0)
        num += w * p.mean_deg
        den += w
    ok = den > 0
    if ok.any():
        sel = tuple(ix[ok] for ix in ti)
        field.theta[sel] = (num[ok] / den[ok]).astype(np.float32)
        field.provenance[sel] = PROV_TRANSITION
    return field


def clip_field(field: WettabilityField, low: float = 1.0,
               high: float = 180.0) -> WettabilityField:
    """Clamp assigned angles into the physically reportable range."""
    if not 0 < low < high <= 180:
        raise ParameterError("need 0 < low < high <= 180")
    assigned = field.assigned_mask()
    field.theta[assigned] = np.clip(field.theta[assigned], low, high)
    return field


def build_field(vol: LabeledVolume, paths: list[PathAngles],
                params: MapParams | None = None) -> WettabilityField:
    """Run all assignment stages in order and clip the result."""
    params = params or MapParams()
    field = WettabilityField.initial(vol)
    assign_uninvaded(vol, field, params)
    assign_invading_objects(vol, field, paths, params)
    assign_defending_transition(vol, field, paths, params)
    return clip_field(field)


def field_histogram(field: WettabilityField,
                    bin_width: float = 2.0) -> FieldHistogram:
    """Histogram of assigned voxel angles plus regime fractions."""
    if not 0 < bin_width <= 180:
        raise ParameterError("bin_width must be in (0, 180]")
    edges = np.arange(0.0, 180.0 + bin_width, bin_width)
    theta = field.theta[field.assigned_mask()].astype(np.float64)
    counts, _ = np.histogram(theta, bins=edges)
    total = len(theta)
    if total == 0:
        return FieldHistogram(edges, counts, 0, None, None, None)
    water = float((theta < 70.0).sum() / total)
    inter = float(((theta >= 70.0) & (theta <= 110.0)).sum() / total)
    oil = float((theta > 110.0).sum() / total)
    return FieldHistogram(edges, counts, total, water, inter, oil)
