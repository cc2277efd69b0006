"""Labeled three-phase voxel volumes, morphology helpers, and synthetic phantoms.

A volume is a dense 3D grid of uint8 phase labels on a unit voxel lattice:
0 = defending (denser) fluid, 1 = invading (lighter) fluid, 2 = solid.
Voxel centers sit at integer coordinates, so a surface extracted between two
adjacent voxels passes through half-integer planes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionError, ParameterError

DEFENDING = 0
INVADING = 1
SOLID = 2

_STRUCTS = {
    6: ndimage.generate_binary_structure(3, 1),
    26: ndimage.generate_binary_structure(3, 3),
}


def _check_connectivity(connectivity):
    if connectivity not in _STRUCTS:
        raise ParameterError(f"connectivity must be 6 or 26, got {connectivity}")


@dataclass
class LabeledVolume:
    """A segmented voxel image with labels in {0, 1, 2}.

    Parameters
    ----------
    data : ndarray, shape (nx, ny, nz)
        Phase label per voxel. Stored as uint8.
    voxel_edge : float
        Physical edge length of one voxel. All geometry in this package is
        computed in voxel units; this factor only scales reported lengths.
    """

    data: np.ndarray
    voxel_edge: float = 1.0

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.uint8)
        if data.ndim != 3 or min(data.shape) < 1:
            raise DimensionError("volume must be a non-empty 3D grid")
        if data.max(initial=0) > SOLID:
            raise ParameterError("volume labels must be 0, 1, or 2")
        if not self.voxel_edge > 0:
            raise ParameterError("voxel_edge must be positive")
        self.data = data

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape

    def mask(self, label: int) -> np.ndarray:
        return self.data == label

    def pore_mask(self) -> np.ndarray:
        """Non-solid voxels (both fluids)."""
        return self.data != SOLID

    def counts(self) -> dict[int, int]:
        binc = np.bincount(self.data.ravel(), minlength=3)
        return {DEFENDING: int(binc[0]), INVADING: int(binc[1]), SOLID: int(binc[2])}


@dataclass
class ComponentMap:
    """Connected-component labeling of one phase.

    labels[x, y, z] == 0 marks background; component ids run 1..count.
    Ids are assigned in ascending order of each component's smallest
    linear voxel index (x fastest), so the numbering is deterministic
    and independent of the scan order of the underlying labeler.
    """

    labels: np.ndarray
    sizes: np.ndarray

    @property
    def count(self) -> int:
        return len(self.sizes) - 1

    def component_mask(self, cid: int) -> np.ndarray:
        if not 1 <= cid <= self.count:
            raise ParameterError(f"component id {cid} out of range 1..{self.count}")
        return self.labels == cid


def _stream_index(dims) -> np.ndarray:
    nx, ny, nz = dims
    return (
        np.arange(nx, dtype=np.int64)[:, None, None]
        + nx * np.arange(ny, dtype=np.int64)[None, :, None]
        + nx * ny * np.arange(nz, dtype=np.int64)[None, None, :]
    )


def label_mask(mask: np.ndarray, connectivity: int = 6) -> ComponentMap:
    """Connected components of a boolean mask with deterministic ids."""
    _check_connectivity(connectivity)
    labels, n = ndimage.label(mask, structure=_STRUCTS[connectivity])
    labels = labels.astype(np.int32, copy=False)
    if n == 0:
        return ComponentMap(labels, np.zeros(1, dtype=np.int64))
    firsts = ndimage.minimum(_stream_index(mask.shape), labels=labels,
                             index=np.arange(1, n + 1))
    order = np.argsort(np.asarray(firsts), kind="stable")
    remap = np.zeros(n + 1, dtype=np.int32)
    remap[order + 1] = np.arange(1, n + 1, dtype=np.int32)
    labels = remap[labels]
    sizes = np.bincount(labels.ravel(), minlength=n + 1).astype(np.int64)
    sizes[0] = 0
    return ComponentMap(labels, sizes)


def connected_components(vol: LabeledVolume, label: int,
                         connectivity: int = 6) -> ComponentMap:
    """Connected components of one phase label of a volume."""
    if label not in (DEFENDING, INVADING, SOLID):
        raise ParameterError(f"label must be 0, 1, or 2, got {label}")
    return label_mask(vol.mask(label), connectivity)


def dilate_mask(mask: np.ndarray, radius: int) -> np.ndarray:
    """Morphological dilation by a Chebyshev ball (3x3x3 cube iterated)."""
    if radius < 0:
        raise ParameterError("dilation radius must be >= 0")
    mask = np.asarray(mask, dtype=bool)
    if radius == 0:
        return mask.copy()
    return ndimage.binary_dilation(mask, structure=np.ones((3, 3, 3), bool),
                                   iterations=radius)


def remove_small_clusters(vol: LabeledVolume, label: int, min_voxels: int,
                          connectivity: int = 6) -> LabeledVolume:
    """Relabel components of `label` smaller than min_voxels as defending fluid.

    Keeps segmentation speckle out of the interface extraction; components
    with size >= min_voxels survive unchanged.
    """
    if min_voxels < 0:
        raise ParameterError("min_voxels must be >= 0")
    data = vol.data.copy()
    if min_voxels > 0:
        comp = connected_components(vol, label, connectivity)
        small = comp.sizes < min_voxels
        small[0] = False
        if small.any():
            data[small[comp.labels]] = DEFENDING
    return LabeledVolume(data, vol.voxel_edge)


@dataclass(frozen=True)
class PhantomSpec:
    """Parameters of a synthetic droplet phantom.

    kind "flat":  spherical droplet resting on a flat solid wall; the sphere
    center sits at height R*cos(target_angle) above the wall plane, so the
    analytic contact angle through the droplet equals target_angle.

    kind "grain": spherical droplet intersecting a spherical solid grain with
    center separation `center_separation`; the contact angle follows from the
    two radii and the separation.
    """

    kind: str
    droplet_radius: float
    target_angle: float | None = None
    grain_radius: float | None = None
    center_separation: float | None = None
    dims: tuple[int, int, int] | None = None
    margin: int = 5

    def __post_init__(self):
        if self.kind not in ("flat", "grain"):
            raise ParameterError(f"phantom kind must be 'flat' or 'grain', got {self.kind!r}")
        if not self.droplet_radius >= 4:
            raise ParameterError("droplet_radius must be >= 4 voxels")
        if self.margin < 3:
            raise ParameterError("margin must be >= 3 voxels")
        if self.kind == "flat":
            if self.target_angle is None or not 0 < self.target_angle < 180:
                raise ParameterError("flat phantom needs target_angle in (0, 180)")
        else:
            rg, rd, d = self.grain_radius, self.droplet_radius, self.center_separation
            if rg is None or d is None:
                raise ParameterError("grain phantom needs grain_radius and center_separation")
            if not rg >= 4:
                raise ParameterError("grain_radius must be >= 4 voxels")
            if not abs(rg - rd) < d < rg + rd:
                raise ParameterError(
                    "center_separation must satisfy |r_g - r_d| < sep < r_g + r_d "
                    "for the spheres to intersect in a circle")


@dataclass(frozen=True)
class FlatFrame:
    """Analytic placement of a flat-wall phantom inside its grid."""

    dims: tuple[int, int, int]
    center: tuple[float, float, float]   # droplet sphere center
    solid_top_layer: int                 # highest voxel layer with solid
    radius: float
    target_angle: float

    @property
    def plane_z(self) -> float:
        # continuum wall surface, half a voxel above the last solid layer
        return self.solid_top_layer + 0.5

    @property
    def contact_radius(self) -> float:
        return self.radius * math.sin(math.radians(self.target_angle))


@dataclass(frozen=True)
class GrainFrame:
    """Analytic placement of a grain phantom inside its grid."""

    dims: tuple[int, int, int]
    grain_center: tuple[float, float, float]
    droplet_center: tuple[float, float, float]
    grain_radius: float
    droplet_radius: float
    separation: float


def flat_frame(spec: PhantomSpec) -> FlatFrame:
    if spec.kind != "flat":
        raise ParameterError("flat_frame needs a 'flat' phantom spec")
    r = spec.droplet_radius
    m = spec.margin
    theta = math.radians(spec.target_angle)
    if spec.dims is None:
        half = math.ceil(r) + m
        nx = ny = 2 * half + 1
        cx = cy = float(half)
        z_top_layer = m
        zc = z_top_layer + 0.5 + r * math.cos(theta)
        nz = math.ceil(zc + r) + m + 1
        dims = (nx, ny, nz)
    else:
        dims = tuple(int(d) for d in spec.dims)
        nx, ny, nz = dims
        cx, cy = (nx - 1) / 2.0, (ny - 1) / 2.0
        z_top_layer = m
        zc = z_top_layer + 0.5 + r * math.cos(theta)
        if min(cx, cy) < r + 3 or zc + r > nz - 1 - 3 or nz <= z_top_layer + 2:
            raise DimensionError(f"droplet of radius {r} does not fit dims {dims} "
                                 "with a 3-voxel margin")
    return FlatFrame(dims, (cx, cy, zc), z_top_layer, r, spec.target_angle)


def grain_frame(spec: PhantomSpec) -> GrainFrame:
    if spec.kind != "grain":
        raise ParameterError("grain_frame needs a 'grain' phantom spec")
    rg, rd, sep = spec.grain_radius, spec.droplet_radius, spec.center_separation
    m = spec.margin
    if spec.dims is None:
        half = math.ceil(max(rg, rd)) + m
        nx = ny = 2 * half + 1
        cx = cy = float(half)
        gz = rg + m
        nz = math.ceil(gz + sep + rd) + m + 1
        dims = (nx, ny, nz)
    else:
        dims = tuple(int(d) for d in spec.dims)
        nx, ny, nz = dims
        cx, cy = (nx - 1) / 2.0, (ny - 1) / 2.0
        gz = rg + m
        if min(cx, cy) < max(rg, rd) + 3 or gz + sep + rd > nz - 1 - 3:
            raise DimensionError(f"grain/droplet pair does not fit dims {dims} "
                                 "with a 3-voxel margin")
    return GrainFrame(dims, (cx, cy, float(gz)), (cx, cy, gz + sep), rg, rd, sep)


def _dist2(dims, center):
    x, y, z = np.ogrid[0:dims[0], 0:dims[1], 0:dims[2]]
    cx, cy, cz = center
    return (x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2


def gen_flat_droplet(spec: PhantomSpec) -> LabeledVolume:
    """Voxelize a spherical droplet on a flat solid wall.

    A voxel takes a phase label when its center lies strictly inside the
    analytic body: solid fills z <= solid_top_layer, the droplet is the
    open sphere intersected with the fluid half-space.
    """
    frame = flat_frame(spec)
    nx, ny, nz = frame.dims
    data = np.zeros(frame.dims, dtype=np.uint8)
    data[:, :, : frame.solid_top_layer + 1] = SOLID
    d2 = _dist2(frame.dims, frame.center)
    zidx = np.arange(nz)[None, None, :]
    droplet = (d2 < frame.radius ** 2) & (zidx > frame.solid_top_layer)
    data[droplet] = INVADING
    return LabeledVolume(data)


def grain_contact_angle(grain_radius: float, droplet_radius: float,
                        separation: float) -> float:
    """Analytic contact angle (degrees) of two intersecting spheres.

    Measured through the droplet at the intersection circle, between the
    grain-surface normal and the droplet-surface normal.
    """
    rg, rd, d = grain_radius, droplet_radius, separation
    if not abs(rg - rd) < d < rg + rd:
        raise ParameterError("spheres do not intersect in a circle")
    c = (d * d - rg * rg - rd * rd) / (2.0 * rg * rd)
    return math.degrees(math.acos(max(-1.0, min(1.0, c))))


def gen_grain_droplet(spec: PhantomSpec) -> tuple[LabeledVolume, float]:
    """Voxelize a droplet intersecting a solid spherical grain.

    Returns the volume together with the analytic contact angle in degrees.
    Solid wins where the two open spheres overlap.
    """
    frame = grain_frame(spec)
    data = np.zeros(frame.dims, dtype=np.uint8)
    solid = _dist2(frame.dims, frame.grain_center) < frame.grain_radius ** 2
    droplet = _dist2(frame.dims, frame.droplet_center) < frame.droplet_radius ** 2
    data[droplet] = INVADING
    data[solid] = SOLID
    theta = grain_contact_angle(frame.grain_radius, frame.droplet_radius,
                                frame.separation)
    return LabeledVolume(data), theta


def gen_solid_sphere(radius: float, margin: int = 5) -> LabeledVolume:
    """Voxelized solid sphere in a defending-fluid background.

    Used by the mesh-quality and curvature benchmarks.
    """
    if not radius >= 2:
        raise ParameterError("sphere radius must be >= 2 voxels")
    if margin < 3:
        raise ParameterError("margin must be >= 3 voxels")
    half = math.ceil(radius) + margin
    n = 2 * half + 1
    data = np.zeros((n, n, n), dtype=np.uint8)
    c = float(half)
    data[_dist2((n, n, n), (c, c, c)) < radius ** 2] = SOLID
    return LabeledVolume(data)


def gen_phantom(spec: PhantomSpec) -> tuple[LabeledVolume, float]:
    """Generate either phantom kind; returns (volume, analytic angle in deg)."""
    if spec.kind == "flat":
        return gen_flat_droplet(spec), float(spec.target_angle)
    vol, theta = gen_grain_droplet(spec)
    return vol, theta
