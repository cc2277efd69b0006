"""On-disk formats: raw voxel grids with JSON sidecars, ASCII PLY meshes,
and delimited measurement tables.

Raw grids are little-endian with x varying fastest; every .raw file has a
JSON sidecar of the same stem describing dimensions and encoding. Floats in
text outputs are written with six significant digits so repeated runs are
byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DimensionError, ParameterError
from .meshing import InterfacePair
from .volume import LabeledVolume
from .wetmap import (PROV_OBJECT, PROV_SOLID, PROV_TRANSITION, PROV_UNASSIGNED,
                     PROV_UNINVADED, WettabilityField)

VOLUME_LABELS = {"defending": 0, "invading": 1, "solid": 2}
MASK_LABELS = {"background": 0, "foreground": 1}
PROVENANCE_ENCODING = {
    "solid": PROV_SOLID,
    "uninvaded": PROV_UNINVADED,
    "object": PROV_OBJECT,
    "transition": PROV_TRANSITION,
    "unassigned": PROV_UNASSIGNED,
}


def fmt6(value) -> str:
    """Render one CSV cell; floats get six significant digits."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "nan" if np.isnan(v) else f"{v:.6g}"
    return str(value)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    lines = [",".join(header)]
    lines += [",".join(fmt6(c) for c in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _round6(obj):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # Strict JSON has no NaN/Infinity; encode them as null.
        return None if not np.isfinite(v) else float(f"{v:.6g}")
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_round6(x) for x in obj]
    if isinstance(obj, dict):
        return {k: _round6(v) for k, v in obj.items()}
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_round6(obj), indent=2, sort_keys=True) + "\n")


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def _write_raw(path: Path, array: np.ndarray, sidecar: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(array.tobytes(order="F"))
    write_json(_sidecar(path), sidecar)


def _read_raw(path: Path, dtype) -> tuple[np.ndarray, dict]:
    path = Path(path)
    meta = json.loads(_sidecar(path).read_text())
    dims = tuple(int(d) for d in meta["dims"])
    buf = np.frombuffer(path.read_bytes(), dtype=dtype)
    if buf.size != int(np.prod(dims)):
        raise DimensionError(f"{path}: raw payload holds {buf.size} values, "
                             f"sidecar dims {dims} expect {int(np.prod(dims))}")
    return buf.reshape(dims, order="F"), meta


def save_volume(vol: LabeledVolume, path) -> None:
    path = Path(path)
    _write_raw(path, vol.data, {
        "dims": list(vol.dims),
        "voxel_edge": vol.voxel_edge,
        "labels": VOLUME_LABELS,
    })


def load_volume(path) -> LabeledVolume:
    data, meta = _read_raw(Path(path), np.uint8)
    return LabeledVolume(data, float(meta.get("voxel_edge", 1.0)))


def save_mask(mask: np.ndarray, path, voxel_edge: float = 1.0) -> None:
    path = Path(path)
    _write_raw(path, np.asarray(mask, dtype=np.uint8), {
        "dims": list(mask.shape),
        "voxel_edge": voxel_edge,
        "labels": MASK_LABELS,
    })


def load_mask(path) -> np.ndarray:
    data, _ = _read_raw(Path(path), np.uint8)
    return data.astype(bool)


def save_field(field: WettabilityField, path) -> None:
    """Write the angle grid and its provenance grid side by side."""
    path = Path(path)
    theta = np.asarray(field.theta, dtype="<f4")
    _write_raw(path, theta, {
        "dims": list(field.dims),
        "voxel_edge": field.voxel_edge,
        "dtype": "float32",
        "units": "degrees",
        "unassigned": "nan",
    })
    prov_path = path.with_name(path.stem + "_provenance.raw")
    _write_raw(prov_path, field.provenance, {
        "dims": list(field.dims),
        "encoding": PROVENANCE_ENCODING,
    })


def load_field(path) -> WettabilityField:
    path = Path(path)
    theta, meta = _read_raw(path, "<f4")
    prov_path = path.with_name(path.stem + "_provenance.raw")
    if not prov_path.exists():
        raise ParameterError(f"missing provenance grid {prov_path}")
    prov, _ = _read_raw(prov_path, np.uint8)
    return WettabilityField(theta, prov, float(meta.get("voxel_edge", 1.0)))


def write_interface_ply(path, pair: InterfacePair,
                        curvature: np.ndarray | None = None) -> None:
    """ASCII PLY of the full fluid surface with a per-face interface tag
    (0 = fluid-fluid, 1 = solid-fluid) and optional per-vertex curvature."""
    mesh = pair.parent
    if curvature is not None and len(curvature) != mesh.n_vertices:
        raise DimensionError("curvature array must match vertex count")
    tags = pair.face_tags
    lines = [
        "ply",
        "format ascii 1.0",
        "comment interface tags: 0=fluid-fluid 1=solid-fluid",
        f"element vertex {mesh.n_vertices}",
        "property float x",
        "property float y",
        "property float z",
    ]
    if curvature is not None:
        lines.append("property float quality")
    lines += [
        f"element face {mesh.n_faces}",
        "property list uchar int vertex_indices",
        "property uchar interface",
        "end_header",
    ]
    for i, v in enumerate(mesh.vertices):
        row = f"{fmt6(v[0])} {fmt6(v[1])} {fmt6(v[2])}"
        if curvature is not None:
            row += f" {fmt6(float(curvature[i]))}"
        lines.append(row)
    for f, t in zip(mesh.faces, tags):
        lines.append(f"3 {f[0]} {f[1]} {f[2]} {t}")
    Path(path).write_text("\n".join(lines) + "\n")


MEASUREMENT_HEADER = ["path_id", "node_index", "x", "y", "z", "theta_deg",
                      "method_ff", "method_fs", "outlier_corrected", "rejected"]
SUMMARY_HEADER = ["path_id", "kind", "count", "mean_deg", "mode_deg", "std_deg"]
PATHS_HEADER = ["path_id", "kind", "node_index", "x", "y", "z"]


def write_measurements_csv(path, measurements) -> None:
    rows = []
    for m in measurements:
        rows.append([m.path_id, m.node_index,
                     float(m.position[0]), float(m.position[1]), float(m.position[2]),
                     None if m.theta_deg is None else float(m.theta_deg),
                     m.method_ff, m.method_fs,
                     m.outlier_corrected, not m.accepted])
    write_csv(path, MEASUREMENT_HEADER, rows)


def write_summary_csv(path, stats) -> None:
    rows = [[s.path_id, s.kind, s.count, s.mean_deg, s.mode_deg, s.std_deg]
            for s in stats]
    write_csv(path, SUMMARY_HEADER, rows)


def write_paths_csv(path, contact_paths) -> None:
    rows = []
    for p in contact_paths:
        for i, node in enumerate(p.nodes):
            rows.append([p.id, p.kind, i,
                         float(node[0]), float(node[1]), float(node[2])])
    write_csv(path, PATHS_HEADER, rows)


def read_measured_paths(measurements_csv, summary_csv):
    """Rebuild mapper inputs (PathAngles) from the two measurement tables."""
    from .wetmap import PathAngles

    m_path = Path(measurements_csv)
    s_path = Path(summary_csv)
    nodes: dict[int, list[list[float]]] = {}
    with m_path.open() as fh:
        header = fh.readline().strip().split(",")
        col = {name: k for k, name in enumerate(header)}
        for line in fh:
            cells = line.rstrip("\n").split(",")
            if len(cells) < len(MEASUREMENT_HEADER):
                continue
            pid = int(cells[col["path_id"]])
            nodes.setdefault(pid, []).append(
                [float(cells[col["x"]]), float(cells[col["y"]]),
                 float(cells[col["z"]])])
    out = []
    with s_path.open() as fh:
        header = fh.readline().strip().split(",")
        col = {name: k for k, name in enumerate(header)}
        for line in fh:
            cells = line.rstrip("\n").split(",")
            if len(cells) < len(SUMMARY_HEADER):
                continue
            pid = int(cells[col["path_id"]])
            count = int(cells[col["count"]])
            mean = float(cells[col["mean_deg"]])
            if pid in nodes and count >= 1:
                out.append(PathAngles(pid, np.array(nodes[pid]), mean, count))
    return sorted(out, key=lambda p: p.path_id)
