"""Field snapshots (flat float64 binary + JSON sidecar), CSV slice export
and deterministic JSON reports."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__
from .core import (BoundaryField, HalfSpaceGrid, ScalarField, TensorField,
                   VectorField)

_FIELD_KINDS = {
    "ScalarField": ScalarField,
    "VectorField": VectorField,
    "TensorField": TensorField,
    "BoundaryField": BoundaryField,
}


def _grid_dict(grid: HalfSpaceGrid) -> dict:
    return {"n": grid.n, "L": grid.L, "N_tan": grid.N_tan, "X": grid.X,
            "N_vert": grid.N_vert, "T": grid.T, "N_time": grid.N_time,
            "grading": grid.grading}


def grid_from_dict(d: dict) -> HalfSpaceGrid:
    return HalfSpaceGrid(n=int(d["n"]), L=float(d["L"]), N_tan=int(d["N_tan"]),
                         X=float(d["X"]), N_vert=int(d["N_vert"]),
                         T=float(d["T"]), N_time=int(d["N_time"]),
                         grading=float(d.get("grading", 1.0)))


def save_field(field, prefix) -> None:
    """Write ``prefix.bin`` (little-endian float64, C order) and the JSON
    sidecar ``prefix.json`` describing shape, axes and grid."""
    prefix = Path(prefix)
    data = np.ascontiguousarray(field.data, dtype="<f8")
    data.tofile(prefix.with_suffix(".bin"))
    axes = ["component"] * field.ncomp_axes
    axes += [f"tangential_{i}" for i in range(field.grid.n_tan_axes)]
    if field.domain != "boundary":
        axes.append("vertical")
    if field.time_dependent:
        axes.append("time")
    sidecar = {
        "kind": type(field).__name__,
        "domain": field.domain,
        "time_dependent": field.time_dependent,
        "shape": list(data.shape),
        "axes": axes,
        "dtype": "float64",
        "endianness": "little",
        "component_order": "leading axes are components",
        "grid": _grid_dict(field.grid),
    }
    prefix.with_suffix(".json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=2) + "\n")


def load_field(prefix):
    prefix = Path(prefix)
    sidecar = json.loads(prefix.with_suffix(".json").read_text())
    grid = grid_from_dict(sidecar["grid"])
    data = np.fromfile(prefix.with_suffix(".bin"), dtype="<f8")
    data = data.reshape(sidecar["shape"])
    cls = _FIELD_KINDS[sidecar["kind"]]
    if cls is BoundaryField:
        return BoundaryField(grid, data,
                             time_dependent=sidecar["time_dependent"])
    return cls(grid, data, domain=sidecar["domain"],
               time_dependent=sidecar["time_dependent"])


def export_csv_slice(field, path, component: int = 0,
                     vertical_index: int | None = 0) -> None:
    """CSV of a 1-D/2-D slice: tangential axis (rows) by time (columns) at a
    fixed vertical node, or by vertical node for steady fields."""
    grid = field.grid
    data = field.data
    for _ in range(field.ncomp_axes - 1):
        data = data[0]
    if field.ncomp_axes:
        data = data[component]
    for _ in range(grid.n_tan_axes - 1):
        data = data[0]
    if field.domain != "boundary" and vertical_index is not None:
        vaxis = 1
        data = np.take(data, vertical_index, axis=vaxis) \
            if field.time_dependent else data
    lines = []
    if data.ndim == 1:
        lines.append("tangential,value")
        for xv, val in zip(grid.tan_nodes, data):
            lines.append(f"{xv!r},{val!r}")
    else:
        header = ",".join(["tangential"] + [repr(t) for t in
                          (grid.time_nodes if field.time_dependent
                           else grid.vert_nodes)])
        lines.append(header)
        for xv, row in zip(grid.tan_nodes, data):
            lines.append(",".join([repr(xv)] + [repr(v) for v in row]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_report(report: dict, path) -> None:
    """Deterministic JSON: sorted keys, no timestamps."""
    Path(path).write_text(json.dumps(_sanitize(report), sort_keys=True,
                                     indent=2) + "\n")


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, float) and (obj != obj):  # NaN -> null for JSON
        return None
    return obj


def base_report(config: dict) -> dict:
    return {"config": config, "version": __version__,
            "diagnostics": {}, "norms": {}, "trace": [],
            "ratio_studies": []}
