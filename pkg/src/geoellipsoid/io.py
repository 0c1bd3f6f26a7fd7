"""File formats: problem-instance JSON, result JSON, trace and summary CSV."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import InstanceError
from .manifold import Kind, ManifoldSpec
from .problems import DistanceTo, GeometricMedian, MaxDistance, ProblemInstance
from .solver import TRACE_COLUMNS, Trace

OBJECTIVE_TYPES = {
    "distance": "distance", "distanceto": "distance",
    "median": "median", "geometricmedian": "median", "geometric_median": "median",
    "maxdist": "maxdist", "maxdistance": "maxdist", "max_distance": "maxdist",
}


def _field(obj, key, path, types, required=True, default=None):
    if key not in obj:
        if required:
            raise InstanceError(f"missing field '{path}{key}'")
        return default
    val = obj[key]
    if not isinstance(val, types) or isinstance(val, bool):
        raise InstanceError(f"field '{path}{key}' has type {type(val).__name__}")
    return val


def _coords_list(raw, path, dim):
    if not isinstance(raw, list) or not raw:
        raise InstanceError(f"field '{path}' must be a non-empty list of coordinate lists")
    out = []
    for i, row in enumerate(raw):
        if (not isinstance(row, list) or len(row) != dim
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in row)):
            raise InstanceError(f"field '{path}[{i}]' must be a list of {dim} numbers")
        out.append([float(c) for c in row])
    return np.array(out)


def instance_from_dict(data) -> ProblemInstance:
    """Build an instance; anchor points are tangent coordinates at the model origin."""
    if not isinstance(data, dict):
        raise InstanceError("instance must be a JSON object")
    manifold = _field(data, "manifold", "", str)
    try:
        kind = Kind(manifold.lower())
    except ValueError:
        raise InstanceError(f"field 'manifold': unknown manifold '{manifold}'") from None
    dim = _field(data, "dim", "", int)
    curvature = float(_field(data, "curvature", "", (int, float), required=False, default=1.0))
    radius = float(_field(data, "radius", "", (int, float)))
    try:
        spec = ManifoldSpec(kind, dim, curvature)
    except ValueError as err:
        raise InstanceError(f"fields 'dim'/'curvature': {err}") from None

    obj = _field(data, "objective", "", dict)
    otype = _field(obj, "type", "objective.", str)
    key = OBJECTIVE_TYPES.get(otype.lower().replace("-", "_"))
    if key is None:
        raise InstanceError(f"field 'objective.type': unknown objective '{otype}'")
    coords = _coords_list(obj.get("points"), "objective.points", dim)

    x_ref = spec.origin()
    frame = spec.orthonormal_frame(x_ref)
    try:
        points = spec.point_from_tangent_coords(x_ref, frame, coords)
    except ValueError as err:
        raise InstanceError(f"field 'objective.points': {err}") from None
    if key == "distance":
        if len(points) != 1:
            raise InstanceError("field 'objective.points': distance objective takes one point")
        objective = DistanceTo(points[0])
    elif key == "median":
        weights = obj.get("weights", [1.0] * len(points))
        if (not isinstance(weights, list) or len(weights) != len(points)
                or not all(isinstance(w, (int, float)) and w > 0 for w in weights)):
            raise InstanceError("field 'objective.weights' must list one positive number per point")
        objective = GeometricMedian(points, np.array(weights, dtype=float))
    else:
        objective = MaxDistance(points)
    try:
        return ProblemInstance(spec, x_ref, radius, objective, frame=frame)
    except ValueError as err:
        raise InstanceError(f"instance invariant violated: {err}") from None


def load_instance(path) -> ProblemInstance:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise InstanceError(f"{path}: {err.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise InstanceError(f"{path}: line {err.lineno} column {err.colno}: {err.msg}") from None
    try:
        return instance_from_dict(data)
    except InstanceError as err:
        raise InstanceError(f"{path}: {err}") from None


def instance_to_dict(instance: ProblemInstance) -> dict:
    spec = instance.spec
    coords = np.atleast_2d(instance.coords(instance.anchors))
    obj = {"type": instance.kind, "points": coords.tolist()}
    if instance.kind == "median":
        obj["weights"] = instance.weights.tolist()
    return {"manifold": spec.kind.value, "dim": spec.dim, "curvature": spec.curvature,
            "radius": instance.radius, "objective": obj}


def dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def _num(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def trace_csv(trace: Trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for row in trace.rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue()


def read_trace_csv(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows


def rows_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_num(row[c]) for c in columns])
    return buf.getvalue()
