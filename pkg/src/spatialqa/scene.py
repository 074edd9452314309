"""Scene metadata model: objects with world-frame boxes plus calibrated camera views.

The world frame is z-up with lengths in meters, matching common indoor-scan
exports so converted metadata maps 1:1. Camera poses are stored
world-to-camera: ``x_cam = R @ x_world + t`` with ``R`` row-major and ``t``
expressed in the camera frame. Sources that export camera-to-world poses
must invert before conversion; the convention is deliberate and documented
rather than auto-detected.

``parse_scene`` accepts one UTF-8 JSON document per scene (see the schema in
the README), ignores unknown fields, and raises on anything that would break
downstream generation. ``validate_scene`` is the total-function counterpart
for scenes built in code.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

ROTATION_ORTHO_TOL = 1e-6

FloorExtent = tuple[tuple[float, float], tuple[float, float]]


class SchemaError(ValueError):
    """Document does not match the scene schema; message carries the JSON path."""


class InvariantError(ValueError):
    """A structural invariant is violated; message names the offending entity."""


@dataclass(frozen=True)
class Violation:
    entity_id: str
    rule: str
    detail: str = ""

    def __str__(self) -> str:
        msg = f"{self.entity_id}: {self.rule}"
        return f"{msg} ({self.detail})" if self.detail else msg


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Object3D:
    object_id: str
    category: str
    centroid: Vec3
    aabb_min: Vec3
    aabb_max: Vec3

    def extents(self) -> tuple[float, float, float]:
        return (
            self.aabb_max.x - self.aabb_min.x,
            self.aabb_max.y - self.aabb_min.y,
            self.aabb_max.z - self.aabb_min.z,
        )


@dataclass(frozen=True)
class CameraView:
    view_id: str
    frame_index: int
    rotation: tuple[float, ...]  # 9 values, row-major world-to-camera
    translation: Vec3  # camera-frame
    fx: float
    fy: float
    cx: float
    cy: float
    width: float
    height: float


@dataclass(frozen=True)
class Scene:
    scene_id: str
    objects: tuple[Object3D, ...]
    views: tuple[CameraView, ...]
    floor_extent: FloorExtent | None = None

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "views", tuple(self.views))

    def view_by_id(self, view_id: str) -> CameraView:
        for v in self.views:
            if v.view_id == view_id:
                return v
        raise KeyError(view_id)


def effective_floor_extent(scene: Scene) -> FloorExtent | None:
    """Explicit floor extent, or the xy bounding rectangle of all object boxes."""
    if scene.floor_extent is not None:
        return scene.floor_extent
    if not scene.objects:
        return None
    xs_min = min(o.aabb_min.x for o in scene.objects)
    ys_min = min(o.aabb_min.y for o in scene.objects)
    xs_max = max(o.aabb_max.x for o in scene.objects)
    ys_max = max(o.aabb_max.y for o in scene.objects)
    return ((xs_min, ys_min), (xs_max, ys_max))


# --- validation ---------------------------------------------------------


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


def _check_object(obj: Object3D, out: list[Violation]) -> None:
    oid = obj.object_id
    if not _finite(*obj.centroid.as_tuple(), *obj.aabb_min.as_tuple(), *obj.aabb_max.as_tuple()):
        out.append(Violation(oid, "finite", "non-finite coordinate"))
        return
    if not obj.category:
        out.append(Violation(oid, "category", "empty category"))
    elif obj.category != obj.category.lower():
        out.append(Violation(oid, "category", f"category not lowercase: {obj.category!r}"))
    lo, hi, c = obj.aabb_min, obj.aabb_max, obj.centroid
    if lo.x > hi.x or lo.y > hi.y or lo.z > hi.z:
        out.append(Violation(oid, "aabb_order", "aabb_min exceeds aabb_max"))
        return
    if not (lo.x <= c.x <= hi.x and lo.y <= c.y <= hi.y and lo.z <= c.z <= hi.z):
        out.append(Violation(oid, "centroid_in_box", "centroid outside the box"))


def _check_view(view: CameraView, out: list[Violation]) -> None:
    vid = view.view_id
    nums = (*view.rotation, *view.translation.as_tuple(), view.fx, view.fy,
            view.cx, view.cy, view.width, view.height)
    if len(view.rotation) != 9 or not _finite(*nums):
        out.append(Violation(vid, "finite", "non-finite or malformed camera numbers"))
        return
    if view.frame_index < 0:
        out.append(Violation(vid, "frame_index", "negative frame index"))
    if view.fx <= 0 or view.fy <= 0:
        out.append(Violation(vid, "intrinsics", "fx and fy must be positive"))
    if view.width <= 0 or view.height <= 0:
        out.append(Violation(vid, "image_size", "width and height must be positive"))
    r = view.rotation
    # max |R R^T - I| entry, written out to keep this module dependency-free
    worst = 0.0
    for i in range(3):
        for j in range(3):
            dot = sum(r[3 * i + k] * r[3 * j + k] for k in range(3))
            worst = max(worst, abs(dot - (1.0 if i == j else 0.0)))
    if worst > ROTATION_ORTHO_TOL:
        out.append(Violation(vid, "rotation_orthonormal", f"max deviation {worst:.3e}"))


def validate_scene(scene: Scene) -> list[Violation]:
    """All invariant violations in the scene; empty iff every invariant holds."""
    out: list[Violation] = []
    seen_obj: set[str] = set()
    for obj in scene.objects:
        if obj.object_id in seen_obj:
            out.append(Violation(obj.object_id, "object_id_unique", "duplicate object id"))
        seen_obj.add(obj.object_id)
        _check_object(obj, out)
    seen_view: set[str] = set()
    prev_frame = None
    for view in scene.views:
        if view.view_id in seen_view:
            out.append(Violation(view.view_id, "view_id_unique", "duplicate view id"))
        seen_view.add(view.view_id)
        _check_view(view, out)
        if prev_frame is not None and view.frame_index < prev_frame:
            out.append(Violation(view.view_id, "view_order", "views not sorted by frame_index"))
        prev_frame = view.frame_index
    if scene.floor_extent is not None:
        (x0, y0), (x1, y1) = scene.floor_extent
        if not _finite(x0, y0, x1, y1):
            out.append(Violation(scene.scene_id, "finite", "non-finite floor extent"))
        elif x0 > x1 or y0 > y1:
            out.append(Violation(scene.scene_id, "floor_extent_order", "min_xy exceeds max_xy"))
    return out


# --- parsing ------------------------------------------------------------


def _get(obj: Any, key: str, path: str) -> Any:
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: expected an object")
    if key not in obj:
        raise SchemaError(f"{path}: missing required field '{key}'")
    return obj[key]


def _num(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}: expected a number, got {type(value).__name__}")
    return float(value)


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{path}: expected an integer, got {type(value).__name__}")
    return value


def _str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"{path}: expected a string, got {type(value).__name__}")
    return value


def _numlist(value: Any, n: int, path: str) -> list[float]:
    if not isinstance(value, list) or len(value) != n:
        raise SchemaError(f"{path}: expected a list of {n} numbers")
    return [_num(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _vec3(value: Any, path: str) -> Vec3:
    v = _numlist(value, 3, path)
    return Vec3(v[0], v[1], v[2])


def _parse_object(raw: Any, path: str) -> Object3D:
    return Object3D(
        object_id=_str(_get(raw, "id", path), f"{path}.id"),
        category=_str(_get(raw, "category", path), f"{path}.category"),
        centroid=_vec3(_get(raw, "centroid", path), f"{path}.centroid"),
        aabb_min=_vec3(_get(raw, "aabb_min", path), f"{path}.aabb_min"),
        aabb_max=_vec3(_get(raw, "aabb_max", path), f"{path}.aabb_max"),
    )


def _parse_view(raw: Any, path: str) -> CameraView:
    return CameraView(
        view_id=_str(_get(raw, "id", path), f"{path}.id"),
        frame_index=_int(_get(raw, "frame_index", path), f"{path}.frame_index"),
        rotation=tuple(_numlist(_get(raw, "rotation", path), 9, f"{path}.rotation")),
        translation=_vec3(_get(raw, "translation", path), f"{path}.translation"),
        fx=_num(_get(raw, "fx", path), f"{path}.fx"),
        fy=_num(_get(raw, "fy", path), f"{path}.fy"),
        cx=_num(_get(raw, "cx", path), f"{path}.cx"),
        cy=_num(_get(raw, "cy", path), f"{path}.cy"),
        width=_num(_get(raw, "width", path), f"{path}.width"),
        height=_num(_get(raw, "height", path), f"{path}.height"),
    )


def _reject_nonfinite(token: str) -> float:
    raise SchemaError(f"non-finite number token {token!r} in document")


def scene_from_dict(doc: Any) -> Scene:
    scene_id = _str(_get(doc, "scene_id", "$"), "$.scene_id")
    raw_objects = _get(doc, "objects", "$")
    raw_views = _get(doc, "views", "$")
    if not isinstance(raw_objects, list):
        raise SchemaError("$.objects: expected a list")
    if not isinstance(raw_views, list):
        raise SchemaError("$.views: expected a list")
    objects = [_parse_object(o, f"$.objects[{i}]") for i, o in enumerate(raw_objects)]
    views = [_parse_view(v, f"$.views[{i}]") for i, v in enumerate(raw_views)]
    floor_extent = None
    if isinstance(doc, dict) and doc.get("floor_extent") is not None:
        fe = doc["floor_extent"]
        lo = _numlist(_get(fe, "min_xy", "$.floor_extent"), 2, "$.floor_extent.min_xy")
        hi = _numlist(_get(fe, "max_xy", "$.floor_extent"), 2, "$.floor_extent.max_xy")
        floor_extent = ((lo[0], lo[1]), (hi[0], hi[1]))
    scene = Scene(scene_id=scene_id, objects=tuple(objects), views=tuple(views),
                  floor_extent=floor_extent)
    violations = validate_scene(scene)
    if violations:
        listing = "; ".join(str(v) for v in violations)
        raise InvariantError(f"scene '{scene_id}': {listing}")
    return scene


def parse_scene(raw: bytes | str) -> Scene:
    """Parse one scene document; raises SchemaError / InvariantError."""
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"document is not valid UTF-8: {exc}") from exc
    try:
        doc = json.loads(raw, parse_constant=_reject_nonfinite)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"document is not valid JSON: {exc}") from exc
    return scene_from_dict(doc)


def scene_to_dict(scene: Scene) -> dict:
    doc: dict[str, Any] = {
        "scene_id": scene.scene_id,
        "objects": [
            {
                "id": o.object_id,
                "category": o.category,
                "centroid": list(o.centroid.as_tuple()),
                "aabb_min": list(o.aabb_min.as_tuple()),
                "aabb_max": list(o.aabb_max.as_tuple()),
            }
            for o in scene.objects
        ],
        "views": [
            {
                "id": v.view_id,
                "frame_index": v.frame_index,
                "rotation": list(v.rotation),
                "translation": list(v.translation.as_tuple()),
                "fx": v.fx,
                "fy": v.fy,
                "cx": v.cx,
                "cy": v.cy,
                "width": v.width,
                "height": v.height,
            }
            for v in scene.views
        ],
    }
    if scene.floor_extent is not None:
        (x0, y0), (x1, y1) = scene.floor_extent
        doc["floor_extent"] = {"min_xy": [x0, y0], "max_xy": [x1, y1]}
    return doc


def serialize_scene(scene: Scene) -> str:
    """Canonical JSON form; parse_scene(serialize_scene(s)) reproduces s exactly."""
    return json.dumps(scene_to_dict(scene), sort_keys=True, ensure_ascii=False)
