"""Projective and metric computations behind the question generators.

All functions are pure and operate on immutable scene types. Projection uses
an ideal pinhole model (no distortion): with ``p_cam = R @ p_world + t``,
a point with camera depth ``z > 0`` lands at ``u = fx * x / z + cx`` and
``v = fy * y / z + cy``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scene import CameraView, Object3D, Vec3

MIN_DEPTH = 1e-6
MIN_PLANAR_NORM = 1e-6

# Default ambiguity margins: pairs closer than 5% of image width, 10%
# relative depth, or 10 degrees from a quadrant axis are rejected as
# too close to call. Tunable via the synthesis config.
DEFAULT_EPS_X = 0.05
DEFAULT_EPS_Z = 0.10
DEFAULT_AXIS_MARGIN_DEG = 10.0

# Closed label vocabularies per modality.
SINGLE_IMAGE_DIRECTIONS = (
    "left", "right", "front", "back",
    "left-front", "left-back", "right-front", "right-back",
)
QUADRANT_DIRECTIONS = ("front-left", "front-right", "back-left", "back-right")


class DegenerateGeometry(ValueError):
    """Inputs too degenerate to classify (e.g. coincident ground-plane points)."""


@dataclass(frozen=True)
class Projection2D:
    u: float
    v: float
    depth: float


@dataclass(frozen=True)
class BBox2D:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def area(self) -> float:
        return max(0.0, self.x_max - self.x_min) * max(0.0, self.y_max - self.y_min)


@dataclass(frozen=True)
class DirectionComputation:
    """Provenance for a multi-view quadrant classification.

    ``vec_a`` points from the positioning object to the orienting object and
    ``vec_b`` to the querying object, both on the ground plane.
    ``signed_phi_deg`` is the counterclockwise angle from a to b in
    (-180, 180]; ``theta_deg`` is its magnitude.
    """

    vec_a: tuple[float, float]
    vec_b: tuple[float, float]
    theta_deg: float
    signed_phi_deg: float


def _rotation_matrix(view: CameraView) -> np.ndarray:
    return np.asarray(view.rotation, dtype=float).reshape(3, 3)


def _translation(view: CameraView) -> np.ndarray:
    return np.array(view.translation.as_tuple(), dtype=float)


def _to_camera(view: CameraView, points: np.ndarray) -> np.ndarray:
    return points @ _rotation_matrix(view).T + _translation(view)


def project_point(view: CameraView, p: Vec3) -> Projection2D | None:
    """Pixel projection of a world point, or None when at/behind the camera."""
    cam = _to_camera(view, np.array([p.as_tuple()], dtype=float))[0]
    z = cam[2]
    if z <= MIN_DEPTH:
        return None
    return Projection2D(
        u=view.fx * cam[0] / z + view.cx,
        v=view.fy * cam[1] / z + view.cy,
        depth=float(z),
    )


def box_corners(obj: Object3D) -> np.ndarray:
    lo = np.array(obj.aabb_min.as_tuple(), dtype=float)
    hi = np.array(obj.aabb_max.as_tuple(), dtype=float)
    xs = (lo[0], hi[0])
    ys = (lo[1], hi[1])
    zs = (lo[2], hi[2])
    return np.array([(x, y, z) for x in xs for y in ys for z in zs], dtype=float)


def project_bbox(view: CameraView, obj: Object3D) -> BBox2D | None:
    """Pixel envelope of the box corners in front of the camera, clamped
    to image bounds; None when every corner is at or behind the camera."""
    cam = _to_camera(view, box_corners(obj))
    front = cam[cam[:, 2] > MIN_DEPTH]
    if front.shape[0] == 0:
        return None
    u = view.fx * front[:, 0] / front[:, 2] + view.cx
    v = view.fy * front[:, 1] / front[:, 2] + view.cy
    clamp_u = lambda x: min(max(x, 0.0), float(view.width))
    clamp_v = lambda y: min(max(y, 0.0), float(view.height))
    return BBox2D(
        x_min=clamp_u(float(u.min())),
        y_min=clamp_v(float(v.min())),
        x_max=clamp_u(float(u.max())),
        y_max=clamp_v(float(v.max())),
    )


def box_sample_points(obj: Object3D) -> np.ndarray:
    """The fixed 64-point sample lattice used by visibility_ratio.

    A 4x4x4 lattice at fractional offsets {0, 1/3, 2/3, 1} along each axis:
    the 8 corners, 24 edge points, 24 face points, and 8 interior points.
    """
    lo = np.array(obj.aabb_min.as_tuple(), dtype=float)
    hi = np.array(obj.aabb_max.as_tuple(), dtype=float)
    fracs = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])
    axes = [lo[i] + (hi[i] - lo[i]) * fracs for i in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    return grid.reshape(-1, 3)


def visibility_ratio(view: CameraView, obj: Object3D) -> float:
    """Fraction of the 64 sample points projecting inside the image with
    positive depth. No occlusion handling: geometry-only visibility."""
    cam = _to_camera(view, box_sample_points(obj))
    z = cam[:, 2]
    front = z > MIN_DEPTH
    if not front.any():
        return 0.0
    u = view.fx * cam[front, 0] / z[front] + view.cx
    v = view.fy * cam[front, 1] / z[front] + view.cy
    inside = (u >= 0.0) & (u <= view.width) & (v >= 0.0) & (v <= view.height)
    return float(inside.sum()) / 64.0


def centroid_distance(a: Object3D, b: Object3D) -> float:
    dx = a.centroid.x - b.centroid.x
    dy = a.centroid.y - b.centroid.y
    dz = a.centroid.z - b.centroid.z
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def closest_point_distance(a: Object3D, b: Object3D) -> float:
    """Minimum distance between two axis-aligned boxes (0 when they touch).

    Per axis the boxes are separated by gap_i = max(0, a_min-b_max, b_min-a_max);
    the closest points differ by exactly (gap_x, gap_y, gap_z).
    """
    gaps = []
    for amin, amax, bmin, bmax in (
        (a.aabb_min.x, a.aabb_max.x, b.aabb_min.x, b.aabb_max.x),
        (a.aabb_min.y, a.aabb_max.y, b.aabb_min.y, b.aabb_max.y),
        (a.aabb_min.z, a.aabb_max.z, b.aabb_min.z, b.aabb_max.z),
    ):
        gaps.append(max(0.0, amin - bmax, bmin - amax))
    return math.sqrt(gaps[0] ** 2 + gaps[1] ** 2 + gaps[2] ** 2)


def max_dimension(obj: Object3D) -> float:
    """Longest box edge in centimeters."""
    return 100.0 * max(obj.extents())


def single_image_offsets(
    view: CameraView, a: Object3D, b: Object3D
) -> tuple[float, float] | None:
    """(delta_u, delta_z) between the projected centroids: horizontal offset as
    a fraction of image width, and depth offset relative to b's depth.
    None when either centroid fails to project."""
    pa = project_point(view, a.centroid)
    pb = project_point(view, b.centroid)
    if pa is None or pb is None:
        return None
    du = (pa.u - pb.u) / view.width
    dz = (pa.depth - pb.depth) / pb.depth
    return du, dz


def relative_direction_single(
    view: CameraView,
    a: Object3D,
    b: Object3D,
    margins: tuple[float, float] = (DEFAULT_EPS_X, DEFAULT_EPS_Z),
) -> str | None:
    """Where object a sits relative to object b from the camera's viewpoint.

    Horizontal component fires when |delta_u| >= eps_x, depth component when
    |delta_z| >= eps_z; composites read horizontal-first ("left-front").
    None encodes rejection: ambiguous pairs inside both margins, or a
    centroid that does not project.
    """
    eps_x, eps_z = margins
    offsets = single_image_offsets(view, a, b)
    if offsets is None:
        return None
    du, dz = offsets
    horizontal = "left" if du <= -eps_x else "right" if du >= eps_x else None
    depth = "front" if dz <= -eps_z else "back" if dz >= eps_z else None
    if horizontal and depth:
        return f"{horizontal}-{depth}"
    return horizontal or depth


def quadrant_from_phi(signed_phi_deg: float) -> str:
    """Quadrant label for the querying direction when standing at the
    positioning object facing the orienting object (+y), counterclockwise
    angles positive."""
    if 0.0 < signed_phi_deg < 90.0:
        return "front-left"
    if 90.0 < signed_phi_deg < 180.0:
        return "back-left"
    if -90.0 < signed_phi_deg < 0.0:
        return "front-right"
    return "back-right"


def relative_direction_multiview(
    positioning: Object3D,
    orienting: Object3D,
    querying: Object3D,
    axis_margin_deg: float = DEFAULT_AXIS_MARGIN_DEG,
) -> tuple[str, DirectionComputation] | None:
    """Quadrant of the querying object in the frame where the positioning
    object is the origin and the orienting object defines +y.

    Works on the ground plane (z dropped). Returns None when the querying
    direction lies within axis_margin_deg of either frame axis, so near-tie
    questions are never generated. Raises DegenerateGeometry when either
    planar vector is shorter than 1e-6 m.
    """
    ax = orienting.centroid.x - positioning.centroid.x
    ay = orienting.centroid.y - positioning.centroid.y
    bx = querying.centroid.x - positioning.centroid.x
    by = querying.centroid.y - positioning.centroid.y
    norm_a = math.hypot(ax, ay)
    norm_b = math.hypot(bx, by)
    if norm_a <= MIN_PLANAR_NORM:
        raise DegenerateGeometry("orienting object coincides with positioning object")
    if norm_b <= MIN_PLANAR_NORM:
        raise DegenerateGeometry("querying object coincides with positioning object")
    dot = ax * bx + ay * by
    cross = ax * by - ay * bx
    phi = math.degrees(math.atan2(cross, dot))
    if phi <= -180.0:
        phi = 180.0
    theta = abs(phi)
    axis_distance = min(theta, 180.0 - theta, abs(theta - 90.0))
    if axis_distance < axis_margin_deg:
        return None
    label = quadrant_from_phi(phi)
    computation = DirectionComputation(
        vec_a=(ax, ay), vec_b=(bx, by), theta_deg=theta, signed_phi_deg=phi
    )
    return label, computation
