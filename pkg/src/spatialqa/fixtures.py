"""Synthetic scene builders for tests, demos and the bundled fixture pack.

Scenes produced here are fully valid (orthonormal look-at poses, centroids
at box centers) and span the interesting generation regimes: countable
duplicates, blacklisted structure, out-of-range sizes, near-tie distances
and on-axis direction triples.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import SeededRng
from .scene import CameraView, Object3D, Scene, Vec3

_CATEGORIES = (
    "chair", "table", "lamp", "sofa", "plant", "television", "bed", "desk",
    "shelf", "mirror", "heater", "bin", "cabinet", "stool", "rug", "monitor",
)


def box_object(
    object_id: str,
    category: str,
    center: tuple[float, float, float],
    extents: tuple[float, float, float],
) -> Object3D:
    cx, cy, cz = center
    ex, ey, ez = extents
    lo = Vec3(cx - ex / 2.0, cy - ey / 2.0, cz - ez / 2.0)
    hi = Vec3(cx + ex / 2.0, cy + ey / 2.0, cz + ez / 2.0)
    return Object3D(object_id=object_id, category=category,
                    centroid=Vec3(cx, cy, cz), aabb_min=lo, aabb_max=hi)


def look_at_view(
    view_id: str,
    frame_index: int,
    position: tuple[float, float, float],
    target: tuple[float, float, float],
    fx: float = 580.0,
    fy: float = 580.0,
    width: float = 640.0,
    height: float = 480.0,
) -> CameraView:
    """World-to-camera pose looking from position toward target, z-up world,
    +z camera forward, +x right, +y down."""
    pos = np.asarray(position, dtype=float)
    tgt = np.asarray(target, dtype=float)
    forward = tgt - pos
    norm = np.linalg.norm(forward)
    if norm < 1e-9:
        raise ValueError("camera position and target coincide")
    forward /= norm
    up = np.array([0.0, 0.0, 1.0])
    right = np.cross(forward, up)
    right_norm = np.linalg.norm(right)
    if right_norm < 1e-9:
        raise ValueError("camera looking straight along the up axis")
    right /= right_norm
    down = np.cross(forward, right)
    rotation = np.stack([right, down, forward])  # rows are camera axes in world
    translation = -rotation @ pos
    return CameraView(
        view_id=view_id,
        frame_index=frame_index,
        rotation=tuple(float(v) for v in rotation.reshape(-1)),
        translation=Vec3(*(float(v) for v in translation)),
        fx=fx, fy=fy, cx=width / 2.0, cy=height / 2.0,
        width=width, height=height,
    )


def _ring_views(
    prefix: str,
    count: int,
    center: tuple[float, float],
    radius: float,
    z: float = 1.6,
    frame_step: int = 5,
    target_z: float = 0.8,
    fx: float = 520.0,
) -> list[CameraView]:
    views = []
    for i in range(count):
        angle = 2.0 * math.pi * i / count
        pos = (center[0] + radius * math.cos(angle),
               center[1] + radius * math.sin(angle), z)
        views.append(
            look_at_view(f"{prefix}{i:02d}", i * frame_step, pos,
                         (center[0], center[1], target_z), fx=fx)
        )
    return views


def lounge_scene() -> Scene:
    """Room with three chairs (counting), well-separated furniture, one
    blacklisted wall, and a ring of cameras seeing everything."""
    objects = (
        box_object("chair-1", "chair", (1.0, 1.0, 0.45), (0.5, 0.5, 0.9)),
        box_object("chair-2", "chair", (2.6, 1.0, 0.45), (0.5, 0.5, 0.9)),
        box_object("chair-3", "chair", (4.2, 1.0, 0.45), (0.5, 0.5, 0.9)),
        box_object("table-1", "table", (3.0, 2.6, 0.38), (1.2, 0.8, 0.76)),
        box_object("lamp-1", "lamp", (5.1, 4.2, 0.75), (0.3, 0.3, 1.5)),
        box_object("sofa-1", "sofa", (1.1, 4.1, 0.4), (2.0, 0.9, 0.8)),
        box_object("plant-1", "plant", (5.4, 0.7, 0.55), (0.4, 0.4, 1.1)),
        box_object("television-1", "television", (0.3, 2.6, 1.0), (0.15, 1.3, 0.8)),
        box_object("wall-1", "wall", (3.0, 5.4, 1.25), (6.0, 0.2, 2.5)),
    )
    views = _ring_views("lounge-v", 10, center=(3.0, 2.6), radius=4.4)
    return Scene(scene_id="fixture-lounge", objects=objects, views=tuple(views),
                 floor_extent=((0.0, 0.0), (6.0, 5.2)))


def studio_scene() -> Scene:
    """Zoned room whose cameras fixate one zone after another, giving the
    categories well-separated first-appearance frames for order questions."""
    zones = [
        ("bed-1", "bed", (1.5, 1.5, 0.3), (1.8, 1.4, 0.6)),
        ("desk-1", "desk", (8.3, 1.4, 0.38), (1.4, 0.7, 0.76)),
        ("shelf-1", "shelf", (8.5, 8.3, 0.9), (1.0, 0.4, 1.8)),
        ("mirror-1", "mirror", (1.4, 8.5, 0.85), (0.9, 0.1, 1.7)),
        ("heater-1", "heater", (5.0, 8.6, 0.3), (0.8, 0.2, 0.6)),
        ("bin-1", "bin", (4.9, 1.2, 0.2), (0.35, 0.35, 0.4)),
    ]
    objects = [box_object(*z) for z in zones]
    objects.append(box_object("cushion-1", "cushion", (2.2, 2.3, 0.15), (0.45, 0.45, 0.3)))
    objects.append(box_object("cushion-2", "cushion", (7.6, 2.2, 0.15), (0.45, 0.45, 0.3)))
    views = []
    # two fixation views per zone, narrow field so other zones stay out of frame
    for zi, (oid, _, center, _) in enumerate(zones):
        for k in range(2):
            toward_center = np.array([5.0, 5.0]) - np.array(center[:2])
            toward_center /= np.linalg.norm(toward_center)
            dist = 2.6 + 0.3 * k
            pos = (center[0] + toward_center[0] * dist,
                   center[1] + toward_center[1] * dist, 1.5)
            views.append(
                look_at_view(
                    f"studio-v{2 * zi + k:02d}", (2 * zi + k) * 5, pos,
                    (center[0], center[1], center[2]), fx=900.0,
                )
            )
    return Scene(scene_id="fixture-studio", objects=tuple(objects),
                 views=tuple(views), floor_extent=((0.0, 0.0), (10.0, 10.0)))


def closet_scene() -> Scene:
    """Small scene exercising the rejection rules: blacklisted structure, a
    too-small screw and too-large wardrobe, duplicate stools, and an object
    outside every camera frustum."""
    objects = (
        box_object("wardrobe-1", "wardrobe", (1.0, 1.2, 1.75), (1.2, 0.7, 3.5)),
        box_object("screw-1", "screw", (2.0, 0.5, 0.02), (0.04, 0.04, 0.04)),
        box_object("stool-1", "stool", (2.2, 1.8, 0.25), (0.4, 0.4, 0.5)),
        box_object("stool-2", "stool", (0.7, 2.2, 0.25), (0.4, 0.4, 0.5)),
        box_object("basket-1", "basket", (2.6, 2.6, 0.25), (0.5, 0.5, 0.5)),
        box_object("ladder-1", "ladder", (0.4, 0.4, 1.0), (0.5, 0.3, 2.0)),
        box_object("floor-1", "floor", (1.5, 1.5, -0.05), (3.0, 3.0, 0.1)),
        box_object("ceiling-1", "ceiling", (1.5, 1.5, 2.55), (3.0, 3.0, 0.1)),
        # far outside the room; never projects into any view
        box_object("spider-1", "spider", (40.0, 40.0, 0.1), (0.2, 0.2, 0.1)),
    )
    views = tuple(
        _ring_views("closet-v", 4, center=(1.5, 1.6), radius=2.9, z=1.4,
                    frame_step=10, target_z=0.9, fx=420.0)
    )
    return Scene(scene_id="fixture-closet", objects=objects, views=views,
                 floor_extent=((0.0, 0.0), (3.0, 3.2)))


def fixture_scenes() -> list[Scene]:
    """The bundled three-scene pack used by the determinism tests."""
    return [lounge_scene(), studio_scene(), closet_scene()]


def _grid_scene(scene_id: str, jitter: float, seed: int) -> Scene:
    """Objects on a near-regular grid: most relative distances tie, most
    direction triples sit on a quadrant axis, and half the sizes fall out of
    range, so the filters reject the bulk of candidates."""
    rng = SeededRng(seed)
    objects = []
    idx = 0
    for gx in range(3):
        for gy in range(3):
            if idx >= len(_CATEGORIES):
                break
            category = _CATEGORIES[idx]
            size = 0.05 if idx % 3 == 0 else (3.6 if idx % 3 == 1 else 0.5)
            x = 1.0 + gx * 2.0 + rng.uniform(-jitter, jitter)
            y = 1.0 + gy * 2.0 + rng.uniform(-jitter, jitter)
            objects.append(
                box_object(f"{scene_id}-o{idx}", category, (x, y, size / 2.0),
                           (size, size, size))
            )
            idx += 1
    # a visible duplicate pair to break category uniqueness
    objects.append(box_object(f"{scene_id}-dup1", "crate", (0.6, 4.8, 0.3), (0.6, 0.6, 0.6)))
    objects.append(box_object(f"{scene_id}-dup2", "crate", (5.2, 0.7, 0.3), (0.6, 0.6, 0.6)))
    views = _ring_views(f"{scene_id}-v", 6, center=(3.0, 3.0), radius=5.2, frame_step=7)
    return Scene(scene_id=scene_id, objects=tuple(objects), views=tuple(views),
                 floor_extent=((0.0, 0.0), (6.0, 6.0)))


def adversarial_scenes() -> list[Scene]:
    """Dense near-tie pack: most candidates violate at least one filter."""
    return [_grid_scene("adversarial-grid", 0.03, seed=11),
            _grid_scene("adversarial-skew", 0.08, seed=23)]


def random_scene(rng: SeededRng, scene_id: str) -> Scene:
    """A structurally valid random room with ring cameras; used for fuzzing
    the generation filters at scale."""
    room_w = rng.uniform(4.0, 9.0)
    room_h = rng.uniform(4.0, 9.0)
    n_objects = 6 + rng.randrange(8)
    categories = list(_CATEGORIES)
    rng.shuffle(categories)
    objects = []
    for i in range(n_objects):
        # duplicate an earlier category now and then for counting coverage
        if i > 0 and rng.random() < 0.25:
            category = objects[rng.randrange(len(objects))].category
        else:
            category = categories[i % len(categories)]
        ex = rng.uniform(0.08, 2.2)
        ey = rng.uniform(0.08, 2.2)
        ez = rng.uniform(0.08, 2.2)
        x = rng.uniform(0.5, room_w - 0.5)
        y = rng.uniform(0.5, room_h - 0.5)
        objects.append(
            box_object(f"{scene_id}-obj{i}", category, (x, y, ez / 2.0), (ex, ey, ez))
        )
    n_views = 6 + rng.randrange(6)
    radius = max(room_w, room_h) * 0.75 + 1.0
    views = []
    for i in range(n_views):
        angle = 2.0 * math.pi * i / n_views + rng.uniform(-0.1, 0.1)
        pos = (room_w / 2.0 + radius * math.cos(angle),
               room_h / 2.0 + radius * math.sin(angle),
               rng.uniform(1.3, 1.9))
        target = (room_w / 2.0 + rng.uniform(-0.8, 0.8),
                  room_h / 2.0 + rng.uniform(-0.8, 0.8),
                  rng.uniform(0.4, 1.2))
        views.append(
            look_at_view(f"{scene_id}-v{i:02d}", i * 5, pos, target,
                         fx=rng.uniform(420.0, 700.0))
        )
    return Scene(scene_id=scene_id, objects=tuple(objects), views=tuple(views))
