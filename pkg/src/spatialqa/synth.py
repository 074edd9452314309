"""Question-answer synthesis from scene metadata.

Generation walks each scene through three visual contexts: every view on
its own (single image), a uniformly spaced subset of views (multi view),
and the full timeline (video). Task generators enumerate candidates,
apply the rejection filters, and record why candidates died; a seeded
quota pass then bounds samples per scene and per object category. The
whole pipeline is a pure function of (scenes, config): identical inputs
produce byte-identical output, including option order.

Enumeration domains, for reading the stats: counting and size iterate all
categories/objects (so blacklist and visibility rejections are visible in
the stats); pair tasks iterate distinct-category non-blacklisted pairs;
triple tasks iterate the reference pool (objects already visible, allowed,
and category-unique), so their rejections are geometry rules only.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from . import geometry, templates
from .geometry import (
    BBox2D,
    DEFAULT_AXIS_MARGIN_DEG,
    DEFAULT_EPS_X,
    DEFAULT_EPS_Z,
    DegenerateGeometry,
    QUADRANT_DIRECTIONS,
    SINGLE_IMAGE_DIRECTIONS,
)
from .rng import SeededRng, rng_for
from .scene import CameraView, InvariantError, Object3D, Scene, effective_floor_extent, validate_scene


class TaskFamily(str, Enum):
    OBJECT_COUNTING = "object_counting"
    ABSOLUTE_DISTANCE = "absolute_distance"
    OBJECT_SIZE = "object_size"
    ROOM_SIZE = "room_size"
    RELATIVE_DISTANCE = "relative_distance"
    RELATIVE_DIRECTION = "relative_direction"
    APPEARANCE_ORDER = "appearance_order"
    OBJECT_LOCALIZATION = "object_localization"


class Modality(str, Enum):
    SINGLE_IMAGE = "single_image"
    MULTI_VIEW = "multi_view"
    VIDEO = "video"


# Populated (task, modality) cells; everything else must never be emitted.
TASK_MODALITIES: dict[TaskFamily, frozenset[Modality]] = {
    TaskFamily.OBJECT_COUNTING: frozenset({Modality.MULTI_VIEW, Modality.VIDEO}),
    TaskFamily.ABSOLUTE_DISTANCE: frozenset(
        {Modality.SINGLE_IMAGE, Modality.MULTI_VIEW, Modality.VIDEO}
    ),
    TaskFamily.OBJECT_SIZE: frozenset(
        {Modality.SINGLE_IMAGE, Modality.MULTI_VIEW, Modality.VIDEO}
    ),
    TaskFamily.ROOM_SIZE: frozenset({Modality.VIDEO}),
    TaskFamily.RELATIVE_DISTANCE: frozenset(
        {Modality.SINGLE_IMAGE, Modality.MULTI_VIEW, Modality.VIDEO}
    ),
    TaskFamily.RELATIVE_DIRECTION: frozenset(
        {Modality.SINGLE_IMAGE, Modality.MULTI_VIEW, Modality.VIDEO}
    ),
    TaskFamily.APPEARANCE_ORDER: frozenset({Modality.VIDEO}),
    TaskFamily.OBJECT_LOCALIZATION: frozenset({Modality.SINGLE_IMAGE}),
}

LETTERS = "ABCD"
APPEARANCE_GAP_FRAMES = 5


class StagePairingError(ValueError):
    """Stage 1 prompts exist only for localization samples and vice versa."""


class UniquenessViolation(ValueError):
    """A referenced category has more than one visible instance in the view."""


@dataclass(frozen=True)
class Answer:
    kind: str  # "numeric" | "choice" | "boxes"
    value: float | None = None
    unit: str | None = None
    letter: str | None = None
    boxes: tuple[tuple[str, BBox2D], ...] | None = None

    def __post_init__(self):
        payloads = {
            "numeric": self.value is not None and self.unit is not None
            and self.letter is None and self.boxes is None,
            "choice": self.letter is not None and self.value is None
            and self.unit is None and self.boxes is None,
            "boxes": self.boxes is not None and self.value is None
            and self.unit is None and self.letter is None,
        }
        if self.kind not in payloads or not payloads[self.kind]:
            raise ValueError(f"answer payload does not match kind {self.kind!r}")

    @staticmethod
    def numeric(value: float, unit: str) -> "Answer":
        return Answer(kind="numeric", value=float(value), unit=unit)

    @staticmethod
    def choice(letter: str) -> "Answer":
        return Answer(kind="choice", letter=letter)

    @staticmethod
    def labeled_boxes(boxes) -> "Answer":
        return Answer(kind="boxes", boxes=tuple(boxes))


@dataclass(frozen=True)
class QASample:
    sample_id: str
    task: TaskFamily
    modality: Modality
    scene_id: str
    view_ids: tuple[str, ...]
    question: str
    options: tuple[str, ...] | None
    answer: Answer
    provenance: dict

    def __post_init__(self):
        if (self.options is not None) != (self.answer.kind == "choice"):
            raise ValueError("options are present exactly for choice answers")
        if self.answer.kind == "choice":
            idx = LETTERS.index(self.answer.letter)
            if idx >= len(self.options):
                raise ValueError("choice letter does not index an option")
        if self.modality not in TASK_MODALITIES[self.task]:
            raise ValueError(f"{self.task.value} cannot appear as {self.modality.value}")

    def correct_option(self) -> str:
        if self.answer.kind != "choice":
            raise ValueError("sample has no options")
        return self.options[LETTERS.index(self.answer.letter)]


@dataclass
class SynthConfig:
    seed: int = 42
    min_visibility: float = 0.40
    rel_dist_ratio: float = 2.0
    size_range_cm: tuple[float, float] = (10.0, 300.0)
    per_scene_cap: int = 20
    per_scene_category_cap: int = 2
    category_blacklist: frozenset[str] = frozenset({"wall", "floor", "ceiling"})
    views_per_multiview: int = 8
    abs_distance_mode: str = "closest_point"  # or "centroid"
    eps_x: float = DEFAULT_EPS_X
    eps_z: float = DEFAULT_EPS_Z
    axis_margin_deg: float = DEFAULT_AXIS_MARGIN_DEG

    def __post_init__(self):
        self.size_range_cm = tuple(self.size_range_cm)
        self.category_blacklist = frozenset(self.category_blacklist)
        # min_visibility deliberately has no upper bound: values above 1
        # are legal and reject every candidate (useful for pipeline tests)
        if self.min_visibility < 0.0:
            raise ValueError("min_visibility must be nonnegative")
        if self.rel_dist_ratio <= 1.0:
            raise ValueError("rel_dist_ratio must exceed 1")
        if len(self.size_range_cm) != 2 or not (0.0 <= self.size_range_cm[0] <= self.size_range_cm[1]):
            raise ValueError("size_range_cm must be an ordered nonnegative pair")
        if self.per_scene_cap < 1 or self.per_scene_category_cap < 1:
            raise ValueError("quota caps must be at least 1")
        if self.views_per_multiview < 1:
            raise ValueError("views_per_multiview must be at least 1")
        if self.abs_distance_mode not in ("closest_point", "centroid"):
            raise ValueError("abs_distance_mode must be 'closest_point' or 'centroid'")
        if self.eps_x < 0.0 or self.eps_z < 0.0 or self.axis_margin_deg < 0.0:
            raise ValueError("margins must be nonnegative")


@dataclass
class SynthStats:
    generated: int = 0
    kept: int = 0
    rejected: Counter = field(default_factory=Counter)
    kept_by_task: Counter = field(default_factory=Counter)

    def candidate(self) -> None:
        self.generated += 1

    def reject(self, reason: str) -> None:
        self.rejected[reason] += 1

    def to_dict(self) -> dict:
        return {
            "generated": self.generated,
            "kept": self.kept,
            "rejected": dict(sorted(self.rejected.items())),
            "kept_by_task": dict(sorted(self.kept_by_task.items())),
        }


@dataclass
class DatasetBundle:
    samples: list[QASample]
    stats: SynthStats


# --- context ---------------------------------------------------------------


@dataclass
class _Context:
    scene: Scene
    views: tuple[CameraView, ...]
    modality: Modality
    cfg: SynthConfig
    max_vis: dict[str, float]
    _counters: Counter

    def next_id(self, task: TaskFamily) -> str:
        key = (self.modality.value, task.value)
        self._counters[key] += 1
        return f"{self.scene.scene_id}-{self.modality.value}-{task.value}-{self._counters[key]:04d}"

    def rng(self, task: TaskFamily, ordinal: int) -> SeededRng:
        return rng_for(
            self.cfg.seed, self.scene.scene_id, self.modality.value, task.value, ordinal
        )

    def visible(self, obj: Object3D) -> bool:
        return self.max_vis[obj.object_id] >= self.cfg.min_visibility

    def allowed(self, obj: Object3D) -> bool:
        return obj.category not in self.cfg.category_blacklist

    def reference_pool(self) -> list[Object3D]:
        """Objects referable by bare category: visible, allowed and
        category-unique among the visible allowed set. Scene order."""
        visible = [o for o in self.scene.objects if self.allowed(o) and self.visible(o)]
        counts = Counter(o.category for o in visible)
        return [o for o in visible if counts[o.category] == 1]


def _build_context(
    scene: Scene,
    views: tuple[CameraView, ...],
    modality: Modality,
    cfg: SynthConfig,
    counters: Counter | None = None,
) -> _Context:
    max_vis = {
        o.object_id: max((geometry.visibility_ratio(v, o) for v in views), default=0.0)
        for o in scene.objects
    }
    return _Context(
        scene=scene,
        views=tuple(views),
        modality=modality,
        cfg=cfg,
        max_vis=max_vis,
        _counters=counters if counters is not None else Counter(),
    )


def _context_from_ids(scene, view_ids, modality, cfg) -> _Context:
    views = tuple(scene.view_by_id(v) for v in view_ids)
    return _build_context(scene, views, modality, cfg)


def _view_ids(ctx: _Context) -> tuple[str, ...]:
    return tuple(v.view_id for v in ctx.views)


def _distance(a: Object3D, b: Object3D, cfg: SynthConfig) -> float:
    if cfg.abs_distance_mode == "centroid":
        return geometry.centroid_distance(a, b)
    return geometry.closest_point_distance(a, b)


def uniformly_spaced_views(
    views: tuple[CameraView, ...], count: int
) -> tuple[CameraView, ...]:
    """Up to ``count`` views spread evenly across the frame-index timeline."""
    if len(views) <= count:
        return tuple(views)
    if count == 1:
        return (views[0],)
    picked = []
    seen = set()
    for i in range(count):
        idx = round(i * (len(views) - 1) / (count - 1))
        if idx not in seen:
            seen.add(idx)
            picked.append(views[idx])
    return tuple(picked)


# --- generators -------------------------------------------------------------


def _gen_counting(ctx: _Context, stats: SynthStats) -> list[QASample]:
    samples = []
    categories = sorted({o.category for o in ctx.scene.objects})
    for category in categories:
        stats.candidate()
        if category in ctx.cfg.category_blacklist:
            stats.reject("blacklist")
            continue
        instances = [
            o for o in ctx.scene.objects if o.category == category and ctx.visible(o)
        ]
        if not instances:
            stats.reject("visibility")
            continue
        sample = QASample(
            sample_id=ctx.next_id(TaskFamily.OBJECT_COUNTING),
            task=TaskFamily.OBJECT_COUNTING,
            modality=ctx.modality,
            scene_id=ctx.scene.scene_id,
            view_ids=_view_ids(ctx),
            question=templates.COUNTING.format(category=category),
            options=None,
            answer=Answer.numeric(float(len(instances)), "count"),
            provenance={
                "categories": [category],
                "quota_category": category,
                "count": len(instances),
                "visible_ids": [o.object_id for o in instances],
                "visibility": {o.object_id: ctx.max_vis[o.object_id] for o in instances},
            },
        )
        samples.append(sample)
    return samples


def _gen_abs_distance(ctx: _Context, stats: SynthStats) -> list[QASample]:
    samples = []
    objs = [o for o in ctx.scene.objects if ctx.allowed(o)]
    pool_ids = {o.object_id for o in ctx.reference_pool()}
    template = (
        templates.ABS_DISTANCE_CENTROID
        if ctx.cfg.abs_distance_mode == "centroid"
        else templates.ABS_DISTANCE_CLOSEST
    )
    for a, b in itertools.combinations(objs, 2):
        if a.category == b.category:
            continue
        stats.candidate()
        if not (ctx.visible(a) and ctx.visible(b)):
            stats.reject("visibility")
            continue
        if a.object_id not in pool_ids or b.object_id not in pool_ids:
            stats.reject("not_unique")
            continue
        dist = _distance(a, b, ctx.cfg)
        min_size_m = min(geometry.max_dimension(a), geometry.max_dimension(b)) / 100.0
        if dist <= min_size_m:
            stats.reject("min_size_rule")
            continue
        sample = QASample(
            sample_id=ctx.next_id(TaskFamily.ABSOLUTE_DISTANCE),
            task=TaskFamily.ABSOLUTE_DISTANCE,
            modality=ctx.modality,
            scene_id=ctx.scene.scene_id,
            view_ids=_view_ids(ctx),
            question=template.format(a=a.category, b=b.category),
            options=None,
            answer=Answer.numeric(round(dist, 1), "m"),
            provenance={
                "categories": [a.category, b.category],
                "quota_category": a.category,
                "object_ids": [a.object_id, b.object_id],
                "distance_m": dist,
                "min_size_m": min_size_m,
                "mode": ctx.cfg.abs_distance_mode,
                "visibility": {
                    a.object_id: ctx.max_vis[a.object_id],
                    b.object_id: ctx.max_vis[b.object_id],
                },
            },
        )
        samples.append(sample)
    return samples


def _gen_obj_size(ctx: _Context, stats: SynthStats) -> list[QASample]:
    samples = []
    pool_ids = {o.object_id for o in ctx.reference_pool()}
    lo, hi = ctx.cfg.size_range_cm
    for obj in ctx.scene.objects:
        stats.candidate()
        if not ctx.allowed(obj):
            stats.reject("blacklist")
            continue
        if not ctx.visible(obj):
            stats.reject("visibility")
            continue
        if obj.object_id not in pool_ids:
            stats.reject("not_unique")
            continue
        size_cm = geometry.max_dimension(obj)
        if not (lo <= size_cm <= hi):
            stats.reject("size_range")
            continue
        sample = QASample(
            sample_id=ctx.next_id(TaskFamily.OBJECT_SIZE),
            task=TaskFamily.OBJECT_SIZE,
            modality=ctx.modality,
            scene_id=ctx.scene.scene_id,
            view_ids=_view_ids(ctx),
            question=templates.OBJECT_SIZE.format(category=obj.category),
            options=None,
            answer=Answer.numeric(float(round(size_cm)), "cm"),
            provenance={
                "categories": [obj.category],
                "quota_category": obj.category,
                "object_ids": [obj.object_id],
                "size_cm": size_cm,
                "visibility": {obj.object_id: ctx.max_vis[obj.object_id]},
            },
        )
        samples.append(sample)
    return samples


def _gen_rel_distance(ctx: _Context, stats: SynthStats) -> list[QASample]:
    samples = []
    pool = ctx.reference_pool()
    template = (
        templates.REL_DISTANCE_CENTROID
        if ctx.cfg.abs_distance_mode == "centroid"
        else templates.REL_DISTANCE_CLOSEST
    )
    for target in pool:
        others = [o for o in pool if o.object_id != target.object_id]
        for cand_a, cand_b in itertools.combinations(others, 2):
            stats.candidate()
            d_a = _distance(target, cand_a, ctx.cfg)
            d_b = _distance(target, cand_b, ctx.cfg)
            low, high = min(d_a, d_b), max(d_a, d_b)
            if low == 0.0:
                ratio = float("inf") if high > 0.0 else 1.0
            else:
                ratio = high / low
            if ratio < ctx.cfg.rel_dist_ratio:
                stats.reject("ratio_rule")
                continue
            closer = cand_a if d_a < d_b else cand_b
            sample_id = ctx.next_id(TaskFamily.RELATIVE_DISTANCE)
            ordinal = int(sample_id.rsplit("-", 1)[-1])
            rng = ctx.rng(TaskFamily.RELATIVE_DISTANCE, ordinal)
            options = [cand_a.category, cand_b.category]
            rng.shuffle(options)
            letter = LETTERS[options.index(closer.category)]
            sample = QASample(
                sample_id=sample_id,
                task=TaskFamily.RELATIVE_DISTANCE,
                modality=ctx.modality,
                scene_id=ctx.scene.scene_id,
                view_ids=_view_ids(ctx),
                question=template.format(
                    a=options[0], b=options[1], category=target.category
                ),
                options=tuple(options),
                answer=Answer.choice(letter),
                provenance={
                    "categories": [target.category, cand_a.category, cand_b.category],
                    "quota_category": target.category,
                    "object_ids": [target.object_id, cand_a.object_id, cand_b.object_id],
                    "target": target.category,
                    "distances_m": {cand_a.category: d_a, cand_b.category: d_b},
                    "ratio": ratio,
                    "mode": ctx.cfg.abs_distance_mode,
                    "visibility": {
                        o.object_id: ctx.max_vis[o.object_id]
                        for o in (target, cand_a, cand_b)
                    },
                },
            )
            samples.append(sample)
    return samples


def _gen_rel_direction_single(ctx: _Context, stats: SynthStats) -> list[QASample]:
    assert len(ctx.views) == 1
    view = ctx.views[0]
    samples = []
    pool = ctx.reference_pool()
    for a, b in itertools.permutations(pool, 2):
        stats.candidate()
        label = geometry.relative_direction_single(
            view, a, b, margins=(ctx.cfg.eps_x, ctx.cfg.eps_z)
        )
        if label is None:
            stats.reject("ambiguous_direction")
            continue
        offsets = geometry.single_image_offsets(view, a, b)
        sample_id = ctx.next_id(TaskFamily.RELATIVE_DIRECTION)
        ordinal = int(sample_id.rsplit("-", 1)[-1])
        rng = ctx.rng(TaskFamily.RELATIVE_DIRECTION, ordinal)
        distractors = rng.sample(sorted(set(SINGLE_IMAGE_DIRECTIONS) - {label}), 3)
        options = distractors + [label]
        rng.shuffle(options)
        letter = LETTERS[options.index(label)]
        sample = QASample(
            sample_id=sample_id,
            task=TaskFamily.RELATIVE_DIRECTION,
            modality=ctx.modality,
            scene_id=ctx.scene.scene_id,
            view_ids=_view_ids(ctx),
            question=templates.REL_DIRECTION_SINGLE.format(
                a=a.category, b=b.category,
                c1=options[0], c2=options[1], c3=options[2], c4=options[3],
            ),
            options=tuple(options),
            answer=Answer.choice(letter),
            provenance={
                "categories": [a.category, b.category],
                "quota_category": a.category,
                "object_ids": [a.object_id, b.object_id],
                "label": label,
                "delta_u": offsets[0],
                "delta_z": offsets[1],
                "eps_x": ctx.cfg.eps_x,
                "eps_z": ctx.cfg.eps_z,
                "visibility": {
                    a.object_id: ctx.max_vis[a.object_id],
                    b.object_id: ctx.max_vis[b.object_id],
                },
            },
        )
        samples.append(sample)
    return samples


def _gen_rel_direction_multiview(ctx: _Context, stats: SynthStats) -> list[QASample]:
    samples = []
    pool = ctx.reference_pool()
    for positioning, orienting, querying in itertools.permutations(pool, 3):
        stats.candidate()
        try:
            result = geometry.relative_direction_multiview(
                positioning, orienting, querying, axis_margin_deg=ctx.cfg.axis_margin_deg
            )
        except DegenerateGeometry:
            stats.reject("degenerate_geometry")
            continue
        if result is None:
            stats.reject("ambiguous_direction")
            continue
        label, computation = result
        sample_id = ctx.next_id(TaskFamily.RELATIVE_DIRECTION)
        ordinal = int(sample_id.rsplit("-", 1)[-1])
        rng = ctx.rng(TaskFamily.RELATIVE_DIRECTION, ordinal)
        options = list(QUADRANT_DIRECTIONS)
        rng.shuffle(options)
        letter = LETTERS[options.index(label)]
        sample = QASample(
            sample_id=sample_id,
            task=TaskFamily.RELATIVE_DIRECTION,
            modality=ctx.modality,
            scene_id=ctx.scene.scene_id,
            view_ids=_view_ids(ctx),
            question=templates.REL_DIRECTION_MULTI.format(
                positioning=positioning.category,
                orienting=orienting.category,
                querying=querying.category,
                c1=options[0], c2=options[1], c3=options[2], c4=options[3],
            ),
            options=tuple(options),
            answer=Answer.choice(letter),
            provenance={
                "categories": [positioning.category, orienting.category, querying.category],
                "quota_category": querying.category,
                "object_ids": [
                    positioning.object_id, orienting.object_id, querying.object_id
                ],
                "label": label,
                "theta_deg": computation.theta_deg,
                "signed_phi_deg": computation.signed_phi_deg,
                "vec_a": list(computation.vec_a),
                "vec_b": list(computation.vec_b),
                "axis_margin_deg": ctx.cfg.axis_margin_deg,
                "visibility": {
                    o.object_id: ctx.max_vis[o.object_id]
                    for o in (positioning, orienting, querying)
                },
            },
        )
        samples.append(sample)
    return samples


def _first_appearance_frames(ctx: _Context) -> dict[str, int]:
    """Category -> earliest frame_index at which any instance clears the
    visibility threshold."""
    first: dict[str, int] = {}
    for obj in ctx.scene.objects:
        if not ctx.allowed(obj):
            continue
        for view in ctx.views:
            if geometry.visibility_ratio(view, obj) >= ctx.cfg.min_visibility:
                frame = view.frame_index
                if obj.category not in first or frame < first[obj.category]:
                    first[obj.category] = frame
                break
    return first


def _gen_appearance_order(ctx: _Context, stats: SynthStats) -> list[QASample]:
    samples = []
    allowed_categories = sorted({o.category for o in ctx.scene.objects if ctx.allowed(o)})
    first = _first_appearance_frames(ctx)
    for category in allowed_categories:
        if category not in first:
            stats.candidate()
            stats.reject("visibility")
    dated = sorted(first)
    if len(dated) < 4:
        stats.candidate()
        stats.reject("too_few_categories")
        return samples
    for combo in itertools.combinations(dated, 4):
        stats.candidate()
        frames = [first[c] for c in combo]
        gaps_ok = all(
            abs(frames[i] - frames[j]) >= APPEARANCE_GAP_FRAMES
            for i in range(4)
            for j in range(i + 1, 4)
        )
        if not gaps_ok:
            stats.reject("tie_window")
            continue
        chronological = tuple(sorted(combo, key=lambda c: first[c]))
        sample_id = ctx.next_id(TaskFamily.APPEARANCE_ORDER)
        ordinal = int(sample_id.rsplit("-", 1)[-1])
        rng = ctx.rng(TaskFamily.APPEARANCE_ORDER, ordinal)
        asked = list(combo)
        rng.shuffle(asked)
        all_perms = sorted(set(itertools.permutations(combo)) - {chronological})
        distractors = rng.sample(all_perms, 3)
        options = [", ".join(p) for p in distractors] + [", ".join(chronological)]
        rng.shuffle(options)
        letter = LETTERS[options.index(", ".join(chronological))]
        sample = QASample(
            sample_id=sample_id,
            task=TaskFamily.APPEARANCE_ORDER,
            modality=ctx.modality,
            scene_id=ctx.scene.scene_id,
            view_ids=_view_ids(ctx),
            question=templates.APPEARANCE_ORDER.format(
                c1=asked[0], c2=asked[1], c3=asked[2], c4=asked[3]
            ),
            options=tuple(options),
            answer=Answer.choice(letter),
            provenance={
                "categories": list(chronological),
                "quota_category": chronological[0],
                "first_frames": {c: first[c] for c in combo},
                "gap_frames": APPEARANCE_GAP_FRAMES,
            },
        )
        samples.append(sample)
    return samples


def _gen_room_size(ctx: _Context, stats: SynthStats) -> QASample | None:
    stats.candidate()
    if not any(ctx.allowed(o) and ctx.visible(o) for o in ctx.scene.objects):
        stats.reject("visibility")
        return None
    extent = effective_floor_extent(ctx.scene)
    if extent is None:
        stats.reject("zero_area")
        return None
    (x0, y0), (x1, y1) = extent
    area = (x1 - x0) * (y1 - y0)
    if area <= 0.0:
        stats.reject("zero_area")
        return None
    return QASample(
        sample_id=ctx.next_id(TaskFamily.ROOM_SIZE),
        task=TaskFamily.ROOM_SIZE,
        modality=ctx.modality,
        scene_id=ctx.scene.scene_id,
        view_ids=_view_ids(ctx),
        question=templates.ROOM_SIZE,
        options=None,
        answer=Answer.numeric(round(area, 1), "m2"),
        provenance={
            "categories": [],
            "quota_category": "room",
            "extent": [list(extent[0]), list(extent[1])],
            "area_m2": area,
            "derived": ctx.scene.floor_extent is None,
        },
    )


def gen_localization(
    paired: QASample, scene: Scene, view: CameraView, cfg: SynthConfig
) -> QASample:
    """Pair a single-image sample with its grounding twin: same question plus
    the localization suffix, answered by one labeled 2D box per referenced
    category. Raises UniquenessViolation when a referenced category has more
    than one sufficiently visible instance in the view."""
    if paired.modality is not Modality.SINGLE_IMAGE:
        raise ValueError("localization pairs with single-image samples only")
    boxes = []
    for category in paired.provenance.get("categories", []):
        instances = [
            o
            for o in scene.objects
            if o.category == category
            and geometry.visibility_ratio(view, o) >= cfg.min_visibility
        ]
        if len(instances) != 1:
            raise UniquenessViolation(
                f"category '{category}' has {len(instances)} visible instances in "
                f"view '{view.view_id}'"
            )
        bbox = geometry.project_bbox(view, instances[0])
        if bbox is None:  # unreachable for visible objects; guard anyway
            raise UniquenessViolation(f"category '{category}' does not project")
        boxes.append((category, bbox))
    return QASample(
        sample_id=f"{paired.sample_id}-loc",
        task=TaskFamily.OBJECT_LOCALIZATION,
        modality=Modality.SINGLE_IMAGE,
        scene_id=paired.scene_id,
        view_ids=paired.view_ids,
        question=f"{paired.question} {templates.LOCALIZATION_SUFFIX}",
        options=None,
        answer=Answer.labeled_boxes(boxes),
        provenance={
            "categories": list(paired.provenance.get("categories", [])),
            "quota_category": paired.provenance.get("quota_category", ""),
            "paired_id": paired.sample_id,
        },
    )


# --- public single-task entry points ---------------------------------------


def gen_counting(scene, view_ids, cfg, modality=Modality.MULTI_VIEW, stats=None):
    stats = stats if stats is not None else SynthStats()
    return _gen_counting(_context_from_ids(scene, view_ids, modality, cfg), stats)


def gen_abs_distance(scene, view_ids, cfg, modality=Modality.SINGLE_IMAGE, stats=None):
    stats = stats if stats is not None else SynthStats()
    return _gen_abs_distance(_context_from_ids(scene, view_ids, modality, cfg), stats)


def gen_obj_size(scene, view_ids, cfg, modality=Modality.SINGLE_IMAGE, stats=None):
    stats = stats if stats is not None else SynthStats()
    return _gen_obj_size(_context_from_ids(scene, view_ids, modality, cfg), stats)


def gen_rel_distance(scene, view_ids, cfg, modality=Modality.SINGLE_IMAGE, stats=None):
    stats = stats if stats is not None else SynthStats()
    return _gen_rel_distance(_context_from_ids(scene, view_ids, modality, cfg), stats)


def gen_rel_direction(scene, modality, cfg, view_ids=None, stats=None):
    stats = stats if stats is not None else SynthStats()
    if view_ids is None:
        view_ids = [v.view_id for v in scene.views]
    ctx = _context_from_ids(scene, view_ids, modality, cfg)
    if modality is Modality.SINGLE_IMAGE:
        return _gen_rel_direction_single(ctx, stats)
    return _gen_rel_direction_multiview(ctx, stats)


def gen_appearance_order(scene, cfg, stats=None):
    stats = stats if stats is not None else SynthStats()
    ctx = _build_context(scene, scene.views, Modality.VIDEO, cfg)
    return _gen_appearance_order(ctx, stats)


def gen_room_size(scene, cfg, stats=None):
    stats = stats if stats is not None else SynthStats()
    ctx = _build_context(scene, scene.views, Modality.VIDEO, cfg)
    return _gen_room_size(ctx, stats)


# --- quotas and orchestration ----------------------------------------------


def apply_quotas(
    samples: list[QASample], cfg: SynthConfig
) -> tuple[list[QASample], Counter]:
    """Seeded selection enforcing per_scene_cap per (scene, task) and
    per_scene_category_cap per (scene, task, category). The kept set is a
    pure function of (samples, cfg.seed); kept samples stay in input order."""
    keep = [True] * len(samples)
    dropped: Counter = Counter()
    groups: dict[tuple[str, str], list[int]] = {}
    for i, s in enumerate(samples):
        groups.setdefault((s.scene_id, s.task.value), []).append(i)
    for (scene_id, task), indices in sorted(groups.items()):
        rng = rng_for(cfg.seed, "quota", scene_id, task)
        order = list(indices)
        rng.shuffle(order)
        kept_count = 0
        per_category: Counter = Counter()
        for i in order:
            category = samples[i].provenance.get("quota_category", "")
            if kept_count >= cfg.per_scene_cap:
                keep[i] = False
                dropped["quota_scene"] += 1
                continue
            if per_category[category] >= cfg.per_scene_category_cap:
                keep[i] = False
                dropped["quota_category"] += 1
                continue
            per_category[category] += 1
            kept_count += 1
    kept = [s for s, flag in zip(samples, keep) if flag]
    return kept, dropped


def synthesize(scenes, cfg: SynthConfig) -> DatasetBundle:
    """Run every generator across modalities, filter, enforce quotas, and
    pair kept single-image samples with localization twins."""
    stats = SynthStats()
    spatial: list[QASample] = []
    scene_map: dict[str, Scene] = {}
    for scene in scenes:
        problems = validate_scene(scene)
        if problems:
            listing = "; ".join(str(v) for v in problems)
            raise InvariantError(f"scene '{scene.scene_id}': {listing}")
        if scene.scene_id in scene_map:
            raise InvariantError(f"duplicate scene_id '{scene.scene_id}'")
        scene_map[scene.scene_id] = scene
        counters: Counter = Counter()

        for view in scene.views:
            ctx = _build_context(scene, (view,), Modality.SINGLE_IMAGE, cfg, counters)
            spatial += _gen_abs_distance(ctx, stats)
            spatial += _gen_obj_size(ctx, stats)
            spatial += _gen_rel_distance(ctx, stats)
            spatial += _gen_rel_direction_single(ctx, stats)

        multi = uniformly_spaced_views(scene.views, cfg.views_per_multiview)
        ctx = _build_context(scene, multi, Modality.MULTI_VIEW, cfg, counters)
        spatial += _gen_counting(ctx, stats)
        spatial += _gen_abs_distance(ctx, stats)
        spatial += _gen_obj_size(ctx, stats)
        spatial += _gen_rel_distance(ctx, stats)
        spatial += _gen_rel_direction_multiview(ctx, stats)

        ctx = _build_context(scene, scene.views, Modality.VIDEO, cfg, counters)
        spatial += _gen_counting(ctx, stats)
        spatial += _gen_abs_distance(ctx, stats)
        spatial += _gen_obj_size(ctx, stats)
        spatial += _gen_room_size_into(ctx, stats)
        spatial += _gen_rel_distance(ctx, stats)
        spatial += _gen_rel_direction_multiview(ctx, stats)
        spatial += _gen_appearance_order(ctx, stats)

    kept, quota_drops = apply_quotas(spatial, cfg)
    stats.rejected.update(quota_drops)

    # every kept single-image sample gets a grounding twin; twins mirror
    # their pair one-to-one and are exempt from quotas
    final: list[QASample] = []
    for sample in kept:
        final.append(sample)
        if sample.modality is Modality.SINGLE_IMAGE:
            stats.candidate()
            scene = scene_map[sample.scene_id]
            view = scene.view_by_id(sample.view_ids[0])
            final.append(gen_localization(sample, scene, view, cfg))

    stats.kept = len(final)
    for sample in final:
        stats.kept_by_task[sample.task.value] += 1
    return DatasetBundle(samples=final, stats=stats)


def _gen_room_size_into(ctx: _Context, stats: SynthStats) -> list[QASample]:
    sample = _gen_room_size(ctx, stats)
    return [sample] if sample is not None else []


# --- prompt assembly and serialization --------------------------------------


def assemble_prompt(sample: QASample, stage: int) -> str:
    """User prompt for a training stage. Stage 1 serves localization samples
    (whose question already carries the grounding suffix); stages 2 and 3
    serve numeric and choice samples, with a lettered options block appended
    for multiple choice."""
    if stage not in (1, 2, 3):
        raise ValueError(f"stage must be 1, 2 or 3, got {stage}")
    is_localization = sample.task is TaskFamily.OBJECT_LOCALIZATION
    if stage == 1:
        if not is_localization:
            raise StagePairingError("stage 1 prompts pair with localization samples only")
        return sample.question
    if is_localization:
        raise StagePairingError("localization samples are stage-1 only")
    body = sample.question
    if sample.options is not None:
        lines = [f"{LETTERS[i]}. {text}" for i, text in enumerate(sample.options)]
        body = body + "\n" + "\n".join(lines)
        post = templates.STAGE2_POST_MCQ if stage == 2 else templates.STAGE3_POST_MCQ
    else:
        post = templates.STAGE2_POST_NQ if stage == 2 else templates.STAGE3_POST_NQ
    if stage == 2:
        return f"{body}\n{post}"
    return f"{body}\n{templates.STAGE3_THINK} {post}"


def sample_to_json_dict(sample: QASample) -> dict:
    if sample.answer.kind == "numeric":
        answer = {"kind": "numeric", "value": sample.answer.value, "unit": sample.answer.unit}
    elif sample.answer.kind == "choice":
        answer = {"kind": "choice", "letter": sample.answer.letter}
    else:
        answer = {
            "kind": "boxes",
            "boxes": [
                {"label": label, "bbox": [b.x_min, b.y_min, b.x_max, b.y_max]}
                for label, b in sample.answer.boxes
            ],
        }
    is_localization = sample.task is TaskFamily.OBJECT_LOCALIZATION
    return {
        "id": sample.sample_id,
        "task": sample.task.value,
        "modality": sample.modality.value,
        "scene_id": sample.scene_id,
        "view_ids": list(sample.view_ids),
        "question": sample.question,
        "prompt_stage1": assemble_prompt(sample, 1) if is_localization else None,
        "prompt_stage2": None if is_localization else assemble_prompt(sample, 2),
        "prompt_stage3": None if is_localization else assemble_prompt(sample, 3),
        "options": (
            None
            if sample.options is None
            else [
                {"letter": LETTERS[i], "text": text}
                for i, text in enumerate(sample.options)
            ]
        ),
        "answer": answer,
        "provenance": sample.provenance,
    }


def sample_from_json_dict(doc: dict) -> QASample:
    raw_answer = doc["answer"]
    if raw_answer["kind"] == "numeric":
        answer = Answer.numeric(raw_answer["value"], raw_answer.get("unit", ""))
    elif raw_answer["kind"] == "choice":
        answer = Answer.choice(raw_answer["letter"])
    else:
        answer = Answer.labeled_boxes(
            (
                entry["label"],
                BBox2D(
                    x_min=entry["bbox"][0],
                    y_min=entry["bbox"][1],
                    x_max=entry["bbox"][2],
                    y_max=entry["bbox"][3],
                ),
            )
            for entry in raw_answer["boxes"]
        )
    options = doc.get("options")
    return QASample(
        sample_id=doc["id"],
        task=TaskFamily(doc["task"]),
        modality=Modality(doc["modality"]),
        scene_id=doc.get("scene_id", ""),
        view_ids=tuple(doc.get("view_ids", ())),
        question=doc.get("question", ""),
        options=None if options is None else tuple(entry["text"] for entry in options),
        answer=answer,
        provenance=doc.get("provenance", {}),
    )


def bundle_to_jsonl(bundle: DatasetBundle) -> str:
    lines = [
        json.dumps(sample_to_json_dict(s), sort_keys=True, ensure_ascii=False)
        for s in bundle.samples
    ]
    return "".join(line + "\n" for line in lines)
