"""Spatial-reasoning QA toolkit: geometric dataset synthesis from 3D scene
metadata, verifiable reward scoring, group-relative advantage math, and
benchmark analysis."""

from .analysis import (
    AttentionMap,
    BenchmarkReport,
    ResponseSampleSet,
    aggregate_benchmark,
    attention_entropy,
    attention_iou,
    semantic_entropy,
)
from .geometry import (
    BBox2D,
    DirectionComputation,
    Projection2D,
    centroid_distance,
    closest_point_distance,
    max_dimension,
    project_bbox,
    project_point,
    relative_direction_multiview,
    relative_direction_single,
    visibility_ratio,
)
from .grpo import (
    GradientCheckReport,
    GrpoConfig,
    PolicyGroup,
    group_advantages,
    grpo_objective,
    kl_estimate,
    toy_policy_check,
)
from .rewards import (
    ParsedResponse,
    RewardBreakdown,
    RewardConfig,
    bbox_iou,
    coldstart_filter,
    format_reward,
    mcq_reward,
    numerical_reward,
    parse_localization,
    parse_response,
    score_answer,
    total_reward,
)
from .scene import (
    CameraView,
    InvariantError,
    Object3D,
    Scene,
    SchemaError,
    Vec3,
    Violation,
    parse_scene,
    serialize_scene,
    validate_scene,
)
from .synth import (
    Answer,
    DatasetBundle,
    Modality,
    QASample,
    SynthConfig,
    TaskFamily,
    apply_quotas,
    assemble_prompt,
    synthesize,
)

__version__ = "0.1.0"
