"""Analysis metrics: semantic entropy, attention concentration, benchmark tables.

Semantic entropy clusters a question's sampled responses by exact accuracy
reward equality (rewards on the default ladder are multiples of 0.1, so
equality is well-defined) and reports the natural-log entropy of the
cluster distribution.

Attention metrics score supplied token-grid maps only; extracting the maps
from a model is out of scope here.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .geometry import BBox2D


class EmptyBox(ValueError):
    """The evaluated box covers no attention-grid patch centers."""


class UnknownId(KeyError):
    """A prediction references a sample id that does not exist."""


@dataclass(frozen=True)
class ResponseSampleSet:
    question_id: str
    rewards: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "rewards", tuple(float(r) for r in self.rewards))
        if not self.rewards:
            raise ValueError("need at least one sampled reward")
        if any(not (0.0 <= r <= 1.0) for r in self.rewards):
            raise ValueError("rewards must lie in [0, 1]")


@dataclass(frozen=True)
class AttentionMap:
    grid_w: int
    grid_h: int
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.grid_w < 1 or self.grid_h < 1:
            raise ValueError("grid dimensions must be positive")
        if len(self.weights) != self.grid_w * self.grid_h:
            raise ValueError("weights length must equal grid_w * grid_h")
        if any(w < 0.0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if not any(w > 0.0 for w in self.weights):
            raise ValueError("at least one weight must be positive")


def semantic_entropy(sample_set: ResponseSampleSet) -> float:
    """Entropy (nats) of the reward-equality cluster distribution.
    0 when every response lands in one cluster; at most ln(N). Clusters are
    summed in sorted-reward order so the result is exactly permutation
    invariant."""
    n = len(sample_set.rewards)
    clusters = Counter(sample_set.rewards)
    entropy = 0.0
    for reward in sorted(clusters):
        p = clusters[reward] / n
        entropy -= p * math.log(p)
    return max(0.0, entropy)


def _patch_membership(
    amap: AttentionMap, box: BBox2D, image_w: float, image_h: float
) -> np.ndarray:
    """Boolean mask over the row-major grid: True where the patch center
    falls inside the pixel box (inclusive bounds)."""
    cols = (np.arange(amap.grid_w) + 0.5) * (image_w / amap.grid_w)
    rows = (np.arange(amap.grid_h) + 0.5) * (image_h / amap.grid_h)
    in_x = (cols >= box.x_min) & (cols <= box.x_max)
    in_y = (rows >= box.y_min) & (rows <= box.y_max)
    return (in_y[:, None] & in_x[None, :]).reshape(-1)


def attention_iou(
    amap: AttentionMap, box: BBox2D, image_w: float, image_h: float
) -> float:
    """Share of min-max normalized attention mass inside the object box.

    When all weights are equal, min-max normalization is degenerate; the map
    is then treated as uniform so the result reduces to the box's share of
    patch centers.
    """
    weights = np.asarray(amap.weights, dtype=float)
    lo, hi = weights.min(), weights.max()
    if hi - lo <= 0.0:
        normalized = np.ones_like(weights)
    else:
        normalized = (weights - lo) / (hi - lo)
    inside = _patch_membership(amap, box, image_w, image_h)
    if not inside.any():
        raise EmptyBox("box covers no patch centers")
    total = normalized.sum()
    if total <= 0.0:  # single positive-at-min cell edge; treat as uniform
        normalized = np.ones_like(weights)
        total = normalized.sum()
    return float(normalized[inside].sum() / total)


def attention_entropy(amap: AttentionMap) -> float:
    """Entropy of the weight distribution normalized by ln(grid size), so a
    uniform map scores 1 and a one-hot map scores 0."""
    weights = np.asarray(amap.weights, dtype=float)
    n = weights.size
    if n == 1:
        return 0.0
    p = weights / weights.sum()
    nz = p[p > 0.0]
    entropy = float(-(nz * np.log(nz)).sum())
    return entropy / math.log(n)


# --- benchmark aggregation ------------------------------------------------

NUMERIC_KIND = "numeric"
CHOICE_KIND = "choice"


@dataclass
class BenchmarkReport:
    per_task: dict[str, float]
    per_modality: dict[str, float]
    nq: float
    mcq: float
    overall: float
    counts: dict[str, int]
    coverage: float
    warnings: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "per_task": dict(sorted(self.per_task.items())),
            "per_modality": dict(sorted(self.per_modality.items())),
            "nq": self.nq,
            "mcq": self.mcq,
            "overall": self.overall,
            "counts": dict(sorted(self.counts.items())),
            "coverage": self.coverage,
            "warnings": list(self.warnings),
        }

    def to_text_table(self) -> str:
        rows = [("Task", "N", "Accuracy")]
        for task in sorted(self.per_task):
            rows.append((task, str(self.counts.get(task, 0)), f"{self.per_task[task]:.3f}"))
        rows.append(("NQ", str(self.counts.get("__nq__", 0)), f"{self.nq:.3f}"))
        rows.append(("MCQ", str(self.counts.get("__mcq__", 0)), f"{self.mcq:.3f}"))
        rows.append(("Avg.", str(self.counts.get("__all__", 0)), f"{self.overall:.3f}"))
        widths = [max(len(r[i]) for r in rows) for i in range(3)]
        lines = []
        for idx, row in enumerate(rows):
            lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
            if idx == 0 or idx == len(rows) - 4:
                lines.append("  ".join("-" * widths[i] for i in range(3)))
        for warning in self.warnings:
            lines.append(f"warning: {warning}")
        return "\n".join(lines) + "\n"


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def aggregate_benchmark(samples, accuracies: dict[str, float]) -> BenchmarkReport:
    """Roll scored accuracies up into the NQ / MCQ / per-task table.

    ``samples`` are QASamples (or anything with sample_id, task, modality and
    answer.kind); ``accuracies`` maps sample id to the accuracy component of
    its reward. Numeric samples aggregate graduated relative accuracy, choice
    samples exact match; box-answer samples are outside this table. Samples
    without a prediction count as 0; predictions without a sample raise
    UnknownId.
    """
    scoreable = [s for s in samples if s.answer.kind in (NUMERIC_KIND, CHOICE_KIND)]
    known = {s.sample_id for s in scoreable}
    for pred_id in accuracies:
        if pred_id not in known:
            raise UnknownId(pred_id)

    def acc(sample) -> float:
        return float(accuracies.get(sample.sample_id, 0.0))

    by_task: dict[str, list[float]] = {}
    by_modality: dict[str, list[float]] = {}
    nq_values: list[float] = []
    mcq_values: list[float] = []
    for s in scoreable:
        value = acc(s)
        by_task.setdefault(str(s.task.value if hasattr(s.task, "value") else s.task), []).append(value)
        by_modality.setdefault(
            str(s.modality.value if hasattr(s.modality, "value") else s.modality), []
        ).append(value)
        (nq_values if s.answer.kind == NUMERIC_KIND else mcq_values).append(value)

    per_task = {task: _mean(vals) for task, vals in by_task.items()}
    per_modality = {mod: _mean(vals) for mod, vals in by_modality.items()}
    counts = {task: len(vals) for task, vals in by_task.items()}
    counts["__nq__"] = len(nq_values)
    counts["__mcq__"] = len(mcq_values)
    counts["__all__"] = len(scoreable)
    warnings = []
    coverage = (
        len([s for s in scoreable if s.sample_id in accuracies]) / len(scoreable)
        if scoreable
        else 0.0
    )
    if scoreable and coverage == 0.0:
        warnings.append("no predictions matched any sample; all cells are zero")
    return BenchmarkReport(
        per_task=per_task,
        per_modality=per_modality,
        nq=_mean(nq_values),
        mcq=_mean(mcq_values),
        overall=_mean(list(per_task.values())),
        counts=counts,
        coverage=coverage,
        warnings=warnings,
    )
