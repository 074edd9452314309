"""Response parsing and verifiable reward scoring.

A well-formed response is exactly one <think>...</think> block followed by
exactly one <answer>...</answer> block with nothing but whitespace around
them. Scoring decomposes into a binary format reward plus an accuracy
reward: exact letter match for multiple choice, graduated relative accuracy
over a threshold ladder for numeric answers.

The arithmetic here deliberately uses plain sequential float operations
(no numpy reductions) so an independent reimplementation can reproduce
results bit-for-bit.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass

from .geometry import BBox2D

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = (0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95)

_FORMAT_RE = re.compile(r"\s*<think>(.*?)</think>\s*<answer>(.*?)</answer>\s*", re.DOTALL)
_ANSWER_BLOCK_RE = re.compile(r"<answer>(.*?)</answer>", re.DOTALL)
_NUMBER_RE = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")
_LETTER_RE = re.compile(r"\b([A-D])\b")
_EDGE_PUNCT = ".,:;!?()[]{}'\"`"


class NoJsonFound(ValueError):
    """Response contains no parseable JSON array of labeled boxes."""


@dataclass(frozen=True)
class RewardConfig:
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    coldstart_lambda: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(self.thresholds))
        if not self.thresholds:
            raise ValueError("thresholds must be nonempty")
        prev = 0.0
        for t in self.thresholds:
            if not (0.0 < t < 1.0):
                raise ValueError(f"threshold {t} outside (0, 1)")
            if t <= prev:
                raise ValueError("thresholds must be strictly increasing")
            prev = t
        if not (0.0 <= self.coldstart_lambda <= 1.0):
            raise ValueError("coldstart_lambda must be a fraction in [0, 1]")


@dataclass(frozen=True)
class ParsedResponse:
    raw: str
    think: str | None
    answer_text: str | None
    format_ok: bool


@dataclass(frozen=True)
class RewardBreakdown:
    format: int
    accuracy: float

    @property
    def total(self) -> float:
        return self.format + self.accuracy


def extract_number(text: str) -> float | None:
    """Last decimal number appearing in the text, if any."""
    matches = _NUMBER_RE.findall(text)
    if not matches:
        return None
    try:
        return float(matches[-1])
    except ValueError:  # pragma: no cover - regex guarantees float-able
        return None


def extract_choice(text: str) -> str | None:
    """Last standalone option letter A-D in the text (case-insensitive)."""
    matches = _LETTER_RE.findall(text.upper())
    return matches[-1] if matches else None


def parse_response(raw: str) -> ParsedResponse:
    """Total parse: tag contents when well-formed, best-effort fallback otherwise."""
    counts = (
        raw.count("<think>"),
        raw.count("</think>"),
        raw.count("<answer>"),
        raw.count("</answer>"),
    )
    m = _FORMAT_RE.fullmatch(raw)
    if m is not None and counts == (1, 1, 1, 1):
        return ParsedResponse(
            raw=raw, think=m.group(1), answer_text=m.group(2).strip(), format_ok=True
        )
    # tolerate a single answer block even when the overall format is off
    answer_text: str | None = None
    if counts[2] == 1 and counts[3] == 1:
        am = _ANSWER_BLOCK_RE.search(raw)
        if am is not None:
            answer_text = am.group(1).strip()
    if answer_text is None:
        number = extract_number(raw)
        if number is not None:
            answer_text = _NUMBER_RE.findall(raw)[-1]
        else:
            answer_text = extract_choice(raw)
    return ParsedResponse(raw=raw, think=None, answer_text=answer_text, format_ok=False)


def format_reward(p: ParsedResponse) -> int:
    return 1 if p.format_ok else 0


def _normalize_choice(pred: str) -> str:
    return pred.strip().strip(_EDGE_PUNCT).strip().upper()


def mcq_reward(pred: str, gold: str) -> int:
    """Exact match after trimming, uppercasing and stripping edge punctuation."""
    return 1 if _normalize_choice(pred) == gold.strip().upper() else 0


def numerical_reward(pred: float, gold: float, cfg: RewardConfig | None = None) -> float:
    """Graduated relative accuracy: the fraction of thresholds tau with
    |pred - gold| / |gold| < tau (strict). With the default ladder the result
    is always a multiple of 0.1.

    A gold of exactly zero has no relative scale; by convention the reward is
    then 1.0 for an exactly-zero prediction and 0.0 otherwise.
    """
    cfg = cfg or RewardConfig()
    if gold == 0.0:
        return 1.0 if pred == 0.0 else 0.0
    rel_err = abs(pred - gold) / abs(gold)
    hits = 0
    for tau in cfg.thresholds:
        if rel_err < tau:
            hits += 1
    return hits / len(cfg.thresholds)


def _answer_candidate(p: ParsedResponse, kind: str) -> str | None:
    """Scoring text: the answer-tag content when a single block exists,
    otherwise a kind-aware fallback over the raw response."""
    counts = (p.raw.count("<answer>"), p.raw.count("</answer>"))
    if counts == (1, 1):
        m = _ANSWER_BLOCK_RE.search(p.raw)
        if m is not None:
            return m.group(1).strip()
    if kind == "numeric":
        number = extract_number(p.raw)
        return None if number is None else _NUMBER_RE.findall(p.raw)[-1]
    return extract_choice(p.raw)


def score_answer(
    p: ParsedResponse,
    kind: str,
    gold: float | str,
    cfg: RewardConfig | None = None,
) -> RewardBreakdown:
    """Format plus accuracy reward for one response against one gold answer.

    ``kind`` is "numeric" (gold is a number) or "choice" (gold is a letter).
    Unparseable answers score accuracy 0 rather than raising.
    """
    cfg = cfg or RewardConfig()
    if kind not in ("numeric", "choice"):
        raise ValueError(f"unsupported answer kind for scoring: {kind!r}")
    fmt = format_reward(p)
    text = _answer_candidate(p, kind)
    if text is None:
        return RewardBreakdown(format=fmt, accuracy=0.0)
    if kind == "choice":
        return RewardBreakdown(format=fmt, accuracy=float(mcq_reward(text, str(gold))))
    value = extract_number(text)
    if value is None:
        return RewardBreakdown(format=fmt, accuracy=0.0)
    return RewardBreakdown(format=fmt, accuracy=numerical_reward(value, float(gold), cfg))


def total_reward(p: ParsedResponse, sample, cfg: RewardConfig | None = None) -> RewardBreakdown:
    """Score a response against a QASample with a numeric or choice answer."""
    answer = sample.answer
    if answer.kind == "numeric":
        return score_answer(p, "numeric", answer.value, cfg)
    if answer.kind == "choice":
        return score_answer(p, "choice", answer.letter, cfg)
    raise ValueError(f"cannot score answer kind {answer.kind!r}")


def coldstart_filter(candidates, cfg: RewardConfig | None = None) -> list:
    """Keep (response, sample) pairs whose combined reward strictly exceeds
    1 + coldstart_lambda; input order is preserved."""
    cfg = cfg or RewardConfig()
    cutoff = 1.0 + cfg.coldstart_lambda
    kept = []
    for parsed, sample in candidates:
        if total_reward(parsed, sample, cfg).total > cutoff:
            kept.append((parsed, sample))
    return kept


def parse_localization(raw: str) -> list[tuple[str, BBox2D]]:
    """Labeled boxes from the first JSON array of {label, bbox} objects
    embedded in the response. Reversed coordinates are normalized; invalid
    entries are skipped with a warning. Raises NoJsonFound when no candidate
    array parses."""
    decoder = json.JSONDecoder()
    for start, ch in enumerate(raw):
        if ch != "[":
            continue
        try:
            value, _ = decoder.raw_decode(raw, start)
        except json.JSONDecodeError:
            continue
        if not isinstance(value, list) or not any(isinstance(e, dict) for e in value):
            continue
        boxes: list[tuple[str, BBox2D]] = []
        for entry in value:
            box = _box_from_entry(entry)
            if box is None:
                logger.warning("skipping invalid localization entry: %r", entry)
                continue
            boxes.append(box)
        if boxes:
            return boxes
    raise NoJsonFound("no JSON array of labeled boxes found in response")


def _box_from_entry(entry) -> tuple[str, BBox2D] | None:
    if not isinstance(entry, dict):
        return None
    label = entry.get("label")
    bbox = entry.get("bbox")
    if not isinstance(label, str) or not isinstance(bbox, list) or len(bbox) != 4:
        return None
    try:
        x1, y1, x2, y2 = (float(v) for v in bbox)
    except (TypeError, ValueError):
        return None
    return label, BBox2D(
        x_min=min(x1, x2), y_min=min(y1, y2), x_max=max(x1, x2), y_max=max(y1, y2)
    )


def bbox_iou(a: BBox2D, b: BBox2D) -> float:
    """Intersection over union of two pixel boxes; 0 when disjoint or when
    the union has zero area."""
    ix = max(0.0, min(a.x_max, b.x_max) - max(a.x_min, b.x_min))
    iy = max(0.0, min(a.y_max, b.y_max) - max(a.y_min, b.y_min))
    inter = ix * iy
    union = a.area() + b.area() - inter
    if union <= 0.0:
        return 0.0
    return inter / union
