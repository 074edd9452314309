import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import loop_numerical_reward
from spatialqa.geometry import BBox2D
from spatialqa.rewards import (
    NoJsonFound,
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
from spatialqa.synth import Answer, Modality, QASample, TaskFamily


def make_sample(answer, options=None, task=TaskFamily.OBJECT_SIZE):
    return QASample(
        sample_id="s1", task=task, modality=Modality.MULTI_VIEW, scene_id="sc",
        view_ids=("v0",), question="q?", options=options, answer=answer,
        provenance={},
    )


# --- parsing -----------------------------------------------------------


def test_parse_well_formed():
    p = parse_response("<think>x</think><answer>A</answer>")
    assert p.format_ok
    assert p.think == "x"
    assert p.answer_text == "A"


def test_parse_whitespace_tolerated():
    p = parse_response("  <think>\nreasoning\n</think>\n  <answer> 3.5 </answer>  ")
    assert p.format_ok
    assert p.answer_text == "3.5"


def test_parse_fallback_number():
    p = parse_response("The answer is 3.1")
    assert not p.format_ok
    assert p.answer_text == "3.1"


def test_parse_fallback_letter():
    p = parse_response("I will go with option B here")
    assert not p.format_ok
    assert p.answer_text == "B"


def test_parse_duplicated_answer_tags():
    p = parse_response("<think>x</think><answer>A</answer><answer>B</answer>")
    assert not p.format_ok


def test_parse_nested_tags_not_ok():
    p = parse_response("<think>a<think>b</think></think><answer>C</answer>")
    assert not p.format_ok


def test_parse_wrong_order():
    p = parse_response("<answer>A</answer><think>x</think>")
    assert not p.format_ok


def test_parse_trailing_prose_breaks_format():
    p = parse_response("<think>x</think><answer>A</answer> so that is that")
    assert not p.format_ok
    assert p.answer_text == "A"  # single answer block still preferred


def test_format_reward_values():
    assert format_reward(parse_response("<think>a</think><answer>1</answer>")) == 1
    assert format_reward(parse_response("<answer>1</answer>")) == 0
    assert format_reward(parse_response("<answer>1</answer><think>a</think>")) == 0


# --- mcq ---------------------------------------------------------------


@pytest.mark.parametrize("pred,gold,expected", [
    ("A", "A", 1),
    ("a.", "A", 1),
    (" b ", "B", 1),
    ("B", "A", 0),
    ("(C)", "C", 1),
    ("answer", "A", 0),
])
def test_mcq_reward(pred, gold, expected):
    assert mcq_reward(pred, gold) == expected


# --- numerical -----------------------------------------------------------


def test_numerical_exact():
    assert numerical_reward(10.0, 10.0) == 1.0


def test_numerical_rel_err_06():
    assert numerical_reward(4.0, 10.0) == pytest.approx(0.7)


def test_numerical_rel_err_10():
    assert numerical_reward(20.0, 10.0) == 0.0


def test_numerical_zero_gold_convention():
    assert numerical_reward(0.0, 0.0) == 1.0
    assert numerical_reward(0.1, 0.0) == 0.0


@settings(max_examples=300, deadline=None)
@given(pred=st.floats(-1e4, 1e4), gold=st.floats(-1e4, 1e4))
def test_numerical_matches_loop_oracle(pred, gold):
    cfg = RewardConfig()
    assert numerical_reward(pred, gold, cfg) == loop_numerical_reward(
        pred, gold, cfg.thresholds
    )


@settings(max_examples=200, deadline=None)
@given(gold=st.floats(0.1, 1e3), d1=st.floats(0, 2), d2=st.floats(0, 2))
def test_numerical_monotone_in_abs_error(gold, d1, d2):
    lo, hi = sorted((d1, d2))
    assert numerical_reward(gold + hi * gold, gold) <= numerical_reward(
        gold + lo * gold, gold
    )


@settings(max_examples=200, deadline=None)
@given(gold=st.floats(0.1, 1e3), d=st.floats(0, 2))
def test_numerical_symmetric_about_gold(gold, d):
    p_above = gold + d * gold
    delta = p_above - gold
    p_below = gold - delta
    if abs(p_below - gold) != abs(p_above - gold):  # float construction noise
        return
    assert numerical_reward(p_above, gold) == numerical_reward(p_below, gold)


@settings(max_examples=200, deadline=None)
@given(pred=st.floats(-50, 50), gold=st.floats(0.01, 50), k=st.floats(0.01, 100))
def test_numerical_scale_invariant(pred, gold, k):
    assert numerical_reward(pred, gold) == numerical_reward(k * pred, k * gold)


@settings(max_examples=300, deadline=None)
@given(pred=st.floats(-1e6, 1e6), gold=st.floats(-1e6, 1e6))
def test_numerical_granularity(pred, gold):
    value = numerical_reward(pred, gold)
    assert value in {i / 10.0 for i in range(11)}


# --- total + cold start ----------------------------------------------------


def test_total_correct_mcq():
    sample = make_sample(Answer.choice("A"), options=("left", "right"),
                         task=TaskFamily.RELATIVE_DIRECTION)
    breakdown = total_reward(parse_response("<think>r</think><answer>A</answer>"), sample)
    assert (breakdown.format, breakdown.accuracy, breakdown.total) == (1, 1.0, 2.0)


def test_total_numeric_graduated():
    sample = make_sample(Answer.numeric(10.0, "m"), task=TaskFamily.ABSOLUTE_DISTANCE)
    breakdown = total_reward(parse_response("<think>r</think><answer>4</answer>"), sample)
    assert breakdown.total == pytest.approx(1.7)


def test_total_malformed_but_correct():
    sample = make_sample(Answer.choice("A"), options=("left", "right"),
                         task=TaskFamily.RELATIVE_DIRECTION)
    breakdown = total_reward(parse_response("A"), sample)
    assert (breakdown.format, breakdown.accuracy) == (0, 1.0)


def test_total_numeric_unit_noise_in_answer_tag():
    sample = make_sample(Answer.numeric(2.0, "m"))
    breakdown = total_reward(
        parse_response("<think>r</think><answer>about 2.0 meters</answer>"), sample
    )
    assert breakdown.accuracy == 1.0


def test_total_unparseable_scores_zero():
    sample = make_sample(Answer.numeric(2.0, "m"))
    breakdown = total_reward(parse_response("<think>r</think><answer>dunno</answer>"), sample)
    assert (breakdown.format, breakdown.accuracy) == (1, 0.0)


def _candidate(total_target: float):
    """(parsed, sample) pair engineered to score exactly total_target."""
    fmt = 1 if total_target >= 1.0 else 0
    accuracy = round(total_target - fmt, 1)
    gold = 10.0
    if accuracy == 1.0:
        pred = gold
    elif accuracy == 0.0:
        pred = 3 * gold
    else:
        hits = round(accuracy * 10)
        rel = 1.0 - 0.05 * hits - 0.025  # midpoint of the band hitting k thresholds
        pred = gold * (1 + rel)
    text = f"{pred}"
    raw = f"<think>x</think><answer>{text}</answer>" if fmt else f"answer {text}"
    sample = make_sample(Answer.numeric(gold, "m"))
    return parse_response(raw), sample


@pytest.mark.parametrize("total", [round(0.1 * i, 1) for i in range(21)])
def test_candidate_construction_hits_target(total):
    parsed, sample = _candidate(total)
    assert total_reward(parsed, sample).total == pytest.approx(total)


def test_coldstart_strict_inequality():
    kept = coldstart_filter([_candidate(1.7)], RewardConfig())
    assert len(kept) == 1
    assert coldstart_filter([_candidate(1.5)], RewardConfig()) == []
    assert coldstart_filter([_candidate(1.0)], RewardConfig()) == []


def test_coldstart_preserves_order():
    cands = [_candidate(t) for t in (2.0, 1.4, 1.6, 1.8, 1.5)]
    kept = coldstart_filter(cands, RewardConfig())
    assert [c[1] for c in kept] == [cands[0][1], cands[2][1], cands[3][1]]


def test_coldstart_strictest_lambdas():
    # the cutoff is strictly greater-than: at lambda=1.0 even a perfect 2.0
    # equals 1+lambda and is excluded; just below, only 2.0 survives
    totals = [round(0.1 * i, 1) for i in range(21)]
    candidates = [_candidate(t) for t in totals]
    assert coldstart_filter(candidates, RewardConfig(coldstart_lambda=1.0)) == []
    kept = coldstart_filter(candidates, RewardConfig(coldstart_lambda=0.95))
    assert len(kept) == 1
    assert total_reward(*kept[0]).total == 2.0


# --- localization parsing ---------------------------------------------------


def test_parse_localization_single_box():
    boxes = parse_localization('here: [{"label": "chair", "bbox": [1, 2, 30, 40]}]')
    assert boxes == [("chair", BBox2D(1.0, 2.0, 30.0, 40.0))]


def test_parse_localization_reversed_coords():
    boxes = parse_localization('[{"label": "chair", "bbox": [30, 40, 1, 2]}]')
    assert boxes == [("chair", BBox2D(1.0, 2.0, 30.0, 40.0))]


def test_parse_localization_skips_invalid_entries():
    raw = '[{"label": "chair", "bbox": [1,2,3,4]}, {"label": 5}, {"bbox": [1,2,3]}]'
    boxes = parse_localization(raw)
    assert len(boxes) == 1


def test_parse_localization_prose_raises():
    with pytest.raises(NoJsonFound):
        parse_localization("the chair is on the left")


def test_parse_localization_fenced_json():
    raw = 'Sure!\n```json\n[{"label": "lamp", "bbox": [5, 6, 7, 8]}]\n```\n'
    assert parse_localization(raw)[0][0] == "lamp"


# --- IoU ---------------------------------------------------------------


def test_bbox_iou_identical():
    box = BBox2D(0, 0, 10, 10)
    assert bbox_iou(box, box) == 1.0


def test_bbox_iou_disjoint():
    assert bbox_iou(BBox2D(0, 0, 1, 1), BBox2D(5, 5, 6, 6)) == 0.0


def test_bbox_iou_half_overlap_unit_squares():
    a = BBox2D(0, 0, 1, 1)
    b = BBox2D(0.5, 0, 1.5, 1)
    assert bbox_iou(a, b) == pytest.approx(0.5 / 1.5)


def test_score_answer_rejects_boxes_kind():
    with pytest.raises(ValueError):
        score_answer(parse_response("x"), "boxes", "n/a")
