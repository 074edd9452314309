"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with `pytest -s tests/test_acceptance.py` to see the per-criterion
report. Every tolerance is pinned here; nothing is deferred to later
calibration.
"""

import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from oracles import brute_force_box_distance, loop_numerical_reward, sweep_quadrant
from spatialqa.fixtures import random_scene
from spatialqa.geometry import closest_point_distance, relative_direction_multiview
from spatialqa.grpo import group_advantages, toy_policy_check
from spatialqa.analysis import ResponseSampleSet, semantic_entropy
from spatialqa.rewards import RewardConfig, coldstart_filter, numerical_reward, parse_response, total_reward
from spatialqa.rng import SeededRng
from spatialqa.scene import Object3D, Vec3
from spatialqa.synth import Answer, LETTERS, Modality, QASample, SynthConfig, TaskFamily, synthesize


def report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[acceptance] {name}: {'PASS' if ok else 'FAIL'}"
          + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def _box(lo, hi, object_id="o"):
    c = [(a + b) / 2.0 for a, b in zip(lo, hi)]
    return Object3D(object_id, "box", Vec3(*c), Vec3(*lo), Vec3(*hi))


# --- numerical reward oracle -------------------------------------------------


def test_numerical_reward_oracle():
    cfg = RewardConfig()
    rng = SeededRng(2024)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        gold = rng.uniform(-100.0, 100.0)
        if rng.random() < 0.02:
            gold = 0.0
        pred = gold * (1.0 + rng.uniform(-1.5, 1.5)) if rng.random() < 0.8 else rng.uniform(-200.0, 200.0)
        if numerical_reward(pred, gold, cfg) != loop_numerical_reward(pred, gold, cfg.thresholds):
            mismatches += 1
    elapsed = time.perf_counter() - start
    spot_ok = (
        numerical_reward(4.0, 10.0, cfg) == pytest.approx(0.7)
        and numerical_reward(20.0, 10.0, cfg) == 0.0
    )
    report(
        "numerical-reward-oracle",
        mismatches == 0 and spot_ok and elapsed < 1.0,
        f"mismatches={mismatches}, spot_ok={spot_ok}, elapsed={elapsed:.3f}s",
    )


def test_reward_granularity():
    cfg = RewardConfig()
    rng = SeededRng(77)
    allowed = {i / 10.0 for i in range(11)}
    bad = 0
    for _ in range(1000):
        gold = rng.uniform(-50.0, 50.0) or 1.0
        pred = gold * (1.0 + rng.uniform(-2.0, 2.0))
        if numerical_reward(pred, gold, cfg) not in allowed:
            bad += 1
    report("reward-granularity", bad == 0, f"off-grid values={bad}")


# --- cold start ----------------------------------------------------------------


def _total_candidate(total: float):
    fmt = 1 if total >= 1.0 else 0
    accuracy = round(total - fmt, 1)
    gold = 10.0
    if accuracy == 1.0:
        pred = gold
    elif accuracy == 0.0:
        pred = 3 * gold
    else:
        hits = round(accuracy * 10)
        pred = gold * (2.0 - 0.05 * hits - 0.025)
    raw = f"<think>x</think><answer>{pred}</answer>" if fmt else f"answer {pred}"
    sample = QASample(
        sample_id=f"t{total:.1f}", task=TaskFamily.ABSOLUTE_DISTANCE,
        modality=Modality.VIDEO, scene_id="sc", view_ids=("v",), question="q",
        options=None, answer=Answer.numeric(gold, "m"), provenance={},
    )
    return parse_response(raw), sample


def test_coldstart_strictness():
    totals = [round(0.1 * i, 1) for i in range(21)]
    candidates = [_total_candidate(t) for t in totals]
    # construction sanity: each candidate hits its target total exactly
    for target, cand in zip(totals, candidates):
        assert total_reward(*cand).total == pytest.approx(target, abs=1e-12)
    failures = []
    for lam in [round(0.1 * i, 1) for i in range(11)]:
        cfg = RewardConfig(coldstart_lambda=lam)
        kept = coldstart_filter(candidates, cfg)
        kept_totals = [round(total_reward(*c, cfg).total, 1) for c in kept]
        expected = [t for t in totals if t > round(1.0 + lam, 1) + 1e-12]
        if kept_totals != expected:
            failures.append((lam, kept_totals, expected))
        if round(1.0 + lam, 1) in kept_totals:
            failures.append((lam, "boundary kept"))
    # order stability under shuffled input
    rng = SeededRng(5)
    shuffled = list(candidates)
    rng.shuffle(shuffled)
    kept = coldstart_filter(shuffled, RewardConfig())
    kept_ids = [c[1].sample_id for c in kept]
    expected_ids = [c[1].sample_id for c in shuffled
                    if total_reward(*c).total > 1.5]
    order_ok = kept_ids == expected_ids
    report("coldstart-strictness", not failures and order_ok,
           f"failures={failures[:3]}, order_ok={order_ok}")


# --- GRPO ----------------------------------------------------------------------


def test_grpo_gradient_check():
    start = time.perf_counter()
    worst = 0.0
    failed_seeds = []
    for seed in range(50):
        k = 2 + seed % 5
        result = toy_policy_check(num_actions=k, seed=seed)
        worst = max(worst, result.max_rel_err, result.reinforce_max_err)
        if not result.passed:
            failed_seeds.append(seed)
    elapsed = time.perf_counter() - start
    report(
        "grpo-gradient-check",
        not failed_seeds and worst < 1e-4 and elapsed < 10.0,
        f"failed_seeds={failed_seeds}, worst_rel_err={worst:.2e}, elapsed={elapsed:.2f}s",
    )


def test_advantage_normalization():
    rng = np.random.default_rng(99)
    bad = 0
    degenerate_bad = 0
    for i in range(10_000):
        n = int(rng.integers(2, 17))
        if i % 10 == 0:
            rewards = [float(rng.uniform(0, 1))] * n  # degenerate group
        else:
            rewards = [float(v) for v in rng.uniform(0, 1, n)]
        adv = group_advantages(rewards)
        std = math.sqrt(sum((r - sum(rewards) / n) ** 2 for r in rewards) / n)
        if std <= 1e-8:
            if adv != [0.0] * n:
                degenerate_bad += 1
            continue
        mean_a = sum(adv) / n
        std_a = math.sqrt(sum(a * a for a in adv) / n)
        if abs(mean_a) >= 1e-9 or abs(std_a - 1.0) >= 1e-9:
            bad += 1
    report("advantage-normalization", bad == 0 and degenerate_bad == 0,
           f"bad={bad}, degenerate_bad={degenerate_bad}")


# --- geometry oracle equivalence ----------------------------------------------


def test_geometry_oracle_equivalence():
    rng = SeededRng(4242)
    worst_gap = 0.0
    label_mismatches = 0
    compared_labels = 0
    for _ in range(500):
        lo_a = [rng.uniform(-5, 5) for _ in range(3)]
        lo_b = [rng.uniform(-5, 5) for _ in range(3)]
        ext_a = [rng.uniform(0.05, 3.0) for _ in range(3)]
        ext_b = [rng.uniform(0.05, 3.0) for _ in range(3)]
        hi_a = [l + e for l, e in zip(lo_a, ext_a)]
        hi_b = [l + e for l, e in zip(lo_b, ext_b)]
        implementation = closest_point_distance(_box(lo_a, hi_a, "a"), _box(lo_b, hi_b, "b"))
        oracle = brute_force_box_distance(lo_a, hi_a, lo_b, hi_b, rounds=10)
        worst_gap = max(worst_gap, abs(implementation - oracle))

        # quadrant triple with non-degenerate planar vectors
        while True:
            va = (rng.uniform(-4, 4), rng.uniform(-4, 4))
            vb = (rng.uniform(-4, 4), rng.uniform(-4, 4))
            if math.hypot(*va) > 0.1 and math.hypot(*vb) > 0.1:
                break
        positioning = _box((-0.1, -0.1, 0.0), (0.1, 0.1, 0.2), "p")
        orienting = _box((va[0] - 0.1, va[1] - 0.1, 0.0), (va[0] + 0.1, va[1] + 0.1, 0.2), "o")
        querying = _box((vb[0] - 0.1, vb[1] - 0.1, 0.0), (vb[0] + 0.1, vb[1] + 0.1, 0.2), "q")
        oracle_label, axis_distance = sweep_quadrant(va, vb)
        result = relative_direction_multiview(positioning, orienting, querying, 10.0)
        if axis_distance > 10.05:
            compared_labels += 1
            if result is None or result[0] != oracle_label:
                label_mismatches += 1
        elif axis_distance < 9.95 and result is not None:
            label_mismatches += 1
    report(
        "geometry-oracle-equivalence",
        worst_gap < 1e-3 and label_mismatches == 0 and compared_labels > 100,
        f"worst_distance_gap={worst_gap:.2e}, label_mismatches={label_mismatches}, "
        f"labels_compared={compared_labels}",
    )


# --- synthesis ------------------------------------------------------------------


SCENES_DIR = Path(__file__).parent / "fixtures" / "scenes"


def test_synthesis_determinism(tmp_path):
    outputs = []
    for run_dir in ("r1", "r2"):
        out = tmp_path / run_dir
        proc = subprocess.run(
            [sys.executable, "-m", "spatialqa", "synth", "--scenes", str(SCENES_DIR),
             "--out", str(out), "--seed", "42"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append(((out / "dataset.jsonl").read_bytes(), (out / "stats.json").read_bytes()))
    same = outputs[0] == outputs[1]
    report("synthesis-determinism", same and len(outputs[0][0]) > 0,
           f"identical={same}")


def _recheck(sample_doc: dict, cfg: SynthConfig) -> list[str]:
    """Independent re-derivation of every active filter from provenance."""
    problems = []
    task = sample_doc["task"]
    prov = sample_doc["provenance"]
    answer = sample_doc["answer"]
    for oid, vis in prov.get("visibility", {}).items():
        if vis < cfg.min_visibility:
            problems.append(f"{sample_doc['id']}: visibility {vis} below threshold for {oid}")
    if task == "absolute_distance":
        if prov["distance_m"] <= prov["min_size_m"]:
            problems.append(f"{sample_doc['id']}: min-size rule violated")
        if answer["value"] != round(prov["distance_m"], 1):
            problems.append(f"{sample_doc['id']}: answer not the rounded distance")
    elif task == "object_size":
        if not (cfg.size_range_cm[0] <= prov["size_cm"] <= cfg.size_range_cm[1]):
            problems.append(f"{sample_doc['id']}: size out of range")
        if answer["value"] != float(round(prov["size_cm"])):
            problems.append(f"{sample_doc['id']}: answer not rounded size")
    elif task == "relative_distance":
        distances = prov["distances_m"]
        values = sorted(distances.values())
        ratio = float("inf") if values[0] == 0 else values[1] / values[0]
        if not (ratio >= cfg.rel_dist_ratio or prov["ratio"] >= cfg.rel_dist_ratio):
            problems.append(f"{sample_doc['id']}: ratio rule violated ({ratio})")
        closer = min(distances, key=distances.get)
        letter = answer["letter"]
        options = [o["text"] for o in sample_doc["options"]]
        if options[LETTERS.index(letter)] != closer:
            problems.append(f"{sample_doc['id']}: answer letter is not the closer candidate")
    elif task == "relative_direction":
        if "theta_deg" in prov:
            theta = prov["theta_deg"]
            axis_distance = min(theta, 180.0 - theta, abs(theta - 90.0))
            if axis_distance < prov["axis_margin_deg"]:
                problems.append(f"{sample_doc['id']}: quadrant within axis margin")
        else:
            du, dz = prov["delta_u"], prov["delta_z"]
            if abs(du) < prov["eps_x"] and abs(dz) < prov["eps_z"]:
                problems.append(f"{sample_doc['id']}: direction inside both margins")
            label = prov["label"]
            if "left" in label and not du <= -prov["eps_x"]:
                problems.append(f"{sample_doc['id']}: left label without margin")
            if "right" in label and not du >= prov["eps_x"]:
                problems.append(f"{sample_doc['id']}: right label without margin")
    elif task == "appearance_order":
        frames = sorted(prov["first_frames"].values())
        if any(b - a < 5 for a, b in zip(frames, frames[1:])):
            problems.append(f"{sample_doc['id']}: appearance gaps under 5 frames")
    return problems


def test_filter_soundness(tmp_path):
    cfg = SynthConfig(seed=42)
    from spatialqa.scene import parse_scene
    fixture_scenes_list = [
        parse_scene(p.read_bytes()) for p in sorted(SCENES_DIR.glob("*.json"))
    ]
    problems = []
    bundle = synthesize(fixture_scenes_list, cfg)
    from spatialqa.synth import sample_to_json_dict
    for sample in bundle.samples:
        problems += _recheck(sample_to_json_dict(sample), cfg)

    rng = SeededRng(31337)
    scenes = [random_scene(rng, f"fuzz-{i:03d}") for i in range(100)]
    for chunk_start in range(0, 100, 10):
        chunk = scenes[chunk_start:chunk_start + 10]
        bundle = synthesize(chunk, cfg)
        for sample in bundle.samples:
            problems += _recheck(sample_to_json_dict(sample), cfg)
    report("filter-soundness", not problems,
           f"violations={len(problems)}; first={problems[:3]}")


# --- semantic entropy ------------------------------------------------------------


def test_semantic_entropy_criterion():
    e1 = semantic_entropy(ResponseSampleSet("a", [0.3] * 8))
    e2 = semantic_entropy(ResponseSampleSet("b", [1.0] * 4 + [0.0] * 4))
    e3 = semantic_entropy(ResponseSampleSet("c", [0.5] * 4 + [0.1] * 2 + [0.9] * 2))
    examples_ok = (
        abs(e1 - 0.0) < 1e-6
        and abs(e2 - math.log(2.0)) < 1e-6
        and abs(e3 - (0.5 * math.log(2.0) + 0.5 * math.log(4.0))) < 1e-6
        and abs(e3 - 1.0397) < 1e-4
    )
    rng = SeededRng(808)
    range_bad = 0
    for _ in range(10_000):
        n = 1 + rng.randrange(16)
        rewards = [rng.randrange(11) / 10.0 for _ in range(n)]
        value = semantic_entropy(ResponseSampleSet("q", rewards))
        if not (0.0 <= value <= math.log(n) + 1e-12):
            range_bad += 1
    report("semantic-entropy", examples_ok and range_bad == 0,
           f"examples_ok={examples_ok}, out_of_range={range_bad}")


# --- benchmark aggregation ---------------------------------------------------------


def test_benchmark_aggregation(tmp_path):
    synth_out = tmp_path / "ds"
    proc = subprocess.run(
        [sys.executable, "-m", "spatialqa", "synth", "--scenes", str(SCENES_DIR),
         "--out", str(synth_out), "--seed", "42"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    rows = [json.loads(line) for line in (synth_out / "dataset.jsonl").read_text().splitlines()]

    gold_preds, nq_preds = [], []
    for row in rows:
        answer = row["answer"]
        if answer["kind"] == "numeric":
            gold_preds.append({"id": row["id"],
                               "response": f"<think>.</think><answer>{answer['value']}</answer>"})
            nq_preds.append({"id": row["id"],
                             "response": f"<think>.</think><answer>{answer['value'] * 1.6}</answer>"})
        elif answer["kind"] == "choice":
            gold_preds.append({"id": row["id"],
                               "response": f"<think>.</think><answer>{answer['letter']}</answer>"})

    def run_score(preds, out_name):
        pred_path = tmp_path / f"{out_name}.jsonl"
        pred_path.write_text("".join(json.dumps(p) + "\n" for p in preds))
        out = tmp_path / out_name
        proc = subprocess.run(
            [sys.executable, "-m", "spatialqa", "score", str(synth_out / "dataset.jsonl"),
             "--predictions", str(pred_path), "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        return json.loads((out / "report.json").read_text())

    gold_report = run_score(gold_preds, "gold")
    gold_ok = (
        gold_report["overall"] == 1.0
        and gold_report["nq"] == 1.0
        and gold_report["mcq"] == 1.0
        and all(v == 1.0 for v in gold_report["per_task"].values())
        and all(v == 1.0 for v in gold_report["per_modality"].values())
    )
    nq_report = run_score(nq_preds, "nq06")
    nq_ok = abs(nq_report["nq"] - 0.700) < 1e-9
    report("benchmark-aggregation", gold_ok and nq_ok,
           f"gold_ok={gold_ok}, nq={nq_report['nq']}")
