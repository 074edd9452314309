"""Batch command surface: validate / synth / score / advantage / analyze.

Every command is deterministic given identical inputs and seed, writes all
outputs atomically (temp file + rename), and uses stable exit codes:
0 success, 1 validation or input error, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import traceback
from pathlib import Path

from .analysis import (
    AttentionMap,
    ResponseSampleSet,
    UnknownId,
    aggregate_benchmark,
    attention_entropy,
    attention_iou,
    semantic_entropy,
)
from .config import ConfigError, load_run_config
from .geometry import BBox2D
from .grpo import GroupTooSmall, LengthMismatch, PolicyGroup, group_advantages, grpo_objective
from .rewards import parse_response, total_reward
from .scene import InvariantError, SchemaError, parse_scene, validate_scene
from .synth import bundle_to_jsonl, sample_from_json_dict, synthesize

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTERNAL = 2


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _scene_files(scenes_arg: str) -> list[Path]:
    root = Path(scenes_arg)
    if root.is_dir():
        return sorted(root.glob("*.json"))
    if root.is_file():
        return [root]
    raise FileNotFoundError(f"no such file or directory: {scenes_arg}")


def _load_scenes(scenes_arg: str):
    files = _scene_files(scenes_arg)
    if not files:
        raise FileNotFoundError(f"no scenes found under {scenes_arg}")
    return [parse_scene(f.read_bytes()) for f in files]


def _read_jsonl(path: Path):
    """Yields (line_number, parsed_object_or_None, raw_line)."""
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line), line
            except json.JSONDecodeError:
                yield lineno, None, line


def cmd_validate(args) -> int:
    files = _scene_files(args.scenes)
    if not files:
        print(f"error: no scenes found under {args.scenes}", file=sys.stderr)
        return EXIT_INPUT
    failures = 0
    for f in files:
        try:
            scene = parse_scene(f.read_bytes())
        except (SchemaError, InvariantError) as exc:
            failures += 1
            print(f"{f}: INVALID: {exc}", file=sys.stderr)
            continue
        violations = validate_scene(scene)
        if violations:
            failures += 1
            for v in violations:
                print(f"{f}: INVALID: {v}", file=sys.stderr)
        else:
            print(f"{f}: ok ({scene.scene_id})")
    return EXIT_OK if failures == 0 else EXIT_INPUT


def cmd_synth(args) -> int:
    run = load_run_config(args.config, args.set or (), seed=args.seed)
    scenes = _load_scenes(args.scenes)
    bundle = synthesize(scenes, run.synth)
    out = Path(args.out)
    _write_atomic(out / "dataset.jsonl", bundle_to_jsonl(bundle))
    _write_atomic(out / "stats.json", _canonical(bundle.stats.to_dict()) + "\n")
    print(f"wrote {len(bundle.samples)} samples to {out / 'dataset.jsonl'}")
    return EXIT_OK


def cmd_score(args) -> int:
    run = load_run_config(args.config, args.set or ())
    samples = []
    for lineno, doc, _ in _read_jsonl(Path(args.dataset)):
        if doc is None:
            raise SchemaError(f"{args.dataset}:{lineno}: malformed dataset line")
        samples.append(sample_from_json_dict(doc))
    by_id = {s.sample_id: s for s in samples}

    responses: dict[str, str] = {}
    malformed = 0
    for lineno, doc, _ in _read_jsonl(Path(args.predictions)):
        if doc is None or not isinstance(doc, dict) or "id" not in doc or "response" not in doc:
            malformed += 1
            print(f"warning: skipping malformed prediction line {lineno}", file=sys.stderr)
            continue
        responses[str(doc["id"])] = str(doc["response"])
    unknown = sorted(set(responses) - set(by_id))
    if unknown:
        for uid in unknown:
            print(f"error: prediction id not in dataset: {uid}", file=sys.stderr)
        return EXIT_INPUT

    scored_lines = []
    accuracies: dict[str, float] = {}
    skipped_boxes = 0
    for sample in samples:
        if sample.answer.kind not in ("numeric", "choice"):
            if sample.sample_id in responses:
                skipped_boxes += 1
            continue
        if sample.sample_id not in responses:
            continue
        parsed = parse_response(responses[sample.sample_id])
        breakdown = total_reward(parsed, sample, run.reward)
        accuracies[sample.sample_id] = breakdown.accuracy
        scored_lines.append(
            _canonical(
                {
                    "id": sample.sample_id,
                    "format": breakdown.format,
                    "accuracy": breakdown.accuracy,
                    "total": breakdown.total,
                    "parsed_answer": parsed.answer_text,
                }
            )
        )
    report = aggregate_benchmark(samples, accuracies)
    if malformed:
        report.warnings.append(f"{malformed} malformed prediction line(s) skipped")
    if skipped_boxes:
        report.warnings.append(
            f"{skipped_boxes} box-answer sample(s) are outside reward scoring"
        )
    out = Path(args.out)
    _write_atomic(out / "scored.jsonl", "".join(line + "\n" for line in scored_lines))
    _write_atomic(out / "report.json", _canonical(report.to_json_dict()) + "\n")
    _write_atomic(out / "report.txt", report.to_text_table())
    print(report.to_text_table())
    return EXIT_OK


def cmd_advantage(args) -> int:
    run = load_run_config(args.config, args.set or ())
    lines = []
    for lineno, doc, _ in _read_jsonl(Path(args.groups)):
        if doc is None or not isinstance(doc, dict):
            raise SchemaError(f"{args.groups}:{lineno}: malformed group line")
        try:
            group = PolicyGroup(
                rewards=doc["rewards"],
                logp_new=doc["logp_new"],
                logp_old=doc["logp_old"],
                logp_ref=doc["logp_ref"],
            )
            advantages = group_advantages(group.rewards, run.grpo)
            objective = grpo_objective(group, advantages, run.grpo)
        except KeyError as exc:
            raise SchemaError(f"{args.groups}:{lineno}: missing field {exc}") from exc
        except (LengthMismatch, GroupTooSmall, ValueError) as exc:
            raise SchemaError(f"{args.groups}:{lineno}: {exc}") from exc
        lines.append(_canonical({"advantages": advantages, "objective": objective}))
    out = Path(args.out)
    _write_atomic(out / "advantages.jsonl", "".join(line + "\n" for line in lines))
    print(f"wrote {len(lines)} groups to {out / 'advantages.jsonl'}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    out = Path(args.out)
    lines = []
    if args.mode == "entropy":
        for lineno, doc, _ in _read_jsonl(Path(args.input)):
            if doc is None or "rewards" not in doc:
                raise SchemaError(f"{args.input}:{lineno}: malformed entropy line")
            try:
                sample_set = ResponseSampleSet(
                    question_id=str(doc.get("id", lineno)), rewards=doc["rewards"]
                )
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{args.input}:{lineno}: {exc}") from exc
            lines.append(
                _canonical(
                    {
                        "id": sample_set.question_id,
                        "semantic_entropy": semantic_entropy(sample_set),
                    }
                )
            )
        _write_atomic(out / "entropy.jsonl", "".join(line + "\n" for line in lines))
        print(f"wrote {len(lines)} rows to {out / 'entropy.jsonl'}")
        return EXIT_OK
    for lineno, doc, _ in _read_jsonl(Path(args.input)):
        if doc is None or "grid" not in doc or "weights" not in doc:
            raise SchemaError(f"{args.input}:{lineno}: malformed attention line")
        try:
            grid_w, grid_h = doc["grid"]
            amap = AttentionMap(grid_w=grid_w, grid_h=grid_h, weights=doc["weights"])
            row = {"id": str(doc.get("id", lineno)),
                   "attention_entropy": attention_entropy(amap)}
            if "box" in doc and "image" in doc:
                x1, y1, x2, y2 = doc["box"]
                image_w, image_h = doc["image"]
                row["attention_iou"] = attention_iou(
                    amap, BBox2D(x_min=x1, y_min=y1, x_max=x2, y_max=y2),
                    image_w, image_h,
                )
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{args.input}:{lineno}: {exc}") from exc
        lines.append(_canonical(row))
    _write_atomic(out / "attention.jsonl", "".join(line + "\n" for line in lines))
    print(f"wrote {len(lines)} rows to {out / 'attention.jsonl'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spatialqa",
        description="Spatial-reasoning QA synthesis, reward scoring and analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="JSON config with synth/reward/grpo sections")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="dotted-path config override (repeatable)")

    p = sub.add_parser("validate", help="validate scene documents")
    p.add_argument("--scenes", required=True, help="scene JSON file or directory")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("synth", help="generate a QA dataset from scenes")
    p.add_argument("--scenes", required=True, help="scene JSON file or directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override synth.seed")
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("score", help="score predictions against a dataset")
    p.add_argument("dataset", help="dataset JSONL from synth")
    p.add_argument("--predictions", required=True, help="JSONL of {id, response}")
    p.add_argument("--out", required=True, help="output directory")
    common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("advantage", help="group advantages and objective per JSONL group")
    p.add_argument("groups", help="JSONL of {rewards[], logp_new[], logp_old[], logp_ref[]}")
    p.add_argument("--out", required=True, help="output directory")
    common(p)
    p.set_defaults(func=cmd_advantage)

    p = sub.add_parser("analyze", help="semantic entropy or attention metrics")
    p.add_argument("input", help="metric input JSONL")
    p.add_argument("--mode", choices=("entropy", "attention"), required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, InvariantError, ConfigError, UnknownId, FileNotFoundError,
            GroupTooSmall, LengthMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
