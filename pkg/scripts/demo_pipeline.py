#!/usr/bin/env python3
"""End-to-end demo on the bundled fixture pack: validate the scenes,
synthesize a dataset, score gold answers through the reward engine, and
print the benchmark table. Everything lands under ./demo_out/."""

from __future__ import annotations

import json
import sys
from pathlib import Path

from spatialqa.cli import main

SCENES = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "scenes"
OUT = Path("demo_out")


def gold_predictions(dataset_path: Path, pred_path: Path) -> int:
    count = 0
    with dataset_path.open() as src, pred_path.open("w") as dst:
        for line in src:
            row = json.loads(line)
            answer = row["answer"]
            if answer["kind"] == "numeric":
                body = answer["value"]
            elif answer["kind"] == "choice":
                body = answer["letter"]
            else:
                continue
            response = f"<think>verified against the scene</think><answer>{body}</answer>"
            dst.write(json.dumps({"id": row["id"], "response": response}) + "\n")
            count += 1
    return count


def run(argv) -> None:
    code = main(argv)
    if code != 0:
        sys.exit(code)


if __name__ == "__main__":
    run(["validate", "--scenes", str(SCENES)])
    run(["synth", "--scenes", str(SCENES), "--out", str(OUT), "--seed", "42"])
    n = gold_predictions(OUT / "dataset.jsonl", OUT / "gold_predictions.jsonl")
    print(f"prepared {n} gold predictions")
    run([
        "score", str(OUT / "dataset.jsonl"),
        "--predictions", str(OUT / "gold_predictions.jsonl"),
        "--out", str(OUT / "scored"),
    ])
    stats = json.loads((OUT / "stats.json").read_text())
    print(f"generation stats: kept {stats['kept']} of {stats['generated']} candidates")
