#!/usr/bin/env python3
"""Regenerate the bundled scene fixture packs under tests/fixtures/.

The checked-in files are the source of truth for the determinism tests;
rerun this only when the builders in spatialqa.fixtures change, and commit
the result.
"""

from __future__ import annotations

import json
from pathlib import Path

from spatialqa.fixtures import adversarial_scenes, fixture_scenes
from spatialqa.scene import scene_to_dict

ROOT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def write_pack(scenes, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for scene in scenes:
        path = directory / f"{scene.scene_id}.json"
        path.write_text(
            json.dumps(scene_to_dict(scene), sort_keys=True, ensure_ascii=False, indent=2)
            + "\n",
            encoding="utf-8",
        )
        print(f"wrote {path}")


def main() -> None:
    write_pack(fixture_scenes(), ROOT / "scenes")
    write_pack(adversarial_scenes(), ROOT / "adversarial")


if __name__ == "__main__":
    main()
