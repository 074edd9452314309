import json
from pathlib import Path

import pytest

from spatialqa.scene import parse_scene

FIXTURE_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def scene_pack_dir() -> Path:
    return FIXTURE_DIR / "scenes"


@pytest.fixture(scope="session")
def adversarial_pack_dir() -> Path:
    return FIXTURE_DIR / "adversarial"


@pytest.fixture(scope="session")
def scene_pack(scene_pack_dir):
    return [parse_scene(p.read_bytes()) for p in sorted(scene_pack_dir.glob("*.json"))]


@pytest.fixture(scope="session")
def adversarial_pack(adversarial_pack_dir):
    return [
        parse_scene(p.read_bytes()) for p in sorted(adversarial_pack_dir.glob("*.json"))
    ]


@pytest.fixture()
def minimal_scene_doc() -> dict:
    return {
        "scene_id": "minimal",
        "objects": [
            {
                "id": "obj-1",
                "category": "chair",
                "centroid": [0.0, 0.0, 0.5],
                "aabb_min": [-0.25, -0.25, 0.0],
                "aabb_max": [0.25, 0.25, 1.0],
            }
        ],
        "views": [
            {
                "id": "v0",
                "frame_index": 0,
                "rotation": [1, 0, 0, 0, 1, 0, 0, 0, 1],
                "translation": [0.0, 0.0, 3.0],
                "fx": 100.0,
                "fy": 100.0,
                "cx": 50.0,
                "cy": 50.0,
                "width": 100.0,
                "height": 100.0,
            }
        ],
    }


def dump(doc) -> bytes:
    return json.dumps(doc).encode("utf-8")
