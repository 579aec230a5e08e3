"""On-disk dataset format: one JSON record per line, one file per split.

A dataset directory holds {train,dev,test}.jsonl plus an images/ tree; image
references inside records are paths relative to the dataset root.
"""

from __future__ import annotations

import json
from pathlib import Path

from opcap.data.types import VIEWPOINTS, SceneGraphTriplet, StatePairSample
from opcap.data.vocab import normalize_caption

SPLITS = ("train", "dev", "test")

_REQUIRED_FIELDS = ("id", "image_a", "image_b", "viewpoint", "object_hint", "caption", "graphs_a", "graphs_b")


class DatasetError(Exception):
    pass


def sample_to_json(sample: StatePairSample) -> str:
    """Canonical single-line JSON for a record (stable key and triplet order)."""
    d = {
        "id": sample.id,
        "image_a": sample.image_a,
        "image_b": sample.image_b,
        "viewpoint": sample.viewpoint,
        "object_hint": sample.object_hint,
        "caption": sample.caption,
        "graphs_a": [list(t) for t in sorted(sample.graphs_a)],
        "graphs_b": [list(t) for t in sorted(sample.graphs_b)],
    }
    return json.dumps(d, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _parse_graph(raw, line_no: int, name: str) -> frozenset[SceneGraphTriplet]:
    if not isinstance(raw, list):
        raise DatasetError(f"line {line_no}: field {name!r} must be a list of [s, r, o] triplets")
    triplets = []
    for item in raw:
        if not (isinstance(item, list) and len(item) == 3 and all(isinstance(x, str) for x in item)):
            raise DatasetError(f"line {line_no}: malformed triplet {item!r} in {name!r}")
        triplets.append(SceneGraphTriplet(*item))
    return frozenset(triplets)


def _parse_record(line: str, line_no: int, root: Path, check_images: bool) -> StatePairSample:
    try:
        d = json.loads(line)
    except json.JSONDecodeError as e:
        raise DatasetError(f"line {line_no}: invalid JSON ({e.msg})") from e
    if not isinstance(d, dict):
        raise DatasetError(f"line {line_no}: record is not an object")
    for f in _REQUIRED_FIELDS:
        if f not in d:
            raise DatasetError(f"line {line_no}: missing field {f!r}")
    if d["viewpoint"] not in VIEWPOINTS:
        raise DatasetError(f"line {line_no}: viewpoint must be one of {VIEWPOINTS}")
    if not normalize_caption(d["caption"]):
        raise DatasetError(f"line {line_no}: caption empty after tokenization")
    sample = StatePairSample(
        id=str(d["id"]),
        image_a=str(d["image_a"]),
        image_b=str(d["image_b"]),
        viewpoint=d["viewpoint"],
        object_hint=str(d["object_hint"]),
        caption=str(d["caption"]),
        graphs_a=_parse_graph(d["graphs_a"], line_no, "graphs_a"),
        graphs_b=_parse_graph(d["graphs_b"], line_no, "graphs_b"),
    )
    if check_images:
        for ref in (sample.image_a, sample.image_b):
            if not (root / ref).is_file():
                raise DatasetError(f"record {sample.id!r}: dangling image reference {ref!r}")
    return sample


def load_dataset(path, split: str, check_images: bool = True) -> list[StatePairSample]:
    """Load all records of one split from a dataset directory."""
    if split not in SPLITS:
        raise DatasetError(f"unknown split {split!r}, expected one of {SPLITS}")
    root = Path(path)
    if not root.is_dir():
        raise DatasetError(f"dataset directory not found: {root}")
    record_file = root / f"{split}.jsonl"
    if not record_file.is_file():
        raise DatasetError(f"missing split file: {record_file}")
    samples = []
    with record_file.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            samples.append(_parse_record(line, line_no, root, check_images))
    return samples


def write_records(path, split: str, samples: list[StatePairSample]) -> Path:
    if split not in SPLITS:
        raise DatasetError(f"unknown split {split!r}, expected one of {SPLITS}")
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    record_file = root / f"{split}.jsonl"
    with record_file.open("w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(sample_to_json(s) + "\n")
    return record_file
