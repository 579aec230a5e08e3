"""End-to-end synthetic dataset generation with a checksum manifest."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from opcap.data.records import write_records
from opcap.data.types import StatePairSample
from opcap.world.actions import apply_action, sample_action
from opcap.world.captions import caption_action, pos_lexicon_entries
from opcap.world.render import render, save_image
from opcap.world.scene import OBJECT_CLASSES, ConfigError, generate_scene, scene_triplets

VIEWPOINT_CHOICES = ("first_person", "third_person")


@dataclass
class GeneratorConfig:
    count: int = 1000
    seed: int = 0
    grid_size: int = 8
    resolution: int = 64
    min_objects: int = 4
    max_objects: int = 8
    classes: tuple[str, ...] = OBJECT_CLASSES
    allow_held: bool = True
    split_ratios: tuple[float, float, float] = (0.85, 0.05, 0.10)

    def __post_init__(self):
        self.classes = tuple(self.classes)
        self.split_ratios = tuple(self.split_ratios)
        if self.count < 1:
            raise ConfigError("count must be >= 1")
        if len(self.split_ratios) != 3 or abs(sum(self.split_ratios) - 1.0) > 1e-9:
            raise ConfigError("split_ratios must be three values summing to 1")
        if self.resolution % self.grid_size != 0:
            raise ConfigError("resolution must be a multiple of grid_size")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown generator config keys: {sorted(unknown)}")
        return cls(**d)


def split_sizes(count: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    """Train/dev sizes floor to the ratio; the remainder is the test split."""
    n_train = int(count * ratios[0])
    n_dev = int(count * ratios[1])
    return n_train, n_dev, count - n_train - n_dev


def _generate_sample(cfg: GeneratorConfig, index: int, images_dir: Path) -> StatePairSample:
    # per-sample seed mixes (global seed, index) so parallel and serial agree
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, index)))
    scene_seed = int(rng.integers(2**31))
    scene_a = generate_scene(scene_seed, cfg)
    action = sample_action(scene_a, rng)
    scene_b = apply_action(scene_a, action)
    caption = caption_action(action, seed=int(rng.integers(2**31)))
    sample_id = f"s{index:06d}"
    ref_a, ref_b = f"images/{sample_id}_a.png", f"images/{sample_id}_b.png"
    save_image(render(scene_a, cfg.resolution), images_dir.parent / ref_a)
    save_image(render(scene_b, cfg.resolution), images_dir.parent / ref_b)
    return StatePairSample(
        id=sample_id,
        image_a=ref_a,
        image_b=ref_b,
        viewpoint=VIEWPOINT_CHOICES[int(rng.integers(2))],
        object_hint=action.target,
        caption=caption,
        graphs_a=scene_triplets(scene_a),
        graphs_b=scene_triplets(scene_b),
    )


def generate_dataset(cfg: GeneratorConfig, out_dir) -> Path:
    """Write records, images, gold lexicon, config echo, and manifest.

    Returns the manifest path. Fully reproducible from (cfg, cfg.seed).
    """
    root = Path(out_dir)
    images_dir = root / "images"
    images_dir.mkdir(parents=True, exist_ok=True)

    samples = [_generate_sample(cfg, i, images_dir) for i in range(cfg.count)]

    n_train, n_dev, _ = split_sizes(cfg.count, cfg.split_ratios)
    write_records(root, "train", samples[:n_train])
    write_records(root, "dev", samples[n_train : n_train + n_dev])
    write_records(root, "test", samples[n_train + n_dev :])

    lex_lines = [f"{tok}\t{pos}" for tok, pos in sorted(pos_lexicon_entries().items())]
    (root / "lexicon.tsv").write_text("\n".join(lex_lines) + "\n", encoding="utf-8")
    (root / "generator_config.json").write_text(cfg.to_json() + "\n", encoding="utf-8")

    return write_manifest(root)


def write_manifest(root: Path) -> Path:
    """sha256 per file plus a total line over all content hashes."""
    root = Path(root)
    entries = []
    for p in sorted(root.rglob("*")):
        if p.is_file() and p.name != "manifest.txt":
            digest = hashlib.sha256(p.read_bytes()).hexdigest()
            entries.append(f"{digest}  {p.relative_to(root).as_posix()}")
    total = hashlib.sha256("\n".join(entries).encode("utf-8")).hexdigest()
    manifest = root / "manifest.txt"
    manifest.write_text("\n".join(entries) + f"\ntotal {total}\n", encoding="utf-8")
    return manifest
