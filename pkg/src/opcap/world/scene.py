"""A small gridded household world with exact scene-graph ground truth.

The grid is split into four fixed zones (table, shelf, sink, rack). Every
object sits in a cell or in the agent's hand; its state flags and location
translate one-to-one into scene-graph triplets, so generated labels are
consistent by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from opcap.data.types import SceneGraphTriplet


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ClassTraits:
    color: tuple[int, int, int]
    openable: bool = False
    washable: bool = False
    hangable: bool = False


# Closed household object set; colors are the render palette.
CLASS_TRAITS: dict[str, ClassTraits] = {
    "fork": ClassTraits((200, 200, 210), washable=True),
    "knife": ClassTraits((160, 160, 175), washable=True),
    "spoon": ClassTraits((230, 225, 190), washable=True),
    "cup": ClassTraits((220, 60, 60), washable=True),
    "plate": ClassTraits((240, 240, 240), washable=True),
    "bowl": ClassTraits((70, 130, 220), washable=True),
    "pan": ClassTraits((40, 40, 40), washable=True),
    "towel": ClassTraits((250, 210, 80), washable=True, hangable=True),
    "shirt": ClassTraits((90, 200, 120), washable=True, hangable=True),
    "sock": ClassTraits((250, 120, 190), washable=True, hangable=True),
    "book": ClassTraits((140, 90, 40), openable=True),
    "bottle": ClassTraits((60, 200, 200)),
    "basket": ClassTraits((190, 150, 90)),
    "lid": ClassTraits((120, 120, 255), openable=True),
    "box": ClassTraits((170, 110, 200), openable=True),
    "jar": ClassTraits((120, 220, 60), openable=True),
}

OBJECT_CLASSES = tuple(CLASS_TRAITS)

ZONES = ("table", "shelf", "sink", "rack")

AGENT = "person"


def zone_of(cell: tuple[int, int], grid_size: int) -> str:
    """Quadrant zone of a (row, col) cell: table/shelf on top, sink/rack below."""
    r, c = cell
    half = grid_size // 2
    if r < half:
        return "table" if c < half else "shelf"
    return "sink" if c < half else "rack"


def zone_cells(zone: str, grid_size: int) -> list[tuple[int, int]]:
    return [(r, c) for r in range(grid_size) for c in range(grid_size) if zone_of((r, c), grid_size) == zone]


@dataclass
class SceneObject:
    cls: str
    color: tuple[int, int, int]
    cell: Optional[tuple[int, int]]  # None while held by the agent
    is_open: Optional[bool] = None  # openable classes only
    dirty: Optional[bool] = None  # washable classes only
    hung: bool = False


@dataclass
class Scene:
    grid_size: int
    objects: list[SceneObject]
    agent_cell: tuple[int, int]
    held: Optional[int] = None  # index into objects, at most one

    def __post_init__(self):
        occupied = [o.cell for o in self.objects if o.cell is not None] + [self.agent_cell]
        if len(set(occupied)) != len(occupied):
            raise ValueError("cell collision: at most one occupant per cell")
        held_count = sum(1 for o in self.objects if o.cell is None)
        if held_count > 1 or (held_count == 1) != (self.held is not None):
            raise ValueError("exactly the held object may have no cell")

    def copy(self) -> "Scene":
        return Scene(
            grid_size=self.grid_size,
            objects=[replace(o) for o in self.objects],
            agent_cell=self.agent_cell,
            held=self.held,
        )

    def object_by_class(self, cls: str) -> SceneObject:
        for o in self.objects:
            if o.cls == cls:
                return o
        raise KeyError(f"no {cls!r} in scene")

    def free_cells(self, zone: Optional[str] = None) -> list[tuple[int, int]]:
        occupied = {o.cell for o in self.objects if o.cell is not None} | {self.agent_cell}
        cells = zone_cells(zone, self.grid_size) if zone else [
            (r, c) for r in range(self.grid_size) for c in range(self.grid_size)
        ]
        return [c for c in cells if c not in occupied]


def scene_triplets(scene: Scene) -> frozenset[SceneGraphTriplet]:
    """The exact scene graph of a scene (the single source of label truth)."""
    out = {SceneGraphTriplet(AGENT, "in_front_of", zone_of(scene.agent_cell, scene.grid_size))}
    for o in scene.objects:
        if o.cell is None:
            out.add(SceneGraphTriplet(AGENT, "holding", o.cls))
        elif o.hung:
            out.add(SceneGraphTriplet(o.cls, "hanging_on", "rack"))
        else:
            out.add(SceneGraphTriplet(o.cls, "on", zone_of(o.cell, scene.grid_size)))
        if o.is_open is not None:
            out.add(SceneGraphTriplet(o.cls, "is", "open" if o.is_open else "closed"))
        if o.dirty is not None:
            out.add(SceneGraphTriplet(o.cls, "is", "dirty" if o.dirty else "clean"))
    return frozenset(out)


def generate_scene(seed: int, config) -> Scene:
    """Deterministically sample a scene. `config` needs grid_size, min_objects,
    max_objects, classes, allow_held."""
    grid = config.grid_size
    capacity = grid * grid - 1  # one cell reserved for the agent
    if config.max_objects > capacity or config.max_objects > len(config.classes):
        raise ConfigError(
            f"max_objects={config.max_objects} exceeds grid capacity {capacity} "
            f"or class count {len(config.classes)}"
        )
    if config.min_objects < 0 or config.min_objects > config.max_objects:
        raise ConfigError("need 0 <= min_objects <= max_objects")
    for cls in config.classes:
        if cls not in CLASS_TRAITS:
            raise ConfigError(f"unknown object class {cls!r}")

    rng = np.random.default_rng(seed)
    n = int(rng.integers(config.min_objects, config.max_objects + 1))
    # one object per class per scene keeps captions and triplets unambiguous
    classes = [config.classes[i] for i in rng.choice(len(config.classes), size=n, replace=False)]
    all_cells = [(r, c) for r in range(grid) for c in range(grid)]
    picked = rng.choice(len(all_cells), size=n + 1, replace=False)
    cells = [all_cells[i] for i in picked]
    agent_cell = cells[0]

    objects = []
    for cls, cell in zip(classes, cells[1:]):
        traits = CLASS_TRAITS[cls]
        obj = SceneObject(
            cls=cls,
            color=traits.color,
            cell=cell,
            is_open=bool(rng.integers(2)) if traits.openable else None,
            dirty=bool(rng.integers(2)) if traits.washable else None,
            hung=traits.hangable and zone_of(cell, grid) == "rack" and bool(rng.integers(2)),
        )
        objects.append(obj)

    held = None
    if config.allow_held and objects and rng.random() < 0.5:
        held = int(rng.integers(len(objects)))
        objects[held].cell = None
        objects[held].hung = False
    return Scene(grid_size=grid, objects=objects, agent_cell=agent_cell, held=held)
