"""Verbs, their preconditions, and their exact effect on scene and graph.

`apply_action` mutates nothing: it returns a new scene. All placement choices
are deterministic (first free cell in row-major order), so a (scene, action)
pair fully determines the target state. `rule_table_changes` states the
induced scene-graph delta independently of the scene-mutation code and is the
ground truth the generated labels are checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from opcap.data.types import SceneGraphTriplet
from opcap.world.scene import AGENT, CLASS_TRAITS, ZONES, Scene, zone_of

VERBS = ("take", "put", "open", "close", "move", "wash", "hang", "remove")


class ActionError(Exception):
    """Raised when an action's precondition does not hold; names the violation."""


@dataclass(frozen=True)
class ActionSpec:
    verb: str
    target: str  # object class
    source: Optional[str] = None  # zone the object starts in, when relevant
    destination: Optional[str] = None  # zone the object ends in, when relevant


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ActionError(message)


def _walk(scene: Scene, zone: str) -> None:
    # agent steps to the first free cell of the action's zone; stays if the
    # zone is full or it is already there
    if zone_of(scene.agent_cell, scene.grid_size) == zone:
        return
    free = scene.free_cells(zone)
    if free:
        scene.agent_cell = free[0]


def _action_zone(scene: Scene, action: ActionSpec) -> str:
    obj = scene.object_by_class(action.target)
    if action.verb == "take":
        return zone_of(obj.cell, scene.grid_size)
    if action.verb in ("put", "move", "remove"):
        return action.destination
    if action.verb == "wash":
        return "sink"
    if action.verb == "hang":
        return "rack"
    return zone_of(obj.cell, scene.grid_size)  # open/close


def _check_preconditions(scene: Scene, action: ActionSpec) -> None:
    _require(action.verb in VERBS, f"unknown verb {action.verb!r}")
    try:
        obj = scene.object_by_class(action.target)
    except KeyError:
        raise ActionError(f"{action.verb}: no {action.target!r} in the scene") from None
    traits = CLASS_TRAITS[obj.cls]
    verb = action.verb
    held = scene.held is not None and scene.objects[scene.held] is obj

    if action.source is not None:
        _require(
            obj.cell is not None and zone_of(obj.cell, scene.grid_size) == action.source,
            f"{verb}: {obj.cls} is not in the {action.source}",
        )
    if verb == "take":
        _require(scene.held is None, "take: the agent's hand is not empty")
        _require(obj.cell is not None, f"take: {obj.cls} is already held")
        _require(not obj.hung, f"take: {obj.cls} is hanging (use remove)")
    elif verb == "put":
        _require(held, f"put: the agent is not holding the {obj.cls}")
        _require(action.destination in ZONES, f"put: bad destination {action.destination!r}")
        _require(bool(scene.free_cells(action.destination)), f"put: no free cell in the {action.destination}")
    elif verb == "open":
        _require(traits.openable, f"open: a {obj.cls} cannot be opened")
        _require(not held, f"open: {obj.cls} is in the agent's hand")
        _require(obj.is_open is False, f"open: the {obj.cls} is already open")
    elif verb == "close":
        _require(traits.openable, f"close: a {obj.cls} cannot be closed")
        _require(not held, f"close: {obj.cls} is in the agent's hand")
        _require(obj.is_open is True, f"close: the {obj.cls} is already closed")
    elif verb == "move":
        _require(scene.held is None, "move: the agent's hand is not empty")
        _require(obj.cell is not None and not obj.hung, f"move: {obj.cls} is not placed")
        _require(action.destination in ZONES, f"move: bad destination {action.destination!r}")
        _require(
            zone_of(obj.cell, scene.grid_size) != action.destination,
            f"move: {obj.cls} is already in the {action.destination}",
        )
        _require(bool(scene.free_cells(action.destination)), f"move: no free cell in the {action.destination}")
    elif verb == "wash":
        _require(traits.washable, f"wash: a {obj.cls} cannot be washed")
        _require(obj.cell is not None and not obj.hung, f"wash: {obj.cls} is not placed")
        _require(obj.dirty is True, f"wash: the {obj.cls} is already clean")
        if zone_of(obj.cell, scene.grid_size) != "sink":
            _require(bool(scene.free_cells("sink")), "wash: no free cell in the sink")
    elif verb == "hang":
        _require(traits.hangable, f"hang: a {obj.cls} cannot be hung")
        _require(obj.cell is not None, f"hang: {obj.cls} is in the agent's hand")
        _require(not obj.hung, f"hang: the {obj.cls} is already hanging")
        if zone_of(obj.cell, scene.grid_size) != "rack":
            _require(bool(scene.free_cells("rack")), "hang: no free cell on the rack")
    elif verb == "remove":
        _require(obj.hung, f"remove: the {obj.cls} is not hanging")
        _require(
            action.destination in ZONES and action.destination != "rack",
            f"remove: bad destination {action.destination!r}",
        )
        _require(bool(scene.free_cells(action.destination)), f"remove: no free cell in the {action.destination}")


def apply_action(scene: Scene, action: ActionSpec) -> Scene:
    """Apply one operative action, returning the target-state scene."""
    _check_preconditions(scene, action)
    out = scene.copy()
    idx = next(i for i, o in enumerate(out.objects) if o.cls == action.target)
    obj = out.objects[idx]
    verb = action.verb

    if verb == "take":
        obj.cell = None
        out.held = idx
    elif verb == "put":
        obj.cell = out.free_cells(action.destination)[0]
        out.held = None
    elif verb == "open":
        obj.is_open = True
    elif verb == "close":
        obj.is_open = False
    elif verb == "move":
        obj.cell = out.free_cells(action.destination)[0]
    elif verb == "wash":
        if zone_of(obj.cell, out.grid_size) != "sink":
            obj.cell = out.free_cells("sink")[0]
        obj.dirty = False
    elif verb == "hang":
        if zone_of(obj.cell, out.grid_size) != "rack":
            obj.cell = out.free_cells("rack")[0]
        obj.hung = True
    elif verb == "remove":
        obj.cell = out.free_cells(action.destination)[0]
        obj.hung = False

    _walk(out, _action_zone(scene, action))
    return out


def rule_table_changes(
    scene: Scene, action: ActionSpec
) -> tuple[set[SceneGraphTriplet], set[SceneGraphTriplet]]:
    """(removed, added) triplets the action implies, stated declaratively."""
    obj = scene.object_by_class(action.target)
    grid = scene.grid_size
    src = zone_of(obj.cell, grid) if obj.cell is not None else None
    removed: set[SceneGraphTriplet] = set()
    added: set[SceneGraphTriplet] = set()
    verb = action.verb

    if verb == "take":
        removed.add(SceneGraphTriplet(obj.cls, "on", src))
        added.add(SceneGraphTriplet(AGENT, "holding", obj.cls))
        target_zone = src
    elif verb == "put":
        removed.add(SceneGraphTriplet(AGENT, "holding", obj.cls))
        added.add(SceneGraphTriplet(obj.cls, "on", action.destination))
        target_zone = action.destination
    elif verb == "open":
        removed.add(SceneGraphTriplet(obj.cls, "is", "closed"))
        added.add(SceneGraphTriplet(obj.cls, "is", "open"))
        target_zone = src
    elif verb == "close":
        removed.add(SceneGraphTriplet(obj.cls, "is", "open"))
        added.add(SceneGraphTriplet(obj.cls, "is", "closed"))
        target_zone = src
    elif verb == "move":
        removed.add(SceneGraphTriplet(obj.cls, "on", src))
        added.add(SceneGraphTriplet(obj.cls, "on", action.destination))
        target_zone = action.destination
    elif verb == "wash":
        removed.add(SceneGraphTriplet(obj.cls, "is", "dirty"))
        added.add(SceneGraphTriplet(obj.cls, "is", "clean"))
        if src != "sink":
            removed.add(SceneGraphTriplet(obj.cls, "on", src))
            added.add(SceneGraphTriplet(obj.cls, "on", "sink"))
        target_zone = "sink"
    elif verb == "hang":
        removed.add(SceneGraphTriplet(obj.cls, "on", src))
        added.add(SceneGraphTriplet(obj.cls, "hanging_on", "rack"))
        target_zone = "rack"
    elif verb == "remove":
        removed.add(SceneGraphTriplet(obj.cls, "hanging_on", "rack"))
        added.add(SceneGraphTriplet(obj.cls, "on", action.destination))
        target_zone = action.destination
    else:
        raise ActionError(f"unknown verb {verb!r}")

    agent_zone = zone_of(scene.agent_cell, grid)
    if agent_zone != target_zone and _walk_lands(scene, action, target_zone):
        removed.add(SceneGraphTriplet(AGENT, "in_front_of", agent_zone))
        added.add(SceneGraphTriplet(AGENT, "in_front_of", target_zone))
    return removed, added


def _walk_lands(scene: Scene, action: ActionSpec, target_zone: str) -> bool:
    # whether the target zone has a free cell once the object has moved
    sim = scene.copy()
    obj = sim.object_by_class(action.target)
    if action.verb == "take":
        obj.cell = None
        sim.held = sim.objects.index(obj)
    elif action.verb in ("put", "move", "remove"):
        free = sim.free_cells(action.destination)
        if action.verb == "put":
            sim.held = None
        obj.cell = free[0] if free else obj.cell
        obj.hung = False
    elif action.verb == "wash" and zone_of(obj.cell, sim.grid_size) != "sink":
        free = sim.free_cells("sink")
        obj.cell = free[0] if free else obj.cell
    elif action.verb == "hang" and zone_of(obj.cell, sim.grid_size) != "rack":
        free = sim.free_cells("rack")
        obj.cell = free[0] if free else obj.cell
    return bool(sim.free_cells(target_zone))


def applicable_actions(scene: Scene) -> list[ActionSpec]:
    """All actions whose preconditions hold, in a deterministic order."""
    out = []
    for verb in VERBS:
        for obj in scene.objects:
            src = zone_of(obj.cell, scene.grid_size) if obj.cell is not None else None
            if verb in ("put", "move", "remove"):
                for dst in ZONES:
                    spec = ActionSpec(verb, obj.cls, source=src, destination=dst)
                    try:
                        _check_preconditions(scene, spec)
                    except ActionError:
                        continue
                    out.append(spec)
            else:
                spec = ActionSpec(verb, obj.cls, source=src)
                try:
                    _check_preconditions(scene, spec)
                except ActionError:
                    continue
                out.append(spec)
    return out


def sample_action(scene: Scene, rng: np.random.Generator) -> ActionSpec:
    """Pick a verb uniformly among applicable verbs, then an instance of it."""
    actions = applicable_actions(scene)
    if not actions:
        raise ActionError("no applicable action in scene")
    verbs = sorted({a.verb for a in actions}, key=VERBS.index)
    verb = verbs[int(rng.integers(len(verbs)))]
    of_verb = [a for a in actions if a.verb == verb]
    return of_verb[int(rng.integers(len(of_verb)))]
