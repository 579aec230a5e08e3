"""Deterministic rasterization of scenes into 8-bit RGB images.

Each object is a colored glyph confined to its own cell: fill color comes
from the class palette, corner notches encode the class index, and state
flags add fixed marks (hollow center when open, dark lower band when dirty,
light top stripe when hung). The held object is drawn as a half-size chip in
the agent's cell.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from opcap.world.scene import OBJECT_CLASSES, Scene, SceneObject, zone_of

ZONE_TINT = {
    "table": (236, 226, 210),
    "shelf": (214, 226, 238),
    "sink": (212, 236, 228),
    "rack": (232, 216, 232),
}
AGENT_COLOR = (255, 64, 255)


def _draw_glyph(img: np.ndarray, y0: int, x0: int, size: int, obj: SceneObject) -> None:
    pad = max(1, size // 8)
    y1, x1 = y0 + size - pad, x0 + size - pad
    y0, x0 = y0 + pad, x0 + pad
    color = np.array(obj.color, dtype=np.uint8)
    img[y0:y1, x0:x1] = color

    # class notches: cut corner pixels per bit of the class index
    notch = max(1, size // 8)
    bits = OBJECT_CLASSES.index(obj.cls)
    corners = [(y0, x0), (y0, x1 - notch), (y1 - notch, x0), (y1 - notch, x1 - notch)]
    for b, (cy, cx) in enumerate(corners):
        if (bits >> b) & 1:
            img[cy : cy + notch, cx : cx + notch] = 0

    if obj.is_open:
        # hollow center
        iy, ix = (y1 - y0) // 4, (x1 - x0) // 4
        img[y0 + iy : y1 - iy, x0 + ix : x1 - ix] = (16, 16, 16)
    if obj.dirty:
        band = max(1, (y1 - y0) // 4)
        img[y1 - band : y1, x0:x1] = color // 3
    if obj.hung:
        stripe = max(1, (y1 - y0) // 6)
        img[y0 : y0 + stripe, x0:x1] = (255, 255, 255)


def render(scene: Scene, resolution: int) -> np.ndarray:
    """Rasterize to (resolution, resolution, 3) uint8; pure in its inputs."""
    if resolution % scene.grid_size != 0:
        raise ValueError(f"resolution {resolution} is not a multiple of grid size {scene.grid_size}")
    cell = resolution // scene.grid_size
    img = np.zeros((resolution, resolution, 3), dtype=np.uint8)
    for r in range(scene.grid_size):
        for c in range(scene.grid_size):
            img[r * cell : (r + 1) * cell, c * cell : (c + 1) * cell] = ZONE_TINT[
                zone_of((r, c), scene.grid_size)
            ]

    for obj in scene.objects:
        if obj.cell is not None:
            _draw_glyph(img, obj.cell[0] * cell, obj.cell[1] * cell, cell, obj)

    ar, ac = scene.agent_cell
    y0, x0 = ar * cell, ac * cell
    pad = max(1, cell // 8)
    img[y0 + pad : y0 + cell - pad, x0 + pad : x0 + cell - pad] = AGENT_COLOR
    # diagonal mark distinguishes the agent from any object fill
    for k in range(cell - 2 * pad):
        img[y0 + pad + k, x0 + pad + k] = (0, 0, 0)
    if scene.held is not None:
        held = scene.objects[scene.held]
        chip = SceneObject(
            cls=held.cls, color=held.color, cell=None,
            is_open=held.is_open, dirty=held.dirty, hung=False,
        )
        _draw_glyph(img, y0, x0, cell // 2, chip)
    return img


def save_image(img: np.ndarray, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(img, mode="RGB").save(path, format="PNG")


def load_image(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))
