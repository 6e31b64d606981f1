"""PNG rendering of a map and its candidate waypoints for the vision model.

Row ``y`` of the grid is drawn as pixel row ``y * cell_px`` (y grows downward).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence

from PIL import Image, ImageDraw, ImageFont

from ..errors import RenderFailure
from ..grid import GridEnvironment, State

DEFAULT_PALETTE = {
    "background": (255, 255, 255),
    "wall": (0, 0, 0),
    "irregular": (220, 60, 60),
    "contour": (120, 0, 0),
    "start": (30, 90, 230),
    "goal": (40, 170, 60),
    "path": (40, 110, 255),
    "waypoint": (255, 210, 0),
    "label": (0, 0, 0),
}


@dataclass(frozen=True)
class RenderSpec:
    cell_px: int = 8
    palette: dict = field(default_factory=lambda: dict(DEFAULT_PALETTE))

    def __post_init__(self):
        if self.cell_px < 1:
            raise RenderFailure("cell_px must be positive")
        missing = set(DEFAULT_PALETTE) - set(self.palette)
        if missing:
            object.__setattr__(self, "palette", {**DEFAULT_PALETTE, **self.palette})

    @classmethod
    def fit(cls, env: GridEnvironment, max_px: int = 1024, **kw) -> "RenderSpec":
        """Largest cell size keeping the longer image side within ``max_px``."""
        return cls(cell_px=max(2, min(16, max_px // max(env.width, env.height))), **kw)


def _center(s: Sequence[int], c: int) -> tuple[float, float]:
    return (s[0] * c + c / 2, s[1] * c + c / 2)


def _star(cx: float, cy: float, r: float) -> list[tuple[float, float]]:
    pts = []
    for k in range(10):
        rad = r if k % 2 == 0 else r * 0.45
        a = -math.pi / 2 + k * math.pi / 5
        pts.append((round(cx + rad * math.cos(a), 3), round(cy + rad * math.sin(a), 3)))
    return pts


def star_layout(T: Sequence[Sequence[int]], spec: RenderSpec) -> list[tuple[int, tuple[float, float]]]:
    """``(id, pixel centre)`` for every interior waypoint, ids counted from 1."""
    return [(i, _center(t, spec.cell_px)) for i, t in enumerate(list(T)[1:-1], start=1)]


def _font(size: int):
    try:
        return ImageFont.load_default(size=size)
    except TypeError:  # Pillow without FreeType sizing
        return ImageFont.load_default()


def _draw_base(env: GridEnvironment, spec: RenderSpec) -> Image.Image:
    c, pal = spec.cell_px, spec.palette
    img = Image.new("RGB", (env.width * c, env.height * c), pal["background"])
    draw = ImageDraw.Draw(img)

    irregular = set()
    for ob in env.irregular:
        irregular |= ob.cells
    for b in env.horizontal_barriers:
        draw.rectangle([b.x_start * c, b.y * c, b.x_end * c - 1, b.y * c + c - 1], fill=pal["wall"])
    for b in env.vertical_barriers:
        draw.rectangle([b.x * c, b.y_start * c, b.x * c + c - 1, b.y_end * c - 1], fill=pal["wall"])
    for x, y in sorted(irregular, key=lambda s: (s[1], s[0])):
        draw.rectangle([x * c, y * c, x * c + c - 1, y * c + c - 1], fill=pal["irregular"])

    # dashed contour: one short dash centred on every exposed cell edge
    dash = max(1, c // 2)
    pad = (c - dash) // 2
    for ob in env.irregular:
        for x, y in sorted(ob.cells, key=lambda s: (s[1], s[0])):
            left, top = x * c, y * c
            if (x, y - 1) not in ob.cells:
                draw.line([left + pad, top, left + pad + dash, top], fill=pal["contour"])
            if (x, y + 1) not in ob.cells:
                draw.line([left + pad, top + c - 1, left + pad + dash, top + c - 1], fill=pal["contour"])
            if (x - 1, y) not in ob.cells:
                draw.line([left, top + pad, left, top + pad + dash], fill=pal["contour"])
            if (x + 1, y) not in ob.cells:
                draw.line([left + c - 1, top + pad, left + c - 1, top + pad + dash], fill=pal["contour"])

    grow = max(1, c // 3)
    for key, s in (("start", env.start), ("goal", env.goal)):
        draw.rectangle([s.x * c - grow, s.y * c - grow, s.x * c + c - 1 + grow, s.y * c + c - 1 + grow],
                       fill=pal[key])
    return img


def render_images(env: GridEnvironment, T: Sequence[Sequence[int]], spec: RenderSpec = RenderSpec()):
    """Clean and annotated maps as PIL images of identical size."""
    if env.width <= 0 or env.height <= 0:
        raise RenderFailure("cannot render a zero-area map")
    T = [State(int(t[0]), int(t[1])) for t in T]
    clean = _draw_base(env, spec)
    annotated = clean.copy()
    draw = ImageDraw.Draw(annotated)
    c, pal = spec.cell_px, spec.palette

    if len(T) >= 2:
        draw.line([_center(t, c) for t in T], fill=pal["path"], width=max(1, c // 4))
    radius = max(3.0, 0.9 * c)
    font = _font(max(8, int(1.4 * c)))
    for ident, (cx, cy) in star_layout(T, spec):
        draw.polygon(_star(cx, cy, radius), fill=pal["waypoint"], outline=pal["label"])
        draw.text((cx + radius, cy - radius), str(ident), fill=pal["label"], font=font)
    return clean, annotated


def to_png(img: Image.Image) -> bytes:
    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def render_pair(env: GridEnvironment, T: Sequence[Sequence[int]], spec: RenderSpec = RenderSpec()) -> tuple[bytes, bytes]:
    clean, annotated = render_images(env, T, spec)
    return to_png(clean), to_png(annotated)
