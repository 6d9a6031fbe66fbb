"""Debug overlay: word mask, proposal colours, character boxes and final rectangles."""
from __future__ import annotations

import colorsys

import numpy as np
from PIL import Image, ImageDraw

from .raster import as_mask


def _palette(i: int) -> tuple[int, int, int]:
    # golden-angle hue walk, fixed so output is reproducible
    h = (i * 0.618033988749895) % 1.0
    r, g, b = colorsys.hsv_to_rgb(h, 0.65, 0.95)
    return int(r * 255), int(g * 255), int(b * 255)


def render_overlay(word_mask, proposals, chars, rects, scale: int = 4) -> Image.Image:
    """RGB image: grey mask, one colour per proposal, yellow char boxes, red rects.

    ``rects`` is a sequence of 4x2 corner arrays.
    """
    mask = as_mask(word_mask)
    h, w = mask.shape
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    rgb[mask.bits] = (70, 70, 70)
    for p in proposals:
        rgb[p.pixels[:, 1], p.pixels[:, 0]] = _palette(p.proposal_id)
    img = Image.fromarray(rgb, mode="RGB").resize((w * scale, h * scale), Image.NEAREST)
    draw = ImageDraw.Draw(img)
    for c in chars:
        draw.rectangle(
            [c.x_min * scale, c.y_min * scale, c.x_max * scale - 1, c.y_max * scale - 1],
            outline=(255, 220, 0) if c.confidence >= 0.5 else (140, 120, 0),
        )
    for corners in rects:
        pts = [(float(x) * scale, float(y) * scale) for x, y in np.asarray(corners)]
        draw.line(pts + [pts[0]], fill=(255, 40, 40), width=max(1, scale // 2))
    return img


def write_overlay(path, word_mask, proposals, chars, rects, scale: int = 4) -> None:
    render_overlay(word_mask, proposals, chars, rects, scale).save(path, format="PNG")
