"""
Boxes for rotated words
=======================

Detections are reported both as axis-aligned boxes and as minimum-area
rotated rectangles. For slanted text the rotated rectangle is much tighter.
"""

import numpy as np

from textcc import SceneSpec, WordSpec, axis_aligned_bbox, min_area_rect, render_scene

for angle in (0.0, 15.0, 30.0, 45.0, -60.0):
    spec = SceneSpec(120, 120, (WordSpec((30, 50), 5, (10, 20), angle=angle),))
    b = render_scene(spec)
    ys, xs = np.nonzero(b.word_map.values)
    pix = np.column_stack([xs, ys])
    r = min_area_rect(pix)
    box = axis_aligned_bbox(pix)
    print(f"angle {angle:6.1f}: rect {r.width:5.1f} x {r.height:4.1f} at {r.angle:6.1f} deg "
          f"(area {r.area:6.1f}), axis box area {box.area}")
