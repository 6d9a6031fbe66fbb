"""Boxes and rotated rectangles derived from pixel sets."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AxisBox",
    "RotatedRect",
    "axis_aligned_bbox",
    "convex_hull",
    "min_area_rect",
    "pixel_corners",
    "polygon_area",
    "rasterize_polygon",
]


@dataclass(frozen=True)
class AxisBox:
    """Half-open box ``[x_min, x_max) x [y_min, y_max)``."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate box {self.as_tuple()}")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    @property
    def area(self) -> int:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    @property
    def corners(self) -> np.ndarray:
        return np.array(
            [[self.x_min, self.y_min], [self.x_max, self.y_min],
             [self.x_max, self.y_max], [self.x_min, self.y_max]],
            dtype=np.float64,
        )


@dataclass(frozen=True, eq=False)
class RotatedRect:
    """Rectangle with ``width >= height`` whose long side points along ``angle``.

    ``corners`` run (-u,-v), (+u,-v), (+u,+v), (-u,+v) around the centre,
    where u is the long-side direction and v its normal (y pointing down).
    """

    center: tuple[float, float]
    width: float
    height: float
    angle: float  # degrees in [-90, 90)

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def corners(self) -> np.ndarray:
        t = math.radians(self.angle)
        u = np.array([math.cos(t), math.sin(t)])
        v = np.array([-math.sin(t), math.cos(t)])
        c = np.asarray(self.center, dtype=np.float64)
        hw, hh = self.width / 2.0, self.height / 2.0
        return np.array([c - hw * u - hh * v, c + hw * u - hh * v, c + hw * u + hh * v, c - hw * u + hh * v])

    def __eq__(self, other):
        return isinstance(other, RotatedRect) and (
            tuple(self.center), self.width, self.height, self.angle
        ) == (tuple(other.center), other.width, other.height, other.angle)


def _as_points(pixels) -> np.ndarray:
    p = np.asarray(pixels, dtype=np.int64).reshape(-1, 2)
    if len(p) == 0:
        raise ValueError("empty pixel set")
    return p


def axis_aligned_bbox(pixels) -> AxisBox:
    p = _as_points(pixels)
    x0, y0 = p.min(axis=0)
    x1, y1 = p.max(axis=0)
    return AxisBox(int(x0), int(y0), int(x1) + 1, int(y1) + 1)


def pixel_corners(pixels) -> np.ndarray:
    """The four unit-square corners of every pixel (pixel (x, y) spans [x, x+1) x [y, y+1))."""
    p = _as_points(pixels)
    offs = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=np.int64)
    return np.unique((p[:, None, :] + offs[None, :, :]).reshape(-1, 2), axis=0)


def convex_hull(points) -> np.ndarray:
    """Counter-clockwise hull (Andrew's monotone chain), collinear points dropped.

    Degenerate inputs return one or two points.
    """
    pts = np.unique(np.asarray(points).reshape(-1, 2), axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts.tolist()

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for q in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], q) <= 0:
            lower.pop()
        lower.append(q)
    upper: list = []
    for q in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], q) <= 0:
            upper.pop()
        upper.append(q)
    return np.array(lower[:-1] + upper[:-1])


def _canonical(center, w, h, angle_rad) -> RotatedRect:
    ang = math.degrees(angle_rad)
    if h > w:
        w, h = h, w
        ang += 90.0
    ang = (ang + 90.0) % 180.0 - 90.0
    if math.isclose(w, h, rel_tol=1e-12, abs_tol=1e-12) and not -45.0 <= ang < 45.0:
        ang = (ang + 45.0) % 90.0 - 45.0
    if ang >= 90.0 or math.isclose(ang, 90.0, abs_tol=1e-12):
        ang = -90.0
    return RotatedRect((float(center[0]), float(center[1])), float(w), float(h), float(ang))


def min_area_rect(pixels) -> RotatedRect:
    """Minimum-area rectangle enclosing the unit squares of all pixels.

    Candidate orientations are the hull edges; an optimal rectangle always
    has one side on a hull edge.
    """
    hull = convex_hull(pixel_corners(pixels)).astype(np.float64)
    n = len(hull)
    best = None
    for i in range(n):
        e = hull[(i + 1) % n] - hull[i]
        norm = math.hypot(e[0], e[1])
        if norm == 0.0:
            continue
        u = e / norm
        v = np.array([-u[1], u[0]])
        pu, pv = hull @ u, hull @ v
        w, h = pu.max() - pu.min(), pv.max() - pv.min()
        area = w * h
        if best is None or area < best[0] - 1e-9:
            cu, cv = (pu.max() + pu.min()) / 2.0, (pv.max() + pv.min()) / 2.0
            best = (area, cu * u + cv * v, w, h, math.atan2(u[1], u[0]))
    _, center, w, h, ang = best
    return _canonical(center, w, h, ang)


def polygon_area(corners) -> float:
    c = np.asarray(corners, dtype=np.float64).reshape(-1, 2)
    x, y = c[:, 0], c[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def rasterize_polygon(corners) -> np.ndarray:
    """Pixels ``(x, y)`` whose centres fall inside a convex polygon (boundary included)."""
    c = np.asarray(corners, dtype=np.float64).reshape(-1, 2)
    x0, y0 = np.floor(c.min(axis=0)).astype(int)
    x1, y1 = np.ceil(c.max(axis=0)).astype(int)
    xs, ys = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1))
    px, py = xs.ravel() + 0.5, ys.ravel() + 0.5
    # orientation-agnostic half-plane test
    signed = 0.5 * float(np.dot(c[:, 0], np.roll(c[:, 1], -1)) - np.dot(c[:, 1], np.roll(c[:, 0], -1)))
    sgn = 1.0 if signed >= 0 else -1.0
    inside = np.ones(px.shape, dtype=bool)
    for i in range(len(c)):
        a, b = c[i], c[(i + 1) % len(c)]
        cr = (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0])
        inside &= sgn * cr >= -1e-9
    return np.column_stack([xs.ravel()[inside], ys.ravel()[inside]]).astype(np.int64)
