"""Dense raster primitives: probability maps, binary masks and component labels.

Arrays are stored row-major as ``(height, width)``. Pixel coordinates handed
around outside this module are ``(x, y)`` pairs, i.e. column first.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

__all__ = [
    "Connectivity",
    "ProbabilityMap",
    "BinaryMask",
    "LabelMap",
    "threshold_map",
    "connected_components",
    "component_pixels",
    "pixel_set",
    "pixels_to_mask",
    "read_map",
    "write_mask",
    "write_map",
]


class Connectivity(enum.Enum):
    FOUR = "four"
    EIGHT = "eight"

    @property
    def offsets(self) -> tuple[tuple[int, int], ...]:
        """Neighbour offsets as ``(dx, dy)``, axis neighbours first."""
        axis = ((1, 0), (-1, 0), (0, 1), (0, -1))
        if self is Connectivity.FOUR:
            return axis
        return axis + ((1, 1), (1, -1), (-1, 1), (-1, -1))

    @property
    def structure(self) -> np.ndarray:
        if self is Connectivity.FOUR:
            return ndimage.generate_binary_structure(2, 1)
        return np.ones((3, 3), dtype=bool)

    @classmethod
    def parse(cls, value) -> "Connectivity":
        if isinstance(value, Connectivity):
            return value
        if value in (4, "4"):
            return cls.FOUR
        if value in (8, "8"):
            return cls.EIGHT
        return cls(str(value).lower())


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProbabilityMap:
    """Per-pixel saliency in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[1] == 0:
            raise ValueError(f"probability map must be a non-empty 2-D array, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("probability map values must lie in [0, 1]")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __eq__(self, other):
        return isinstance(other, ProbabilityMap) and np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class BinaryMask:
    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {b.shape}")
        object.__setattr__(self, "bits", _frozen(b.astype(bool)))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    def count(self) -> int:
        return int(self.bits.sum())

    def pixels(self) -> np.ndarray:
        """Foreground pixels as an ``(n, 2)`` array of ``(x, y)`` in row-major order."""
        ys, xs = np.nonzero(self.bits)
        return np.column_stack([xs, ys]).astype(np.int64)

    def __eq__(self, other):
        return isinstance(other, BinaryMask) and np.array_equal(self.bits, other.bits)


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Integer labelling of a mask; 0 is background, components are 1..component_count."""

    labels: np.ndarray
    component_count: int

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2:
            raise ValueError(f"label map must be 2-D, got shape {lab.shape}")
        if lab.size and lab.min() < 0:
            raise ValueError("labels must be non-negative")
        object.__setattr__(self, "labels", _frozen(lab.astype(np.int64)))
        object.__setattr__(self, "component_count", int(self.component_count))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def __eq__(self, other):
        return (
            isinstance(other, LabelMap)
            and self.component_count == other.component_count
            and np.array_equal(self.labels, other.labels)
        )


def as_mask(mask) -> BinaryMask:
    return mask if isinstance(mask, BinaryMask) else BinaryMask(mask)


def as_map(pmap) -> ProbabilityMap:
    return pmap if isinstance(pmap, ProbabilityMap) else ProbabilityMap(pmap)


def threshold_map(pmap, t: float = 0.5) -> BinaryMask:
    """Foreground wherever ``value >= t``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {t}")
    pmap = as_map(pmap)
    return BinaryMask(pmap.values >= t)


def connected_components(mask, conn: Connectivity = Connectivity.EIGHT) -> LabelMap:
    """Label maximal connected foreground regions.

    Labels follow the order in which a row-major scan first meets each
    component, so the output is fully determined by the mask.
    """
    mask = as_mask(mask)
    conn = Connectivity.parse(conn)
    raw, n = ndimage.label(mask.bits, structure=conn.structure)
    if n == 0:
        return LabelMap(np.zeros(mask.shape, dtype=np.int64), 0)
    flat = raw.ravel()
    fg = flat[flat > 0]
    _, first = np.unique(fg, return_index=True)
    # raw label (1..n) sorted by first occurrence -> new label
    order = np.unique(fg)[np.argsort(first)]
    remap = np.zeros(n + 1, dtype=np.int64)
    remap[order] = np.arange(1, n + 1)
    return LabelMap(remap[raw], n)


def component_pixels(lm: LabelMap, label: int) -> np.ndarray:
    """Pixels ``(x, y)`` carrying ``label``, row-major order."""
    if not 1 <= label <= lm.component_count:
        raise KeyError(f"unknown component label {label} (map has {lm.component_count})")
    ys, xs = np.nonzero(lm.labels == label)
    return np.column_stack([xs, ys]).astype(np.int64)


def pixel_set(coords) -> np.ndarray:
    """Normalise an iterable of ``(x, y)`` into a unique, row-major sorted ``(n, 2)`` array."""
    a = np.asarray(list(coords) if not isinstance(coords, np.ndarray) else coords, dtype=np.int64)
    if a.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    a = a.reshape(-1, 2)
    a = np.unique(a, axis=0)
    order = np.lexsort((a[:, 0], a[:, 1]))
    return a[order]


def pixels_to_mask(pixels, shape: tuple[int, int]) -> np.ndarray:
    """Boolean ``(height, width)`` array with the given pixels set; out-of-frame pixels are ignored."""
    out = np.zeros(shape, dtype=bool)
    p = np.asarray(pixels, dtype=np.int64).reshape(-1, 2)
    if len(p):
        ok = (p[:, 0] >= 0) & (p[:, 0] < shape[1]) & (p[:, 1] >= 0) & (p[:, 1] < shape[0])
        p = p[ok]
        out[p[:, 1], p[:, 0]] = True
    return out


def read_map(path) -> ProbabilityMap:
    """Read an 8-bit single-channel PGM/PNG; intensity k maps to k/255."""
    from PIL import Image

    with Image.open(Path(path)) as img:
        if img.mode not in ("L", "1", "P"):
            raise ValueError(f"{path}: expected a single-channel 8-bit image, got mode {img.mode}")
        a = np.asarray(img.convert("L"), dtype=np.float64)
    return ProbabilityMap(a / 255.0)


def write_map(pmap, path) -> None:
    """Write a probability map as 8-bit graymap (format chosen by suffix)."""
    from PIL import Image

    pmap = as_map(pmap)
    a = np.rint(pmap.values * 255.0).astype(np.uint8)
    Image.fromarray(a, mode="L").save(Path(path))


def write_mask(mask, path) -> None:
    """Write a mask as 0/255."""
    from PIL import Image

    mask = as_mask(mask)
    Image.fromarray(mask.bits.astype(np.uint8) * 255, mode="L").save(Path(path))
