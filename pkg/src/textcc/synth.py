"""Deterministic synthetic text scenes.

Words are filled (possibly rotated) rectangles made of abutting glyph cells.
The center-line band is the middle half of the word height along the whole
word length. Each glyph gets one character box: the largest axis-aligned
rectangle lying entirely on the glyph's rasterised pixels, which is the
full glyph cell for unrotated words.

Randomness
----------
All draws come from ``numpy.random.Generator(numpy.random.PCG64(seed))``.
PCG64's bit stream is platform independent; the generator methods used here
(``random``, ``integers``, ``uniform``) are called in a fixed order, so a
given seed reproduces the same scene everywhere for a given numpy release
line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .evaluation import GroundTruthWord
from .geometry import rasterize_polygon
from .raster import LabelMap, ProbabilityMap
from .verification import CharacterBox

__all__ = [
    "WordSpec",
    "NoiseSpec",
    "SceneSpec",
    "SceneBundle",
    "make_rng",
    "render_scene",
    "apply_noise",
    "random_scene_spec",
    "word_corners",
    "largest_rectangle",
    "scene_spec_from_dict",
    "scene_spec_to_dict",
    "save_bundle",
    "load_bundle",
]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class WordSpec:
    """One word: ``origin`` is the top-left corner before rotation about the word centre."""

    origin: tuple[float, float]
    glyph_count: int
    glyph_size: tuple[int, int]  # (width, height)
    angle: float = 0.0  # degrees, positive turns clockwise on screen (y down)
    spacing: int = 0  # gap between glyph cells; still word foreground
    dotted: tuple[int, ...] = ()  # glyph indices drawn with a detached dot

    def __post_init__(self):
        object.__setattr__(self, "dotted", tuple(int(g) for g in self.dotted))
        if self.glyph_count < 1:
            raise ValueError("glyph_count must be >= 1")
        gw, gh = self.glyph_size
        if gw < 1 or gh < 1:
            raise ValueError(f"glyph_size must be positive, got {self.glyph_size}")
        if self.spacing < 0:
            raise ValueError("spacing must be >= 0")
        for g in self.dotted:
            if not 0 <= g < self.glyph_count:
                raise ValueError(f"dotted glyph index {g} out of range")
        if self.dotted and (gw < 6 or gh < 16):
            raise ValueError("dotted glyphs need glyph_size of at least 6x16")

    @property
    def length(self) -> float:
        gw, _ = self.glyph_size
        return self.glyph_count * gw + (self.glyph_count - 1) * self.spacing

    @property
    def dot_unit(self) -> int:
        """Dot height; the gap below it has the same height."""
        return max(2, round(self.glyph_size[1] / 10))


@dataclass(frozen=True)
class NoiseSpec:
    pixel_flip_rate: float = 0.0
    box_jitter: int = 0
    confidence_range: tuple[float, float] = (1.0, 1.0)
    spurious_char_count: int = 0
    drop_char_rate: float = 0.0
    spurious_confidence_range: tuple[float, float] = (0.0, 0.5)

    def __post_init__(self):
        for name in ("pixel_flip_rate", "drop_char_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("confidence_range", "spurious_confidence_range"):
            lo, hi = getattr(self, name)
            if not 0.0 <= lo <= hi <= 1.0:
                raise ValueError(f"{name} must satisfy 0 <= lo <= hi <= 1, got {(lo, hi)}")
        if self.box_jitter < 0 or self.spurious_char_count < 0:
            raise ValueError("box_jitter and spurious_char_count must be >= 0")


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    words: tuple[WordSpec, ...]
    rng_seed: int = 0
    noise: NoiseSpec = NoiseSpec()

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        if self.width < 1 or self.height < 1:
            raise ValueError("canvas must be non-empty")


@dataclass(frozen=True, eq=False)
class SceneBundle:
    word_map: ProbabilityMap
    centerline_map: ProbabilityMap
    chars: tuple[CharacterBox, ...]
    gt_words: tuple[GroundTruthWord, ...]
    gt_assignment: LabelMap
    char_word: tuple[int, ...] = ()  # owning word index per char, -1 for spurious

    @property
    def shape(self) -> tuple[int, int]:
        return self.word_map.shape

    def __eq__(self, other):
        if not isinstance(other, SceneBundle):
            return False
        return (
            self.word_map == other.word_map
            and self.centerline_map == other.centerline_map
            and self.chars == other.chars
            and self.gt_assignment == other.gt_assignment
            and self.char_word == other.char_word
            and len(self.gt_words) == len(other.gt_words)
            and all(
                a.ignore_flag == b.ignore_flag and np.array_equal(a.box, b.box)
                for a, b in zip(self.gt_words, other.gt_words)
            )
        )


def _frame(word: WordSpec):
    """Centre and unit axes (along text, down the glyphs) of a word."""
    _, gh = word.glyph_size
    t = math.radians(word.angle)
    u = np.array([math.cos(t), math.sin(t)])
    v = np.array([-math.sin(t), math.cos(t)])
    ox, oy = word.origin
    c = np.array([ox + word.length / 2.0, oy + gh / 2.0])
    return c, u, v


def word_corners(word: WordSpec) -> np.ndarray:
    """Analytic corners of the word rectangle, clockwise on screen from the rotated origin."""
    c, u, v = _frame(word)
    hl, hh = word.length / 2.0, word.glyph_size[1] / 2.0
    return np.array([c - hl * u - hh * v, c + hl * u - hh * v, c + hl * u + hh * v, c - hl * u + hh * v])


def _local_coords(word: WordSpec, shape):
    h, w = shape
    c, u, v = _frame(word)
    ys, xs = np.mgrid[0:h, 0:w]
    dx = xs + 0.5 - c[0]
    dy = ys + 0.5 - c[1]
    lu = dx * u[0] + dy * u[1] + word.length / 2.0
    lv = dx * v[0] + dy * v[1] + word.glyph_size[1] / 2.0
    return lu, lv


def _rasterize_word(word: WordSpec, shape):
    """Word pixels, center-line pixels, and per-glyph pixel masks."""
    gw, gh = word.glyph_size
    lu, lv = _local_coords(word, shape)
    body = (lu >= 0) & (lu < word.length) & (lv >= 0) & (lv < gh)
    q = word.dot_unit
    glyphs = []
    for g in range(word.glyph_count):
        x0 = g * (gw + word.spacing)
        cell = body & (lu >= x0) & (lu < x0 + gw)
        if g in word.dotted:
            head = lv < 2 * q
            dot = head & (lv < q) & (lu >= x0 + gw / 3.0) & (lu < x0 + 2.0 * gw / 3.0)
            body = body & ~(cell & head & ~dot)
            cell = cell & ~head
        glyphs.append(cell)
    band = body & (lv >= gh / 4.0) & (lv < 3.0 * gh / 4.0)
    return body, band, glyphs


def largest_rectangle(mask: np.ndarray):
    """Largest-area all-True axis-aligned rectangle as half-open ``(x0, y0, x1, y1)``.

    Histogram/stack method; ties keep the first rectangle found in row-major
    order of its bottom-right extent. Returns ``None`` for an empty mask.
    """
    h, w = mask.shape
    heights = np.zeros(w, dtype=np.int64)
    best = (0, None)
    for y in range(h):
        heights = np.where(mask[y], heights + 1, 0)
        hs = heights.tolist() + [0]
        stack: list[int] = []
        for x, hx in enumerate(hs):
            while stack and hs[stack[-1]] >= hx:
                top = stack.pop()
                height = hs[top]
                left = stack[-1] + 1 if stack else 0
                area = height * (x - left)
                if area > best[0]:
                    best = (area, (left, y - height + 1, x, y + 1))
            stack.append(x)
    return best[1]


def _char_box(glyph: np.ndarray):
    ys, xs = np.nonzero(glyph)
    if len(xs) == 0:
        return None
    x0, y0 = xs.min(), ys.min()
    sub = glyph[y0:ys.max() + 1, x0:xs.max() + 1]
    r = largest_rectangle(sub)
    return (r[0] + x0, r[1] + y0, r[2] + x0, r[3] + y0)


def render_scene(spec: SceneSpec) -> SceneBundle:
    """Render a noise-free bundle; maps are exactly 0/1."""
    shape = (spec.height, spec.width)
    rng = make_rng(spec.rng_seed)
    word_bits = np.zeros(shape, dtype=bool)
    band_bits = np.zeros(shape, dtype=bool)
    owner = np.zeros(shape, dtype=np.int64)
    chars, char_word, gt_words = [], [], []
    lo, hi = spec.noise.confidence_range
    for k, word in enumerate(spec.words):
        corners = word_corners(word)
        if (corners.min(axis=0) < -1e-9).any() or corners[:, 0].max() > spec.width + 1e-9 \
                or corners[:, 1].max() > spec.height + 1e-9:
            raise ValueError(f"word {k} does not fit the {spec.width}x{spec.height} canvas")
        body, band, glyphs = _rasterize_word(word, shape)
        if not body.any():
            raise ValueError(f"word {k} covers no pixel centre")
        if (word_bits & body).any():
            raise ValueError(f"word {k} overlaps an earlier word")
        word_bits |= body
        band_bits |= band
        owner[body] = k + 1
        for glyph in glyphs:
            box = _char_box(glyph)
            if box is None:
                continue
            conf = float(rng.uniform(lo, hi)) if hi > lo else float(lo)
            cls = int(rng.integers(1, 95))
            chars.append(CharacterBox(*box, class_id=cls, confidence=conf))
            char_word.append(k)
        gt_words.append(GroundTruthWord(corners))
    return SceneBundle(
        word_map=ProbabilityMap(word_bits.astype(np.float64)),
        centerline_map=ProbabilityMap(band_bits.astype(np.float64)),
        chars=tuple(chars),
        gt_words=tuple(gt_words),
        gt_assignment=LabelMap(owner, len(spec.words)),
        char_word=tuple(char_word),
    )


def _flip(values: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    hit = rng.random(values.shape) < rate
    return np.where(hit, 1.0 - values, values)


def apply_noise(bundle: SceneBundle, noise: NoiseSpec, rng_seed: int) -> SceneBundle:
    """Corrupt maps and character boxes; ground truth is left alone."""
    rng = make_rng(rng_seed)
    h, w = bundle.shape
    word = _flip(bundle.word_map.values, noise.pixel_flip_rate, rng)
    center = _flip(bundle.centerline_map.values, noise.pixel_flip_rate, rng)

    chars, char_word = [], []
    j = noise.box_jitter
    for c, owner in zip(bundle.chars, bundle.char_word or (-1,) * len(bundle.chars)):
        if rng.random() < noise.drop_char_rate:
            continue
        if j:
            dx0, dy0, dx1, dy1 = rng.integers(-j, j + 1, size=4).tolist()
            x0 = min(max(c.x_min + dx0, 0), w - 1)
            y0 = min(max(c.y_min + dy0, 0), h - 1)
            x1 = min(max(c.x_max + dx1, x0 + 1), w)
            y1 = min(max(c.y_max + dy1, y0 + 1), h)
            c = replace(c, x_min=x0, y_min=y0, x_max=x1, y_max=y1)
        chars.append(c)
        char_word.append(owner)

    lo, hi = noise.spurious_confidence_range
    for _ in range(noise.spurious_char_count):
        bw = int(rng.integers(2, max(3, w // 6) + 1))
        bh = int(rng.integers(2, max(3, h // 6) + 1))
        bw, bh = min(bw, w), min(bh, h)
        x0 = int(rng.integers(0, w - bw + 1))
        y0 = int(rng.integers(0, h - bh + 1))
        conf = float(rng.uniform(lo, hi))
        cls = int(rng.integers(1, 95))
        chars.append(CharacterBox(x0, y0, x0 + bw, y0 + bh, class_id=cls, confidence=conf))
        char_word.append(-1)

    return SceneBundle(
        word_map=ProbabilityMap(word),
        centerline_map=ProbabilityMap(center),
        chars=tuple(chars),
        gt_words=bundle.gt_words,
        gt_assignment=bundle.gt_assignment,
        char_word=tuple(char_word),
    )


def _expanded_corners(word: WordSpec, margin: float) -> np.ndarray:
    c, u, v = _frame(word)
    hl, hh = word.length / 2.0 + margin, word.glyph_size[1] / 2.0 + margin
    return np.array([c - hl * u - hh * v, c + hl * u - hh * v, c + hl * u + hh * v, c - hl * u + hh * v])


def random_scene_spec(
    seed: int,
    width: int = 160,
    height: int = 160,
    n_words: tuple[int, int] = (1, 5),
    glyph_count: tuple[int, int] = (1, 5),
    glyph_width: tuple[int, int] = (6, 12),
    glyph_height: tuple[int, int] = (16, 24),
    angle_range: tuple[float, float] = (-60.0, 60.0),
    spacing: tuple[int, int] = (0, 2),
    dotted_rate: float = 0.2,
    margin: float = 6.0,
    noise: NoiseSpec = NoiseSpec(),
    max_tries: int = 200,
) -> SceneSpec:
    """Random non-overlapping words; ``margin`` keeps neighbouring words apart.

    Placement may give up on a word after ``max_tries`` attempts, so the
    result can hold fewer words than requested (never zero).
    """
    rng = make_rng(seed)
    target = int(rng.integers(n_words[0], n_words[1] + 1))
    taken = np.zeros((height, width), dtype=bool)
    words: list[WordSpec] = []
    for _ in range(target):
        for _ in range(max_tries):
            gc = int(rng.integers(glyph_count[0], glyph_count[1] + 1))
            gw = int(rng.integers(glyph_width[0], glyph_width[1] + 1))
            gh = int(rng.integers(glyph_height[0], glyph_height[1] + 1))
            sp = int(rng.integers(spacing[0], spacing[1] + 1))
            ang = float(rng.uniform(*angle_range)) if angle_range[1] > angle_range[0] else float(angle_range[0])
            dots = tuple(g for g in range(gc) if rng.random() < dotted_rate) if gw >= 6 and gh >= 16 else ()
            length = gc * gw + (gc - 1) * sp
            # place by centre, then recover the origin
            cx = float(rng.uniform(0, width))
            cy = float(rng.uniform(0, height))
            cand = WordSpec((cx - length / 2.0, cy - gh / 2.0), gc, (gw, gh), ang, sp, dots)
            corners = word_corners(cand)
            if corners.min() < 0 or corners[:, 0].max() > width or corners[:, 1].max() > height:
                continue
            halo = rasterize_polygon(_expanded_corners(cand, margin))
            ok = (halo[:, 0] >= 0) & (halo[:, 0] < width) & (halo[:, 1] >= 0) & (halo[:, 1] < height)
            halo = halo[ok]
            if taken[halo[:, 1], halo[:, 0]].any():
                continue
            body = rasterize_polygon(corners)
            ok = (body[:, 0] >= 0) & (body[:, 0] < width) & (body[:, 1] >= 0) & (body[:, 1] < height)
            taken[body[ok, 1], body[ok, 0]] = True
            words.append(cand)
            break
    if not words:
        raise ValueError("could not place any word; enlarge the canvas or shrink the glyphs")
    return SceneSpec(width, height, tuple(words), rng_seed=seed, noise=noise)


# -- files ---------------------------------------------------------------------

BUNDLE_FILES = {
    "word_map": "word.pgm",
    "centerline_map": "centerline.pgm",
    "chars": "chars.txt",
    "gt_words": "gt.txt",
    "gt_assignment": "assignment.txt",
}


def scene_spec_from_dict(d: dict) -> SceneSpec:
    words = [
        WordSpec(
            origin=tuple(w["origin"]),
            glyph_count=int(w["glyph_count"]),
            glyph_size=tuple(int(v) for v in w["glyph_size"]),
            angle=float(w.get("angle", 0.0)),
            spacing=int(w.get("spacing", 0)),
            dotted=tuple(w.get("dotted", ())),
        )
        for w in d["words"]
    ]
    nd = dict(d.get("noise", {}))
    for k in ("confidence_range", "spurious_confidence_range"):
        if k in nd:
            nd[k] = tuple(nd[k])
    return SceneSpec(int(d["width"]), int(d["height"]), tuple(words), int(d.get("rng_seed", 0)), NoiseSpec(**nd))


def scene_spec_to_dict(spec: SceneSpec) -> dict:
    n = spec.noise
    return {
        "width": spec.width,
        "height": spec.height,
        "rng_seed": spec.rng_seed,
        "words": [
            {"origin": list(w.origin), "glyph_count": w.glyph_count, "glyph_size": list(w.glyph_size),
             "angle": w.angle, "spacing": w.spacing, "dotted": list(w.dotted)}
            for w in spec.words
        ],
        "noise": {
            "pixel_flip_rate": n.pixel_flip_rate,
            "box_jitter": n.box_jitter,
            "confidence_range": list(n.confidence_range),
            "spurious_char_count": n.spurious_char_count,
            "drop_char_rate": n.drop_char_rate,
            "spurious_confidence_range": list(n.spurious_confidence_range),
        },
    }


def save_bundle(bundle: SceneBundle, directory) -> dict:
    """Write the bundle in the pipeline's input formats; returns the file paths."""
    from pathlib import Path

    from .formats import rle_encode, write_chars, write_gt, write_records
    from .raster import component_pixels, write_map

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {k: d / v for k, v in BUNDLE_FILES.items()}
    write_map(bundle.word_map, paths["word_map"])
    write_map(bundle.centerline_map, paths["centerline_map"])
    write_chars(paths["chars"], bundle.chars)
    write_gt(paths["gt_words"], bundle.gt_words)
    lm = bundle.gt_assignment
    recs = [{"kind": "meta", "width": lm.width, "height": lm.height, "count": lm.component_count}]
    recs += [{"kind": "label", "label": k, "rle": rle_encode(component_pixels(lm, k))}
             for k in range(1, lm.component_count + 1)]
    write_records(paths["gt_assignment"], "labels", recs)
    return paths


def load_bundle(directory) -> SceneBundle:
    from pathlib import Path

    from .formats import read_chars, read_gt, read_records, rle_decode
    from .raster import read_map

    d = Path(directory)
    recs = read_records(d / BUNDLE_FILES["gt_assignment"], "labels")
    meta = next(r for r in recs if r.get("kind") == "meta")
    labels = np.zeros((meta["height"], meta["width"]), dtype=np.int64)
    for r in recs:
        if r.get("kind") == "label":
            p = rle_decode(r["rle"])
            labels[p[:, 1], p[:, 0]] = r["label"]
    return SceneBundle(
        word_map=read_map(d / BUNDLE_FILES["word_map"]),
        centerline_map=read_map(d / BUNDLE_FILES["centerline_map"]),
        chars=tuple(read_chars(d / BUNDLE_FILES["chars"])),
        gt_words=tuple(read_gt(d / BUNDLE_FILES["gt_words"])),
        gt_assignment=LabelMap(labels, meta["count"]),
    )
