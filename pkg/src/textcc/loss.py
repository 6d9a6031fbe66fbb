"""Forward value of the segmentation/detection consistency loss.

``l1`` charges confident character pixels missing from the word mask and
word-mask pixels of segments no character vouches for. ``l2`` charges
confident character boxes that the word mask leaves under-filled.
Empty index sets contribute zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .raster import as_mask, pixel_set
from .verification import fill_ratio, supports

__all__ = ["LossConfig", "LossReport", "phi_det", "psi_seg", "compute_consistency_loss"]


@dataclass(frozen=True)
class LossConfig:
    tau: float = 0.5
    min_confidence: float = 0.7

    def __post_init__(self):
        for name in ("tau", "min_confidence"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


@dataclass
class LossReport:
    l1: float
    l2: float
    total: float
    n_phi: int
    m_psi: int
    k_boxes: int
    per_box_ratio: list = field(default_factory=list)


def _phi_mask(chars, cfg: LossConfig, width: int, height: int) -> np.ndarray:
    out = np.zeros((height, width), dtype=bool)
    for c in chars:
        if c.confidence >= cfg.min_confidence:
            x0, x1 = max(c.x_min, 0), min(c.x_max, width)
            y0, y1 = max(c.y_min, 0), min(c.y_max, height)
            if x0 < x1 and y0 < y1:
                out[y0:y1, x0:x1] = True
    return out


def phi_det(chars, cfg: LossConfig, width: int, height: int) -> np.ndarray:
    """Pixels ``(x, y)`` inside any confident box, clipped to the frame."""
    ys, xs = np.nonzero(_phi_mask(chars, cfg, width, height))
    return np.column_stack([xs, ys]).astype(np.int64)


def _unsupported(segments, chars, cfg: LossConfig, support_ratio: float):
    for seg in segments:
        if not any(supports(c, seg.pixels, cfg.min_confidence, support_ratio) for c in chars):
            yield seg


def psi_seg(segments, chars, cfg: LossConfig, support_ratio: float = 0.3) -> np.ndarray:
    """Pixels of every segment that no confident character supports."""
    parts = [seg.pixels for seg in _unsupported(segments, chars, cfg, support_ratio)]
    return pixel_set(np.vstack(parts)) if parts else np.zeros((0, 2), dtype=np.int64)


def compute_consistency_loss(word_mask, segments, chars, cfg: LossConfig = LossConfig(),
                             support_ratio: float = 0.3) -> LossReport:
    word_mask = as_mask(word_mask)
    h, w = word_mask.shape
    for seg in segments:
        p = seg.pixels
        if len(p) and (p[:, 0].min() < 0 or p[:, 1].min() < 0 or p[:, 0].max() >= w or p[:, 1].max() >= h):
            raise ValueError(
                f"dimension mismatch: segment {seg.proposal_id} has pixels outside the {w}x{h} (WxH) mask"
            )
    s = word_mask.bits

    phi = _phi_mask(chars, cfg, w, h)
    psi = np.zeros_like(s)
    for seg in _unsupported(segments, chars, cfg, support_ratio):
        psi[seg.pixels[:, 1], seg.pixels[:, 0]] = True
    n = int(phi.sum())
    m = int(psi.sum())
    l1 = 0.0
    if n:
        l1 += int((phi & ~s).sum()) / (2 * n)
    if m:
        l1 += int((psi & s).sum()) / (2 * m)

    ratios = [fill_ratio(c, word_mask) for c in chars if c.confidence >= cfg.min_confidence]
    k = len(ratios)
    l2 = sum(r < cfg.tau for r in ratios) / (2 * k) if k else 0.0
    return LossReport(l1=l1, l2=l2, total=l1 + l2, n_phi=n, m_psi=m, k_boxes=k, per_box_ratio=ratios)
