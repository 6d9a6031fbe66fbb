"""Character-based verification of word proposals.

A proposal survives only if at least one confident character box is covered
well enough by the proposal's own pixels.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .raster import BinaryMask

__all__ = [
    "CharacterBox",
    "VerificationConfig",
    "RejectReason",
    "VerifiedResult",
    "fill_ratio",
    "supports",
    "supporting_characters",
    "verify_proposals",
]


@dataclass(frozen=True)
class CharacterBox:
    """Half-open integer box: pixel (x, y) is inside iff x_min <= x < x_max and y_min <= y < y_max."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int
    class_id: int = 1
    confidence: float = 1.0

    def __post_init__(self):
        for name in ("x_min", "y_min", "x_max", "y_max", "class_id"):
            object.__setattr__(self, name, int(getattr(self, name)))
        object.__setattr__(self, "confidence", float(self.confidence))
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate character box {self.bounds}")
        if not 0 <= self.class_id <= 94:
            raise ValueError(f"class_id must lie in [0, 94], got {self.class_id}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must lie in [0, 1], got {self.confidence}")

    @property
    def bounds(self) -> tuple[int, int, int, int]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    @property
    def area(self) -> int:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def contains(self, pixels: np.ndarray) -> np.ndarray:
        p = np.asarray(pixels).reshape(-1, 2)
        return (
            (p[:, 0] >= self.x_min) & (p[:, 0] < self.x_max)
            & (p[:, 1] >= self.y_min) & (p[:, 1] < self.y_max)
        )


@dataclass(frozen=True)
class VerificationConfig:
    min_confidence: float = 0.7
    support_ratio: float = 0.3

    def __post_init__(self):
        for name in ("min_confidence", "support_ratio"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


class RejectReason(enum.Enum):
    NO_CHARACTER_SUPPORT = "no_character_support"


@dataclass
class VerifiedResult:
    accepted: list
    rejected: list  # (proposal, RejectReason)
    support: dict = field(default_factory=dict)  # proposal_id -> indices into the character list


def fill_ratio(box: CharacterBox, pixels) -> float:
    """Fraction of the box's pixels that are foreground.

    ``pixels`` is either an ``(n, 2)`` array of ``(x, y)`` or a mask.
    Parts of the box outside the mask frame count as background.
    """
    if isinstance(pixels, BinaryMask) or (isinstance(pixels, np.ndarray) and pixels.dtype == bool):
        bits = pixels.bits if isinstance(pixels, BinaryMask) else pixels
        h, w = bits.shape
        x0, x1 = max(box.x_min, 0), min(box.x_max, w)
        y0, y1 = max(box.y_min, 0), min(box.y_max, h)
        inside = int(bits[y0:y1, x0:x1].sum()) if x0 < x1 and y0 < y1 else 0
    else:
        p = np.asarray(pixels, dtype=np.int64).reshape(-1, 2)
        if len(p):
            p = np.unique(p, axis=0)
        inside = int(box.contains(p).sum())
    return inside / box.area


def supports(box: CharacterBox, pixels, min_confidence: float, support_ratio: float) -> bool:
    return box.confidence >= min_confidence and fill_ratio(box, pixels) >= support_ratio


def supporting_characters(proposal, chars, cfg: VerificationConfig = VerificationConfig()) -> list[int]:
    return [
        k for k, c in enumerate(chars)
        if supports(c, proposal.pixels, cfg.min_confidence, cfg.support_ratio)
    ]


def verify_proposals(proposals, chars, cfg: VerificationConfig = VerificationConfig()) -> VerifiedResult:
    accepted, rejected, support = [], [], {}
    for p in proposals:
        ids = supporting_characters(p, chars, cfg)
        if ids:
            accepted.append(p)
            support[p.proposal_id] = ids
        else:
            rejected.append((p, RejectReason.NO_CHARACTER_SUPPORT))
    return VerifiedResult(accepted, rejected, support)
