"""The post-backbone dataflow: maps -> proposals -> verification -> geometry."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .config import PipelineConfig
from .formats import dumps_records, read_chars, rle_encode
from .geometry import axis_aligned_bbox, min_area_rect
from .proposals import generate_proposals
from .raster import as_map, read_map
from .verification import VerifiedResult, verify_proposals

__all__ = ["Detection", "DetectionResult", "detect", "detection_records", "run_detect"]


@dataclass
class Detection:
    proposal: object
    axis_box: object
    rect: object
    support: list


@dataclass
class DetectionResult:
    width: int
    height: int
    proposals: list
    verified: VerifiedResult
    detections: list

    @property
    def quads(self) -> list:
        return [d.rect.corners for d in self.detections]


def detect(word_map, centerline_map, chars, cfg: PipelineConfig = PipelineConfig()) -> DetectionResult:
    word_map = as_map(word_map)
    proposals = generate_proposals(word_map, centerline_map, cfg.proposal)
    verified = verify_proposals(proposals, chars, cfg.verification)
    dets = [
        Detection(p, axis_aligned_bbox(p.pixels), min_area_rect(p.pixels), verified.support[p.proposal_id])
        for p in verified.accepted
    ]
    return DetectionResult(word_map.width, word_map.height, proposals, verified, dets)


def detection_records(result: DetectionResult) -> list[dict]:
    recs = [{"kind": "meta", "width": result.width, "height": result.height,
             "n_proposals": len(result.proposals), "n_accepted": len(result.detections)}]
    for d in result.detections:
        r = d.rect
        recs.append({
            "kind": "word",
            "id": d.proposal.proposal_id,
            "seed_id": d.proposal.seed_id,
            "source": d.proposal.source.value,
            "axis_box": list(d.axis_box.as_tuple()),
            "quad": r.corners.tolist(),
            "rect": {"center": list(r.center), "width": r.width, "height": r.height, "angle": r.angle},
            "support": list(d.support),
            "rle": rle_encode(d.proposal.pixels),
        })
    for p, reason in result.verified.rejected:
        recs.append({
            "kind": "rejected",
            "id": p.proposal_id,
            "seed_id": p.seed_id,
            "source": p.source.value,
            "reason": reason.value,
            "axis_box": list(axis_aligned_bbox(p.pixels).as_tuple()),
            "rle": rle_encode(p.pixels),
        })
    return recs


def run_detect(word_map_path, centerline_map_path, chars_path, cfg: PipelineConfig = PipelineConfig(),
               output=None) -> str:
    """File-to-file detection; returns the document text and writes it when ``output`` is given."""
    word_map = read_map(word_map_path)
    centerline_map = read_map(centerline_map_path)
    chars = read_chars(chars_path)
    doc = dumps_records("detections", detection_records(detect(word_map, centerline_map, chars, cfg)))
    if output is not None:
        Path(output).write_text(doc)
    return doc
