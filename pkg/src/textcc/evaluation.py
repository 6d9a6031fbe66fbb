"""Precision / recall / F-score for word detections.

Two protocols:

* ``iou``: greedy one-to-one matching in descending IoU order.
* ``deteval``: area-recall / area-precision matching with one-to-one,
  one-to-many (split) and many-to-one (merge) cases. The constants
  ``tr=0.8``, ``tp=0.4`` and the 0.8 split/merge credit are the usual
  DetEval defaults used by the ICDAR evaluation scripts.

Overlaps between two axis-aligned boxes are computed exactly; anything
involving a polygon is rasterised at pixel centres.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import AxisBox, rasterize_polygon

__all__ = [
    "GroundTruthWord",
    "MatchReport",
    "f_score",
    "iou",
    "match_one_to_one",
    "match_deteval",
    "evaluate",
    "aggregate",
]

DETEVAL_TR = 0.8
DETEVAL_TP = 0.4
DETEVAL_SPLIT_CREDIT = 0.8


@dataclass(frozen=True, eq=False)
class GroundTruthWord:
    """Either an :class:`AxisBox` or a polygon given as an ``(k, 2)`` array of corners."""

    box: object
    ignore_flag: bool = False

    def __post_init__(self):
        if not isinstance(self.box, AxisBox):
            c = np.asarray(self.box, dtype=np.float64)
            if c.ndim != 2 or c.shape[1] != 2 or len(c) < 3:
                raise ValueError(f"polygon must be a (k>=3, 2) array, got shape {c.shape}")
            object.__setattr__(self, "box", c)


@dataclass
class MatchReport:
    pairs: list  # (gt index, det index, score)
    unmatched_gt: list
    unmatched_det: list
    recall: float
    precision: float
    f_score: float
    # raw counts so per-image reports can be pooled
    matched_gt: float = 0.0
    matched_det: float = 0.0
    n_gt: int = 0
    n_det: int = 0
    extra: dict = field(default_factory=dict)


def f_score(recall: float, precision: float) -> float:
    """Harmonic mean; 0 when both inputs are 0."""
    if recall + precision == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _shape(region):
    if isinstance(region, GroundTruthWord):
        region = region.box
    return region


def _pixels(region) -> set:
    region = _shape(region)
    if isinstance(region, AxisBox):
        xs, ys = np.meshgrid(np.arange(region.x_min, region.x_max), np.arange(region.y_min, region.y_max))
        pts = np.column_stack([xs.ravel(), ys.ravel()])
    else:
        pts = rasterize_polygon(region)
    return set(map(tuple, pts.tolist()))


class _Overlaps:
    """Cached intersection/area bookkeeping for one gt/det list pair."""

    def __init__(self, gt, det):
        self.gt = [_shape(g) for g in gt]
        self.det = [_shape(d) for d in det]
        self._pix: dict = {}

    def pix(self, side, i):
        key = (side, i)
        if key not in self._pix:
            self._pix[key] = _pixels((self.gt if side == "g" else self.det)[i])
        return self._pix[key]

    def area(self, side, i) -> float:
        r = (self.gt if side == "g" else self.det)[i]
        if isinstance(r, AxisBox):
            return float(r.area)
        return float(len(self.pix(side, i)))

    def inter(self, i, j) -> float:
        a, b = self.gt[i], self.det[j]
        if isinstance(a, AxisBox) and isinstance(b, AxisBox):
            w = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
            h = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
            return float(max(w, 0) * max(h, 0))
        return float(len(self.pix("g", i) & self.pix("d", j)))

    def iou(self, i, j) -> float:
        inter = self.inter(i, j)
        union = self.area("g", i) + self.area("d", j) - inter
        return inter / union if union > 0 else 0.0


def iou(a, b) -> float:
    """IoU of two regions (AxisBox, polygon or GroundTruthWord)."""
    return _Overlaps([a], [b]).iou(0, 0)


def _finish(pairs, gt, n_det, matched_gt, matched_det, n_gt_care, n_det_care, extra=None) -> MatchReport:
    recall = matched_gt / n_gt_care if n_gt_care else 0.0
    precision = matched_det / n_det_care if n_det_care else 0.0
    g_used = {p[0] for p in pairs}
    d_used = {p[1] for p in pairs}
    return MatchReport(
        pairs=pairs,
        unmatched_gt=[i for i, g in enumerate(gt) if i not in g_used and not g.ignore_flag],
        unmatched_det=[j for j in range(n_det) if j not in d_used and j not in (extra or {}).get("ignored_det", ())],
        recall=recall,
        precision=precision,
        f_score=f_score(recall, precision),
        matched_gt=matched_gt,
        matched_det=matched_det,
        n_gt=n_gt_care,
        n_det=n_det_care,
        extra=extra or {},
    )


def match_one_to_one(gt, det, iou_threshold: float = 0.5) -> MatchReport:
    """Greedy one-to-one IoU matching.

    Detections matched to an ignore-flagged ground truth are dropped from
    the precision denominator; ignore-flagged words never count as missed.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must lie in (0, 1], got {iou_threshold}")
    gt = [g if isinstance(g, GroundTruthWord) else GroundTruthWord(g) for g in gt]
    ov = _Overlaps(gt, det)
    cand = []
    for i in range(len(gt)):
        for j in range(len(det)):
            s = ov.iou(i, j)
            if s >= iou_threshold:
                cand.append((-s, i, j))
    cand.sort()
    g_used, d_used = set(), set()
    pairs, ignored_det = [], []
    for neg, i, j in cand:
        if i in g_used or j in d_used:
            continue
        g_used.add(i)
        d_used.add(j)
        if gt[i].ignore_flag:
            ignored_det.append(j)
        else:
            pairs.append((i, j, -neg))
    pairs.sort(key=lambda p: (p[0], p[1]))
    n_gt_care = sum(not g.ignore_flag for g in gt)
    n_det_care = len(det) - len(ignored_det)
    return _finish(pairs, gt, len(det), float(len(pairs)), float(len(pairs)), n_gt_care, n_det_care,
                   {"ignored_det": sorted(ignored_det)})


def match_deteval(gt, det, tr: float = DETEVAL_TR, tp: float = DETEVAL_TP,
                  split_credit: float = DETEVAL_SPLIT_CREDIT) -> MatchReport:
    """DetEval-style matching (one-to-one, one-to-many, many-to-one)."""
    gt = [g if isinstance(g, GroundTruthWord) else GroundTruthWord(g) for g in gt]
    ov = _Overlaps(gt, det)
    ng, nd = len(gt), len(det)
    rec = np.zeros((ng, nd))
    prec = np.zeros((ng, nd))
    for i in range(ng):
        ga = ov.area("g", i)
        for j in range(nd):
            inter = ov.inter(i, j)
            if inter:
                rec[i, j] = inter / ga if ga else 0.0
                da = ov.area("d", j)
                prec[i, j] = inter / da if da else 0.0

    # detections mostly covering a don't-care region are discarded up front
    ignored_det = set()
    for j in range(nd):
        cover = sum(prec[i, j] for i in range(ng) if gt[i].ignore_flag)
        if cover > tp:
            ignored_det.add(j)
    care_g = [i for i in range(ng) if not gt[i].ignore_flag]
    care_d = [j for j in range(nd) if j not in ignored_det]

    g_done, d_done = set(), set()
    pairs = []
    matched_gt = matched_det = 0.0

    # one-to-one
    for i in care_g:
        for j in care_d:
            if i in g_done or j in d_done:
                continue
            if rec[i, j] >= tr and prec[i, j] >= tp:
                row_ok = sum(1 for jj in care_d if rec[i, jj] >= tr and prec[i, jj] >= tp) == 1
                col_ok = sum(1 for ii in care_g if rec[ii, j] >= tr and prec[ii, j] >= tp) == 1
                if row_ok and col_ok:
                    g_done.add(i)
                    d_done.add(j)
                    pairs.append((i, j, float(min(rec[i, j], prec[i, j]))))
                    matched_gt += 1.0
                    matched_det += 1.0

    # one gt split across several detections
    for i in care_g:
        if i in g_done:
            continue
        many = [j for j in care_d if j not in d_done and prec[i, j] >= tp]
        if len(many) >= 2 and sum(rec[i, j] for j in many) >= tr:
            g_done.add(i)
            d_done.update(many)
            pairs.extend((i, j, float(prec[i, j])) for j in many)
            matched_gt += split_credit
            matched_det += split_credit * len(many)

    # several gts merged into one detection
    for j in care_d:
        if j in d_done:
            continue
        many = [i for i in care_g if i not in g_done and rec[i, j] >= tr]
        if len(many) >= 2 and sum(prec[i, j] for i in many) >= tp:
            d_done.add(j)
            g_done.update(many)
            pairs.extend((i, j, float(rec[i, j])) for i in many)
            matched_gt += split_credit * len(many)
            matched_det += split_credit

    pairs.sort(key=lambda p: (p[0], p[1]))
    return _finish(pairs, gt, nd, matched_gt, matched_det, len(care_g), len(care_d),
                   {"ignored_det": sorted(ignored_det)})


def evaluate(gt, det, protocol: str = "iou", iou_threshold: float = 0.5) -> MatchReport:
    if protocol == "iou":
        return match_one_to_one(gt, det, iou_threshold)
    if protocol == "deteval":
        return match_deteval(gt, det)
    raise ValueError(f"unknown protocol {protocol!r}")


def aggregate(reports) -> dict:
    """Pool per-image reports by summing match counts."""
    mg = sum(r.matched_gt for r in reports)
    md = sum(r.matched_det for r in reports)
    ng = sum(r.n_gt for r in reports)
    nd = sum(r.n_det for r in reports)
    recall = mg / ng if ng else 0.0
    precision = md / nd if nd else 0.0
    return {
        "recall": recall,
        "precision": precision,
        "f_score": f_score(recall, precision),
        "matched_gt": mg,
        "matched_det": md,
        "n_gt": ng,
        "n_det": nd,
    }
