"""Box geometry, detection matching, COCO-protocol AP/AR, F1, suppression."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import UndefinedMetricError

IOU_THRESHOLDS = tuple(0.5 + 0.05 * k for k in range(10))
_RECALL_GRID = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class BBox:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        values = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(v) and v >= 0 for v in values):
            raise ValueError(f"box coordinates must be finite and >= 0: {values}")
        if self.x2 <= self.x1 or self.y2 <= self.y1:
            raise ValueError(f"degenerate box: {values}")

    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)


@dataclass(frozen=True)
class ScoredBox:
    bbox: BBox
    score: float

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score out of range: {self.score}")


def iou(a: BBox, b: BBox) -> float:
    ix1 = max(a.x1, b.x1)
    iy1 = max(a.y1, b.y1)
    ix2 = min(a.x2, b.x2)
    iy2 = min(a.y2, b.y2)
    if ix2 <= ix1 or iy2 <= iy1:
        return 0.0
    inter = (ix2 - ix1) * (iy2 - iy1)
    return inter / (a.area() + b.area() - inter)


def match_detections(
    preds: Sequence[ScoredBox], gts: Sequence[BBox], threshold: float
) -> list[tuple[int, int]]:
    """Greedy score-ordered one-to-one matching at a single IoU threshold.

    Predictions are visited in descending score (ties by input order); each is
    paired with the unmatched ground-truth box of highest IoU >= threshold.
    """
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must be in (0, 1]: {threshold}")
    order, ious = _page_cache(preds, gts)
    return _greedy_match(order, ious, threshold)


def _page_cache(
    preds: Sequence[ScoredBox], gts: Sequence[BBox]
) -> tuple[list[int], list[list[float]]]:
    """Score-descending visit order plus the full prediction-by-gt IoU matrix.

    Computed once per page so the ten COCO thresholds share the same floats.
    """
    order = sorted(range(len(preds)), key=lambda k: (-preds[k].score, k))
    ious = [[iou(p.bbox, g) for g in gts] for p in preds]
    return order, ious


def _greedy_match(
    order: list[int], ious: list[list[float]], threshold: float
) -> list[tuple[int, int]]:
    taken: set[int] = set()
    matches: list[tuple[int, int]] = []
    for pi in order:
        row = ious[pi]
        best_gi = -1
        best_iou = 0.0
        for gi, value in enumerate(row):
            if gi in taken:
                continue
            if value >= threshold and value > best_iou:
                best_iou = value
                best_gi = gi
        if best_gi >= 0:
            taken.add(best_gi)
            matches.append((pi, best_gi))
    return matches


Page = tuple[Sequence[ScoredBox], Sequence[BBox]]


def _corpus_cache(pages: Sequence[Page]):
    return [
        (_page_cache(preds, gts), [p.score for p in preds]) for preds, gts in pages
    ]


def _threshold_tp_flags(caches, threshold: float):
    """Per prediction: (score, page index, pred index, matched flag)."""
    rows = []
    for page_idx, ((order, ious), scores) in enumerate(caches):
        matched = {pi for pi, _ in _greedy_match(order, ious, threshold)}
        for pi, score in enumerate(scores):
            rows.append((score, page_idx, pi, pi in matched))
    return rows


def _total_gt(pages: Sequence[Page]) -> int:
    return sum(len(gts) for _, gts in pages)


def coco_ap(pages: Sequence[Page]) -> float:
    """101-point interpolated AP averaged over IoU thresholds 0.50..0.95."""
    n_gt = _total_gt(pages)
    if n_gt == 0:
        raise UndefinedMetricError("AP undefined: corpus has zero ground-truth boxes")
    caches = _corpus_cache(pages)
    ap_sum = 0.0
    for threshold in IOU_THRESHOLDS:
        rows = _threshold_tp_flags(caches, threshold)
        if not rows:
            continue
        rows.sort(key=lambda r: (-r[0], r[1], r[2]))
        tp_flags = np.array([r[3] for r in rows], dtype=np.float64)
        tp = np.cumsum(tp_flags)
        fp = np.cumsum(1.0 - tp_flags)
        recall = tp / n_gt
        precision = tp / (tp + fp)
        # right-max interpolation, then sample the 101 recall points
        for k in range(len(precision) - 2, -1, -1):
            precision[k] = max(precision[k], precision[k + 1])
        indices = np.searchsorted(recall, _RECALL_GRID, side="left")
        sampled = np.where(indices < len(precision), precision[np.minimum(indices, len(precision) - 1)], 0.0)
        ap_sum += float(sampled.mean())
    return ap_sum / len(IOU_THRESHOLDS)


def coco_ar(pages: Sequence[Page]) -> float:
    """Recall (all detections kept, no per-image cap) averaged over thresholds."""
    n_gt = _total_gt(pages)
    if n_gt == 0:
        raise UndefinedMetricError("AR undefined: corpus has zero ground-truth boxes")
    caches = _corpus_cache(pages)
    total = 0.0
    for threshold in IOU_THRESHOLDS:
        matched = sum(
            len(_greedy_match(order, ious, threshold))
            for (order, ious), _ in caches
        )
        total += matched / n_gt
    return total / len(IOU_THRESHOLDS)


def f1(p: float, r: float) -> float:
    """Harmonic mean; 0 when both inputs are 0."""
    if not (0.0 <= p <= 1.0 and 0.0 <= r <= 1.0):
        raise ValueError(f"precision/recall out of range: {p}, {r}")
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def suppress_overlaps(
    boxes: Sequence[ScoredBox], iou_threshold: float, min_area: float = 0.0
) -> list[ScoredBox]:
    """Confidence-ordered overlap suppression with a minimum-area gate."""
    if not (0.0 < iou_threshold <= 1.0):
        raise ValueError(f"iou_threshold must be in (0, 1]: {iou_threshold}")
    if min_area < 0:
        raise ValueError(f"min_area must be >= 0: {min_area}")
    survivors = [b for b in boxes if b.bbox.area() >= min_area]
    survivors.sort(key=lambda b: -b.score)
    kept: list[ScoredBox] = []
    for box in survivors:
        if all(iou(box.bbox, other.bbox) < iou_threshold for other in kept):
            kept.append(box)
    return kept
