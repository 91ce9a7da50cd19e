"""Combined detection-plus-conversion precision/recall/F1 and conversion accuracy.

A true positive requires an IoU >= tau box pairing whose predicted structure
key equals the ground-truth key; pairing is one-to-one (a prediction is
consumed once), with TP maximized over all admissible assignments so the
count matches the exhaustive-assignment reference exactly. FP and FN follow
by closure: FP = |preds| - TP, FN = |gts| - TP.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .detection import BBox, f1, iou
from .errors import UndefinedMetricError
from .graph import Molecule, canonical_key, fingerprint, tanimoto
from .matching import max_bipartite_matching

# Sentinel for structures that failed to parse; matches nothing.
INVALID_KEY = "!invalid"


@dataclass(frozen=True)
class CombinedCounts:
    tp: int
    fp: int
    fn: int

    def __add__(self, other: "CombinedCounts") -> "CombinedCounts":
        return CombinedCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


KeyedBox = tuple[BBox, str]


def combined_counts(
    gt: Sequence[KeyedBox], pred: Sequence[KeyedBox], tau: float = 0.5
) -> CombinedCounts:
    """Page-level TP/FP/FN with structure-aware one-to-one matching."""
    if not (0.0 < tau <= 1.0):
        raise ValueError(f"tau must be in (0, 1]: {tau}")
    edges = []
    for gi, (gt_box, gt_key) in enumerate(gt):
        for pi, (pred_box, pred_key) in enumerate(pred):
            if pred_key == INVALID_KEY or pred_key != gt_key:
                continue
            if iou(gt_box, pred_box) >= tau:
                edges.append((gi, pi))
    matching = max_bipartite_matching(len(gt), len(pred), edges)
    tp = len(matching)
    return CombinedCounts(tp=tp, fp=len(pred) - tp, fn=len(gt) - tp)


def combined_page_detail(
    gt: Sequence[KeyedBox], pred: Sequence[KeyedBox], tau: float = 0.5
) -> dict:
    """Counts plus matched/unmatched item indices for error analysis."""
    if not (0.0 < tau <= 1.0):
        raise ValueError(f"tau must be in (0, 1]: {tau}")
    edges = []
    for gi, (gt_box, gt_key) in enumerate(gt):
        for pi, (pred_box, pred_key) in enumerate(pred):
            if pred_key == INVALID_KEY or pred_key != gt_key:
                continue
            if iou(gt_box, pred_box) >= tau:
                edges.append((gi, pi))
    matching = max_bipartite_matching(len(gt), len(pred), edges)
    matched_gts = set(matching)
    matched_preds = set(matching.values())
    mismatches = []
    for gi, (gt_box, gt_key) in enumerate(gt):
        if gi in matched_gts:
            continue
        for pi, (pred_box, pred_key) in enumerate(pred):
            if pi in matched_preds:
                continue
            if iou(gt_box, pred_box) >= tau:
                mismatches.append(
                    {"gt": gi, "pred": pi, "gt_key": gt_key, "pred_key": pred_key}
                )
                matched_preds.add(pi)
                break
    counts = CombinedCounts(
        tp=len(matching), fp=len(pred) - len(matching), fn=len(gt) - len(matching)
    )
    fp_items = sorted(set(range(len(pred))) - set(matching.values()))
    fn_items = sorted(set(range(len(gt))) - matched_gts)
    return {
        "counts": counts,
        "matches": sorted(matching.items()),
        "key_mismatches": mismatches,
        "fp_preds": fp_items,
        "fn_gts": fn_items,
    }


def prf_from_counts(counts: CombinedCounts) -> tuple[float, float, float]:
    denom_p = counts.tp + counts.fp
    denom_r = counts.tp + counts.fn
    precision = counts.tp / denom_p if denom_p else 0.0
    recall = counts.tp / denom_r if denom_r else 0.0
    return precision, recall, f1(precision, recall)


def combined_prf(
    pages: Sequence[tuple[str, Sequence[KeyedBox], Sequence[KeyedBox]]],
    tau: float = 0.5,
) -> dict:
    """Corpus-level Eq.-style precision/recall/F1 with per-page breakdown."""
    total = CombinedCounts(0, 0, 0)
    rows = []
    n_gt = 0
    for page_id, gt, pred in pages:
        n_gt += len(gt)
        counts = combined_counts(gt, pred, tau)
        total = total + counts
        p, r, f = prf_from_counts(counts)
        rows.append(
            {
                "page_id": page_id,
                "tp": counts.tp,
                "fp": counts.fp,
                "fn": counts.fn,
                "precision": p,
                "recall": r,
                "f1": f,
            }
        )
    if n_gt == 0:
        raise UndefinedMetricError("combined metric undefined: zero GT molecules")
    precision, recall, f = prf_from_counts(total)
    return {
        "tp": total.tp,
        "fp": total.fp,
        "fn": total.fn,
        "precision": precision,
        "recall": recall,
        "f1": f,
        "pages": rows,
    }


def conversion_accuracy(
    pairs: Sequence[tuple[Molecule, Molecule | None]]
) -> tuple[float, float]:
    """(SMILES match rate, mean Tanimoto); invalid predictions score 0 on both."""
    if not pairs:
        raise UndefinedMetricError("conversion accuracy undefined: no pairs")
    matches = 0
    tanimoto_sum = 0.0
    for gt_mol, pred_mol in pairs:
        if pred_mol is None:
            continue
        if canonical_key(gt_mol) == canonical_key(pred_mol):
            matches += 1
        tanimoto_sum += tanimoto(fingerprint(gt_mol), fingerprint(pred_mol))
    return matches / len(pairs), tanimoto_sum / len(pairs)
