"""Reaction-diagram parsing evaluation with soft and hard match semantics.

Soft match drops text entities, pools molecule reactants with molecule
conditions into one group, keeps products as a second group, and requires a
perfect one-to-one IoU > 0.5 matching inside each group. Hard match requires
a perfect matching over all entities with role and kind equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .detection import BBox, f1, iou
from .errors import CorpusError
from .matching import max_bipartite_matching

ROLES = ("reactant", "condition", "product")
KINDS = ("molecule", "text")
IOU_MATCH_THRESHOLD = 0.5


@dataclass(frozen=True)
class RxnEntity:
    role: str
    kind: str
    bbox: BBox

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "text" and self.role != "condition":
            raise ValueError("text entities are only allowed in the condition role")


@dataclass(frozen=True)
class Reaction:
    entities: tuple[RxnEntity, ...]

    def __post_init__(self):
        roles = [e.role for e in self.entities]
        if "reactant" not in roles or "product" not in roles:
            raise ValueError("reaction needs at least one reactant and one product")


def entity_match(a: RxnEntity, b: RxnEntity, require_role: bool) -> bool:
    if a.kind != b.kind:
        return False
    if require_role and a.role != b.role:
        return False
    return iou(a.bbox, b.bbox) > IOU_MATCH_THRESHOLD


def _perfect_matching(
    left: Sequence[RxnEntity], right: Sequence[RxnEntity], require_role: bool
) -> bool:
    if len(left) != len(right):
        return False
    if not left:
        return True
    edges = [
        (i, j)
        for i, a in enumerate(left)
        for j, b in enumerate(right)
        if entity_match(a, b, require_role)
    ]
    matching = max_bipartite_matching(len(left), len(right), edges)
    return len(matching) == len(left)


def soft_match(gt: Reaction, pred: Reaction) -> bool:
    def groups(rxn: Reaction):
        molecules = [e for e in rxn.entities if e.kind == "molecule"]
        left = [e for e in molecules if e.role in ("reactant", "condition")]
        products = [e for e in molecules if e.role == "product"]
        return left, products

    gt_left, gt_products = groups(gt)
    pred_left, pred_products = groups(pred)
    return _perfect_matching(gt_left, pred_left, require_role=False) and _perfect_matching(
        gt_products, pred_products, require_role=False
    )


def hard_match(gt: Reaction, pred: Reaction) -> bool:
    return _perfect_matching(list(gt.entities), list(pred.entities), require_role=True)


_MATCHERS = {"soft": soft_match, "hard": hard_match}


def reaction_prf(
    gt_pages: Mapping[str, Sequence[Reaction]],
    pred_pages: Mapping[str, Sequence[Reaction]],
    mode: str,
) -> dict:
    """Corpus precision/recall/F1 for one match mode, pages aligned by id."""
    if mode not in _MATCHERS:
        raise ValueError(f"mode must be 'soft' or 'hard': {mode!r}")
    gt_ids = set(gt_pages)
    pred_ids = set(pred_pages)
    if gt_ids != pred_ids:
        missing_pred = sorted(gt_ids - pred_ids)
        missing_gt = sorted(pred_ids - gt_ids)
        raise CorpusError(
            f"page_id mismatch: missing from predictions {missing_pred}, "
            f"missing from ground truth {missing_gt}"
        )
    matcher = _MATCHERS[mode]
    matched = 0
    total_gt = 0
    total_pred = 0
    rows = []
    for page_id in sorted(gt_ids):
        gts = list(gt_pages[page_id])
        preds = list(pred_pages[page_id])
        taken: set[int] = set()
        page_matched = 0
        for pred in preds:
            for gi, gt in enumerate(gts):
                if gi in taken:
                    continue
                if matcher(gt, pred):
                    taken.add(gi)
                    page_matched += 1
                    break
        matched += page_matched
        total_gt += len(gts)
        total_pred += len(preds)
        rows.append(
            {
                "page_id": page_id,
                "matched": page_matched,
                "n_gt": len(gts),
                "n_pred": len(preds),
            }
        )
    precision = matched / total_pred if total_pred else 0.0
    recall = matched / total_gt if total_gt else 0.0
    return {
        "mode": mode,
        "matched": matched,
        "n_gt": total_gt,
        "n_pred": total_pred,
        "precision": precision,
        "recall": recall,
        "f1": f1(precision, recall),
        "pages": rows,
    }
