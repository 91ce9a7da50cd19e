"""Command-line interface.

    chemeval detect     --gt GT --pred PRED --out OUT [--format json|csv]
    chemeval convert    --gt GT --pred PRED --out OUT [--format json|csv]
    chemeval combined   --gt GT --pred PRED --out OUT [--tau T] [--format ...]
    chemeval reactions  --gt GT --pred PRED --out OUT [--mode soft|hard|both] [--format ...]
    chemeval stats      --gt GT --out OUT [--format ...]
    chemeval gen-fixture --seed N --out DIR [generation params]

Exit statuses: 0 success, 2 input error, 3 undefined metric, 4 internal error.
Set CHEMEVAL_LOG=debug|info|warning to control log verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .combined import combined_page_detail, combined_prf, conversion_accuracy
from .corpus import (
    GroundTruthCorpus,
    PredictionCorpus,
    corpus_stats,
    load_ground_truth,
    load_predictions,
)
from .detection import coco_ap, coco_ar, f1
from .errors import (
    ChemevalError,
    CorpusError,
    FixtureError,
    UndefinedMetricError,
)
from .fixtures import FixtureParams, generate_fixture
from .reactions import reaction_prf
from .reporting import FORMATS, build_report, render_csv, render_json, write_report

EXIT_SUCCESS = 0
EXIT_INPUT_ERROR = 2
EXIT_UNDEFINED_METRIC = 3
EXIT_INTERNAL_ERROR = 4

log = logging.getLogger("chemeval")


def _aligned_pages(gt: GroundTruthCorpus, pred: PredictionCorpus):
    gt_ids = {p.page_id for p in gt.pages}
    pred_ids = {p.page_id for p in pred.pages}
    if gt_ids != pred_ids:
        raise CorpusError(
            f"page_id mismatch: missing from predictions {sorted(gt_ids - pred_ids)}, "
            f"missing from ground truth {sorted(pred_ids - gt_ids)}"
        )
    pred_by_id = {p.page_id: p for p in pred.pages}
    return [
        (page, pred_by_id[page.page_id])
        for page in sorted(gt.pages, key=lambda p: p.page_id)
    ]


def cmd_detect(args) -> int:
    gt = load_ground_truth(args.gt)
    pred = load_predictions(args.pred)
    pages = [
        ([m.scored_box for m in pp.molecules], [m.bbox for m in gp.molecules])
        for gp, pp in _aligned_pages(gt, pred)
    ]
    ap = coco_ap(pages)
    ar = coco_ar(pages)
    score = f1(ap, ar)
    row = {"dataset": gt.dataset, "ap": ap, "ar": ar, "f1": score}
    body = {"datasets": [row], "overall": {"ap": ap, "ar": ar, "f1": score}}
    report = build_report(
        "detect", {"format": args.format}, {"gt": args.gt, "pred": args.pred}, body
    )
    if args.format == "csv":
        text = render_csv(
            ["dataset", "ap", "ar", "f1"],
            [[r["dataset"], r["ap"], r["ar"], r["f1"]] for r in body["datasets"]]
            + [["overall", ap, ar, score]],
        )
    else:
        text = render_json(report)
    write_report(text, args.out)
    return EXIT_SUCCESS


def cmd_convert(args) -> int:
    gt = load_ground_truth(args.gt)
    pred = load_predictions(args.pred)
    pairs = []
    for gt_page, pred_page in _aligned_pages(gt, pred):
        gt_ids = {m.id for m in gt_page.molecules}
        pred_by_id = {}
        for m in pred_page.molecules:
            if m.id is None:
                continue
            if m.id not in gt_ids:
                raise CorpusError(
                    f"page {gt_page.page_id!r}: prediction references unknown "
                    f"molecule id {m.id!r}"
                )
            pred_by_id[m.id] = m
        for annotation in gt_page.molecules:
            predicted = pred_by_id.get(annotation.id)
            pairs.append(
                (annotation.molecule, predicted.molecule() if predicted else None)
            )
    match_rate, mean_tanimoto = conversion_accuracy(pairs)
    row = {
        "dataset": gt.dataset,
        "smiles_match_rate": match_rate,
        "mean_tanimoto": mean_tanimoto,
        "pairs": len(pairs),
    }
    body = {"datasets": [row]}
    report = build_report(
        "convert", {"format": args.format}, {"gt": args.gt, "pred": args.pred}, body
    )
    if args.format == "csv":
        text = render_csv(
            ["dataset", "smiles_match_rate", "mean_tanimoto", "pairs"],
            [[row["dataset"], match_rate, mean_tanimoto, len(pairs)]],
        )
    else:
        text = render_json(report)
    write_report(text, args.out)
    return EXIT_SUCCESS


def cmd_combined(args) -> int:
    gt = load_ground_truth(args.gt)
    pred = load_predictions(args.pred)
    aligned = _aligned_pages(gt, pred)
    pages = [
        (
            gp.page_id,
            [(m.bbox, m.key) for m in gp.molecules],
            [(m.bbox, m.key) for m in pp.molecules],
        )
        for gp, pp in aligned
    ]
    result = combined_prf(pages, tau=args.tau)
    diagnostics = []
    for page_id, gt_items, pred_items in pages:
        detail = combined_page_detail(gt_items, pred_items, tau=args.tau)
        if detail["fp_preds"] or detail["fn_gts"]:
            diagnostics.append(
                {
                    "page_id": page_id,
                    "fp_preds": detail["fp_preds"],
                    "fn_gts": detail["fn_gts"],
                    "key_mismatches": detail["key_mismatches"],
                }
            )
    body = {
        "dataset": gt.dataset,
        "tau": args.tau,
        "tp": result["tp"],
        "fp": result["fp"],
        "fn": result["fn"],
        "precision": result["precision"],
        "recall": result["recall"],
        "f1": result["f1"],
        "pages": result["pages"],
        "diagnostics": diagnostics,
    }
    report = build_report(
        "combined",
        {"tau": args.tau, "format": args.format},
        {"gt": args.gt, "pred": args.pred},
        body,
    )
    if args.format == "csv":
        text = render_csv(
            ["dataset", "tau", "tp", "fp", "fn", "precision", "recall", "f1"],
            [
                [
                    gt.dataset,
                    args.tau,
                    result["tp"],
                    result["fp"],
                    result["fn"],
                    result["precision"],
                    result["recall"],
                    result["f1"],
                ]
            ],
        )
    else:
        text = render_json(report)
    write_report(text, args.out)
    return EXIT_SUCCESS


def cmd_reactions(args) -> int:
    gt = load_ground_truth(args.gt)
    pred = load_predictions(args.pred)
    gt_pages = {p.page_id: p.reactions for p in gt.pages}
    pred_pages = {p.page_id: [r.reaction for r in p.reactions] for p in pred.pages}
    modes = ("soft", "hard") if args.mode == "both" else (args.mode,)
    blocks = {mode: reaction_prf(gt_pages, pred_pages, mode) for mode in modes}
    body = {"dataset": gt.dataset, "modes": blocks}
    report = build_report(
        "reactions",
        {"mode": args.mode, "format": args.format},
        {"gt": args.gt, "pred": args.pred},
        body,
    )
    if args.format == "csv":
        rows = [
            [gt.dataset, mode, b["precision"], b["recall"], b["f1"]]
            for mode, b in blocks.items()
        ]
        text = render_csv(["dataset", "mode", "precision", "recall", "f1"], rows)
    else:
        text = render_json(report)
    write_report(text, args.out)
    return EXIT_SUCCESS


def cmd_stats(args) -> int:
    gt = load_ground_truth(args.gt)
    stats = corpus_stats(gt)
    row = {
        "dataset": gt.dataset,
        "pages": stats.n_pages,
        "molecules": stats.n_molecules,
        "reactions": stats.n_reactions,
    }
    body = {"datasets": [row]}
    report = build_report("stats", {"format": args.format}, {"gt": args.gt}, body)
    if args.format == "csv":
        text = render_csv(
            ["dataset", "pages", "molecules", "reactions"],
            [[gt.dataset, stats.n_pages, stats.n_molecules, stats.n_reactions]],
        )
    else:
        text = render_json(report)
    write_report(text, args.out)
    return EXIT_SUCCESS


def cmd_gen_fixture(args) -> int:
    params = FixtureParams(
        pages=args.pages,
        molecules_per_page=(args.molecules_per_page[0], args.molecules_per_page[1]),
        reactions_per_page=(args.reactions_per_page[0], args.reactions_per_page[1]),
        box_jitter=args.box_jitter,
        structure_corruption_rate=args.corruption_rate,
        drop_rate=args.drop_rate,
        spurious_rate=args.spurious_rate,
        dataset=args.dataset,
    )
    paths = generate_fixture(args.seed, params, args.out)
    log.info("wrote %s", ", ".join(str(p) for p in paths))
    return EXIT_SUCCESS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemeval",
        description="Benchmark evaluation for page-level chemical information extraction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def io_args(p, pred=True):
        p.add_argument("--gt", required=True, help="ground-truth annotation JSON")
        if pred:
            p.add_argument("--pred", required=True, help="prediction JSON")
        p.add_argument("--out", required=True, help="report output path")
        p.add_argument("--format", choices=FORMATS, default="json")

    p = sub.add_parser("detect", help="COCO AP/AR/F1 for molecule detection")
    io_args(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("convert", help="SMILES match rate and mean Tanimoto (GT boxes)")
    io_args(p)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("combined", help="combined detection-to-conversion P/R/F1")
    io_args(p)
    p.add_argument("--tau", type=float, default=0.5, help="IoU threshold (default 0.5)")
    p.set_defaults(func=cmd_combined)

    p = sub.add_parser("reactions", help="soft/hard reaction parsing P/R/F1")
    io_args(p)
    p.add_argument("--mode", choices=("soft", "hard", "both"), default="both")
    p.set_defaults(func=cmd_reactions)

    p = sub.add_parser("stats", help="corpus statistics")
    io_args(p, pred=False)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("gen-fixture", help="generate a seeded synthetic corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--pages", type=int, default=10)
    p.add_argument("--molecules-per-page", type=int, nargs=2, default=(2, 6), metavar=("MIN", "MAX"))
    p.add_argument("--reactions-per-page", type=int, nargs=2, default=(0, 2), metavar=("MIN", "MAX"))
    p.add_argument("--box-jitter", type=float, default=0.0)
    p.add_argument("--corruption-rate", type=float, default=0.0)
    p.add_argument("--drop-rate", type=float, default=0.0)
    p.add_argument("--spurious-rate", type=float, default=0.0)
    p.add_argument("--dataset", default="fixture")
    p.set_defaults(func=cmd_gen_fixture)

    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("CHEMEVAL_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UndefinedMetricError as exc:
        print(f"chemeval: undefined metric: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED_METRIC
    except (CorpusError, FixtureError, FileNotFoundError) as exc:
        print(f"chemeval: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ChemevalError as exc:
        print(f"chemeval: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except Exception as exc:  # pragma: no cover
        log.exception("internal error")
        print(f"chemeval: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR


def entrypoint():  # console script
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
