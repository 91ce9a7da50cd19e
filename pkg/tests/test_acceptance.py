"""Acceptance suite: eight primary criteria, one printed pass/fail line each.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
"""

import gc
import json
import math
import random
import time

import pytest

from chemeval.cli import main
from chemeval.combined import combined_counts, combined_prf
from chemeval.corpus import corpus_stats, load_ground_truth, load_predictions
from chemeval.detection import BBox, ScoredBox, coco_ap, coco_ar, f1
from chemeval.fixtures import FixtureParams, generate_fixture, random_molecule
from chemeval.graph import (
    Bond,
    Molecule,
    canonical_key,
    isomorphic,
    normalize,
)
from chemeval.molfile import parse_molfile, write_molfile
from chemeval.reactions import (
    Reaction,
    RxnEntity,
    entity_match,
    hard_match,
    reaction_prf,
    soft_match,
)
from chemeval.smiles import parse_smiles

from oracles import (
    oracle_coco_ap,
    oracle_coco_ar,
    oracle_combined_counts,
    oracle_perfect_matching,
    random_box,
    random_scored_box,
)


def report(criterion: str, ok: bool, detail: str):
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def permuted(m: Molecule, rng: random.Random) -> Molecule:
    perm = list(range(len(m.atoms)))
    rng.shuffle(perm)
    inverse = [0] * len(perm)
    for new, old in enumerate(perm):
        inverse[old] = new
    return Molecule(
        tuple(m.atoms[old] for old in perm),
        tuple(
            Bond(inverse[b.a], inverse[b.b], b.order, b.stereo_mark, b.direction)
            for b in m.bonds
        ),
    )


def test_criterion_1_f1_arithmetic():
    rows = [
        (0.914, 0.938, 0.926),
        (0.891, 0.930, 0.910),
        (0.895, 0.887, 0.891),
    ]
    deviations = [abs(f1(p, r) - expected) for p, r, expected in rows]
    report(
        "criterion 1 (F1 arithmetic)",
        all(d <= 0.0005 for d in deviations),
        f"max deviation {max(deviations):.2e} over {len(rows)} published rows",
    )


def test_criterion_2_canonicalization_soundness():
    rng = random.Random(1001)
    gc.collect()  # don't bill garbage from earlier tests to this timing
    started = time.perf_counter()

    n_molecules, n_permutations = 200, 1000
    mismatches = 0
    for _ in range(n_molecules):
        m = normalize(random_molecule(rng, 3, 8))
        reference = canonical_key(m)
        for _ in range(n_permutations):
            if canonical_key(permuted(m, rng)) != reference:
                mismatches += 1

    n_pairs = 500
    disagreements = 0
    pool = [normalize(random_molecule(rng, 3, 30)) for _ in range(200)]
    for k in range(n_pairs):
        if k % 2 == 0:
            a = rng.choice(pool)
            b = permuted(a, rng)  # guaranteed isomorphic pair
        else:
            a, b = rng.choice(pool), rng.choice(pool)
        if (canonical_key(a) == canonical_key(b)) != isomorphic(a, b):
            disagreements += 1

    elapsed = time.perf_counter() - started
    report(
        "criterion 2 (canonicalization soundness)",
        mismatches == 0 and disagreements == 0 and elapsed < 30.0,
        f"{n_molecules}x{n_permutations} permutations, {mismatches} mismatches; "
        f"{n_pairs} pairs, {disagreements} oracle disagreements; {elapsed:.1f}s",
    )


def test_criterion_3_format_round_trips():
    rng = random.Random(1002)
    n = 1000
    key_failures = 0
    coord_failures = 0
    for k in range(n):
        m = normalize(random_molecule(rng))
        reference = canonical_key(m)
        if canonical_key(normalize(parse_smiles(reference))) != reference:
            key_failures += 1
        doc = parse_molfile(write_molfile(m))
        if canonical_key(normalize(doc.molecule)) != reference:
            key_failures += 1
        if any(
            math.dist(a.coords, b.coords) >= 1e-3
            for a, b in zip(doc.molecule.atoms, m.atoms)
        ):
            coord_failures += 1
    report(
        "criterion 3 (format round trips)",
        key_failures == 0 and coord_failures == 0,
        f"{n} molecules through SMILES and MOLfile; "
        f"{key_failures} key failures, {coord_failures} coordinate failures",
    )


def test_criterion_4_combined_metric(tmp_path):
    rng = random.Random(1003)
    keys = ["C", "CC", "CCO", "c1ccccc1", "!invalid"]
    page_disagreements = 0
    n_pages = 500
    for _ in range(n_pages):
        gt = [(random_box(rng), rng.choice(keys[:4])) for _ in range(rng.randint(0, 5))]
        pred = []
        for box, _ in gt:
            if rng.random() < 0.8:
                dx = rng.uniform(0, 6)
                pred.append(
                    (BBox(box.x1 + dx, box.y1, box.x2 + dx, box.y2), rng.choice(keys))
                )
        for _ in range(rng.randint(0, 3)):
            pred.append((random_box(rng), rng.choice(keys)))
        got = combined_counts(gt, pred)
        if (got.tp, got.fp, got.fn) != oracle_combined_counts(gt, pred):
            page_disagreements += 1

    def run_fixture(seed, params):
        gt_path, pred_path, exp_path = generate_fixture(
            seed, params, tmp_path / f"fx-{seed}"
        )
        expected = json.loads(exp_path.read_text())
        gt = load_ground_truth(gt_path)
        pred_by_id = {p.page_id: p for p in load_predictions(pred_path).pages}
        result = combined_prf(
            [
                (
                    g.page_id,
                    [(m.bbox, m.key) for m in g.molecules],
                    [(m.bbox, m.key) for m in pred_by_id[g.page_id].molecules],
                )
                for g in gt.pages
            ],
            tau=expected["tau"],
        )
        return expected, result

    exp_mixed, got_mixed = run_fixture(
        41,
        FixtureParams(
            pages=10, box_jitter=40.0, structure_corruption_rate=0.25,
            drop_rate=0.15, spurious_rate=0.2,
        ),
    )
    mixed_exact = (got_mixed["tp"], got_mixed["fp"], got_mixed["fn"]) == (
        exp_mixed["tp"], exp_mixed["fp"], exp_mixed["fn"],
    )
    _, got_perfect = run_fixture(42, FixtureParams(pages=6))
    perfect_pole = (
        got_perfect["precision"] == got_perfect["recall"] == got_perfect["f1"] == 1.0
    )
    _, got_corrupt = run_fixture(
        43, FixtureParams(pages=6, structure_corruption_rate=1.0)
    )
    corrupt_pole = got_corrupt["precision"] == got_corrupt["recall"] == 0.0

    report(
        "criterion 4 (combined metric vs oracle)",
        page_disagreements == 0 and mixed_exact and perfect_pole and corrupt_pole,
        f"{n_pages} random pages, {page_disagreements} oracle disagreements; "
        f"fixture counts exact={mixed_exact}, perfect pole={perfect_pole}, "
        f"corrupted pole={corrupt_pole}",
    )


def test_criterion_5_coco_vs_oracle():
    rng = random.Random(1004)
    n_corpora = 25
    max_dev = 0.0
    for _ in range(n_corpora):
        pages = []
        for _ in range(rng.randint(1, 4)):
            gts = [random_box(rng) for _ in range(rng.randint(1, 5))]
            preds = [random_scored_box(rng) for _ in range(rng.randint(0, 5))]
            for g in gts:
                if rng.random() < 0.7:
                    dx = rng.uniform(-3, 3)
                    preds.append(
                        ScoredBox(
                            BBox(g.x1 + 2 + dx, g.y1 + 2, g.x2 + 2 + dx, g.y2 + 2),
                            round(rng.uniform(0.3, 1.0), 3),
                        )
                    )
            pages.append((preds, gts))
        max_dev = max(
            max_dev,
            abs(coco_ap(pages) - oracle_coco_ap(pages)),
            abs(coco_ar(pages) - oracle_coco_ar(pages)),
        )

    handcrafted = [([ScoredBox(BBox(0, 0, 10, 6), 0.9)], [BBox(0, 0, 10, 10)])]
    ap = coco_ap(handcrafted)
    ar = coco_ar(handcrafted)
    handcrafted_ok = abs(ap - 0.3) < 1e-12 and abs(ar - 0.3) < 1e-12

    report(
        "criterion 5 (COCO AP/AR vs oracle)",
        max_dev <= 1e-12 and handcrafted_ok,
        f"{n_corpora} random corpora, max |dev| {max_dev:.2e}; "
        f"IoU-0.60 case AP={ap:.12f} AR={ar:.12f}",
    )


def test_criterion_6_reaction_metrics():
    rng = random.Random(1005)

    def rand_rxn():
        entities = [
            RxnEntity("reactant", "molecule", random_box(rng)),
            RxnEntity("product", "molecule", random_box(rng)),
        ]
        for _ in range(rng.randint(0, 2)):
            role = rng.choice(["reactant", "condition", "product"])
            kind = "text" if (role == "condition" and rng.random() < 0.4) else "molecule"
            entities.append(RxnEntity(role, kind, random_box(rng)))
        return Reaction(tuple(entities))

    n_pairs = 1000
    violations = 0
    for _ in range(n_pairs):
        gt = rand_rxn()
        pred = gt if rng.random() < 0.5 else rand_rxn()
        if hard_match(gt, pred) and not soft_match(gt, pred):
            violations += 1

    def box(k):
        return BBox(100.0 * k, 0.0, 100.0 * k + 80.0, 80.0)

    swap_gt = Reaction((
        RxnEntity("reactant", "molecule", box(0)),
        RxnEntity("condition", "molecule", box(1)),
        RxnEntity("product", "molecule", box(2)),
    ))
    swap_pred = Reaction((
        RxnEntity("condition", "molecule", box(0)),
        RxnEntity("reactant", "molecule", box(1)),
        RxnEntity("product", "molecule", box(2)),
    ))
    soft_f1 = reaction_prf({"p": [swap_gt]}, {"p": [swap_pred]}, "soft")["f1"]
    hard_f1 = reaction_prf({"p": [swap_gt]}, {"p": [swap_pred]}, "hard")["f1"]

    matcher_disagreements = 0
    for _ in range(300):
        n = rng.randint(1, 5)  # plus the anchor stays within the oracle's cap of 6
        left = [RxnEntity("reactant", "molecule", random_box(rng)) for _ in range(n)]
        right = []
        for e in left:
            b = e.bbox
            dx = rng.uniform(0, 5)
            right.append(
                RxnEntity("reactant", "molecule", BBox(b.x1 + dx, b.y1, b.x2 + dx, b.y2))
            )
        rng.shuffle(right)
        anchor = (RxnEntity("product", "molecule", box(90)),)
        got = hard_match(Reaction(tuple(left) + anchor), Reaction(tuple(right) + anchor))
        expected = oracle_perfect_matching(
            list(left) + list(anchor),
            list(right) + list(anchor),
            lambda a, b: entity_match(a, b, require_role=True),
        )
        if got != expected:
            matcher_disagreements += 1

    report(
        "criterion 6 (reaction metrics)",
        violations == 0 and soft_f1 == 1.0 and hard_f1 == 0.0
        and matcher_disagreements == 0,
        f"{n_pairs} pairs, {violations} hard=>soft violations; role swap "
        f"soft F1={soft_f1} hard F1={hard_f1}; 300 groups, "
        f"{matcher_disagreements} matcher disagreements",
    )


def test_criterion_7_determinism(tmp_path):
    params = [
        "--pages", "5", "--box-jitter", "15", "--corruption-rate", "0.2",
        "--drop-rate", "0.1", "--spurious-rate", "0.1",
        "--reactions-per-page", "1", "2",
    ]
    assert main(["gen-fixture", "--seed", "77", "--out", str(tmp_path / "a")] + params) == 0
    assert main(["gen-fixture", "--seed", "77", "--out", str(tmp_path / "b")] + params) == 0
    fixture_ok = all(
        (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        for name in ("gt.json", "pred.json", "expected.json")
    )

    gt = str(tmp_path / "a" / "gt.json")
    pred = str(tmp_path / "a" / "pred.json")
    unstable = []
    for command in ("detect", "convert", "combined", "reactions", "stats"):
        outputs = []
        for run in ("r1", "r2"):
            out = tmp_path / f"{command}-{run}.json"
            args = [command, "--gt", gt, "--out", str(out)]
            if command != "stats":
                args += ["--pred", pred]
            assert main(args) == 0
            outputs.append(out.read_bytes())
        if outputs[0] != outputs[1]:
            unstable.append(command)

    report(
        "criterion 7 (determinism)",
        fixture_ok and not unstable,
        f"gen-fixture byte-stable={fixture_ok}; "
        f"unstable commands: {unstable or 'none'}",
    )


def test_criterion_8_throughput(tmp_path):
    params = FixtureParams(
        pages=550, molecules_per_page=(5, 9), reactions_per_page=(1, 3),
        box_jitter=20.0, structure_corruption_rate=0.1,
        drop_rate=0.05, spurious_rate=0.1,
    )
    gt_path, pred_path, _ = generate_fixture(88, params, tmp_path)

    gc.collect()  # generation litter should not count against evaluation time
    started = time.perf_counter()
    gt = load_ground_truth(gt_path)
    pred = load_predictions(pred_path)
    pred_by_id = {p.page_id: p for p in pred.pages}
    det_pages = [
        (
            [m.scored_box for m in pred_by_id[g.page_id].molecules],
            [m.bbox for m in g.molecules],
        )
        for g in gt.pages
    ]
    ap = coco_ap(det_pages)
    ar = coco_ar(det_pages)
    combined = combined_prf(
        [
            (
                g.page_id,
                [(m.bbox, m.key) for m in g.molecules],
                [(m.bbox, m.key) for m in pred_by_id[g.page_id].molecules],
            )
            for g in gt.pages
        ]
    )
    rx_gt = {p.page_id: p.reactions for p in gt.pages}
    rx_pred = {p.page_id: [r.reaction for r in p.reactions] for p in pred.pages}
    soft = reaction_prf(rx_gt, rx_pred, "soft")
    hard = reaction_prf(rx_gt, rx_pred, "hard")
    elapsed = time.perf_counter() - started

    stats = corpus_stats(gt)
    scale_ok = (
        stats.n_pages == 550
        and 3500 <= stats.n_molecules <= 4300
        and 800 <= stats.n_reactions <= 1300
    )
    sane = 0.0 <= ap <= 1.0 and 0.0 <= ar <= 1.0 and 0.0 <= combined["f1"] <= 1.0
    assert soft["n_gt"] == stats.n_reactions and hard["n_gt"] == stats.n_reactions

    report(
        "criterion 8 (throughput)",
        scale_ok and sane and elapsed < 10.0,
        f"{stats.n_pages} pages / {stats.n_molecules} molecules / "
        f"{stats.n_reactions} reactions evaluated in {elapsed:.1f}s",
    )
